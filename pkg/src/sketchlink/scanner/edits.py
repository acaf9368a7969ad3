"""File edits: inserting and removing anchor tags.

Insertion only ever adds whole lines, which keeps the diff minimal and makes
removal an exact inverse: remove_anchor(insert_anchor(text, ...)) returns
the original bytes.
"""

from __future__ import annotations

from sketchlink.anchors import AnchorId, AnchorKind, format_anchor_id
from sketchlink.scanner.comments import Comment, Segmented, segment
from sketchlink.scanner.profiles import LanguageProfile
from sketchlink.scanner.scan import (
    TAG_KEYWORD,
    ScannerError,
    SourceAnchorOccurrence,
    _find_comment_tags,
    comment_prose,
    scan_source,
)


class EditError(ScannerError):
    """Base class for anchor edit failures."""


class LineOutOfRange(EditError):
    pass


class DuplicateAnchor(EditError):
    pass


class AnchorNotFound(EditError):
    pass


def _leading_ws(line: str) -> str:
    return line[: len(line) - len(line.lstrip(" \t"))]


def _newline_style(text: str) -> str:
    return "\r\n" if "\r\n" in text else "\n"


def _appendable_doc_comment(
    seg: Segmented, line: int, profile: LanguageProfile
) -> Comment | None:
    """A multi-line doc comment ending at `line` whose closer sits on its own
    line and which already has content. Tags are appended inside such
    comments; everything else gets a fresh tag-only comment."""
    if not profile.doc_open or not profile.doc_close:
        return None
    for comment in seg.comments:
        if comment.kind != "doc":
            continue
        end_line, _ = seg.line_col(comment.end - 1) if comment.end else (0, 0)
        start_line = seg.line_of(comment.start)
        if end_line != line or start_line == end_line:
            continue
        if not seg.text[comment.start : comment.end].endswith(profile.doc_close):
            continue
        line_start, _ = seg.line_bounds(end_line)
        closer_start = comment.end - len(profile.doc_close)
        if seg.text[line_start:closer_start].strip():
            continue  # closer shares its line with comment text
        tags = next(
            (e for e in _find_comment_tags(seg, profile) if e.comment is comment), None
        )
        spans = tuple((s, e) for s, e, _ in tags.tags) if tags else ()
        if not comment_prose(seg, comment, profile, spans) and not spans:
            continue  # empty comment: appending would make removal ambiguous
        return comment
    return None


def _enclosing_block_comment(
    seg: Segmented, line: int
) -> Comment | None:
    """The block/doc comment a line inserted above `line` would land inside."""
    for comment in seg.comments:
        if comment.kind == "line":
            continue
        start_line = seg.line_of(comment.start)
        end_line = seg.line_of(comment.end - 1) if comment.end else start_line
        if start_line <= line - 1 and end_line >= line:
            return comment
    return None


def insert_anchor(
    text: str, line: int, anchor: AnchorId, profile: LanguageProfile
) -> tuple[str, SourceAnchorOccurrence]:
    """Insert a tag for `anchor` above the 1-based `line`.

    Appends inside a doc comment that ends directly above the line when one
    exists; otherwise a new tag-only comment line is inserted. Only whole
    lines are ever added, so `remove_anchor` undoes the edit byte-for-byte.
    """
    if anchor.kind is not AnchorKind.SOURCE_CODE:
        raise ValueError(f"source anchors must have kind source-code, got {anchor.kind.label}")
    lines = text.splitlines(keepends=True)
    if line < 1 or line > len(lines):
        raise LineOutOfRange(f"line {line} outside file of {len(lines)} lines")
    existing = scan_source(text, "<edit>", profile)
    if any(occ.anchor == anchor for occ in existing.occurrences):
        raise DuplicateAnchor(f"anchor {anchor} already present")

    newline = _newline_style(text)
    tag_text = f"{TAG_KEYWORD} {format_anchor_id(anchor)}"
    seg = segment(text, profile)
    indent = _leading_ws(lines[line - 1])

    target = _appendable_doc_comment(seg, line - 1, profile)
    if target is not None:
        closer_line = seg.line_of(target.end - 1)
        gutter = _leading_ws(seg.line_text(closer_line))
        new_line = f"{gutter}* {tag_text}{newline}"
        insert_at = closer_line - 1
    elif _enclosing_block_comment(seg, line) is not None:
        # Landing inside a block comment: a delimited comment would split it,
        # so add a gutter-style tag line instead.
        new_line = f"{indent}* {tag_text}{newline}"
        insert_at = line - 1
    else:
        if profile.doc_open and profile.doc_close:
            body = f"{profile.doc_open} {tag_text} {profile.doc_close}"
        else:
            body = f"{profile.line_prefix} {tag_text}"
        new_line = f"{indent}{body}{newline}"
        insert_at = line - 1

    lines.insert(insert_at, new_line)
    edited = "".join(lines)
    rescanned = scan_source(edited, "<edit>", profile)
    for occ in rescanned.occurrences:
        if occ.anchor == anchor:
            return edited, occ
    raise EditError("inserted tag is not scannable at this position")


_DELIMITER_TOKENS = "*"


def _decoration_only(fragment: str, profile: LanguageProfile) -> bool:
    """True when a line fragment holds only comment delimiters and gutters."""
    tokens = [profile.doc_open, profile.doc_close, profile.block_open, profile.block_close]
    cleaned = fragment
    for token in tokens:
        if token:
            cleaned = cleaned.replace(token, " ")
    cleaned = cleaned.replace(profile.line_prefix, " ")
    return cleaned.replace("*", " ").strip() == ""


def remove_anchor(text: str, anchor: AnchorId, profile: LanguageProfile) -> str:
    """Remove every tag carrying `anchor`; prune comments that become empty."""
    seg = segment(text, profile)
    deletions: list[tuple[int, int]] = []
    found = False

    for entry in _find_comment_tags(seg, profile):
        ours = [(s, e) for s, e, a in entry.tags if a == anchor]
        if not ours:
            continue
        found = True
        comment = entry.comment
        others = [(s, e) for s, e, a in entry.tags if a != anchor]
        all_spans = tuple((s, e) for s, e, _ in entry.tags)
        prose = comment_prose(seg, comment, profile, all_spans)
        tag_only = not prose and not others and not entry.bad

        if tag_only:
            deletions.append(_comment_deletion(seg, comment))
            continue
        for tag_start, tag_end in ours:
            deletions.append(
                _tag_deletion(seg, comment, tag_start, tag_end, profile)
            )

    if not found:
        raise AnchorNotFound(f"anchor {anchor} not present")

    result = text
    for start, end in sorted(deletions, reverse=True):
        result = result[:start] + result[end:]
    return result


def _comment_deletion(seg: Segmented, comment: Comment) -> tuple[int, int]:
    start_line = seg.line_of(comment.start)
    end_line = seg.line_of(comment.end - 1) if comment.end else start_line
    first_start, _ = seg.line_bounds(start_line)
    last_start, last_end = seg.line_bounds(end_line)
    alone = (
        seg.text[first_start : comment.start].strip() == ""
        and seg.text[comment.end : last_end].strip() == ""
    )
    if alone:
        end = last_end + 1 if last_end < len(seg.text) else last_end
        return first_start, end
    start = comment.start
    while start > first_start and seg.text[start - 1] in " \t":
        start -= 1
    return start, comment.end


def _tag_deletion(
    seg: Segmented,
    comment: Comment,
    tag_start: int,
    tag_end: int,
    profile: LanguageProfile,
) -> tuple[int, int]:
    line = seg.line_of(tag_start)
    line_start, line_end = seg.line_bounds(line)
    remainder = seg.text[line_start:tag_start] + seg.text[tag_end:line_end]

    start_line = seg.line_of(comment.start)
    end_line = seg.line_of(comment.end - 1) if comment.end else start_line
    if comment.kind == "line":
        deletable = any(seg.line_of(s) == line for s, _ in comment.segments)
    else:
        deletable = start_line < line < end_line

    if deletable and _decoration_only(remainder, profile):
        end = line_end + 1 if line_end < len(seg.text) else line_end
        return line_start, end
    start = tag_start
    if start > line_start and seg.text[start - 1] in " \t":
        start -= 1
    return start, tag_end
