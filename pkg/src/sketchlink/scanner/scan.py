"""Anchor tag scanning and referent resolution.

Tags have the form ``@sketchlink <anchor>`` and are only recognized inside
comments. A tag's referent is the statement sharing the comment's line when
one exists, otherwise the next declaration or statement after the comment,
and the whole file when nothing follows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from sketchlink.anchors import AnchorError, AnchorId, AnchorKind, parse_anchor_id
from sketchlink.scanner.comments import Comment, Segmented, TextSpan, segment
from sketchlink.scanner.declarations import DeclInfo, Referent, find_package, parse_declarations
from sketchlink.scanner.ignore import iter_source_files
from sketchlink.scanner.profiles import LanguageProfile, profile_for_path

TAG_KEYWORD = "@sketchlink"
FOLD_ICON = "\U0001f517"  # link symbol shown in place of folded text

_TAG_RE = re.compile(r"(?<![\w@])@sketchlink\b(?:[ \t]+(\S+))?")


class ScannerError(Exception):
    """Base class for scanner failures."""


class EncodingError(ScannerError):
    """Source bytes are not valid UTF-8."""


class RootMissing(ScannerError):
    """Scan root does not exist or is not a directory."""


@dataclass(frozen=True)
class SourceAnchorOccurrence:
    """One ``@sketchlink`` tag found inside a comment."""

    anchor: AnchorId
    file: str
    tag_line: int
    tag_span: TextSpan
    comment_span: TextSpan
    hide_whole_comment: bool


@dataclass(frozen=True)
class ScanWarning:
    file: str
    line: int
    col: int
    message: str


@dataclass(frozen=True)
class ScanResult:
    occurrences: tuple[SourceAnchorOccurrence, ...]
    warnings: tuple[ScanWarning, ...]


@dataclass(frozen=True)
class FoldRange:
    """A span an editor collapses behind `label`. Spans nest, never cross."""

    span: TextSpan
    label: str
    kind: str  # "tag" | "comment"


@dataclass(frozen=True)
class FileScan:
    """Scan output for one file; referents[i] resolves occurrences[i]."""

    path: str
    mtime: float
    declarations: tuple[Referent, ...]
    occurrences: tuple[SourceAnchorOccurrence, ...]
    referents: tuple[Referent, ...]
    warnings: tuple[ScanWarning, ...]


@dataclass(frozen=True)
class ProjectIndex:
    """The scanned artifact tree of one project working copy."""

    project_name: str
    root: str
    files: tuple[FileScan, ...]
    scanned_at: datetime
    errors: tuple[str, ...] = ()

    def find_anchor(
        self, anchor: AnchorId
    ) -> tuple[FileScan, SourceAnchorOccurrence, Referent] | None:
        for file in self.files:
            for occ, referent in zip(file.occurrences, file.referents):
                if occ.anchor == anchor:
                    return file, occ, referent
        return None

    @property
    def occurrence_count(self) -> int:
        return sum(len(f.occurrences) for f in self.files)

    def source_anchors(self) -> set[AnchorId]:
        return {occ.anchor for f in self.files for occ in f.occurrences}


# --- tag discovery -----------------------------------------------------------


@dataclass
class _CommentTags:
    comment: Comment
    tags: list[tuple[int, int, AnchorId]] = field(default_factory=list)
    bad: list[tuple[int, str]] = field(default_factory=list)


def _find_comment_tags(seg: Segmented, profile: LanguageProfile) -> list[_CommentTags]:
    closers = tuple(t for t in (profile.doc_close, profile.block_close) if t)
    found: list[_CommentTags] = []
    for comment in seg.comments:
        entry = _CommentTags(comment)
        for seg_start, seg_end in comment.segments:
            for match in _TAG_RE.finditer(seg.text, seg_start, seg_end):
                token = match.group(1)
                if token is None:
                    entry.bad.append((match.start(), "tag is missing its anchor id"))
                    continue
                for closer in closers:
                    if token.endswith(closer) and len(token) > len(closer):
                        token = token[: -len(closer)]
                if token in closers:
                    entry.bad.append((match.start(), "tag is missing its anchor id"))
                    continue
                end = match.start(1) + len(token)
                try:
                    anchor = parse_anchor_id(token)
                except AnchorError as exc:
                    entry.bad.append((match.start(), f"invalid anchor id: {exc}"))
                    continue
                if anchor.kind is not AnchorKind.SOURCE_CODE:
                    entry.bad.append(
                        (match.start(), f"anchor kind must be source-code, got {anchor.kind.label}")
                    )
                    continue
                entry.tags.append((match.start(), end, anchor))
        if entry.tags or entry.bad:
            found.append(entry)
    return found


_DECOR_CHARS = re.compile(r"[*\s]+")


def comment_prose(
    seg: Segmented,
    comment: Comment,
    profile: LanguageProfile,
    drop_spans: tuple[tuple[int, int], ...] = (),
) -> str:
    """The comment's text with delimiters, gutters, and `drop_spans` removed."""
    pieces: list[str] = []
    for seg_start, seg_end in comment.segments:
        chars = list(seg.text[seg_start:seg_end])
        for drop_start, drop_end in drop_spans:
            for i in range(max(drop_start, seg_start), min(drop_end, seg_end)):
                chars[i - seg_start] = " "
        raw = "".join(chars)
        if comment.kind == "line":
            if raw.startswith(profile.line_prefix):
                raw = raw[len(profile.line_prefix) :]
        else:
            opener = profile.doc_open if comment.kind == "doc" else profile.block_open
            if opener and raw.startswith(opener):
                raw = raw[len(opener) :]
            closer = profile.doc_close if comment.kind == "doc" else profile.block_close
            if closer and raw.endswith(closer):
                raw = raw[: -len(closer)]
        for line in raw.split("\n"):
            stripped = line.strip()
            while stripped.startswith("*"):
                stripped = stripped[1:].strip()
            if stripped:
                pieces.append(stripped)
    return "\n".join(pieces)


def decode_source(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(str(exc)) from exc


def scan_source(text: str | bytes, path: str, profile: LanguageProfile) -> ScanResult:
    """Scan one file's text; returns occurrences plus malformed-tag warnings."""
    if isinstance(text, bytes):
        text = decode_source(text)
    seg = segment(text, profile)
    return _scan_segmented(seg, path, profile)


def _scan_segmented(seg: Segmented, path: str, profile: LanguageProfile) -> ScanResult:
    occurrences: list[SourceAnchorOccurrence] = []
    warnings: list[ScanWarning] = []
    for entry in _find_comment_tags(seg, profile):
        comment = entry.comment
        comment_span = seg.span_of(comment.start, comment.end)
        all_spans = tuple((s, e) for s, e, _ in entry.tags)
        hide = not entry.bad and comment_prose(seg, comment, profile, all_spans) == ""
        for tag_start, tag_end, anchor in entry.tags:
            line, _ = seg.line_col(tag_start)
            occurrences.append(
                SourceAnchorOccurrence(
                    anchor=anchor,
                    file=path,
                    tag_line=line,
                    tag_span=seg.span_of(tag_start, tag_end),
                    comment_span=comment_span,
                    hide_whole_comment=hide,
                )
            )
        for bad_at, message in entry.bad:
            line, col = seg.line_col(bad_at)
            warnings.append(ScanWarning(path, line, col, message))
    occurrences.sort(key=lambda o: (o.tag_span.start_line, o.tag_span.start_col))
    warnings.sort(key=lambda w: (w.line, w.col))
    return ScanResult(tuple(occurrences), tuple(warnings))


def scan_file(
    text: str | bytes, path: str, profile: LanguageProfile
) -> list[SourceAnchorOccurrence]:
    """Every well-formed tag in document order; warnings are dropped."""
    return list(scan_source(text, path, profile).occurrences)


# --- referent resolution -----------------------------------------------------


def resolve_referent(
    text: str, occurrence: SourceAnchorOccurrence, profile: LanguageProfile
) -> Referent:
    """The code element the occurrence's comment refers to. Total function."""
    seg = segment(text, profile)
    decls = parse_declarations(seg, profile)
    return _resolve(seg, decls, occurrence)


def _resolve(
    seg: Segmented, decls: tuple[DeclInfo, ...], occ: SourceAnchorOccurrence
) -> Referent:
    span = occ.comment_span
    before = seg.line_text(span.start_line, masked=True)[: span.start_col]
    if before.strip():
        return Referent("statement-line", "", span.start_line, span.start_line)
    after = seg.line_text(span.end_line, masked=True)[span.end_col :]
    if after.strip():
        return Referent("statement-line", "", span.end_line, span.end_line)

    for line in range(span.end_line + 1, seg.line_count + 1):
        if not seg.line_text(line, masked=True).strip():
            continue  # blank, or nothing but comments
        decl = _decl_for_line(decls, line)
        if decl is not None:
            return decl.referent
        return Referent("statement-line", "", line, line)

    return Referent("file", "", 1, max(seg.line_count, 1), artifact_path=find_package(seg))


def _decl_for_line(decls: tuple[DeclInfo, ...], line: int) -> DeclInfo | None:
    candidates = [
        d for d in decls if d.referent.start_line <= line <= d.sig_end_line
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda d: d.start_offset)


# --- folding -----------------------------------------------------------------


def fold_ranges(occurrences: list[SourceAnchorOccurrence]) -> list[FoldRange]:
    """One fold per tag, plus a whole-comment fold for tag-only comments."""
    folds: list[FoldRange] = []
    seen_comments: set[TextSpan] = set()
    for occ in occurrences:
        folds.append(FoldRange(occ.tag_span, FOLD_ICON, "tag"))
        if occ.hide_whole_comment and occ.comment_span not in seen_comments:
            seen_comments.add(occ.comment_span)
            folds.append(FoldRange(occ.comment_span, FOLD_ICON, "comment"))
    folds.sort(
        key=lambda f: (
            f.span.start_line,
            f.span.start_col,
            -f.span.end_line,
            -f.span.end_col,
        )
    )
    return folds


# --- tree scanning -----------------------------------------------------------


def scan_tree(
    root: str | Path,
    *,
    profiles: dict[str, LanguageProfile] | None = None,
    ignore_rules: tuple[str, ...] = (),
    project_name: str | None = None,
    now: datetime | None = None,
) -> ProjectIndex:
    """Scan a working tree, honoring .gitignore files and extra ignore rules.

    Unreadable or undecodable files are collected in the index's errors and
    skipped; a missing root raises RootMissing.
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise RootMissing(f"scan root does not exist: {root_path}")
    errors: list[str] = []
    files: list[FileScan] = []
    for rel in iter_source_files(root_path, ignore_rules, profiles, errors):
        profile = profile_for_path(rel, profiles)
        if profile is None:
            continue
        full = root_path / rel
        try:
            data = full.read_bytes()
            mtime = full.stat().st_mtime
            text = decode_source(data)
        except (OSError, EncodingError) as exc:
            errors.append(f"{rel}: {exc}")
            continue
        seg = segment(text, profile)
        decls = parse_declarations(seg, profile)
        result = _scan_segmented(seg, rel, profile)
        referents = tuple(_resolve(seg, decls, occ) for occ in result.occurrences)
        files.append(
            FileScan(
                path=rel,
                mtime=mtime,
                declarations=tuple(d.referent for d in decls),
                occurrences=result.occurrences,
                referents=referents,
                warnings=result.warnings,
            )
        )
    files.sort(key=lambda f: f.path)
    return ProjectIndex(
        project_name=project_name or root_path.resolve().name,
        root=str(root_path),
        files=tuple(files),
        scanned_at=now or datetime.now(timezone.utc),
        errors=tuple(errors),
    )
