"""Source segmentation: find comments while skipping string literals.

Produces the comment list plus a "mask" of the source in which comment text
and string contents are blanked out. Declaration parsing and blank-line
detection run on the mask so braces or tags inside strings never confuse
them. Runs of whole-line line-comments are grouped into one logical comment,
which gives `#`-style languages a doc-comment equivalent.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from sketchlink.scanner.profiles import LanguageProfile


@dataclass(frozen=True)
class TextSpan:
    """A text range: 1-based lines, 0-based columns, end_col exclusive."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "TextSpan") -> bool:
        if (other.start_line, other.start_col) < (self.start_line, self.start_col):
            return False
        return (other.end_line, other.end_col) <= (self.end_line, self.end_col)


@dataclass(frozen=True)
class Comment:
    """One logical comment: a block/doc comment or a run of line comments.

    `segments` holds the raw (start, end) offset pairs of each physical
    comment in the group; a block comment is a single segment.
    """

    kind: str  # "doc" | "block" | "line"
    start: int
    end: int
    segments: tuple[tuple[int, int], ...]
    whole_line: bool  # no code left of the comment on its first line


class Segmented:
    """Segmentation result with offset/line conversion helpers."""

    def __init__(self, text: str, mask: str, comments: tuple[Comment, ...]):
        self.text = text
        self.mask = mask
        self.comments = comments
        starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                starts.append(i + 1)
        self._line_starts = starts

    @property
    def line_count(self) -> int:
        if self.text.endswith("\n") or not self.text:
            return len(self._line_starts) - 1
        return len(self._line_starts)

    def line_of(self, offset: int) -> int:
        """1-based line containing the given offset."""
        return bisect_right(self._line_starts, offset)

    def line_col(self, offset: int) -> tuple[int, int]:
        line = self.line_of(offset)
        return line, offset - self._line_starts[line - 1]

    def line_bounds(self, line: int) -> tuple[int, int]:
        """Offsets of a 1-based line's content, newline excluded."""
        start = self._line_starts[line - 1]
        if line < len(self._line_starts):
            return start, self._line_starts[line] - 1
        return start, len(self.text)

    def line_text(self, line: int, masked: bool = False) -> str:
        start, end = self.line_bounds(line)
        return (self.mask if masked else self.text)[start:end]

    def span_of(self, start: int, end: int) -> TextSpan:
        start_line, start_col = self.line_col(start)
        end_line, end_col = self.line_col(end) if end > start else (start_line, start_col)
        return TextSpan(start_line, start_col, end_line, end_col)

    def comment_at(self, line: int, col: int) -> Comment | None:
        """The comment whose span covers the given position, if any."""
        for comment in self.comments:
            span = self.span_of(comment.start, comment.end)
            probe = TextSpan(line, col, line, col)
            if span.contains(probe):
                return comment
        return None


def _blank(mask: list[str], start: int, end: int) -> None:
    for i in range(start, end):
        if mask[i] != "\n":
            mask[i] = " "


def segment(text: str, profile: LanguageProfile) -> Segmented:
    """Split source text into comments, string literals, and code."""
    n = len(text)
    mask = list(text)
    raw: list[tuple[str, int, int]] = []  # (kind, start, end)

    line_prefix = profile.line_prefix
    block_open = profile.block_open
    block_close = profile.block_close
    doc_open = profile.doc_open

    i = 0
    while i < n:
        if block_open and text.startswith(block_open, i):
            close_at = text.find(block_close, i + len(block_open))  # type: ignore[arg-type]
            end = n if close_at < 0 else close_at + len(block_close)  # type: ignore[arg-type]
            is_doc = bool(
                doc_open
                and text.startswith(doc_open, i)
                and (close_at < 0 or close_at >= i + len(doc_open))
            )
            raw.append(("doc" if is_doc else "block", i, end))
            _blank(mask, i, end)
            i = end
            continue
        if text.startswith(line_prefix, i):
            newline = text.find("\n", i)
            end = n if newline < 0 else newline
            raw.append(("line", i, end))
            _blank(mask, i, end)
            i = end
            continue
        ch = text[i]
        if ch in profile.string_quotes:
            j = i + 1
            closed = False
            while j < n:
                cj = text[j]
                if cj == "\\":
                    j += 2
                    continue
                if cj == ch:
                    closed = True
                    break
                if cj == "\n":
                    break  # unterminated on this line; stop tolerantly
                j += 1
            _blank(mask, i + 1, min(j, n))
            i = j + 1 if closed else min(j, n)
            continue
        i += 1

    mask_text = "".join(mask)
    seg = Segmented(text, mask_text, ())
    seg.comments = _group(seg, raw)
    return seg


def _group(seg: Segmented, raw: list[tuple[str, int, int]]) -> tuple[Comment, ...]:
    """Merge adjacent whole-line line-comments into logical comment blocks."""
    comments: list[Comment] = []
    pending: list[tuple[int, int]] = []

    def is_whole_line(start: int) -> bool:
        line_start, _ = seg.line_bounds(seg.line_of(start))
        return seg.mask[line_start:start].strip() == ""

    def flush() -> None:
        if pending:
            comments.append(
                Comment("line", pending[0][0], pending[-1][1], tuple(pending), True)
            )
            pending.clear()

    for kind, start, end in raw:
        if kind != "line":
            flush()
            comments.append(Comment(kind, start, end, ((start, end),), is_whole_line(start)))
            continue
        whole = is_whole_line(start)
        if not whole:
            flush()
            comments.append(Comment("line", start, end, ((start, end),), False))
            continue
        if pending and seg.line_of(start) != seg.line_of(pending[-1][0]) + 1:
            flush()
        pending.append((start, end))
    flush()
    comments.sort(key=lambda c: c.start)
    return tuple(comments)
