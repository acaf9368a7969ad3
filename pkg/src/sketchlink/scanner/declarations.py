"""Declaration detection via brace matching and keyword heuristics.

This is deliberately not a grammar: referent resolution needs element
boundaries (kind, name, line range), not full language semantics. The walk
runs on the segmentation mask, so strings and comments cannot introduce
phantom braces or keywords.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from sketchlink.scanner.comments import Segmented
from sketchlink.scanner.profiles import LanguageProfile

REFERENT_KINDS = frozenset(
    {
        "class",
        "interface",
        "enum",
        "method",
        "constructor",
        "field",
        "statement-line",
        "file",
    }
)


@dataclass(frozen=True)
class Referent:
    """The code element an anchor denotes."""

    kind: str
    name: str
    start_line: int
    end_line: int
    artifact_path: str = ""

    def __post_init__(self) -> None:
        if self.kind not in REFERENT_KINDS:
            raise ValueError(f"unknown referent kind {self.kind!r}")
        if self.start_line > self.end_line:
            raise ValueError("referent range must not be empty")
        if self.kind == "statement-line" and self.start_line != self.end_line:
            raise ValueError("statement-line referents cover a single line")


@dataclass(frozen=True)
class DeclInfo:
    """A declaration plus the offsets resolve/fold logic needs internally."""

    referent: Referent
    start_offset: int
    sig_end_line: int  # line of the body-opening brace, or of the ';' for bodyless members


def _first_declarator(declarator: str) -> str:
    """Cut `int x, y` at the first top-level comma; generics stay intact."""
    depth = 0
    for i, ch in enumerate(declarator):
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        elif ch == "," and depth <= 0:
            return declarator[:i]
    return declarator


_PACKAGE_RE = re.compile(r"^[ \t]*package\s+([\w.]+)\s*;", re.MULTILINE)
_IDENT_TAIL_RE = re.compile(r"([A-Za-z_$][\w$]*)\s*$")
_IDENT_RE = re.compile(r"[A-Za-z_$][\w$.]*")


def find_package(seg: Segmented) -> str:
    match = _PACKAGE_RE.search(seg.mask)
    return match.group(1) if match else ""


def _match_braces(mask: str) -> dict[int, int]:
    pairs: dict[int, int] = {}
    stack: list[int] = []
    for i, ch in enumerate(mask):
        if ch == "{":
            stack.append(i)
        elif ch == "}" and stack:
            pairs[stack.pop()] = i
    for open_at in stack:  # unterminated: close at EOF, tolerantly
        pairs[open_at] = len(mask) - 1 if mask else 0
    return pairs


def _skip_annotations(mask: str, pos: int, end: int) -> int:
    """Advance past leading @Annotation tokens, including argument lists."""
    while pos < end:
        while pos < end and mask[pos].isspace():
            pos += 1
        if pos >= end or mask[pos] != "@":
            return pos
        probe = _IDENT_RE.match(mask, pos + 1)
        if not probe or probe.group(0) in ("interface",):
            return pos
        pos = probe.end()
        while pos < end and mask[pos].isspace():
            pos += 1
        if pos < end and mask[pos] == "(":
            depth = 0
            while pos < end:
                if mask[pos] == "(":
                    depth += 1
                elif mask[pos] == ")":
                    depth -= 1
                    if depth == 0:
                        pos += 1
                        break
                pos += 1
    return pos


class _Walker:
    def __init__(self, seg: Segmented, profile: LanguageProfile):
        self.seg = seg
        self.mask = seg.mask
        self.profile = profile
        self.braces = _match_braces(seg.mask)
        self.package = find_package(seg)
        self.out: list[DeclInfo] = []
        self._type_re = re.compile(
            r"(?:^|\s)(" + "|".join(sorted(profile.type_keywords)) + r")\s+([A-Za-z_$][\w$]*)"
        )

    def walk(self) -> list[DeclInfo]:
        path = [self.package] if self.package else []
        self._walk_region(0, len(self.mask), path, None)
        self.out.sort(key=lambda d: d.start_offset)
        return self.out

    def _walk_region(
        self, start: int, end: int, path: list[str], type_name: str | None
    ) -> None:
        mask = self.mask
        pos = start
        while pos < end:
            while pos < end and mask[pos].isspace():
                pos += 1
            if pos >= end:
                return
            stmt_start = pos
            head_start = _skip_annotations(mask, pos, end)
            first_semi = -1
            first_brace = -1
            brace_close = -1
            scan = head_start
            while scan < end:
                ch = mask[scan]
                if ch == ";":
                    first_semi = scan
                    break
                if ch == "{":
                    first_brace = scan
                    brace_close = min(self.braces.get(scan, end - 1), end - 1)
                    break
                if ch == "}":
                    # tolerate unbalanced input by ending the statement here
                    first_semi = scan
                    break
                scan += 1
            if scan >= end:
                stmt_end = end - 1
                head_end = end
            elif first_brace >= 0:
                # A brace pair followed directly by ';' belongs to one
                # statement (array initializer, anonymous class in a field).
                after = brace_close + 1
                while after < end and mask[after].isspace():
                    after += 1
                if after < end and mask[after] == ";":
                    stmt_end = after
                else:
                    stmt_end = brace_close
                head_end = first_brace
            else:
                stmt_end = first_semi
                head_end = first_semi
            self._classify(stmt_start, head_start, head_end, first_brace, stmt_end, path, type_name)
            pos = stmt_end + 1

    def _classify(
        self,
        stmt_start: int,
        head_start: int,
        head_end: int,
        first_brace: int,
        stmt_end: int,
        path: list[str],
        type_name: str | None,
    ) -> None:
        seg = self.seg
        head = self.mask[head_start:head_end]

        type_match = self._type_re.search(head)
        if type_match:
            keyword, name = type_match.group(1), type_match.group(2)
            kind = "class" if keyword == "record" else keyword
            new_path = path + [name]
            referent = Referent(
                kind=kind,
                name=name,
                start_line=seg.line_of(stmt_start),
                end_line=seg.line_of(stmt_end),
                artifact_path=".".join(new_path),
            )
            sig_end = seg.line_of(first_brace) if first_brace >= 0 else referent.end_line
            self.out.append(DeclInfo(referent, stmt_start, sig_end))
            if first_brace >= 0:
                body_close = self.braces.get(first_brace, stmt_end)
                region_start = first_brace + 1
                if kind == "enum":
                    region_start = self._skip_enum_constants(region_start, body_close)
                self._walk_region(region_start, body_close, new_path, name)
            return

        if type_name is None:
            return  # file level: only type declarations are artifacts

        paren = head.find("(")
        eq = head.find("=")
        if paren >= 0 and (eq < 0 or paren < eq):
            name_match = _IDENT_TAIL_RE.search(head[:paren])
            if name_match:
                name = name_match.group(1)
                pre = head[: name_match.start(1)].strip()
                is_keyword = name in self.profile.statement_keywords
                if name == type_name and not is_keyword and self._only_modifiers(pre):
                    self._emit_member("constructor", name, stmt_start, stmt_end, first_brace, path)
                    return
                if pre and not is_keyword and not pre.endswith("."):
                    self._emit_member("method", name, stmt_start, stmt_end, first_brace, path)
                    return
            return

        if stmt_end < len(self.mask) and self.mask[stmt_end] == ";":
            declarator = head[:eq] if eq >= 0 else head
            first_chunk = _first_declarator(declarator)
            if "(" in first_chunk or ")" in first_chunk:
                return
            tokens = first_chunk.split()
            if len(tokens) < 2:
                return
            name = tokens[-1].rstrip("[]")
            if not re.fullmatch(r"[A-Za-z_$][\w$]*", name):
                return
            if tokens[0] in self.profile.statement_keywords or name in self.profile.statement_keywords:
                return
            self._emit_member("field", name, stmt_start, stmt_end, first_brace, path)

    def _only_modifiers(self, pre: str) -> bool:
        return all(tok in self.profile.modifier_keywords for tok in pre.split())

    def _emit_member(
        self,
        kind: str,
        name: str,
        stmt_start: int,
        stmt_end: int,
        first_brace: int,
        path: list[str],
    ) -> None:
        seg = self.seg
        referent = Referent(
            kind=kind,
            name=name,
            start_line=seg.line_of(stmt_start),
            end_line=seg.line_of(stmt_end),
            artifact_path=".".join(path + [name]),
        )
        sig_end = seg.line_of(first_brace) if first_brace >= 0 else referent.end_line
        self.out.append(DeclInfo(referent, stmt_start, sig_end))

    def _skip_enum_constants(self, start: int, end: int) -> int:
        """Skip the constant list of an enum body (up to the first ';')."""
        depth = 0
        pos = start
        while pos < end:
            ch = self.mask[pos]
            if ch in "({":
                depth += 1
            elif ch in ")}":
                depth -= 1
            elif ch == ";" and depth == 0:
                return pos + 1
            pos += 1
        return end  # constants only, no member section


def parse_declarations(seg: Segmented, profile: LanguageProfile) -> tuple[DeclInfo, ...]:
    """All declarations in document order; empty for profiles without rules."""
    if not profile.detects_declarations:
        return ()
    return tuple(_Walker(seg, profile).walk())
