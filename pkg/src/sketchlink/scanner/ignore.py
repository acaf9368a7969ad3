"""Gitignore-style ignore rules and the source-file walker.

Supports the common pattern forms: `name`, `dir/`, `/anchored`, `*`/`?`
wildcards, `**` globs, and `!` re-inclusion. Later patterns win, nested
ignore files apply to their subtree, and VCS metadata directories are always
skipped.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable

from sketchlink.scanner.profiles import LanguageProfile, profile_for_path

ALWAYS_IGNORED_DIRS = frozenset({".git", ".hg", ".svn"})

IGNORE_FILE_NAME = ".gitignore"


def _translate(pattern: str) -> str:
    anchored = pattern.startswith("/")
    if anchored:
        pattern = pattern[1:]
    if "/" in pattern:
        anchored = True
    out: list[str] = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "*":
            if pattern.startswith("**/", i):
                out.append("(?:[^/]+/)*")
                i += 3
                continue
            if pattern.startswith("**", i):
                out.append(".*")
                i += 2
                continue
            out.append("[^/]*")
            i += 1
        elif ch == "?":
            out.append("[^/]")
            i += 1
        else:
            out.append(re.escape(ch))
            i += 1
    body = "".join(out)
    prefix = "" if anchored else r"(?:.*/)?"
    return rf"^{prefix}{body}$"


class IgnoreRules:
    """An ordered pattern list; the last matching pattern decides."""

    def __init__(self, patterns: Iterable[str]):
        self._rules: list[tuple[bool, bool, re.Pattern[str]]] = []
        for raw in patterns:
            line = raw.rstrip()
            if not line or line.startswith("#"):
                continue
            negated = line.startswith("!")
            if negated:
                line = line[1:]
            dir_only = line.endswith("/")
            line = line.rstrip("/")
            if not line:
                continue
            self._rules.append((negated, dir_only, re.compile(_translate(line))))

    @classmethod
    def load(cls, path: Path) -> "IgnoreRules":
        return cls(path.read_text(encoding="utf-8", errors="replace").splitlines())

    def decide(self, rel_path: str, is_dir: bool) -> bool | None:
        """True = ignored, False = re-included, None = no opinion."""
        decision: bool | None = None
        for negated, dir_only, rx in self._rules:
            if dir_only and not is_dir:
                continue
            if rx.match(rel_path):
                decision = not negated
        return decision


def _is_ignored(stack: list[tuple[str, IgnoreRules]], rel: str, is_dir: bool) -> bool:
    ignored = False
    for base, rules in stack:
        if base:
            if not rel.startswith(base + "/"):
                continue
            sub = rel[len(base) + 1 :]
        else:
            sub = rel
        decision = rules.decide(sub, is_dir)
        if decision is not None:
            ignored = decision
    return ignored


def iter_source_files(
    root: Path,
    extra_rules: tuple[str, ...] = (),
    profiles: dict[str, LanguageProfile] | None = None,
    errors: list[str] | None = None,
) -> list[str]:
    """Project-relative posix paths of scannable files, sorted."""
    out: list[str] = []
    stack: list[tuple[str, IgnoreRules]] = []
    if extra_rules:
        stack.append(("", IgnoreRules(extra_rules)))
    _walk(root, "", stack, out, profiles, errors if errors is not None else [])
    out.sort()
    return out


def _walk(
    directory: Path,
    rel: str,
    stack: list[tuple[str, IgnoreRules]],
    out: list[str],
    profiles: dict[str, LanguageProfile] | None,
    errors: list[str],
) -> None:
    ignore_file = directory / IGNORE_FILE_NAME
    if ignore_file.is_file():
        try:
            stack = stack + [(rel, IgnoreRules.load(ignore_file))]
        except OSError as exc:
            errors.append(f"{rel or '.'}/{IGNORE_FILE_NAME}: {exc}")
    try:
        entries = sorted(directory.iterdir(), key=lambda p: p.name)
    except OSError as exc:
        errors.append(f"{rel or '.'}: {exc}")
        return
    for entry in entries:
        entry_rel = f"{rel}/{entry.name}" if rel else entry.name
        try:
            is_dir = entry.is_dir() and not entry.is_symlink()
            is_file = entry.is_file()
        except OSError as exc:
            errors.append(f"{entry_rel}: {exc}")
            continue
        if is_dir:
            if entry.name in ALWAYS_IGNORED_DIRS:
                continue
            if _is_ignored(stack, entry_rel, True):
                continue
            _walk(entry, entry_rel, stack, out, profiles, errors)
        elif is_file:
            if profile_for_path(entry.name, profiles) is None:
                continue
            if _is_ignored(stack, entry_rel, False):
                continue
            out.append(entry_rel)
