"""Language profiles: comment delimiters and declaration-detection rules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LanguageProfile:
    """How to find comments and declarations in one family of source files.

    A profile always has a line-comment prefix. Block and doc delimiters are
    optional; when a doc delimiter is present it must open a block comment
    (e.g. "/**" opening a "/*"-style comment).
    """

    name: str
    extensions: tuple[str, ...]
    line_prefix: str
    block_open: str | None = None
    block_close: str | None = None
    doc_open: str | None = None
    doc_close: str | None = None
    string_quotes: tuple[str, ...] = ('"', "'")
    type_keywords: frozenset[str] = frozenset()
    modifier_keywords: frozenset[str] = frozenset()
    statement_keywords: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.line_prefix:
            raise ValueError("line_prefix must be non-empty")
        if bool(self.block_open) != bool(self.block_close):
            raise ValueError("block_open and block_close must be set together")
        if self.block_open and self.block_open == self.block_close:
            raise ValueError("block delimiters must be distinguishable")
        if bool(self.doc_open) != bool(self.doc_close):
            raise ValueError("doc_open and doc_close must be set together")
        if self.doc_open and not self.block_open:
            raise ValueError("doc comments require block comment delimiters")
        if self.doc_open and not self.doc_open.startswith(self.block_open or ""):
            raise ValueError("doc_open must be a specialization of block_open")

    @property
    def detects_declarations(self) -> bool:
        return bool(self.type_keywords)


JAVA_PROFILE = LanguageProfile(
    name="java",
    extensions=(".java",),
    line_prefix="//",
    block_open="/*",
    block_close="*/",
    doc_open="/**",
    doc_close="*/",
    string_quotes=('"', "'"),
    type_keywords=frozenset({"class", "interface", "enum", "record"}),
    modifier_keywords=frozenset(
        {
            "public",
            "private",
            "protected",
            "static",
            "final",
            "abstract",
            "synchronized",
            "native",
            "strictfp",
            "transient",
            "volatile",
            "default",
            "sealed",
        }
    ),
    statement_keywords=frozenset(
        {
            "if",
            "else",
            "for",
            "while",
            "do",
            "switch",
            "case",
            "return",
            "throw",
            "throws",
            "try",
            "catch",
            "finally",
            "new",
            "break",
            "continue",
            "assert",
            "yield",
            "super",
            "this",
            "instanceof",
            "package",
            "import",
        }
    ),
)

# Line-comment fallback for languages we do not model further. Tags are still
# found, inserted, and removed; referents degrade to statement lines or the
# whole file because no declaration rules exist.
GENERIC_PROFILE = LanguageProfile(
    name="generic",
    extensions=(".py", ".sh", ".rb", ".pl", ".r"),
    line_prefix="#",
    string_quotes=('"', "'"),
)

PROFILES: dict[str, LanguageProfile] = {
    JAVA_PROFILE.name: JAVA_PROFILE,
    GENERIC_PROFILE.name: GENERIC_PROFILE,
}

_EXTENSION_MAP: dict[str, LanguageProfile] = {
    ext: profile for profile in PROFILES.values() for ext in profile.extensions
}


def profile_by_name(name: str) -> LanguageProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"no language profile named {name!r}") from None


def profile_for_path(
    path: str, profiles: dict[str, LanguageProfile] | None = None
) -> LanguageProfile | None:
    """Pick a profile by file extension, or None when no profile applies."""
    dot = path.rfind(".")
    if dot < 0:
        return None
    ext = path[dot:].lower()
    if profiles is None:
        return _EXTENSION_MAP.get(ext)
    for profile in profiles.values():
        if ext in profile.extensions:
            return profile
    return None
