"""Typed universal link anchors: one kind digit prepended to a UUID.

The 37-character text form (digit + canonical lowercase UUID) is the wire
and file format used in source comments, SVG id attributes, the link store,
and all protocol messages.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass
from enum import Enum
from random import Random


class AnchorKind(Enum):
    """Linkable artifact categories. The enum value is the stable wire digit."""

    SOURCE_CODE = 0
    SKETCH = 1
    MARKER = 2

    @property
    def digit(self) -> str:
        return str(self.value)

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


class AnchorError(ValueError):
    """Base class for anchor text that cannot be parsed."""


class MalformedAnchor(AnchorError):
    """Text does not match the digit-plus-canonical-UUID grammar."""


class UnknownKind(AnchorError):
    """Leading digit is not one of the assigned kind digits."""


ANCHOR_TEXT_LENGTH = 37

_KIND_BY_DIGIT = {kind.digit: kind for kind in AnchorKind}
_KIND_BY_LABEL = {kind.label: kind for kind in AnchorKind}

_CANONICAL_UUID_RE = re.compile(
    r"^[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}"
    r"-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}$"
)


@dataclass(frozen=True)
class AnchorId:
    """A typed anchor identity. Immutable and hashable; safe to share freely."""

    kind: AnchorKind
    uuid: uuid.UUID

    def __str__(self) -> str:
        return format_anchor_id(self)


def kind_from_label(label: str) -> AnchorKind:
    """Map a lowercase kind label ("source-code", "sketch", "marker") back to the enum."""
    try:
        return _KIND_BY_LABEL[label]
    except KeyError:
        raise UnknownKind(f"unknown anchor kind label {label!r}") from None


def new_anchor_id(kind: AnchorKind, rng: Random | None = None) -> AnchorId:
    """Create an anchor with a fresh version-4 UUID.

    When rng is given, its 128 bits drive the UUID (version/variant bits are
    forced), which makes generation reproducible in tests.
    """
    if rng is None:
        value = uuid.uuid4()
    else:
        value = uuid.UUID(int=rng.getrandbits(128), version=4)
    return AnchorId(kind, value)


def format_anchor_id(anchor: AnchorId) -> str:
    """Render the 37-character text form: kind digit + lowercase canonical UUID."""
    return f"{anchor.kind.digit}{anchor.uuid}"


def parse_anchor_id(text: str) -> AnchorId:
    """Parse the 37-character text form.

    Uppercase hex is accepted and normalized to lowercase. Raises
    MalformedAnchor for anything that does not match the grammar and
    UnknownKind when the leading digit has no assigned kind.
    """
    if not isinstance(text, str):
        raise MalformedAnchor(f"anchor must be text, got {type(text).__name__}")
    if len(text) != ANCHOR_TEXT_LENGTH:
        raise MalformedAnchor(
            f"anchor text must be {ANCHOR_TEXT_LENGTH} characters, got {len(text)}"
        )
    digit, uuid_text = text[0], text[1:]
    if not digit.isdigit():
        raise MalformedAnchor(f"anchor must start with a kind digit, got {digit!r}")
    if not _CANONICAL_UUID_RE.match(uuid_text):
        raise MalformedAnchor(f"not a canonical UUID: {uuid_text!r}")
    kind = _KIND_BY_DIGIT.get(digit)
    if kind is None:
        raise UnknownKind(f"unknown anchor kind digit {digit!r}")
    return AnchorId(kind, uuid.UUID(uuid_text))


def is_anchor_text(text: str) -> bool:
    """Cheap validity check without raising."""
    try:
        parse_anchor_id(text)
    except AnchorError:
        return False
    return True
