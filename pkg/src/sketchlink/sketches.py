"""Sketch documents: an SVG container around one raster image.

The sketch anchor lives in the SVG root's id attribute; each rectangular
marker is a rect element whose id carries the marker anchor. Serialization
is canonical (fixed element and attribute order), so equal documents always
produce identical bytes.
"""

from __future__ import annotations

import io
import os
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from random import Random
from xml.sax.saxutils import escape, quoteattr

from PIL import Image

from sketchlink.anchors import (
    AnchorError,
    AnchorId,
    AnchorKind,
    format_anchor_id,
    new_anchor_id,
    parse_anchor_id,
)

SVG_NS = "http://www.w3.org/2000/svg"
XLINK_NS = "http://www.w3.org/1999/xlink"
META_NS = "urn:sketchlink:meta"

ACCEPTED_FORMATS = {
    "image/png": ("PNG", "png"),
    "image/jpeg": ("JPEG", "jpg"),
}

# fixed marker styling so stored SVGs are viewable as-is
_MARKER_STYLE = 'fill="#ffd54d" fill-opacity="0.25" stroke="#e5a000" stroke-width="2"'


class SketchError(Exception):
    """Base class for sketch-store failures."""


class UnsupportedFormat(SketchError):
    pass


class CorruptImage(SketchError):
    pass


class InvalidRect(SketchError):
    pass


class MarkerNotFound(SketchError):
    pass


class TargetNotFound(SketchError):
    pass


class MalformedSvg(SketchError):
    pass


class MissingSketchAnchor(SketchError):
    pass


class BadMarkerId(SketchError):
    pass


class SketchNotFound(SketchError):
    pass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in image pixel coordinates, origin top-left."""

    x: float
    y: float
    w: float
    h: float

    def intersects(self, width: float, height: float) -> bool:
        return self.x < width and self.y < height and self.x + self.w > 0 and self.y + self.h > 0


@dataclass(frozen=True)
class Marker:
    anchor: AnchorId
    rect: Rect
    annotation: str = ""


@dataclass(frozen=True)
class SketchMeta:
    """Upload-time metadata for a sketch."""

    annotation: str = ""
    authors: tuple[str, ...] = ()
    created: datetime | None = None
    modified: datetime | None = None


@dataclass(frozen=True)
class SketchDocument:
    anchor: AnchorId
    image_name: str
    mime: str
    width: int
    height: int
    markers: tuple[Marker, ...]
    annotation: str
    authors: tuple[str, ...]
    created: datetime
    modified: datetime

    def marker(self, anchor: AnchorId) -> Marker | None:
        for m in self.markers:
            if m.anchor == anchor:
                return m
        return None

    def meta(self) -> SketchMeta:
        return SketchMeta(self.annotation, self.authors, self.created, self.modified)


def _utc(value: datetime | None) -> datetime:
    if value is None:
        return datetime.now(timezone.utc)
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def create_sketch(
    image_bytes: bytes,
    mime: str,
    meta: SketchMeta | None = None,
    rng: Random | None = None,
) -> SketchDocument:
    """Decode the image, mint a sketch anchor, and build an empty document."""
    if mime not in ACCEPTED_FORMATS:
        raise UnsupportedFormat(f"unsupported image format {mime!r}")
    pil_format, extension = ACCEPTED_FORMATS[mime]
    try:
        with Image.open(io.BytesIO(image_bytes)) as image:
            image.load()
            decoded_format = image.format
            width, height = image.size
    except Exception as exc:
        raise CorruptImage(f"image does not decode: {exc}") from exc
    if decoded_format != pil_format:
        raise CorruptImage(f"bytes are {decoded_format or 'unknown'}, expected {pil_format}")
    meta = meta or SketchMeta()
    anchor = new_anchor_id(AnchorKind.SKETCH, rng)
    created = _utc(meta.created)
    return SketchDocument(
        anchor=anchor,
        image_name=f"{anchor.uuid}.{extension}",
        mime=mime,
        width=width,
        height=height,
        markers=(),
        annotation=meta.annotation,
        authors=tuple(meta.authors),
        created=created,
        modified=_utc(meta.modified) if meta.modified else created,
    )


def add_marker(
    doc: SketchDocument,
    rect: Rect,
    annotation: str = "",
    rng: Random | None = None,
    now: datetime | None = None,
) -> tuple[SketchDocument, Marker]:
    rect = Rect(float(rect.x), float(rect.y), float(rect.w), float(rect.h))
    if rect.w <= 0 or rect.h <= 0:
        raise InvalidRect(f"marker must have positive size, got {rect.w}x{rect.h}")
    if not rect.intersects(doc.width, doc.height):
        raise InvalidRect("marker lies fully outside the image")
    marker = Marker(new_anchor_id(AnchorKind.MARKER, rng), rect, annotation)
    updated = replace(doc, markers=doc.markers + (marker,), modified=_utc(now))
    return updated, marker


def remove_marker(
    doc: SketchDocument, marker_anchor: AnchorId, now: datetime | None = None
) -> SketchDocument:
    if doc.marker(marker_anchor) is None:
        raise MarkerNotFound(f"no marker {marker_anchor}")
    kept = tuple(m for m in doc.markers if m.anchor != marker_anchor)
    return replace(doc, markers=kept, modified=_utc(now))


def update_annotation(
    doc: SketchDocument, target: AnchorId, text: str, now: datetime | None = None
) -> SketchDocument:
    if target == doc.anchor:
        return replace(doc, annotation=text, modified=_utc(now))
    if doc.marker(target) is None:
        raise TargetNotFound(f"{target} is neither the sketch anchor nor a marker")
    markers = tuple(
        replace(m, annotation=text) if m.anchor == target else m for m in doc.markers
    )
    return replace(doc, markers=markers, modified=_utc(now))


# --- canonical SVG form --------------------------------------------------------


def _num(value: float) -> str:
    as_float = float(value)
    if as_float == int(as_float):
        return str(int(as_float))
    return repr(as_float)


def serialize_sketch_svg(doc: SketchDocument) -> bytes:
    """Canonical SVG bytes; equal documents serialize to equal bytes."""
    lines: list[str] = []
    lines.append('<?xml version="1.0" encoding="UTF-8"?>')
    lines.append(
        f'<svg xmlns="{SVG_NS}" xmlns:xlink="{XLINK_NS}" id="{format_anchor_id(doc.anchor)}" '
        f'width="{doc.width}" height="{doc.height}" viewBox="0 0 {doc.width} {doc.height}">'
    )
    if doc.annotation:
        lines.append(f"  <desc>{escape(doc.annotation)}</desc>")
    lines.append("  <metadata>")
    lines.append(
        f'    <info xmlns="{META_NS}" created={quoteattr(doc.created.isoformat())} '
        f"modified={quoteattr(doc.modified.isoformat())} "
        f"image={quoteattr(doc.image_name)} mime={quoteattr(doc.mime)}>"
    )
    for author in doc.authors:
        lines.append(f"      <author>{escape(author)}</author>")
    lines.append("    </info>")
    lines.append("  </metadata>")
    lines.append(
        f'  <image x="0" y="0" width="{doc.width}" height="{doc.height}" '
        f'xlink:href="../images/{doc.image_name}"/>'
    )
    for marker in doc.markers:
        rect = marker.rect
        open_tag = (
            f'  <rect id="{format_anchor_id(marker.anchor)}" x="{_num(rect.x)}" y="{_num(rect.y)}" '
            f'width="{_num(rect.w)}" height="{_num(rect.h)}" {_MARKER_STYLE}'
        )
        if marker.annotation:
            lines.append(f"{open_tag}>")
            lines.append(f"    <desc>{escape(marker.annotation)}</desc>")
            lines.append("  </rect>")
        else:
            lines.append(f"{open_tag}/>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(element: ET.Element, name: str) -> str | None:
    for key, value in element.attrib.items():
        if key == name or key.endswith("}" + name):
            return value
    return None


def parse_sketch_svg(data: bytes) -> SketchDocument:
    """Inverse of serialize for documents this system produced.

    Unknown extra elements are ignored (and therefore dropped when the
    document is serialized again).
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedSvg(f"not well-formed XML: {exc}") from exc
    if _local(root.tag) != "svg":
        raise MalformedSvg(f"root element is {_local(root.tag)!r}, expected svg")
    root_id = root.get("id")
    if not root_id:
        raise MissingSketchAnchor("SVG root has no id attribute")
    try:
        anchor = parse_anchor_id(root_id)
    except AnchorError as exc:
        raise MissingSketchAnchor(f"root id is not an anchor: {exc}") from exc
    if anchor.kind is not AnchorKind.SKETCH:
        raise MissingSketchAnchor(f"root id has kind {anchor.kind.label}, expected sketch")

    try:
        width = int(float(root.get("width", "")))
        height = int(float(root.get("height", "")))
    except ValueError as exc:
        raise MalformedSvg("missing or invalid width/height") from exc

    annotation = ""
    authors: tuple[str, ...] = ()
    created = modified = None
    image_name = mime = None
    markers: list[Marker] = []

    for child in root:
        tag = _local(child.tag)
        if tag == "desc":
            annotation = child.text or ""
        elif tag == "metadata":
            for info in child:
                if _local(info.tag) != "info":
                    continue
                created = info.get("created")
                modified = info.get("modified")
                image_name = info.get("image")
                mime = info.get("mime")
                authors = tuple(
                    (a.text or "") for a in info if _local(a.tag) == "author"
                )
        elif tag == "image":
            href = _attr(child, "href")
            if image_name is None and href:
                image_name = href.rsplit("/", 1)[-1]
        elif tag == "rect":
            markers.append(_parse_marker(child))

    if image_name is None or mime is None or created is None or modified is None:
        raise MalformedSvg("metadata block is missing required fields")
    try:
        created_at = datetime.fromisoformat(created)
        modified_at = datetime.fromisoformat(modified)
    except ValueError as exc:
        raise MalformedSvg(f"bad timestamp: {exc}") from exc

    return SketchDocument(
        anchor=anchor,
        image_name=image_name,
        mime=mime,
        width=width,
        height=height,
        markers=tuple(markers),
        annotation=annotation,
        authors=authors,
        created=created_at,
        modified=modified_at,
    )


def _parse_marker(rect_el: ET.Element) -> Marker:
    rect_id = rect_el.get("id")
    if not rect_id:
        raise BadMarkerId("rect element has no id")
    try:
        anchor = parse_anchor_id(rect_id)
    except AnchorError as exc:
        raise BadMarkerId(f"rect id is not an anchor: {exc}") from exc
    if anchor.kind is not AnchorKind.MARKER:
        raise BadMarkerId(f"rect id has kind {anchor.kind.label}, expected marker")
    try:
        rect = Rect(
            float(rect_el.get("x", "")),
            float(rect_el.get("y", "")),
            float(rect_el.get("width", "")),
            float(rect_el.get("height", "")),
        )
    except ValueError as exc:
        raise MalformedSvg(f"rect has invalid geometry: {exc}") from exc
    annotation = ""
    for child in rect_el:
        if _local(child.tag) == "desc":
            annotation = child.text or ""
    return Marker(anchor, rect, annotation)


# --- on-disk repository --------------------------------------------------------

SKETCH_DIR = "sketches"
IMAGE_DIR = "images"


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def sketch_path(repo_dir: Path, anchor: AnchorId) -> Path:
    return Path(repo_dir) / SKETCH_DIR / f"{anchor.uuid}.svg"


def image_path(repo_dir: Path, image_name: str) -> Path:
    return Path(repo_dir) / IMAGE_DIR / image_name


def store_sketch(repo_dir: Path, doc: SketchDocument, image_bytes: bytes | None = None) -> None:
    """Write the SVG (and the image when given) atomically."""
    if image_bytes is not None:
        _atomic_write(image_path(repo_dir, doc.image_name), image_bytes)
    _atomic_write(sketch_path(repo_dir, doc.anchor), serialize_sketch_svg(doc))


def load_sketch(repo_dir: Path, anchor: AnchorId) -> tuple[SketchDocument, bytes]:
    svg_file = sketch_path(repo_dir, anchor)
    if not svg_file.is_file():
        raise SketchNotFound(f"no sketch {anchor}")
    doc = parse_sketch_svg(svg_file.read_bytes())
    image_file = image_path(repo_dir, doc.image_name)
    if not image_file.is_file():
        raise SketchNotFound(f"sketch {anchor} is missing its image {doc.image_name}")
    return doc, image_file.read_bytes()


def load_all_sketches(repo_dir: Path) -> list[SketchDocument]:
    """Parse every stored sketch; unreadable files are skipped."""
    sketch_dir = Path(repo_dir) / SKETCH_DIR
    if not sketch_dir.is_dir():
        return []
    docs = []
    for svg_file in sorted(sketch_dir.glob("*.svg")):
        try:
            docs.append(parse_sketch_svg(svg_file.read_bytes()))
        except (OSError, SketchError):
            continue
    return docs


def list_sketches(repo_dir: Path) -> list[tuple[AnchorId, SketchMeta]]:
    """All stored sketches, newest modification first."""
    docs = load_all_sketches(repo_dir)
    docs.sort(key=lambda d: (d.modified, format_anchor_id(d.anchor)), reverse=True)
    return [(doc.anchor, doc.meta()) for doc in docs]
