"""Framework-free service core: stores, project indexes, request handlers.

Handlers are synchronous, take already-parsed payloads, and return a result
dict plus the change events to broadcast. The network layer serializes all
calls that mutate state and fans the events out to subscribed sessions.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass
from datetime import datetime, timezone

from sketchlink.anchors import AnchorError, AnchorId, AnchorKind, parse_anchor_id
from sketchlink.links import LinkError, LinkStore, LinkView, SourceAnchorRecord
from sketchlink.scanner import ProjectIndex, ScannerError, scan_tree
from sketchlink.server.config import ServerConfig
from sketchlink.sketches import (
    Marker,
    Rect,
    SketchDocument,
    SketchError,
    SketchMeta,
    add_marker,
    create_sketch,
    load_all_sketches,
    remove_marker,
    serialize_sketch_svg,
    store_sketch,
    update_annotation,
)

STORE_FILE = "links.json"

TOPIC_SKETCHES = "sketches"
TOPIC_LINKS = "links"
ALL_TOPICS = (TOPIC_SKETCHES, TOPIC_LINKS)


class ProtocolError(Exception):
    """An error the protocol reports back to the requesting session."""

    def __init__(self, code: str, message: str, category: str = "ValidationError"):
        super().__init__(message)
        self.code = code
        self.message = message
        self.category = category

    def to_dict(self) -> dict:
        return {"code": self.code, "category": self.category, "message": self.message}


@dataclass(frozen=True)
class Event:
    topic: str
    name: str
    payload: dict

    def to_dict(self) -> dict:
        return {"type": "event", "event": self.name, **self.payload}


def _wrap_module_error(exc: Exception) -> ProtocolError:
    return ProtocolError(type(exc).__name__, str(exc))


def _require(payload: dict, key: str) -> object:
    if key not in payload:
        raise ProtocolError("ValidationError", f"message is missing field {key!r}")
    return payload[key]


def _anchor_field(payload: dict, key: str) -> AnchorId:
    value = _require(payload, key)
    try:
        return parse_anchor_id(str(value))
    except AnchorError as exc:
        raise ProtocolError(type(exc).__name__, f"{key}: {exc}") from exc


def doc_to_json(doc: SketchDocument) -> dict:
    return {
        "anchor": str(doc.anchor),
        "image": doc.image_name,
        "image_url": f"/image/{doc.image_name}",
        "mime": doc.mime,
        "width": doc.width,
        "height": doc.height,
        "annotation": doc.annotation,
        "authors": list(doc.authors),
        "created": doc.created.isoformat(),
        "modified": doc.modified.isoformat(),
        "markers": [marker_to_json(m) for m in doc.markers],
    }


def marker_to_json(marker: Marker) -> dict:
    return {
        "anchor": str(marker.anchor),
        "x": marker.rect.x,
        "y": marker.rect.y,
        "w": marker.rect.w,
        "h": marker.rect.h,
        "annotation": marker.annotation,
    }


def link_view_to_json(view: LinkView) -> dict:
    entry: dict = {
        "a": str(view.link.a),
        "b": str(view.link.b),
        "created": view.link.created.isoformat(),
        "peer": str(view.peer),
        "peer_kind": view.peer_kind.label,
    }
    if view.source_record is not None:
        rec = view.source_record
        entry["source"] = {
            "project": rec.project,
            "path": rec.path,
            "referent_kind": rec.referent_kind,
            "artifact_path": rec.artifact_path,
            "modified": rec.modified.isoformat(),
        }
    if view.sketch_meta is not None:
        meta = view.sketch_meta
        entry["sketch"] = {
            "annotation": meta.annotation,
            "authors": list(meta.authors),
            "modified": meta.modified.isoformat() if meta.modified else None,
        }
    return entry


def index_to_json(index: ProjectIndex) -> dict:
    return {
        "project": index.project_name,
        "files": [
            {
                "path": file.path,
                "declarations": [
                    {
                        "kind": d.kind,
                        "name": d.name,
                        "start": d.start_line,
                        "end": d.end_line,
                        "artifact_path": d.artifact_path,
                    }
                    for d in file.declarations
                ],
                "anchors": [
                    {
                        "anchor": str(occ.anchor),
                        "line": occ.tag_line,
                        "kind": ref.kind,
                        "name": ref.name,
                        "start": ref.start_line,
                        "end": ref.end_line,
                        "artifact_path": ref.artifact_path,
                    }
                    for occ, ref in zip(file.occurrences, file.referents)
                ],
            }
            for file in index.files
        ],
    }


class ServiceCore:
    """State and request handling, independent of any transport."""

    def __init__(self, config: ServerConfig, scan_on_init: bool = True):
        self.config = config
        self.data_dir = config.data_dir
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.store = LinkStore.load(self.data_dir / STORE_FILE)
        self.indexes: dict[str, ProjectIndex] = {}
        self.catalog: dict[AnchorId, SketchDocument] = {
            doc.anchor: doc for doc in load_all_sketches(self.data_dir)
        }
        if scan_on_init:
            for name in config.projects:
                self.apply_rescan(name, self.scan_project(name))

    # -- scanning ---------------------------------------------------------------

    def scan_project(self, name: str) -> ProjectIndex:
        if name not in self.config.projects:
            raise ProtocolError("UnknownProject", f"no project named {name!r}")
        try:
            return scan_tree(self.config.projects[name], project_name=name)
        except ScannerError as exc:
            raise _wrap_module_error(exc) from exc

    def apply_rescan(self, name: str, index: ProjectIndex) -> dict:
        """Swap in a fresh index and refresh source-anchor records."""
        self.indexes[name] = index
        for file in index.files:
            modified = datetime.fromtimestamp(file.mtime, tz=timezone.utc)
            for occ, ref in zip(file.occurrences, file.referents):
                self.store.record_source_anchor(
                    SourceAnchorRecord(
                        anchor=occ.anchor,
                        project=name,
                        path=file.path,
                        referent_kind=ref.kind,
                        artifact_path=ref.artifact_path,
                        modified=modified,
                    )
                )
        self.store.save()
        return {
            "project": name,
            "files": len(index.files),
            "anchors": index.occurrence_count,
            "scanned_at": index.scanned_at.isoformat(),
        }

    # -- anchor resolution --------------------------------------------------------

    def knows_anchor(self, anchor: AnchorId) -> bool:
        if anchor.kind is AnchorKind.SOURCE_CODE:
            if self.store.get_record(anchor) is not None:
                return True
            return any(index.find_anchor(anchor) for index in self.indexes.values())
        if anchor.kind is AnchorKind.SKETCH:
            return anchor in self.catalog
        return self.find_marker(anchor) is not None

    def find_marker(self, anchor: AnchorId) -> tuple[SketchDocument, Marker] | None:
        for doc in self.catalog.values():
            marker = doc.marker(anchor)
            if marker is not None:
                return doc, marker
        return None

    def sketch_meta_of(self, anchor: AnchorId) -> SketchMeta | None:
        """Sketch metadata for a sketch anchor or for a marker's sketch."""
        doc = self.catalog.get(anchor)
        if doc is None:
            found = self.find_marker(anchor)
            if found is None:
                return None
            doc = found[0]
        return doc.meta()

    def resolve_navigation(self, anchor: AnchorId) -> dict:
        """Event payload for scrolling an editor to a source anchor."""
        if anchor.kind is not AnchorKind.SOURCE_CODE:
            raise ProtocolError(
                "UnknownAnchor", f"navigate needs a source-code anchor, got {anchor.kind.label}"
            )
        for name, index in self.indexes.items():
            found = index.find_anchor(anchor)
            if found is None:
                continue
            file, _, ref = found
            return {
                "anchor": str(anchor),
                "project": name,
                "path": file.path,
                "start": ref.start_line,
                "end": ref.end_line,
                "kind": ref.kind,
            }
        raise ProtocolError("UnknownAnchor", f"anchor {anchor} is not in any scanned project")

    # -- sketch handlers -----------------------------------------------------------

    def _get_doc(self, anchor: AnchorId) -> SketchDocument:
        doc = self.catalog.get(anchor)
        if doc is None:
            raise ProtocolError("SketchNotFound", f"no sketch {anchor}")
        return doc

    def _store_doc(self, doc: SketchDocument, image_bytes: bytes | None = None) -> None:
        store_sketch(self.data_dir, doc, image_bytes)
        self.catalog[doc.anchor] = doc

    def upload_sketch(self, payload: dict) -> tuple[dict, list[Event]]:
        image_b64 = str(_require(payload, "image_base64"))
        try:
            image_bytes = base64.b64decode(image_b64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ProtocolError("ValidationError", f"image_base64 does not decode: {exc}")
        mime = str(_require(payload, "mime"))
        meta = SketchMeta(
            annotation=str(payload.get("annotation", "")),
            authors=tuple(str(a) for a in payload.get("authors", [])),
        )
        return self.ingest_image(image_bytes, mime, meta)

    def ingest_image(
        self, image_bytes: bytes, mime: str, meta: SketchMeta
    ) -> tuple[dict, list[Event]]:
        try:
            doc = create_sketch(image_bytes, mime, meta)
        except SketchError as exc:
            raise _wrap_module_error(exc) from exc
        self._store_doc(doc, image_bytes)
        event = Event(
            TOPIC_SKETCHES,
            "sketch_changed",
            {"anchor": str(doc.anchor), "change": "created"},
        )
        return doc_to_json(doc), [event]

    def get_sketch(self, payload: dict) -> tuple[dict, list[Event]]:
        doc = self._get_doc(_anchor_field(payload, "anchor"))
        return (
            {
                "doc": doc_to_json(doc),
                "svg": serialize_sketch_svg(doc).decode("utf-8"),
                "svg_url": f"/sketch/{doc.anchor}.svg",
            },
            [],
        )

    def list_sketches(self, payload: dict) -> tuple[dict, list[Event]]:
        docs = sorted(
            self.catalog.values(), key=lambda d: (d.modified, str(d.anchor)), reverse=True
        )
        return (
            {
                "sketches": [
                    {
                        "anchor": str(doc.anchor),
                        "annotation": doc.annotation,
                        "authors": list(doc.authors),
                        "created": doc.created.isoformat(),
                        "modified": doc.modified.isoformat(),
                        "markers": len(doc.markers),
                    }
                    for doc in docs
                ]
            },
            [],
        )

    def add_marker(self, payload: dict) -> tuple[dict, list[Event]]:
        doc = self._get_doc(_anchor_field(payload, "sketch"))
        rect_raw = _require(payload, "rect")
        try:
            rect = Rect(
                float(rect_raw["x"]),
                float(rect_raw["y"]),
                float(rect_raw["w"]),
                float(rect_raw["h"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError("ValidationError", f"rect needs numeric x/y/w/h: {exc}")
        try:
            updated, marker = add_marker(doc, rect, str(payload.get("annotation", "")))
        except SketchError as exc:
            raise _wrap_module_error(exc) from exc
        self._store_doc(updated)
        event = Event(
            TOPIC_SKETCHES,
            "sketch_changed",
            {"anchor": str(doc.anchor), "change": "marker_added", "marker": str(marker.anchor)},
        )
        return {"marker": marker_to_json(marker), "doc": doc_to_json(updated)}, [event]

    def remove_marker(self, payload: dict) -> tuple[dict, list[Event]]:
        doc = self._get_doc(_anchor_field(payload, "sketch"))
        marker_anchor = _anchor_field(payload, "marker")
        try:
            updated = remove_marker(doc, marker_anchor)
        except SketchError as exc:
            raise _wrap_module_error(exc) from exc
        self._store_doc(updated)
        event = Event(
            TOPIC_SKETCHES,
            "sketch_changed",
            {"anchor": str(doc.anchor), "change": "marker_removed", "marker": str(marker_anchor)},
        )
        return {"doc": doc_to_json(updated)}, [event]

    def update_annotation(self, payload: dict) -> tuple[dict, list[Event]]:
        doc = self._get_doc(_anchor_field(payload, "sketch"))
        target = _anchor_field(payload, "target")
        try:
            updated = update_annotation(doc, target, str(_require(payload, "text")))
        except SketchError as exc:
            raise _wrap_module_error(exc) from exc
        self._store_doc(updated)
        event = Event(
            TOPIC_SKETCHES,
            "sketch_changed",
            {"anchor": str(doc.anchor), "change": "annotation", "target": str(target)},
        )
        return {"doc": doc_to_json(updated)}, [event]

    # -- link handlers ---------------------------------------------------------------

    def create_link(self, payload: dict) -> tuple[dict, list[Event]]:
        a = _anchor_field(payload, "a")
        b = _anchor_field(payload, "b")
        try:
            link = self.store.create_link(a, b, known=self.knows_anchor)
        except LinkError as exc:
            raise _wrap_module_error(exc) from exc
        self.store.save()
        event = Event(
            TOPIC_LINKS,
            "link_changed",
            {"a": str(link.a), "b": str(link.b), "change": "created"},
        )
        return (
            {"link": {"a": str(link.a), "b": str(link.b), "created": link.created.isoformat()}},
            [event],
        )

    def remove_link(self, payload: dict) -> tuple[dict, list[Event]]:
        a = _anchor_field(payload, "a")
        b = _anchor_field(payload, "b")
        removed = self.store.remove_link(a, b)
        events: list[Event] = []
        if removed:
            self.store.save()
            events.append(
                Event(
                    TOPIC_LINKS,
                    "link_changed",
                    {"a": str(a), "b": str(b), "change": "removed"},
                )
            )
        return {"removed": removed}, events

    def query_links(self, payload: dict) -> tuple[dict, list[Event]]:
        anchor = _anchor_field(payload, "anchor")
        views = self.store.links_of(anchor, sketch_meta=self.sketch_meta_of)
        return {"links": [link_view_to_json(v) for v in views]}, []

    # -- artifacts ---------------------------------------------------------------------

    def list_artifacts(self, payload: dict) -> tuple[dict, list[Event]]:
        name = str(_require(payload, "project"))
        index = self.indexes.get(name)
        if index is None:
            raise ProtocolError("UnknownProject", f"no project named {name!r}")
        return index_to_json(index), []

    def stats(self) -> dict:
        return {
            "sketches": len(self.catalog),
            "links": len(self.store.links),
            "projects": sorted(self.indexes),
        }
