"""Link store: undirected anchor pairs plus source-anchor metadata.

Persists as one JSON document written atomically (temp file + rename), so a
crash between mutations never corrupts acknowledged state.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from sketchlink.anchors import AnchorId, AnchorKind, format_anchor_id, parse_anchor_id
from sketchlink.scanner.scan import ProjectIndex
from sketchlink.sketches import SketchMeta, load_all_sketches

STORE_FILE_NAME = "links.json"
STORE_VERSION = 1


class LinkError(Exception):
    """Base class for link-store failures."""


class SelfLink(LinkError):
    pass


class ForbiddenKindPair(LinkError):
    pass


class UnknownAnchor(LinkError):
    pass


class InvalidAnchorKind(LinkError):
    pass


class MalformedStore(LinkError):
    pass


@dataclass(frozen=True)
class Link:
    """Undirected association between two anchors."""

    a: AnchorId
    b: AnchorId
    created: datetime

    @property
    def pair(self) -> frozenset[AnchorId]:
        return frozenset((self.a, self.b))

    def peer_of(self, anchor: AnchorId) -> AnchorId:
        return self.b if anchor == self.a else self.a


@dataclass(frozen=True)
class SourceAnchorRecord:
    """Metadata kept for a source anchor, refreshed on every scan."""

    anchor: AnchorId
    project: str
    path: str
    referent_kind: str
    artifact_path: str
    modified: datetime


@dataclass(frozen=True)
class LinkView:
    """One entry of a links_of answer: the link seen from one side."""

    link: Link
    peer: AnchorId
    peer_kind: AnchorKind
    source_record: SourceAnchorRecord | None = None
    sketch_meta: SketchMeta | None = None


def _allowed_pair(a: AnchorId, b: AnchorId) -> bool:
    return not (a.kind is AnchorKind.SOURCE_CODE and b.kind is AnchorKind.SOURCE_CODE)


class LinkStore:
    """In-memory store; callers persist with save(). Not thread-safe: the
    server funnels all mutations through a single writer."""

    def __init__(self, path: Path | None = None):
        self.path = Path(path) if path else None
        self._links: list[Link] = []
        self._by_pair: dict[frozenset[AnchorId], Link] = {}
        self._records: dict[AnchorId, SourceAnchorRecord] = {}

    # -- links ----------------------------------------------------------------

    @property
    def links(self) -> tuple[Link, ...]:
        return tuple(self._links)

    def has_link(self, a: AnchorId, b: AnchorId) -> bool:
        return frozenset((a, b)) in self._by_pair

    def create_link(
        self,
        a: AnchorId,
        b: AnchorId,
        known: Callable[[AnchorId], bool] | None = None,
        now: datetime | None = None,
    ) -> Link:
        """Persist a link; idempotent for an existing pair."""
        if a == b:
            raise SelfLink(f"cannot link {a} to itself")
        if not _allowed_pair(a, b):
            raise ForbiddenKindPair("source-code anchors cannot link to each other")
        existing = self._by_pair.get(frozenset((a, b)))
        if existing is not None:
            return existing
        if known is not None:
            for anchor in (a, b):
                if not known(anchor):
                    raise UnknownAnchor(f"anchor {anchor} is not known")
        link = Link(a, b, now or datetime.now(timezone.utc))
        self._links.append(link)
        self._by_pair[link.pair] = link
        return link

    def remove_link(self, a: AnchorId, b: AnchorId) -> bool:
        link = self._by_pair.pop(frozenset((a, b)), None)
        if link is None:
            return False
        self._links.remove(link)
        return True

    def links_of(
        self,
        anchor: AnchorId,
        sketch_meta: Callable[[AnchorId], SketchMeta | None] | None = None,
    ) -> list[LinkView]:
        """All links touching `anchor`, newest first, with peer metadata."""
        views = []
        for link in reversed(self._links):
            if anchor not in link.pair:
                continue
            peer = link.peer_of(anchor)
            views.append(
                LinkView(
                    link=link,
                    peer=peer,
                    peer_kind=peer.kind,
                    source_record=self._records.get(peer),
                    sketch_meta=sketch_meta(peer) if sketch_meta else None,
                )
            )
        return views

    # -- source anchor records --------------------------------------------------

    @property
    def records(self) -> tuple[SourceAnchorRecord, ...]:
        return tuple(self._records.values())

    def get_record(self, anchor: AnchorId) -> SourceAnchorRecord | None:
        return self._records.get(anchor)

    def record_source_anchor(self, record: SourceAnchorRecord) -> None:
        """Upsert keyed by anchor id."""
        if record.anchor.kind is not AnchorKind.SOURCE_CODE:
            raise InvalidAnchorKind(
                f"records hold source-code anchors, got {record.anchor.kind.label}"
            )
        self._records[record.anchor] = record

    # -- persistence --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": STORE_VERSION,
            "links": [
                {
                    "a": format_anchor_id(link.a),
                    "b": format_anchor_id(link.b),
                    "created": link.created.isoformat(),
                }
                for link in self._links
            ],
            "source_anchors": [
                {
                    "anchor": format_anchor_id(rec.anchor),
                    "project": rec.project,
                    "path": rec.path,
                    "referent_kind": rec.referent_kind,
                    "artifact_path": rec.artifact_path,
                    "modified": rec.modified.isoformat(),
                }
                for rec in self._records.values()
            ],
        }

    def save(self, path: Path | None = None) -> None:
        target = Path(path) if path else self.path
        if target is None:
            raise ValueError("no store path configured")
        target.parent.mkdir(parents=True, exist_ok=True)
        data = json.dumps(self.to_dict(), indent=2).encode("utf-8")
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=".links-")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp_name, target)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise

    @classmethod
    def load(cls, path: Path) -> "LinkStore":
        """Load from disk; a missing file yields an empty store."""
        store = cls(path)
        target = Path(path)
        if not target.is_file():
            return store
        try:
            raw = json.loads(target.read_text(encoding="utf-8"))
            for item in raw.get("links", []):
                link = Link(
                    parse_anchor_id(item["a"]),
                    parse_anchor_id(item["b"]),
                    datetime.fromisoformat(item["created"]),
                )
                store._links.append(link)
                store._by_pair[link.pair] = link
            for item in raw.get("source_anchors", []):
                record = SourceAnchorRecord(
                    anchor=parse_anchor_id(item["anchor"]),
                    project=item["project"],
                    path=item["path"],
                    referent_kind=item["referent_kind"],
                    artifact_path=item["artifact_path"],
                    modified=datetime.fromisoformat(item["modified"]),
                )
                store._records[record.anchor] = record
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedStore(f"cannot read link store {target}: {exc}") from exc
        return store


# --- integrity verification ------------------------------------------------------


@dataclass(frozen=True)
class DanglingEnd:
    link_a: str
    link_b: str
    missing: str


@dataclass(frozen=True)
class OrphanAnchor:
    anchor: str
    path: str


@dataclass(frozen=True)
class StaleRecord:
    anchor: str
    recorded_path: str
    current_path: str
    recorded_kind: str
    current_kind: str


@dataclass(frozen=True)
class IntegrityReport:
    dangling_source: tuple[DanglingEnd, ...]
    dangling_sketch: tuple[DanglingEnd, ...]
    orphan_anchors: tuple[OrphanAnchor, ...]
    stale_records: tuple[StaleRecord, ...]

    @property
    def is_empty(self) -> bool:
        return not (
            self.dangling_source
            or self.dangling_sketch
            or self.orphan_anchors
            or self.stale_records
        )

    def to_dict(self) -> dict:
        return {
            "dangling_source": [vars(d) for d in self.dangling_source],
            "dangling_sketch": [vars(d) for d in self.dangling_sketch],
            "orphan_anchors": [vars(o) for o in self.orphan_anchors],
            "stale_records": [vars(s) for s in self.stale_records],
        }


def verify(store: LinkStore, index: ProjectIndex, sketch_repo: Path) -> IntegrityReport:
    """Check link integrity against a fresh scan and the sketch repository.

    Source anchors recorded for other projects are out of scope for the given
    index and do not count as dangling.
    """
    known_source: set[AnchorId] = index.source_anchors()
    sketch_docs = load_all_sketches(sketch_repo)
    known_visual: set[AnchorId] = set()
    for doc in sketch_docs:
        known_visual.add(doc.anchor)
        known_visual.update(m.anchor for m in doc.markers)

    dangling_source: list[DanglingEnd] = []
    dangling_sketch: list[DanglingEnd] = []
    linked: set[AnchorId] = set()

    for link in store.links:
        for anchor in (link.a, link.b):
            linked.add(anchor)
            if anchor.kind is AnchorKind.SOURCE_CODE:
                record = store.get_record(anchor)
                foreign = record is not None and record.project != index.project_name
                if not foreign and anchor not in known_source:
                    dangling_source.append(
                        DanglingEnd(str(link.a), str(link.b), str(anchor))
                    )
            else:
                if anchor not in known_visual:
                    dangling_sketch.append(
                        DanglingEnd(str(link.a), str(link.b), str(anchor))
                    )

    orphans = [
        OrphanAnchor(str(occ.anchor), file.path)
        for file in index.files
        for occ in file.occurrences
        if occ.anchor not in linked
    ]

    stale: list[StaleRecord] = []
    for record in store.records:
        if record.project != index.project_name:
            continue
        found = index.find_anchor(record.anchor)
        if found is None:
            continue  # covered by dangling/orphan reporting
        file, _, referent = found
        if file.path != record.path or referent.kind != record.referent_kind:
            stale.append(
                StaleRecord(
                    anchor=str(record.anchor),
                    recorded_path=record.path,
                    current_path=file.path,
                    recorded_kind=record.referent_kind,
                    current_kind=referent.kind,
                )
            )

    return IntegrityReport(
        tuple(dangling_source), tuple(dangling_sketch), tuple(orphans), tuple(stale)
    )
