from __future__ import annotations

import shutil
from datetime import datetime, timedelta, timezone
from random import Random

import pytest

from sketchlink.anchors import AnchorKind, new_anchor_id, parse_anchor_id
from sketchlink.links import (
    ForbiddenKindPair,
    InvalidAnchorKind,
    IntegrityReport,
    LinkStore,
    SelfLink,
    SourceAnchorRecord,
    UnknownAnchor,
    verify,
)
from sketchlink.scanner import scan_tree
from sketchlink.sketches import SketchMeta, create_sketch, store_sketch
from tests.conftest import make_png

RNG = Random(31)
NOW = datetime(2024, 6, 1, tzinfo=timezone.utc)


def src_anchor():
    return new_anchor_id(AnchorKind.SOURCE_CODE, RNG)


def sketch_anchor():
    return new_anchor_id(AnchorKind.SKETCH, RNG)


def marker_anchor():
    return new_anchor_id(AnchorKind.MARKER, RNG)


def test_create_and_query():
    store = LinkStore()
    a, b = src_anchor(), sketch_anchor()
    link = store.create_link(a, b, now=NOW)
    assert [v.link for v in store.links_of(a)] == [link]
    assert [v.link for v in store.links_of(b)] == [link]
    assert store.links_of(b)[0].peer == a


def test_source_source_forbidden():
    store = LinkStore()
    with pytest.raises(ForbiddenKindPair):
        store.create_link(src_anchor(), src_anchor())


def test_all_other_kind_pairs_allowed():
    store = LinkStore()
    pairs = [
        (src_anchor(), sketch_anchor()),
        (src_anchor(), marker_anchor()),
        (sketch_anchor(), sketch_anchor()),
        (sketch_anchor(), marker_anchor()),
        (marker_anchor(), marker_anchor()),
    ]
    for a, b in pairs:
        store.create_link(a, b, now=NOW)
    assert len(store.links) == len(pairs)


def test_self_link_rejected():
    store = LinkStore()
    a = sketch_anchor()
    with pytest.raises(SelfLink):
        store.create_link(a, a)


def test_create_is_idempotent():
    store = LinkStore()
    a, b = src_anchor(), sketch_anchor()
    first = store.create_link(a, b, now=NOW)
    second = store.create_link(b, a, now=NOW + timedelta(hours=1))
    assert first is second
    assert len(store.links) == 1


def test_unknown_anchor_check():
    store = LinkStore()
    a, b = src_anchor(), sketch_anchor()
    with pytest.raises(UnknownAnchor):
        store.create_link(a, b, known=lambda anchor: anchor == a)
    store.create_link(a, b, known=lambda anchor: True)


def test_remove_link_is_order_insensitive():
    store = LinkStore()
    a, b = src_anchor(), sketch_anchor()
    store.create_link(a, b, now=NOW)
    assert store.remove_link(b, a) is True
    assert store.remove_link(a, b) is False
    assert store.links_of(a) == []


def test_links_of_newest_first():
    store = LinkStore()
    a = sketch_anchor()
    peers = [marker_anchor() for _ in range(3)]
    for i, peer in enumerate(peers):
        store.create_link(a, peer, now=NOW + timedelta(minutes=i))
    views = store.links_of(a)
    assert [v.peer for v in views] == list(reversed(peers))


def test_symmetry_over_random_ops():
    store = LinkStore()
    rng = Random(7)
    anchors = [sketch_anchor() for _ in range(8)] + [marker_anchor() for _ in range(8)]
    for step in range(300):
        a, b = rng.sample(anchors, 2)
        if rng.random() < 0.6:
            store.create_link(a, b, now=NOW + timedelta(seconds=step))
        else:
            store.remove_link(a, b)
    for a in anchors:
        for view in store.links_of(a):
            assert any(v.link == view.link for v in store.links_of(view.peer))


def test_record_upsert():
    store = LinkStore()
    anchor = src_anchor()
    rec = SourceAnchorRecord(anchor, "proj", "src/A.java", "method", "p.A.f", NOW)
    store.record_source_anchor(rec)
    assert store.get_record(anchor) == rec
    moved = SourceAnchorRecord(anchor, "proj", "src/B.java", "method", "p.B.f", NOW)
    store.record_source_anchor(moved)
    assert store.get_record(anchor).path == "src/B.java"
    assert len(store.records) == 1


def test_record_rejects_non_source_kind():
    store = LinkStore()
    with pytest.raises(InvalidAnchorKind):
        store.record_source_anchor(
            SourceAnchorRecord(sketch_anchor(), "p", "x", "method", "", NOW)
        )


def test_persistence_round_trip(tmp_path):
    path = tmp_path / "links.json"
    store = LinkStore(path)
    a, b = src_anchor(), sketch_anchor()
    link = store.create_link(a, b, now=NOW)
    store.record_source_anchor(
        SourceAnchorRecord(a, "proj", "src/A.java", "class", "p.A", NOW)
    )
    store.save()
    loaded = LinkStore.load(path)
    assert loaded.links == (link,)
    assert loaded.get_record(a) == store.get_record(a)


def test_load_missing_file_is_empty(tmp_path):
    store = LinkStore.load(tmp_path / "links.json")
    assert store.links == ()
    assert store.records == ()


def test_reload_after_each_acked_mutation(tmp_path):
    """Simulated crash: reload from disk after every save and compare."""
    path = tmp_path / "links.json"
    store = LinkStore(path)
    rng = Random(17)
    anchors = [sketch_anchor() for _ in range(6)] + [src_anchor() for _ in range(6)]
    for step in range(100):
        a, b = rng.sample(anchors, 2)
        try:
            store.create_link(a, b, now=NOW + timedelta(seconds=step))
        except ForbiddenKindPair:
            continue
        store.save()
        reloaded = LinkStore.load(path)
        assert set(l.pair for l in reloaded.links) == set(l.pair for l in store.links)


# --- verify ---------------------------------------------------------------------


@pytest.fixture
def verify_env(tmp_path, minitree):
    """A project copy, a sketch repo, and a store linking one anchor."""
    project = tmp_path / "proj"
    shutil.copytree(minitree, project)
    repo = tmp_path / "data"
    doc = create_sketch(make_png(), "image/png", SketchMeta(created=NOW), rng=Random(3))
    store_sketch(repo, doc, make_png())

    method_anchor = parse_anchor_id("0beef0002-0000-4000-8000-0000000000a2")
    class_anchor = parse_anchor_id("0beef0001-0000-4000-8000-0000000000a1")
    field_anchor = parse_anchor_id("0beef0003-0000-4000-8000-0000000000a3")

    store = LinkStore(tmp_path / "links.json")
    store.create_link(method_anchor, doc.anchor, now=NOW)
    store.create_link(class_anchor, doc.anchor, now=NOW)
    store.create_link(field_anchor, doc.anchor, now=NOW)

    index = scan_tree(project, project_name="proj")
    for file in index.files:
        for occ, ref in zip(file.occurrences, file.referents):
            store.record_source_anchor(
                SourceAnchorRecord(occ.anchor, "proj", file.path, ref.kind, ref.artifact_path, NOW)
            )
    return project, repo, store, doc


def fresh_index(project):
    return scan_tree(project, project_name="proj")


def test_verify_pristine_is_empty(verify_env):
    project, repo, store, _ = verify_env
    report = verify(store, fresh_index(project), repo)
    assert report.is_empty
    assert isinstance(report, IntegrityReport)


def test_verify_deleted_file_dangles(verify_env):
    project, repo, store, _ = verify_env
    (project / "src" / "Beta.java").unlink()
    report = verify(store, fresh_index(project), repo)
    assert len(report.dangling_source) == 1
    assert report.dangling_source[0].missing == "0beef0003-0000-4000-8000-0000000000a3"
    assert not report.dangling_sketch


def test_verify_deleted_sketch_dangles(verify_env):
    project, repo, store, doc = verify_env
    (repo / "sketches" / f"{doc.anchor.uuid}.svg").unlink()
    report = verify(store, fresh_index(project), repo)
    assert len(report.dangling_sketch) == 3
    assert not report.dangling_source


def test_verify_unlinked_anchor_is_orphan(verify_env, tmp_path):
    project, repo, store, _ = verify_env
    extra = project / "src" / "Gamma.java"
    extra.write_text(
        "package mini;\n\n"
        "/** @sketchlink 0beef0009-0000-4000-8000-0000000000a9 */\n"
        "class Gamma {}\n"
    )
    report = verify(store, fresh_index(project), repo)
    assert [o.anchor for o in report.orphan_anchors] == [
        "0beef0009-0000-4000-8000-0000000000a9"
    ]


def test_verify_moved_file_is_stale(verify_env):
    project, repo, store, _ = verify_env
    (project / "src" / "Beta.java").rename(project / "src" / "BetaMoved.java")
    report = verify(store, fresh_index(project), repo)
    assert len(report.stale_records) == 1
    stale = report.stale_records[0]
    assert stale.recorded_path == "src/Beta.java"
    assert stale.current_path == "src/BetaMoved.java"
    assert not report.dangling_source
