"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
"""

from __future__ import annotations

import base64
import json
import os
import queue
import re
import shutil
import socket
import subprocess
import sys
import threading
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path
from random import Random

import httpx
import pytest

from sketchlink.anchors import (
    AnchorKind,
    format_anchor_id,
    is_anchor_text,
    new_anchor_id,
    parse_anchor_id,
)
from sketchlink.links import ForbiddenKindPair, LinkStore, SelfLink, verify
from sketchlink.scanner import (
    JAVA_PROFILE,
    insert_anchor,
    remove_anchor,
    scan_file,
    scan_tree,
)
from sketchlink.sketches import (
    Rect,
    SketchMeta,
    add_marker,
    create_sketch,
    parse_sketch_svg,
    serialize_sketch_svg,
    store_sketch,
)
from tests.conftest import FIXTURES, make_png

NOW = datetime(2024, 8, 1, tzinfo=timezone.utc)
METHOD_ANCHOR = "0cafe0002-0000-4000-8000-000000000002"  # Main.main, lines 10-12


def report(criterion: str, passed: bool) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if passed else 'FAIL'}")
    assert passed, criterion


def test_anchor_round_trip_bulk():
    started = time.perf_counter()
    rng = Random(2024)
    failures = 0
    anchors = []
    for _ in range(10_000):
        anchor = new_anchor_id(rng.choice(list(AnchorKind)), rng)
        anchors.append(anchor)
        if parse_anchor_id(format_anchor_id(anchor)) != anchor:
            failures += 1

    rejected = 0
    for i in range(1_000):
        text = format_anchor_id(anchors[i])
        mode = i % 5
        if mode == 0:
            bad = text[:-1]
        elif mode == 1:
            bad = text + "f"
        elif mode == 2:
            bad = "8" + text[1:]
        elif mode == 3:
            pos = 1 + (i % 35)
            bad = text[:pos] + "x" + text[pos + 1 :]
        else:
            bad = text.replace("-", "_", 1)
        if not is_anchor_text(bad):
            rejected += 1
    elapsed = time.perf_counter() - started
    report(
        "anchor round-trip (10^4 ids, 10^3 mutations)",
        failures == 0 and rejected == 1_000 and elapsed < 5.0,
    )


def test_scanner_oracle_matches_hand_table(java_corpus, expected_referents):
    started = time.perf_counter()
    index = scan_tree(java_corpus)
    actual = {}
    for file in index.files:
        for occ, ref in zip(file.occurrences, file.referents):
            actual[str(occ.anchor)] = {
                "file": file.path,
                "tag_line": occ.tag_line,
                "hide": occ.hide_whole_comment,
                "kind": ref.kind,
                "name": ref.name,
                "start": ref.start_line,
                "end": ref.end_line,
                "artifact_path": ref.artifact_path,
            }
    elapsed = time.perf_counter() - started
    matches = sum(1 for k, v in expected_referents.items() if actual.get(k) == v)
    report(
        f"scanner oracle ({matches}/{len(expected_referents)} referents exact)",
        actual == expected_referents and len(index.files) == 20 and elapsed < 5.0,
    )


def test_edit_inverses_over_corpus(java_corpus):
    rng = Random(7)
    files = sorted(java_corpus.rglob("*.java"))
    failures = 0
    checked = 0
    for path in files:
        original = path.read_text(encoding="utf-8")
        line_count = len(original.splitlines())
        for line in range(1, line_count + 1):
            anchor = new_anchor_id(AnchorKind.SOURCE_CODE, rng)
            edited, occ = insert_anchor(original, line, anchor, JAVA_PROFILE)
            found = [o for o in scan_file(edited, str(path), JAVA_PROFILE) if o.anchor == anchor]
            restored = remove_anchor(edited, anchor, JAVA_PROFILE)
            checked += 1
            if len(found) != 1 or occ.anchor != anchor or restored != original:
                failures += 1
    report(f"edit inverses ({checked} insertion points, {failures} failures)", failures == 0)


def test_svg_round_trip_200_documents():
    rng = Random(99)
    glyphs = "abz XYZ 0-9 <&\"'> äöü✎\n"
    failures = 0
    for i in range(200):
        width, height = rng.randint(2, 80), rng.randint(2, 80)
        meta = SketchMeta(
            annotation="".join(rng.choice(glyphs) for _ in range(rng.randint(0, 30))),
            authors=tuple(
                "".join(rng.choice(glyphs.strip()) for _ in range(rng.randint(1, 12)))
                for _ in range(rng.randint(0, 3))
            ),
            created=NOW + timedelta(seconds=i),
        )
        doc = create_sketch(make_png(width, height), "image/png", meta, rng=rng)
        for _ in range(rng.randint(0, 10)):
            rect = Rect(
                rng.randint(-2, width - 1),
                rng.randint(-2, height - 1),
                rng.randint(3, 40),
                rng.randint(3, 40),
            )
            doc, _ = add_marker(doc, rect, str(rng.random()), rng=rng, now=NOW)
        data = serialize_sketch_svg(doc)
        again = parse_sketch_svg(data)
        if again != doc:
            failures += 1
            continue
        root_id = re.search(rb'id="([^"]+)"', data).group(1).decode()
        if parse_anchor_id(root_id).kind is not AnchorKind.SKETCH:
            failures += 1
        for rect_id in re.findall(rb'<rect id="([^"]+)"', data):
            if parse_anchor_id(rect_id.decode()).kind is not AnchorKind.MARKER:
                failures += 1
    report("SVG round-trip (200 documents)", failures == 0)


def test_link_graph_invariants_randomized(tmp_path):
    rng = Random(512)
    path = tmp_path / "links.json"
    store = LinkStore(path)
    pool = (
        [new_anchor_id(AnchorKind.SOURCE_CODE, rng) for _ in range(6)]
        + [new_anchor_id(AnchorKind.SKETCH, rng) for _ in range(6)]
        + [new_anchor_id(AnchorKind.MARKER, rng) for _ in range(6)]
    )
    model: set[frozenset] = set()
    ok = True
    forbidden_rejections = 0
    for step in range(1_000):
        a, b = rng.choice(pool), rng.choice(pool)
        op = rng.random()
        if op < 0.55:
            both_source = (
                a.kind is AnchorKind.SOURCE_CODE and b.kind is AnchorKind.SOURCE_CODE
            )
            try:
                store.create_link(a, b, now=NOW + timedelta(seconds=step))
                if a == b or both_source:
                    ok = False
                model.add(frozenset((a, b)))
            except SelfLink:
                ok = ok and a == b
            except ForbiddenKindPair:
                forbidden_rejections += 1
                ok = ok and both_source
        elif op < 0.8:
            removed = store.remove_link(a, b)
            expected = frozenset((a, b)) in model and a != b
            ok = ok and removed == expected
            model.discard(frozenset((a, b)))
        else:
            anchor = rng.choice(pool)
            for view in store.links_of(anchor):
                peers_back = [v.link.pair for v in store.links_of(view.peer)]
                ok = ok and view.link.pair in peers_back
        # idempotence probe
        if op < 0.55 and a != b and frozenset((a, b)) in model:
            before = len(store.links)
            try:
                store.create_link(b, a, now=NOW)
            except (SelfLink, ForbiddenKindPair):
                pass
            ok = ok and len(store.links) == before
        # persist, then simulate a crash by reloading from disk
        store.save()
        reloaded = LinkStore.load(path)
        ok = ok and {l.pair for l in reloaded.links} == {l.pair for l in store.links}
        ok = ok and {l.pair for l in store.links} == model
        if not ok:
            break
    report(
        f"link-graph invariants (1000 ops, {forbidden_rejections} forbidden rejections)",
        ok and forbidden_rejections > 0,
    )


@pytest.fixture
def verify_setup(tmp_path, minitree):
    project = tmp_path / "proj"
    shutil.copytree(minitree, project)
    data = tmp_path / "data"
    doc = create_sketch(make_png(), "image/png", SketchMeta(created=NOW), rng=Random(3))
    store_sketch(data, doc, make_png())
    store = LinkStore(data / "links.json")
    anchors = [
        "0beef0001-0000-4000-8000-0000000000a1",
        "0beef0002-0000-4000-8000-0000000000a2",
        "0beef0003-0000-4000-8000-0000000000a3",
    ]
    index = scan_tree(project, project_name="proj")
    for text in anchors:
        store.create_link(parse_anchor_id(text), doc.anchor, now=NOW)
    from sketchlink.links import SourceAnchorRecord

    for file in index.files:
        for occ, ref in zip(file.occurrences, file.referents):
            store.record_source_anchor(
                SourceAnchorRecord(occ.anchor, "proj", file.path, ref.kind, ref.artifact_path, NOW)
            )
    store.save()
    return project, data, store, doc


def test_verify_oracle_four_mutations(verify_setup, tmp_path):
    project, data, store, doc = verify_setup

    def run():
        return verify(store, scan_tree(project, project_name="proj"), data)

    def shape(report_obj):
        return (
            len(report_obj.dangling_source),
            len(report_obj.dangling_sketch),
            len(report_obj.orphan_anchors),
            len(report_obj.stale_records),
        )

    ok = shape(run()) == (0, 0, 0, 0)

    # 1: delete a linked file -> dangling source end only
    beta = project / "src" / "Beta.java"
    beta_text = beta.read_text()
    beta.unlink()
    result = shape(run())
    ok = ok and result == (1, 0, 0, 0)
    beta.write_text(beta_text)

    # 2: delete the sketch SVG -> dangling sketch ends only
    svg = data / "sketches" / f"{doc.anchor.uuid}.svg"
    svg_bytes = svg.read_bytes()
    svg.unlink()
    result = shape(run())
    ok = ok and result == (0, 3, 0, 0)
    svg.write_bytes(svg_bytes)

    # 3: add an unlinked anchor -> orphan only
    gamma = project / "src" / "Gamma.java"
    gamma.write_text(
        "package mini;\n\n"
        "/** @sketchlink 0beef0009-0000-4000-8000-0000000000a9 */\n"
        "class Gamma {}\n"
    )
    result = shape(run())
    ok = ok and result == (0, 0, 1, 0)
    gamma.unlink()

    # 4: move a file -> stale record only
    moved = project / "src" / "BetaMoved.java"
    beta.rename(moved)
    result = shape(run())
    ok = ok and result == (0, 0, 0, 1)
    moved.rename(beta)

    ok = ok and shape(run()) == (0, 0, 0, 0)
    report("verify oracle (pristine + 4 scripted mutations)", ok)


# --- end-to-end over a real socket ------------------------------------------------


def _free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


def _wait_health(base_url: str, predicate, timeout: float = 20.0) -> dict:
    deadline = time.time() + timeout
    last = {}
    while time.time() < deadline:
        try:
            last = httpx.get(f"{base_url}/health", timeout=2.0).json()
            if predicate(last):
                return last
        except Exception:
            pass
        time.sleep(0.1)
    raise TimeoutError(f"health predicate never satisfied, last: {last}")


class _LineReader:
    def __init__(self, stream):
        self.lines: queue.Queue[str] = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        for line in stream:
            self.lines.put(line)

    def get(self, timeout: float) -> str | None:
        try:
            return self.lines.get(timeout=timeout)
        except queue.Empty:
            return None


def test_end_to_end_navigate(tmp_path, java_corpus):
    from websockets.sync.client import connect

    port = _free_port()
    base_url = f"http://127.0.0.1:{port}"
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "data_dir": str(tmp_path / "data"),
                "bind": f"127.0.0.1:{port}",
                "projects": {"fixture": str(java_corpus)},
            }
        )
    )
    env = dict(os.environ, PYTHONUNBUFFERED="1")
    server = subprocess.Popen(
        [sys.executable, "-m", "sketchlink", "serve", "-c", str(config_path)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.STDOUT,
        env=env,
    )
    editor = None
    try:
        _wait_health(base_url, lambda h: h.get("status") == "ok")

        editor = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "sketchlink",
                "editor",
                "fixture",
                "--server",
                f"ws://127.0.0.1:{port}/ws",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            env=env,
        )
        reader = _LineReader(editor.stdout)
        _wait_health(base_url, lambda h: h.get("editors", {}).get("fixture") == 1)

        ids = iter(range(1, 100))

        def request(ws, msg_type, **payload):
            rid = f"e2e-{next(ids)}"
            ws.send(json.dumps({"type": msg_type, "request_id": rid, **payload}))
            while True:
                reply = json.loads(ws.recv(timeout=10))
                if reply.get("type") == "response" and reply.get("request_id") == rid:
                    assert reply["ok"], reply
                    return reply["result"]

        with connect(f"ws://127.0.0.1:{port}/ws", open_timeout=5) as ws:
            uploaded = request(
                ws,
                "upload_sketch",
                image_base64=base64.b64encode(make_png(1, 1)).decode(),
                mime="image/png",
                annotation="e2e",
            )
            assert (uploaded["width"], uploaded["height"]) == (1, 1)
            sketch = uploaded["anchor"]

            added = request(
                ws, "add_marker", sketch=sketch, rect={"x": 0, "y": 0, "w": 1, "h": 1}
            )
            marker = added["marker"]["anchor"]

            request(ws, "create_link", a=marker, b=METHOD_ANCHOR)
            links = request(ws, "query_links", anchor=marker)["links"]
            assert len(links) == 1
            assert links[0]["peer"] == METHOD_ANCHOR

            sent_at = time.perf_counter()
            nav = request(ws, "navigate", anchor=METHOD_ANCHOR)
            assert nav["delivered"] == 1

            line = reader.get(timeout=1.0)
            latency = time.perf_counter() - sent_at
            assert line is not None, "editor printed nothing within 1s"
            event = json.loads(line)
            assert event == {
                "path": "src/main/java/com/acme/app/Main.java",
                "start": 10,
                "end": 12,
                "kind": "method",
            }
            extra = reader.get(timeout=0.3)
            assert extra is None, f"expected exactly one navigate line, got more: {extra}"

        report(f"end-to-end navigate (latency {latency * 1000:.0f} ms)", latency < 1.0)
    finally:
        if editor is not None:
            editor.kill()
        server.kill()
        server.wait(timeout=10)


def test_html_export_three_links(tmp_path, java_corpus):
    from sketchlink.cli import main

    data = tmp_path / "data"
    doc = create_sketch(
        make_png(), "image/png", SketchMeta(annotation="arch", created=NOW), rng=Random(21)
    )
    store_sketch(data, doc, make_png())
    store = LinkStore(data / "links.json")
    linked = {
        "0cafe0001-0000-4000-8000-000000000001": "Main.java.html",  # class Main
        "0cafe0002-0000-4000-8000-000000000002": "Main.java.html",  # method main
        "0cafe0007-0000-4000-8000-000000000007": "Strings.java.html",  # method reverse
    }
    for text in linked:
        store.create_link(parse_anchor_id(text), doc.anchor, now=NOW)
    store.save()

    out = tmp_path / "site"
    code = main(["export-html", str(java_corpus), "--data-dir", str(data), "--out", str(out)])
    hits = []
    for page in sorted((out / "files").rglob("*.html")):
        for match in re.finditer(r'<a class="sketch-link" href="([^"]+)"', page.read_text()):
            hits.append((page, match.group(1)))
    resolved = all((page.parent / href).resolve().is_file() for page, href in hits)
    pages_hit = sorted({page.name for page, _ in hits})
    report(
        f"HTML export (3 links on {pages_hit})",
        code == 0
        and len(hits) == 3
        and resolved
        and pages_hit == ["Main.java.html", "Strings.java.html"],
    )
