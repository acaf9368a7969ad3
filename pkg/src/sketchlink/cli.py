"""Command-line surface: serve, scan, anchor-add, verify, editor, export-html.

Exit codes: 0 success (or clean verify), 1 verify findings, 2 usage, config,
or environment errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from sketchlink.anchors import AnchorKind, new_anchor_id
from sketchlink.links import LinkStore, verify
from sketchlink.scanner import (
    EditError,
    ScannerError,
    ProjectIndex,
    fold_ranges,
    insert_anchor,
    profile_for_path,
    scan_tree,
)
from sketchlink.server.config import ConfigError, ServerConfig, load_config

SCAN_SCHEMA_VERSION = 1
EDITOR_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def _span_json(span) -> list[int]:
    return [span.start_line, span.start_col, span.end_line, span.end_col]


def scan_document(index: ProjectIndex) -> dict:
    """The stable editor-integration document for one scanned tree.

    Deliberately timestamp-free so identical inputs give identical bytes.
    """
    files = []
    for file in index.files:
        folds = fold_ranges(list(file.occurrences))
        files.append(
            {
                "path": file.path,
                "occurrences": [
                    {
                        "anchor": str(occ.anchor),
                        "line": occ.tag_line,
                        "tag_span": _span_json(occ.tag_span),
                        "comment_span": _span_json(occ.comment_span),
                        "hide_whole_comment": occ.hide_whole_comment,
                    }
                    for occ in file.occurrences
                ],
                "referents": [
                    {
                        "kind": ref.kind,
                        "name": ref.name,
                        "start": ref.start_line,
                        "end": ref.end_line,
                        "artifact_path": ref.artifact_path,
                    }
                    for ref in file.referents
                ],
                "fold_ranges": [
                    {"span": _span_json(f.span), "label": f.label, "kind": f.kind}
                    for f in folds
                ],
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
                "warnings": [
                    {"line": w.line, "col": w.col, "message": w.message}
                    for w in file.warnings
                ],
            }
        )
    return {
        "version": SCAN_SCHEMA_VERSION,
        "project": index.project_name,
        "files": files,
        "errors": list(index.errors),
    }


def render_scan_json(index: ProjectIndex) -> str:
    return json.dumps(scan_document(index), indent=2, sort_keys=True) + "\n"


def cmd_serve(args: argparse.Namespace) -> int:
    from sketchlink.server import BindError, serve

    try:
        config = load_config(args.config)
        serve(config)
    except ConfigError as exc:
        return _fail(str(exc))
    except BindError as exc:
        return _fail(str(exc))
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    try:
        index = scan_tree(
            args.root,
            project_name=args.project_name,
            ignore_rules=tuple(args.ignore or ()),
        )
    except ScannerError as exc:
        return _fail(str(exc))
    if args.json:
        sys.stdout.write(render_scan_json(index))
        return EXIT_OK
    total = index.occurrence_count
    print(f"project {index.project_name}: {len(index.files)} files, {total} anchors")
    for file in index.files:
        for occ, ref in zip(file.occurrences, file.referents):
            target = ref.name or ref.artifact_path or "-"
            print(
                f"  {file.path}:{occ.tag_line}  {occ.anchor}  "
                f"-> {ref.kind} {target} [{ref.start_line}-{ref.end_line}]"
            )
        for warning in file.warnings:
            print(f"  {file.path}:{warning.line}  warning: {warning.message}")
    for error in index.errors:
        print(f"  error: {error}")
    return EXIT_OK


def _project_of(config: ServerConfig, file_path: Path) -> str | None:
    resolved = file_path.resolve()
    for name, root in config.projects.items():
        try:
            resolved.relative_to(Path(root).resolve())
        except ValueError:
            continue
        return name
    return None


def _notify_server(config: ServerConfig, project: str) -> None:
    from websockets.sync.client import connect

    with connect(config.ws_url, open_timeout=5) as ws:
        ws.send(json.dumps({"type": "rescan", "request_id": "anchor-add", "project": project}))
        while True:
            reply = json.loads(ws.recv(timeout=30))
            if reply.get("type") == "response":
                if not reply.get("ok"):
                    raise RuntimeError(reply.get("error", {}).get("message", "rescan failed"))
                return


def cmd_anchor_add(args: argparse.Namespace) -> int:
    file_path = Path(args.file)
    profile = profile_for_path(file_path.name)
    if profile is None:
        return _fail(f"no language profile for {file_path.name}")
    try:
        text = file_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(f"cannot read {file_path}: {exc}")
    anchor = new_anchor_id(AnchorKind.SOURCE_CODE)
    try:
        edited, occ = insert_anchor(text, args.line, anchor, profile)
    except (EditError, ValueError) as exc:
        return _fail(str(exc))
    file_path.write_text(edited, encoding="utf-8")
    print(anchor)

    if args.config and Path(args.config).is_file():
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            print(f"warning: {exc}", file=sys.stderr)
            return EXIT_OK
        project = _project_of(config, file_path)
        if project is None:
            print("warning: file is not under a configured project root", file=sys.stderr)
            return EXIT_OK
        try:
            _notify_server(config, project)
            print(f"{config.base_url}/app#link={anchor}")
        except Exception as exc:
            print(f"warning: could not register with server: {exc}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    store_path = Path(args.data_dir) / "links.json"
    if not store_path.is_file():
        return _fail(f"no link store at {store_path}")
    try:
        store = LinkStore.load(store_path)
        index = scan_tree(args.root, project_name=args.project_name)
    except Exception as exc:
        return _fail(str(exc))
    report = verify(store, index, Path(args.data_dir))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        sections = [
            ("dangling source ends", report.dangling_source),
            ("dangling sketch/marker ends", report.dangling_sketch),
            ("orphan anchors", report.orphan_anchors),
            ("stale records", report.stale_records),
        ]
        for title, items in sections:
            print(f"{title}: {len(items)}")
            for item in items:
                print(f"  {item}")
    return EXIT_OK if report.is_empty else EXIT_FINDINGS


def cmd_editor(args: argparse.Namespace) -> int:
    import websockets
    from websockets.sync.client import connect

    url = args.server
    if not url and args.config:
        try:
            url = load_config(args.config).ws_url
        except ConfigError as exc:
            return _fail(str(exc))
    if not url:
        return _fail("no server address: pass --server or --config")

    try:
        ws = connect(url, open_timeout=5)
    except (OSError, websockets.exceptions.WebSocketException) as exc:
        return _fail(f"cannot connect to {url}: {exc}")

    with ws:
        ws.send(
            json.dumps(
                {"type": "register_editor", "request_id": "editor", "project": args.project}
            )
        )
        registered = False
        try:
            while True:
                message = json.loads(ws.recv())
                if message.get("type") == "response" and not registered:
                    if not message.get("ok"):
                        error = message.get("error", {})
                        return _fail(error.get("message", "registration failed"))
                    registered = True
                    print(f"registered as editor for {args.project}", file=sys.stderr)
                    continue
                if message.get("type") == "event" and message.get("event") == "navigate":
                    line = {
                        "path": message["path"],
                        "start": message["start"],
                        "end": message["end"],
                        "kind": message["kind"],
                    }
                    print(json.dumps(line), flush=True)
        except (KeyboardInterrupt, websockets.exceptions.ConnectionClosed):
            pass
    return EXIT_OK


def cmd_export_html(args: argparse.Namespace) -> int:
    from sketchlink.export_html import export_html

    store_path = Path(args.data_dir) / "links.json"
    try:
        store = LinkStore.load(store_path)
        index = scan_tree(args.root, project_name=args.project_name)
        summary = export_html(
            index, store, Path(args.data_dir), Path(args.out), server_url=args.server_url
        )
    except Exception as exc:
        return _fail(str(exc))
    print(f"wrote {summary.pages} pages with {summary.sketch_links} sketch links to {summary.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchlink",
        description="Link sketches and diagrams to source-code artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the sketch/link server")
    p_serve.add_argument("--config", "-c", required=True, help="JSON config file")
    p_serve.set_defaults(func=cmd_serve)

    p_scan = sub.add_parser("scan", help="scan a source tree for anchors")
    p_scan.add_argument("root", help="project root directory")
    p_scan.add_argument("--json", action="store_true", help="emit the editor-integration JSON")
    p_scan.add_argument("--project-name", default=None)
    p_scan.add_argument("--ignore", action="append", help="extra ignore pattern (repeatable)")
    p_scan.set_defaults(func=cmd_scan)

    p_add = sub.add_parser("anchor-add", help="insert a new source anchor into a file")
    p_add.add_argument("file", help="source file to edit")
    p_add.add_argument("line", type=int, help="1-based line the anchor refers to")
    p_add.add_argument("--config", "-c", default=None, help="server config for registration")
    p_add.set_defaults(func=cmd_anchor_add)

    p_verify = sub.add_parser("verify", help="check link integrity against a scan")
    p_verify.add_argument("root", help="project root directory")
    p_verify.add_argument("--data-dir", required=True, help="server data directory")
    p_verify.add_argument("--project-name", default=None)
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_editor = sub.add_parser("editor", help="headless editor client printing navigate events")
    p_editor.add_argument("project", help="project name to register for")
    p_editor.add_argument("--server", default=None, help="ws://host:port/ws")
    p_editor.add_argument("--config", "-c", default=None)
    p_editor.set_defaults(func=cmd_editor)

    p_export = sub.add_parser("export-html", help="generate HTML docs with sketch links")
    p_export.add_argument("root", help="project root directory")
    p_export.add_argument("--data-dir", required=True, help="server data directory")
    p_export.add_argument("--out", required=True, help="output directory")
    p_export.add_argument("--server-url", default=None, help="link to a running server instead of copying files")
    p_export.add_argument("--project-name", default=None)
    p_export.set_defaults(func=cmd_export_html)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
