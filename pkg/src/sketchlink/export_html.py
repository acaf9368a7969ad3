"""Static HTML documentation with sketch hyperlinks.

One page per scanned source file showing its declaration outline; every
anchored declaration links to the sketches it is linked with. Statement and
whole-file anchors are grouped in a per-file "Other links" section. An index
page lists all sketches.
"""

from __future__ import annotations

import html
import posixpath
import shutil
from dataclasses import dataclass
from pathlib import Path

from sketchlink.anchors import AnchorId, AnchorKind
from sketchlink.links import LinkStore
from sketchlink.scanner import ProjectIndex, Referent
from sketchlink.sketches import (
    IMAGE_DIR,
    SKETCH_DIR,
    SketchDocument,
    load_all_sketches,
)

DECLARATION_KINDS = frozenset({"class", "interface", "enum", "method", "constructor", "field"})

_PAGE_STYLE = """
body { font-family: sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
h1 { font-size: 1.3em; } h2 { font-size: 1.1em; margin-top: 1.5em; }
ul.outline { list-style: none; padding-left: 0; }
ul.outline li { margin: 0.15em 0; }
.kind { color: #888; font-size: 0.85em; margin-right: 0.5em; }
.lines { color: #aaa; font-size: 0.8em; margin-left: 0.5em; }
a.sketch-link { margin-left: 0.75em; color: #0a62c9; }
.empty { color: #999; font-style: italic; }
"""


@dataclass(frozen=True)
class ExportSummary:
    pages: int
    sketch_links: int
    out_dir: Path


def _page(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(title)}</title><style>{_PAGE_STYLE}</style></head>\n"
        f"<body>\n{body}\n</body></html>\n"
    )


class _SketchResolver:
    """Maps any sketch/marker anchor to its sketch document and target URL."""

    def __init__(
        self,
        docs: list[SketchDocument],
        server_url: str | None,
    ):
        self.server_url = server_url.rstrip("/") if server_url else None
        self.by_anchor: dict[AnchorId, SketchDocument] = {}
        for doc in docs:
            self.by_anchor[doc.anchor] = doc
            for marker in doc.markers:
                self.by_anchor[marker.anchor] = doc

    def resolve(self, anchor: AnchorId) -> SketchDocument | None:
        return self.by_anchor.get(anchor)

    def href(self, doc: SketchDocument, page_dir: str) -> str:
        if self.server_url:
            return f"{self.server_url}/sketch/{doc.anchor}.svg"
        rel = posixpath.relpath(f"{SKETCH_DIR}/{doc.anchor.uuid}.svg", page_dir)
        return rel

    def label(self, target: AnchorId, doc: SketchDocument) -> str:
        base = doc.annotation or str(doc.anchor)
        if target.kind is AnchorKind.MARKER:
            marker = doc.marker(target)
            if marker and marker.annotation:
                return f"{marker.annotation} ({base})"
            return f"marker in {base}"
        return base


def _sketch_links_html(
    views, resolver: _SketchResolver, page_dir: str
) -> tuple[str, int]:
    parts = []
    for view in views:
        peer = view.peer
        if peer.kind is AnchorKind.SOURCE_CODE:
            continue
        doc = resolver.resolve(peer)
        if doc is None:
            continue
        href = resolver.href(doc, page_dir)
        label = resolver.label(peer, doc)
        parts.append(f'<a class="sketch-link" href="{html.escape(href, quote=True)}">{html.escape(label)}</a>')
    return "".join(parts), len(parts)


def _outline_depth(decl: Referent, all_decls: tuple[Referent, ...]) -> int:
    return sum(
        1
        for other in all_decls
        if other is not decl
        and other.start_line <= decl.start_line
        and decl.end_line <= other.end_line
    )


def export_html(
    index: ProjectIndex,
    store: LinkStore,
    repo_dir: Path,
    out_dir: Path,
    server_url: str | None = None,
) -> ExportSummary:
    """Generate the static site; copies SVGs/images unless server_url is set."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    docs = load_all_sketches(repo_dir)
    resolver = _SketchResolver(docs, server_url)

    if not server_url:
        for sub in (SKETCH_DIR, IMAGE_DIR):
            source = Path(repo_dir) / sub
            if source.is_dir():
                shutil.copytree(source, out / sub, dirs_exist_ok=True)

    pages = 0
    total_links = 0
    file_entries = []

    for file in index.files:
        page_rel = f"files/{file.path}.html"
        page_dir = posixpath.dirname(page_rel)
        anchors_by_referent: dict[Referent, list] = {}
        other_sections = []

        for occ, ref in zip(file.occurrences, file.referents):
            views = store.links_of(occ.anchor)
            if ref.kind in DECLARATION_KINDS:
                anchors_by_referent.setdefault(ref, []).extend(views)
            else:
                links_html, n = _sketch_links_html(views, resolver, page_dir)
                total_links += n
                where = f"line {ref.start_line}" if ref.kind == "statement-line" else "whole file"
                if links_html:
                    other_sections.append(
                        f"<li><span class=\"kind\">{html.escape(ref.kind)}</span>"
                        f"{html.escape(where)}{links_html}</li>"
                    )

        outline_items = []
        for decl in file.declarations:
            depth = _outline_depth(decl, file.declarations)
            indent = "&nbsp;" * 4 * depth
            links_html, n = _sketch_links_html(
                anchors_by_referent.get(decl, []), resolver, page_dir
            )
            total_links += n
            outline_items.append(
                f"<li>{indent}<span class=\"kind\">{html.escape(decl.kind)}</span>"
                f"<strong>{html.escape(decl.name)}</strong>"
                f"<span class=\"lines\">{decl.start_line}&ndash;{decl.end_line}</span>"
                f"{links_html}</li>"
            )

        body = [f"<h1>{html.escape(file.path)}</h1>"]
        body.append("<h2>Declarations</h2>")
        if outline_items:
            body.append("<ul class=\"outline\">" + "\n".join(outline_items) + "</ul>")
        else:
            body.append("<p class=\"empty\">No declarations detected.</p>")
        if other_sections:
            body.append("<h2>Other links</h2>")
            body.append("<ul class=\"outline\">" + "\n".join(other_sections) + "</ul>")
        body.append(f'<p><a href="{"../" * (page_rel.count("/"))}index.html">Index</a></p>')

        target = out / page_rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(_page(file.path, "\n".join(body)), encoding="utf-8")
        pages += 1
        file_entries.append(page_rel)

    index_body = [f"<h1>{html.escape(index.project_name)}</h1>"]
    index_body.append("<h2>Sketches</h2>")
    if docs:
        rows = []
        for doc in sorted(docs, key=lambda d: (d.modified, str(d.anchor)), reverse=True):
            href = resolver.href(doc, "")
            title = doc.annotation or str(doc.anchor)
            authors = ", ".join(doc.authors)
            rows.append(
                f'<li><a class="sketch-link" href="{html.escape(href, quote=True)}">'
                f"{html.escape(title)}</a>"
                + (f" <span class=\"kind\">{html.escape(authors)}</span>" if authors else "")
                + f"<span class=\"lines\">{doc.modified.isoformat()}</span></li>"
            )
        index_body.append("<ul class=\"outline\">" + "\n".join(rows) + "</ul>")
    else:
        index_body.append("<p class=\"empty\">No sketches stored.</p>")
    index_body.append("<h2>Files</h2>")
    index_body.append(
        "<ul class=\"outline\">"
        + "\n".join(
            f'<li><a href="{html.escape(rel, quote=True)}">{html.escape(rel[len("files/"):-len(".html")])}</a></li>'
            for rel in file_entries
        )
        + "</ul>"
    )
    (out / "index.html").write_text(
        _page(index.project_name, "\n".join(index_body)), encoding="utf-8"
    )

    return ExportSummary(pages=pages + 1, sketch_links=total_links, out_dir=out)
