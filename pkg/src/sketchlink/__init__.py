"""SketchLink: link sketches and diagrams to source-code artifacts."""

from sketchlink.anchors import AnchorId, AnchorKind, format_anchor_id, new_anchor_id, parse_anchor_id

__version__ = "0.1.0"

__all__ = [
    "AnchorId",
    "AnchorKind",
    "format_anchor_id",
    "new_anchor_id",
    "parse_anchor_id",
    "__version__",
]
