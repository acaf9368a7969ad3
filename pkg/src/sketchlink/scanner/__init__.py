"""Source scanning: anchor tags in comments, referents, folds, and edits."""

from sketchlink.scanner.comments import Comment, Segmented, TextSpan, segment
from sketchlink.scanner.declarations import Referent, parse_declarations
from sketchlink.scanner.edits import (
    AnchorNotFound,
    DuplicateAnchor,
    EditError,
    LineOutOfRange,
    insert_anchor,
    remove_anchor,
)
from sketchlink.scanner.profiles import (
    GENERIC_PROFILE,
    JAVA_PROFILE,
    PROFILES,
    LanguageProfile,
    profile_by_name,
    profile_for_path,
)
from sketchlink.scanner.scan import (
    FOLD_ICON,
    TAG_KEYWORD,
    EncodingError,
    ScannerError,
    FileScan,
    FoldRange,
    ProjectIndex,
    RootMissing,
    ScanResult,
    ScanWarning,
    SourceAnchorOccurrence,
    fold_ranges,
    resolve_referent,
    scan_file,
    scan_source,
    scan_tree,
)

__all__ = [
    "AnchorNotFound",
    "Comment",
    "DuplicateAnchor",
    "EditError",
    "EncodingError",
    "FileScan",
    "FoldRange",
    "FOLD_ICON",
    "GENERIC_PROFILE",
    "JAVA_PROFILE",
    "LanguageProfile",
    "LineOutOfRange",
    "PROFILES",
    "ProjectIndex",
    "Referent",
    "RootMissing",
    "ScannerError",
    "ScanResult",
    "ScanWarning",
    "Segmented",
    "SourceAnchorOccurrence",
    "TAG_KEYWORD",
    "TextSpan",
    "fold_ranges",
    "insert_anchor",
    "parse_declarations",
    "profile_by_name",
    "profile_for_path",
    "remove_anchor",
    "resolve_referent",
    "scan_file",
    "scan_source",
    "scan_tree",
    "segment",
]
