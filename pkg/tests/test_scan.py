from __future__ import annotations

import textwrap
from random import Random

from sketchlink.anchors import AnchorKind, new_anchor_id
from sketchlink.scanner import (
    FOLD_ICON,
    JAVA_PROFILE,
    fold_ranges,
    resolve_referent,
    scan_file,
    scan_source,
)

RNG = Random(41)
A1 = new_anchor_id(AnchorKind.SOURCE_CODE, RNG)
A2 = new_anchor_id(AnchorKind.SOURCE_CODE, RNG)
SKETCH = new_anchor_id(AnchorKind.SKETCH, RNG)


def test_tag_only_doc_comment_above_method():
    src = textwrap.dedent(
        f"""\
        class A {{
            /** @sketchlink {A1} */
            public int f() {{
                return 1;
            }}
        }}
        """
    )
    occs = scan_file(src, "A.java", JAVA_PROFILE)
    assert len(occs) == 1
    occ = occs[0]
    assert occ.anchor == A1
    assert occ.tag_line == 2
    assert occ.hide_whole_comment is True
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.name, ref.start_line, ref.end_line) == ("method", "f", 3, 5)
    assert ref.artifact_path == "A.f"


def test_empty_file_and_plain_comment():
    assert scan_file("", "x.java", JAVA_PROFILE) == []
    assert scan_file("// plain comment\n", "x.java", JAVA_PROFILE) == []


def test_tag_outside_comment_is_ignored():
    src = f'String s = "@sketchlink {A1}";\n'
    assert scan_file(src, "x.java", JAVA_PROFILE) == []


def test_malformed_ids_warn_but_do_not_occur():
    src = textwrap.dedent(
        f"""\
        /** @sketchlink not-an-anchor */
        class A {{}}
        /** @sketchlink {SKETCH} */
        class B {{}}
        /** @sketchlink */
        class C {{}}
        """
    )
    result = scan_source(src, "x.java", JAVA_PROFILE)
    assert result.occurrences == ()
    assert len(result.warnings) == 3
    assert "invalid anchor id" in result.warnings[0].message
    assert "source-code" in result.warnings[1].message
    assert "missing its anchor id" in result.warnings[2].message


def test_statement_on_same_line_wins():
    src = f"class A {{\n    int x = 1; /* @sketchlink {A1} */\n}}\n"
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.start_line, ref.end_line) == ("statement-line", 2, 2)


def test_comment_before_code_on_same_line():
    src = f"class A {{\n    /* @sketchlink {A1} */ int x = 1;\n}}\n"
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.start_line) == ("statement-line", 2)


def test_blank_lines_tolerated_before_declaration():
    src = textwrap.dedent(
        f"""\
        /** @sketchlink {A1} */


        class Gap {{
            int x;
        }}
        """
    )
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.name, ref.start_line, ref.end_line) == ("class", "Gap", 4, 6)


def test_intervening_comment_is_skipped():
    src = textwrap.dedent(
        f"""\
        /** @sketchlink {A1} */
        // unrelated note
        class After {{}}
        """
    )
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.name) == ("class", "After")


def test_non_declaration_statement_becomes_referent():
    src = textwrap.dedent(
        f"""\
        class A {{
            void f() {{
                // @sketchlink {A1}
                doWork();
            }}
        }}
        """
    )
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.start_line, ref.end_line) == ("statement-line", 4, 4)


def test_trailing_comment_at_eof_refers_to_file():
    src = f"class A {{\n}}\n// @sketchlink {A1}\n"
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.start_line, ref.end_line) == ("file", 1, 3)


def test_annotation_between_comment_and_signature():
    src = textwrap.dedent(
        f"""\
        class A {{
            @Deprecated
            /** @sketchlink {A1} */
            void legacy() {{
            }}
        }}
        """
    )
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    ref = resolve_referent(src, occ, JAVA_PROFILE)
    assert (ref.kind, ref.name) == ("method", "legacy")


def test_multiple_tags_same_comment_share_referent():
    src = textwrap.dedent(
        f"""\
        /**
         * @sketchlink {A1}
         * @sketchlink {A2}
         */
        class Shared {{}}
        """
    )
    occs = scan_file(src, "x.java", JAVA_PROFILE)
    assert [o.anchor for o in occs] == [A1, A2]
    refs = [resolve_referent(src, o, JAVA_PROFILE) for o in occs]
    assert refs[0] == refs[1]
    assert refs[0].kind == "class"
    assert all(o.hide_whole_comment for o in occs)


def test_prose_comment_does_not_hide():
    src = f"/** Explains things. @sketchlink {A1} */\nclass A {{}}\n"
    occ = scan_file(src, "x.java", JAVA_PROFILE)[0]
    assert occ.hide_whole_comment is False


def test_fold_ranges_tag_only_comment():
    src = f"class A {{\n    /** @sketchlink {A1} */\n    void f() {{}}\n}}\n"
    occs = scan_file(src, "A.java", JAVA_PROFILE)
    folds = fold_ranges(occs)
    assert [f.kind for f in folds] == ["comment", "tag"]
    comment, tag = folds
    assert comment.span.contains(tag.span)
    assert comment.label == FOLD_ICON
    # tag fold covers exactly "@sketchlink <id>"
    line = src.splitlines()[1]
    assert line[tag.span.start_col : tag.span.end_col] == f"@sketchlink {A1}"


def test_fold_ranges_prose_comment_tag_only_fold():
    src = f"/** Keep me. @sketchlink {A1} */\nclass A {{}}\n"
    occs = scan_file(src, "A.java", JAVA_PROFILE)
    folds = fold_ranges(occs)
    assert [f.kind for f in folds] == ["tag"]


def test_fold_ranges_empty():
    assert fold_ranges([]) == []


def test_scan_is_deterministic():
    src = f"/** @sketchlink {A1} */\nclass A {{}}\n"
    first = scan_source(src, "x.java", JAVA_PROFILE)
    second = scan_source(src, "x.java", JAVA_PROFILE)
    assert first == second
