"""Parsing, printing, escaping, and schema type checking of logic forms."""

import pytest

from loft import (
    AllRows,
    Apply,
    ArityError,
    ColumnRef,
    Literal,
    ParseError,
    TypeCheckError,
    UnknownFunctionError,
    parse_logic_form,
    print_logic_form,
    type_check,
)
from loft.catalog import BOOL, NUM, OBJECT, VIEW
from loft.forms import escape_token, referenced_columns, walk

EXAMPLE = "eq { count { filter_eq { all_rows ; team ; a } } ; 1 }"


class TestParsing:
    def test_example_structure(self):
        lf = parse_logic_form(EXAMPLE)
        assert lf == Apply(
            "eq",
            (
                Apply("count", (Apply("filter_eq", (AllRows(), ColumnRef("team"), Literal("a"))),)),
                Literal("1"),
            ),
        )

    def test_print_parse_identity(self):
        lf = parse_logic_form(EXAMPLE)
        assert print_logic_form(lf) == EXAMPLE
        assert parse_logic_form(print_logic_form(lf)) == lf

    def test_compact_input_canonicalizes(self):
        lf = parse_logic_form("eq{count{filter_eq{all_rows;team;a}};1}")
        assert print_logic_form(lf) == EXAMPLE

    def test_whitespace_tolerance(self):
        lf = parse_logic_form("  eq {\n  count { filter_eq { all_rows ;\tteam ; a } } ; 1 }  ")
        assert print_logic_form(lf) == EXAMPLE

    def test_unknown_function(self):
        with pytest.raises(UnknownFunctionError):
            parse_logic_form("frobnicate { all_rows }")

    def test_too_few_arguments(self):
        with pytest.raises(ArityError):
            parse_logic_form("filter_eq { all_rows ; team }")

    def test_too_many_arguments(self):
        with pytest.raises(ArityError):
            parse_logic_form("count { all_rows ; team }")

    def test_parse_error_carries_offset(self):
        with pytest.raises(ParseError) as exc_info:
            parse_logic_form("count { all_rows ")
        assert exc_info.value.offset is not None

    def test_trailing_input_rejected(self):
        with pytest.raises(ParseError):
            parse_logic_form("count { all_rows } junk")

    def test_empty_argument_rejected(self):
        with pytest.raises(ParseError, match="expected a form"):
            parse_logic_form("count {  }")

    def test_bare_token_is_positional(self):
        # the same token reads as a column in header position and as a
        # literal in object position
        lf = parse_logic_form("filter_eq { all_rows ; 3 ; all_rows }")
        assert lf.args[1] == ColumnRef("3")
        assert lf.args[2] == Literal("all_rows")

    def test_all_rows_outside_view_position_is_literal(self):
        lf = parse_logic_form("eq { all_rows ; x }")
        assert lf.args[0] == Literal("all_rows")

    def test_root_bare_all_rows(self):
        assert parse_logic_form("all_rows") == AllRows()


class TestEscaping:
    def test_escape_round_trip(self):
        lf = Apply("eq", (Literal("a;b"), Literal("c{d}")))
        text = print_logic_form(lf)
        assert text == "eq { a\\;b ; c\\{d\\} }"
        assert parse_logic_form(text) == lf

    def test_backslash_round_trip(self):
        lf = Apply("eq", (Literal("a\\b"), Literal("x")))
        assert parse_logic_form(print_logic_form(lf)) == lf

    def test_dangling_escape(self):
        with pytest.raises(ParseError):
            parse_logic_form("eq { a ; b\\")

    def test_unknown_escape(self):
        with pytest.raises(ParseError):
            parse_logic_form("eq { a ; \\n }")

    def test_escape_token_only_touches_delimiters(self):
        assert escape_token("plain text 5%") == "plain text 5%"


class TestTypeCheck:
    def test_example_is_boolean(self, mt):
        lf = parse_logic_form(EXAMPLE)
        assert type_check(lf, mt).result_type == BOOL

    def test_view_and_number_roots(self, mt):
        assert type_check(parse_logic_form("filter_eq { all_rows ; team ; a }"), mt).result_type == VIEW
        assert type_check(parse_logic_form("count { all_rows }"), mt).result_type == NUM
        assert type_check(parse_logic_form("hop { argmax { all_rows ; points } ; team }"), mt).result_type == OBJECT

    def test_unknown_column_kind(self, mt):
        lf = parse_logic_form("count { filter_eq { all_rows ; venue ; a } }")
        with pytest.raises(TypeCheckError) as exc_info:
            type_check(lf, mt)
        assert exc_info.value.kind == "unknown_column"

    def test_aggregation_needs_numeric_column(self, mt):
        with pytest.raises(TypeCheckError):
            type_check(parse_logic_form("avg { all_rows ; team }"), mt)
        assert type_check(parse_logic_form("avg { all_rows ; points }"), mt).result_type == NUM

    @pytest.mark.parametrize("rank", ["0", "2.5", "x", "-1"])
    def test_bad_ordinals(self, mt, rank):
        lf = parse_logic_form(f"nth_max {{ all_rows ; points ; {rank} }}")
        with pytest.raises(TypeCheckError) as exc_info:
            type_check(lf, mt)
        assert exc_info.value.kind == "bad_ordinal"

    def test_ordinal_out_of_range_still_type_checks(self, mt):
        # rank bounds are a runtime property, not a schema property
        lf = parse_logic_form("nth_max { all_rows ; points ; 99 }")
        assert type_check(lf, mt).result_type == NUM

    def test_strict_rejects_hop_over_all_rows(self, mt):
        lf = parse_logic_form("hop { all_rows ; team }")
        with pytest.raises(TypeCheckError):
            type_check(lf, mt)
        assert type_check(lf, mt, strict=False).result_type == OBJECT

    def test_strict_allows_hop_over_filters(self, mt):
        lf = parse_logic_form("hop { filter_eq { all_rows ; team ; a } ; points }")
        assert type_check(lf, mt).result_type == OBJECT

    def test_boolean_argument_must_be_boolean(self, mt):
        lf = Apply("and", (Apply("count", (AllRows(),)), Apply("only", (AllRows(),))))
        with pytest.raises(TypeCheckError):
            type_check(lf, mt)

    def test_view_argument_must_be_view(self, mt):
        lf = Apply("count", (Literal("x"),))
        with pytest.raises(TypeCheckError):
            type_check(lf, mt)

    def test_object_argument_rejects_views(self, mt):
        lf = Apply("eq", (AllRows(), Literal("x")))
        with pytest.raises(TypeCheckError):
            type_check(lf, mt)

    def test_ignores_row_contents(self, mt):
        from loft import Table

        same_schema = Table.from_strings(
            "other", "other", ["team", "points"], [["z", "9"]] * 2
        )
        lf = parse_logic_form(EXAMPLE)
        assert type_check(lf, same_schema).result_type == BOOL


class TestTreeHelpers:
    def test_walk_is_preorder(self):
        lf = parse_logic_form(EXAMPLE)
        kinds = [type(node).__name__ for node in walk(lf)]
        assert kinds == ["Apply", "Apply", "Apply", "AllRows", "ColumnRef", "Literal", "Literal"]

    def test_referenced_columns_first_seen(self):
        lf = parse_logic_form(
            "and { only { filter_eq { all_rows ; pos ; 1 } } ;"
            " eq { hop { argmax { all_rows ; points } ; pos } ; 1 } }"
        )
        assert referenced_columns(lf) == ["pos", "points"]

    def test_arity_enforced_at_construction(self):
        with pytest.raises(ArityError):
            Apply("count", (AllRows(), AllRows()))
        with pytest.raises(UnknownFunctionError):
            Apply("nope", ())
