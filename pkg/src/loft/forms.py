"""Logic-form AST, concrete syntax, and schema type checking.

Concrete syntax: ``name { arg ; arg }`` with the terminal ``all_rows``.
Bare tokens are literals; ``{`` ``}`` ``;`` and ``\\`` inside them are
escaped with a backslash.  Whether a bare token is a column reference or
an object literal is decided by its position in the enclosing function's
signature, so parsing needs the catalog but no table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .catalog import BOOL, CATALOG, HEADER, NUM, OBJECT, ORD, VIEW
from .errors import ArityError, ParseError, TypeCheckError, UnknownFunctionError
from .tables import NUMERIC, Table, normalize_header

_NAME_RE = re.compile(r"^[a-z_][a-z0-9_]*$")
_ORDINAL_RE = re.compile(r"^\d+$")
_ESCAPABLE = "{};\\"


@dataclass(frozen=True)
class AllRows:
    """The whole-table view terminal."""


@dataclass(frozen=True)
class ColumnRef:
    name: str

    def __post_init__(self):
        object.__setattr__(self, "name", normalize_header(self.name))


@dataclass(frozen=True)
class Literal:
    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", str(self.text).strip())


@dataclass(frozen=True)
class Apply:
    name: str
    args: tuple["LogicForm", ...]

    def __post_init__(self):
        sig = CATALOG.get(self.name)
        if sig is None:
            raise UnknownFunctionError(f"unknown function {self.name!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != len(sig.arg_types):
            raise ArityError(
                f"{self.name} takes {len(sig.arg_types)} arguments, got {len(self.args)}"
            )


LogicForm = Union[AllRows, ColumnRef, Literal, Apply]


def escape_token(text: str) -> str:
    return re.sub(r"([{};\\])", r"\\\1", text)


class Scanner:
    """Character scanner shared by the form and template parsers."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def skip_ws(self) -> None:
        while not self.at_end() and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return "" if self.at_end() else self.text[self.pos]

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def read_token(self) -> tuple[str, int]:
        """Read a bare token up to an unescaped delimiter.

        Returns (unescaped trimmed token, offset of its first character).
        """
        self.skip_ws()
        start = self.pos
        out: list[str] = []
        while not self.at_end():
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise ParseError("dangling escape", self.pos)
                nxt = self.text[self.pos + 1]
                if nxt not in _ESCAPABLE:
                    raise ParseError(f"unknown escape \\{nxt}", self.pos)
                out.append(nxt)
                self.pos += 2
                continue
            if ch in "{};":
                break
            out.append(ch)
            self.pos += 1
        return "".join(out).strip(), start


class _FormParser:
    def __init__(self, text: str):
        self.scan = Scanner(text)

    def parse(self) -> LogicForm:
        form = self.parse_form(expected=None)
        self.scan.skip_ws()
        if not self.scan.at_end():
            raise ParseError("trailing input after form", self.scan.pos)
        return form

    def parse_form(self, expected: str | None) -> LogicForm:
        token, offset = self.scan.read_token()
        self.scan.skip_ws()
        if self.scan.peek() == "{":
            return self.parse_apply(token, offset)
        if not token:
            raise ParseError("expected a form", offset)
        return self.leaf(token, expected)

    def parse_apply(self, name: str, offset: int) -> Apply:
        if not _NAME_RE.match(name):
            raise ParseError(f"bad function name {name!r}", offset)
        sig = CATALOG.get(name)
        if sig is None:
            raise UnknownFunctionError(f"unknown function {name!r}", offset)
        self.scan.expect("{")
        args: list[LogicForm] = []
        for i, arg_type in enumerate(sig.arg_types):
            args.append(self.parse_form(arg_type))
            self.scan.skip_ws()
            if i < len(sig.arg_types) - 1:
                if self.scan.peek() != ";":
                    raise ArityError(
                        f"{name} takes {len(sig.arg_types)} arguments", self.scan.pos
                    )
                self.scan.pos += 1
        self.scan.skip_ws()
        if self.scan.peek() == ";":
            raise ArityError(f"{name} takes {len(sig.arg_types)} arguments", self.scan.pos)
        self.scan.expect("}")
        return Apply(name, tuple(args))

    @staticmethod
    def leaf(token: str, expected: str | None) -> LogicForm:
        if expected == HEADER:
            return ColumnRef(token)
        if expected in (VIEW, None) and token == "all_rows":
            return AllRows()
        return Literal(token)


def parse_logic_form(text: str) -> LogicForm:
    """Parse concrete syntax into a form tree.

    Raises ParseError (with offset) on syntax problems, UnknownFunctionError
    on names missing from the catalog, ArityError on argument count.
    """
    return _FormParser(text).parse()


def print_logic_form(lf: LogicForm) -> str:
    """Canonical concrete syntax: single spaces around braces and semicolons."""
    if isinstance(lf, AllRows):
        return "all_rows"
    if isinstance(lf, ColumnRef):
        return escape_token(lf.name)
    if isinstance(lf, Literal):
        return escape_token(lf.text)
    inner = " ; ".join(print_logic_form(a) for a in lf.args)
    return f"{lf.name} {{ {inner} }}"


@dataclass(frozen=True)
class TypedForm:
    form: LogicForm
    result_type: str


def type_check(lf: LogicForm, table: Table, strict: bool = True) -> TypedForm:
    """Check lf against the table schema; returns the form with its result type.

    Depends only on headers and column types, never on row contents.  In
    strict mode, hop directly over all_rows is rejected since it can only
    succeed on single-row tables.
    """
    return TypedForm(lf, _check(lf, table, strict))


def _check(node: LogicForm, table: Table, strict: bool) -> str:
    if isinstance(node, AllRows):
        return VIEW
    if isinstance(node, Literal):
        return OBJECT
    if isinstance(node, ColumnRef):
        raise TypeCheckError("column reference outside a header position")
    sig = CATALOG[node.name]
    if strict and node.name == "hop" and isinstance(node.args[0], AllRows):
        raise TypeCheckError("hop requires a single-row view, not all_rows")
    for arg, arg_type in zip(node.args, sig.arg_types):
        if arg_type == VIEW:
            if isinstance(arg, (Literal, ColumnRef)):
                raise TypeCheckError(f"{node.name}: view argument expected")
            if _check(arg, table, strict) != VIEW:
                raise TypeCheckError(f"{node.name}: view argument expected")
        elif arg_type == HEADER:
            if not isinstance(arg, ColumnRef):
                raise TypeCheckError(f"{node.name}: column name expected")
            idx = table.column_index(arg.name)
            if idx is None:
                raise TypeCheckError(
                    f"unknown column {arg.name!r}", kind="unknown_column"
                )
            if sig.numeric_column and table.column_types[idx] != NUMERIC:
                raise TypeCheckError(
                    f"{node.name} needs a numeric column, {arg.name!r} is not"
                )
        elif arg_type == OBJECT:
            if isinstance(arg, Literal):
                continue
            if isinstance(arg, (AllRows, ColumnRef)):
                raise TypeCheckError(f"{node.name}: object argument expected")
            if _check(arg, table, strict) not in (NUM, OBJECT):
                raise TypeCheckError(f"{node.name}: object argument expected")
        elif arg_type == ORD:
            if not isinstance(arg, Literal):
                raise TypeCheckError(
                    f"{node.name}: ordinal literal expected", kind="bad_ordinal"
                )
            if not _ORDINAL_RE.match(arg.text) or int(arg.text) < 1:
                raise TypeCheckError(
                    f"{node.name}: ordinal must be a positive integer, got {arg.text!r}",
                    kind="bad_ordinal",
                )
        elif arg_type == BOOL:
            if not isinstance(arg, Apply) or _check(arg, table, strict) != BOOL:
                raise TypeCheckError(f"{node.name}: boolean argument expected")
        else:  # pragma: no cover - catalog uses no other tags
            raise TypeCheckError(f"unhandled argument type {arg_type!r}")
    return sig.return_type


def walk(lf: LogicForm):
    """Yield every node in printing order (pre-order, args left to right)."""
    yield lf
    if isinstance(lf, Apply):
        for arg in lf.args:
            yield from walk(arg)


def referenced_columns(lf: LogicForm) -> list[str]:
    """Column names referenced anywhere in the form, in first-seen order."""
    out: list[str] = []
    for node in walk(lf):
        if isinstance(node, ColumnRef) and node.name not in out:
            out.append(node.name)
    return out
