"""SPARQL subset parser and serializer.

Covers exactly what the endpoint serves: SELECT [DISTINCT] over a group of
triple patterns, FILTERs, and non-nested SERVICE blocks.  Expressions support
comparison/additive arithmetic, &&, BOUND/REGEX/STR/YEAR and IRI casts, plus
an argument-tuple object form for magic predicates like geo "nearby".
Anything else fails with a clear unsupported-feature error.

Serialization emits absolute IRIs and re-parses to a structurally equal AST.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .rdf import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    Iri,
    Literal,
    escape_string,
    unescape_string,
)


class SparqlSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        if line > 0:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnsupportedFeatureError(SparqlSyntaxError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class TermTuple:
    """Parenthesized argument list in object position, e.g. (?lat ?long "50mi")."""

    items: tuple


@dataclass(frozen=True)
class TriplePattern:
    subject: object
    predicate: object
    object: object

    def variables(self) -> set[str]:
        out: set[str] = set()
        for part in (self.subject, self.predicate, self.object):
            if isinstance(part, Var):
                out.add(part.name)
            elif isinstance(part, TermTuple):
                out.update(i.name for i in part.items if isinstance(i, Var))
        return out


@dataclass(frozen=True)
class BinaryOp:
    op: str  # one of > < = + - &&
    left: object
    right: object


@dataclass(frozen=True)
class FuncCall:
    name: str  # BOUND / REGEX / STR / YEAR, or a cast IRI
    args: tuple


@dataclass(frozen=True)
class Filter:
    expr: object

    def variables(self) -> set[str]:
        return expr_variables(self.expr)


@dataclass(frozen=True)
class Service:
    endpoint: Iri
    body: tuple  # TriplePattern | Filter, in written order


@dataclass(frozen=True)
class SelectQuery:
    prefixes: tuple[tuple[str, str], ...]
    distinct: bool
    projection: tuple[Var, ...]
    body: tuple  # TriplePattern | Filter | Service, in written order

    def services(self) -> list[Service]:
        return [e for e in self.body if isinstance(e, Service)]


def expr_variables(expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, BinaryOp):
        return expr_variables(expr.left) | expr_variables(expr.right)
    if isinstance(expr, FuncCall):
        out: set[str] = set()
        for arg in expr.args:
            out |= expr_variables(arg)
        return out
    return set()


# ---------------------------------------------------------------------------
# Lexer

_KEYWORDS = {"prefix", "select", "distinct", "where", "filter", "service", "a"}
_UNSUPPORTED_KEYWORDS = {
    "optional", "union", "order", "limit", "offset", "graph", "minus", "values",
    "construct", "ask", "describe", "insert", "delete", "bind", "group", "having",
}
_BUILTINS = {"bound": "BOUND", "regex": "REGEX", "str": "STR", "year": "YEAR"}

_TOKEN_RES = [
    ("IRIREF", re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")),
    ("VAR", re.compile(r"[?$]([A-Za-z_][A-Za-z0-9_]*)")),
    ("STRING", re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')),
    ("LANGTAG", re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")),
    ("NUMBER", re.compile(r"(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?")),
    ("DTYPE", re.compile(r"\^\^")),
    ("AND", re.compile(r"&&")),
    ("PNAME", re.compile(r"([A-Za-z][A-Za-z0-9_-]*)?:"
                         r"([A-Za-z0-9_][A-Za-z0-9_.-]*[A-Za-z0-9_-]|[A-Za-z0-9_])?")),
    ("WORD", re.compile(r"[A-Za-z_][A-Za-z0-9_]*")),
    ("PUNCT", re.compile(r"[{}();,.<>=+\-*]")),
]


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    extra: str | None
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    line_start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        column = i - line_start + 1
        for kind, regex in _TOKEN_RES:
            m = regex.match(text, i)
            if not m:
                continue
            if kind == "IRIREF":
                tokens.append(Token("IRIREF", m.group(1), None, line, column))
            elif kind == "VAR":
                tokens.append(Token("VAR", m.group(1), None, line, column))
            elif kind == "STRING":
                tokens.append(Token("STRING", unescape_string(m.group(1)), None, line, column))
            elif kind == "LANGTAG":
                tokens.append(Token("LANGTAG", m.group(1), None, line, column))
            elif kind == "PNAME":
                tokens.append(Token("PNAME", m.group(1) or "", m.group(2) or "", line, column))
            elif kind == "WORD":
                tokens.append(Token("WORD", m.group(0), None, line, column))
            elif kind == "NUMBER":
                tokens.append(Token("NUMBER", m.group(0), None, line, column))
            elif kind == "AND":
                tokens.append(Token("AND", "&&", None, line, column))
            elif kind == "DTYPE":
                tokens.append(Token("DTYPE", "^^", None, line, column))
            else:
                tokens.append(Token("PUNCT", m.group(0), None, line, column))
            i = m.end()
            break
        else:
            raise SparqlSyntaxError(f"unexpected character {ch!r}", line, column)
    tokens.append(Token("EOF", "", None, line, n - line_start + 1))
    return tokens


def _number_datatype(lexical: str) -> str:
    if re.fullmatch(r"[+-]?\d+", lexical):
        return XSD_INTEGER
    if re.fullmatch(r"[+-]?(?:\d+\.\d+|\.\d+)", lexical):
        return XSD_DECIMAL
    return XSD_DOUBLE


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise SparqlSyntaxError(message, tok.line, tok.column)

    def unsupported(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise UnsupportedFeatureError(message, tok.line, tok.column)

    def expect_punct(self, value: str) -> Token:
        tok = self.peek()
        if tok.kind != "PUNCT" or tok.value != value:
            self.error(f"expected {value!r}, got {tok.value!r}")
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == value

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.value.lower() == word

    def take_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.next()
            return True
        return False

    def check_unsupported_keyword(self):
        tok = self.peek()
        if tok.kind == "WORD" and tok.value.lower() in _UNSUPPORTED_KEYWORDS:
            self.unsupported(f"{tok.value.upper()} is not supported", tok)

    # -- entry point --------------------------------------------------------

    def parse(self) -> SelectQuery:
        while self.at_keyword("prefix"):
            self.next()
            name_tok = self.peek()
            if name_tok.kind != "PNAME" or name_tok.extra:
                self.error("expected 'name:' after PREFIX")
            self.next()
            iri_tok = self.peek()
            if iri_tok.kind != "IRIREF":
                self.error("expected <iri> in PREFIX declaration")
            self.next()
            self.prefixes[name_tok.value] = iri_tok.value
        self.check_unsupported_keyword()
        if not self.take_keyword("select"):
            self.error("expected SELECT")
        distinct = self.take_keyword("distinct")
        projection: list[Var] = []
        while self.peek().kind == "VAR":
            projection.append(Var(self.next().value))
        if self.at_punct("*"):
            self.unsupported("SELECT * is not supported; list the variables")
        if not projection:
            self.error("SELECT needs at least one variable")
        self.take_keyword("where")
        body = self.parse_group(in_service=False)
        self.check_unsupported_keyword()
        tok = self.peek()
        if tok.kind != "EOF":
            self.error(f"unexpected content after query: {tok.value!r}", tok)
        return SelectQuery(tuple(self.prefixes.items()), distinct,
                           tuple(projection), tuple(body))

    # -- groups -------------------------------------------------------------

    def parse_group(self, in_service: bool) -> list:
        self.expect_punct("{")
        elements: list = []
        while not self.at_punct("}"):
            self.check_unsupported_keyword()
            if self.at_keyword("filter"):
                self.next()
                elements.append(Filter(self.parse_constraint()))
            elif self.at_keyword("service"):
                tok = self.next()
                if in_service:
                    self.unsupported("nested SERVICE blocks are not supported", tok)
                endpoint = self.parse_iri_term()
                inner = self.parse_group(in_service=True)
                elements.append(Service(endpoint, tuple(inner)))
            elif self.peek().kind == "EOF":
                self.error("unexpected end of query inside group")
            else:
                elements.extend(self.parse_triples_same_subject())
                # '.' is optional before FILTER / SERVICE / '}' (as engines allow)
                if self.at_punct("."):
                    self.next()
        self.expect_punct("}")
        return elements

    def parse_triples_same_subject(self) -> list[TriplePattern]:
        subject = self.parse_term(position="subject")
        patterns: list[TriplePattern] = []
        while True:
            verb = self.parse_verb()
            while True:
                obj = self.parse_term(position="object")
                patterns.append(TriplePattern(subject, verb, obj))
                if self.at_punct(","):
                    self.next()
                    continue
                break
            if self.at_punct(";"):
                self.next()
                if self.at_punct(".") or self.at_punct("}") or self.at_punct(";"):
                    break  # trailing semicolon
                if self.peek().kind == "WORD" and not self.at_keyword("a"):
                    break
                continue
            break
        return patterns

    def parse_verb(self):
        if self.at_keyword("a"):
            self.next()
            return Iri(RDF_TYPE)
        tok = self.peek()
        if tok.kind == "VAR":
            return Var(self.next().value)
        return self.parse_iri_term()

    def parse_iri_term(self) -> Iri:
        tok = self.peek()
        if tok.kind == "IRIREF":
            self.next()
            return Iri(tok.value)
        if tok.kind == "PNAME":
            self.next()
            return Iri(self.resolve_pname(tok))
        self.error(f"expected an IRI, got {tok.value!r}")

    def resolve_pname(self, tok: Token) -> str:
        if tok.value not in self.prefixes:
            self.error(f"unknown prefix {tok.value!r}", tok)
        return self.prefixes[tok.value] + (tok.extra or "")

    def parse_term(self, position: str):
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return Var(tok.value)
        if tok.kind == "IRIREF" or tok.kind == "PNAME":
            return self.parse_iri_term()
        if position == "object":
            if tok.kind == "STRING":
                return self.parse_literal()
            if tok.kind == "NUMBER":
                self.next()
                return Literal(tok.value, datatype=_number_datatype(tok.value))
            if self.at_punct("-"):
                save = self.pos
                self.next()
                num = self.peek()
                if num.kind == "NUMBER":
                    self.next()
                    return Literal("-" + num.value, datatype=_number_datatype(num.value))
                self.pos = save
            if self.at_punct("("):
                return self.parse_term_tuple()
            if tok.kind == "WORD" and tok.value in ("true", "false"):
                self.next()
                return Literal(tok.value, datatype=XSD_BOOLEAN)
        self.error(f"expected a {position} term, got {tok.value!r}")

    def parse_term_tuple(self) -> TermTuple:
        self.expect_punct("(")
        items: list = []
        while not self.at_punct(")"):
            if self.peek().kind == "EOF":
                self.error("unterminated argument list")
            items.append(self.parse_term(position="object"))
        self.expect_punct(")")
        return TermTuple(tuple(items))

    def parse_literal(self) -> Literal:
        tok = self.next()
        lexical = tok.value
        after = self.peek()
        if after.kind == "LANGTAG":
            self.next()
            return Literal(lexical, language=after.value)
        if after.kind == "DTYPE":
            self.next()
            return Literal(lexical, datatype=self.parse_iri_term().value)
        return Literal(lexical)

    # -- expressions --------------------------------------------------------

    def parse_constraint(self):
        if self.at_punct("("):
            self.next()
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        tok = self.peek()
        if tok.kind in ("WORD", "PNAME", "IRIREF"):
            return self.parse_primary()
        self.error("expected '(' or a function call after FILTER")

    def parse_expr(self):
        return self.parse_and()

    def parse_and(self):
        left = self.parse_relational()
        while self.peek().kind == "AND":
            self.next()
            right = self.parse_relational()
            left = BinaryOp("&&", left, right)
        return left

    def parse_relational(self):
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value in (">", "<", "="):
            self.next()
            if self.at_punct("="):  # reject >=, <=, == explicitly
                self.unsupported(f"operator {tok.value}= is not supported", tok)
            right = self.parse_additive()
            return BinaryOp(tok.value, left, right)
        return left

    def parse_additive(self):
        left = self.parse_primary()
        while True:
            tok = self.peek()
            if tok.kind == "PUNCT" and tok.value in ("+", "-"):
                self.next()
                right = self.parse_primary()
                left = BinaryOp(tok.value, left, right)
            else:
                return left

    def parse_primary(self):
        tok = self.peek()
        if self.at_punct("("):
            self.next()
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        if self.at_punct("-"):
            self.next()
            num = self.peek()
            if num.kind != "NUMBER":
                self.error("expected a number after unary '-'")
            self.next()
            return Literal("-" + num.value, datatype=_number_datatype(num.value))
        if tok.kind == "VAR":
            self.next()
            return Var(tok.value)
        if tok.kind == "NUMBER":
            self.next()
            return Literal(tok.value, datatype=_number_datatype(tok.value))
        if tok.kind == "STRING":
            return self.parse_literal()
        if tok.kind == "WORD":
            lowered = tok.value.lower()
            if lowered in _BUILTINS:
                self.next()
                return self.parse_call(_BUILTINS[lowered], tok)
            if lowered in ("true", "false"):
                self.next()
                return Literal(lowered, datatype=XSD_BOOLEAN)
            if lowered in _UNSUPPORTED_KEYWORDS:
                self.unsupported(f"{tok.value.upper()} is not supported", tok)
            self.error(f"unknown function {tok.value!r}", tok)
        if tok.kind in ("PNAME", "IRIREF"):
            iri = self.parse_iri_term()
            if self.at_punct("("):
                return self.parse_call(iri.value, tok)
            return iri
        self.error(f"unexpected token {tok.value!r} in expression")

    def parse_call(self, name: str, start: Token) -> FuncCall:
        self.expect_punct("(")
        args: list = []
        while not self.at_punct(")"):
            if args:
                self.expect_punct(",")
            args.append(self.parse_expr())
        self.expect_punct(")")
        arity = {"BOUND": 1, "REGEX": 2, "STR": 1, "YEAR": 1}.get(name, 1)
        if len(args) != arity:
            raise SparqlSyntaxError(
                f"{name} takes {arity} argument(s), got {len(args)}",
                start.line, start.column)
        if name == "BOUND" and not isinstance(args[0], Var):
            raise SparqlSyntaxError("BOUND takes a variable", start.line, start.column)
        return FuncCall(name, tuple(args))


def parse_query(text: str) -> SelectQuery:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Serializer


def _bare_number_form(lit: Literal) -> str | None:
    lex = lit.lexical
    if lit.datatype == XSD_INTEGER and re.fullmatch(r"[+-]?\d+", lex):
        return lex
    if lit.datatype == XSD_DECIMAL and re.fullmatch(r"[+-]?(?:\d+\.\d+|\.\d+)", lex):
        return lex
    if lit.datatype == XSD_DOUBLE and re.fullmatch(
            r"[+-]?(?:\d+\.\d+|\.\d+|\d+)[eE][+-]?\d+", lex):
        return lex
    return None


def serialize_term(term) -> str:
    if isinstance(term, Var):
        return f"?{term.name}"
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, TermTuple):
        return "(" + " ".join(serialize_term(i) for i in term.items) + ")"
    if isinstance(term, Literal):
        bare = _bare_number_form(term)
        if bare is not None:
            return bare
        quoted = '"%s"' % escape_string(term.lexical)
        if term.language is not None:
            return f"{quoted}@{term.language}"
        if term.datatype == XSD_STRING:
            return quoted
        return f"{quoted}^^<{term.datatype}>"
    raise TypeError(f"cannot serialize {term!r}")


def serialize_expr(expr) -> str:
    if isinstance(expr, BinaryOp):
        return f"({serialize_expr(expr.left)} {expr.op} {serialize_expr(expr.right)})"
    if isinstance(expr, FuncCall):
        args = ", ".join(serialize_expr(a) for a in expr.args)
        if expr.name in ("BOUND", "REGEX", "STR", "YEAR"):
            return f"{expr.name}({args})"
        return f"<{expr.name}>({args})"
    return serialize_term(expr)


def _serialize_body(elements, indent: str) -> list[str]:
    lines: list[str] = []
    for element in elements:
        if isinstance(element, TriplePattern):
            lines.append(f"{indent}{serialize_term(element.subject)} "
                         f"{serialize_term(element.predicate)} "
                         f"{serialize_term(element.object)} .")
        elif isinstance(element, Filter):
            lines.append(f"{indent}FILTER({serialize_expr(element.expr)})")
        elif isinstance(element, Service):
            lines.append(f"{indent}SERVICE <{element.endpoint.value}> {{")
            lines.extend(_serialize_body(element.body, indent + "  "))
            lines.append(f"{indent}}}")
        else:
            raise TypeError(f"cannot serialize group element {element!r}")
    return lines


def serialize_query(ast: SelectQuery) -> str:
    lines = [f"PREFIX {name}: <{iri}>" for name, iri in ast.prefixes]
    head = "SELECT DISTINCT " if ast.distinct else "SELECT "
    lines.append(head + " ".join(f"?{v.name}" for v in ast.projection))
    lines.append("WHERE {")
    lines.extend(_serialize_body(ast.body, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"
