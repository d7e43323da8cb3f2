"""Reader for the Prolog subset: tokenizer and operator-precedence parser.

The accepted grammar is clauses terminated by ``.``, with ``%`` line comments
and ``/* ... */`` block comments.  The operator table is fixed:

    1200 xfx  :-
    1100 xfy  ;
    1050 xfy  ->
    1000 xfy  ,
     900 fy   \\+
     700 xfx  =  \\=  <  >  =<  >=  =:=  =\\=  is
     500 yfx  +  -
     400 yfx  *  /  //  mod
     200 fy   -  (prefix)

Numeric literals follow ordinary Prolog reading: ``18.00`` is the float 18.0,
integers are arbitrary precision, and a ``-`` directly applied to a number
literal folds into a negative literal.  Variables scope over a single clause;
``_`` is fresh at every occurrence.  Quoted atoms ``'...'`` are supported;
there is no string type.

Every rejection raises :class:`ParseError` carrying the line and column of
the offending token, so malformed input (including arbitrary bytes) never
crashes the reader.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .terms import (
    EMPTY_LIST,
    Atom,
    Clause,
    Compound,
    Float,
    Int,
    Program,
    Term,
    Var,
    flatten_conjunction,
    is_callable_term,
    make_list,
)

SYMBOL_CHARS = frozenset("+-*/\\^<>=~:.?@#&$")
_SOLO_CHARS = ";!"
_PUNCT = "()[],|"

# name -> priority; both prefix operators are fy (operand may have equal priority)
PREFIX_OPS: dict[str, int] = {"-": 200, "\\+": 900}

# name -> (priority, type)
INFIX_OPS: dict[str, tuple[int, str]] = {
    ":-": (1200, "xfx"),
    ";": (1100, "xfy"),
    "->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "is": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    "mod": (400, "yfx"),
}


class ParseError(ValueError):
    """Syntax error with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Token:
    kind: str  # atom | var | int | float | punct | end | eof
    text: str
    value: object
    line: int
    col: int
    func_paren: bool = False  # "(" immediately follows, no layout between


def _tokenize(src: str) -> list[_Token]:
    n = len(src)
    line_starts = [0] + [k + 1 for k, c in enumerate(src) if c == "\n"]

    def loc(pos: int) -> tuple[int, int]:
        li = bisect_right(line_starts, pos) - 1
        return li + 1, pos - line_starts[li] + 1

    def err(message: str, pos: int) -> ParseError:
        return ParseError(message, *loc(pos))

    tokens: list[_Token] = []

    def emit(kind: str, start: int, end: int, value: object) -> None:
        line, col = loc(start)
        tokens.append(
            _Token(kind, src[start:end], value, line, col, end < n and src[end] == "(")
        )

    i = 0
    while i < n:
        c = src[i]
        if c in " \t\r\n\f\v":
            i += 1
            continue
        if c == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if src.startswith("/*", i):
            close = src.find("*/", i + 2)
            if close < 0:
                raise err("unterminated block comment", i)
            i = close + 2
            continue
        start = i
        if c == "'":
            i += 1
            buf: list[str] = []
            while True:
                if i >= n:
                    raise err("unterminated quoted atom", start)
                ch = src[i]
                if ch == "'":
                    if src.startswith("''", i):
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise err("unterminated quoted atom", start)
                    esc = src[i + 1]
                    simple = {"n": "\n", "t": "\t", "r": "\r", "a": "\a", "b": "\b",
                              "f": "\f", "v": "\v", "\\": "\\", "'": "'", '"': '"'}
                    if esc in simple:
                        buf.append(simple[esc])
                    elif esc == "\n":
                        pass  # escaped newline continues the atom
                    else:
                        raise err(f"unknown escape sequence \\{esc}", i)
                    i += 2
                    continue
                buf.append(ch)
                i += 1
            name = "".join(buf)
            if not name:
                raise err("empty quoted atom", start)
            emit("atom", start, i, name)
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            is_float = False
            if j + 1 < n and src[j] == "." and src[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            if is_float:
                emit("float", i, j, float(text))
            else:
                emit("int", i, j, int(text))
            i = j
            continue
        if c == "_" or c.isalpha():
            j = i + 1
            while j < n and (src[j] == "_" or src[j].isalnum()):
                j += 1
            kind = "var" if (c == "_" or c.isupper()) else "atom"
            emit(kind, i, j, src[i:j])
            i = j
            continue
        if c in _PUNCT:
            emit("punct", i, i + 1, c)
            i += 1
            continue
        if c in _SOLO_CHARS:
            emit("atom", i, i + 1, c)
            i += 1
            continue
        if c == "." and (i + 1 >= n or src[i + 1] in " \t\r\n\f\v%"):
            emit("end", i, i + 1, ".")
            i += 1
            continue
        if c in SYMBOL_CHARS:
            j = i + 1
            while j < n and src[j] in SYMBOL_CHARS:
                # "p:-q." must not swallow the clause terminator
                if src[j] == "." and (j + 1 >= n or src[j + 1] in " \t\r\n\f\v%"):
                    break
                # a comment opener ends the symbol run
                if src.startswith("/*", j) or src.startswith("%", j):
                    break
                j += 1
            emit("atom", i, j, src[i:j])
            i = j
            continue
        raise err(f"unexpected character {c!r}", i)

    line, col = loc(n)
    tokens.append(_Token("eof", "", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.varmap: dict[str, Var] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        what = f" (found {tok.text!r})" if tok.text else ""
        return ParseError(message + what, tok.line, tok.col)

    def new_clause_scope(self) -> None:
        self.varmap = {}

    # --- expressions -----------------------------------------------------

    def parse(self, max_prec: int) -> Term:
        term, _ = self._expr(max_prec)
        return term

    def _expr(self, max_prec: int) -> tuple[Term, int]:
        left, left_prec = self._primary(max_prec)
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                name = ","
            elif tok.kind == "atom" and tok.value in INFIX_OPS:
                name = tok.value  # type: ignore[assignment]
            else:
                break
            prec, typ = INFIX_OPS[name]
            if prec > max_prec:
                break
            left_max = prec if typ == "yfx" else prec - 1
            if left_prec > left_max:
                break
            self.advance()
            right_max = prec if typ == "xfy" else prec - 1
            right, _ = self._expr(right_max)
            left = Compound(name, (left, right))
            left_prec = prec
        return left, left_prec

    def _primary(self, max_prec: int) -> tuple[Term, int]:
        tok = self.peek()
        if tok.kind == "atom":
            self.advance()
            name: str = tok.value  # type: ignore[assignment]
            if tok.func_paren:
                return Compound(name, self._arg_list()), 0
            if name in PREFIX_OPS and self._starts_term(self.peek()):
                prec = PREFIX_OPS[name]
                nxt = self.peek()
                if name == "-" and nxt.kind in ("int", "float"):
                    self.advance()
                    if nxt.kind == "int":
                        return Int(-nxt.value), 0  # type: ignore[operator]
                    return Float(-nxt.value), 0  # type: ignore[operator]
                if prec > max_prec:
                    raise self.fail(f"prefix operator {name!r} exceeds allowed priority", tok)
                operand, _ = self._expr(prec)  # fy: operand priority <= prec
                return Compound(name, (operand,)), prec
            return Atom(name), 0
        if tok.kind == "var":
            self.advance()
            name = tok.value  # type: ignore[assignment]
            if name == "_":
                return Var("_"), 0
            return self.varmap.setdefault(name, Var(name)), 0
        if tok.kind == "int":
            self.advance()
            return Int(tok.value), 0  # type: ignore[arg-type]
        if tok.kind == "float":
            self.advance()
            return Float(tok.value), 0  # type: ignore[arg-type]
        if tok.kind == "punct":
            if tok.text == "(":
                self.advance()
                term, _ = self._expr(1200)
                self._expect_punct(")")
                return term, 0
            if tok.text == "[":
                return self._list(), 0
            if tok.text == "," and tok.func_paren:
                self.advance()
                return Compound(",", self._arg_list()), 0
        raise self.fail("expected a term")

    def _starts_term(self, tok: _Token) -> bool:
        if tok.kind in ("var", "int", "float"):
            return True
        if tok.kind == "atom":
            # an infix-only operator cannot begin an operand: "a - * b" is an error
            return tok.value not in INFIX_OPS or tok.value in PREFIX_OPS or tok.func_paren
        return tok.kind == "punct" and (tok.text in "([" or (tok.text == "," and tok.func_paren))

    def _arg_list(self) -> tuple[Term, ...]:
        self._expect_punct("(")
        args = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.advance()
            args.append(self.parse(999))
        self._expect_punct(")")
        return tuple(args)

    def _list(self) -> Term:
        self._expect_punct("[")
        if self.peek().kind == "punct" and self.peek().text == "]":
            self.advance()
            return EMPTY_LIST
        items = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.advance()
            items.append(self.parse(999))
        tail: Term = EMPTY_LIST
        if self.peek().kind == "punct" and self.peek().text == "|":
            self.advance()
            tail = self.parse(999)
        self._expect_punct("]")
        return make_list(items, tail)

    def _expect_punct(self, text: str) -> None:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != text:
            raise self.fail(f"expected {text!r}")
        self.advance()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind == "eof":
            raise self.fail("unterminated clause (missing '.')", tok)
        if tok.kind != "end":
            raise self.fail("expected '.' or an operator")
        self.advance()


def _to_clause(term: Term, where: _Token) -> Clause:
    if isinstance(term, Compound) and term.functor == ":-" and len(term.args) == 2:
        head, body_term = term.args
        body = flatten_conjunction(body_term)
    else:
        head, body = term, []
    if not is_callable_term(head):
        raise ParseError("clause head must be an atom or compound", where.line, where.col)
    return Clause(head, tuple(body))


def parse_program(source: str) -> Program:
    """Parse a clause sequence into a Program; comments and whitespace only
    give the empty program."""
    parser = _Parser(_tokenize(source))
    clauses: list[Clause] = []
    while parser.peek().kind != "eof":
        parser.new_clause_scope()
        first = parser.peek()
        term = parser.parse(1200)
        parser.expect_end()
        clauses.append(_to_clause(term, first))
    return Program(clauses)


def parse_query(source: str) -> list[Term]:
    """Parse a comma-conjunction of goals; variables are shared across goals."""
    parser = _Parser(_tokenize(source))
    if parser.peek().kind == "eof":
        raise parser.fail("empty query")
    term = parser.parse(1200)
    if parser.peek().kind == "end":
        parser.advance()
    if parser.peek().kind != "eof":
        raise parser.fail("unexpected input after query")
    return flatten_conjunction(term)


def parse_term_text(source: str) -> Term:
    """Parse a single term (used for serialized proof trees and CLI values)."""
    parser = _Parser(_tokenize(source))
    if parser.peek().kind == "eof":
        raise parser.fail("expected a term")
    term = parser.parse(1200)
    if parser.peek().kind == "end":
        parser.advance()
    if parser.peek().kind != "eof":
        raise parser.fail("unexpected input after term")
    return term
