"""Canonical text rendering of terms, clauses, and programs.

Two styles exist.  The ``functional`` style is the canonical one used inside
serialized proof trees: every operator is written as an ordinary functor
application (``*(8, 18.0)``), lists keep their bracket sugar, and the output
is injective on ground terms, so distinct ground terms never collide.  The
``infix`` style is for human-facing program pretty-printing and re-parses to
a structurally identical term.

Floats always carry a decimal point and use the shortest representation that
round-trips; integers never carry one.
"""

from __future__ import annotations

import math
import re

from .reader import INFIX_OPS, PREFIX_OPS, SYMBOL_CHARS
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
    list_parts,
)

_BARE_ATOM = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_SOLO_ATOMS = frozenset({"[]", "{}", "!", ";"})


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot format non-finite float {value!r}")
    s = repr(value)
    if "e" in s or "E" in s:
        mantissa, _, exponent = s.partition("e")
        if "." not in mantissa:
            mantissa += ".0"
        return mantissa + "e" + exponent
    if "." not in s:
        s += ".0"
    return s


def _quote_atom(name: str) -> str:
    escaped = (
        name.replace("\\", "\\\\")
        .replace("'", "\\'")
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f"'{escaped}'"


def format_atom(name: str) -> str:
    if _BARE_ATOM.match(name) or name in _SOLO_ATOMS:
        return name
    if name and all(c in SYMBOL_CHARS for c in name):
        return name
    return _quote_atom(name)


def _functor_text(name: str) -> str:
    # a compound functor directly followed by "(" may stay bare even when the
    # standalone atom would need quotes, e.g. ,(a, b)
    if name == ",":
        return ","
    return format_atom(name)


def format_term(t: Term, style: str = "functional") -> str:
    """Render a term.  ``functional`` is canonical; ``infix`` is pretty."""
    if style == "functional":
        return _write(t, 1200, infix=False)
    if style == "infix":
        return _write(t, 1200, infix=True)
    raise ValueError(f"unknown style {style!r}")


def _write(t: Term, max_prec: int, infix: bool) -> str:
    if isinstance(t, Atom):
        return format_atom(t.name)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Float):
        return format_float(t.value)
    if isinstance(t, Compound):
        if t.functor == "." and len(t.args) == 2:
            return _write_list(t, infix)
        if infix:
            if len(t.args) == 2 and t.functor in INFIX_OPS:
                prec, typ = INFIX_OPS[t.functor]
                lp = prec if typ == "yfx" else prec - 1
                rp = prec if typ == "xfy" else prec - 1
                left = _write(t.args[0], lp, infix)
                right = _write(t.args[1], rp, infix)
                sep = f"{t.functor} " if t.functor == "," else f" {t.functor} "
                text = f"{left}{sep}{right}"
                return f"({text})" if prec > max_prec else text
            if len(t.args) == 1 and t.functor in PREFIX_OPS:
                prec = PREFIX_OPS[t.functor]
                arg = t.args[0]
                if isinstance(arg, (Int, Float)):
                    # "- 5" would re-read as the literal -5; keep the structure
                    return f"{t.functor}({_write(arg, 999, infix)})"
                text = f"{t.functor} {_write(arg, prec, infix)}"
                return f"({text})" if prec > max_prec else text
        args = ", ".join(_write(a, 999, infix) for a in t.args)
        return f"{_functor_text(t.functor)}({args})"
    raise TypeError(f"not a term: {t!r}")


def _write_list(t: Term, infix: bool) -> str:
    items, tail = list_parts(t)
    body = ", ".join(_write(item, 999, infix) for item in items)
    if tail == EMPTY_LIST:
        return f"[{body}]"
    return f"[{body}|{_write(tail, 999, infix)}]"


def format_clause(c: Clause) -> str:
    head = _write(c.head, 1199, infix=True)
    if c.is_fact:
        return f"{head}."
    goals = ", ".join(_write(g, 999, infix=True) for g in c.body)
    return f"{head} :- {goals}."


def format_program(p: Program) -> str:
    return "\n".join(format_clause(c) for c in p)
