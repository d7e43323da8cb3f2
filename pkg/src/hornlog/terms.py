"""Term, clause, and program representation.

Five term kinds cover the whole value universe: atoms, logic variables,
arbitrary-precision integers, 64-bit floats, and compound terms.  Lists are
ordinary compounds with functor "." and arity 2, terminated by the atom
``[]``.  Everything except variables compares by value; variables compare by
identity, so two variables with the same display name are still distinct
unless they are literally the same object.

All of these structures are immutable after construction and safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

Term = Union["Atom", "Var", "Int", "Float", "Compound"]


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("atom name must be non-empty")

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


class Var:
    """A logic variable.  Identity is the identity of the object."""

    __slots__ = ("name",)

    def __init__(self, name: str = "_") -> None:
        self.name = name

    def __repr__(self) -> str:
        return f"Var({self.name!r}@{id(self):x})"


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self) -> str:
        return f"Int({self.value})"


@dataclass(frozen=True)
class Float:
    value: float

    def __repr__(self) -> str:
        return f"Float({self.value!r})"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.functor:
            raise ValueError("functor must be non-empty")
        if not self.args:
            raise ValueError("zero-arity callables are atoms, not compounds")

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {list(self.args)!r})"


TRUE = Atom("true")
FAIL = Atom("fail")
EMPTY_LIST = Atom("[]")


def mk(functor: str, *args: Term) -> Term:
    """Build an atom or a compound depending on the argument count."""
    return Compound(functor, tuple(args)) if args else Atom(functor)


def cons(head: Term, tail: Term) -> Compound:
    return Compound(".", (head, tail))


def make_list(items: Iterable[Term], tail: Term = EMPTY_LIST) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def list_parts(t: Term) -> tuple[list[Term], Term]:
    """Split a cons chain into (elements, final tail).

    A proper list ends with the atom ``[]``; anything else (a variable or a
    non-list term) is returned as the tail so callers can decide what partial
    lists mean to them.
    """
    items: list[Term] = []
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def is_callable_term(t: Term) -> bool:
    """Atoms and compounds can appear as clause heads and goals."""
    return isinstance(t, (Atom, Compound))


def indicator(t: Term) -> tuple[str, int]:
    """functor/arity key of a callable term."""
    if isinstance(t, Atom):
        return (t.name, 0)
    if isinstance(t, Compound):
        return (t.functor, len(t.args))
    raise TypeError(f"not a callable term: {t!r}")


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(is_ground(a) for a in t.args)
    return True


def term_vars(t: Term) -> list[Var]:
    """Variables of ``t`` in first-occurrence order, each listed once."""
    seen: list[Var] = []
    stack = [t]
    while stack:
        cur = stack.pop(0)
        if isinstance(cur, Var):
            if not any(v is cur for v in seen):
                seen.append(cur)
        elif isinstance(cur, Compound):
            stack[0:0] = list(cur.args)
    return seen


def flatten_conjunction(t: Term) -> list[Term]:
    """Flatten a ','/2 spine into a goal list; other terms are one goal."""
    if isinstance(t, Compound) and t.functor == "," and len(t.args) == 2:
        return flatten_conjunction(t.args[0]) + flatten_conjunction(t.args[1])
    return [t]


def fold_conjunction(goals: Sequence[Term]) -> Term:
    """Right-fold goals back into a ','/2 spine; empty folds to ``true``."""
    if not goals:
        return TRUE
    out = goals[-1]
    for g in reversed(goals[:-1]):
        out = Compound(",", (g, out))
    return out


@dataclass(frozen=True)
class Clause:
    """``head :- body``.  A fact is a clause with an empty body.

    A body consisting of the single goal ``true`` is normalised to the empty
    body, so ``p.`` and ``p :- true.`` build identical clauses.
    """

    head: Term
    body: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not is_callable_term(self.head):
            raise ValueError(f"clause head must be an atom or compound: {self.head!r}")
        if self.body == (TRUE,):
            object.__setattr__(self, "body", ())

    @property
    def is_fact(self) -> bool:
        return not self.body


class Program:
    """An ordered clause database with a functor/arity index.

    Clause order is source order, and the index preserves it: the clauses
    returned for a functor/arity are exactly the source-order subsequence.
    """

    __slots__ = ("clauses", "_index")

    def __init__(self, clauses: Iterable[Clause]) -> None:
        self.clauses: tuple[Clause, ...] = tuple(clauses)
        index: dict[tuple[str, int], list[Clause]] = {}
        for clause in self.clauses:
            index.setdefault(indicator(clause.head), []).append(clause)
        self._index: dict[tuple[str, int], tuple[Clause, ...]] = {
            key: tuple(cs) for key, cs in index.items()
        }

    def clauses_for(self, functor: str, arity: int) -> tuple[Clause, ...] | None:
        """Clauses defining functor/arity, or None if the predicate is absent."""
        return self._index.get((functor, arity))

    def predicates(self) -> list[tuple[str, int]]:
        return list(self._index.keys())

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)
