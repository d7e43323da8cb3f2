"""Unification, arithmetic, builtins, and depth-first all-solutions resolution.

The solver is a classic SLD interpreter over the clause database: goals are
reduced left to right, clauses are tried in source order, and backtracking is
driven by Python generators over a single mutable binding store with a trail.
The discipline that makes this correct is that trail entries are undone when
a generator is *resumed* past a choice, never when it is abandoned, so
committing to the first solution of a goal (if-then-else) keeps its bindings
while ordinary backtracking restores the store exactly.

Search is budgeted three ways: ``max_solutions`` caps the answers collected,
``max_depth`` prunes resolution nesting (pruned branches mark the search
incomplete), and ``max_steps`` bounds total goal reductions, aborting the
search with whatever answers were found.  Calling an undefined predicate is a
hard error rather than a silent failure so that broken generated programs are
distinguishable from provably false queries.

The occurs check is on by default (proof trees must stay finite and
checkable) and can be disabled per call.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .reader import parse_query
from .terms import (
    EMPTY_LIST,
    Atom,
    Compound,
    Float,
    Int,
    Program,
    Term,
    Var,
    cons,
    make_list,
)

# deep conjunctions and recursive programs nest generator frames well past the
# default interpreter limit
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class EngineError(Exception):
    """Base class for resolution-time failures that are errors, not 'no'."""


class UnknownPredicateError(EngineError):
    def __init__(self, functor: str, arity: int) -> None:
        super().__init__(f"unknown predicate {functor}/{arity}")
        self.functor = functor
        self.arity = arity


class InstantiationError(EngineError):
    pass


class EvalError(EngineError):
    pass


class _StepsExceeded(Exception):
    """Internal signal: the step budget ran out mid-search."""


@dataclass(frozen=True)
class SolveLimits:
    max_solutions: int = 64
    max_depth: int = 256
    max_steps: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("max_solutions", "max_depth", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


DEFAULT_LIMITS = SolveLimits()


class Bindings:
    """Variable bindings with a trail for cheap undo.

    Bindings are idempotent (resolving twice equals resolving once) and
    acyclic whenever the occurs check is left on.  The trail records every
    bind since a mark so failed branches can be rolled back exactly.
    """

    __slots__ = ("_map", "_trail", "_counter")

    def __init__(self) -> None:
        self._map: dict[Var, Term] = {}
        self._trail: list[Var] = []
        self._counter = 0

    def copy(self) -> "Bindings":
        out = Bindings()
        out._map = dict(self._map)
        out._counter = self._counter
        return out

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, v: Var) -> bool:
        return v in self._map

    def lookup(self, v: Var) -> Term | None:
        return self._map.get(v)

    def fresh(self, name: str = "_G") -> Var:
        self._counter += 1
        return Var(f"{name}{self._counter}")

    def mark(self) -> int:
        return len(self._trail)

    def undo(self, mark: int) -> None:
        while len(self._trail) > mark:
            del self._map[self._trail.pop()]

    def _bind(self, v: Var, t: Term) -> None:
        self._map[v] = t
        self._trail.append(v)

    def walk(self, t: Term) -> Term:
        while isinstance(t, Var):
            bound = self._map.get(t)
            if bound is None:
                return t
            t = bound
        return t

    def resolve(self, t: Term) -> Term:
        """Substitute bindings all the way down."""
        t = self.walk(t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.resolve(a) for a in t.args))
        return t

    def _occurs(self, v: Var, t: Term) -> bool:
        t = self.walk(t)
        if t is v:
            return True
        if isinstance(t, Compound):
            return any(self._occurs(v, a) for a in t.args)
        return False

    def unify(self, a: Term, b: Term, occurs_check: bool = True) -> bool:
        """Mutating unification; on failure the caller must undo to its mark."""
        a = self.walk(a)
        b = self.walk(b)
        if a is b:
            return True
        if isinstance(a, Var):
            if occurs_check and isinstance(b, Compound) and self._occurs(a, b):
                return False
            self._bind(a, b)
            return True
        if isinstance(b, Var):
            if occurs_check and isinstance(a, Compound) and self._occurs(b, a):
                return False
            self._bind(b, a)
            return True
        if isinstance(a, Atom) and isinstance(b, Atom):
            return a.name == b.name
        if isinstance(a, Int) and isinstance(b, Int):
            return a.value == b.value
        if isinstance(a, Float) and isinstance(b, Float):
            return a.value == b.value
        if isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            return all(self.unify(x, y, occurs_check) for x, y in zip(a.args, b.args))
        return False


def unify(a: Term, b: Term, env: Bindings | None = None,
          occurs_check: bool = True) -> Bindings | None:
    """Pure unification: returns bindings extending ``env``, or None.

    ``env`` itself is never modified; failure leaves no trace.
    """
    store = env.copy() if env is not None else Bindings()
    if store.unify(a, b, occurs_check):
        return store
    return None


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------

def _eval_number(store: Bindings, t: Term):
    t = store.walk(t)
    if isinstance(t, Var):
        raise EvalError("unbound variable in arithmetic expression")
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Float):
        return t.value
    if isinstance(t, Atom):
        raise EvalError(f"non-numeric leaf in arithmetic expression: {t.name}")
    if isinstance(t, Compound):
        if t.functor == "-" and len(t.args) == 1:
            return _check_finite(-_eval_number(store, t.args[0]))
        if len(t.args) == 2:
            a = _eval_number(store, t.args[0])
            b = _eval_number(store, t.args[1])
            op = t.functor
            try:
                if op == "+":
                    return _check_finite(a + b)
                if op == "-":
                    return _check_finite(a - b)
                if op == "*":
                    return _check_finite(a * b)
                if op == "/":
                    if b == 0:
                        raise EvalError("division by zero")
                    if isinstance(a, int) and isinstance(b, int):
                        # exactly divisible integers stay integers
                        return a // b if a % b == 0 else _check_finite(a / b)
                    return _check_finite(a / b)
                if op == "//":
                    if not (isinstance(a, int) and isinstance(b, int)):
                        raise EvalError("// requires integer operands")
                    if b == 0:
                        raise EvalError("division by zero")
                    q = a // b
                    if q < 0 and q * b != a:
                        q += 1  # truncate toward zero
                    return q
                if op == "mod":
                    if not (isinstance(a, int) and isinstance(b, int)):
                        raise EvalError("mod requires integer operands")
                    if b == 0:
                        raise EvalError("division by zero")
                    return a % b
            except OverflowError:
                raise EvalError("float overflow") from None
    raise EvalError(f"unknown arithmetic construct: {t!r}")


def _check_finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        raise EvalError("float overflow")
    return x


def _wrap_number(x) -> Term:
    return Int(x) if isinstance(x, int) else Float(x)


def eval_arith(expr: Term, env: Bindings | None = None) -> Term:
    """Evaluate a ground arithmetic expression to an Int or Float term."""
    store = env if env is not None else Bindings()
    return _wrap_number(_eval_number(store, expr))


def rename_clause(head: Term, body: tuple[Term, ...]) -> tuple[Term, tuple[Term, ...]]:
    """Copy a clause with every variable replaced by a fresh one."""
    mapping: dict[Var, Var] = {}

    def r(t: Term) -> Term:
        if isinstance(t, Var):
            fresh = mapping.get(t)
            if fresh is None:
                fresh = mapping[t] = Var(t.name)
            return fresh
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(r(a) for a in t.args))
        return t

    return r(head), tuple(r(g) for g in body)


# ---------------------------------------------------------------------------
# The solver
# ---------------------------------------------------------------------------

class _PNode:
    """Raw proof node recorded during search; materialized by the tracer."""

    __slots__ = ("kind", "goal", "children")

    def __init__(self, kind: str, goal: Term, children: list | None) -> None:
        self.kind = kind  # "derived" | "builtin"
        self.goal = goal
        self.children = children


class _Solver:
    def __init__(self, program: Program, limits: SolveLimits,
                 occurs_check: bool = True) -> None:
        self.program = program
        self.limits = limits
        self.occurs_check = occurs_check
        self.store = Bindings()
        self.steps = 0
        self.incomplete = False  # set when depth pruning may have cut answers

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise _StepsExceeded()

    def _unify(self, a: Term, b: Term) -> bool:
        return self.store.unify(a, b, self.occurs_check)

    # --- goal reduction ----------------------------------------------------

    def solve_seq(self, goals: Sequence[Term], i: int, depth: int,
                  out: list | None) -> Iterator[None]:
        if i >= len(goals):
            yield
            return
        for _ in self.solve_goal(goals[i], depth, out):
            yield from self.solve_seq(goals, i + 1, depth, out)

    def solve_goal(self, goal: Term, depth: int, out: list | None) -> Iterator[None]:
        self._tick()
        g = self.store.walk(goal)
        if isinstance(g, Var):
            raise InstantiationError("unbound variable called as a goal")
        if isinstance(g, (Int, Float)):
            raise EngineError(f"goal is not callable: {g!r}")
        if isinstance(g, Atom):
            name, args = g.name, ()
        else:
            name, args = g.functor, g.args
        key = (name, len(args))
        if key == (",", 2):
            # transparent conjunction: children recorded at the current level
            yield from self.solve_seq(args, 0, depth, out)
            return
        handler = _BUILTINS.get(key)
        if handler is not None:
            yield from handler(self, g, depth, out)
            return
        clauses = self.program.clauses_for(name, len(args))
        if clauses is None:
            raise UnknownPredicateError(name, len(args))
        if depth >= self.limits.max_depth:
            self.incomplete = True
            return
        store = self.store
        for clause in clauses:
            mark = store.mark()
            head, body = rename_clause(clause.head, clause.body)
            if self._unify(g, head):
                if out is not None:
                    node = _PNode("derived", g, [])
                    for _ in self.solve_seq(body, 0, depth + 1, node.children):
                        out.append(node)
                        try:
                            yield
                        finally:
                            out.pop()
                else:
                    yield from self.solve_seq(body, 0, depth + 1, None)
            store.undo(mark)

    def first_solution(self, goal: Term, depth: int) -> bool:
        """Commit to a goal's first solution; its bindings are kept."""
        gen = self.solve_goal(goal, depth, None)
        try:
            next(gen)
        except StopIteration:
            return False
        gen.close()
        return True


def _emit(solver: _Solver, goal: Term, out: list | None) -> Iterator[None]:
    """Record one builtin success as a leaf and yield it."""
    if out is None:
        yield
        return
    node = _PNode("builtin", goal, None)
    out.append(node)
    try:
        yield
    finally:
        out.pop()


# --- builtin predicates ----------------------------------------------------

def _bi_true(solver, g, depth, out):
    yield from _emit(solver, g, out)


def _bi_fail(solver, g, depth, out):
    return
    yield  # pragma: no cover


def _bi_unify(solver, g, depth, out):
    mark = solver.store.mark()
    if solver._unify(g.args[0], g.args[1]):
        yield from _emit(solver, g, out)
    solver.store.undo(mark)


def _bi_not_unify(solver, g, depth, out):
    mark = solver.store.mark()
    ok = solver._unify(g.args[0], g.args[1])
    solver.store.undo(mark)
    if not ok:
        yield from _emit(solver, g, out)


def _bi_is(solver, g, depth, out):
    value = _wrap_number(_eval_number(solver.store, g.args[1]))
    mark = solver.store.mark()
    if solver._unify(g.args[0], value):
        yield from _emit(solver, g, out)
    solver.store.undo(mark)


def _make_compare(op: Callable[[float, float], bool]):
    def handler(solver, g, depth, out):
        a = _eval_number(solver.store, g.args[0])
        b = _eval_number(solver.store, g.args[1])
        if op(a, b):
            yield from _emit(solver, g, out)

    return handler


def _bi_negation(solver, g, depth, out):
    mark = solver.store.mark()
    found = solver.first_solution(g.args[0], depth + 1)
    solver.store.undo(mark)
    if not found:
        yield from _emit(solver, g, out)


def _bi_disjunction(solver, g, depth, out):
    left, right = g.args
    lw = solver.store.walk(left)
    if isinstance(lw, Compound) and lw.functor == "->" and len(lw.args) == 2:
        yield from _ite(solver, g, lw.args[0], lw.args[1], right, depth, out)
        return
    store = solver.store
    mark = store.mark()
    for _ in solver.solve_goal(left, depth + 1, None):
        yield from _emit(solver, g, out)
    store.undo(mark)
    for _ in solver.solve_goal(right, depth + 1, None):
        yield from _emit(solver, g, out)
    store.undo(mark)


def _bi_if_then(solver, g, depth, out):
    yield from _ite(solver, g, g.args[0], g.args[1], None, depth, out)


def _ite(solver, g, cond, then, els, depth, out):
    """Soft-commit if-then-else, recorded as one leaf for the whole construct.

    Sub-proofs of the condition and branches are never enumerated separately;
    the leaf carries the construct instantiated by whatever bindings the
    taken branch produced.
    """
    store = solver.store
    mark = store.mark()
    if solver.first_solution(cond, depth + 1):
        for _ in solver.solve_goal(then, depth + 1, None):
            yield from _emit(solver, g, out)
        store.undo(mark)
    else:
        store.undo(mark)
        if els is not None:
            for _ in solver.solve_goal(els, depth + 1, None):
                yield from _emit(solver, g, out)
            store.undo(mark)


def _bi_member(solver, g, depth, out):
    target = g.args[0]
    t = solver.store.walk(g.args[1])
    store = solver.store
    while True:
        if isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
            solver._tick()
            mark = store.mark()
            if solver._unify(target, t.args[0]):
                yield from _emit(solver, g, out)
            store.undo(mark)
            t = store.walk(t.args[1])
            continue
        if isinstance(t, Var):
            raise InstantiationError("member/2 needs a proper list")
        return  # [] or a non-list tail ends the walk


def _bi_append(solver, g, depth, out):
    for _ in _append_solutions(solver, g.args[0], g.args[1], g.args[2]):
        yield from _emit(solver, g, out)


def _is_cons(t: Term) -> bool:
    return isinstance(t, Compound) and t.functor == "." and len(t.args) == 2


def _append_solutions(solver, a, b, c):
    solver._tick()
    store = solver.store
    mark = store.mark()
    if solver._unify(a, EMPTY_LIST) and solver._unify(b, c):
        yield
    store.undo(mark)
    aw = store.walk(a)
    cw = store.walk(c)
    if not (isinstance(aw, Var) or _is_cons(aw)):
        return
    if not (isinstance(cw, Var) or _is_cons(cw)):
        return
    head = store.fresh()
    ta = store.fresh()
    tc = store.fresh()
    if (solver._unify(a, cons(head, ta)) and solver._unify(c, cons(head, tc))):
        yield from _append_solutions(solver, ta, b, tc)
    store.undo(mark)


def _proper_length(store: Bindings, t: Term) -> int | None:
    n = 0
    t = store.walk(t)
    while _is_cons(t):
        n += 1
        t = store.walk(t.args[1])
    return n if t == EMPTY_LIST else None


def _bi_length(solver, g, depth, out):
    store = solver.store
    lst, count = g.args
    n = _proper_length(store, lst)
    if n is not None:
        mark = store.mark()
        if solver._unify(count, Int(n)):
            yield from _emit(solver, g, out)
        store.undo(mark)
        return
    lw = store.walk(lst)
    cw = store.walk(count)
    if isinstance(lw, Var) and isinstance(cw, Int) and cw.value >= 0:
        mark = store.mark()
        skeleton = make_list([store.fresh() for _ in range(cw.value)])
        if solver._unify(lst, skeleton):
            yield from _emit(solver, g, out)
        store.undo(mark)
        return
    raise InstantiationError("length/2: list and length both insufficiently bound")


def _bi_maplist3(solver, g, depth, out):
    store = solver.store
    pred = store.walk(g.args[0])
    if isinstance(pred, Atom):
        base_functor, base_args = pred.name, ()
    elif isinstance(pred, Compound):
        base_functor, base_args = pred.functor, pred.args
    else:
        raise InstantiationError("maplist/3 needs a callable first argument")
    n1 = _proper_length(store, g.args[1])
    n2 = _proper_length(store, g.args[2])
    if n1 is None and n2 is None:
        raise InstantiationError("maplist/3: both lists are unbounded")
    if n1 is not None and n2 is not None and n1 != n2:
        return
    n = n1 if n1 is not None else n2
    mark = store.mark()
    xs = [store.fresh() for _ in range(n)]
    ys = [store.fresh() for _ in range(n)]
    if solver._unify(g.args[1], make_list(xs)) and solver._unify(g.args[2], make_list(ys)):
        goals = tuple(
            Compound(base_functor, base_args + (x, y)) for x, y in zip(xs, ys)
        )
        for _ in solver.solve_seq(goals, 0, depth + 1, None):
            yield from _emit(solver, g, out)
    store.undo(mark)


def _bi_sum_list(solver, g, depth, out):
    store = solver.store
    total: int | float = 0
    t = store.walk(g.args[0])
    while _is_cons(t):
        item = store.walk(t.args[0])
        if isinstance(item, Int):
            total += item.value
        elif isinstance(item, Float):
            total += item.value
        else:
            raise EvalError("sum_list/2 expects a list of numbers")
        t = store.walk(t.args[1])
    if t != EMPTY_LIST:
        raise InstantiationError("sum_list/2 needs a proper list")
    mark = store.mark()
    if solver._unify(g.args[1], _wrap_number(total)):
        yield from _emit(solver, g, out)
    store.undo(mark)


_BUILTINS: dict[tuple[str, int], Callable] = {
    ("true", 0): _bi_true,
    ("fail", 0): _bi_fail,
    ("=", 2): _bi_unify,
    ("\\=", 2): _bi_not_unify,
    ("is", 2): _bi_is,
    ("=:=", 2): _make_compare(lambda a, b: a == b),
    ("=\\=", 2): _make_compare(lambda a, b: a != b),
    ("<", 2): _make_compare(lambda a, b: a < b),
    (">", 2): _make_compare(lambda a, b: a > b),
    ("=<", 2): _make_compare(lambda a, b: a <= b),
    (">=", 2): _make_compare(lambda a, b: a >= b),
    ("\\+", 1): _bi_negation,
    (";", 2): _bi_disjunction,
    ("->", 2): _bi_if_then,
    ("member", 2): _bi_member,
    ("append", 3): _bi_append,
    ("length", 2): _bi_length,
    ("maplist", 3): _bi_maplist3,
    ("sum_list", 2): _bi_sum_list,
}

BUILTIN_INDICATORS = frozenset(_BUILTINS) | {(",", 2)}


def is_builtin(functor: str, arity: int) -> bool:
    return (functor, arity) in BUILTIN_INDICATORS


# ---------------------------------------------------------------------------
# Public solving API
# ---------------------------------------------------------------------------

@dataclass
class Answer:
    """Fully dereferenced bindings for the query's named variables."""

    bindings: dict[str, Term] = field(default_factory=dict)


@dataclass
class SolveResult:
    answers: list[Answer]
    exhausted: bool  # True iff the search space was fully explored in budget


def query_variables(goals: Sequence[Term]) -> list[Var]:
    """Named query variables in first-occurrence order."""
    seen: list[Var] = []
    stack = list(goals)
    while stack:
        t = stack.pop(0)
        if isinstance(t, Var):
            if t.name != "_" and not any(v is t for v in seen):
                seen.append(t)
        elif isinstance(t, Compound):
            stack[0:0] = list(t.args)
    return seen


def _as_goals(query) -> list[Term]:
    if isinstance(query, str):
        return parse_query(query)
    return list(query)


def solve_all(program: Program, query, limits: SolveLimits = DEFAULT_LIMITS,
              occurs_check: bool = True) -> SolveResult:
    """All answers in depth-first, clause-source order, up to the limits.

    The step budget running out returns the partial answers found with
    ``exhausted=False``; unknown predicates and type errors raise.
    """
    goals = _as_goals(query)
    solver = _Solver(program, limits, occurs_check)
    qvars = query_variables(goals)
    answers: list[Answer] = []
    exhausted = False
    gen = solver.solve_seq(tuple(goals), 0, 0, None)
    try:
        while True:
            try:
                next(gen)
            except StopIteration:
                exhausted = not solver.incomplete
                break
            if len(answers) == limits.max_solutions:
                break  # a solution beyond the cap exists: not exhausted
            answers.append(
                Answer({v.name: solver.store.resolve(v) for v in qvars})
            )
    except _StepsExceeded:
        pass
    finally:
        gen.close()
    return SolveResult(answers, exhausted)


def format_answer(answer: Answer) -> str:
    """Deterministic one-line rendering, e.g. ``X = 990.0``.

    Unbound variables are displayed as _G1, _G2, ... in first-occurrence
    order so the text never depends on internal renaming state.
    """
    from .writer import format_term

    if not answer.bindings:
        return "true"
    display: dict[Var, Var] = {}

    def dress(t: Term) -> Term:
        if isinstance(t, Var):
            named = display.get(t)
            if named is None:
                named = display[t] = Var(f"_G{len(display) + 1}")
            return named
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(dress(a) for a in t.args))
        return t

    parts = [f"{name} = {format_term(dress(value))}"
             for name, value in answer.bindings.items()]
    return ", ".join(parts)
