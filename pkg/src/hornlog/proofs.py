"""Proof-tree enumeration, serialization, and independent re-checking.

A proof tree records one successful derivation.  ``Derived`` nodes conclude a
user-predicate goal and carry one child per body goal of the licensing
clause, in body order; ``BuiltinLeaf`` nodes record a builtin goal exactly as
it evaluated.  Control constructs (if-then-else, disjunction, negation) and
``maplist`` appear as single leaves carrying the whole instantiated
construct.

The canonical text form is ``=>(Body, Conclusion)``: children fold
right-associatively with ``,(A, B)``, a single child is written bare, no
children are written ``builtin(true)``, and a leaf for goal G is
``=>(builtin(G), G)``.  The parser also accepts two looser spellings seen in
the wild and normalizes them: a fact written ``=>(true, C)`` without the
``builtin`` wrapper, and a clause body collapsed into one
``builtin(,(g(G1), g(G2)))`` leaf, which is split into one leaf per g-goal.
Leaves over user predicates that come out of that splitting are validated by
re-solving against the program.

``check_proof`` never reuses the search engine's derivation state: clause
licensing is re-derived by unification from scratch and builtin leaves are
re-evaluated by a fresh bounded solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .engine import (
    DEFAULT_LIMITS,
    Answer,
    Bindings,
    EngineError,
    SolveLimits,
    _as_goals,
    _PNode,
    _Solver,
    _StepsExceeded,
    query_variables,
    rename_clause,
)
from .terms import (
    TRUE,
    Atom,
    Clause,
    Compound,
    Program,
    Term,
    flatten_conjunction,
    fold_conjunction,
    indicator,
    is_callable_term,
)
from .writer import format_term


@dataclass(frozen=True)
class Derived:
    """A goal concluded by a program clause; children prove its body."""

    conclusion: Term
    children: tuple["ProofNode", ...] = ()


@dataclass(frozen=True)
class BuiltinLeaf:
    """A builtin goal, stored as evaluated (bindings applied)."""

    goal: Term


ProofNode = Union[Derived, BuiltinLeaf]


def node_conclusion(node: ProofNode) -> Term:
    return node.conclusion if isinstance(node, Derived) else node.goal


@dataclass(frozen=True)
class TrajectorySet:
    """All distinct proofs found for one query, in discovery order.

    ``exhausted`` is True iff enumeration completed under the limits, i.e.
    the number of trees is exact rather than a cap or budget artifact.
    """

    query: Term
    trees: tuple[ProofNode, ...]
    exhausted: bool


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def tree_to_term(node: ProofNode) -> Term:
    if isinstance(node, BuiltinLeaf):
        return Compound("=>", (Compound("builtin", (node.goal,)), node.goal))
    if not node.children:
        body: Term = Compound("builtin", (TRUE,))
    else:
        body = tree_to_term(node.children[-1])
        for child in reversed(node.children[:-1]):
            body = Compound(",", (tree_to_term(child), body))
    return Compound("=>", (body, node.conclusion))


def serialize_tree(node: ProofNode) -> str:
    """Canonical one-line text of a proof tree."""
    return format_term(tree_to_term(node), "functional")


def tree_to_json(node: ProofNode) -> dict:
    if isinstance(node, BuiltinLeaf):
        return {"kind": "builtin", "conclusion": format_term(node.goal), "children": []}
    return {
        "kind": "derived",
        "conclusion": format_term(node.conclusion),
        "children": [tree_to_json(c) for c in node.children],
    }


# ---------------------------------------------------------------------------
# Parsing / normalization
# ---------------------------------------------------------------------------

class TreeFormatError(ValueError):
    """The text parsed as a term but is not a well-formed proof tree."""


def parse_tree(source: str) -> ProofNode:
    """Parse serialized tree text, normalizing variant spellings."""
    from .reader import parse_term_text

    return _term_to_tree(parse_term_text(source))


def _is_builtin_wrap(t: Term) -> bool:
    return isinstance(t, Compound) and t.functor == "builtin" and len(t.args) == 1


def _term_to_tree(t: Term) -> ProofNode:
    if not (isinstance(t, Compound) and t.functor == "=>" and len(t.args) == 2):
        raise TreeFormatError(
            f"expected an =>(body, conclusion) node, got: {format_term(t)}"
        )
    body, conclusion = t.args
    if not is_callable_term(conclusion):
        raise TreeFormatError(
            f"malformed node, conclusion missing or not callable: {format_term(t)}"
        )
    if _is_builtin_wrap(body) and body.args[0] == conclusion:
        return BuiltinLeaf(conclusion)
    return Derived(conclusion, _body_children(body))


def _body_children(body: Term) -> tuple[ProofNode, ...]:
    if body == TRUE or (_is_builtin_wrap(body) and body.args[0] == TRUE):
        return ()
    if _is_builtin_wrap(body):
        return _expand_collapsed(body.args[0])
    children: list[ProofNode] = []
    for part in flatten_conjunction(body):
        if isinstance(part, Compound) and part.functor == "=>" and len(part.args) == 2:
            children.append(_term_to_tree(part))
        elif _is_builtin_wrap(part):
            children.extend(_expand_collapsed(part.args[0]))
        elif part == TRUE:
            children.append(BuiltinLeaf(TRUE))
        else:
            raise TreeFormatError(f"malformed proof node: {format_term(part)}")
    return tuple(children)


def _expand_collapsed(goal: Term) -> tuple[ProofNode, ...]:
    """Split a collapsed body like ,(g(G1), g(G2)) into one leaf per goal."""
    if goal == TRUE:
        return ()
    return tuple(BuiltinLeaf(_strip_g(part)) for part in flatten_conjunction(goal))


def _strip_g(t: Term) -> Term:
    if isinstance(t, Compound) and t.functor == "g" and len(t.args) == 1:
        return t.args[0]
    return t


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _materialize(pnode: _PNode, store: Bindings) -> ProofNode:
    if pnode.kind == "builtin":
        return BuiltinLeaf(store.resolve(pnode.goal))
    return Derived(
        store.resolve(pnode.goal),
        tuple(_materialize(c, store) for c in pnode.children),
    )


def _root_of(roots: tuple[ProofNode, ...]) -> ProofNode:
    if len(roots) == 1:
        return roots[0]
    conclusion = fold_conjunction([node_conclusion(r) for r in roots])
    return Derived(conclusion, roots)


def collect_trajectories(
    program: Program,
    query,
    limits: SolveLimits = DEFAULT_LIMITS,
    occurs_check: bool = True,
    keep: Callable[[Answer, ProofNode], bool] | None = None,
) -> TrajectorySet:
    """Enumerate distinct proofs, optionally filtered, capped at
    ``limits.max_solutions``."""
    goals = _as_goals(query)
    solver = _Solver(program, limits, occurs_check)
    qvars = query_variables(goals)
    out: list[_PNode] = []
    seen: set[str] = set()
    trees: list[ProofNode] = []
    exhausted = False
    gen = solver.solve_seq(tuple(goals), 0, 0, out)
    try:
        while True:
            try:
                next(gen)
            except StopIteration:
                exhausted = not solver.incomplete
                break
            answer = Answer({v.name: solver.store.resolve(v) for v in qvars})
            tree = _root_of(tuple(_materialize(n, solver.store) for n in out))
            if keep is not None and not keep(answer, tree):
                continue
            text = serialize_tree(tree)
            if text in seen:
                continue
            if len(trees) == limits.max_solutions:
                break  # a distinct proof beyond the cap exists
            seen.add(text)
            trees.append(tree)
    except _StepsExceeded:
        pass
    finally:
        gen.close()
    return TrajectorySet(fold_conjunction(goals), tuple(trees), exhausted)


def prove_trajectories(program: Program, query,
                       limits: SolveLimits = DEFAULT_LIMITS,
                       occurs_check: bool = True) -> TrajectorySet:
    """One proof tree per distinct successful derivation, depth-first."""
    return collect_trajectories(program, query, limits, occurs_check)


def iter_proofs(program: Program, query,
                limits: SolveLimits = DEFAULT_LIMITS,
                occurs_check: bool = True) -> Iterator[tuple[Answer, ProofNode]]:
    """Raw stream of (answer, proof) pairs, duplicates included.

    Budget exhaustion silently ends the stream; other engine errors raise.
    """
    goals = _as_goals(query)
    solver = _Solver(program, limits, occurs_check)
    qvars = query_variables(goals)
    out: list[_PNode] = []
    gen = solver.solve_seq(tuple(goals), 0, 0, out)
    try:
        while True:
            try:
                next(gen)
            except (StopIteration, _StepsExceeded):
                return
            answer = Answer({v.name: solver.store.resolve(v) for v in qvars})
            yield answer, _root_of(tuple(_materialize(n, solver.store) for n in out))
    finally:
        gen.close()


# ---------------------------------------------------------------------------
# Independent proof checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProofCheck:
    valid: bool
    path: tuple[int, ...] | None = None
    reason: str | None = None


RECHECK_LIMITS = SolveLimits(max_solutions=1, max_depth=256, max_steps=200_000)


def check_proof(program: Program, tree: ProofNode,
                recheck_limits: SolveLimits = RECHECK_LIMITS) -> ProofCheck:
    """Validate a proof tree against a program without any search state.

    Valid iff every Derived node is licensed by some clause (head unifies
    with the conclusion and body goals unify one-to-one with the children's
    conclusions under a single substitution) and every leaf re-evaluates to
    true under a fresh bounded solve.
    """
    return _check_node(program, tree, (), recheck_limits)


def _check_node(program: Program, node: ProofNode, path: tuple[int, ...],
                limits: SolveLimits) -> ProofCheck:
    if isinstance(node, BuiltinLeaf):
        return _recheck_goal(program, node.goal, path, limits)
    conclusion = node.conclusion
    if isinstance(conclusion, Compound) and conclusion.functor == "," and len(conclusion.args) == 2:
        # synthetic root for multi-goal queries: children must match conjuncts
        parts = flatten_conjunction(conclusion)
        if len(parts) != len(node.children) or any(
            node_conclusion(c) != p for c, p in zip(node.children, parts)
        ):
            return ProofCheck(False, path, "conjunction node does not match its children")
        return _check_children(program, node, path, limits)
    if not is_callable_term(conclusion):
        return ProofCheck(False, path, "conclusion is not callable")
    functor, arity = indicator(conclusion)
    clauses = program.clauses_for(functor, arity)
    if clauses is None:
        return ProofCheck(False, path, f"no clause defines {functor}/{arity}")
    child_conclusions = [node_conclusion(c) for c in node.children]
    if not any(
        _licenses(clause, conclusion, child_conclusions) for clause in clauses
    ):
        return ProofCheck(
            False, path, f"no clause of {functor}/{arity} licenses this node"
        )
    return _check_children(program, node, path, limits)


def _check_children(program: Program, node: Derived, path: tuple[int, ...],
                    limits: SolveLimits) -> ProofCheck:
    for i, child in enumerate(node.children):
        result = _check_node(program, child, path + (i,), limits)
        if not result.valid:
            return result
    return ProofCheck(True)


def _licenses(clause: Clause, conclusion: Term, child_conclusions: list[Term]) -> bool:
    if len(clause.body) != len(child_conclusions):
        return False
    head, body = rename_clause(clause.head, clause.body)
    store = Bindings()
    if not store.unify(head, conclusion):
        return False
    return all(store.unify(g, c) for g, c in zip(body, child_conclusions))


def _recheck_goal(program: Program, goal: Term, path: tuple[int, ...],
                  limits: SolveLimits) -> ProofCheck:
    solver = _Solver(program, limits, occurs_check=True)
    try:
        gen = solver.solve_goal(goal, 0, None)
        try:
            next(gen)
        except StopIteration:
            return ProofCheck(
                False, path, f"goal failed re-evaluation: {format_term(goal)}"
            )
        gen.close()
        return ProofCheck(True)
    except _StepsExceeded:
        return ProofCheck(False, path, "re-evaluation exceeded its step budget")
    except EngineError as exc:
        return ProofCheck(False, path, f"re-evaluation error: {exc}")
