"""Self-driven dataset factory: generate programs, verify them against gold
answers, enumerate capped proof trajectories, translate each into natural
language, and emit imitation-learning records.

Stages run in the order codegen -> verify -> trajectories -> translate, each
reading JSONL written by the previous one into the run's output directory:

    problems (input)  {id, question, answer, task}
    programs.jsonl    {id, prolog, status, meta}
    verified.jsonl    {id, prolog, status, meta}      status gains the verdict
    trees.jsonl       {id, answer, n, trees: [text]}
    dataset.jsonl     {id, question, reasoning, answer, trajectory_index,
                       num_trajectories, proof_tree}

A problem that fails any stage simply stops contributing rows; the run keeps
going and the report counts the failures.  In mock mode the whole run is a
pure function of the inputs, so re-running produces byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .engine import (
    DEFAULT_LIMITS,
    EngineError,
    SolveLimits,
    solve_all,
)
from .exemplars import DEFAULT_EXEMPLARS, WorkedExample
from .llm import ChatRequest, ClientConfig, LlmError, complete
from .prompts import (
    NoProgramFound,
    build_codegen_prompt,
    build_translation_prompt,
    extract_program,
)
from .proofs import (
    TrajectorySet,
    check_proof,
    collect_trajectories,
    node_conclusion,
    parse_tree,
    serialize_tree,
)
from .reader import ParseError, parse_program
from .terms import Compound, Float, Int, Program, Term, Var
from .writer import format_term

TASKS = ("arithmetic", "logic")
DEFAULT_CAPS: dict[str, int] = {"arithmetic": 10, "logic": 5}
STAGES = ("codegen", "verify", "trajectories", "translate")

TRANSLATION_PREAMBLE = (
    "Sure! I am happy to help you convert the Prolog-style reasoning tree "
    "into a natural language reasoning chain. Here is the reasoning chain:"
)


class PipelineError(Exception):
    pass


@dataclass(frozen=True)
class ProblemRecord:
    id: str
    question: str
    gold_answer: str
    task: str = "arithmetic"

    def __post_init__(self) -> None:
        if not self.gold_answer:
            raise ValueError(f"problem {self.id!r} has an empty gold answer")
        if self.task not in TASKS:
            raise ValueError(f"problem {self.id!r} has unknown task {self.task!r}")


@dataclass(frozen=True)
class GeneratedProgram:
    problem_id: str
    prolog_source: str
    parse_status: str  # "ok" or "error:<kind>"
    llm_metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrainingRecord:
    problem_id: str
    question: str
    reasoning: str
    answer: str
    trajectory_index: int  # 1-based, i of n
    num_trajectories: int
    proof_tree: str

    def __post_init__(self) -> None:
        if not (1 <= self.trajectory_index <= self.num_trajectories):
            raise ValueError("trajectory_index must lie in 1..num_trajectories")


@dataclass(frozen=True)
class VerifyOutcome:
    status: str  # "verified" | "mismatch" | "engine_error"
    answer_text: str | None = None
    detail: str = ""

    @property
    def verified(self) -> bool:
        return self.status == "verified"


# ---------------------------------------------------------------------------
# JSONL plumbing
# ---------------------------------------------------------------------------

def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise PipelineError(f"{path}:{lineno}: bad JSON: {exc}") from exc
    return rows


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")


def load_problems(path: str | Path) -> list[ProblemRecord]:
    problems = []
    seen: set[str] = set()
    for row in read_jsonl(path):
        problem = ProblemRecord(
            id=str(row["id"]),
            question=row["question"],
            gold_answer=str(row["answer"]),
            task=row.get("task", "arithmetic"),
        )
        if problem.id in seen:
            raise PipelineError(f"duplicate problem id {problem.id!r}")
        seen.add(problem.id)
        problems.append(problem)
    return problems


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _as_number(text: str) -> float | None:
    try:
        return float(text.strip())
    except ValueError:
        return None


def _answer_number(t: Term) -> float | None:
    if isinstance(t, Int):
        return float(t.value)
    if isinstance(t, Float):
        return t.value
    return None


def answers_match(answer: Term, gold: str, tol: float) -> bool:
    """Numeric golds compare with relative tolerance (1e-9 absolute floor
    near zero); everything else compares by canonical text."""
    gold_num = _as_number(gold)
    got_num = _answer_number(answer)
    if gold_num is not None and got_num is not None:
        return abs(got_num - gold_num) <= max(
            tol * max(abs(got_num), abs(gold_num)), 1e-9
        )
    return format_term(answer) == gold.strip()


def _solve_goal_term() -> tuple[list[Term], str]:
    var = Var("X")
    return [Compound("solve", (var,))], "X"


def verify_program(source_or_program, gold: str, tol: float = 1e-6,
                   limits: SolveLimits = DEFAULT_LIMITS) -> VerifyOutcome:
    """Run solve(X) and compare the first answer against the gold answer.

    Every failure mode is a verdict, never an exception: parse failures,
    missing solve/1, unknown predicates, budget exhaustion, and zero
    solutions all come back as ``engine_error``.
    """
    source = (
        source_or_program.prolog_source
        if isinstance(source_or_program, GeneratedProgram)
        else source_or_program
    )
    if isinstance(source, Program):
        program = source
    else:
        try:
            program = parse_program(source)
        except ParseError as exc:
            return VerifyOutcome("engine_error", None, f"parse failure: {exc}")
    if program.clauses_for("solve", 1) is None:
        return VerifyOutcome("engine_error", None, "program does not define solve/1")
    goals, var_name = _solve_goal_term()
    try:
        result = solve_all(program, goals, limits)
    except EngineError as exc:
        return VerifyOutcome("engine_error", None, str(exc))
    if not result.answers:
        detail = "no solutions" if result.exhausted else "search budget exhausted"
        return VerifyOutcome("engine_error", None, detail)
    answer = result.answers[0].bindings[var_name]
    answer_text = format_term(answer)
    if answers_match(answer, gold, tol):
        return VerifyOutcome("verified", answer_text)
    return VerifyOutcome("mismatch", answer_text, f"expected {gold!r}, got {answer_text}")


def enumerate_capped(source_or_program, cap: int,
                     expected_answer: str | None = None,
                     limits: SolveLimits = DEFAULT_LIMITS) -> TrajectorySet:
    """At most ``cap`` distinct proofs of solve(X), depth-first order.

    When ``expected_answer`` (canonical text) is given, trajectories reaching
    a different answer are filtered out before the cap applies.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    source = (
        source_or_program.prolog_source
        if isinstance(source_or_program, GeneratedProgram)
        else source_or_program
    )
    program = source if isinstance(source, Program) else parse_program(source)
    goals, var_name = _solve_goal_term()
    capped = SolveLimits(
        max_solutions=cap, max_depth=limits.max_depth, max_steps=limits.max_steps
    )
    keep = None
    if expected_answer is not None:
        keep = lambda answer, tree: format_term(answer.bindings[var_name]) == expected_answer
    return collect_trajectories(program, goals, capped, keep=keep)


def assemble_dataset(problem: ProblemRecord, verified_answer: str | None,
                     trajectories: Sequence[str],
                     translations: Sequence[str]) -> list[TrainingRecord]:
    """One record per trajectory; unverified problems contribute nothing."""
    if len(trajectories) != len(translations):
        raise PipelineError(
            f"problem {problem.id}: {len(trajectories)} trajectories but "
            f"{len(translations)} translations"
        )
    if not verified_answer:
        return []
    n = len(trajectories)
    return [
        TrainingRecord(
            problem_id=problem.id,
            question=problem.question,
            reasoning=translations[i],
            answer=problem.gold_answer,
            trajectory_index=i + 1,
            num_trajectories=n,
            proof_tree=trajectories[i],
        )
        for i in range(n)
    ]


def expected_record_count(trajectory_counts: Iterable[int], cap: int) -> int:
    """Records a run will emit: sum of min(n_i, cap) over the problems."""
    return sum(min(n, cap) for n in trajectory_counts)


def strip_translation_preamble(text: str) -> str:
    text = text.strip()
    if text.startswith(TRANSLATION_PREAMBLE):
        text = text[len(TRANSLATION_PREAMBLE):].lstrip()
    return text


# ---------------------------------------------------------------------------
# Pipeline configuration and stages
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    problems_path: Path
    out_dir: Path
    client: ClientConfig
    caps: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_CAPS))
    shots: int = 2
    tolerance: float = 1e-6
    workers: int = 4
    limits: SolveLimits = DEFAULT_LIMITS

    def __post_init__(self) -> None:
        self.problems_path = Path(self.problems_path)
        self.out_dir = Path(self.out_dir)

    def cap_for(self, task: str) -> int:
        return int(self.caps.get(task, DEFAULT_CAPS.get(task, 10)))

    def exemplars_for(self, task: str) -> tuple[WorkedExample, ...]:
        return DEFAULT_EXEMPLARS[: max(0, self.shots)]

    @property
    def programs_path(self) -> Path:
        return self.out_dir / "programs.jsonl"

    @property
    def verified_path(self) -> Path:
        return self.out_dir / "verified.jsonl"

    @property
    def trees_path(self) -> Path:
        return self.out_dir / "trees.jsonl"

    @property
    def dataset_path(self) -> Path:
        return self.out_dir / "dataset.jsonl"

    @property
    def report_path(self) -> Path:
        return self.out_dir / "report.json"


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    """Order-preserving parallel map (problem-level parallelism)."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def stage_codegen(config: PipelineConfig) -> dict:
    problems = load_problems(config.problems_path)

    def work(problem: ProblemRecord) -> dict:
        request = build_codegen_prompt(
            problem.question, problem.task, config.exemplars_for(problem.task)
        )
        meta = {
            "model": config.client.model,
            "temperature": request.temperature,
            "top_p": request.top_p,
        }
        try:
            response = complete(config.client, request)
        except LlmError as exc:
            meta["detail"] = str(exc)
            return {"id": problem.id, "prolog": "", "status": "error:llm", "meta": meta}
        meta["response_digest"] = _sha256(response.content)
        try:
            source = extract_program(response.content)
        except NoProgramFound as exc:
            meta["detail"] = str(exc)
            return {"id": problem.id, "prolog": "", "status": "error:no_prolog_block",
                    "meta": meta}
        try:
            program = parse_program(source)
        except ParseError as exc:
            meta["detail"] = str(exc)
            return {"id": problem.id, "prolog": source, "status": "error:syntax",
                    "meta": meta}
        if program.clauses_for("solve", 1) is None:
            meta["detail"] = "program does not define solve/1"
            return {"id": problem.id, "prolog": source, "status": "error:no_solve_clause",
                    "meta": meta}
        return {"id": problem.id, "prolog": source, "status": "ok", "meta": meta}

    rows = _pmap(work, problems, config.workers)
    write_jsonl(config.programs_path, rows)
    failures = sum(1 for row in rows if row["status"] != "ok")
    return {"problems": len(problems), "generation_failures": failures}


def stage_verify(config: PipelineConfig) -> dict:
    problems = {p.id: p for p in load_problems(config.problems_path)}
    rows = read_jsonl(config.programs_path)

    def work(row: dict) -> dict:
        if row["status"] != "ok":
            return row
        problem = problems.get(row["id"])
        if problem is None:
            out = dict(row)
            out["status"] = "engine_error"
            out["meta"] = {**row.get("meta", {}), "detail": "unknown problem id"}
            return out
        outcome = verify_program(row["prolog"], problem.gold_answer,
                                 config.tolerance, config.limits)
        out = dict(row)
        out["status"] = outcome.status
        out["meta"] = {**row.get("meta", {})}
        if outcome.answer_text is not None:
            out["meta"]["answer"] = outcome.answer_text
        if outcome.detail:
            out["meta"]["detail"] = outcome.detail
        return out

    out_rows = _pmap(work, rows, config.workers)
    write_jsonl(config.verified_path, out_rows)
    return {
        "verified": sum(1 for r in out_rows if r["status"] == "verified"),
        "verification_mismatches": sum(1 for r in out_rows if r["status"] == "mismatch"),
        "engine_errors": sum(1 for r in out_rows if r["status"] == "engine_error"),
    }


def stage_trajectories(config: PipelineConfig) -> dict:
    problems = {p.id: p for p in load_problems(config.problems_path)}
    rows = read_jsonl(config.verified_path)
    verified = [row for row in rows if row["status"] == "verified"]

    def work(row: dict) -> dict:
        problem = problems[row["id"]]
        answer = row["meta"]["answer"]
        try:
            trajectory_set = enumerate_capped(
                row["prolog"], config.cap_for(problem.task), answer, config.limits
            )
        except EngineError as exc:
            return {"id": row["id"], "answer": answer, "n": 0, "trees": [],
                    "error": str(exc)}
        trees = [serialize_tree(t) for t in trajectory_set.trees]
        return {"id": row["id"], "answer": answer, "n": len(trees), "trees": trees}

    out_rows = _pmap(work, verified, config.workers)
    write_jsonl(config.trees_path, out_rows)
    return {
        "trees_enumerated": sum(row["n"] for row in out_rows),
        "trajectory_failures": sum(1 for row in out_rows if row.get("error")),
    }


def stage_translate(config: PipelineConfig) -> dict:
    problems = {p.id: p for p in load_problems(config.problems_path)}
    sources = {row["id"]: row["prolog"] for row in read_jsonl(config.verified_path)}
    tree_rows = [row for row in read_jsonl(config.trees_path) if row["n"] > 0]

    def work(row: dict) -> tuple[list[TrainingRecord], int]:
        problem = problems[row["id"]]
        source = sources[row["id"]]
        shots = config.exemplars_for(problem.task)
        kept_trees: list[str] = []
        translations: list[str] = []
        failures = 0
        for tree_text in row["trees"]:
            request = build_translation_prompt(problem.question, source, tree_text, shots)
            try:
                response = complete(config.client, request)
            except LlmError:
                failures += 1
                continue
            reasoning = strip_translation_preamble(response.content)
            if not reasoning:
                failures += 1
                continue
            kept_trees.append(tree_text)
            translations.append(reasoning)
        records = assemble_dataset(problem, row["answer"], kept_trees, translations)
        return records, failures

    results = _pmap(work, tree_rows, config.workers)
    records = [
        {
            "id": record.problem_id,
            "question": record.question,
            "reasoning": record.reasoning,
            "answer": record.answer,
            "trajectory_index": record.trajectory_index,
            "num_trajectories": record.num_trajectories,
            "proof_tree": record.proof_tree,
        }
        for per_problem, _ in results
        for record in per_problem
    ]
    write_jsonl(config.dataset_path, records)
    return {
        "records": len(records),
        "translation_failures": sum(f for _, f in results),
    }


_STAGE_FUNCTIONS = {
    "codegen": stage_codegen,
    "verify": stage_verify,
    "trajectories": stage_trajectories,
    "translate": stage_translate,
}


def run_pipeline(config: PipelineConfig, stage: str = "all") -> dict:
    """Run one stage or the whole chain; returns (and writes) the report."""
    if stage == "all":
        stages = list(STAGES)
    elif stage in _STAGE_FUNCTIONS:
        stages = [stage]
    else:
        raise PipelineError(f"unknown stage {stage!r}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    report: dict = {"problems": len(load_problems(config.problems_path))}
    for name in stages:
        report.update(_STAGE_FUNCTIONS[name](config))
    with open(config.report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# Offline re-validation
# ---------------------------------------------------------------------------

def revalidate_dataset(dataset_path: str | Path, programs_path: str | Path,
                       tol: float = 1e-6) -> list[str]:
    """Re-check every emitted record from the output files alone.

    For each record: the proof tree must parse, check_proof must accept it
    against the stored program, and the tree's root answer must match the
    record's answer within tolerance.  Returns a list of failure messages,
    empty when the dataset is sound.
    """
    programs = {row["id"]: row["prolog"] for row in read_jsonl(programs_path)}
    failures: list[str] = []
    parsed: dict[str, Program] = {}
    for row in read_jsonl(dataset_path):
        rid = row["id"]
        label = f"{rid}[{row['trajectory_index']}/{row['num_trajectories']}]"
        source = programs.get(rid)
        if source is None:
            failures.append(f"{label}: no stored program")
            continue
        try:
            program = parsed.setdefault(rid, parse_program(source))
        except ParseError as exc:
            failures.append(f"{label}: stored program no longer parses: {exc}")
            continue
        try:
            tree = parse_tree(row["proof_tree"])
        except ValueError as exc:
            failures.append(f"{label}: proof tree does not parse: {exc}")
            continue
        verdict = check_proof(program, tree)
        if not verdict.valid:
            failures.append(f"{label}: proof invalid at {verdict.path}: {verdict.reason}")
            continue
        conclusion = node_conclusion(tree)
        if not (isinstance(conclusion, Compound) and conclusion.functor == "solve"
                and len(conclusion.args) == 1):
            failures.append(f"{label}: root conclusion is not solve/1")
            continue
        if not answers_match(conclusion.args[0], row["answer"], tol):
            failures.append(
                f"{label}: root answer {format_term(conclusion.args[0])} "
                f"does not match gold {row['answer']!r}"
            )
    return failures
