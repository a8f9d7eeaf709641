"""Experiment drivers behind the command line: generation, solving, duels,
verification, counting and query-count benchmarks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Iterable

import numpy as np

from .adversaries import (
    GeneralAdversary,
    GoodPathsAdversary,
    goodpaths_alternative,
    goodpaths_audit,
    uncertainty_witness,
)
from .gf2 import BitMatrix, BitVector, ceil_log2, mat_vec_mul, solve
from .influence import (
    closure_rows,
    enumerate_branchings,
    enumerate_legal_digs,
    is_legal_dig,
    is_realizable_dig,
    random_branching,
    random_legal_dig,
)
from .solvers import (
    SolveReport,
    jump_antipodal,
    mxy_solver_from_sink_finder,
    naive_mxy_solver,
    random_query_solver,
    realizable_mxy_solver,
    sink_finder_from_mxy_solver,
    solve_realizable_sink,
)
from .uso import (
    FACE_CHECK_LIMIT,
    MatousekUso,
    VertexEvalOracle,
    find_orientation_conflict,
    find_parallel_violation,
    find_uso_violation,
    read_instance_fields,
)

SOLVERS = ("jump-antipodal", "naive-recover", "realizable-log2", "random-queries")
ADVERSARIES = ("general-adversary", "goodpaths-adversary")
CLASSES = ("general", "realizable")


class UsageError(ValueError):
    """Bad combination of options; maps to exit status 2."""


@dataclass
class ExperimentConfig:
    command: str
    n: int | None = None
    n_values: list[int] = field(default_factory=list)
    instance_class: str = "general"
    solver: str = "jump-antipodal"
    adversary: str | None = None
    trials: int = 1
    seed: int = 0
    out: str | None = None
    fmt: str = "json"


def parse_n_range(text: str) -> list[int]:
    """``"2..10"`` (inclusive), ``"16,64,256"`` or a single number; ``""`` is empty."""
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def generate_instance(instance_class: str, n: int, seed: int | Iterable[int]) -> MatousekUso:
    if n < 1:
        raise UsageError("n must be positive")
    rng = np.random.default_rng(seed)
    if instance_class == "general":
        g = random_legal_dig(n, rng)
        sink = BitVector.from_list(rng.integers(0, 2, size=n).tolist())
        return MatousekUso(g.adj, sink)
    if instance_class == "realizable":
        b = random_branching(n, rng)
        sink = BitVector.from_list(rng.integers(0, 2, size=n).tolist())
        return MatousekUso.from_branching(b, sink)
    raise UsageError(f"unknown instance class {instance_class!r}")


def sink_finder(solver_id: str, seed: int = 0) -> Callable[[Any], SolveReport]:
    if solver_id == "jump-antipodal":
        return jump_antipodal
    if solver_id == "naive-recover":
        return sink_finder_from_mxy_solver(naive_mxy_solver)
    if solver_id == "realizable-log2":
        return solve_realizable_sink
    if solver_id == "random-queries":
        return sink_finder_from_mxy_solver(random_query_solver(seed))
    raise UsageError(f"unknown solver {solver_id!r}")


def mxy_solver(solver_id: str, seed: int = 0) -> Callable[[Any], SolveReport]:
    if solver_id == "jump-antipodal":
        return mxy_solver_from_sink_finder(jump_antipodal)
    if solver_id == "naive-recover":
        return naive_mxy_solver
    if solver_id == "realizable-log2":
        return realizable_mxy_solver
    if solver_id == "random-queries":
        return random_query_solver(seed)
    raise UsageError(f"unknown solver {solver_id!r}")


def upper_bound(solver_id: str, n: int) -> int:
    """Worst-case vertex evaluations guaranteed for the solver."""
    if solver_id == "jump-antipodal":
        return n
    if solver_id in ("naive-recover", "random-queries"):
        return n + 1
    if solver_id == "realizable-log2":
        L = ceil_log2(n)
        return 1 + L + L * L
    raise UsageError(f"unknown solver {solver_id!r}")


def _requires_realizable(solver_id: str) -> bool:
    return solver_id == "realizable-log2"


# -- solve -----------------------------------------------------------------


@dataclass
class SolveOutcome:
    report: SolveReport
    verified: bool
    bound: int

    def to_dict(self, with_transcript: bool = False) -> dict[str, Any]:
        data = self.report.to_dict(with_transcript)
        data.update(verified=self.verified, bound=self.bound, within_bound=self.report.queries_used <= self.bound)
        return data


def solve_instance(u: MatousekUso, solver_id: str, seed: int = 0) -> SolveOutcome:
    if solver_id not in SOLVERS:
        raise UsageError(f"unknown solver {solver_id!r}")
    if _requires_realizable(solver_id) and not is_realizable_dig(u.matrix):
        raise UsageError(f"solver {solver_id} requires a realizable instance")
    oracle = VertexEvalOracle(u)
    report = sink_finder(solver_id, seed)(oracle)
    report.queries_used = oracle.query_count  # counter of the oracle, not the solver
    # independent check against the instance itself
    verified = mat_vec_mul(u.matrix, report.answer ^ u.sink).is_zero()
    return SolveOutcome(report, verified, upper_bound(solver_id, u.n))


# -- duels -----------------------------------------------------------------


def goodpaths_uncertain(state: GoodPathsAdversary) -> bool:
    """A realizable, transcript-consistent alternative with a different solution exists."""
    alt = goodpaths_alternative(state)
    if alt is None:
        return False
    m = state.matrix
    if any(mat_vec_mul(alt, q) != r for q, r in state.transcript):
        return False
    if not (is_legal_dig(alt) and is_realizable_dig(alt)):
        return False
    return solve(alt, state.y) != solve(m, state.y)


def lower_bound(adversary_id: str, n: int) -> int:
    """Matrix-vector queries every solver needs against the adversary."""
    if adversary_id == "general-adversary":
        return n - 1
    if adversary_id == "goodpaths-adversary":
        return int(math.floor(math.log2(n)))
    raise UsageError(f"unknown adversary {adversary_id!r}")


class _AuditedOracle:
    """Runs the adversary's audits after every answered query."""

    def __init__(self, adversary, adversary_id: str) -> None:
        self.adv = adversary
        self.adversary_id = adversary_id
        self.n = adversary.n
        self.y = adversary.y
        self.failures: list[dict[str, Any]] = []
        self.audits_run = 0

    @property
    def query_count(self) -> int:
        return self.adv.query_count

    @property
    def transcript(self):
        return self.adv.transcript

    def query(self, q: BitVector) -> BitVector:
        reply = self.adv.query(q)
        k = self.adv.query_count
        if self.adversary_id == "general-adversary":
            if self.adv.k < self.n - 1:
                self.audits_run += 1
                w = uncertainty_witness(self.adv)
                if not w.ok:
                    self.failures.append({"after_query": k, "audit": "uncertainty", "detail": asdict_witness(w)})
        else:
            self.audits_run += 1
            if not goodpaths_audit(self.adv):
                self.failures.append({"after_query": k, "audit": "goodpaths"})
            if k < lower_bound(self.adversary_id, self.n):
                self.audits_run += 1
                if not goodpaths_uncertain(self.adv):
                    self.failures.append({"after_query": k, "audit": "alternative"})
        return reply


def asdict_witness(w) -> dict[str, Any]:
    return {
        "y_outside_span": w.y_outside_span,
        "alternative_legal": w.alternative_legal,
        "alternative_consistent": w.alternative_consistent,
        "solutions_differ": w.solutions_differ,
    }


@dataclass
class DuelResult:
    solver: str
    adversary: str
    n: int
    seed: int
    queries: int
    lower_bound: int
    answer: str
    correct: bool
    audits_run: int
    audit_failures: list[dict[str, Any]]
    transcript: list[list[str]]
    changes: list[dict[str, Any]]
    final_matrix: list[str]

    @property
    def vertex_evaluations(self) -> int:
        return self.queries + 1

    @property
    def passed(self) -> bool:
        return self.correct and not self.audit_failures and self.queries >= self.lower_bound

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data.update(vertex_evaluations=self.vertex_evaluations, passed=self.passed)
        return data


def run_duel(solver_id: str, adversary_id: str, n: int, seed: int = 0, y: BitVector | None = None) -> DuelResult:
    if n < 2:
        raise UsageError("duels need n >= 2")
    if adversary_id == "general-adversary":
        if _requires_realizable(solver_id):
            raise UsageError(f"solver {solver_id} only handles realizable instances")
        adv: GeneralAdversary | GoodPathsAdversary = GeneralAdversary(n, y)
    elif adversary_id == "goodpaths-adversary":
        adv = GoodPathsAdversary(n)
    else:
        raise UsageError(f"unknown adversary {adversary_id!r}")
    audited = _AuditedOracle(adv, adversary_id)
    report = mxy_solver(solver_id, seed)(audited)
    final = adv.matrix
    correct = mat_vec_mul(final, report.answer) == adv.y
    return DuelResult(
        solver=solver_id,
        adversary=adversary_id,
        n=n,
        seed=seed,
        queries=adv.query_count,
        lower_bound=lower_bound(adversary_id, n),
        answer=report.answer.to_str(),
        correct=correct,
        audits_run=audited.audits_run,
        audit_failures=audited.failures,
        transcript=[[q.to_str(), r.to_str()] for q, r in adv.transcript],
        changes=list(adv.changes),
        final_matrix=final.to_strs(),
    )


# -- verification ----------------------------------------------------------


@dataclass
class VerifyReport:
    n: int
    checks: dict[str, bool]
    failures: list[dict[str, Any]]
    realizable: bool | None = None
    instances: int = 1
    skipped: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "instances": self.instances,
            "passed": self.passed,
            "checks": self.checks,
            "realizable": self.realizable,
            "skipped": self.skipped,
            "failures": self.failures,
        }


def verify_raw(matrix: BitMatrix, sink: BitVector, branching=None) -> VerifyReport:
    """Check an instance from its raw fields, locating the first failure of each kind."""
    n = matrix.nrows
    o = lambda v: mat_vec_mul(matrix, v ^ sink)  # noqa: E731
    checks: dict[str, bool] = {}
    failures: list[dict[str, Any]] = []
    legal = matrix.is_square and is_legal_dig(matrix)
    checks["legal_dig"] = legal
    if not legal:
        bad = [i + 1 for i, row in enumerate(matrix.rows) if not (row >> i) & 1]
        failures.append({"check": "legal_dig", "missing_loops": bad})
    if n > FACE_CHECK_LIMIT:
        # brute-force cube checks are only feasible for small n
        skipped = ["orientation_consistency", "unique_sinks", "parallel_law"]
    else:
        skipped = []
        conflict = find_orientation_conflict(o, n)
        checks["orientation_consistency"] = conflict is None
        if conflict is not None:
            v, i = conflict
            failures.append({"check": "orientation_consistency", "vertex": v.to_str(), "dimension": i})
            checks["unique_sinks"] = False
        else:
            face = find_uso_violation(o, n)
            checks["unique_sinks"] = face is None
            if face is not None:
                failures.append({"check": "unique_sinks", "face": face.describe()})
        pair = find_parallel_violation(o, matrix)
        checks["parallel_law"] = pair is None
        if pair is not None:
            failures.append({"check": "parallel_law", "pair": [pair[0].to_str(), pair[1].to_str()]})
    realizable = is_realizable_dig(matrix) if legal else None
    if branching is not None:
        ok = tuple(closure_rows(branching.parents)) == matrix.rows
        checks["branching_closure"] = ok
        if not ok:
            failures.append({"check": "branching_closure"})
    return VerifyReport(n, checks, failures, realizable, skipped=skipped)


def verify_instance_data(data: dict[str, Any]) -> VerifyReport:
    matrix, sink, branching = read_instance_fields(data)
    return verify_raw(matrix, sink, branching)


def verify_exhaustive(n: int) -> VerifyReport:
    if not 1 <= n <= 4:
        raise UsageError("exhaustive verification supports 1 <= n <= 4")
    total = 0
    failures: list[dict[str, Any]] = []
    for g in enumerate_legal_digs(n):
        for s in range(1 << n):
            total += 1
            rep = verify_raw(g.adj, BitVector(n, s))
            for f in rep.failures:
                failures.append({"matrix": g.adj.to_strs(), "sink": BitVector(n, s).to_str(), **f})
    checks = {"legal_dig": True, "orientation_consistency": True, "unique_sinks": True, "parallel_law": True}
    if failures:
        for f in failures:
            checks[f["check"]] = False
    return VerifyReport(n, checks, failures, None, instances=total)


# -- counting --------------------------------------------------------------


def count_report(n: int) -> dict[str, Any]:
    if not 1 <= n <= 4:
        raise UsageError("counting supports 1 <= n <= 4")
    branchings = len(enumerate_branchings(n))
    digs = enumerate_legal_digs(n)
    realizable_digs = sum(is_realizable_dig(g.adj) for g in digs)
    formula = 2**n * (n + 1) ** (n - 1)
    return {
        "n": n,
        "branchings": branchings,
        "legal_digs": len(digs),
        "realizable_digs": realizable_digs,
        "realizable_usos": realizable_digs * 2**n,
        "matousek_usos": len(digs) * 2**n,
        "formula_realizable_usos": formula,
        "formula_matches": realizable_digs * 2**n == formula and branchings == (n + 1) ** (n - 1),
    }


# -- benchmarks ------------------------------------------------------------


@dataclass
class BenchRow:
    n: int
    solver: str
    instance_class: str
    trials: int
    min_queries: int
    mean_queries: float
    max_queries: int
    bound: int
    bound_respected: bool


BENCH_FIELDS = [f.name for f in fields(BenchRow)]


def run_bench(config: ExperimentConfig) -> list[BenchRow]:
    rows = []
    for n in sorted(config.n_values):
        counts = []
        for t in range(config.trials):
            seed = [config.seed, n, t]
            if config.adversary:
                duel = run_duel(config.solver, config.adversary, n, seed=config.seed + t)
                if not duel.passed:
                    raise RuntimeError(f"duel failed at n={n}, trial {t}: {duel.audit_failures}")
                counts.append(duel.vertex_evaluations)
            else:
                u = generate_instance(config.instance_class, n, seed)
                outcome = solve_instance(u, config.solver, seed=config.seed + t)
                if not outcome.verified:
                    raise RuntimeError(f"wrong sink at n={n}, trial {t}")
                counts.append(outcome.report.queries_used)
        bound = upper_bound(config.solver, n)
        rows.append(
            BenchRow(
                n=n,
                solver=config.solver,
                instance_class=config.adversary or config.instance_class,
                trials=len(counts),
                min_queries=min(counts),
                mean_queries=round(sum(counts) / len(counts), 4),
                max_queries=max(counts),
                bound=bound,
                bound_respected=max(counts) <= bound,
            )
        )
    return rows


def bench_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return buf.getvalue()


def bench_from_csv(text: str) -> list[BenchRow]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append(
            BenchRow(
                n=int(rec["n"]),
                solver=rec["solver"],
                instance_class=rec["instance_class"],
                trials=int(rec["trials"]),
                min_queries=int(rec["min_queries"]),
                mean_queries=float(rec["mean_queries"]),
                max_queries=int(rec["max_queries"]),
                bound=int(rec["bound"]),
                bound_respected=rec["bound_respected"] == "True",
            )
        )
    return out
