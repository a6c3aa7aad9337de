"""Bounds, verification suites and saturation sweeps for the conditional Wehrl uncertainty relations."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, PreconditionError
from .symplectic import (
    GaussianState,
    ModePartition,
    _as_labels,
    conditional_entropy,
    g_inverse,
    n_parameters,
    optimal_sequence_state,
    partial_transpose,
    purification,
    random_state,
    state_from_parameters,
    symplectic_eigenvalues,
)
from .wehrl import GAUSSIAN, conditional_wehrl_gaussian

DEFAULT_A_VALUES = (1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1000.0)
DEFAULT_S_VALUES = (-2.0, -1.0, 0.0, 1.0, 2.0)
GAUSSIAN_TOL = 1e-9
PURITY_TOL = 1e-6

CSV_COLUMNS = ("family", "s", "a", "M", "S_AB_cond", "S_Z_given_B", "bound", "gap", "method", "error_budget", "pass")
TRI_CSV_COLUMNS = ("family", "s", "a", "M", "S_AB_cond", "S_Z_given_B", "S_Z_given_C", "sum", "cosh_bound",
                   "ln4_bound", "method", "error_budget", "pass")


def bipartite_bound(s: float, M: int = 1) -> float:
    """M ln(exp(s/M) + 1), computed without overflow for large |s|."""
    x = s / M
    return M * float(np.logaddexp(x, 0.0))


def unconditioned_bound(S_A: float, M: int = 1) -> float:
    """M ln(g^-1(S_A/M) + 1) + M, the optimal memoryless Wehrl bound."""
    if S_A < 0:
        raise DomainError(f"entropy must be >= 0, got {S_A}")
    return M * math.log1p(g_inverse(S_A / M)) + M


def cosh_bound(s: float, M: int = 1) -> float:
    """M ln(2 + 2 cosh(s/M)), the intermediate tripartite bound."""
    x = abs(s / M)
    # 2 + 2 cosh x = e^x (1 + e^-x)^2
    return M * (x + 2.0 * math.log1p(math.exp(-x)))


def _tolerance(budget: float) -> float:
    return max(GAUSSIAN_TOL, budget)


@dataclass
class VerificationRecord:
    family: str
    params: dict
    M: int
    S_AB_cond: float
    S_Z_given_B: float
    bound: float
    method: str = GAUSSIAN
    error_budget: float = GAUSSIAN_TOL
    seed: int | None = None

    @property
    def gap(self) -> float:
        return float(self.S_Z_given_B - self.bound)

    @property
    def passed(self) -> bool:
        return bool(self.gap >= -_tolerance(self.error_budget))

    def row(self) -> dict:
        return {
            "family": self.family,
            "s": self.params.get("s", ""),
            "a": self.params.get("a", ""),
            "M": self.M,
            "S_AB_cond": self.S_AB_cond,
            "S_Z_given_B": self.S_Z_given_B,
            "bound": self.bound,
            "gap": self.gap,
            "method": self.method,
            "error_budget": self.error_budget,
            "pass": self.passed,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap"] = self.gap
        d["pass"] = self.passed
        return d


@dataclass
class TripartiteRecord:
    family: str
    params: dict
    M: int
    S_AB_cond: float
    S_Z_given_B: float
    S_Z_given_C: float
    S_Z_given_C_identity: float
    method: str = GAUSSIAN
    error_budget: float = GAUSSIAN_TOL
    seed: int | None = None

    @property
    def sum(self) -> float:
        return self.S_Z_given_B + self.S_Z_given_C

    @property
    def cosh_bound(self) -> float:
        return cosh_bound(self.S_AB_cond, self.M)

    @property
    def ln4_bound(self) -> float:
        return self.M * math.log(4.0)

    @property
    def route_gap(self) -> float:
        return abs(self.S_Z_given_C - self.S_Z_given_C_identity)

    def row(self) -> dict:
        return {
            "family": self.family,
            "s": self.params.get("s", ""),
            "a": self.params.get("a", ""),
            "M": self.M,
            "S_AB_cond": self.S_AB_cond,
            "S_Z_given_B": self.S_Z_given_B,
            "S_Z_given_C": self.S_Z_given_C,
            "sum": self.sum,
            "cosh_bound": self.cosh_bound,
            "ln4_bound": self.ln4_bound,
            "method": self.method,
            "error_budget": self.error_budget,
            "pass": self.passed,
        }

    @property
    def passed(self) -> bool:
        tol = _tolerance(self.error_budget)
        return bool(self.sum >= self.cosh_bound - tol and self.cosh_bound >= self.ln4_bound - tol
                    and self.route_gap <= PURITY_TOL)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(sum=self.sum, cosh_bound=self.cosh_bound, ln4_bound=self.ln4_bound,
                 route_gap=self.route_gap, **{"pass": self.passed})
        return d


def _modes(state: GaussianState, labels) -> int:
    return sum(state.partition.modes(lab) for lab in _as_labels(labels))


def verify_bipartite(state: GaussianState, A="A", B="B", *, family: str = "custom", params: dict | None = None,
                     seed: int | None = None) -> VerificationRecord:
    """Evaluate S(Z|B) against M ln(exp(S(A|B)/M) + 1) on the Gaussian closed-form route."""
    A, B = _as_labels(A), _as_labels(B)
    M = _modes(state, A)
    s_cond = conditional_entropy(state, A, B)
    bundle = conditional_wehrl_gaussian(state, A, B)
    return VerificationRecord(family, dict(params or {}), M, float(s_cond), float(bundle.S_Z_given_B),
                              bipartite_bound(s_cond, M),
                              bundle.method, bundle.error_budget, seed)


def is_pure(state: GaussianState, tol: float = PURITY_TOL) -> bool:
    return bool(np.all(np.abs(symplectic_eigenvalues(state) - 0.5) <= tol))


def verify_tripartite(state: GaussianState, A="A", B="B", C="C", *, purify: bool = False, family: str = "custom",
                      params: dict | None = None, seed: int | None = None) -> TripartiteRecord:
    """Check S(Z|B) + S(Z|C) >= M ln(2 + 2 cosh(S(A|B)/M)) >= M ln 4 on a pure ABC state.

    With ``purify=True`` a mixed state on A and B is first purified into C.
    S(Z|C) is computed directly and through S(Z|B) - S(A|B).
    """
    A, B, C = _as_labels(A), _as_labels(B), _as_labels(C)
    if purify:
        labels = A + B
        if set(state.partition.labels) != set(labels):
            raise PreconditionError("purify=True expects a state on exactly A and B")
        if len(C) != 1:
            raise PreconditionError("purification adds a single subsystem C")
        state = purification(state, label=C[0])
    if not is_pure(state):
        raise PreconditionError("tripartite verification needs a pure global state (pass purify=True)")
    M = _modes(state, A)
    s_ab = conditional_entropy(state, A, B)
    zb = conditional_wehrl_gaussian(state, A, B).S_Z_given_B
    zc = conditional_wehrl_gaussian(state, A, C).S_Z_given_B
    return TripartiteRecord(family, dict(params or {}), M, float(s_ab), float(zb), float(zc), float(zb - s_ab),
                            GAUSSIAN, GAUSSIAN_TOL, seed)


def saturation_sweep(s: float, a_values: Sequence[float] = DEFAULT_A_VALUES, M: int = 1) -> list[VerificationRecord]:
    """Bipartite records along the optimal family at fixed s and increasing a."""
    a_values = list(a_values)
    if any(x < 1 for x in a_values) or any(y < x for x, y in zip(a_values, a_values[1:])):
        raise DomainError("a_values must be increasing and >= 1")
    return [verify_bipartite(optimal_sequence_state(s, a, M), family="thm5", params={"s": s, "a": a}) for a in a_values]


def tripartite_sweep(a_values: Sequence[float] = DEFAULT_A_VALUES, M: int = 1) -> list[TripartiteRecord]:
    """Tripartite records on purifications of the s = 0 optimal family."""
    a_values = list(a_values)
    if any(y < x for x, y in zip(a_values, a_values[1:])):
        raise DomainError("a_values must be increasing")
    return [verify_tripartite(optimal_sequence_state(0.0, a, M), purify=True, family="thm6", params={"s": 0.0, "a": a})
            for a in a_values]


def witness(state: GaussianState, A="A", B="B") -> str:
    """'entangled' if S(Z|B) < M ln 2 beyond the error budget, else 'inconclusive'."""
    A, B = _as_labels(A), _as_labels(B)
    M = _modes(state, A)
    bundle = conditional_wehrl_gaussian(state, A, B)
    if bundle.S_Z_given_B < M * math.log(2.0) - _tolerance(bundle.error_budget):
        return "entangled"
    return "inconclusive"


def ppt_violated(state: GaussianState, A="A", B="B") -> bool:
    """Gaussian partial-transpose test; necessary and sufficient for entanglement of 1+1 modes."""
    pt = partial_transpose(state, B)
    return bool(symplectic_eigenvalues(pt)[-1] < 0.5 - GAUSSIAN_TOL)


# ---------------------------------------------------------------------------
# random suites


def random_bipartite_states(n: int, modes_a: int, modes_b: int, seed: int = 0, max_nu: float = 3.0,
                            max_squeeze: float = 1.0) -> Iterable[tuple[int, GaussianState]]:
    """Yield (seed, state) pairs; per-state seeds are derived deterministically from ``seed``."""
    part = ModePartition.of(A=modes_a, B=modes_b)
    seeds = np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32)
    for sd in seeds:
        sd = int(sd)
        yield sd, random_state(modes_a + modes_b, sd, max_nu, max_squeeze, partition=part)


def bipartite_suite(n: int, modes_a: int, modes_b: int, seed: int = 0, **kwargs) -> list[VerificationRecord]:
    family = f"random-{modes_a}+{modes_b}"
    return [verify_bipartite(st, family=family, seed=sd) for sd, st in random_bipartite_states(n, modes_a, modes_b, seed, **kwargs)]


def tripartite_suite(n: int, modes_a: int, modes_b: int, seed: int = 0, **kwargs) -> list[TripartiteRecord]:
    family = f"random-{modes_a}+{modes_b}-purified"
    return [verify_tripartite(st, purify=True, family=family, seed=sd)
            for sd, st in random_bipartite_states(n, modes_a, modes_b, seed, **kwargs)]


def suite_summary(records: Sequence) -> dict:
    gaps = [r.gap if isinstance(r, VerificationRecord) else r.sum - r.cosh_bound for r in records]
    return {
        "count": len(records),
        "passed": sum(bool(r.passed) for r in records),
        "failed": sum(not r.passed for r in records),
        "worst_gap": min(gaps) if gaps else None,
        "seeds": [r.seed for r in records if r.seed is not None],
    }


# ---------------------------------------------------------------------------
# gap minimization


@dataclass
class GapMinimum:
    value: float
    argmin: dict
    evaluations: int
    budget_exhausted: bool
    min_gap_seen: float
    history: list = field(default_factory=list, repr=False)


def thm5_gap(s: float, a: float, M: int = 1) -> float:
    return verify_bipartite(optimal_sequence_state(s, a, M)).gap


def golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_evals: int = 200):
    """Bounded golden-section search; returns (x, f(x), evaluations, exhausted)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    best = min((fc, c), (fd, d))
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)):
        if evals >= max_evals:
            return best[1], best[0], evals, True
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
        evals += 1
    for x in (lo, hi):
        fx = f(x)
        evals += 1
        best = min(best, (fx, x))
    return best[1], best[0], evals, False


def minimize_gap(s: float, M: int = 1, family: str = "thm5-family", *, a_max: float = 1e3, max_evals: int = 2000,
                 seed: int = 0, modes: tuple[int, int] = (1, 1), penalty: float = 100.0) -> GapMinimum:
    """Numerically search for the infimum of S(Z|B) - bound over a state family.

    ``thm5-family``: golden-section over log(a) on [0, log(a_max)].
    ``random-family``: Nelder-Mead over the parameters of
    :func:`state_from_parameters`, penalizing (S(A|B) - s)^2.
    """
    if family == "thm5-family":
        def f(t):
            return thm5_gap(s, math.exp(t), M)

        t, val, evals, exhausted = golden_section(f, 0.0, math.log(a_max), max_evals=max_evals)
        return GapMinimum(val, {"a": math.exp(t)}, evals, exhausted, val)

    if family != "random-family":
        raise DomainError(f"unknown family {family!r}")
    ma, mb = modes
    part = ModePartition.of(A=ma, B=mb)
    n = ma + mb
    rng = np.random.default_rng(seed)
    seen = {"min_gap": math.inf, "evals": 0, "best": (math.inf, None)}

    def objective(p):
        st = state_from_parameters(p, part)
        rec = verify_bipartite(st)
        seen["evals"] += 1
        seen["min_gap"] = min(seen["min_gap"], rec.gap)
        val = rec.gap + penalty * (rec.S_AB_cond - s) ** 2
        if val < seen["best"][0]:
            seen["best"] = (val, p.copy())
        return val

    restarts = 0
    while seen["evals"] < max_evals:
        x0 = rng.normal(0.0, 0.7, size=n_parameters(n))
        minimize(objective, x0, method="Nelder-Mead",
                 options={"maxfev": max_evals - seen["evals"], "xatol": 1e-8, "fatol": 1e-12})
        restarts += 1
    best_val, best_p = seen["best"]
    st = state_from_parameters(best_p, part)
    rec = verify_bipartite(st)
    return GapMinimum(rec.gap, {"params": [float(v) for v in best_p], "S_AB_cond": rec.S_AB_cond, "restarts": restarts},
                      seen["evals"], True, float(seen["min_gap"]))


# ---------------------------------------------------------------------------
# serialization


def records_to_csv(records: Sequence) -> str:
    """One row per record; tripartite records get their own column set."""
    tri = bool(records) and isinstance(records[0], TripartiteRecord)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRI_CSV_COLUMNS if tri else CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.row().items()})
    return buf.getvalue()


def records_from_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def report_json(records: Sequence, config: dict | None = None, **extra) -> str:
    doc = {"config": config or {}, "summary": suite_summary(records), "records": [r.to_dict() for r in records]}
    doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
