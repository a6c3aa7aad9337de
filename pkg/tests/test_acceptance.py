"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``ACCEPTANCE <id> PASS|FAIL ...`` line (visible even
under output capture) before asserting.
"""

import math
import time
import timeit

import numpy as np
import pytest

from wehrl_eur import eur, fock as fk, symplectic as sp, wehrl as wh
from wehrl_eur.cli import oracle_case
from wehrl_eur.quadrature import build_grid

LN2 = math.log(2.0)
LN4 = math.log(4.0)
COND_03 = 0.523248143764547836516807224935  # 3 ln 3 - 4 ln 2, mpmath


@pytest.fixture
def report(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid:<5} {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def test_criterion_01_closed_form(report):
    st = sp.optimal_sequence_state(0.0, 3.0, 1)
    nu = sp.symplectic_eigenvalues(st)
    cond = sp.conditional_entropy(st, "A", "B")
    zb = wh.conditional_wehrl_gaussian(st, "A", "B").S_Z_given_B

    def work():
        s = sp.optimal_sequence_state(0.0, 3.0, 1)
        sp.symplectic_eigenvalues(s)
        sp.conditional_entropy(s, "A", "B")
        wh.conditional_wehrl_gaussian(s, "A", "B")

    work()
    runtime = min(timeit.repeat(work, number=1, repeat=20))
    ok_nu = abs(nu[0] - 2.5) <= 1e-12 and abs(nu[1] - 0.5) <= 1e-12
    ok = ok_nu and abs(cond - COND_03) <= 1e-12 and abs(zb - 1.0) <= 1e-12 and runtime < 1e-3
    report("1", ok, f"nu={nu.tolist()} |S(A|B)-(3ln3-4ln2)|={abs(cond - COND_03):.1e} "
                    f"|S(Z|B)-1|={abs(zb - 1):.1e} runtime={runtime * 1e3:.3f} ms")
    assert ok


@pytest.mark.parametrize("M", [1, 2])
@pytest.mark.parametrize("s", [-2.0, 0.0, 2.0])
def test_criterion_02_limits(report, s, M):
    rec = eur.saturation_sweep(s, [1e3], M)[-1]
    d_cond = abs(rec.S_AB_cond - s)
    d_zb = abs(rec.S_Z_given_B - M * math.log(math.exp(s / M) + 1))
    ok = d_cond <= 5e-3 and d_zb <= 5e-3
    report(f"2[s={s:g},M={M}]", ok, f"a=1e3 |S(A|B)-s|={d_cond:.4e} |S(Z|B)-M ln(e^(s/M)+1)|={d_zb:.4e} (tol 5e-3)")
    assert ok


def test_criterion_02_runtime(report):
    t0 = time.perf_counter()
    for s in (-2.0, 0.0, 2.0):
        for M in (1, 2):
            eur.saturation_sweep(s, [1e3], M)
    runtime = time.perf_counter() - t0
    ok = runtime < 1.0
    report("2[time]", ok, f"full (s, M) grid in {runtime:.3f} s (limit 1 s)")
    assert ok


CONFIGS = [(1, 1), (1, 2), (2, 1)]


@pytest.fixture(scope="module")
def suite_states():
    return {cfg: list(eur.random_bipartite_states(1000, *cfg, seed=2024)) for cfg in CONFIGS}


def test_criterion_03_bipartite_suite(report, suite_states):
    t0 = time.perf_counter()
    worst, bad = math.inf, 0
    for cfg in CONFIGS:
        for sd, st in suite_states[cfg]:
            rec = eur.verify_bipartite(st, family=f"random-{cfg[0]}+{cfg[1]}", seed=sd)
            worst = min(worst, rec.gap)
            bad += rec.gap < -1e-9
    runtime = time.perf_counter() - t0
    ok = bad == 0 and runtime < 30
    report("3", ok, f"3x1000 random states, failures={bad}, min gap={worst:.4e}, runtime={runtime:.2f} s")
    assert ok


def test_criterion_04_tripartite_sandwich(report, suite_states):
    bad, worst_route, worst_sum = 0, 0.0, math.inf
    for cfg in CONFIGS:
        for sd, st in suite_states[cfg]:
            rec = eur.verify_tripartite(st, purify=True, seed=sd)
            ok_chain = rec.sum - rec.cosh_bound >= -1e-9 and rec.cosh_bound - rec.ln4_bound >= -1e-9
            ok_route = rec.route_gap <= 1e-6
            bad += not (ok_chain and ok_route)
            worst_route = max(worst_route, rec.route_gap)
            worst_sum = min(worst_sum, rec.sum - rec.cosh_bound)
    ok = bad == 0
    report("4", ok, f"3000 purified states, failures={bad}, min(sum-cosh)={worst_sum:.4e}, "
                    f"max route gap={worst_route:.1e}")
    assert ok


def test_criterion_05_tripartite_limit(report):
    rec = eur.tripartite_sweep([1e3], 1)[-1]
    d = abs(rec.sum - LN4)
    ok = d <= 1e-2
    report("5", ok, f"a=1e3 |S(Z|B)+S(Z|C)-ln4|={d:.3e} (tol 1e-2)")
    assert ok


def test_criterion_06_oracle(report):
    t0 = time.perf_counter()
    worst_diff, worst_norm, lines = 0.0, 0.0, []
    for a in (1.5, 3.0):
        for kappa in (1.0, 2.0):
            c = oracle_case(a, kappa, cutoff=40, radial=24, angular=24)
            worst_diff = max(worst_diff, c["difference"])
            worst_norm = max(worst_norm, c["husimi_norm_error"])
            lines.append(f"(a={a:g},k={kappa:g}):{c['difference']:.1e}")
    runtime = time.perf_counter() - t0
    ok = worst_diff <= 2e-3 and worst_norm <= 1e-6 and runtime < 120
    report("6", ok, f"max |fock-gaussian|={worst_diff:.2e} max norm err={worst_norm:.1e} "
                    f"runtime={runtime:.1f} s [{' '.join(lines)}]")
    assert ok


def test_criterion_07_berezin_lieb(report):
    rng = np.random.default_rng(77)
    grid = build_grid(1, 24, 24, 1.0)
    shapes = [(c, aux) for c in (1, 2, 3) for aux in (1, 2, 3) if (c + 1) * aux <= 12]
    bad, worst = 0, math.inf
    for i in range(200):
        cutoff, aux = shapes[i % len(shapes)]
        space = fk.FockSpace(1, cutoff, aux)
        X = fk.FockOperator(space, fk.random_contraction(space.dim, rng))
        chk = fk.berezin_lieb_check(X, fk.random_concave(rng), grid)
        bad += not chk.holds
        worst = min(worst, chk.gap + chk.tolerance)
    vac = fk.fock_basis_state(0, fk.FockSpace(1, 20)).density()
    chk0 = fk.berezin_lieb_check(vac, fk.x_one_minus_x, grid)
    ok_analytic = abs(chk0.lhs - 0.5) <= 1e-6 and abs(chk0.rhs) <= 1e-6
    ok = bad == 0 and ok_analytic
    report("7", ok, f"200 instances, failures={bad}, min(lhs-rhs+eps)={worst:.3e}; "
                    f"vacuum case lhs={chk0.lhs:.9f} rhs={chk0.rhs:.1e}")
    assert ok


def test_criterion_08_jensen(report):
    rng = np.random.default_rng(88)
    bad, worst_eq = 0, 0.0
    for _ in range(200):
        dim = int(rng.integers(1, 9))
        count = dim + int(rng.integers(0, 10))
        frame = fk.random_tight_frame(dim, count, rng)
        a = rng.uniform(0, 1, count)
        f = fk.random_concave(rng) if rng.uniform() < 0.5 else fk.neg_xlogx
        bad += not fk.jensen_check(frame, a, f, tol=1e-8).holds
        U, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        b = rng.uniform(0, 1, dim)
        eq = fk.jensen_check(U, b, f)
        worst_eq = max(worst_eq, abs(eq.lhs - eq.rhs))
    ok = bad == 0 and worst_eq <= 1e-10
    report("8", ok, f"200 frames, failures={bad}, max orthonormal |lhs-rhs|={worst_eq:.1e}")
    assert ok


def test_criterion_09_unconditioned_bounds(report):
    bad, worst = 0, math.inf
    for seed in range(500):
        st = sp.random_state(1, seed, 4.0, 1.0)
        w = wh.wehrl_entropy_gaussian(st)
        ub = eur.unconditioned_bound(sp.von_neumann_entropy(st), 1)
        worst = min(worst, w - ub)
        bad += (w - 1.0 < -1e-9) or (w - ub < -1e-9)
    dominance = all(eur.unconditioned_bound(S, M) >= eur.bipartite_bound(S, M)
                    for S in np.linspace(0.0, 5.0, 501) for M in (1, 2, 3))
    ok = bad == 0 and dominance
    report("9", ok, f"500 single-mode states, failures={bad}, min(Wehrl-bound)={worst:.3e}; "
                    f"dominance on S in [0,5]: {dominance}")
    assert ok


def test_criterion_10_witness(report):
    flagged = eur.witness(sp.optimal_sequence_state(-2.0, 1e3, 1))
    verdicts = []
    for seed in range(100):
        a = sp.random_state(1, 2 * seed, 4.0, 1.0, partition=sp.ModePartition.of(A=1))
        b = sp.random_state(1, 2 * seed + 1, 4.0, 1.0, partition=sp.ModePartition.of(B=1))
        verdicts.append(eur.witness(sp.product(a, b)))
    n_inc = verdicts.count("inconclusive")
    ok = flagged == "entangled" and n_inc == 100
    report("10", ok, f"sigma^(-2,1e3) -> {flagged}; product states inconclusive {n_inc}/100")
    assert ok


def test_criterion_11_amplifier_algebra(report):
    rng = np.random.default_rng(11)
    worst, ident = 0.0, True
    for seed in range(100):
        st = sp.random_state(2, seed, 3.0, 1.0, partition=sp.ModePartition.of(A=1, B=1))
        k1, k2 = rng.uniform(1.0, 3.0, 2)
        lhs = sp.amplifier(sp.amplifier(st, "A", k1), "A", k2).sigma
        rhs = sp.amplifier(st, "A", k1 * k2).sigma
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        ident &= bool(np.array_equal(sp.amplifier(st, "A", 1.0).sigma, st.sigma))
    ok = worst <= 1e-12 and ident
    report("11", ok, f"100 states, max |A_k2 A_k1 - A_k1k2|={worst:.1e}; kappa=1 identity exact: {ident}")
    assert ok
