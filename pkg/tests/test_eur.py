import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wehrl_eur import eur
from wehrl_eur import symplectic as sp
from wehrl_eur.errors import DomainError, PreconditionError

LN2 = math.log(2.0)
LN4 = math.log(4.0)
# reference values computed with mpmath at 30 digits
COND_03 = 0.523248143764547836516807224935
LN_43_16 = 0.988611393453780795
GAP_03 = 0.011388606546219205
COSH_03 = 1.453974643143015
SUM_03 = 1.476751856235452
LN_1P_EM2 = 0.126928011042972


# --- bounds --------------------------------------------------------------------


def test_bipartite_bound_examples():
    assert eur.bipartite_bound(0.0, 1) == pytest.approx(LN2, abs=1e-15)
    assert eur.bipartite_bound(COND_03, 1) == pytest.approx(LN_43_16, abs=1e-14)
    assert 0 < eur.bipartite_bound(-700.0, 1) < 1e-300
    assert eur.bipartite_bound(800.0, 2) == pytest.approx(800.0 + 2 * math.log1p(math.exp(-400.0)))


@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(1, 4))
def test_bipartite_bound_increasing(s1, s2, M):
    lo, hi = sorted((s1, s2))
    assert eur.bipartite_bound(lo, M) <= eur.bipartite_bound(hi, M)
    assert eur.bipartite_bound(lo, M) > 0


def test_unconditioned_bound_examples():
    assert eur.unconditioned_bound(0.0, 1) == pytest.approx(1.0, abs=1e-15)
    assert eur.unconditioned_bound(2 * LN2, 1) == pytest.approx(1 + LN2, abs=1e-12)
    with pytest.raises(DomainError):
        eur.unconditioned_bound(-0.1)


def test_unconditioned_dominates_bipartite():
    for M in (1, 2, 3):
        for S in np.linspace(0.0, 5.0, 101):
            assert eur.unconditioned_bound(S, M) >= eur.bipartite_bound(S, M)


@given(st.floats(-30, 30), st.integers(1, 3))
def test_cosh_bound_sandwich(s, M):
    c = eur.cosh_bound(s, M)
    assert c == pytest.approx(M * math.log(2 + 2 * math.cosh(s / M)), rel=1e-12)
    assert c >= M * LN4 - 1e-12
    # the bound equals bipartite(s) + bipartite(-s)
    assert c == pytest.approx(eur.bipartite_bound(s, M) + eur.bipartite_bound(-s, M), rel=1e-12, abs=1e-12)


def test_cosh_bound_no_overflow():
    assert eur.cosh_bound(2000.0, 1) == pytest.approx(2000.0)


# --- verification -----------------------------------------------------------------


def test_verify_bipartite_examples():
    rec = eur.verify_bipartite(sp.optimal_sequence_state(0.0, 3.0))
    assert rec.S_AB_cond == pytest.approx(COND_03, abs=1e-12)
    assert rec.S_Z_given_B == pytest.approx(1.0, abs=1e-12)
    assert rec.bound == pytest.approx(LN_43_16, abs=1e-12)
    assert rec.gap == pytest.approx(GAP_03, abs=1e-12)
    assert rec.passed

    rec = eur.verify_bipartite(sp.vacuum(sp.ModePartition.of(A=1, B=1)))
    assert rec.S_AB_cond == pytest.approx(0.0, abs=1e-12)
    assert rec.gap == pytest.approx(1 - LN2, abs=1e-12)


def test_record_serialization():
    rec = eur.verify_bipartite(sp.two_mode_squeezed(2.0), family="tmsv", params={"a": 2.0}, seed=3)
    d = json.loads(json.dumps(rec.to_dict()))
    assert d["seed"] == 3 and d["pass"] is True
    text = eur.records_to_csv([rec])
    rows = eur.records_from_csv(text)
    assert list(rows[0].keys()) == list(eur.CSV_COLUMNS)
    assert float(rows[0]["S_Z_given_B"]) == rec.S_Z_given_B
    doc = json.loads(eur.report_json([rec], {"seed": 3}))
    assert doc["summary"]["passed"] == 1


def test_verify_tripartite_examples():
    rec = eur.verify_tripartite(sp.optimal_sequence_state(0.0, 3.0), purify=True)
    assert rec.sum == pytest.approx(SUM_03, abs=1e-10)
    assert rec.cosh_bound == pytest.approx(COSH_03, abs=1e-12)
    assert rec.ln4_bound == pytest.approx(LN4)
    assert rec.route_gap <= 1e-6
    assert rec.passed

    rec = eur.verify_tripartite(sp.vacuum(sp.ModePartition.of(A=1, B=1)), purify=True)
    assert rec.sum == pytest.approx(2.0, abs=1e-10)


def test_verify_tripartite_needs_purity():
    with pytest.raises(PreconditionError):
        eur.verify_tripartite(sp.optimal_sequence_state(0.0, 3.0))
    pure = sp.purification(sp.optimal_sequence_state(0.0, 3.0))
    assert eur.verify_tripartite(pure).passed


def test_tripartite_csv_columns():
    text = eur.records_to_csv(eur.tripartite_sweep([1.0, 3.0]))
    rows = eur.records_from_csv(text)
    assert list(rows[0].keys()) == list(eur.TRI_CSV_COLUMNS)


# --- random suites -----------------------------------------------------------------


def test_random_suite_is_deterministic():
    a = [r.S_Z_given_B for r in eur.bipartite_suite(5, 1, 1, seed=9)]
    b = [r.S_Z_given_B for r in eur.bipartite_suite(5, 1, 1, seed=9)]
    assert a == b


@pytest.mark.parametrize("modes", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_bipartite_suite_small(modes):
    recs = eur.bipartite_suite(100, *modes, seed=123)
    assert all(r.gap >= -1e-9 for r in recs)
    summary = eur.suite_summary(recs)
    assert summary["failed"] == 0 and len(summary["seeds"]) == 100


def test_tripartite_route_agreement_100_states():
    recs = eur.tripartite_suite(100, 1, 2, seed=5)
    assert max(r.route_gap for r in recs) <= 1e-6
    assert all(r.passed for r in recs)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 8), st.integers(1, 2))
def test_thm5_family_satisfies_bound(s, log_a, M):
    a = math.exp(log_a)
    rec = eur.verify_bipartite(sp.optimal_sequence_state(s, a, M))
    assert rec.gap >= -1e-9
    k = math.exp(s / M) + 1
    expect_cond = M * sp.g((k * a + k - a - 1) / 2) - M * sp.g((a - 1) / 2)
    expect_zb = M * math.log(k * (a + 1) / 2) + M - M * sp.g((a - 1) / 2)
    assert rec.S_AB_cond == pytest.approx(expect_cond, abs=1e-8 * max(1.0, a))
    assert rec.S_Z_given_B == pytest.approx(expect_zb, abs=1e-8 * max(1.0, a))


# --- sweeps ----------------------------------------------------------------------------


def test_saturation_sweep_a1():
    rec = eur.saturation_sweep(0.0, [1.0])[0]
    # a = 1, kappa = 2: nu_+ = 3/2 so S(A|B) = g(1) = 2 ln 2
    assert rec.S_AB_cond == pytest.approx(2 * LN2, abs=1e-12)
    assert rec.S_Z_given_B == pytest.approx(1 + LN2, abs=1e-12)


def test_saturation_sweep_large_a():
    rec = eur.saturation_sweep(0.0, [1e3])[-1]
    assert abs(rec.S_AB_cond) <= 5e-3
    assert abs(rec.S_Z_given_B - LN2) <= 5e-3
    rec = eur.saturation_sweep(-2.0, [1e3])[-1]
    assert rec.S_Z_given_B == pytest.approx(LN_1P_EM2, abs=5e-3)


@pytest.mark.parametrize("s", [-2.0, -1.0, 0.0, 1.0, 2.0])
def test_saturation_sweep_tail_decreases(s):
    recs = eur.saturation_sweep(s, [10.0, 50.0, 100.0, 500.0, 1000.0])
    dist_s = [abs(r.S_AB_cond - s) for r in recs]
    dist_b = [abs(r.S_Z_given_B - eur.bipartite_bound(s)) for r in recs]
    assert all(y < x for x, y in zip(dist_s, dist_s[1:]))
    assert all(y < x for x, y in zip(dist_b, dist_b[1:]))
    assert all(r.passed for r in recs)


def test_saturation_sweep_validates_input():
    with pytest.raises(DomainError):
        eur.saturation_sweep(0.0, [3.0, 2.0])
    with pytest.raises(DomainError):
        eur.saturation_sweep(0.0, [0.5])


def test_tripartite_sweep():
    recs = eur.tripartite_sweep([1.0, 3.0, 10.0, 100.0, 1000.0])
    assert recs[0].sum == pytest.approx(2.0, abs=1e-10)
    assert abs(recs[-1].sum - LN4) <= 1e-2
    sums = [r.sum for r in recs]
    assert all(y <= x for x, y in zip(sums, sums[1:]))
    assert all(r.sum >= LN4 - 1e-9 for r in recs)


# --- witness -------------------------------------------------------------------------------


def test_witness_examples():
    assert eur.witness(sp.optimal_sequence_state(-2.0, 1e3)) == "entangled"
    assert eur.witness(sp.two_mode_squeezed(3.0)) == "entangled"
    prod = sp.product(sp.thermal(1.5, "A"), sp.thermal(0.7, "B"))
    assert eur.witness(prod) == "inconclusive"


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_witness_never_flags_products(seed):
    a = sp.random_state(1, seed, partition=sp.ModePartition.of(A=1))
    b = sp.random_state(1, seed + 1, partition=sp.ModePartition.of(B=1))
    assert eur.witness(sp.product(a, b)) == "inconclusive"


def test_witness_agrees_with_ppt():
    for _, st_ in eur.random_bipartite_states(300, 1, 1, seed=17):
        if eur.witness(st_) == "entangled":
            assert eur.ppt_violated(st_)
    for s in (-2.0, -1.0, 0.0):
        for a in (10.0, 1e3):
            st_ = sp.optimal_sequence_state(s, a)
            if eur.witness(st_) == "entangled":
                assert eur.ppt_violated(st_)


# --- minimization ------------------------------------------------------------------------------


def test_golden_section_quadratic():
    x, fx, evals, exhausted = eur.golden_section(lambda t: (t - 0.3) ** 2, -1.0, 2.0)
    assert x == pytest.approx(0.3, abs=1e-6) and not exhausted
    _, _, evals, exhausted = eur.golden_section(lambda t: (t - 0.3) ** 2, -1.0, 2.0, max_evals=5)
    assert exhausted and evals == 5


def test_minimize_gap_thm5_family():
    big = eur.minimize_gap(0.0, 1, "thm5-family", a_max=1e3)
    small = eur.minimize_gap(0.0, 1, "thm5-family", a_max=10.0)
    assert 0 < big.value <= 5e-3
    assert small.value > big.value
    assert small.value == pytest.approx(eur.thm5_gap(0.0, 10.0), rel=1e-6)
    assert small.argmin["a"] == pytest.approx(10.0, rel=1e-6)


def test_minimize_gap_random_family():
    res = eur.minimize_gap(0.0, 1, "random-family", max_evals=300, seed=1)
    assert res.evaluations == 300 and res.budget_exhausted
    assert res.min_gap_seen >= -1e-9
    with pytest.raises(DomainError):
        eur.minimize_gap(0.0, 1, "nope")
