import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import crandn, hilbert_op, random_ritt
from rittlab.admissibility import admissibility_constant, admissibility_norm, square_function_norm
from rittlab.linalg import NormedSpace, OperatorSpec, mean_ergodic_decompose, op_norm, vec_norm
from rittlab.rademacher import (
    disc_family_r_bound,
    lq_square_function,
    lq_square_function_constant,
    r_admissibility_constant,
    r_bound_estimate,
    r_ritt_check,
    r_square_function_constant,
    rad_norm,
    sampled_signs,
    sign_patterns,
    sf_Ta,
)
from rittlab.ritt import certify_ritt
from rittlab.zoo import get_entry, standard_observations

HILBERT_TOL = 1e-12
MC_RTOL = 0.02
REGRESSION_RTOL = 1e-3
P_VALUES = [1.0, 1.5, 3.0, math.inf]

seeds = st.integers(0, 2**31 - 1)

# first converged runs (seed 0, observation = range projection Q)
BASELINE = {
    "lazy_markov_l1_6": {"r_admissibility": 2.0329787926436818, "r_powers": 1.6646168568828674,
                         "r_differences": 0.9377980114583735},
    "lazy_markov_l3_6": {"lq": 1.422487829135946, "r_admissibility": 1.4279684104865407},
}


def _vectors(seed, k, d):
    return crandn(np.random.default_rng(seed), k, d)


# --- sign patterns ---------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_sign_patterns(n):
    E = sign_patterns(n)
    assert E.shape == (2 ** (n - 1), n)
    assert np.all(E[:, 0] == 1)
    # together with their negatives the rows are every pattern exactly once
    full = {tuple(r) for r in np.vstack([E, -E]).astype(int)}
    assert len(full) == 2**n


def test_sampled_signs_deterministic():
    a, b = sampled_signs(7, 100, 3), sampled_signs(7, 100, 3)
    assert np.array_equal(a, b) and set(np.unique(a)) <= {-1.0, 1.0}


# --- rad_norm ---------------------------------------------------------------------

def test_rad_norm_examples():
    y = np.array([[3.0, 4.0]])
    assert abs(rad_norm(y, NormedSpace.lp(2, 1.0)).value - 7.0) < 1e-14
    assert abs(rad_norm(np.eye(2), NormedSpace.hilbert(2)).value - math.sqrt(2)) < 1e-15
    r = rad_norm(np.array([[1.0], [1.0]]), NormedSpace.lp(1, 1.0))
    assert abs(r.value - math.sqrt(2)) < 1e-15 and r.method == "exhaustive"
    assert rad_norm(np.zeros((0, 3)), NormedSpace.hilbert(3)).value == 0.0


@given(seeds, st.integers(1, 12), st.integers(1, 5))
def test_hilbert_collapse(seed, k, d):
    Y = _vectors(seed, k, d)
    ex = rad_norm(Y, NormedSpace.hilbert(d), "exhaustive").value
    assert abs(ex - math.sqrt((np.abs(Y) ** 2).sum())) <= HILBERT_TOL * max(1.0, ex)


@given(seeds, st.integers(1, 10), st.integers(1, 4), st.sampled_from(P_VALUES))
def test_khintchine_sandwich(seed, k, d, p):
    Y = _vectors(seed, k, d)
    norms = vec_norm(Y, p, axis=1)
    v = rad_norm(Y, NormedSpace.lp(d, p)).value
    assert norms.max() * (1 - 1e-12) <= v <= norms.sum() * (1 + 1e-12)


@given(seeds, st.integers(2, 10), st.integers(1, 4), st.sampled_from(P_VALUES))
def test_permutation_invariance(seed, k, d, p):
    Y = _vectors(seed, k, d)
    perm = np.random.default_rng(seed).permutation(k)
    X = NormedSpace.lp(d, p)
    assert abs(rad_norm(Y, X).value - rad_norm(Y[perm], X).value) <= 1e-12 * rad_norm(Y, X).value


@given(seeds, st.integers(1, 16), st.sampled_from([1.0, 3.0]))
def test_monte_carlo_close_to_exhaustive(seed, k, p):
    Y = _vectors(seed, k, 3)
    X = NormedSpace.lp(3, p)
    ex = rad_norm(Y, X, "exhaustive").value
    mc = rad_norm(Y, X, "monte_carlo", samples=2**16, seed=seed)
    assert abs(mc.value - ex) <= MC_RTOL * ex
    assert mc.samples == 2**16 and mc.confidence_note


# --- R-bounds -----------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 3.0])
def test_r_bound_singleton_is_norm(p):
    V = crandn(np.random.default_rng(4), 3, 3)
    X = NormedSpace.lp(3, p)
    est = r_bound_estimate([V], X).value
    nb = op_norm(V, X, X)
    assert nb.lower * (1 - 1e-6) <= est <= nb.upper * (1 + 1e-9)


def test_r_bound_scaled_identities_l1():
    X = NormedSpace.lp(3, 1.0)
    assert r_bound_estimate([np.eye(3), 2 * np.eye(3)], X).value >= 2.0 - 1e-12


@given(seeds, st.integers(1, 5), st.integers(1, 4))
def test_r_bound_hilbert_is_sup_norm(seed, k, d):
    rng = np.random.default_rng(seed)
    fam = [crandn(rng, d, d) for _ in range(k)]
    top = max(np.linalg.norm(V, 2) for V in fam)
    est = r_bound_estimate(fam, NormedSpace.hilbert(d)).value
    assert est <= top + 1e-10 and est >= top * (1 - 1e-10)


@given(seeds, st.integers(1, 4), st.integers(2, 3))
def test_r_bound_dominates_members(seed, k, d):
    rng = np.random.default_rng(seed)
    fam = [crandn(rng, d, d) for _ in range(k)]
    X = NormedSpace.lp(d, 3.0)
    est = r_bound_estimate(fam, X, trials=8, seed=seed).value
    assert est >= max(op_norm(V, X, X).lower for V in fam) * (1 - 1e-6)


# --- R-constants --------------------------------------------------------------------

def test_r_constants_closed_forms():
    assert abs(r_admissibility_constant(hilbert_op(np.zeros((2, 2))), None, 0.7).value - 1.0) < 1e-12
    assert abs(r_admissibility_constant(hilbert_op([[0.5]]), None, 0).value - 2 / math.sqrt(3)) < 1e-9
    assert abs(r_square_function_constant(hilbert_op(np.zeros((2, 2)))).value - 1.0) < 1e-12
    assert r_square_function_constant(hilbert_op(np.eye(2))).value == 0.0
    assert abs(r_square_function_constant(hilbert_op([[0.5]])).value - 2 / 3) < 1e-9


def test_sf_Ta_examples():
    x = np.array([1.0, 2.0j])
    assert abs(sf_Ta(hilbert_op(np.zeros((2, 2))), 1, x).value - math.sqrt(5)) < 1e-12
    assert sf_Ta(hilbert_op(np.eye(2)), 1, x).value == 0.0


@given(seeds, st.integers(1, 5), st.sampled_from(["normal", "halved"]), st.sampled_from([0.5, 1.0, 2.0]))
def test_sf_Ta_hilbert_collapse(seed, n, kind, a):
    T = hilbert_op(random_ritt(n, seed, kind))
    x = crandn(np.random.default_rng(seed), n)
    got = sf_Ta(T, a, x).value
    assert abs(got - square_function_norm(T, a, x)) <= 1e-6 * max(1.0, got)


@given(seeds, st.integers(1, 5), st.sampled_from(["normal", "halved"]))
def test_r_admissibility_hilbert_agrees(seed, n, kind):
    T = random_ritt(n, seed, kind)
    C = crandn(np.random.default_rng(seed), 2, n) @ mean_ergodic_decompose(T).range
    a = r_admissibility_constant(hilbert_op(T), C, 0).value
    b = admissibility_constant(hilbert_op(T), C, 0).value
    assert abs(a - b) <= 1e-4 * max(1.0, b)


def test_r_ritt_zero():
    rec = r_ritt_check(hilbert_op(np.zeros((2, 2))))
    assert rec["verdict"] == "R-Ritt-consistent"
    assert np.allclose(rec["powers"], 1.0) and np.allclose(rec["differences"], 1.0)


def test_r_ritt_hilbert_contraction_matches_norms():
    e = get_entry("halved_contraction_6")
    T = np.asarray(e.operator.matrix)
    rec = r_ritt_check(e.operator)
    P = [np.linalg.matrix_power(T, k) for k in range(65)]
    sup_pow = max(np.linalg.norm(A, 2) for A in P)
    sup_diff = max(k * np.linalg.norm(P[k] - P[k - 1], 2) for k in range(1, 65))
    assert rec["verdict"] == "R-Ritt-consistent"
    assert abs(rec["powers"][-1] - sup_pow) <= 1e-9 * sup_pow
    assert abs(rec["differences"][-1] - sup_diff) <= 1e-9 * sup_diff


# --- l^q square functions ------------------------------------------------------------

def test_lq_zero_operator():
    X = NormedSpace.lp(3, 3.0)
    x = np.array([1.0, -2.0, 0.5j])
    r = lq_square_function(OperatorSpec(np.zeros((3, 3)), X, "0"), None, 0, x)
    assert abs(r["value"] - vec_norm(np.abs(x), 3.0)) < 1e-14


def test_lq_rejects_endpoint_exponents():
    X = NormedSpace.lp(2, 1.0)
    with pytest.raises(ValueError):
        lq_square_function(OperatorSpec(np.zeros((2, 2)), X, "0"), None, 0, np.ones(2))


@given(seeds, st.integers(1, 5), st.sampled_from([0.0, 1.0, 2.0]))
def test_lq_hilbert_matches_admissibility_sum(seed, n, alpha):
    T = random_ritt(n, seed, "halved")
    op = hilbert_op(T)
    x = crandn(np.random.default_rng(seed), n)
    got = lq_square_function(op, None, alpha, x)["value"]
    assert abs(got - admissibility_norm(op, None, alpha, x)) <= 1e-8 * max(1.0, got)


# --- disc families --------------------------------------------------------------------

@pytest.mark.parametrize("name", ["normal_disc_4", "halved_contraction_6"])
def test_finite_r_admissibility_gives_stable_disc_family(name):
    e = get_entry(name)
    Q = standard_observations(e)["range_identity"]
    assert r_admissibility_constant(e.operator, Q, 0).finite
    assert disc_family_r_bound(e.operator, Q, 0, 0)["stabilized"]


@pytest.mark.parametrize("name", ["normal_disc_4", "lazy_markov_hilbert_6"])
def test_stable_disc_family_gives_finite_r_admissibility(name):
    e = get_entry(name)
    Q = standard_observations(e)["range_identity"]
    assert r_ritt_check(e.operator)["verdict"] == "R-Ritt-consistent"
    if disc_family_r_bound(e.operator, Q, 0, 0)["stabilized"]:
        assert math.isfinite(r_admissibility_constant(e.operator, Q, 0).value)


def test_obstructed_disc_family_grows():
    rec = disc_family_r_bound(hilbert_op(np.diag([1.0, 0.5])), None, 0, 0)
    assert not rec["stabilized"]
    assert math.isinf(r_admissibility_constant(hilbert_op(np.diag([1.0, 0.5])), None, 0).value)


# --- regression baselines on l^p ------------------------------------------------------

def _pinned(name):
    e = get_entry(name)
    assert certify_ritt(e.operator, with_resolvent=False, with_sector=False).is_ritt
    return e, standard_observations(e)["range_identity"]


def test_regression_lazy_markov_l1():
    e, Q = _pinned("lazy_markov_l1_6")
    base = BASELINE["lazy_markov_l1_6"]
    r = r_admissibility_constant(e.operator, Q, 0)
    assert r.finite
    assert abs(r.value - base["r_admissibility"]) <= REGRESSION_RTOL * base["r_admissibility"]
    rec = r_ritt_check(e.operator)
    assert rec["verdict"] == "R-Ritt-consistent"
    assert abs(rec["powers"][-1] - base["r_powers"]) <= REGRESSION_RTOL * base["r_powers"]
    assert abs(rec["differences"][-1] - base["r_differences"]) <= REGRESSION_RTOL * base["r_differences"]


def test_regression_lazy_markov_l3():
    e, Q = _pinned("lazy_markov_l3_6")
    base = BASELINE["lazy_markov_l3_6"]
    lq = lq_square_function_constant(e.operator, Q, 0)
    assert lq["finite"] and abs(lq["value"] - base["lq"]) <= REGRESSION_RTOL * base["lq"]
    r = r_admissibility_constant(e.operator, Q, 0)
    assert abs(r.value - base["r_admissibility"]) <= REGRESSION_RTOL * base["r_admissibility"]
