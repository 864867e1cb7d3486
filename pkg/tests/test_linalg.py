import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import crandn, random_similar
from rittlab.errors import DecompositionError, DimensionError, SpectralProximityError
from rittlab.linalg import (
    NormedSpace,
    ObservationSpec,
    OperatorSpec,
    mean_ergodic_decompose,
    observation_from_json,
    observation_to_json,
    op_norm,
    operator_from_json,
    operator_to_json,
    resolvent,
    spectrum,
    vec_norm,
)

ERGODIC_TOL = 1e-10
RESOLVENT_TOL = 1e-10
DET_RTOL = 1e-8
P_VALUES = [1.0, 1.5, 2.0, 3.0, math.inf]

seeds = st.integers(0, 2**31 - 1)


def H(n):
    return NormedSpace.hilbert(n)


# --- op_norm -----------------------------------------------------------------

def test_identity_norm():
    nb = op_norm(np.eye(3), H(3), H(3))
    assert nb.exact and abs(nb.estimate - 1.0) < 1e-14


def test_diagonal_norm():
    assert abs(float(op_norm(np.diag([3.0, -4.0]), H(2), H(2))) - 4.0) < 1e-13


def test_l1_norm_matches_column_sums_and_sampling():
    A = np.array([[1.0, 1.0], [0.0, 0.0]])
    X = NormedSpace.lp(2, 1.0)
    nb = op_norm(A, X, X)
    assert abs(nb.estimate - 1.0) < 1e-13
    # dense sampling of the complex l1 sphere in dimension 2
    rng = np.random.default_rng(0)
    x = crandn(rng, 2, 20000)
    x /= np.abs(x).sum(axis=0)
    sampled = np.abs(A @ x).sum(axis=0).max()
    assert sampled <= nb.upper + 1e-12
    assert sampled > 1.0 - 1e-3


def test_lp_interval_brackets_sampling():
    rng = np.random.default_rng(3)
    A = crandn(rng, 3, 3)
    X, Y = NormedSpace.lp(3, 3.0), NormedSpace.lp(3, 1.5)
    nb = op_norm(A, X, Y)
    x = crandn(rng, 3, 20000)
    x /= vec_norm(x, 3.0)
    sampled = vec_norm(A @ x, 1.5).max()
    assert nb.lower <= nb.estimate <= nb.upper
    assert sampled <= nb.lower * (1 + 1e-9)
    # the witness attains the lower bound
    w = nb.witness
    assert abs(vec_norm(A @ w, 1.5) / vec_norm(w, 3.0) - nb.lower) < 1e-9 * nb.lower


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        op_norm(np.eye(3), H(2), H(3))


@given(seeds, st.sampled_from(P_VALUES), st.integers(2, 5))
def test_submultiplicative(seed, p, n):
    rng = np.random.default_rng(seed)
    A, B = crandn(rng, n, n), crandn(rng, n, n)
    X = NormedSpace.lp(n, p)
    nab = op_norm(A @ B, X, X, restarts=4)
    na, nbb = op_norm(A, X, X, restarts=4), op_norm(B, X, X, restarts=4)
    assert nab.lower <= na.upper * nbb.upper * (1 + 1e-10)


@given(seeds, st.integers(1, 6))
def test_hilbert_norm_unitary_invariant(seed, n):
    from rittlab.zoo import random_unitary

    rng = np.random.default_rng(seed)
    A = crandn(rng, n, n)
    U = random_unitary(n, seed)
    a1 = float(op_norm(A, H(n), H(n)))
    a2 = float(op_norm(U @ A @ U.conj().T, H(n), H(n)))
    assert abs(a1 - a2) <= 1e-10 * a1


@given(seeds, st.sampled_from(P_VALUES), st.floats(0.1, 10.0))
def test_norm_scaling(seed, p, c):
    rng = np.random.default_rng(seed)
    A = crandn(rng, 3, 3)
    X = NormedSpace.lp(3, p)
    a1 = op_norm(A, X, X, restarts=4)
    a2 = op_norm(c * A, X, X, restarts=4)
    assert abs(a2.upper - c * a1.upper) <= 1e-9 * c * a1.upper
    assert abs(a2.lower - c * a1.lower) <= 1e-6 * c * a1.lower


# --- spectrum ----------------------------------------------------------------

def test_spectrum_diagonal():
    sp = spectrum(np.diag([0.5, 1.0]))
    assert np.allclose(sp.eigenvalues, [1.0, 0.5])
    assert not sp.defective


def test_spectrum_jordan_is_defective():
    sp = spectrum(np.array([[0.5, 1.0], [0.0, 0.5]]))
    assert np.allclose(sp.eigenvalues, [0.5, 0.5])
    assert sp.defective


def test_spectrum_rotation():
    sp = spectrum(np.array([[0.0, -1.0], [1.0, 0.0]]))
    # descending modulus then ascending argument: -i before i
    assert np.allclose(sp.eigenvalues, [-1j, 1j])


@given(seeds)
def test_det_is_eigenvalue_product(seed):
    rng = np.random.default_rng(seed)
    lam = crandn(rng, 6)
    A = random_similar(6, seed, lam, cond=10.0)
    prod = np.prod(spectrum(A).eigenvalues)
    det = np.linalg.det(A)
    assert abs(prod - det) <= DET_RTOL * abs(det)


# --- resolvents ---------------------------------------------------------------

def test_resolvent_of_zero():
    assert np.allclose(resolvent(np.zeros((3, 3)), 0.7 + 0.2j, "omega", 3), np.eye(3), atol=1e-15)


def test_resolvent_scalars():
    assert abs(resolvent([[0.5]], 0.5, "omega")[0, 0] - 4.0 / 3.0) < 1e-15
    assert abs(resolvent([[0.5]], 2.0, "lambda", 2)[0, 0] - 4.0 / 9.0) < 1e-15


def test_resolvent_near_spectrum():
    with pytest.raises(SpectralProximityError) as info:
        resolvent(np.diag([1.0, 0.5]), 1.0, "lambda")
    assert info.value.distance < 1e-10


@given(seeds, st.complex_numbers(min_magnitude=1.5, max_magnitude=5.0),
       st.complex_numbers(min_magnitude=1.5, max_magnitude=5.0))
def test_resolvent_identity(seed, lam, mu):
    rng = np.random.default_rng(seed)
    T = crandn(rng, 5, 5)
    T /= np.abs(np.linalg.eigvals(T)).max()
    Rl, Rm = resolvent(T, lam), resolvent(T, mu)
    res = np.linalg.norm(Rl - Rm - (mu - lam) * Rl @ Rm, 2)
    assert res <= RESOLVENT_TOL * max(1.0, abs(mu - lam))


# --- mean ergodic splitting ----------------------------------------------------

def test_ergodic_identity_and_zero():
    s = mean_ergodic_decompose(np.eye(3))
    assert np.allclose(s.kernel, np.eye(3)) and np.allclose(s.range, 0)
    s = mean_ergodic_decompose(np.zeros((3, 3)))
    assert np.allclose(s.kernel, 0) and np.allclose(s.range, np.eye(3))


def test_ergodic_diagonal():
    s = mean_ergodic_decompose(np.diag([1.0, 0.5]))
    assert np.allclose(s.kernel, np.diag([1.0, 0.0]))
    assert np.allclose(s.range, np.diag([0.0, 1.0]))
    assert s.kernel_dim == 1


def test_ergodic_defective_raises():
    with pytest.raises(DecompositionError):
        mean_ergodic_decompose(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds, st.integers(2, 6), st.integers(0, 2))
def test_ergodic_residuals(seed, n, k):
    k = min(k, n - 1)
    rng = np.random.default_rng(seed)
    inner = 0.9 * np.sqrt(rng.random(n - k)) * np.exp(2j * np.pi * rng.random(n - k))
    T = random_similar(n, seed, np.concatenate([np.ones(k), inner]))
    split = mean_ergodic_decompose(T)
    assert split.kernel_dim == k
    for name, r in split.residuals(T).items():
        assert r <= ERGODIC_TOL, name


# --- JSON interchange ----------------------------------------------------------

@given(seeds, st.sampled_from(["hilbert", 1.0, 2.5, math.inf]), st.integers(1, 4))
def test_operator_json_roundtrip(seed, norm, n):
    rng = np.random.default_rng(seed)
    space = H(n) if norm == "hilbert" else NormedSpace.lp(n, norm)
    op = OperatorSpec(crandn(rng, n, n), space, "op")
    back = operator_from_json(json.loads(json.dumps(operator_to_json(op))))
    assert np.array_equal(np.asarray(back.matrix), np.asarray(op.matrix))
    assert back.space == op.space and back.label == op.label


def test_observation_json_roundtrip():
    rng = np.random.default_rng(1)
    X = NormedSpace.lp(3, math.inf)
    obs = ObservationSpec(crandn(rng, 2, 3), X, NormedSpace.hilbert(2), "C")
    text = json.dumps(observation_to_json(obs))
    assert '"inf"' in text
    back = observation_from_json(json.loads(text))
    assert np.array_equal(np.asarray(back.matrix), np.asarray(obs.matrix))
    assert back.target == obs.target and back.domain == obs.domain


def test_operator_shape_checked():
    with pytest.raises(DimensionError):
        OperatorSpec(np.eye(3), H(2), "bad")
