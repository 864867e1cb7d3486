import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_ritt
from rittlab.calculus import frac_power, frac_power_contour, frac_power_eigen, phi_theta
from rittlab.errors import BranchError, DefectiveError

CROSS_TOL = 1e-8
SEMIGROUP_TOL = 1e-8
COMMUTE_TOL = 1e-10
EXPONENTS = [0.25, 0.5, 1.0]

seeds = st.integers(0, 2**31 - 1)
kinds = st.sampled_from(["normal", "halved"])


def test_eigen_examples():
    assert np.allclose(frac_power_eigen(np.diag([4.0]), 0.5).value, [[2.0]], atol=1e-15)
    assert np.allclose(frac_power_eigen(np.zeros((2, 2)), 0.5).value, 0.0)


def test_eigen_upper_triangular():
    B = np.array([[1.0, 1.0], [0.0, 4.0]])
    R = frac_power_eigen(B, 0.5).value
    assert np.allclose(R, [[1.0, 1.0 / 3.0], [0.0, 2.0]], atol=1e-14)
    assert np.allclose(R @ R, B, atol=1e-14)


def test_eigen_rejects_negative_axis_and_defective():
    with pytest.raises(BranchError):
        frac_power_eigen(np.diag([-1.0, 1.0]), 0.5)
    with pytest.raises(DefectiveError):
        frac_power_eigen(np.array([[1.0, 1.0], [0.0, 1.0]]), 0.5)


def test_contour_examples():
    r = frac_power_contour(np.diag([4.0]), 0.5)
    assert abs(r.value[0, 0] - 2.0) < 1e-8 and r.method == "contour"
    r = frac_power_contour(np.diag([1.0, 9.0]), 0.5)
    assert np.allclose(r.value, np.diag([1.0, 3.0]), atol=1e-8)
    assert 0 < r.gamma < np.pi and r.nodes > 0 and np.isfinite(r.error_estimate)


def test_contour_handles_kernel_and_jordan():
    B = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    # Jordan block of B at 1: B^{1/2} = I + N/2 on that block
    r = frac_power_contour(B, 0.5)
    expected = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.0, 1.0]])
    assert np.allclose(r.value, expected, atol=1e-8)


def test_phi_theta_examples():
    assert np.allclose(phi_theta(np.zeros((2, 2)), 0.3, 2.0), 0.0)
    assert abs(phi_theta([[1.0]], 0.5, 1.0)[0, 0] - 0.5) < 1e-15
    assert abs(phi_theta([[4.0]], 0.5, 1.0)[0, 0] - 0.4) < 1e-15


@given(seeds, st.integers(1, 8), kinds, st.floats(0.05, 0.95))
def test_eigen_contour_agree(seed, n, kind, a):
    B = np.eye(n) - random_ritt(n, seed, kind)
    e = frac_power_eigen(B, a).value
    c = frac_power_contour(B, a).value
    assert np.linalg.norm(e - c, 2) <= CROSS_TOL


@given(seeds, st.integers(1, 8), kinds, st.sampled_from(EXPONENTS), st.sampled_from(EXPONENTS))
def test_semigroup(seed, n, kind, a, b):
    B = np.eye(n) - random_ritt(n, seed, kind)
    lhs = frac_power(B, a).value @ frac_power(B, b).value
    assert np.linalg.norm(lhs - frac_power(B, a + b).value, 2) <= SEMIGROUP_TOL


@given(seeds, st.integers(1, 8), kinds)
def test_integer_power_and_commutation(seed, n, kind):
    T = random_ritt(n, seed, kind)
    B = np.eye(n) - T
    assert np.array_equal(frac_power_eigen(B, 1).value, B)
    assert np.linalg.norm(frac_power_contour(B, 1.0).value - B, 2) <= CROSS_TOL
    Ba = frac_power(B, 0.5).value
    assert np.linalg.norm(Ba @ T - T @ Ba, 2) <= COMMUTE_TOL


@given(seeds, st.integers(1, 6), st.floats(0.1, 0.9), st.floats(0.01, 100.0))
def test_phi_theta_backends_agree(seed, n, theta, t):
    B = np.eye(n) - random_ritt(n, seed, "halved")
    e = phi_theta(B, theta, t, "eigen")
    c = phi_theta(B, theta, t, "contour")
    assert np.linalg.norm(e - c, 2) <= CROSS_TOL


@given(seeds, st.integers(1, 5), st.floats(1.05, 2.5))
def test_large_exponent_composition(seed, n, a):
    B = np.eye(n) - random_ritt(n, seed, "normal")
    e = frac_power_eigen(B, a).value
    c = frac_power_contour(B, a).value
    assert np.linalg.norm(e - c, 2) <= CROSS_TOL
