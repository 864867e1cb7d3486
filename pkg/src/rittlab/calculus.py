"""Fractional powers of B = I - T and the functions phi_theta(z) = z^theta / (1 + z).

Two independent routes:

* ``frac_power_eigen``: V diag(lambda^a) V^{-1} with the principal branch.
* ``frac_power_contour``: the Cauchy integral over the boundary of a sector
  containing the spectrum,

      B^a = B * (1 / 2 pi i) * int_Gamma xi^(a-1) (xi - B)^{-1} d xi,

  taken along the rays arg xi = +-gamma, after the substitution r = e^s, with
  a nested trapezoidal rule (uniform in log r, i.e. geometric in r).

The kernel of B is split off first (0^a = 0); the contour then runs over the
invertible range part only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, ConvergenceError, DefectiveError
from .linalg import (
    NEAR_DEFECTIVE_COND,
    OperatorSpec,
    as_complex_matrix,
    mean_ergodic_decompose,
    spectrum,
)

ZERO_TOL = 1e-12
QUAD_TOL = 1e-10
MAX_NODES = 2 ** 16


@dataclass(frozen=True)
class FracPowerResult:
    value: np.ndarray
    method: str
    error_estimate: float
    gamma: float | None = None
    nodes: int | None = None

    def as_dict(self):
        from .linalg import encode_matrix

        out = {"method": self.method, "error_estimate": self.error_estimate, "value": encode_matrix(self.value)}
        if self.method == "contour":
            out["contour"] = {"gamma": self.gamma, "nodes": self.nodes}
        return out


def _matrix(B):
    return np.asarray(B.matrix) if isinstance(B, OperatorSpec) else as_complex_matrix(B, "B")


def _check_branch(w, scale):
    neg = (w.real < 0) & (np.abs(w.imag) <= 1e-12 * max(scale, 1.0)) & (np.abs(w) > ZERO_TOL * max(scale, 1.0))
    if np.any(neg):
        raise BranchError(f"eigenvalue {w[neg][0]} on the negative real axis: principal branch undefined")


def _int_power(B, n):
    return np.linalg.matrix_power(B, int(n)) if n > 0 else np.eye(B.shape[0], dtype=complex)


def frac_power_eigen(B, a) -> FracPowerResult:
    """B^a through the eigen-decomposition; zero eigenvalues map to zero."""
    mat = _matrix(B)
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if float(a).is_integer():
        return FracPowerResult(_int_power(mat, a), "eigen", 0.0)
    spec = spectrum(mat)
    if spec.condition > NEAR_DEFECTIVE_COND:
        raise DefectiveError(f"eigenvector condition number {spec.condition:.3e} exceeds {NEAR_DEFECTIVE_COND:g}")
    w, V = spec.eigenvalues, spec.eigenvectors
    scale = float(np.abs(w).max())
    _check_branch(w, scale)
    zero = np.abs(w) <= ZERO_TOL * max(scale, 1.0)
    wa = np.where(zero, 0.0, np.power(np.where(zero, 1.0, w), a))
    value = (V * wa) @ np.linalg.inv(V)
    err = np.finfo(float).eps * spec.condition * max(float(np.abs(wa).max()), 1.0) * mat.shape[0]
    return FracPowerResult(value, "eigen", float(err))


def _range_part(mat):
    """Basis change S with S^{-1} B S = diag(0, B_r); returns (S, S_inv, k, B_r)."""
    n = mat.shape[0]
    split = mean_ergodic_decompose(np.eye(n) - mat)
    k = split.kernel_dim
    if k == 0:
        return None, None, 0, mat
    U, s, _ = np.linalg.svd(split.kernel)
    Kb = U[:, :k]
    U2, _, _ = np.linalg.svd(split.range)
    Rb = U2[:, : n - k]
    S = np.hstack([Kb, Rb])
    Si = np.linalg.inv(S)
    Bt = Si @ mat @ S
    return S, Si, k, Bt[k:, k:]


def _spectral_angle(Br):
    if Br.size == 0:
        return 0.0
    w = np.linalg.eigvals(Br)
    return float(np.abs(np.angle(w)).max())


def contour_angle(sigma):
    """gamma = (sigma + pi) / 2, clamped to (sigma, 3 pi / 4]."""
    g = 0.5 * (sigma + math.pi)
    cap = 0.75 * math.pi
    return min(g, cap) if cap > sigma else g


def _contour_core(Br, a, gamma, tol, max_nodes):
    n = Br.shape[0]
    eye = np.eye(n, dtype=complex)
    nrm = float(np.linalg.norm(Br, 2))
    Binv = np.linalg.inv(Br)
    rmin = 1.0 / float(np.linalg.norm(Binv, 2))
    rmax = nrm
    # the leading terms (xi - B)^{-1} ~ -B^{-1} near 0 and ~ 1/xi at infinity are
    # integrated in closed form, so the truncated pieces are second order
    digits = -math.log(1e-17)
    lo = math.log(rmin) - (digits + math.log(max(nrm / rmin, 1.0))) / (1.0 + a)
    hi = math.log(rmax) + digits / (2.0 - a)
    eu, ed = np.exp(1j * gamma), np.exp(-1j * gamma)
    r0, R = math.exp(lo), math.exp(hi)
    ends = np.zeros((n, n), complex)
    for th, sgn in ((-gamma, 1.0), (gamma, -1.0)):
        ends += sgn * np.exp(1j * th * (a - 1.0)) * R ** (a - 1.0) / (1.0 - a) * eye
        ends -= sgn * np.exp(1j * th * a) * r0 ** a / a * Binv

    def g(s):
        r = np.exp(s)
        out = np.zeros((n, n), complex)
        terms = []
        for e, sgn in ((ed, 1.0), (eu, -1.0)):
            xi = r[:, None, None] * e
            X = np.linalg.solve(xi * eye[None] - Br[None], np.broadcast_to(eye, (len(r), n, n)))
            wgt = sgn * (r * e) ** (a - 1.0) * e * r
            terms.append(np.tensordot(wgt, X, axes=(0, 0)))
        out = terms[0] + terms[1]
        return out

    def chunked(s):
        total = np.zeros((n, n), complex)
        for i in range(0, len(s), 4096):
            total += g(s[i:i + 4096])
        return total

    m = 64
    h = (hi - lo) / m
    acc = chunked(lo + h * np.arange(m + 1)) - 0.5 * (g(np.array([lo])) + g(np.array([hi])))
    est = Br @ (h * acc + ends) / (2j * math.pi)
    prev_err = math.inf
    while True:
        mids = lo + h * (np.arange(m) + 0.5)
        acc = acc + chunked(mids)
        m *= 2
        h /= 2.0
        new = Br @ (h * acc + ends) / (2j * math.pi)
        err = float(np.linalg.norm(new - est, 2))
        est = new
        if err <= tol * max(1.0, float(np.linalg.norm(new, 2))):
            return est, err, m
        if m >= max_nodes:
            raise ConvergenceError(f"contour quadrature did not converge (error {err:.2e} at {m} nodes)")
        if m >= 1024 and err > 0.5 * prev_err and err > 1e3 * tol:
            raise ConvergenceError(f"contour quadrature error stopped halving ({prev_err:.2e} -> {err:.2e})")
        prev_err = err


def frac_power_contour(B, a, sector_angle=None, tol=QUAD_TOL, max_nodes=MAX_NODES) -> FracPowerResult:
    """B^a from the sector-boundary contour integral.

    ``sector_angle`` is the sectorial type sigma of B; by default the spectral
    angle of the range part is used.  Powers a >= 1 are composed as
    B^floor(a) B^frac(a).
    """
    mat = _matrix(B)
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    whole = math.floor(a)
    frac = a - whole
    if frac == 0.0:
        return FracPowerResult(_int_power(mat, whole), "contour", 0.0)
    w = np.linalg.eigvals(mat)
    _check_branch(w, float(np.abs(w).max()))
    S, Si, k, Br = _range_part(mat)
    n = mat.shape[0]
    if Br.shape[0] == 0:
        return FracPowerResult(np.zeros((n, n), complex), "contour", 0.0, None, 0)
    sigma = _spectral_angle(Br) if sector_angle is None else float(sector_angle)
    gamma = contour_angle(sigma)
    Fr, err, nodes = _contour_core(Br, frac, gamma, tol, max_nodes)
    if S is None:
        F = Fr
    else:
        Ft = np.zeros((n, n), complex)
        Ft[k:, k:] = Fr
        F = S @ Ft @ Si
    value = _int_power(mat, whole) @ F
    return FracPowerResult(value, "contour", float(err), float(gamma), int(nodes))


def frac_power(B, a, method="eigen"):
    """Dispatch; ``method='auto'`` falls back to the contour route when V is ill-conditioned."""
    if method == "eigen":
        return frac_power_eigen(B, a)
    if method == "contour":
        return frac_power_contour(B, a)
    if method == "auto":
        try:
            return frac_power_eigen(B, a)
        except DefectiveError:
            return frac_power_contour(B, a)
    raise ValueError(f"unknown method {method!r}")


def phi_theta(B, theta, t, method="eigen"):
    """(tB)^theta (I + tB)^{-1}."""
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    mat = _matrix(B)
    tB = t * mat
    P = frac_power(tB, theta, method).value
    return np.linalg.solve((np.eye(mat.shape[0]) + tB).T, P.T).T
