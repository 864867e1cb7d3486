"""Certified truncation of suprema and series over powers of an operator.

If ``||A^j|| <= q < 1`` for some ``j`` then submultiplicativity gives
``||A^k|| <= M q^floor(k/j)`` with ``M = max_{i<j} ||A^i||``.  That single
inequality turns every sup or sum over infinitely many k into a finite scan
plus an explicit tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import NormedSpace, norm_estimates, norm_upper, op_norm

MAX_HORIZON = 20000


class NormOracle:
    """Operator norms between two fixed spaces: estimates and rigorous uppers."""

    def __init__(self, source: NormedSpace, target: NormedSpace | None = None):
        self.source = source
        self.target = source if target is None else target
        self.p, self.q = self.source.p, self.target.p
        self.exact = (self.p == 2.0 and self.q == 2.0) or self.p == 1.0 or math.isinf(self.q)

    def upper(self, A):
        return float(norm_upper(A, self.p, self.q))

    def estimate(self, A):
        if self.exact:
            return self.upper(A)
        A = np.asarray(A)
        return float(op_norm(A, self.source.with_dim(A.shape[1]), self.target.with_dim(A.shape[0])).estimate)

    def estimates(self, As):
        """Vectorised estimates for a stack (cheaper, fewer restarts)."""
        As = np.asarray(As)
        if len(As) == 0:
            return np.zeros(0)
        return np.asarray(norm_estimates(As, self.p, self.q), dtype=float)

    def uppers(self, As):
        As = np.asarray(As)
        if len(As) == 0:
            return np.zeros(0)
        return np.asarray(norm_upper(As, self.p, self.q), dtype=float)


@dataclass(frozen=True)
class GeometricTail:
    """``||A^k|| <= M * q**floor(k/j)`` for every k >= 0."""

    j: int
    q: float
    M: float

    def power(self, k):
        if self.q == 0.0:
            return 0.0 if k >= self.j else self.M
        return self.M * self.q ** (k // self.j)

    def _smooth(self, k):
        # continuous majorant M q^(k/j - 1) >= power(k)
        return self.M * self.q ** (k / self.j - 1.0)

    def weighted_sup(self, N, s=0.0, shift=0.0):
        """Upper bound of sup_{k>=N} (k+shift)^s ||A^k||."""
        if self.q == 0.0:
            if N >= self.j:
                return 0.0
            return max((k + shift) ** s * self.M for k in range(N, self.j))
        c = -math.log(self.q) / self.j
        k = float(N)
        if s > 0.0:
            k = max(k, s / c - shift)
        base = k + shift
        if base <= 0.0:
            return math.inf
        return base ** s * self._smooth(k)

    def weighted_sq_sum(self, N, s=0.0, shift=1.0):
        """Upper bound of sum_{k>=N} (k+shift)^s ||A^k||^2."""
        if self.q == 0.0:
            if N >= self.j:
                return 0.0
            return sum((k + shift) ** s * self.M ** 2 for k in range(N, self.j)) + 0.0
        r = self.q ** (2.0 / self.j)
        if N + shift <= 0.0:
            return math.inf
        rho = r * ((N + 1.0 + shift) / (N + shift)) ** max(s, 0.0)
        if rho >= 1.0:
            return math.inf
        return (N + shift) ** s * self._smooth(N) ** 2 / (1.0 - rho)

    def weighted_sum(self, N, s=0.0, shift=1.0):
        """Upper bound of sum_{k>=N} (k+shift)^s ||A^k||."""
        if self.q == 0.0:
            if N >= self.j:
                return 0.0
            return sum((k + shift) ** s * self.M for k in range(N, self.j)) + 0.0
        r = self.q ** (1.0 / self.j)
        if N + shift <= 0.0:
            return math.inf
        rho = r * ((N + 1.0 + shift) / (N + shift)) ** max(s, 0.0)
        if rho >= 1.0:
            return math.inf
        return (N + shift) ** s * self._smooth(N) / (1.0 - rho)


def find_geometric_tail(A, oracle: NormOracle, target=0.5, max_power=MAX_HORIZON):
    """Scan powers of ``A`` until a rigorous ``||A^j|| <= target`` is found.

    Returns ``None`` when no such ``j <= max_power`` exists (spectral radius
    too close to 1, or not below 1 at all).
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n and spectral_radius(A) >= 1.0 - 1e-12:
        return None
    P = np.eye(n, dtype=complex)
    M = 1.0 if n else 0.0
    for j in range(1, max_power + 1):
        P = P @ A
        u = oracle.upper(P)
        if u <= target:
            return GeometricTail(j, float(u), float(M))
        M = max(M, u)
        # keep magnitudes sane for slowly decaying A
        if not np.isfinite(u):
            return None
    return None


def spectral_radius(A):
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(A)).max())
