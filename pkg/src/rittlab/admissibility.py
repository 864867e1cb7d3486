"""Admissibility constants, square functions and the Weiss supremum.

Every k-series here has the shape  sum_j (j+1)^s ||L A^j x||^2  where A is T
restricted to the non-peripheral spectral part.  That holds once L vanishes on
the peripheral eigenspaces, which is exactly the kernel obstruction test.  The
geometric tail of A (see ``horizon``) then certifies the truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ascent import default_starts, maximize_ratio, norm_sq_grad
from .calculus import frac_power
from .errors import HypothesisViolation, RittLabError
from .horizon import MAX_HORIZON, GeometricTail, NormOracle, find_geometric_tail
from .linalg import (
    NormedSpace,
    ObservationSpec,
    OperatorSpec,
    batch_resolvent,
    vec_norm,
)
from .polar import DiscGrid, clustered_angles, polar_sup
from .ritt import analyse_periphery, power_bound, ritt_constant

GRAM_REL = 1e-12
OBSTRUCTION_TOL = 1e-10
WEISS_RINGS = 32
WEISS_BASE_ANGLES = 64
BETA_WINDOW = (-1.0, 3.0)
UNCERTIFIED_CAP = 4096


def _check_alpha(alpha, name="alpha"):
    if not alpha > -1.0:
        raise ValueError(f"{name} must exceed -1, got {alpha}")


def _observation(C, T: OperatorSpec) -> ObservationSpec:
    if C is None:
        return ObservationSpec.identity(T.space)
    if isinstance(C, ObservationSpec):
        if C.domain.dim != T.dim:
            raise ValueError(f"observation domain dim {C.domain.dim} != operator dim {T.dim}")
        return C
    mat = np.atleast_2d(np.asarray(C, dtype=complex))
    return ObservationSpec.from_matrix(mat, T.space, T.space)


def weiss_order(alpha, beta):
    """m = (alpha + beta) / 2, which must be a nonnegative integer."""
    m = 0.5 * (alpha + beta)
    r = round(m)
    if abs(m - r) > 1e-12 or r < 0:
        raise HypothesisViolation(f"m = (alpha + beta)/2 = {m:g} is not a nonnegative integer")
    return int(r)


# ---------------------------------------------------------------------------
# weighted orbit sums
# ---------------------------------------------------------------------------

@dataclass
class SupEstimate:
    """sup over unit x of a truncated weighted k-series, as an interval."""

    value: float
    upper: float
    finite: bool
    certified: bool
    horizon: int
    tail_bound: float
    method: str
    witness: np.ndarray | None = field(default=None, repr=False)
    obstruction: list = field(default_factory=list)
    reason: str = ""

    def __float__(self):
        return float(self.value)

    @property
    def kernel_obstruction(self):
        return any(mu == 1.0 and v > OBSTRUCTION_TOL for mu, v in self.obstruction)

    def as_dict(self):
        out = {
            "value": self.value,
            "upper": self.upper,
            "finite": self.finite,
            "certified": self.certified,
            "truncation_N": self.horizon,
            "tail_bound": self.tail_bound,
            "method": self.method,
            "kernel_obstruction": self.kernel_obstruction,
            "peripheral_norms": [{"mu": [mu.real, mu.imag], "norm": v} for mu, v in self.obstruction],
        }
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = [[float(z.real), float(z.imag)] for z in self.witness]
        return out


@dataclass
class _Context:
    T: OperatorSpec
    periphery: object
    tail: GeometricTail | None


def _context(T: OperatorSpec) -> _Context:
    pd = analyse_periphery(T)
    if pd.outside:
        raise HypothesisViolation(f"power-bound violation: spectral radius {pd.radius:.6g} > 1")
    if pd.defective:
        raise HypothesisViolation("power-bound violation: defective modulus-1 eigenvalue")
    tail = find_geometric_tail(pd.interior, NormOracle(T.space))
    return _Context(T, pd, tail)


def _peripheral_norms(L, ctx: _Context, source, target):
    oracle = NormOracle(source, target)
    return [(complex(mu), float(oracle.upper(L @ P))) for mu, P, _ in ctx.periphery.clusters]


def _obstructed(norms):
    return [(mu, v) for mu, v in norms if v > OBSTRUCTION_TOL]


def _orbit(L, ctx: _Context, s, source, target, keep=False, rel=GRAM_REL, max_horizon=MAX_HORIZON):
    """Truncated sum over j of (j+1)^s (L A^j)^H (L A^j).

    Returns (G, terms, crude, N, tail_sq, certified) where ``tail_sq`` bounds
    sum_{j>=N} (j+1)^s ||L A^j||^2 in the source/target norms and ``crude``
    is sum_{j<N} (j+1)^s ||L A^j||^2 with rigorous upper norms.
    """
    A = np.asarray(ctx.periphery.interior, dtype=complex)
    oracle = NormOracle(source, target)
    l_up = oracle.upper(L)
    n = A.shape[0]
    G = np.zeros((n, n), complex)
    terms, crude = [], 0.0
    hilbert = source.is_hilbert and target.is_hilbert
    tail = ctx.tail
    cap = max_horizon if tail is not None else UNCERTIFIED_CAP
    X = np.array(L, dtype=complex)
    j = 0
    while True:
        w = (j + 1.0) ** s
        G += w * (X.conj().T @ X)
        if keep:
            terms.append(math.sqrt(w) * X)
        if not hilbert:
            crude += w * oracle.upper(X) ** 2
        j += 1
        if j % 16 == 0 or j >= cap or l_up == 0.0:
            if tail is not None:
                tail_sq = l_up ** 2 * tail.weighted_sq_sum(j, s, 1.0) if l_up > 0 else 0.0
                run = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[-1])
                if tail_sq <= rel * run or tail_sq == 0.0:
                    return G, terms, crude, j, tail_sq, True
            if j >= cap:
                return G, terms, crude, j, math.inf, False
        X = X @ A


def _ratio_ascent(G, terms, source, target, seed=0, starts=12):
    n = source.dim
    p, q = source.p, target.p
    if q == 2.0:
        def vg(x):
            Gx = G @ x
            return float(np.real(np.vdot(x, Gx))), Gx
        stack = None
    else:
        Phi = np.array(terms)

        def vg(x):
            Y = Phi @ x
            val, g = norm_sq_grad(Y, q, axis=1)
            return float(val.sum()), np.einsum("jmn,jm->n", Phi.conj(), g)
        stack = Phi
    if stack is None:
        w, V = np.linalg.eigh(0.5 * (G + G.conj().T))
        x0 = V[:, -1]
    else:
        x0 = None
    S = default_starts(stack, n, starts, seed)
    if x0 is not None:
        S[:, 0] = x0
    return maximize_ratio(vg, n, p, S)


def _orbit_sup(L, ctx, s, source, target, seed=0) -> SupEstimate:
    norms = _peripheral_norms(L, ctx, source, target)
    bad = _obstructed(norms)
    if bad:
        mu = bad[0][0]
        where = "Ker(I - T)" if mu == 1.0 else f"the eigenspace at {mu:.6g}"
        return SupEstimate(math.inf, math.inf, False, True, 0, 0.0, "obstructed", None, norms,
                           f"does not vanish on {where} (norm {bad[0][1]:.3e})")
    hilbert = source.is_hilbert and target.is_hilbert
    G, terms, crude, N, tail_sq, cert = _orbit(L, ctx, s, source, target, keep=not target.is_hilbert)
    lam = max(float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[-1]), 0.0)
    tb = math.sqrt(tail_sq)
    if hilbert:
        w, V = np.linalg.eigh(0.5 * (G + G.conj().T))
        val = math.sqrt(lam)
        up = math.sqrt(lam + tail_sq)
        return SupEstimate(val, up, math.isfinite(up), cert, N, tb, "gram", V[:, -1], norms,
                           "" if cert else "no certified geometric tail")
    if lam == 0.0:
        return SupEstimate(0.0, tb, True, cert, N, tb, "ascent", None, norms)
    res = _ratio_ascent(G, terms, source, target, seed)
    m, n = L.shape
    factor = m ** max(0.0, 1.0 / target.p - 0.5) * n ** max(0.0, 0.5 - 1.0 / source.p)
    up = min(math.sqrt(crude), factor * math.sqrt(lam)) + tb
    return SupEstimate(res.value, max(up, res.value), math.isfinite(up), cert, N, tb, "ascent", res.witness, norms,
                       "" if cert else "no certified geometric tail")


# ---------------------------------------------------------------------------
# admissibility and square functions
# ---------------------------------------------------------------------------

def admissibility_constant(T: OperatorSpec, C=None, alpha=0.0, seed=0) -> SupEstimate:
    """M = sup_{||x||=1} (sum_{k>=0} (k+1)^alpha ||C T^k x||^2)^{1/2}."""
    _check_alpha(alpha)
    C = _observation(C, T)
    ctx = _context(T)
    return _orbit_sup(np.asarray(C.matrix), ctx, float(alpha), C.domain, C.target, seed)


def admissibility_norm(T: OperatorSpec, C=None, alpha=0.0, x=None) -> float:
    """(sum_{k>=0} (k+1)^alpha ||C T^k x||^2)^{1/2} for one vector (inf if obstructed)."""
    _check_alpha(alpha)
    C = _observation(C, T)
    ctx = _context(T)
    L = np.asarray(C.matrix)
    if _obstructed(_peripheral_norms(L, ctx, C.domain, C.target)):
        return math.inf
    x = np.asarray(x, dtype=complex).ravel()
    l_up = NormOracle(C.domain, C.target).upper(L)
    xn = float(C.domain.norm(x))
    A = np.asarray(ctx.periphery.interior)
    if ctx.tail is None:
        raise RittLabError("no certified geometric tail on the range part")
    total, v, j = 0.0, x.copy(), 0
    while True:
        total += (j + 1.0) ** alpha * float(C.target.norm(L @ v)) ** 2
        j += 1
        if j % 16 == 0:
            t = (l_up * xn) ** 2 * ctx.tail.weighted_sq_sum(j, alpha, 1.0)
            if t <= 1e-16 * total or t == 0.0:
                return math.sqrt(total)
            if j >= MAX_HORIZON:
                raise RittLabError("horizon cap reached")
        v = A @ v


def _frac(T: OperatorSpec, a, method="auto"):
    B = np.eye(T.dim) - np.asarray(T.matrix)
    return frac_power(B, a, method).value


def square_function_constant(T: OperatorSpec, a=1.0, seed=0, method="auto") -> SupEstimate:
    """kappa_a = sup_{||x||=1} ||x||_{T,a}; Gram operator on Hilbert spaces."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    ctx = _context(T)
    L = _frac(T, a, method)
    return _orbit_sup(L, ctx, 2.0 * a - 1.0, T.space, T.space, seed)


def _sf_columns(T: OperatorSpec, ctx: _Context, L, s, X):
    """Square-function norms of the columns of X (L = B^a already applied)."""
    if ctx.tail is None:
        raise RittLabError("no certified geometric tail on the range part")
    A = np.asarray(ctx.periphery.interior)
    p = T.space.p
    Y = L @ X
    y0 = vec_norm(Y, p, axis=0)
    total = np.zeros(X.shape[1])
    j = 0
    while True:
        total += (j + 1.0) ** s * vec_norm(Y, p, axis=0) ** 2
        j += 1
        if j % 16 == 0:
            t = ctx.tail.weighted_sq_sum(j, s, 1.0) * y0 ** 2
            if np.all(t <= 1e-14 * np.maximum(total, 1e-300)) or np.all(t == 0):
                return np.sqrt(total), j, float(np.max(np.sqrt(t)))
            if j >= MAX_HORIZON:
                raise RittLabError("square function horizon cap reached")
        Y = A @ Y


def square_function_norm(T: OperatorSpec, a, x, method="auto") -> float:
    """||x||_{T,a} = (sum_{k>=1} k^{2a-1} ||T^{k-1} (I-T)^a x||^2)^{1/2}."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    ctx = _context(T)
    _require_no_off_one(ctx)
    x = np.asarray(x, dtype=complex).reshape(T.dim, -1)
    vals, _, _ = _sf_columns(T, ctx, _frac(T, a, method), 2.0 * a - 1.0, x)
    return float(vals[0]) if vals.size == 1 else vals


def _require_no_off_one(ctx):
    if ctx.periphery.off_one:
        raise HypothesisViolation("unimodular eigenvalue other than 1: T is not a Ritt operator")


@dataclass
class EquivalenceReport:
    a: float
    a_prime: float
    low: float
    high: float
    ratios: np.ndarray = field(repr=False)
    excluded: int
    horizon: int

    def as_dict(self):
        return {"a": self.a, "a_prime": self.a_prime, "min": self.low, "max": self.high,
                "trials": int(len(self.ratios)), "excluded": self.excluded, "truncation_N": self.horizon}


def square_function_equivalence(T: OperatorSpec, a, a_prime, trials=50, seed=0) -> EquivalenceReport:
    """min and max of ||x||_{T,a} / ||x||_{T,a'} over random unit vectors."""
    ctx = _context(T)
    _require_no_off_one(ctx)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((T.dim, trials)) + 1j * rng.standard_normal((T.dim, trials))
    X = X / T.space.norm(X)
    P = np.zeros((T.dim, T.dim), complex)
    for mu, Pm, _ in ctx.periphery.clusters:
        if mu == 1.0:
            P = Pm
    rng_part = vec_norm((np.eye(T.dim) - P) @ X, T.space.p, axis=0)
    keep = rng_part > 1e-8
    X = X[:, keep]
    n1, N1, _ = _sf_columns(T, ctx, _frac(T, a), 2.0 * a - 1.0, X)
    n2, N2, _ = _sf_columns(T, ctx, _frac(T, a_prime), 2.0 * a_prime - 1.0, X)
    r = n1 / n2
    return EquivalenceReport(a, a_prime, float(r.min()), float(r.max()), r, int((~keep).sum()), max(N1, N2))


# ---------------------------------------------------------------------------
# Weiss supremum over the disc
# ---------------------------------------------------------------------------

@dataclass
class WeissResult:
    K: float
    finite: bool
    converged: bool
    m: int
    alpha: float
    beta: float
    grid: DiscGrid
    witness: complex
    kernel_obstruction: bool
    obstruction: list = field(default_factory=list)

    def __float__(self):
        return float(self.K)

    def as_dict(self):
        return {
            "K": self.K,
            "finite": self.finite,
            "converged": self.converged,
            "m": self.m,
            "alpha": self.alpha,
            "beta": self.beta,
            "witness": {"omega": [self.witness.real, self.witness.imag], "radius": abs(self.witness),
                        "angle": self.grid.argmax_witness[1]},
            "kernel_obstruction": self.kernel_obstruction,
            "grid": self.grid.describe(),
        }


def _weiss_field(T, C: ObservationSpec, m, beta, chunk=2048):
    mat = np.asarray(T.matrix)
    Cm = np.asarray(C.matrix)
    oracle = NormOracle(C.domain, C.target)
    expo = 0.5 * (1.0 + beta)

    def f(r, a):
        r = np.asarray(r, dtype=float)
        om = r * np.exp(1j * np.asarray(a, dtype=float))
        out = np.empty(len(om))
        for i in range(0, len(om), chunk):
            X = batch_resolvent(mat, om[i:i + chunk], "omega", m + 1)
            CX = Cm[None] @ X
            bad = ~np.all(np.isfinite(CX), axis=(1, 2))
            CX[bad] = 0.0
            v = oracle.uppers(CX) if oracle.exact else oracle.estimates(CX)
            v = np.where(bad, np.nan, v)
            out[i:i + chunk] = v
        w = np.clip(1.0 - r * r, 0.0, None) ** expo
        return w * out

    return f


def weiss_constant(T: OperatorSpec, C=None, alpha=0.0, beta=0.0, rings=WEISS_RINGS, rtol=0.005) -> WeissResult:
    """K = sup_{|w|<1} (1-|w|^2)^{(1+beta)/2} ||C (I - wT)^{-(m+1)}||."""
    _check_alpha(alpha)
    _check_alpha(beta, "beta")
    m = weiss_order(alpha, beta)
    C = _observation(C, T)
    ctx = _context(T)
    norms = _peripheral_norms(np.asarray(C.matrix), ctx, C.domain, C.target)
    kernel_obs = any(mu == 1.0 and v > OBSTRUCTION_TOL for mu, v in norms)
    w = ctx.periphery.eigenvalues
    centers = [0.0] + [float(-np.angle(z)) % (2 * math.pi) for z in w if abs(z) > 0.9 and abs(z - 1) > 1e-12]

    def angles(u):
        if u <= 0:
            return np.array([0.0])
        return clustered_angles(WEISS_BASE_ANGLES, centers, depth=int(u) + 4)

    grid = polar_sup(
        _weiss_field(T, C, m, beta),
        np.arange(rings + 1),
        lambda u: 1.0 - 2.0 ** (-u),
        angles,
        u_bounds=(0.0, float(rings)),
        rtol=rtol,
    )
    r, a = grid.argmax_witness
    return WeissResult(float(grid.value), not grid.diverged, bool(grid.converged), m, float(alpha), float(beta), grid,
                       complex(r * np.exp(1j * a)), kernel_obs, norms)


def automatic_weiss_check(T: OperatorSpec, alpha=0.0, beta=0.0, **kw) -> WeissResult:
    """Weiss supremum for the canonical observation C = (I - T)^{(1+alpha)/2}."""
    _check_alpha(alpha)
    c1 = ritt_constant(T)
    if not c1.finite:
        raise HypothesisViolation("T is not a certified Ritt operator: " + c1.reason)
    C = ObservationSpec(_frac(T, 0.5 * (1.0 + alpha)), T.space, T.space, f"(I-T)^{0.5 * (1 + alpha):g}")
    return weiss_constant(T, C, alpha, beta, **kw)


# ---------------------------------------------------------------------------
# coefficient machinery
# ---------------------------------------------------------------------------

def _rising(k, m):
    out = np.ones_like(k, dtype=float)
    for i in range(m):
        out = out * (k + i)
    return out


def series_identity_check(T: OperatorSpec, alpha, m, omega, N=None, tol=1e-13):
    """Residual of m! (I - wT)^{-(m+1)} against sum_{k<=N} c_k w^{k-1} k^{alpha/2} T^{k-1}.

    c_k = k (k+1) ... (k+m-1) / k^{alpha/2}.  The tail is bounded by
    c0 * sum_{k>N} k (k+1) ... (k+m-1) |w|^{k-1}.
    """
    m = int(m)
    if m < 0:
        raise ValueError("m must be a nonnegative integer")
    omega = complex(omega)
    s = abs(omega)
    if not s < 1.0:
        raise ValueError(f"|omega| must be < 1, got {s}")
    mat = np.asarray(T.matrix)
    n = T.dim
    c0 = power_bound(T)
    c0u = c0.upper if c0.finite else math.inf

    def tail_from(N):
        # sum_{k>N} rising(k, m) s^{k-1}; term ratio ((k+m)/k) s decreases in k
        if s == 0.0:
            return 0.0
        k = N + 1.0
        ratio = (k + m) / k * s
        if ratio >= 1.0:
            return math.inf
        return float(_rising(np.array([k]), m)[0]) * s ** (k - 1.0) / (1.0 - ratio)

    if N is None:
        N = 1
        while c0u * tail_from(N) > tol and N < 10 ** 6:
            N = N + max(1, N // 4)
    lhs = math.factorial(m) * batch_resolvent(mat, [omega], "omega", m + 1)[0]
    S = np.zeros((n, n), complex)
    P = np.eye(n, dtype=complex)
    for k in range(1, N + 1):
        rk = float(_rising(np.array([float(k)]), m)[0])
        ck = rk / k ** (0.5 * alpha)
        S += ck * omega ** (k - 1) * k ** (0.5 * alpha) * P
        P = P @ mat
    oracle = NormOracle(T.space)
    resid = float(oracle.upper(lhs - S))
    tb = c0u * tail_from(N)
    scale = float(oracle.upper(lhs))
    return {
        "residual": resid,
        "N": int(N),
        "tail_bound": tb,
        "within_bound": bool(resid <= tb + 1e-12 * max(scale, 1.0)),
        "m": m,
        "alpha": float(alpha),
        "omega": [omega.real, omega.imag],
    }


def _weighted_series(beta, s, rel=1e-15, chunk=1 << 20):
    """sum_{k>=1} k^beta s^{k-1} with a certified tail; returns (sum, tail_bound, N)."""
    total, k0 = 0.0, 1
    ls = math.log(s)
    while True:
        k = np.arange(k0, k0 + chunk, dtype=float)
        t = np.exp(beta * np.log(k) + (k - 1.0) * ls)
        total += float(t.sum())
        k0 += chunk
        kk = float(k0)
        ratio = ((kk + 1.0) / kk) ** max(beta, 0.0) * s
        if ratio < 1.0:
            nxt = math.exp(beta * math.log(kk) + (kk - 1.0) * ls)
            tail = nxt / (1.0 - ratio)
            if tail <= rel * total:
                return total, tail, k0 - 1
        if k0 > 1 << 30:
            raise RittLabError(f"series did not converge for s = {s}")


def geometric_weight_bound(beta, s_grid):
    """Smallest c with sum_k k^beta s^{k-1} <= c (1-s)^{-(beta+1)} over ``s_grid``."""
    _check_alpha(beta, "beta")
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any((s_grid <= 0) | (s_grid >= 1)):
        raise ValueError("s_grid entries must lie in (0, 1)")
    vals, ups = [], []
    for s in s_grid:
        tot, tail, _ = _weighted_series(float(beta), float(s))
        f = (1.0 - s) ** (beta + 1.0)
        vals.append(f * tot)
        ups.append(f * (tot + tail))
    i = int(np.argmax(vals))
    return {"beta": float(beta), "c": float(vals[i]), "c_upper": float(max(ups)), "argmax_s": float(s_grid[i]),
            "values": [float(v) for v in vals]}


# ---------------------------------------------------------------------------
# the equivalence harness
# ---------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    alpha: float
    beta: float
    m: int | None
    M: float
    K: float
    kappa: float
    truncation_N: int
    tail_bound: float
    grid: DiscGrid | None
    kernel_obstruction: bool
    verdict: str
    mode: str
    reason: str = ""
    M_estimate: SupEstimate | None = field(default=None, repr=False)
    K_estimate: WeissResult | None = field(default=None, repr=False)

    @property
    def ratio(self):
        if math.isfinite(self.M) and math.isfinite(self.K) and self.M > 0:
            return self.K / self.M
        return None

    def as_dict(self):
        out = {
            "verdict": self.verdict,
            "mode": self.mode,
            "alpha": self.alpha,
            "beta": self.beta,
            "m": self.m,
            "M": self.M,
            "K": self.K,
            "kappa": self.kappa,
            "ratio_K_over_M": self.ratio,
            "truncation_N": self.truncation_N,
            "tail_bound": self.tail_bound,
            "kernel_obstruction": self.kernel_obstruction,
        }
        if self.reason:
            out["reason"] = self.reason
        if self.M_estimate is not None:
            out["admissibility"] = self.M_estimate.as_dict()
        if self.K_estimate is not None:
            out["weiss"] = self.K_estimate.as_dict()
        return out


def _not_applicable(alpha, beta, m, reason, kappa=math.nan):
    return AdmissibilityReport(float(alpha), float(beta), m, math.nan, math.nan, kappa, 0, 0.0, None, False,
                               "not-applicable", "none", reason)


def verify_weiss_theorem(T: OperatorSpec, C=None, alpha=0.0, beta=0.0, **kw) -> AdmissibilityReport:
    """M finite <=> K finite under the square function estimate (beta in (-1, 3)).

    Outside that window only the direction M finite => K finite is checked.
    Hypothesis failures give the verdict ``not-applicable``.
    """
    try:
        _check_alpha(alpha)
        _check_alpha(beta, "beta")
        m = weiss_order(alpha, beta)
    except (ValueError, HypothesisViolation) as exc:
        return _not_applicable(alpha, beta, None, str(exc))
    C = _observation(C, T)
    try:
        c1 = ritt_constant(T)
        if not c1.finite:
            return _not_applicable(alpha, beta, m, "T is not a certified Ritt operator: " + c1.reason)
        kappa = square_function_constant(T, 1.0)
    except (HypothesisViolation, RittLabError) as exc:
        return _not_applicable(alpha, beta, m, str(exc))
    if not (kappa.finite and kappa.certified):
        return _not_applicable(alpha, beta, m, "square function estimate not certified", kappa.value)
    mode = "equivalence" if BETA_WINDOW[0] < beta < BETA_WINDOW[1] else "necessity only"
    M = admissibility_constant(T, C, alpha)
    K = weiss_constant(T, C, alpha, beta, **kw)
    if mode == "equivalence":
        ok = M.finite == K.finite
    else:
        ok = K.finite or not M.finite
    reason = "" if ok else f"M finite={M.finite} but K finite={K.finite}"
    return AdmissibilityReport(float(alpha), float(beta), m, M.value, K.K, kappa.value, M.horizon, M.tail_bound,
                               K.grid, M.kernel_obstruction, "consistent" if ok else "inconsistent", mode, reason,
                               M, K)
