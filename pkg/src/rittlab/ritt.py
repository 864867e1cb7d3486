"""Power boundedness, Ritt and resolvent constants, and sectoriality of I - T."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectrumError
from .horizon import MAX_HORIZON, GeometricTail, NormOracle, find_geometric_tail
from .linalg import OperatorSpec, spectral_projection, spectrum
from .polar import DiscGrid, clustered_angles, polar_sup

OUTSIDE_TOL = 1e-10
PERIPHERAL_TOL = 1e-8
CLUSTER_TOL = 1e-6
GROWTH_PROBE = 100


@dataclass
class Constant:
    """A supremum with its certification metadata.

    ``value`` is the best attained value (a lower bound), ``upper`` a bound on
    the true supremum (``inf`` when no certificate was obtained).
    """

    value: float
    upper: float
    finite: bool
    certified: bool
    horizon: int = 0
    reason: str = ""
    detail: dict = field(default_factory=dict)

    @classmethod
    def infinite(cls, reason, horizon=0, **detail):
        return cls(math.inf, math.inf, False, True, horizon, reason, detail)

    def as_dict(self):
        return {
            "value": self.value,
            "upper": self.upper,
            "finite": self.finite,
            "certified": self.certified,
            "horizon": self.horizon,
            "reason": self.reason,
            **({"detail": self.detail} if self.detail else {}),
        }


# ---------------------------------------------------------------------------
# spectral bookkeeping shared by the constants
# ---------------------------------------------------------------------------

@dataclass
class PeripheralData:
    eigenvalues: np.ndarray
    radius: float
    eig_condition: float
    outside: bool
    clusters: list            # (mu, projection or None, algebraic multiplicity)
    defective: bool
    off_one: bool             # a modulus-1 eigenvalue different from 1
    interior: np.ndarray      # T restricted to the non-peripheral spectral part
    interior_radius: float
    growth_ratio: float


def _clusters(values, tol):
    groups = []
    for v in values:
        for g in groups:
            if abs(g[0] - v) <= tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def analyse_periphery(T: OperatorSpec) -> PeripheralData:
    mat = np.asarray(T.matrix)
    n = mat.shape[0]
    spec = spectrum(mat)
    w = spec.eigenvalues
    mod = np.abs(w)
    rho = float(mod.max())
    outside = rho > 1.0 + OUTSIDE_TOL
    per = w[mod >= 1.0 - PERIPHERAL_TOL]
    clusters, defective, off_one = [], False, False
    Psum = np.zeros((n, n), complex)
    for g in _clusters(list(per), CLUSTER_TOL):
        mu = complex(np.mean(g))
        if abs(mu - 1.0) <= PERIPHERAL_TOL:
            mu = 1.0 + 0j
        else:
            off_one = True
        P, _ = spectral_projection(mat, mu)
        mult = len(g)
        if P is None or int(round(np.trace(P).real)) != mult:
            defective = True
            P = None
        else:
            Psum += P
        clusters.append((mu, P, mult))
    interior = mat @ (np.eye(n) - Psum) if not defective else mat
    rest = w[mod < 1.0 - PERIPHERAL_TOL]
    irad = float(np.abs(rest).max()) if len(rest) else 0.0
    growth = math.nan
    if defective or outside:
        oracle = NormOracle(T.space)
        P = np.linalg.matrix_power(mat, GROWTH_PROBE // 2)
        n50 = oracle.upper(P)
        n100 = oracle.upper(P @ P)
        growth = n100 / n50 if n50 > 0 else math.inf
    return PeripheralData(w, rho, spec.condition, outside, clusters, defective, off_one, interior, irad, growth)


def _scan_powers(first, step, weight, done, oracle, max_horizon=MAX_HORIZON, block=64):
    """Running sup of weight(k) * ||X_k|| with X_{k+1} = step @ X_k.

    ``done(N, best)`` returns ``(stop, upper)`` where ``upper`` bounds the
    supremum over all k once the scan covers k < N.
    """
    X = np.asarray(first, dtype=complex)
    best, arg, k = -math.inf, 0, 0
    mats, ks = [], []
    while k <= max_horizon:
        mats.append(X)
        ks.append(k)
        if len(mats) == block or k == max_horizon:
            stack = np.array(mats)
            vals = oracle.uppers(stack) if oracle.exact else oracle.estimates(stack)
            vals = vals * np.array([weight(kk) for kk in ks])
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, arg = float(vals[i]), ks[i]
            mats, ks = [], []
            stop, upper = done(k + 1, best)
            if stop:
                return best, max(best, upper), k, arg, True
        X = step @ X
        k += 1
    return best, math.inf, max_horizon, arg, False


def power_bound(T: OperatorSpec) -> Constant:
    """c0 = sup_k ||T^k|| with a certified horizon, or the +inf flag."""
    pd = analyse_periphery(T)
    if pd.outside:
        return Constant.infinite("spectrum exits the closed unit disc", spectral_radius=pd.radius)
    if pd.defective:
        return Constant.infinite(
            "defective modulus-1 eigenvalue (powers grow polynomially)",
            eig_condition=pd.eig_condition, growth_ratio_k100_over_k50=pd.growth_ratio,
        )
    oracle = NormOracle(T.space)
    tail = find_geometric_tail(pd.interior, oracle)
    if tail is None:
        return Constant(math.nan, math.inf, False, False, 0, "no geometric tail found on the range part")
    periph = sum(oracle.upper(P) for _, P, _ in pd.clusters)

    def done(N, best):
        t = tail.power(N)
        if periph + t <= best * (1.0 + 1e-10):
            return True, best
        # the limit equals the sup (e.g. T = diag(1, 1/2)); stop once the tail is negligible
        return t <= 1e-12 * max(best, 1.0), periph + t

    mat = np.asarray(T.matrix)
    best, up, N, arg, ok = _scan_powers(np.eye(T.dim), mat, lambda k: 1.0, done, oracle)
    if not oracle.exact:
        best = max(best, oracle.estimate(np.linalg.matrix_power(mat, arg)))
    if not ok:
        return Constant(best, math.inf, True, False, N, "horizon cap reached", {"argmax_k": arg})
    return Constant(best, max(up, best), True, True, N, "", {"argmax_k": arg, "tail": _tail_dict(tail)})


def _tail_dict(tail: GeometricTail):
    return {"j": tail.j, "q": tail.q, "M": tail.M}


def ritt_constant(T: OperatorSpec) -> Constant:
    """c1 = sup_{k>=1} k ||T^k - T^{k-1}||, certified or flagged +inf."""
    pd = analyse_periphery(T)
    if pd.outside or pd.defective:
        return Constant.infinite("not power bounded", spectral_radius=pd.radius)
    if pd.off_one:
        mus = [mu for mu, _, _ in pd.clusters if mu != 1.0]
        gap = min(abs(mu - 1.0) for mu in mus)
        # k ||T^{k-1}(T - I)|| >= k |mu - 1| for a unimodular eigenvalue mu
        return Constant.infinite(
            "unimodular eigenvalue other than 1 forces linear growth",
            eigenvalues=[complex(m) for m in mus], lower_slope=gap,
        )
    oracle = NormOracle(T.space)
    tail = find_geometric_tail(pd.interior, oracle)
    if tail is None:
        return Constant(math.nan, math.inf, False, False, 0, "no geometric tail found on the range part")
    mat = np.asarray(T.matrix)
    D = mat - np.eye(T.dim)
    dn = oracle.upper(D)

    def done(N, best):
        # X_k = T^k (T - I) = A^k (T - I) for k >= 1, weighted by k + 1
        if N < 1:
            return False, math.inf
        t = dn * tail.weighted_sup(N, s=1.0, shift=1.0)
        return t <= best * (1.0 + 1e-10), t

    best, up, N, arg, ok = _scan_powers(D, mat, lambda k: k + 1.0, done, oracle)
    k_star = arg + 1
    if not oracle.exact:
        best = max(best, k_star * oracle.estimate(np.linalg.matrix_power(mat, arg) @ D))
    if not ok:
        return Constant(best, math.inf, False, False, N + 1, "running sup kept growing past the horizon")
    return Constant(best, max(up, best), True, True, N + 1, "", {"argmax_k": k_star, "tail": _tail_dict(tail)})


# ---------------------------------------------------------------------------
# resolvent constant on |lambda| > 1
# ---------------------------------------------------------------------------

def _resolvent_norm_field(mat, oracle, fn):
    eye = np.eye(mat.shape[0], dtype=complex)

    def field_(r, a):
        lam = np.asarray(r) * np.exp(1j * np.asarray(a))
        M = lam[:, None, None] * eye[None] - mat[None]
        if oracle.p == 2.0 and oracle.q == 2.0:
            s = np.linalg.svd(M, compute_uv=False)[:, -1]
            inv = np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), np.inf)
        else:
            try:
                R = np.linalg.inv(M)
            except np.linalg.LinAlgError:
                R = np.stack([_safe_inv(m) for m in M])
            inv = oracle.estimates(R)
        return fn(lam) * inv

    return field_


def _safe_inv(m):
    try:
        return np.linalg.inv(m)
    except np.linalg.LinAlgError:
        return np.full_like(m, np.nan)


def resolvent_constant(T: OperatorSpec, depth=40, rtol=0.005) -> Constant:
    """c2 = sup_{|lambda|>1} |lambda - 1| ||(lambda - T)^{-1}||.

    Radii 1 + 2^-j accumulate at the unit circle, angles accumulate at 0 and at
    the arguments of near-unimodular eigenvalues.
    """
    pd = analyse_periphery(T)
    if pd.outside:
        raise SpectrumError(f"spectral radius {pd.radius:.12g} exceeds 1")
    mat = np.asarray(T.matrix)
    oracle = NormOracle(T.space)
    w = pd.eigenvalues
    centers = [0.0] + [float(np.angle(z)) for z in w if abs(z) > 0.9 and abs(z - 1) > 1e-9]
    fld = _resolvent_norm_field(mat, oracle, lambda lam: np.abs(lam - 1.0))
    us = np.arange(-6, depth + 1, dtype=float)

    def angles(u):
        return clustered_angles(128, centers=centers, depth=int(min(max(u, 0) + 4, 48)))

    grid = polar_sup(fld, us, lambda u: 1.0 + 2.0 ** -u, angles, u_bounds=(us[0], us[-1]), rtol=rtol)
    if grid.diverged or pd.off_one or pd.defective:
        reason = "resolvent blows up at the unit circle"
        if pd.off_one:
            reason = "unimodular eigenvalue other than 1"
        return Constant(math.inf, math.inf, False, grid.diverged, len(us), reason, {"grid": grid.describe()})
    return Constant(grid.value, math.inf, True, grid.converged, len(us), "",
                    {"grid": grid.describe(), "witness_lambda": _polar(grid.argmax_witness)})


def _polar(w):
    z = w[0] * np.exp(1j * w[1])
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------------------
# sectoriality of B = I - T
# ---------------------------------------------------------------------------

ANGLE_LADDER = np.unique(np.concatenate([
    math.pi * np.arange(1, 64) / 64.0,
    math.pi / 2 - math.pi * 2.0 ** -np.arange(7, 41, dtype=float),
]))


COARSE_ANGLES = math.pi * np.arange(1, 8) / 8.0


@dataclass
class SectorReport:
    angle: float                  # the estimated type sigma
    spectral_angle: float         # max |arg| over the non-zero spectrum
    constants: dict               # ladder angle -> K_nu (finite ones only)
    stabilized: bool
    degenerate: bool
    note: str = ""

    def as_dict(self):
        return {
            "angle": self.angle,
            "spectral_angle": self.spectral_angle,
            "constants": [{"nu": float(k), "K": float(v)} for k, v in sorted(self.constants.items())],
            "stabilized": self.stabilized,
            "degenerate": self.degenerate,
            "note": self.note,
        }


def _ray_sup(mat, oracle, nu, scale, points=240, rtol=0.005, rounds=10):
    """sup over xi = r e^{+-i nu} of |xi| ||(xi - B)^{-1}|| (plus the limit 1 at infinity).

    A log-uniform scan of r in scale * [1e-6, 1e6] on both rays, then local
    zooms around the running argmax until the sup changes by less than rtol.
    """
    fld = _resolvent_norm_field(mat, oracle, np.abs)
    s = np.linspace(math.log(1e-6), math.log(1e6), points)
    ang = np.concatenate([np.full(points, nu), np.full(points, -nu)])
    vals = fld(scale * np.exp(np.concatenate([s, s])), ang)
    if not np.all(np.isfinite(vals)):
        return math.inf, False
    i = int(np.argmax(vals))
    best, bs, ba = max(1.0, float(vals[i])), float(s[i % points]), float(ang[i])
    h = s[1] - s[0]
    for _ in range(rounds):
        loc = bs + h * np.linspace(-1.0, 1.0, 17)
        v = fld(scale * np.exp(loc), np.full(len(loc), ba))
        if not np.all(np.isfinite(v)):
            return math.inf, False
        k = int(np.argmax(v))
        h /= 8.0
        if v[k] <= best * (1.0 + rtol):
            if v[k] > best:
                best, bs = float(v[k]), float(loc[k])
            return best, True
        best, bs = float(v[k]), float(loc[k])
    return best, False


def sector_type(B: OperatorSpec, rtol=0.005) -> SectorReport:
    """Smallest ladder angle nu with a finite, grid-stable K_nu for B."""
    mat = np.asarray(B.matrix)
    oracle = NormOracle(B.space)
    w = np.linalg.eigvals(mat)
    scale = max(float(np.abs(w).max()), 1e-300)
    nz = w[np.abs(w) > 1e-10 * max(1.0, scale)]
    if np.allclose(mat, 0.0, atol=1e-14):
        return SectorReport(0.0, 0.0, {}, True, True, "B = 0: kernel only, every sector admissible")
    if len(nz) and np.any((nz.real < 0) & (np.abs(nz.imag) <= 1e-14 * scale)):
        raise SpectrumError("B has a negative real eigenvalue: no sector of angle < pi")
    spec_angle = float(np.abs(np.angle(nz)).max()) if len(nz) else 0.0
    constants, sigma, stable_all = {}, None, True
    for nu in ANGLE_LADDER:
        if nu <= spec_angle + 1e-12:
            continue
        # past sigma only a coarse set of larger angles is recorded
        if sigma is not None and not np.any(np.isclose(nu, COARSE_ANGLES, rtol=0, atol=1e-15)):
            continue
        K, stable = _ray_sup(mat, oracle, float(nu), scale, rtol=rtol)
        if not math.isfinite(K):
            continue
        constants[float(nu)] = K
        if sigma is None and stable:
            sigma = float(nu)
        stable_all = stable_all and stable
    if sigma is None:
        raise SpectrumError("no admissible sector angle found on the ladder")
    note = "" if len(nz) == len(w) else "kernel part present (eigenvalue 0)"
    return SectorReport(sigma, spec_angle, constants, stable_all, len(nz) == 0, note)


# ---------------------------------------------------------------------------
# aggregate certificate
# ---------------------------------------------------------------------------

@dataclass
class RittCertificate:
    c0: Constant
    c1: Constant
    c2: Constant
    sector: SectorReport | None
    kernel_dim: int
    spectral_radius_on_range: float
    is_ritt: bool
    eigenvalues: np.ndarray
    flags: list

    def as_dict(self):
        return {
            "is_ritt": self.is_ritt,
            "c0": self.c0.as_dict(),
            "c1": self.c1.as_dict(),
            "c2": self.c2.as_dict(),
            "sector_type": None if self.sector is None else self.sector.as_dict(),
            "kernel_dim": self.kernel_dim,
            "spectral_radius_on_range": self.spectral_radius_on_range,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "flags": list(self.flags),
            "horizons": {"c0": self.c0.horizon, "c1": self.c1.horizon, "c2_rings": self.c2.horizon},
        }


def certify_ritt(T: OperatorSpec, with_resolvent=True, with_sector=True) -> RittCertificate:
    """Aggregate c0, c1, c2, the sector type of I - T and the ergodic data."""
    pd = analyse_periphery(T)
    flags = []
    c0 = power_bound(T)
    c1 = ritt_constant(T) if c0.finite else Constant.infinite("not power bounded")
    if not c0.finite:
        flags.append("c0=+inf: " + c0.reason)
    if not c1.finite:
        flags.append("c1=+inf: " + c1.reason)
    if pd.off_one:
        flags.append("unimodular eigenvalue other than 1")
    c2 = Constant(math.nan, math.inf, False, False, 0, "skipped")
    if with_resolvent:
        try:
            c2 = resolvent_constant(T)
        except SpectrumError as exc:
            c2 = Constant.infinite(str(exc))
        if not c2.finite:
            flags.append("c2=+inf: " + c2.reason)
    kernel_dim = 0
    for mu, P, mult in pd.clusters:
        if mu == 1.0:
            kernel_dim = mult
    is_ritt = c0.finite and c1.finite
    sector = None
    if with_sector and is_ritt:
        sector = sector_type(T.like(np.eye(T.dim) - np.asarray(T.matrix), label=f"I-{T.label}"))
    return RittCertificate(c0, c1, c2, sector, kernel_dim, pd.interior_radius, is_ritt, pd.eigenvalues, flags)
