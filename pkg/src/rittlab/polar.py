"""Adaptive maximisation of a scalar field over polar grids.

Points are addressed by a ring coordinate ``u`` (an integer ladder on the base
grid, mapped to a radius by the caller) and an angle.  The base grid is
scanned, then refined locally around the running argmax until the relative
change of the supremum per round drops below ``rtol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

TWO_PI = 2.0 * math.pi


@dataclass
class DiscGrid:
    radii: np.ndarray
    angles_per_ring: list
    refinement_rounds: int
    argmax_witness: tuple
    value: float
    ring_sups: np.ndarray
    diverged: bool
    converged: bool
    last_change: float
    profile: np.ndarray = field(repr=False, default=None)

    def describe(self):
        return {
            "rings": len(self.radii),
            "radii_min": float(np.min(self.radii)),
            "radii_max": float(np.max(self.radii)),
            "angles_per_ring": [int(a) for a in self.angles_per_ring],
            "refinement_rounds": self.refinement_rounds,
            "argmax_witness": {"radius": self.argmax_witness[0], "angle": self.argmax_witness[1]},
            "ring_sups": [float(v) for v in self.ring_sups],
            "diverged": self.diverged,
            "converged": self.converged,
            "last_relative_change": self.last_change,
        }


def clustered_angles(base_count, centers=(0.0,), depth=20, extra=()):
    """Uniform angles plus geometric clusters ``c +- pi 2^-i`` around centers."""
    ang = [np.linspace(0.0, TWO_PI, base_count, endpoint=False)]
    steps = math.pi * 2.0 ** -np.arange(1, depth + 1)
    for c in centers:
        ang.append(c + steps)
        ang.append(c - steps)
        ang.append(np.array([c]))
    ang.append(np.asarray(extra, dtype=float))
    a = np.mod(np.concatenate(ang), TWO_PI)
    return np.unique(np.round(a, 15))


def _pick(values, r, a, rel=1e-12):
    """Argmax with lexicographic tie-breaking on (radius, angle)."""
    v = np.where(np.isnan(values), np.inf, values)
    top = np.max(v)
    if not np.isfinite(top):
        idx = np.flatnonzero(~np.isfinite(v))
    else:
        idx = np.flatnonzero(v >= top - rel * abs(top))
    order = np.lexsort((a[idx], r[idx]))
    i = idx[order[0]]
    return int(i), float(top)


def _diverging(ring_sups, window, growth):
    if len(ring_sups) < window + 1:
        return False
    tail = np.asarray(ring_sups[-(window + 1):])
    if not np.all(np.isfinite(tail)):
        return True
    inc = np.all(np.diff(tail) > 0)
    return bool(inc and tail[-1] > (1.0 + growth) * tail[0])


def polar_sup(
    f,
    ring_coords,
    radius_of,
    angles_for_ring,
    *,
    u_bounds,
    rtol=0.005,
    max_rounds=25,
    window=8,
    growth=0.05,
    polish=True,
):
    """Maximise ``f(radius, angle)`` (vectorised) over a polar grid.

    ``ring_coords`` are the ring ladder coordinates ordered towards the
    boundary where divergence may happen; ``radius_of(u)`` maps them to radii.
    ``angles_for_ring(u)`` returns the angles sampled on ring ``u``.
    """
    us = np.asarray(ring_coords, dtype=float)
    pts_r, pts_a, pts_u, counts = [], [], [], []
    for u in us:
        ang = np.asarray(angles_for_ring(u), dtype=float)
        counts.append(len(ang))
        pts_r.append(np.full(len(ang), radius_of(u)))
        pts_a.append(ang)
        pts_u.append(np.full(len(ang), u))
    R = np.concatenate(pts_r)
    A = np.concatenate(pts_a)
    U = np.concatenate(pts_u)
    V = np.asarray(f(R, A), dtype=float)
    V = np.where(np.isnan(V), np.inf, V)
    ring_sups = np.array([V[U == u].max() for u in us])
    profile = np.column_stack([R, A, V])
    radii = np.array([radius_of(u) for u in us])

    if _diverging(ring_sups, window, growth) or not np.all(np.isfinite(V)):
        i, _ = _pick(V, R, A)
        return DiscGrid(radii, counts, 0, (float(R[i]), float(A[i])), math.inf, ring_sups, True, False, math.inf, profile)

    i, best = _pick(V, R, A)
    bu, ba = float(U[i]), float(A[i])
    ring_ang = np.sort(A[U == bu])
    if len(ring_ang) > 1:
        gaps = np.diff(np.concatenate([ring_ang, ring_ang[:1] + TWO_PI]))
        k = int(np.searchsorted(ring_ang, ba))
        da = float(max(gaps[k % len(gaps)], gaps[(k - 1) % len(gaps)]))
    else:
        da = math.pi
    du = 1.0
    lo, hi = u_bounds
    rounds, change, converged = 0, math.inf, False
    grid = np.linspace(-1.0, 1.0, 9)
    while rounds < max_rounds:
        rounds += 1
        uu = np.clip(bu + du * grid, lo, hi)
        aa = ba + da * grid
        UU, AA = np.meshgrid(uu, aa, indexing="ij")
        RR = np.array([radius_of(u) for u in UU.ravel()])
        vals = np.asarray(f(RR, AA.ravel()), dtype=float)
        vals = np.where(np.isnan(vals), np.inf, vals)
        j, loc = _pick(vals, RR, np.mod(AA.ravel(), TWO_PI))
        prev = best
        if loc > best:
            best, bu, ba = loc, float(UU.ravel()[j]), float(AA.ravel()[j])
        change = (best - prev) / best if best > 0 else 0.0
        du, da = du / 4.0, da / 4.0
        if not np.isfinite(best):
            return DiscGrid(radii, counts, rounds, (radius_of(bu), ba % TWO_PI), math.inf, ring_sups, True, False, math.inf, profile)
        if rounds >= 2 and change < rtol:
            converged = True
            break

    if polish and best > 0:
        def neg(z):
            u = float(np.clip(z[0], lo, hi))
            v = f(np.array([radius_of(u)]), np.array([z[1]]))[0]
            return -v if np.isfinite(v) else 1e300

        res = minimize(neg, [bu, ba], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14 * best, "maxiter": 400})
        # ties keep the grid witness, which honours the lexicographic order
        if -res.fun > best * (1.0 + 1e-12):
            change = max(change, (-res.fun - best) / -res.fun)
            best, bu, ba = -res.fun, float(np.clip(res.x[0], lo, hi)), float(res.x[1])
            converged = converged and change < rtol
    return DiscGrid(radii, counts, rounds, (float(radius_of(bu)), float(ba % TWO_PI)), float(best), ring_sups, False,
                    bool(converged), float(change), profile)
