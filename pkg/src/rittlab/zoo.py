"""Seeded operator families with their expected certificate profiles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from .linalg import (
    NormedSpace,
    ObservationSpec,
    OperatorSpec,
    as_complex_matrix,
    decode_norm,
    encode_norm,
    mean_ergodic_decompose,
    operator_to_json,
)

SINKHORN_ITERS = 200
SINKHORN_TOL = 1e-12
UNIMODULAR_TOL = 1e-12


@dataclass(frozen=True)
class ZooEntry:
    name: str
    operator: OperatorSpec
    expected: dict
    seed: int | None = None
    family: str = ""
    params: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "name": self.name,
            "family": self.family,
            "seed": self.seed,
            "params": self.params,
            "expected": self.expected,
            "operator": operator_to_json(self.operator),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True)


def _space(norm, dim):
    if isinstance(norm, NormedSpace):
        return norm.with_dim(dim)
    return decode_norm(norm, dim)


def random_unitary(n, seed):
    if n == 1:
        rng = np.random.default_rng(seed)
        return np.array([[np.exp(2j * math.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=np.random.default_rng(seed))


def _expected(is_ritt, kappa_finite, notes=""):
    return {"is_ritt": bool(is_ritt), "kappa_finite": bool(kappa_finite), "notes": notes}


def make_normal_ritt(eigenvalues, seed=None, name="normal", norm="hilbert") -> ZooEntry:
    """Diagonal operator (conjugated by a seeded unitary when ``seed`` is given)."""
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    for z in lam:
        if abs(z) > 1.0 + UNIMODULAR_TOL:
            raise ValueError(f"eigenvalue {z} lies outside the closed unit disc")
        if abs(z) >= 1.0 - UNIMODULAR_TOL and abs(z - 1.0) > UNIMODULAR_TOL:
            raise ValueError(f"eigenvalue {z} has modulus 1 but differs from 1")
    D = np.diag(lam)
    if seed is not None:
        U = random_unitary(len(lam), seed)
        D = U @ D @ U.conj().T
    op = OperatorSpec(D, _space(norm, len(lam)), name)
    params = {"eigenvalues": [[z.real, z.imag] for z in lam]}
    return ZooEntry(name, op, _expected(True, True, "normal, spectrum in a Stolz-type set"), seed, "normal", params)


def make_diagonal(eigenvalues, name="diagonal", norm="hilbert") -> ZooEntry:
    """Unchecked diagonal operator (negative controls)."""
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    inside = np.all((np.abs(lam) < 1.0 - UNIMODULAR_TOL) | (np.abs(lam - 1.0) <= UNIMODULAR_TOL))
    op = OperatorSpec(np.diag(lam), _space(norm, len(lam)), name)
    params = {"eigenvalues": [[z.real, z.imag] for z in lam]}
    return ZooEntry(name, op, _expected(bool(inside), bool(inside), "diagonal control"), None, "diagonal", params)


def make_halved_contraction(S, name="halved", seed=None, params=None) -> ZooEntry:
    """T = (I + S) / 2 for a Hilbert-space contraction S."""
    if isinstance(S, OperatorSpec):
        if not S.space.is_hilbert:
            raise ValueError("halved contractions are generated on Hilbert spaces")
        S = np.asarray(S.matrix)
    S = as_complex_matrix(S, "S")
    nrm = float(np.linalg.norm(S, 2))
    if nrm > 1.0 + 1e-12:
        raise ValueError(f"||S|| = {nrm:.6g} exceeds 1")
    n = S.shape[0]
    op = OperatorSpec(0.5 * (np.eye(n) + S), NormedSpace.hilbert(n), name)
    return ZooEntry(name, op, _expected(True, True, "(I + S)/2 with S a Hilbert contraction"), seed, "halved",
                    dict(params or {}))


def random_contraction(n, seed, norm=1.0):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return norm * G / np.linalg.norm(G, 2)


def sinkhorn(M, iters=SINKHORN_ITERS, tol=SINKHORN_TOL):
    """Alternate row and column normalisation of a positive matrix."""
    M = np.array(M, dtype=float)
    for _ in range(iters):
        M /= M.sum(axis=1, keepdims=True)
        M /= M.sum(axis=0, keepdims=True)
        if np.abs(M.sum(axis=1) - 1.0).max() <= tol:
            break
    return M


def make_lazy_markov(n, theta, seed=0, norm="hilbert", P=None, name=None) -> ZooEntry:
    """T = theta I + (1 - theta) P with P doubly stochastic (Sinkhorn of a seeded positive matrix)."""
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    if P is None:
        rng = np.random.default_rng(seed)
        P = sinkhorn(rng.random((n, n)) + 1e-3)
    P = np.asarray(P, dtype=float)
    if P.shape != (n, n):
        raise ValueError(f"P must be {n}x{n}")
    T = theta * np.eye(n) + (1.0 - theta) * P
    space = _space(norm, n)
    name = name or f"lazy_markov_{n}"
    return ZooEntry(name, OperatorSpec(T, space, name), _expected(True, True, "positive doubly stochastic contraction"),
                    seed, "lazy_markov", {"n": n, "theta": theta})


def make_jordan_nonritt(n, lam=1.0, name=None) -> ZooEntry:
    """Jordan block J_n(lam); only |lam| < 1 is a Ritt operator (positive control)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    lam = complex(lam)
    J = lam * np.eye(n, dtype=complex) + np.diag(np.ones(n - 1), 1)
    ritt = abs(lam) < 1.0
    name = name or f"jordan_{n}"
    notes = "Jordan block strictly inside the disc (positive control)" if ritt else "Jordan block on the unit circle"
    return ZooEntry(name, OperatorSpec(J, NormedSpace.hilbert(n), name), _expected(ritt, ritt, notes), None, "jordan",
                    {"n": n, "lam": [lam.real, lam.imag]})


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

def _cplx(v):
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)


def build_entry(rec) -> ZooEntry:
    """Regenerate a manifest record."""
    fam, name, seed = rec["family"], rec["name"], rec.get("seed")
    prm = rec.get("params", {})
    norm = rec.get("norm", "hilbert")
    if fam == "normal":
        e = make_normal_ritt([_cplx(z) for z in prm["eigenvalues"]], seed, name, norm)
    elif fam == "diagonal":
        e = make_diagonal([_cplx(z) for z in prm["eigenvalues"]], name, norm)
    elif fam == "halved":
        kind, n = prm["kind"], int(prm["n"])
        if kind == "identity":
            S = np.eye(n) * float(prm.get("sign", 1.0))
        elif kind == "unitary":
            S = random_unitary(n, seed)
        elif kind == "contraction":
            S = random_contraction(n, seed, float(prm.get("norm", 1.0)))
        elif kind == "fixed_plus_contraction":
            S = np.zeros((n, n), complex)
            S[0, 0] = 1.0
            S[1:, 1:] = random_contraction(n - 1, seed, float(prm.get("norm", 1.0)))
        else:
            raise ValueError(f"unknown halved kind {kind!r}")
        e = make_halved_contraction(S, name, seed, prm)
    elif fam == "lazy_markov":
        e = make_lazy_markov(int(prm["n"]), float(prm["theta"]), seed or 0, norm, None, name)
    elif fam == "jordan":
        e = make_jordan_nonritt(int(prm["n"]), _cplx(prm["lam"]), name)
    else:
        raise ValueError(f"unknown family {fam!r}")
    exp = dict(e.expected)
    exp.update(rec.get("expected", {}))
    return ZooEntry(e.name, e.operator, exp, e.seed, fam, prm)


def manifest_path():
    return resources.files("rittlab").joinpath("data/zoo_manifest.json")


def load_manifest(path=None):
    """Records of the manifest (default: the frozen one shipped with the package)."""
    if path is None:
        text = manifest_path().read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    return data["entries"] if isinstance(data, dict) else data


def load_zoo(path=None, role=None):
    recs = load_manifest(path)
    return [build_entry(r) for r in recs if role is None or r.get("role") == role]


def get_entry(name, path=None, seed=None) -> ZooEntry:
    for r in load_manifest(path):
        if r["name"] == name:
            if seed is not None:
                r = dict(r, seed=int(seed))
            return build_entry(r)
    raise KeyError(f"no zoo entry named {name!r}")


def standard_observations(entry: ZooEntry, seed=0, rows=2):
    """Observations used by the harnesses.

    ``identity`` and ``random`` see the kernel of I - T (obstructed when it is
    nontrivial); ``range_identity`` and ``random_range`` are composed with the
    range projection; ``sqrt_B`` is (I - T)^{1/2}.
    """
    from .calculus import frac_power

    op = entry.operator
    n = op.dim
    X = op.space
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((rows, n)) + 1j * rng.standard_normal((rows, n))
    Q = mean_ergodic_decompose(np.asarray(op.matrix)).range
    B = np.eye(n) - np.asarray(op.matrix)
    Y = X.with_dim(rows)
    return {
        "identity": ObservationSpec.identity(X),
        "range_identity": ObservationSpec(Q, X, X, "Q"),
        "random": ObservationSpec(R, X, Y, "random"),
        "random_range": ObservationSpec(R @ Q, X, Y, "random*Q"),
        "sqrt_B": ObservationSpec(frac_power(B, 0.5, "auto").value, X, X, "(I-T)^1/2"),
    }
