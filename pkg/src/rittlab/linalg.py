"""Dense complex linear algebra on finite-dimensional Hilbert and l^p spaces.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the small frozen
dataclasses below attach the ambient norms.  Every routine is a pure function
of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConvergenceError,
    DecompositionError,
    DimensionError,
    SpectralProximityError,
)

SOLVE_RTOL = 1e-12
NEAR_DEFECTIVE_COND = 1e8
NORM_RESTARTS = 32


# ---------------------------------------------------------------------------
# spaces and operator containers
# ---------------------------------------------------------------------------

def as_complex_matrix(a, name="matrix") -> np.ndarray:
    """Validate and copy ``a`` into a finite 2-d complex array."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NormedSpace:
    """C^dim with either the Hilbert norm or an l^p norm (p may be inf)."""

    dim: int
    kind: str = "hilbert"
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.kind not in ("hilbert", "lp"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "hilbert":
            object.__setattr__(self, "p", 2.0)
        elif not (self.p >= 1.0):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def hilbert(cls, dim):
        return cls(dim, "hilbert")

    @classmethod
    def lp(cls, dim, p):
        return cls(dim, "lp", p)

    @property
    def is_hilbert(self):
        return self.p == 2.0

    def with_dim(self, dim):
        return NormedSpace(dim, self.kind, self.p)

    def norm(self, x):
        """Norm of a vector (or of each column of a 2-d array)."""
        x = np.asarray(x)
        return vec_norm(x, self.p)

    def describe(self):
        if self.kind == "hilbert":
            return "hilbert"
        return f"l^{'inf' if math.isinf(self.p) else _fmt(self.p)}"


def _fmt(v):
    return f"{v:g}"


@dataclass(frozen=True)
class OperatorSpec:
    """A square matrix ``T`` acting on the space ``X``."""

    matrix: np.ndarray
    space: NormedSpace
    label: str = ""

    def __post_init__(self):
        mat = as_complex_matrix(self.matrix)
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"operator must be square, got {mat.shape}")
        if mat.shape[0] != self.space.dim:
            raise DimensionError(f"matrix size {mat.shape[0]} != space dim {self.space.dim}")
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_matrix(cls, matrix, norm="hilbert", label=""):
        mat = as_complex_matrix(matrix)
        return cls(mat, _space_from_norm(mat.shape[0], norm), label)

    @property
    def dim(self):
        return self.space.dim

    def like(self, matrix, label=None):
        """Same space, new matrix."""
        return OperatorSpec(matrix, self.space, self.label if label is None else label)


@dataclass(frozen=True)
class ObservationSpec:
    """A rectangular matrix ``C`` from ``domain`` into ``target``."""

    matrix: np.ndarray
    domain: NormedSpace
    target: NormedSpace
    label: str = ""

    def __post_init__(self):
        mat = as_complex_matrix(self.matrix)
        if mat.shape[1] != self.domain.dim:
            raise DimensionError(f"C has {mat.shape[1]} columns, domain dim is {self.domain.dim}")
        if mat.shape[0] != self.target.dim:
            raise DimensionError(f"C has {mat.shape[0]} rows, target dim is {self.target.dim}")
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_matrix(cls, matrix, domain: NormedSpace, target_norm="hilbert", label=""):
        mat = as_complex_matrix(matrix)
        return cls(mat, domain, _space_from_norm(mat.shape[0], target_norm), label)

    @classmethod
    def identity(cls, space: NormedSpace, label="I"):
        return cls(np.eye(space.dim), space, space, label)

    def scaled(self, c):
        return ObservationSpec(c * self.matrix, self.domain, self.target, self.label)


def _space_from_norm(dim, norm):
    if isinstance(norm, NormedSpace):
        return norm.with_dim(dim)
    if norm == "hilbert":
        return NormedSpace.hilbert(dim)
    if isinstance(norm, (int, float)):
        return NormedSpace.lp(dim, float(norm))
    if isinstance(norm, str) and norm == "inf":
        return NormedSpace.lp(dim, math.inf)
    raise ValueError(f"unrecognised norm {norm!r}")


# ---------------------------------------------------------------------------
# vector and operator norms
# ---------------------------------------------------------------------------

def vec_norm(x, p, axis=0):
    """l^p norm along ``axis``; 1-d input returns a scalar."""
    x = np.asarray(x)
    if x.ndim == 1:
        axis = 0
    a = np.abs(x)
    if math.isinf(p):
        return a.max(axis=axis)
    if p == 2.0:
        return np.sqrt((a * a).sum(axis=axis))
    if p == 1.0:
        return a.sum(axis=axis)
    top = a.max(axis=axis, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    out = np.squeeze(safe, axis=axis) * ((a / safe) ** p).sum(axis=axis) ** (1.0 / p)
    return out


def conjugate_exponent(p):
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class NormBound:
    """Operator norm as an interval with a best point estimate.

    ``lower`` is attained by an evaluated witness.  ``upper`` is a rigorous
    bound (equal to ``lower`` where a closed form exists).  ``estimate`` is the
    best ascent value and is what ``float()`` returns.
    """

    lower: float
    upper: float
    estimate: float
    exact: bool
    witness: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __float__(self):
        return float(self.estimate)


def _sign(z):
    a = np.abs(z)
    return np.where(a > 0, z / np.where(a > 0, a, 1.0), 1.0)


def dual_vector(v, r, axis=-2):
    """Norming functional of ``v`` in l^r (unit norm in l^{r'}), columnwise."""
    a = np.abs(v)
    if math.isinf(r):
        idx = np.argmax(a, axis=axis)
        out = np.zeros_like(v)
        np.put_along_axis(out, np.expand_dims(idx, axis), np.take_along_axis(_sign(v), np.expand_dims(idx, axis), axis), axis)
        return out
    if r == 1.0:
        return _sign(v)
    nrm = vec_norm(v, r, axis=axis)
    nrm = np.where(nrm > 0, nrm, 1.0)
    return (a ** (r - 1.0)) * _sign(v) / np.expand_dims(nrm, axis) ** (r - 1.0)


def _boyd(A, p, q, X, iters=200, tol=1e-13):
    """Batched Boyd power iteration for ||A||_{p->q}.

    ``A`` has shape (..., m, n), ``X`` (..., n, s) holds s starting vectors.
    Returns the best value per batch element and the corresponding witness.
    """
    X = X / np.expand_dims(vec_norm(X, p, axis=-2), -2)
    pp = conjugate_exponent(p)
    best = np.full(A.shape[:-2], -np.inf)
    best_x = X[..., :, 0]
    prev = None
    for _ in range(iters):
        Y = A @ X
        vals = vec_norm(Y, q, axis=-2)
        j = np.argmax(vals, axis=-1)
        cur = np.take_along_axis(vals, j[..., None], -1)[..., 0]
        improved = cur > best
        best = np.where(improved, cur, best)
        cand = np.take_along_axis(X, j[..., None, None], -1)[..., 0]
        best_x = np.where(improved[..., None], cand, best_x)
        if prev is not None and np.all(np.abs(vals - prev) <= tol * np.maximum(vals, 1e-300)):
            break
        prev = vals
        Z = np.conj(np.swapaxes(A, -1, -2)) @ dual_vector(Y, q)
        Xn = dual_vector(Z, pp)
        zero = vec_norm(Z, pp, axis=-2) == 0
        X = np.where(zero[..., None, :], X, Xn)
        X = X / np.expand_dims(vec_norm(X, p, axis=-2), -2)
    return best, best_x


def _exact_norm(A, p, q):
    """Closed form of ||A||_{p->q} when one exists, else None."""
    if p == 2.0 and q == 2.0:
        if A.ndim == 2:
            return np.linalg.norm(A, 2)
        return np.linalg.svd(A, compute_uv=False)[..., 0]
    if p == 1.0:
        return vec_norm(A, q, axis=-2).max(axis=-1)
    if math.isinf(q):
        return vec_norm(A, conjugate_exponent(p), axis=-1).max(axis=-1)
    return None


def norm_upper(A, p, q):
    """Rigorous (possibly crude) upper bound on ||A||_{p->q}; exact if available."""
    A = np.asarray(A, dtype=np.complex128)
    ex = _exact_norm(A, p, q)
    if ex is not None:
        return ex
    m, n = A.shape[-2:]
    col = vec_norm(A, q, axis=-2).max(axis=-1) * n ** (1.0 - 1.0 / p)
    row = vec_norm(A, conjugate_exponent(p), axis=-1).max(axis=-1) * m ** (1.0 / q)
    sv = np.linalg.svd(A, compute_uv=False)[..., 0] if A.ndim > 2 else np.linalg.norm(A, 2)
    sv = sv * n ** max(0.0, 0.5 - 1.0 / p) * m ** max(0.0, 1.0 / q - 0.5)
    out = np.minimum(np.minimum(col, row), sv)
    if p == q:
        n1 = np.abs(A).sum(axis=-2).max(axis=-1)
        ninf = np.abs(A).sum(axis=-1).max(axis=-1)
        out = np.minimum(out, n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p))
    return out


def _starts(A, s, rng):
    m, n = A.shape[-2:]
    cols = [np.ones(n, dtype=complex)]
    _, _, vh = np.linalg.svd(A)
    cols.append(np.conj(vh[0]))
    k = int(np.argmax(np.abs(A).sum(axis=0)))
    cols.append(np.eye(n, dtype=complex)[k])
    while len(cols) < s:
        cols.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return np.stack(cols[:s], axis=1)


def op_norm(A, from_space: NormedSpace, to_space: NormedSpace, restarts=NORM_RESTARTS, seed=0) -> NormBound:
    """Operator norm of ``A`` from ``from_space`` to ``to_space``.

    Hilbert to Hilbert is the largest singular value.  The l^1 source and l^inf
    target cases have closed forms.  Otherwise a multi-start Boyd ascent gives
    the lower bound and estimate, and ``norm_upper`` the rigorous upper bound.
    """
    A = as_complex_matrix(A, "A")
    if A.shape != (to_space.dim, from_space.dim):
        raise DimensionError(f"A has shape {A.shape}, expected {(to_space.dim, from_space.dim)}")
    p, q = from_space.p, to_space.p
    ex = _exact_norm(A, p, q)
    if ex is not None:
        v = float(ex)
        return NormBound(v, v, v, True)
    rng = np.random.default_rng(seed)
    val, x = _boyd(A[None], p, q, _starts(A, restarts, rng)[None])
    val = float(val[0])
    up = float(norm_upper(A, p, q))
    return NormBound(val, max(up, val), val, False, x[0])


def norm_estimates(As, p, q, starts=6, seed=0):
    """Vectorised operator-norm estimates for a stack of matrices (grid scans)."""
    As = np.asarray(As, dtype=np.complex128)
    ex = _exact_norm(As, p, q)
    if ex is not None:
        return np.asarray(ex, dtype=float)
    n = As.shape[-1]
    rng = np.random.default_rng(seed)
    X0 = np.empty(As.shape[:-2] + (n, starts), dtype=complex)
    X0[..., 0] = 1.0
    if starts > 1:
        k = np.argmax(np.abs(As).sum(axis=-2), axis=-1)
        X0[..., 1] = np.eye(n)[k]
    for j in range(2, starts):
        X0[..., j] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    val, _ = _boyd(As, p, q, X0, iters=60, tol=1e-10)
    return val


def operator_norm(op: OperatorSpec, A=None) -> NormBound:
    """Shortcut: norm of ``A`` (default ``op.matrix``) as a map X -> X."""
    return op_norm(op.matrix if A is None else A, op.space, op.space)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    condition: float
    defective: bool
    near_defective: bool

    @property
    def radius(self):
        return float(np.abs(self.eigenvalues).max())


def spectrum(A) -> Spectrum:
    """Eigenvalues sorted by descending modulus then ascending argument.

    ``condition`` is the 2-norm condition number of the (column-normalised)
    eigenvector matrix.  ``defective`` flags a numerical rank drop of that
    matrix, ``near_defective`` a condition number above 1e8.
    """
    A = as_complex_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"spectrum needs a square matrix, got {A.shape}")
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((np.round(np.angle(w), 12), -np.round(np.abs(w), 12)))
    w, V = w[order], V[:, order]
    s = np.linalg.svd(V, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    rank = int(np.sum(s > s[0] * np.sqrt(np.finfo(float).eps)))
    return Spectrum(w, V, cond, rank < A.shape[0], cond > NEAR_DEFECTIVE_COND)


# ---------------------------------------------------------------------------
# resolvents
# ---------------------------------------------------------------------------

def _shifted(T, point, mode):
    n = T.shape[0]
    eye = np.eye(n, dtype=complex)
    if mode == "lambda":
        return point * eye - T
    if mode == "omega":
        return eye - point * T
    raise ValueError(f"mode must be 'lambda' or 'omega', got {mode!r}")


def resolvent(T, point, mode="lambda", power=1):
    """``(point - T)^{-power}`` (mode lambda) or ``(I - point T)^{-power}`` (mode omega).

    Computed by an LU factorisation and ``power`` repeated solves.
    Raises ``SpectralProximityError`` when the shifted matrix is numerically
    singular.
    """
    mat = T.matrix if isinstance(T, OperatorSpec) else as_complex_matrix(T, "T")
    if int(power) != power or power < 1:
        raise ValueError(f"power must be a positive integer, got {power}")
    M = _shifted(mat, complex(point), mode)
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= SOLVE_RTOL * max(s[0], 1.0):
        raise SpectralProximityError(
            f"shifted matrix is numerically singular at {point} (sigma_min={s[-1]:.3e})", float(s[-1])
        )
    lu = sla.lu_factor(M)
    eye = np.eye(mat.shape[0], dtype=complex)
    X = sla.lu_solve(lu, eye)
    res = np.linalg.norm(M @ X - eye, 2)
    if res > 1e3 * SOLVE_RTOL * (s[0] / s[-1]):
        raise SpectralProximityError(f"resolvent residual {res:.3e} too large at {point}", float(s[-1]))
    for _ in range(int(power) - 1):
        X = sla.lu_solve(lu, X)
    return X


def batch_resolvent(T, points, mode="omega", power=1):
    """Stack of resolvent powers at many points; singular points yield NaN blocks."""
    T = np.asarray(T, dtype=complex)
    pts = np.asarray(points, dtype=complex).ravel()
    n = T.shape[0]
    eye = np.eye(n, dtype=complex)
    if mode == "omega":
        M = eye[None] - pts[:, None, None] * T[None]
    else:
        M = pts[:, None, None] * eye[None] - T[None]
    try:
        X = np.linalg.solve(M, np.broadcast_to(eye, M.shape))
        for _ in range(int(power) - 1):
            X = np.linalg.solve(M, X)
    except np.linalg.LinAlgError:
        X = np.empty_like(M)
        for i in range(len(pts)):
            try:
                Xi = np.linalg.solve(M[i], eye)
                for _ in range(int(power) - 1):
                    Xi = np.linalg.solve(M[i], Xi)
                X[i] = Xi
            except np.linalg.LinAlgError:
                X[i] = np.nan
    return X


# ---------------------------------------------------------------------------
# mean ergodic splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErgodicSplit:
    """Projections onto Ker(I - T) and along it onto Ran(I - T)."""

    kernel: np.ndarray
    range: np.ndarray
    kernel_dim: int
    coupling: float

    def residuals(self, T):
        P, Q = self.kernel, self.range
        n = P.shape[0]
        T = np.asarray(T)
        return {
            "idempotent": float(np.linalg.norm(P @ P - P, 2)),
            "complementary": float(np.linalg.norm(P + Q - np.eye(n), 2)),
            "orthogonality": float(max(np.linalg.norm(P @ Q, 2), np.linalg.norm(Q @ P, 2))),
            "fixed": float(np.linalg.norm(T @ P - P, 2)),
            "commute": float(np.linalg.norm(T @ P - P @ T, 2)),
        }


def null_basis(M, rtol=1e-10):
    """Orthonormal right and left null bases of ``M`` via the SVD."""
    U, s, Vh = np.linalg.svd(M)
    tol = rtol * max(1.0, s[0])
    k = int(np.sum(s <= tol))
    n = M.shape[0]
    if k == 0:
        return np.zeros((n, 0), complex), np.zeros((n, 0), complex)
    return np.conj(Vh[-k:]).T, U[:, -k:]


def spectral_projection(T, mu, rtol=1e-10):
    """Riesz projection for a semisimple eigenvalue ``mu`` of ``T``.

    Returns ``(P, coupling)`` where ``coupling`` is the smallest singular value
    of ``W^H K`` (left vs right eigenvectors).  A tiny coupling means ``mu``
    sits in a Jordan block larger than 1.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    K, W = null_basis(mu * np.eye(n) - T, rtol)
    if K.shape[1] == 0:
        return np.zeros((n, n), complex), math.inf
    G = np.conj(W).T @ K
    sg = np.linalg.svd(G, compute_uv=False)
    coupling = float(sg[-1])
    if coupling <= 1.0 / NEAR_DEFECTIVE_COND:
        return None, coupling
    P = K @ np.linalg.solve(G, np.conj(W).T)
    return P, coupling


def mean_ergodic_decompose(T) -> ErgodicSplit:
    """Split C^n = Ker(I - T) (+) Ran(I - T) for power bounded ``T``.

    The kernel projection is ``K (W^H K)^{-1} W^H`` with right/left null bases
    of ``I - T``.  Raises ``DecompositionError`` if the eigenvalue 1 is defective.
    """
    mat = T.matrix if isinstance(T, OperatorSpec) else as_complex_matrix(T, "T")
    n = mat.shape[0]
    P, coupling = spectral_projection(mat, 1.0)
    if P is None:
        raise DecompositionError(
            f"eigenvalue 1 is defective (left/right eigenvector coupling {coupling:.2e})"
        )
    kdim = int(round(np.trace(P).real))
    return ErgodicSplit(P, np.eye(n) - P, kdim, coupling)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def encode_norm(space: NormedSpace):
    if space.kind == "hilbert":
        return "hilbert"
    return {"lp": "inf" if math.isinf(space.p) else space.p}


def decode_norm(obj, dim):
    if obj == "hilbert" or obj is None:
        return NormedSpace.hilbert(dim)
    if isinstance(obj, dict) and "lp" in obj:
        p = obj["lp"]
        p = math.inf if p == "inf" else float(p)
        return NormedSpace.lp(dim, p)
    raise ValueError(f"bad norm descriptor {obj!r}")


def encode_matrix(A):
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def decode_matrix(rows):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"matrix must be nested [[[re, im], ...], ...]: {exc}") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError(f"matrix must have shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def operator_to_json(op: OperatorSpec):
    return {"label": op.label, "dim": op.dim, "norm": encode_norm(op.space), "matrix": encode_matrix(op.matrix)}


def operator_from_json(obj) -> OperatorSpec:
    mat = decode_matrix(obj["matrix"])
    dim = int(obj.get("dim", mat.shape[0]))
    return OperatorSpec(mat, decode_norm(obj.get("norm"), dim), str(obj.get("label", "")))


def observation_to_json(obs: ObservationSpec):
    return {
        "label": obs.label,
        "dim": obs.target.dim,
        "norm": encode_norm(obs.target),
        "domain": {"dim": obs.domain.dim, "norm": encode_norm(obs.domain)},
        "matrix": encode_matrix(obs.matrix),
    }


def observation_from_json(obj, domain: NormedSpace | None = None) -> ObservationSpec:
    mat = decode_matrix(obj["matrix"])
    target = decode_norm(obj.get("norm"), int(obj.get("dim", mat.shape[0])))
    if "domain" in obj:
        d = obj["domain"]
        domain = decode_norm(d.get("norm"), int(d.get("dim", mat.shape[1])))
    elif domain is None:
        domain = NormedSpace.hilbert(mat.shape[1])
    return ObservationSpec(mat, domain, target, str(obj.get("label", "")))
