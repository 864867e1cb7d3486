import numpy as np
from hypothesis import HealthCheck, settings

from rittlab.linalg import NormedSpace, OperatorSpec
from rittlab.zoo import random_contraction, random_unitary

settings.register_profile(
    "rittlab",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("rittlab")


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_ritt(n, seed, kind="normal", radius=0.9, kernel=0):
    """Seeded Hilbert Ritt operator.

    ``normal``: unitary conjugate of a diagonal with eigenvalues in a Stolz
    region (plus ``kernel`` copies of 1); ``halved``: (I + S)/2 for a random
    contraction S.
    """
    rng = np.random.default_rng(seed)
    if kind == "halved":
        S = random_contraction(n, seed, 0.95 * rng.random() + 0.05)
        return 0.5 * (np.eye(n) + S)
    m = n - kernel
    r = radius * np.sqrt(rng.random(m))
    lam = 0.5 + 0.5 * r * np.exp(2j * np.pi * rng.random(m))
    lam = np.concatenate([np.ones(kernel), lam])
    U = random_unitary(n, seed)
    return U @ np.diag(lam) @ U.conj().T


def random_similar(n, seed, eigenvalues, cond=4.0):
    """V diag(eigenvalues) V^{-1} with V of modest condition number."""
    rng = np.random.default_rng(seed)
    U1, U2 = random_unitary(n, seed), random_unitary(n, seed + 1)
    s = np.geomspace(1.0, cond, n)
    rng.shuffle(s)
    V = U1 @ np.diag(s) @ U2
    return V @ np.diag(eigenvalues) @ np.linalg.inv(V)


def hilbert_op(T, label="T"):
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    return OperatorSpec(T, NormedSpace.hilbert(T.shape[0]), label)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if rep.when == "call" and "criterion" in props:
                rows.append((props["criterion"], outcome, props))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, props in sorted(rows, key=lambda r: r[0]):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:>2} {status}  {props.get('title', '')}  "
            f"[{props.get('elapsed', float('nan')):.2f}s / limit {props.get('limit', 0):g}s]  {props.get('detail', '')}"
        )
