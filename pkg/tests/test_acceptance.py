"""Acceptance criteria, one test per criterion, each with its time limit.

Every test records ``criterion``/``title``/``elapsed``/``detail`` properties;
the conftest summary hook prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from conftest import crandn, hilbert_op, random_ritt
from rittlab.admissibility import (
    admissibility_constant,
    admissibility_norm,
    automatic_weiss_check,
    series_identity_check,
    square_function_constant,
    square_function_equivalence,
    verify_weiss_theorem,
    weiss_constant,
)
from rittlab.calculus import frac_power_contour, frac_power_eigen
from rittlab.linalg import NormedSpace
from rittlab.rademacher import lq_square_function, r_admissibility_constant, rad_norm
from rittlab.ritt import certify_ritt
from rittlab.zoo import get_entry, load_manifest, load_zoo, standard_observations

# criterion 4 equivalence constant, recorded at the first run
EQUIVALENCE_C = 2.294421052257803
EQUIVALENCE_TOL = 0.05
EQUIVALENCE_MEMBERS = [
    "normal_half", "normal_disc_4", "normal_stolz_6", "normal_kernel2_4", "halved_neg_identity_3",
    "halved_unitary_4", "halved_unitary_8", "halved_contraction_6", "lazy_markov_hilbert_6",
    "lazy_markov_hilbert_8",
]
FRAC_MEMBERS = [
    "normal_half", "normal_disc_4", "normal_stolz_6", "normal_kernel2_4", "halved_unitary_8",
    "halved_unitary_16", "halved_contraction_6", "halved_fixed_contraction_5", "lazy_markov_hilbert_6",
    "lazy_markov_hilbert_8",
]
# defective B: only the contour route applies, checked through the semigroup law
CONTOUR_ONLY = ["jordan_half_2"]
R_MEMBERS = ["normal_disc_4", "normal_kernel2_4", "halved_unitary_8", "halved_contraction_6",
             "lazy_markov_hilbert_6"]


class Criterion:
    def __init__(self, record, number, title, limit):
        self.record, self.number, self.title, self.limit = record, number, title, limit
        self.detail = ""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.elapsed = time.perf_counter() - self.t0
        for k, v in (("criterion", self.number), ("title", self.title), ("elapsed", self.elapsed),
                     ("limit", self.limit), ("detail", self.detail)):
            self.record(k, v)
        ok = exc_type is None and self.elapsed < self.limit
        print(f"criterion {self.number} {'PASS' if ok else 'FAIL'}: {self.title} "
              f"({self.elapsed:.2f}s, limit {self.limit:g}s) {self.detail}")
        if exc_type is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"
        return False


@pytest.fixture
def criterion(record_property):
    return lambda number, title, limit: Criterion(record_property, number, title, limit)


def test_criterion_01_scalar_closed_forms(criterion):
    with criterion(1, "scalar closed forms (T = 0.5)", 1.0) as c:
        T = hilbert_op([[0.5]])
        M = admissibility_constant(T, None, 0).value
        K = weiss_constant(T, None, 0, 0).K
        kappa = square_function_constant(T, 1).value
        errs = [abs(M - 2 / math.sqrt(3)), abs(K - 2 / math.sqrt(3)), abs(kappa - 2 / 3)]
        c.detail = f"max error {max(errs):.1e}"
        assert max(errs) <= 1e-6


def test_criterion_02_series_identity(criterion):
    with criterion(2, "resolvent power series identity", 10.0) as c:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for i in range(20):
            n = int(rng.integers(1, 9))
            T = random_ritt(n, 1000 + i, ["normal", "halved"][i % 2], kernel=i % 3 if i % 2 == 0 and n > 2 else 0)
            omega = 0.95 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
            m, alpha = int(rng.integers(0, 3)), int(rng.choice([0, 1, 2]))
            r = series_identity_check(hilbert_op(T), alpha, m, omega)
            worst = max(worst, r["residual"])
        c.detail = f"max residual {worst:.1e}"
        assert worst <= 1e-10


def test_criterion_03_fractional_powers(criterion):
    with criterion(3, "eigen vs contour and semigroup law", 30.0) as c:
        cross = semi = 0.0
        for name in FRAC_MEMBERS:
            T = np.asarray(get_entry(name).operator.matrix)
            assert T.shape[0] <= 16
            B = np.eye(len(T)) - T
            e = frac_power_eigen(B, 0.5).value
            k = frac_power_contour(B, 0.5).value
            cross = max(cross, np.linalg.norm(e - k, 2))
            semi = max(semi, np.linalg.norm(e @ e - B, 2), np.linalg.norm(k @ k - B, 2))
        for name in CONTOUR_ONLY:
            B = np.eye(2) - np.asarray(get_entry(name).operator.matrix)
            k = frac_power_contour(B, 0.5).value
            semi = max(semi, np.linalg.norm(k @ k - B, 2))
        c.detail = f"cross {cross:.1e}, semigroup {semi:.1e}"
        assert cross <= 1e-8 and semi <= 1e-8


def test_criterion_04_square_function_equivalence(criterion):
    with criterion(4, "square functions a = 1 vs a = 1/2", 60.0) as c:
        lo, hi = math.inf, 0.0
        for name in EQUIVALENCE_MEMBERS:
            rep = square_function_equivalence(get_entry(name).operator, 1.0, 0.5, trials=50, seed=0)
            assert len(rep.ratios) == 50
            lo, hi = min(lo, rep.low), max(hi, rep.high)
        C = max(hi, 1 / lo)
        bound = EQUIVALENCE_C * (1 + EQUIVALENCE_TOL)
        c.detail = f"ratios in [{lo:.4f}, {hi:.4f}], C = {C:.6f} (recorded {EQUIVALENCE_C:.6f})"
        assert 1 / bound <= lo and hi <= bound
        assert abs(C - EQUIVALENCE_C) <= EQUIVALENCE_TOL * EQUIVALENCE_C


def test_criterion_05_finiteness_equivalence(criterion):
    with criterion(5, "M finite iff K stabilizes on the frozen manifest", 120.0) as c:
        entries = load_zoo(role="ritt_hilbert")
        assert len(entries) >= 12
        counts = {"consistent": 0, "inconsistent": 0, "not-applicable": 0}
        obstructed = 0
        for e in entries:
            assert e.operator.space.is_hilbert and e.expected["kappa_finite"]
            for label, C in standard_observations(e).items():
                rep = verify_weiss_theorem(e.operator, C, 0.0, 0.0)
                counts[rep.verdict] += 1
                if rep.kernel_obstruction:
                    obstructed += 1
                    assert math.isinf(rep.M) and math.isinf(rep.K), (e.name, label)
        c.detail = f"{len(entries)} entries, {counts}, {obstructed} kernel-obstructed"
        assert counts["inconsistent"] == 0 and counts["not-applicable"] == 0
        assert obstructed > 0


def test_criterion_06_automatic_weiss(criterion):
    with criterion(6, "automatic Weiss check on certified Ritt members", 120.0) as c:
        checked = 0
        worst = 0.0
        for e in load_zoo():
            if not certify_ritt(e.operator, with_resolvent=False, with_sector=False).is_ritt:
                continue
            for ab in ((0, 0), (1, 1), (0, 2)):
                W = automatic_weiss_check(e.operator, *ab)
                assert W.finite and W.converged, (e.name, ab)
                worst = max(worst, W.grid.last_change)
                checked += 1
        c.detail = f"{checked} checks, worst last-round change {worst:.1e}"
        assert worst < 0.005


def test_criterion_07_contractions_have_square_functions(criterion):
    with criterion(7, "Hilbert contractions give finite kappa", 60.0) as c:
        count = 0
        for e in load_zoo():
            T = np.asarray(e.operator.matrix)
            if not e.operator.space.is_hilbert or np.linalg.norm(T, 2) > 1 + 1e-12:
                continue
            if not certify_ritt(e.operator, with_resolvent=False, with_sector=False).is_ritt:
                continue
            k = square_function_constant(e.operator, 1.0)
            assert k.finite and k.certified, e.name
            count += 1
        c.detail = f"{count} contraction members"
        assert count >= 10


def test_criterion_08_rademacher_collapse(criterion):
    with criterion(8, "Rademacher collapse and Monte Carlo accuracy", 60.0) as c:
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(100):
            k, d = int(rng.integers(1, 13)), int(rng.integers(1, 6))
            Y = crandn(rng, k, d)
            ex = rad_norm(Y, NormedSpace.hilbert(d), "exhaustive").value
            worst = max(worst, abs(ex - math.sqrt((np.abs(Y) ** 2).sum())))
        mc_err = 0.0
        for i, p in enumerate([1.0, 3.0] * 5):
            k, d = int(rng.integers(2, 17)), int(rng.integers(1, 5))
            Y = crandn(rng, k, d)
            X = NormedSpace.lp(d, p)
            ex = rad_norm(Y, X, "exhaustive").value
            mc = rad_norm(Y, X, "monte_carlo", samples=2**16, seed=i).value
            mc_err = max(mc_err, abs(mc - ex) / ex)
        c.detail = f"Hilbert error {worst:.1e}, Monte Carlo relative error {mc_err:.2%}"
        assert worst <= 1e-12 and mc_err <= 0.02


def test_criterion_09_hilbert_consistency(criterion):
    with criterion(9, "R-admissibility and l^q sums on Hilbert spaces", 60.0) as c:
        gap = lq_gap = 0.0
        for name in R_MEMBERS:
            e = get_entry(name)
            Q = standard_observations(e)["range_identity"]
            a = r_admissibility_constant(e.operator, Q, 0).value
            b = admissibility_constant(e.operator, Q, 0).value
            gap = max(gap, abs(a - b))
            rng = np.random.default_rng(9)
            for alpha in (0.0, 1.0):
                x = crandn(rng, e.operator.dim)
                v = lq_square_function(e.operator, Q, alpha, x)["value"]
                lq_gap = max(lq_gap, abs(v - admissibility_norm(e.operator, Q, alpha, x)))
        c.detail = f"R vs plain {gap:.1e}, l^2 sum gap {lq_gap:.1e}"
        assert gap <= 1e-4 and lq_gap <= 1e-8


def test_criterion_10_negative_controls(criterion):
    with criterion(10, "negative controls fail certification", 10.0) as c:
        names = [r["name"] for r in load_manifest() if r.get("role") == "negative"]
        found = {}
        for name in names:
            cert = certify_ritt(get_entry(name).operator)
            assert not cert.is_ritt, name
            found[name] = cert.flags
        assert any(f.startswith("c0=+inf") for f in found["jordan_one_2"])
        assert "unimodular eigenvalue other than 1" in found["jordan_i_3"]
        assert "unimodular eigenvalue other than 1" in found["diag_minus_one"]
        assert any(f.startswith("c1=+inf") for f in found["diag_minus_one"])
        c.detail = f"{len(names)} controls rejected"
