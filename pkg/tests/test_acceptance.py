"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossing_lab import (
    CrossingSet,
    conditional_distribution,
    min_root_at,
    min_root_B,
    moments,
    solve_rho_series,
)
from crossing_lab.montecarlo import Caps, compare, estimate_distribution, survival_divergence_check
from crossing_lab.presets import birth_death, cubic
from crossing_lab.series import death_series, cubic_death_series, index_space

from conftest import laws_with_sets
from oracles import double_factorial


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, limit=None):
        t0 = time.perf_counter()
        status, note = "PASS", ""
        try:
            yield
            elapsed = time.perf_counter() - t0
            if limit is not None and elapsed >= limit:
                status, note = "FAIL", f" (took {elapsed:.2f}s, limit {limit}s)"
                raise AssertionError(f"criterion {number} exceeded {limit}s: {elapsed:.2f}s")
        except BaseException as exc:
            if status == "PASS":
                status, note = "FAIL", f" ({type(exc).__name__}: {exc})".splitlines()[0]
            raise
        finally:
            elapsed = time.perf_counter() - t0
            with capsys.disabled():
                print(f"\n[{status}] criterion {number}: {title} [{elapsed:.2f}s]{note}")

    return run


def test_criterion_1_closed_form_joint_coefficients(criterion):
    with criterion(1, "closed-form joint coefficients, K=30", limit=5.0):
        for mu, lam in [(1, 1), (2, 1), (1, 3)]:
            s = solve_rho_series(birth_death(mu, lam), CrossingSet((0, 2)), 30)
            want = {(1, 0): mu / (mu + lam)}
            for n in range(2, 16):
                want[(n, n - 1)] = (double_factorial(2 * n - 3) * 2 ** (n - 1) * mu**n * lam ** (n - 1)
                                    / (math.factorial(n) * (mu + lam) ** (2 * n - 1)))
            for idx in map(tuple, index_space(2, 30).exps):
                if idx in want:
                    assert abs(s[idx] - want[idx]) <= 1e-10, (mu, lam, idx)
                elif idx[0] < 16 or idx[1] != idx[0] - 1:
                    assert abs(s[idx]) <= 1e-12, (mu, lam, idx)


def test_criterion_2_cubic_cross_oracle(criterion):
    with criterion(2, "cubic death series vs closed recursion"):
        for p, q in [(1, 1), (3, 4)]:
            d = death_series(cubic(p, q), 40).coeffs
            ref = cubic_death_series(p, q, 40)
            np.testing.assert_allclose(d, ref, rtol=1e-10, atol=1e-12)
            assert abs(d[2]) <= 1e-14
            assert d[1] == pytest.approx(2 * q / (3 * p), rel=1e-14)


def test_criterion_3_normalisation_and_moments(criterion):
    with criterion(3, "subcritical normalisation and moments", limit=1.0):
        law, cset = birth_death(2, 1), CrossingSet((0,))
        assert min_root_B(law).value == 1.0
        s = solve_rho_series(law, cset, 200)
        assert 1 - s.coeffs.sum() <= 1e-8
        rep = moments(law, cset, 0, 200)
        assert abs(rep.mean - 2) <= 1e-6
        assert abs(rep.variance - 6) <= 1e-4


def test_criterion_4_supercritical_conditional(criterion):
    with criterion(4, "supercritical conditional law vs 1e5 paths", limit=60.0):
        law, cset = birth_death(1, 2), CrossingSet((0,))
        assert abs(min_root_B(law).value - 0.5) <= 1e-12
        exact = conditional_distribution(law, cset, 1, 100)
        assert abs(exact[1] - 2 / 3) <= 1e-10
        emp = estimate_distribution(law, cset, 1, 10**5, Caps(10**4, 10**6), seed=2024)
        rep = compare(exact, emp, threshold=1e-3, z_limit=4.0)
        assert len(rep.cells) >= 5
        assert rep.passed, rep.max_abs_z


def test_criterion_5_joint_monte_carlo(criterion):
    with criterion(5, "critical joint counts vs 1e5 paths"):
        law, cset = birth_death(1, 1), CrossingSet((0, 2))
        exact = conditional_distribution(law, cset, 1, 40)
        emp = estimate_distribution(law, cset, 1, 10**5, Caps(10**5, 10**7), seed=2025)
        rep = compare(exact, emp, threshold=1e-3, z_limit=4.0)
        cells = {c.index: c for c in rep.cells}
        for idx, p in [((1, 0), 1 / 2), ((2, 1), 1 / 8), ((3, 2), 1 / 16)]:
            assert cells[idx].exact == pytest.approx(p, abs=1e-14)
            assert abs(cells[idx].z) <= 4, (idx, cells[idx].z)
        assert rep.passed, rep.max_abs_z
        off = sum(c for (n, m), c in emp.tallies.items() if m != n - 1)
        assert off == 0


def test_criterion_6_survivors_cross_infinitely_often(criterion):
    with criterion(6, "surviving paths accumulate up-crossings"):
        rep = survival_divergence_check(birth_death(1, 2), 2, 50, 10**4, Caps(10**4, 10**6), seed=6)
        assert rep.n_surviving > 1000
        assert rep.fraction >= 0.99, rep.fraction


_unit = st.floats(0, 1, allow_subnormal=False)


@settings(max_examples=200, deadline=None, database=None)
@given(laws_with_sets(max_index=6, max_size=2), st.lists(st.lists(_unit, min_size=2, max_size=2), min_size=4, max_size=4))
def _invariants(pair, vgrid):
    law, cset = pair
    n = len(cset)
    K = 25 if n == 1 else 10
    s = solve_rho_series(law, cset, K)
    assert s.coeffs.min() >= -1e-14
    rho = min_root_B(law).value
    for v in vgrid:
        assert min_root_at(law, cset, v[:n]).value <= rho + 1e-12
    assert death_series(law, 40).allclose(solve_rho_series(law, CrossingSet((0,)), 40), atol=1e-12)
    d1 = conditional_distribution(law, cset, 1, K)
    np.testing.assert_allclose(conditional_distribution(law.scaled(2.0), cset, 1, K).probs.coeffs,
                               d1.probs.coeffs, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(conditional_distribution(law.with_weights("identity"), cset, 1, K).probs.coeffs,
                                  d1.probs.coeffs)
    d2 = conditional_distribution(law, cset, 2, K)
    sq = d1.probs * d1.probs
    np.testing.assert_allclose(d2.probs.coeffs, sq.coeffs, rtol=0, atol=1e-12)


def test_criterion_7_invariant_suite(criterion):
    with criterion(7, "invariant suite over 200 random laws"):
        _invariants()
