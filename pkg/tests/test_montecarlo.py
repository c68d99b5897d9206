import numpy as np
import pytest
from scipy import stats

from crossing_lab import BranchingLaw, CrossingSet, conditional_distribution
from crossing_lab.errors import ConfigurationMismatch, NoExtinctPaths, NoSurvivingPaths, WeightError
from crossing_lab.montecarlo import (
    Caps,
    EmpiricalDistribution,
    compare,
    estimate_distribution,
    jump_kernel,
    run_jumps,
    simulate_path,
    simulate_paths,
    simulate_timed_path,
    survival_divergence_check,
)
from crossing_lab.presets import birth_death, cubic


@pytest.fixture(scope="module")
def supercritical_batch():
    return simulate_paths(birth_death(1, 2), CrossingSet((0,)), 1, 10**5, seed=11)


def kernel_dict(law):
    idx, p = jump_kernel(law)
    return {int(r) - 1: pr for r, pr in zip(idx, p)}


def test_jump_kernel(bd12, death):
    assert kernel_dict(bd12) == {-1: pytest.approx(1 / 3), 1: pytest.approx(2 / 3)}
    assert kernel_dict(death) == {-1: 1.0}
    assert kernel_dict(cubic(1, 1)) == {-1: pytest.approx(2 / 3), 2: pytest.approx(1 / 3)}
    assert sum(kernel_dict(BranchingLaw({0: 0.3, 1: -1.7, 2: 0.1, 5: 1.3})).values()) == pytest.approx(1, abs=1e-12)


def test_run_jumps_bookkeeping():
    out = run_jumps(CrossingSet((0, 2)), 1, [2, 0, 0])
    assert out.extinct and out.counts == (2, 1) and out.final_state == 0 and out.steps == 3


@pytest.mark.parametrize("seed", [0, 1, 12345])
def test_pure_death_path(death, seed):
    out = simulate_path(death, CrossingSet((0,)), 3, seed)
    assert out.extinct and out.counts == (3,) and out.steps == 3


def test_extinct_fraction(supercritical_batch):
    assert supercritical_batch.extinct.mean() == pytest.approx(0.5, abs=0.005)


def test_vectorized_matches_reference_walker(bd12):
    cset = CrossingSet((0, 2))
    batch = simulate_paths(bd12, cset, 2, 400, seed=5, caps=Caps(500, 50))
    for p in range(0, 400, 7):
        assert batch.outcome(p) == simulate_path(bd12, cset, 2, 5, Caps(500, 50), path_index=p)


def test_batching_and_threads_do_not_change_results(bd12, monkeypatch):
    cset = CrossingSet((0, 2))
    whole = simulate_paths(bd12, cset, 1, 3000, seed=9, threads=1)
    monkeypatch.setattr("crossing_lab.montecarlo.CHUNK", 257)
    split = simulate_paths(bd12, cset, 1, 3000, seed=9, threads=4)
    tail = simulate_paths(bd12, cset, 1, 1000, seed=9, first=2000)
    np.testing.assert_array_equal(whole.counts, split.counts)
    np.testing.assert_array_equal(whole.steps, split.steps)
    np.testing.assert_array_equal(whole.counts[2000:], tail.counts)


def test_bookkeeping_identity(supercritical_batch):
    b = supercritical_batch
    np.testing.assert_array_equal(1 + b.jump_total, b.final_state)
    assert np.all(b.final_state[b.extinct] == 0)
    assert np.all(b.counts >= 0)


def test_caps_censor(bd12):
    b = simulate_paths(bd12, CrossingSet((0,)), 1, 2000, seed=1, caps=Caps(50, 10))
    alive = ~b.extinct
    assert np.all((b.steps[alive] == 50) | (b.final_state[alive] > 10))


def test_timed_pure_death_is_exponential(death):
    b = simulate_paths(death, CrossingSet((0,)), 1, 10**5, seed=3, timed=True)
    assert b.elapsed_time.mean() == pytest.approx(1.0, abs=0.02)
    assert stats.kstest(b.elapsed_time[:5000], "expon").pvalue > 0.01


def test_timed_and_untimed_share_the_jump_chain(bd12):
    cset = CrossingSet((0, 2))
    plain = simulate_paths(bd12, cset, 1, 2000, seed=4)
    timed = simulate_paths(bd12.with_weights("identity"), cset, 1, 2000, seed=4, timed=True)
    np.testing.assert_array_equal(plain.counts, timed.counts)
    np.testing.assert_array_equal(plain.extinct, timed.extinct)
    one = simulate_timed_path(bd12.with_weights("identity"), cset, 1, 4, path_index=17)
    assert one.counts == plain.outcome(17).counts
    assert one.elapsed_time == pytest.approx(timed.elapsed_time[17], rel=1e-12)


def test_weights_change_time_not_counts(death):
    law = BranchingLaw({0: 1.0, 1: -2.0, 2: 1.0})
    cset = CrossingSet((0,))
    caps = Caps(10**3, 10**3)
    a = simulate_paths(law, cset, 1, 20000, seed=21, caps=caps, timed=True)
    b = simulate_paths(law.with_weights("identity"), cset, 1, 20000, seed=22, caps=caps, timed=True)
    ya, yb = a.counts[a.extinct, 0], b.counts[b.extinct, 0]
    bins = [1, 2, 3, 4, 6, 10, 20, np.inf]
    ha, _ = np.histogram(ya, bins)
    hb, _ = np.histogram(yb, bins)
    assert stats.chi2_contingency(np.vstack([ha, hb]))[1] > 0.01
    # identity weights speed up crowded states, so mean time shrinks
    assert b.elapsed_time[b.extinct].mean() < a.elapsed_time[a.extinct].mean()


def test_undefined_weight(bd12):
    with pytest.raises(WeightError):
        simulate_paths(bd12.with_weights({1: 1.0}), CrossingSet((0,)), 1, 200, seed=0, timed=True)


def test_estimate_pure_death(death):
    emp = estimate_distribution(death, CrossingSet((0,)), 2, 1000, seed=0)
    assert emp.table() == {(2,): 1.0}
    assert emp.censor_rate == 0.0


def test_estimate_supercritical(bd12):
    emp = estimate_distribution(bd12, CrossingSet((0,)), 1, 10**5, seed=7)
    assert emp[1] == pytest.approx(2 / 3, abs=3 * 0.0021)


def test_no_extinct_paths(bd12):
    with pytest.raises(NoExtinctPaths):
        estimate_distribution(bd12, CrossingSet((0,)), 5, 100, Caps(max_steps=1))


def test_compare_gate(bd12, bd21, bd11):
    cset = CrossingSet((0,))
    exact = conditional_distribution(bd12, cset, 1, 60)
    good = estimate_distribution(bd12, cset, 1, 20000, seed=2)
    # conditioning on extinction swaps mu and lam, so the mirror law agrees
    assert compare(exact, estimate_distribution(bd21, cset, 1, 20000, seed=3)).passed
    bad = estimate_distribution(bd11, cset, 1, 20000, seed=2)
    assert compare(exact, good).passed
    rep = compare(exact, bad)
    assert not rep.passed and rep.max_abs_z > 20
    assert compare(good, good).max_abs_z == 0.0
    with pytest.raises(ConfigurationMismatch):
        compare(conditional_distribution(bd12, cset, 2, 20), good)


def test_compare_standard_error():
    cset = CrossingSet((0,))
    emp = EmpiricalDistribution(cset, 1, 100, {(1,): 60, (3,): 40})
    ref = EmpiricalDistribution(cset, 1, 10, {(1,): 5, (3,): 5})
    rep = compare(ref, emp)
    assert [c.stderr for c in rep.cells] == [pytest.approx(0.05), pytest.approx(0.05)]
    assert [c.z for c in rep.cells] == [pytest.approx(2.0), pytest.approx(-2.0)]


def test_survival_examples(bd12, bd21):
    caps = Caps(10**4, 10**6)
    assert survival_divergence_check(bd12, 2, 0, 500, caps, seed=1).fraction == 1.0
    assert survival_divergence_check(bd12, 2, 50, 2000, caps, seed=1).fraction >= 0.99
    with pytest.raises(NoSurvivingPaths):
        survival_divergence_check(bd21, 2, 10, 100, caps)
