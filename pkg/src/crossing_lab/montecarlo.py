"""Monte Carlo oracle: the embedded jump chain of the crossing-counting process.

From state ``i >= 1`` the chain takes the jump with b-index ``r`` (size
``r - 1``) with probability ``b_r / (-b_1)``; jumps whose index is tracked
bump the matching crossing tally.  The weights ``w_i`` only enter the
optional timed mode, where each visit to state ``i`` lasts an exponential
time of rate ``w_i * (-b_1)``.

Draws come from :mod:`crossing_lab.streams`, keyed by ``(seed, path index)``,
so results do not depend on batching or thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numba as nb
import numpy as np

from . import streams
from .distribution import CrossingDistribution
from .errors import ConfigurationMismatch, NoExtinctPaths, NoSurvivingPaths, WeightError
from .law import BranchingLaw, CrossingSet, validate
from .roots import min_root_B

THREADS_ENV = "CROSSING_LAB_THREADS"
CHUNK = 8192


@dataclass(frozen=True)
class Caps:
    max_steps: int = 10**4
    max_state: int = 10**6

    def __post_init__(self):
        if self.max_steps < 1 or self.max_state < 1:
            raise ValueError("caps must be positive")


@dataclass(frozen=True)
class PathOutcome:
    extinct: bool
    counts: tuple[int, ...]
    steps: int
    final_state: int
    jump_total: int
    elapsed_time: float | None = None

    @property
    def censored(self) -> bool:
        return not self.extinct


def jump_kernel(law: BranchingLaw) -> tuple[np.ndarray, np.ndarray]:
    """b-indices ``r != 1`` with positive rate and their probabilities ``b_r / (-b_1)``."""
    idx = np.array([j for j, v in law.b.items() if j != 1 and v > 0], dtype=np.int64)
    p = np.array([law.rate(j) for j in idx]) / law.total_rate
    return idx, p


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p)
    c[-1] = 1.0
    return c


def weight_table(law: BranchingLaw, max_state: int) -> np.ndarray:
    """``w_i`` for ``i = 0..max_state``; NaN where undefined (entry 0 unused)."""
    w = law.weights
    if w is None or w == "constant":
        return np.ones(max_state + 1)
    if w == "identity":
        return np.arange(max_state + 1, dtype=float)
    out = np.full(max_state + 1, np.nan)
    if isinstance(w, Mapping):
        for i, x in w.items():
            if 1 <= int(i) <= max_state:
                out[int(i)] = float(x)
    else:
        out[1:] = [w(i) for i in range(1, max_state + 1)]
    return out


# -- reference walker ----------------------------------------------------------


def run_jumps(cset: CrossingSet, i: int, jumps, max_steps: int | None = None, max_state: int | None = None) -> PathOutcome:
    """Apply a given sequence of b-indices from state ``i`` and tally crossings.

    Stops at state 0, on exceeding ``max_state``, after ``max_steps`` jumps or
    when the sequence runs out.
    """
    counts = [0] * len(cset)
    state, steps, total = i, 0, 0
    for r in jumps:
        if max_steps is not None and steps >= max_steps:
            break
        state += r - 1
        total += r - 1
        steps += 1
        if r in cset:
            counts[cset.position(r)] += 1
        if state == 0 or (max_state is not None and state > max_state):
            break
    return PathOutcome(state == 0, tuple(counts), steps, state, total)


def simulate_path(law: BranchingLaw, cset: CrossingSet, i: int, seed: int, caps: Caps = Caps(), path_index: int = 0) -> PathOutcome:
    """One embedded-chain path, walked in plain Python.

    This is the reference the vectorized simulator is checked against; it
    draws from the same stream so the two agree path by path.
    """
    if i < 1:
        raise ValueError("initial state must be >= 1")
    return _walk(law, cset, i, seed, caps, path_index, timed=False)


def simulate_timed_path(law: BranchingLaw, cset: CrossingSet, i: int, seed: int, caps: Caps = Caps(), path_index: int = 0) -> PathOutcome:
    """Like :func:`simulate_path`, also accumulating exponential holding times."""
    if i < 1:
        raise ValueError("initial state must be >= 1")
    return _walk(law, cset, i, seed, caps, path_index, timed=True)


def _walk(law, cset, i, seed, caps, path_index, timed):
    idx, p = jump_kernel(law)
    cdf = _cdf(p)
    key = streams.path_keys(seed, [path_index], streams.JUMPS)[0]
    hkey = streams.path_keys(seed, [path_index], streams.HOLDING)[0]
    weight = law.weight_function()
    rate = law.total_rate
    counts = [0] * len(cset)
    state, steps, total, elapsed = i, 0, 0, 0.0
    block = 256
    while steps < caps.max_steps:
        n = min(block, caps.max_steps - steps)
        ctr = np.arange(steps, steps + n)
        us = streams.uniforms(key, ctr)
        hs = streams.uniforms(hkey, ctr) if timed else None
        done = False
        for c in range(n):
            if timed:
                elapsed += -math.log1p(-hs[c]) / (weight(state) * rate)
            r = int(idx[np.searchsorted(cdf, us[c], side="right")])
            state += r - 1
            total += r - 1
            steps += 1
            if r in cset:
                counts[cset.position(r)] += 1
            if state == 0 or state > caps.max_state:
                done = True
                break
        if done:
            break
    return PathOutcome(state == 0, tuple(counts), steps, state, total, elapsed if timed else None)


# -- vectorized simulator ------------------------------------------------------


@nb.njit(cache=True)
def _mix(x):
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@nb.njit(cache=True)
def _uniform(key, counter):
    bits = _mix(key + np.uint64(counter) * np.uint64(0x9E3779B97F4A7C15))
    return np.float64(bits >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True, nogil=True)
def _batch(keys, hkeys, i, idx, cdf, tracked_pos, max_steps, max_state, timed, weights, rate,
           extinct, counts, steps, final, jump_total, elapsed):
    nk = idx.size
    for p in range(keys.size):
        key = keys[p]
        state = i
        t = 0
        tot = 0
        clock = 0.0
        bad_weight = False
        while t < max_steps:
            if timed:
                w = weights[state]
                if not (w > 0.0):
                    bad_weight = True
                    break
                clock += -math.log1p(-_uniform(hkeys[p], t)) / (w * rate)
            u = _uniform(key, t)
            k = 0
            while k < nk - 1 and u >= cdf[k]:
                k += 1
            r = idx[k]
            state += r - 1
            tot += r - 1
            t += 1
            q = tracked_pos[k]
            if q >= 0:
                counts[p, q] += 1
            if state == 0 or state > max_state:
                break
        if bad_weight:
            final[p] = -state
            continue
        extinct[p] = state == 0
        steps[p] = t
        final[p] = state
        jump_total[p] = tot
        elapsed[p] = clock


@dataclass
class PathBatch:
    """Outcomes of paths ``first .. first + n - 1`` as parallel arrays."""

    extinct: np.ndarray
    counts: np.ndarray
    steps: np.ndarray
    final_state: np.ndarray
    jump_total: np.ndarray
    elapsed_time: np.ndarray | None
    first: int = 0

    def __len__(self) -> int:
        return self.extinct.size

    def outcome(self, p: int) -> PathOutcome:
        e = None if self.elapsed_time is None else float(self.elapsed_time[p])
        return PathOutcome(bool(self.extinct[p]), tuple(int(c) for c in self.counts[p]), int(self.steps[p]),
                           int(self.final_state[p]), int(self.jump_total[p]), e)


def _threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def simulate_paths(law: BranchingLaw, cset: CrossingSet, i: int, n_paths: int, seed: int,
                   caps: Caps = Caps(), timed: bool = False, first: int = 0,
                   threads: int | None = None) -> PathBatch:
    """Simulate paths ``first .. first + n_paths - 1`` of the stream ``seed``.

    Chunks run on up to ``threads`` threads (default: ``CROSSING_LAB_THREADS``
    or the CPU count); the result is identical for any thread count.
    """
    validate(law, cset).raise_if_failed()
    if i < 1:
        raise ValueError("initial state must be >= 1")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    idx, p = jump_kernel(law)
    cdf = _cdf(p)
    tracked_pos = np.array([cset.position(r) if r in cset else -1 for r in idx], dtype=np.int64)
    weights = weight_table(law, caps.max_state) if timed else np.ones(1)
    ids = np.arange(first, first + n_paths)
    keys = streams.path_keys(seed, ids, streams.JUMPS)
    hkeys = streams.path_keys(seed, ids, streams.HOLDING)

    out = PathBatch(
        np.zeros(n_paths, dtype=np.bool_),
        np.zeros((n_paths, len(cset)), dtype=np.int64),
        np.zeros(n_paths, dtype=np.int64),
        np.zeros(n_paths, dtype=np.int64),
        np.zeros(n_paths, dtype=np.int64),
        np.zeros(n_paths),
        first,
    )

    def work(lo):
        hi = min(lo + CHUNK, n_paths)
        _batch(keys[lo:hi], hkeys[lo:hi], i, idx, cdf, tracked_pos, caps.max_steps, caps.max_state,
               timed, weights, law.total_rate, out.extinct[lo:hi], out.counts[lo:hi], out.steps[lo:hi],
               out.final_state[lo:hi], out.jump_total[lo:hi], out.elapsed_time[lo:hi])

    starts = range(0, n_paths, CHUNK)
    nthreads = min(threads or _threads(), len(starts))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)

    if timed:
        bad = out.final_state < 0
        if bad.any():
            raise WeightError(f"weight w_{-int(out.final_state[bad][0])} is undefined")
    else:
        out.elapsed_time = None
    return out


# -- estimation and comparison -------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Crossing-count frequencies among the extinct simulated paths."""

    cset: CrossingSet
    initial_state: int
    n_paths: int
    tallies: dict = field(default_factory=dict)
    n_steps_capped: int = 0

    @property
    def n_extinct(self) -> int:
        return sum(self.tallies.values())

    @property
    def n_censored(self) -> int:
        return self.n_paths - self.n_extinct

    @property
    def extinct_fraction(self) -> float:
        return self.n_extinct / self.n_paths

    @property
    def censor_rate(self) -> float:
        return self.n_censored / self.n_paths

    def table(self) -> dict:
        n = self.n_extinct
        return {idx: c / n for idx, c in sorted(self.tallies.items())}

    def __getitem__(self, index) -> float:
        index = tuple(np.atleast_1d(index).tolist())
        return self.tallies.get(index, 0) / self.n_extinct

    def to_json(self) -> dict:
        return {
            "crossing_set": list(self.cset.indices),
            "initial_state": self.initial_state,
            "n_paths": self.n_paths,
            "n_extinct": self.n_extinct,
            "extinct_fraction": self.extinct_fraction,
            "censor_rate": self.censor_rate,
            "empirical": [{"index": list(idx), "count": self.tallies[idx], "value": p} for idx, p in self.table().items()],
        }


def estimate_distribution(law: BranchingLaw, cset: CrossingSet, i: int, n_paths: int, caps: Caps = Caps(),
                          seed: int = 0, threads: int | None = None) -> EmpiricalDistribution:
    """Empirical ``P(Y = l | extinct)``; censored paths are left out."""
    batch = simulate_paths(law, cset, i, n_paths, seed, caps, threads=threads)
    ext = batch.counts[batch.extinct]
    if ext.shape[0] == 0:
        raise NoExtinctPaths("no simulated path went extinct; raise the caps or check the law")
    rows, freq = np.unique(ext, axis=0, return_counts=True)
    tallies = {tuple(int(x) for x in r): int(c) for r, c in zip(rows, freq)}
    capped = int(np.sum(~batch.extinct & (batch.steps >= caps.max_steps)))
    return EmpiricalDistribution(cset, i, n_paths, tallies, capped)


@dataclass(frozen=True)
class CellComparison:
    index: tuple[int, ...]
    exact: float
    empirical: float
    stderr: float
    z: float


@dataclass(frozen=True)
class ComparisonReport:
    cells: tuple[CellComparison, ...]
    n: int
    threshold: float
    z_limit: float

    @property
    def max_abs_z(self) -> float:
        return max((abs(c.z) for c in self.cells), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_abs_z <= self.z_limit

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "max_abs_z": self.max_abs_z,
            "n": self.n,
            "threshold": self.threshold,
            "z_limit": self.z_limit,
            "cells": [
                {"index": list(c.index), "exact": c.exact, "empirical": c.empirical, "stderr": c.stderr, "z": c.z}
                for c in self.cells
            ],
        }


def _table(dist) -> dict:
    if isinstance(dist, CrossingDistribution):
        return dist.table()
    return dist.table()


def compare(exact, empirical: EmpiricalDistribution, threshold: float = 1e-3, z_limit: float = 4.0) -> ComparisonReport:
    """z-scores ``(p_hat - p) / sqrt(p (1 - p) / n)`` on cells with ``p >= threshold``.

    ``exact`` may be a :class:`CrossingDistribution` or another empirical
    table; ``n`` is the number of extinct paths behind ``empirical``.
    """
    if tuple(exact.cset.indices) != tuple(empirical.cset.indices) or exact.initial_state != empirical.initial_state:
        raise ConfigurationMismatch("exact and empirical distributions differ in crossing set or initial state")
    n = empirical.n_extinct
    cells = []
    for idx, p in sorted(_table(exact).items()):
        if p < threshold:
            continue
        ph = empirical[idx]
        se = math.sqrt(p * (1.0 - p) / n)
        if se > 0:
            z = (ph - p) / se
        else:
            z = 0.0 if ph == p else math.inf
        cells.append(CellComparison(idx, p, ph, se, z))
    return ComparisonReport(tuple(cells), n, threshold, z_limit)


@dataclass(frozen=True)
class SurvivalReport:
    m: int
    L: int
    n_paths: int
    n_surviving: int
    fraction: float

    def to_json(self) -> dict:
        return dict(m=self.m, L=self.L, n_paths=self.n_paths, n_surviving=self.n_surviving, fraction=self.fraction)


def survival_divergence_check(law: BranchingLaw, m: int, L: int, n_paths: int, caps: Caps = Caps(),
                              seed: int = 0, threads: int | None = None) -> SurvivalReport:
    """Fraction of censored (surviving) paths whose tally ``Y_m`` reached ``L``.

    On survival the crossing count diverges almost surely, so this fraction
    tends to 1 as the caps grow.
    """
    cset = CrossingSet((m,))
    validate(law, cset).raise_if_failed()
    if min_root_B(law).value >= 1.0:
        raise NoSurvivingPaths("no surviving paths: extinction is certain (rho = 1)")
    batch = simulate_paths(law, cset, 1, n_paths, seed, caps, threads=threads)
    alive = ~batch.extinct
    n_alive = int(alive.sum())
    if n_alive == 0:
        raise NoSurvivingPaths("no surviving paths within the caps")
    frac = float(np.mean(batch.counts[alive, 0] >= L))
    return SurvivalReport(m, L, n_paths, n_alive, frac)
