"""Crossing-number distributions conditioned on extinction, and their moments."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .law import BranchingLaw, CrossingSet, validate
from .roots import min_root_B
from .series import TruncatedSeries, convolution_power, solve_rho_series

DEFAULT_K_UNIVARIATE = 100
DEFAULT_K_MULTIVARIATE = 40


def default_K(cset: CrossingSet) -> int:
    return DEFAULT_K_UNIVARIATE if len(cset) == 1 else DEFAULT_K_MULTIVARIATE


@dataclass(frozen=True)
class CrossingDistribution:
    """``P(Y(tau) = l | tau < inf)`` for every ``|l| <= K``.

    ``probs`` is stored as a truncated series whose coefficients are the
    probabilities, so ``probs(v)`` is the truncated conditional pgf.
    """

    cset: CrossingSet
    initial_state: int
    K: int
    probs: TruncatedSeries
    rho: float
    conditional: bool = True

    @property
    def captured_mass(self) -> float:
        return float(self.probs.coeffs.sum())

    def __getitem__(self, index) -> float:
        return self.probs[index]

    def items(self):
        return self.probs.items()

    def table(self) -> dict:
        return self.probs.to_dict()

    def marginal(self, k: int) -> np.ndarray:
        return marginal(self, k)

    def to_json(self) -> dict:
        return {
            "crossing_set": list(self.cset.indices),
            "rho": self.rho,
            "initial_state": self.initial_state,
            "conditional": self.conditional,
            "probs": [{"index": list(idx), "value": val} for idx, val in self.items()],
            "captured_mass": self.captured_mass,
            "K": self.K,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"Y_{k}" for k in self.cset.indices] + ["probability"])
        for idx, val in self.items():
            w.writerow(list(idx) + [repr(val)])
        return buf.getvalue()


def conditional_distribution(law: BranchingLaw, cset: CrossingSet, i: int = 1, K: int | None = None) -> CrossingDistribution:
    """Joint law of the tracked crossing counts at extinction, from ``X(0) = i``.

    The generating function from ``i`` is the ``i``-th power of the one from
    state 1, so ``P(Y = l) = rho^{-i} [rho(v)^i]_l``.
    """
    validate(law, cset).raise_if_failed()
    if i < 1:
        raise ValueError("initial state must be >= 1")
    if K is None:
        K = default_K(cset)
    rho = min_root_B(law).value
    if rho <= 0.0:
        raise NumericalError("extinction impossible: rho = 0")
    series = solve_rho_series(law, cset, K)
    power = series if i == 1 else convolution_power(series, i)
    return CrossingDistribution(cset, i, K, power / rho**i, rho)


def marginal(dist: CrossingDistribution, k: int) -> np.ndarray:
    """Distribution of the single count ``Y_k``, indexed ``0..K``."""
    return dist.probs.marginal(dist.cset.position(k))


@dataclass(frozen=True)
class MomentReport:
    component: int
    mean: float
    variance: float
    tail_mass: float
    converged: bool
    rho: float
    K: int

    @property
    def label(self) -> str:
        kind = "moments" if self.rho == 1.0 else "conditional moments"
        return kind if self.converged else f"{kind} (lower bounds, not converged)"

    def to_json(self) -> dict:
        return {
            "component": self.component,
            "mean": self.mean,
            "variance": self.variance,
            "tail_mass": self.tail_mass,
            "converged": self.converged,
            "rho": self.rho,
            "K": self.K,
            "label": self.label,
        }


def moments(law: BranchingLaw, cset: CrossingSet, k: int, K: int | None = None, window: int = 10) -> MomentReport:
    """Mean and variance of ``Y_k(tau)`` given extinction, by partial sums.

    ``converged`` requires the uncaptured mass and the change of the mean's
    partial sum over the last ``window`` terms both to be below ``1e-8``.
    """
    dist = conditional_distribution(law, cset, 1, K)
    p = marginal(dist, k)
    n = np.arange(p.size, dtype=float)
    running = np.cumsum(n * p)
    mean = float(running[-1])
    second = float(np.sum(n * n * p))
    tail = float(1.0 - p.sum())
    drift = float(running[-1] - running[max(0, p.size - 1 - window)])
    converged = tail < 1e-8 and drift < 1e-8
    return MomentReport(k, mean, second - mean * mean, tail, converged, dist.rho, dist.K)
