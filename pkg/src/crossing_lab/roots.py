"""Minimal nonnegative roots of the generating-function equations on [0, 1].

Every equation handled here has the form ``g(u) = sum_j c_j u^j = 0`` with
``c_1 < 0`` and all other coefficients nonnegative, so ``g`` is convex on
``[0, 1]`` with ``g(0) >= 0`` and ``g(1) <= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import RootNotConverged
from .law import BranchingLaw, CrossingSet

MAX_ITER = 10**6
STEP_TOL = 1e-13
RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True)
class RootResult:
    value: float
    residual: float
    iterations: int

    def __float__(self) -> float:
        return self.value


def minimal_root(coeffs, scale: float | None = None, max_iter: int = MAX_ITER) -> RootResult:
    """Smallest root in ``[0, 1]`` of the polynomial with coefficients ``coeffs``.

    The iterate starts at 0 and climbs monotonically.  Each step takes the
    larger of the fixed-point map ``u -> (sum_{j != 1} c_j u^j) / (-c_1)``
    and a Newton step.  Both stay below the minimal root: the first because
    the map is increasing, the second because ``g`` is convex and decreasing
    to the left of that root.  Newton makes near-critical (double-root)
    equations converge in tens of steps instead of millions.

    Parameters
    ----------
    coeffs : array_like
        ``c_0, c_1, ...`` with ``c_1 < 0`` and every other entry >= 0.
    scale : float, optional
        Size used for the residual bound ``1e-12 * scale``.  Defaults to
        ``sum |c_j|``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size < 2 or not c[1] < 0:
        raise ValueError("linear coefficient must be negative")
    if scale is None:
        scale = float(np.abs(c).sum())
    bound = RESIDUAL_RTOL * scale
    dc = P.polyder(c)
    if c[0] == 0.0:
        return RootResult(0.0, 0.0, 0)

    g1 = P.polyval(1.0, c)
    if abs(g1) <= bound and P.polyval(1.0, dc) <= 0.0:
        # convex, vanishing at 1 and not increasing there: no earlier root
        return RootResult(1.0, abs(g1), 0)

    rest = c.copy()
    rest[1] = 0.0
    u = 0.0
    for it in range(1, max_iter + 1):
        fp = P.polyval(u, rest) / -c[1]
        gu = P.polyval(u, c)
        du = P.polyval(u, dc)
        nt = u - gu / du if du < 0 else fp
        new = min(max(fp, nt), 1.0)
        if new - u <= STEP_TOL:
            u = max(new, u)
            res = abs(P.polyval(u, c))
            if res <= bound:
                return RootResult(float(u), float(res), it)
        u = max(new, u)
    raise RootNotConverged(f"no convergence after {max_iter} iterations (last iterate {u!r})")


def min_root_B(law: BranchingLaw) -> RootResult:
    """Extinction probability ``rho`` from state 1: minimal root of ``B``."""
    return minimal_root(law.coefficients, law.scale)


def min_root_at(law: BranchingLaw, cset: CrossingSet, v) -> RootResult:
    """``rho(v)``: minimal root of ``Bbar_N(u) + B_N(u, v)``."""
    return minimal_root(law.split_coefficients(cset, v), law.scale)


def min_root_bbar(law: BranchingLaw, cset: CrossingSet) -> RootResult:
    """``rho_0 = rho(0)``; exactly 0 whenever 0 is a tracked index."""
    return min_root_at(law, cset, np.zeros(len(cset)))
