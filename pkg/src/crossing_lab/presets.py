"""Named branching laws used throughout the tests, demos and CLI."""

from __future__ import annotations

from typing import Sequence

from .law import BranchingLaw, CrossingSet, validate

PRESETS = ("birth-death", "cubic", "mxm1", "pure-death")


def birth_death(mu: float, lam: float) -> BranchingLaw:
    """Linear birth-death: ``B(u) = mu - (mu + lam) u + lam u^2``."""
    if not (mu > 0 and lam > 0):
        raise ValueError("mu and lambda must be positive")
    return BranchingLaw({0: mu, 1: -(mu + lam), 2: lam})


def cubic(p: float, q: float) -> BranchingLaw:
    """``B(u) = 2q - 3pu + u^3``; conservation needs ``3p = 2q + 1``."""
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if abs(3 * p - (2 * q + 1)) > 1e-12 * 3 * p:
        raise ValueError(f"cubic law needs 3p = 2q + 1, got p={p}, q={q}")
    return BranchingLaw({0: 2 * q, 1: -3 * p, 3: 1.0})


def mxm1(mu: float, batch_rates: Sequence[float]) -> BranchingLaw:
    """Bulk-arrival single-server queue: service rate ``mu``, batches of size
    ``j`` arriving at rate ``batch_rates[j - 1]``.

    Services are deaths (``b_0 = mu``) and a batch of ``j`` is a jump of
    ``+j`` (``b_{j+1} = lambda_j``), so the death count over one busy period
    is the number of customers served.
    """
    if not mu > 0:
        raise ValueError("service rate must be positive")
    if any(r < 0 for r in batch_rates):
        raise ValueError("batch rates must be nonnegative")
    b = {0: float(mu)}
    for j, r in enumerate(batch_rates, start=1):
        if r > 0:
            b[j + 1] = float(r)
    b[1] = -sum(b.values())
    return BranchingLaw(b)


def pure_death(rate: float = 1.0) -> BranchingLaw:
    return BranchingLaw({0: rate, 1: -rate})


def preset(name: str, *, mu: float | None = None, lam: float | None = None, p: float | None = None,
           q: float | None = None, batch_rates: Sequence[float] | None = None, rate: float = 1.0,
           crossing_set: Sequence[int] = (0,)) -> tuple[BranchingLaw, CrossingSet]:
    """Build and validate a named law together with its crossing set."""
    if name == "birth-death":
        law = birth_death(_need(mu, "mu"), _need(lam, "lambda"))
    elif name == "cubic":
        law = cubic(_need(p, "p"), _need(q, "q"))
    elif name == "mxm1":
        law = mxm1(_need(mu, "mu"), _need(batch_rates, "batch rates"))
    elif name == "pure-death":
        law = pure_death(rate)
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    cset = CrossingSet(tuple(crossing_set))
    validate(law, cset).raise_if_failed()
    return law, cset


def _need(value, what):
    if value is None:
        raise ValueError(f"preset needs {what}")
    return value
