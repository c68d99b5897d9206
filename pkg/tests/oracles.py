"""Reference computations that share no code with the package.

Each routine here reaches its answer by a different route than the library
(enumeration, closed forms, plain dictionaries) so the tests compare two
independent derivations.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def birth_death_joint_coefficient(n: int, m: int, mu: float, lam: float) -> float:
    """Taylor coefficient of ``y^n z^m`` in the birth-death root ``rho(y, z)``."""
    if (n, m) == (1, 0):
        return mu / (mu + lam)
    if n >= 2 and m == n - 1:
        return (double_factorial(2 * n - 3) * 2 ** (n - 1) * mu**n * lam ** (n - 1)
                / (math.factorial(n) * (mu + lam) ** (2 * n - 1)))
    return 0.0


def birth_death_upcross_marginal(n: int, mu: float, lam: float) -> float:
    """Unconditional ``P(Y_2 = n, extinct)`` for the birth-death law."""
    if n == 0:
        return mu / (mu + lam)
    return (double_factorial(2 * n - 1) * 2**n * mu ** (n + 1) * lam**n
            / (math.factorial(n + 1) * (mu + lam) ** (2 * n + 1)))


def brute_convolution_power(table: dict, j: int, N: int, K: int) -> dict:
    """``[f^j]_l`` by summing over every ordered ``j``-tuple of indices."""
    if j == 0:
        return {(0,) * N: 1.0}
    out = defaultdict(float)
    for combo in itertools.product(table.items(), repeat=j):
        idx = tuple(sum(c[0][p] for c in combo) for p in range(N))
        if sum(idx) <= K:
            out[idx] += math.prod(c[1] for c in combo)
    return dict(out)


def enumerate_extinction(b: dict, tracked: tuple, i: int, max_deaths: int) -> dict:
    """``P(extinct with counts = l)`` for every ``l`` with ``l_0 <= max_deaths``.

    Needs 0 among the tracked indices.  Walks the embedded chain exhaustively:
    an extinct path with ``d`` deaths has at most ``d - i`` upward jumps, so
    states that could not die out within the death budget are pruned and the
    enumeration is finite and exact.
    """
    assert tracked[0] == 0
    total = -b[1]
    kernel = [(r, rate / total) for r, rate in b.items() if r != 1 and rate > 0]
    pos = {k: p for p, k in enumerate(tracked)}
    frontier = {(i, (0,) * len(tracked)): 1.0}
    absorbed = defaultdict(float)
    while frontier:
        nxt = defaultdict(float)
        for (x, counts), mass in frontier.items():
            for r, pr in kernel:
                y = x + r - 1
                c = list(counts)
                if r in pos:
                    c[pos[r]] += 1
                c = tuple(c)
                if y == 0:
                    absorbed[c] += mass * pr
                elif c[0] + y <= max_deaths:
                    nxt[(y, c)] += mass * pr
        frontier = nxt
    return dict(absorbed)
