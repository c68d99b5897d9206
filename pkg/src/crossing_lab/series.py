"""Truncated multivariate power series and the ``rho(v)`` coefficient solve.

Coefficients live in a dense vector over all multi-indices of total degree
``<= K``, listed degree by degree (graded lexicographic order).  The
multi-index bookkeeping is shared per ``(N, K)`` through :class:`IndexSpace`.
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np

from .errors import DegenerateDerivative, NegativeCoefficient, TruncationTooSmall
from .law import BranchingLaw, CrossingSet, validate
from .roots import min_root_bbar, minimal_root

NEG_FLOOR = -1e-14
DERIV_TOL = 1e-10


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class IndexSpace:
    """All multi-indices in ``Z_+^N`` with total degree ``<= K``."""

    def __init__(self, N: int, K: int):
        if N < 1:
            raise ValueError("dimension must be >= 1")
        if K < 0:
            raise ValueError("truncation order must be >= 0")
        self.N, self.K = N, K
        rows = [c for d in range(K + 1) for c in _compositions(d, N)]
        self.exps = np.array(rows, dtype=np.int64).reshape(-1, N)
        self.degree = self.exps.sum(axis=1)
        # offsets[d] = first position of degree d; offsets[K + 1] = size
        self.offsets = np.searchsorted(self.degree, np.arange(K + 2))
        self._radix = (K + 1) ** np.arange(N, dtype=np.int64)
        keys = self.exps @ self._radix
        self._order = np.argsort(keys)
        self._sorted_keys = keys[self._order]
        self.keys = keys

    @property
    def size(self) -> int:
        return self.exps.shape[0]

    def degree_slice(self, d: int) -> slice:
        return slice(self.offsets[d], self.offsets[d + 1])

    def position(self, index) -> int:
        index = tuple(int(x) for x in np.atleast_1d(index))
        if len(index) != self.N or min(index) < 0 or sum(index) > self.K:
            raise KeyError(index)
        return int(self.positions_of_keys(np.array([np.dot(index, self._radix)]))[0])

    def positions_of_keys(self, keys: np.ndarray) -> np.ndarray:
        """Positions for the given keys; -1 where a key is not present."""
        keys = np.asarray(keys, dtype=np.int64)
        loc = np.searchsorted(self._sorted_keys, keys)
        loc = np.minimum(loc, self.size - 1)
        hit = self._sorted_keys[loc] == keys
        return np.where(hit, self._order[loc], -1)

    @cached_property
    def pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(ia, ib, it)`` for every ordered pair with ``|a| + |b| <= K``.

        Sorted by the degree of the target ``it = a + b``.
        """
        ia, ib = [], []
        for a in range(self.size):
            nb = self.offsets[self.K - self.degree[a] + 1]
            ia.append(np.full(nb, a, dtype=np.int64))
            ib.append(np.arange(nb, dtype=np.int64))
        ia = np.concatenate(ia)
        ib = np.concatenate(ib)
        it = self.positions_of_keys(self.keys[ia] + self.keys[ib])
        order = np.argsort(self.degree[it], kind="stable")
        return ia[order], ib[order], it[order]

    @cached_property
    def inner_pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Pairs with both factors nonzero, plus per-target-degree offsets."""
        ia, ib, it = self.pairs
        keep = (ia != 0) & (ib != 0)
        ia, ib, it = ia[keep], ib[keep], it[keep]
        offs = np.searchsorted(self.degree[it], np.arange(self.K + 2))
        return ia, ib, it, offs

    def minus_unit(self, p: int) -> np.ndarray:
        """Position of ``l - e_p`` for every ``l``; -1 where ``l_p = 0``."""
        pos = self.positions_of_keys(self.keys - self._radix[p])
        pos[self.exps[:, p] == 0] = -1
        return pos


@lru_cache(maxsize=32)
def index_space(N: int, K: int) -> IndexSpace:
    return IndexSpace(N, K)


class TruncatedSeries:
    """Power series in ``N`` variables truncated at total degree ``K``.

    Indexing takes a multi-index tuple (or an int when ``N == 1``) and
    returns 0 for indices that are in range but not stored explicitly.
    """

    def __init__(self, N: int, K: int, coeffs=None):
        self.space = index_space(N, K)
        if coeffs is None:
            coeffs = np.zeros(self.space.size)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (self.space.size,):
            raise ValueError(f"expected {self.space.size} coefficients, got {coeffs.shape}")
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    @property
    def N(self) -> int:
        return self.space.N

    @property
    def K(self) -> int:
        return self.space.K

    @classmethod
    def unit(cls, N: int, K: int) -> "TruncatedSeries":
        c = np.zeros(index_space(N, K).size)
        c[0] = 1.0
        return cls(N, K, c)

    @classmethod
    def from_dict(cls, N: int, K: int, table) -> "TruncatedSeries":
        sp = index_space(N, K)
        c = np.zeros(sp.size)
        for idx, val in table.items():
            c[sp.position(idx)] += val
        return cls(N, K, c)

    @classmethod
    def from_univariate(cls, values) -> "TruncatedSeries":
        values = np.asarray(values, dtype=float)
        return cls(1, values.size - 1, values)

    def __getitem__(self, index) -> float:
        return float(self.coeffs[self.space.position(index)])

    def items(self):
        for row, val in zip(self.space.exps, self.coeffs):
            if val != 0.0:
                yield tuple(int(x) for x in row), float(val)

    def to_dict(self) -> dict:
        return dict(self.items())

    def to_json(self) -> dict:
        return {
            "coeffs": [{"index": list(idx), "value": val} for idx, val in self.items()],
            "K": self.K,
        }

    def __repr__(self) -> str:
        return f"TruncatedSeries(N={self.N}, K={self.K}, nonzero={int(np.count_nonzero(self.coeffs))})"

    def _check(self, other: "TruncatedSeries") -> None:
        if (self.N, self.K) != (other.N, other.K):
            raise ValueError("series live in different index spaces")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.N, self.K, self.coeffs + other.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return TruncatedSeries(self.N, self.K, self.coeffs * other)
        self._check(other)
        ia, ib, it = self.space.pairs
        out = np.bincount(it, weights=self.coeffs[ia] * other.coeffs[ib], minlength=self.space.size)
        return TruncatedSeries(self.N, self.K, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "TruncatedSeries":
        return TruncatedSeries(self.N, self.K, self.coeffs / scalar)

    def __call__(self, v) -> float:
        return self.evaluate(v)

    def evaluate(self, v) -> float:
        v = np.broadcast_to(np.asarray(v, dtype=float), (self.N,))
        monomials = np.prod(v[None, :] ** self.space.exps, axis=1)
        return float(monomials @ self.coeffs)

    def degree_sums(self) -> np.ndarray:
        """Sum of coefficients at each total degree ``0..K``."""
        return np.bincount(self.space.degree, weights=self.coeffs, minlength=self.K + 1)

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.degree_sums())

    def marginal(self, p: int) -> np.ndarray:
        """Coefficients summed over every variable except position ``p``."""
        return np.bincount(self.space.exps[:, p], weights=self.coeffs, minlength=self.K + 1)

    def allclose(self, other: "TruncatedSeries", rtol=0.0, atol=1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol))


def convolution_power(f: TruncatedSeries, j: int) -> TruncatedSeries:
    """``f^j`` truncated at degree ``K`` (binary powering)."""
    if j < 0:
        raise ValueError("power must be nonnegative")
    result = TruncatedSeries.unit(f.N, f.K)
    base = f
    while j:
        if j & 1:
            result = result * base
        j >>= 1
        if j:
            base = base * base
    return result


def _clamp(values: np.ndarray, where: str) -> np.ndarray:
    if values.size and values.min() < NEG_FLOOR:
        raise NegativeCoefficient(f"coefficient {values.min():.3e} < {NEG_FLOOR} at {where}")
    return np.where(values < 0.0, 0.0, values) + 0.0


def solve_rho_series(law: BranchingLaw, cset: CrossingSet, K: int) -> TruncatedSeries:
    """Taylor coefficients of ``rho(v)`` up to total degree ``K``.

    For each target index ``t`` of degree ``d >= 1`` the coefficient of
    ``v^t`` in ``Bbar_N(rho(v)) + B_N(rho(v), v)`` must vanish::

        sum_{j not in N} b_j [rho^j]_t + sum_{k in N, t_k >= 1} b_k [rho^k]_{t - e_k} = 0

    ``rho_t`` enters the first sum linearly with total coefficient
    ``Bbar_N'(rho_0)``; everything else involves degrees below ``d``.  The
    powers ``rho^j`` are extended one degree at a time and reused.
    """
    validate(law, cset).raise_if_failed()
    if K < 1:
        raise TruncationTooSmall(f"K={K} must be >= 1")
    N = len(cset)
    sp = index_space(N, K)
    rho0 = min_root_bbar(law, cset).value

    bbar = law.split_coefficients(cset)
    dbbar = float(np.polynomial.polynomial.polyval(rho0, np.polynomial.polynomial.polyder(bbar)))
    if abs(dbbar) <= DERIV_TOL:
        raise DegenerateDerivative(f"|Bbar_N'(rho_0)| = {abs(dbbar):.3e} <= {DERIV_TOL}")

    J = max(law.degree, 1)
    untracked = [(j, law.rate(j)) for j in range(2, J + 1) if j not in cset and law.rate(j) > 0]
    tracked = [(p, k, law.rate(k)) for p, k in enumerate(cset.indices)]

    # powers[j] holds rho^j; rows for degrees above the current one are zero
    powers = np.zeros((J + 1, sp.size))
    powers[0, 0] = 1.0
    powers[1:, 0] = rho0 ** np.arange(1, J + 1)
    lin = np.arange(J + 1) * np.concatenate(([0.0], rho0 ** np.arange(J)))
    shifted = [sp.minus_unit(p) for p in range(N)]
    ia, ib, it, offs = sp.inner_pairs

    for d in range(1, K + 1):
        sl = sp.degree_slice(d)
        lo, hi = offs[d], offs[d + 1]
        pa, pb, pt = ia[lo:hi], ib[lo:hi], it[lo:hi] - sl.start
        width = sl.stop - sl.start
        rho = powers[1]
        masked = np.zeros((J + 1, width))
        for j in range(2, J + 1):
            inner = np.bincount(pt, weights=powers[j - 1, pa] * rho[pb], minlength=width)
            masked[j] = inner + rho0 * masked[j - 1]
        num = np.zeros(width)
        for j, bj in untracked:
            num += bj * masked[j]
        for p, k, bk in tracked:
            src = shifted[p][sl]
            ok = src >= 0
            num[ok] += bk * powers[k, src[ok]]
        new = _clamp(-num / dbbar, f"degree {d}")
        powers[1:, sl] = masked[1:] + lin[1:, None] * new[None, :]
        powers[1, sl] = new

    return TruncatedSeries(N, K, powers[1])


def _restricted_power(head: np.ndarray, j: int, n: int) -> float:
    """Coefficient ``n`` of ``(sum_{i < n} head_i x^i)^j`` (top coefficient masked)."""
    acc = np.array([1.0])
    for _ in range(j):
        acc = np.convolve(acc, head)[: n + 1]
    return float(acc[n]) if acc.size > n else 0.0


def death_series(law: BranchingLaw, K: int) -> TruncatedSeries:
    """Death-count series (tracked set ``{0}``), ``rho_0 = 0``.

    ``rho_1 = -b_0 / b_1`` and
    ``rho_{k+1} = -b_1^{-1} sum_{j=2}^{k+1} b_j [rho^j]_{k+1}``.
    """
    validate(law, CrossingSet((0,))).raise_if_failed()
    if K < 1:
        raise TruncationTooSmall(f"K={K} must be >= 1")
    b1 = law.rate(1)
    rho = np.zeros(K + 1)
    rho[1] = -law.rate(0) / b1
    births = [(j, bj) for j, bj in law.b.items() if j >= 2]
    for k in range(1, K):
        head = rho[: k + 1]
        total = sum(bj * _restricted_power(head, j, k + 1) for j, bj in births if j <= k + 1)
        rho[k + 1] = _clamp(np.array([-total / b1]), f"degree {k + 1}")[0]
    return TruncatedSeries.from_univariate(rho)


def upcross_series(law: BranchingLaw, m: int, K: int) -> TruncatedSeries:
    """Up-crossing series for the single tracked index ``m >= 2``.

    ``rho_0`` is the minimal root of ``B_m(u) = sum_{j != m} b_j u^j``,
    ``rho_1 = -b_m rho_0^m / B_m'(rho_0)`` and each later coefficient solves
    the same identity with every factor below the target degree.
    """
    if m < 2:
        raise ValueError("up-crossing index must be >= 2")
    validate(law, CrossingSet((m,))).raise_if_failed()
    if K < 1:
        raise TruncationTooSmall(f"K={K} must be >= 1")
    bm = law.rate(m)
    c = law.coefficients.copy()
    c[m] = 0.0
    rho0 = minimal_root(c, law.scale).value
    dB = float(np.polynomial.polynomial.polyval(rho0, np.polynomial.polynomial.polyder(c)))
    if abs(dB) <= DERIV_TOL:
        raise DegenerateDerivative(f"|B_m'(rho_0)| = {abs(dB):.3e} <= {DERIV_TOL}")
    others = [(j, bj) for j, bj in law.b.items() if j not in (1, m)]
    rho = np.zeros(K + 1)
    rho[0] = rho0
    rho[1] = -bm * rho0**m / dB
    for k in range(1, K):
        head = rho[: k + 1]
        total = sum(bj * _restricted_power(head, j, k + 1) for j, bj in others)
        total += bm * _restricted_power(rho[: k + 1], m, k)
        rho[k + 1] = _clamp(np.array([-total / dB]), f"degree {k + 1}")[0]
    return TruncatedSeries.from_univariate(rho)


def cubic_death_series(p: float, q: float, K: int) -> np.ndarray:
    """Death-count coefficients of the cubic law ``B(u) = 2q - 3pu + u^3``.

    Uses only the closed recursion ``rho_1 = 2q/(3p)``, ``rho_2 = 0`` and
    ``rho_{n+1} = (p(n+1))^{-1} sum_{k=2}^{n} (n-k+1) rho_{n-k+1} sum_{i=1}^{k-1} rho_i rho_{k-i}``.
    Returned as a plain array ``[rho_0, ..., rho_K]``.
    """
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if abs(3 * p - (2 * q + 1)) > 1e-12 * 3 * p:
        raise ValueError(f"conservation requires 3p = 2q + 1 (got p={p}, q={q})")
    rho = np.zeros(K + 1)
    if K >= 1:
        rho[1] = 2 * q / (3 * p)
    for n in range(2, K):
        acc = 0.0
        for k in range(2, n + 1):
            sq = sum(rho[i] * rho[k - i] for i in range(1, k))
            acc += (n - k + 1) * rho[n - k + 1] * sq
        rho[n + 1] = acc / (p * (n + 1))
    return rho


example32_series = cubic_death_series
