"""Weighted branching laws, crossing sets and their generating functions.

A law is the rate sequence ``b_j`` of a weighted Markov branching process:
from state ``i >= 1`` the chain jumps to ``i + j - 1`` at rate ``w_i * b_j``
(``j != 1``), and ``b_1 = -sum_{j != 1} b_j`` is the negative total rate.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

CONSERVATION_RTOL = 1e-12

Weights = Union[None, str, Mapping[int, float], Callable[[int], float]]


class ValidationError(ValueError):
    """Raised when a law or crossing set violates one of its invariants."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(f"{d.code}: {d.message}" for d in report.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]

    def raise_if_failed(self) -> None:
        if not self.ok:
            raise ValidationError(self)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "diagnostics": [{"code": d.code, "message": d.message} for d in self.diagnostics],
        }


class WeightError(KeyError):
    """A simulated path reached a state whose weight was never defined."""


def _weight_fn(weights: Weights) -> Callable[[int], float]:
    if weights is None or weights == "constant":
        return lambda i: 1.0
    if weights == "identity":
        return lambda i: float(i)
    if isinstance(weights, str):
        raise ValueError(f"unknown weight rule {weights!r}")
    if callable(weights):
        return weights
    table = {int(k): float(v) for k, v in weights.items()}

    def lookup(i: int) -> float:
        try:
            return table[i]
        except KeyError:
            raise WeightError(f"weight w_{i} is undefined") from None

    return lookup


@dataclass(frozen=True)
class BranchingLaw:
    """Rates ``b_j`` over a finite support plus optional state weights ``w_i``.

    Parameters
    ----------
    b : mapping of int to float
        Transition rates keyed by offspring index ``j``.  Absent indices are 0.
    weights : None, "constant", "identity", mapping or callable, optional
        Holding-rate multipliers ``w_i``.  ``None`` means all ones.  Weights
        only rescale time; nothing computed from the embedded jump chain
        depends on them.
    """

    b: Mapping[int, float]
    weights: Weights = None

    def __post_init__(self):
        clean = {int(j): float(v) for j, v in self.b.items() if float(v) != 0.0}
        object.__setattr__(self, "b", dict(sorted(clean.items())))

    @property
    def degree(self) -> int:
        return max(self.b) if self.b else 0

    @property
    def coefficients(self) -> np.ndarray:
        """Dense coefficient vector ``[b_0, ..., b_degree]``."""
        c = np.zeros(self.degree + 1)
        for j, v in self.b.items():
            c[j] = v
        return c

    def rate(self, j: int) -> float:
        return self.b.get(j, 0.0)

    @property
    def total_rate(self) -> float:
        """``-b_1``."""
        return -self.rate(1)

    @property
    def scale(self) -> float:
        """``|b_1| + sum_{j != 1} b_j``, the natural size of the rates."""
        return abs(self.rate(1)) + sum(v for j, v in self.b.items() if j != 1)

    @property
    def birth_rate(self) -> float:
        return sum((j - 1) * v for j, v in self.b.items() if j >= 2)

    def weight(self, i: int) -> float:
        return _weight_fn(self.weights)(i)

    def weight_function(self) -> Callable[[int], float]:
        return _weight_fn(self.weights)

    def with_weights(self, weights: Weights) -> "BranchingLaw":
        return BranchingLaw(self.b, weights)

    def scaled(self, factor: float) -> "BranchingLaw":
        return BranchingLaw({j: factor * v for j, v in self.b.items()}, self.weights)

    # generating functions -------------------------------------------------

    def B(self, u):
        """``B(u) = sum_j b_j u^j``."""
        return np.polynomial.polynomial.polyval(u, self.coefficients)

    def dB(self, u, order: int = 1):
        c = np.polynomial.polynomial.polyder(self.coefficients, order)
        return np.polynomial.polynomial.polyval(u, c)

    def split_coefficients(self, cset: "CrossingSet", v: Sequence[float] | None = None) -> np.ndarray:
        """Coefficients in ``u`` of ``Bbar_N(u) + B_N(u, v)``.

        With ``v=None`` the tracked terms are dropped, giving ``Bbar_N`` alone.
        """
        c = self.coefficients.copy()
        if v is None:
            v = np.zeros(len(cset))
        v = np.asarray(v, dtype=float)
        if v.shape != (len(cset),):
            raise ValueError(f"v has shape {v.shape}, crossing set has {len(cset)} indices")
        for k, vk in zip(cset.indices, v):
            if k < c.size:
                c[k] *= vk
        return c

    def to_dict(self) -> dict:
        weights = self.weights
        if weights is not None and not isinstance(weights, str):
            if callable(weights):
                raise TypeError("callable weights cannot be serialized")
            weights = {str(k): float(v) for k, v in weights.items()}
        return {"b": {str(j): v for j, v in self.b.items()}, "weights": weights}


@dataclass(frozen=True)
class CrossingSet:
    """Strictly increasing b-indices whose jumps are counted jointly."""

    indices: tuple[int, ...] = field(default=(0,))

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(k) for k in self.indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, k) -> bool:
        return k in self.indices

    def position(self, k: int) -> int:
        try:
            return self.indices.index(k)
        except ValueError:
            raise KeyError(f"{k} is not in crossing set {list(self.indices)}") from None


def validate(law: BranchingLaw, cset: CrossingSet | None = None) -> ValidationReport:
    """Check every invariant of ``law`` (and of ``cset`` relative to it)."""
    out: list[Diagnostic] = []
    b1 = law.rate(1)
    others = [v for j, v in law.b.items() if j != 1]
    if any(j < 0 for j in law.b):
        out.append(Diagnostic("negative-index", "rate indices must be nonnegative"))
    if not np.all(np.isfinite(list(law.b.values()) or [0.0])):
        out.append(Diagnostic("non-finite-rate", "rates must be finite"))
    if any(v < 0 for j, v in law.b.items() if j != 1):
        bad = [j for j, v in law.b.items() if j != 1 and v < 0]
        out.append(Diagnostic("negative-rate", f"b_j < 0 for j in {bad}"))
    if not b1 < 0:
        out.append(Diagnostic("b1-not-negative", f"b_1 = {b1} must be negative"))
    elif abs(b1 + sum(others)) > CONSERVATION_RTOL * abs(b1):
        out.append(
            Diagnostic(
                "conservation-violated",
                f"conservation violated: -b_1 = {-b1} != {sum(others)} = sum_(j!=1) b_j",
            )
        )
    if not law.rate(0) > 0:
        out.append(Diagnostic("no-death-rate", "b_0 must be positive"))

    w = law.weights
    if isinstance(w, str):
        if w not in ("constant", "identity"):
            out.append(Diagnostic("unknown-weight-rule", f"unknown weight rule {w!r}"))
    elif isinstance(w, Mapping):
        bad = [i for i, x in w.items() if not (int(i) >= 1 and float(x) > 0)]
        if bad:
            out.append(Diagnostic("bad-weight", f"weights must be positive on i >= 1; bad keys {bad}"))

    if cset is not None:
        idx = cset.indices
        if len(idx) == 0:
            out.append(Diagnostic("empty-set", "crossing set is empty"))
        if any(b <= a for a, b in zip(idx, idx[1:])):
            out.append(Diagnostic("set-not-increasing", "crossing set must be strictly increasing"))
        if any(k < 0 for k in idx):
            out.append(Diagnostic("negative-index", "crossing set indices must be nonnegative"))
        if 1 in idx:
            out.append(Diagnostic("set-contains-1", "crossing set contains 1"))
        missing = [k for k in idx if k != 1 and not law.rate(k) > 0]
        if missing:
            out.append(Diagnostic("untracked-rate-zero", f"b_k must be positive for k in crossing set; zero at {missing}"))
    return ValidationReport(tuple(out))


def eval_B(law: BranchingLaw, u):
    return law.B(u)


def eval_split(law: BranchingLaw, cset: CrossingSet, u, v) -> float:
    """``Bbar_N(u) + B_N(u, v)``."""
    return np.polynomial.polynomial.polyval(u, law.split_coefficients(cset, v))


def eval_bbar(law: BranchingLaw, cset: CrossingSet, u) -> float:
    """``Bbar_N(u)``: the part of ``B`` over indices outside the crossing set."""
    return np.polynomial.polynomial.polyval(u, law.split_coefficients(cset))


def eval_bbar_prime(law: BranchingLaw, cset: CrossingSet, u) -> float:
    c = np.polynomial.polynomial.polyder(law.split_coefficients(cset))
    return np.polynomial.polynomial.polyval(u, c)


def eval_tracked(law: BranchingLaw, cset: CrossingSet, u, v) -> float:
    """``B_N(u, v) = sum_{k in N} b_k u^k v_k``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (len(cset),):
        raise ValueError(f"v has shape {v.shape}, crossing set has {len(cset)} indices")
    return sum(law.rate(k) * u**k * vk for k, vk in zip(cset.indices, v))


# model files -----------------------------------------------------------------


def load_model(source: Union[str, os.PathLike, Mapping]) -> tuple[BranchingLaw, CrossingSet | None]:
    """Read ``{"b": {...}, "weights": ..., "crossing_set": [...]}``."""
    if isinstance(source, Mapping):
        data = source
    else:
        with open(source) as fh:
            data = json.load(fh)
    weights = data.get("weights")
    if isinstance(weights, Mapping):
        weights = {int(k): float(v) for k, v in weights.items()}
    law = BranchingLaw({int(k): float(v) for k, v in data["b"].items()}, weights)
    cs = data.get("crossing_set")
    return law, (CrossingSet(tuple(cs)) if cs is not None else None)


def dump_model(law: BranchingLaw, cset: CrossingSet | None, path=None) -> dict:
    data = law.to_dict()
    data["crossing_set"] = list(cset.indices) if cset is not None else None
    if path is not None:
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
    return data


def parse_indices(text: str | Iterable[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    return tuple(int(t) for t in text)
