"""Parametric preference families with closed-form utility and demand.

Cobb-Douglas and CES consumers act as the ground truth that generates
observations and answers oracle queries in tests and experiments.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NonPositiveBundle

TOL_INDIFF = 1e-9

COBB_DOUGLAS = "cobb_douglas"
CES = "ces"
_FAMILIES = (COBB_DOUGLAS, CES)


class PrefOrdering(enum.Enum):
    """Outcome of comparing two bundles."""

    STRICTLY_PREFERRED = 1
    INDIFFERENT = 0
    STRICTLY_DISPREFERRED = -1

    def reverse(self) -> PrefOrdering:
        return PrefOrdering(-self.value)


@dataclass(frozen=True)
class PreferenceSpec:
    """A Cobb-Douglas or CES preference over ``L`` goods.

    Attributes:
        family: ``"cobb_douglas"`` or ``"ces"``.
        alpha: Positive weights summing to one.
        rho: CES substitution parameter, ``rho < 1`` and ``rho != 0``.
            Must be ``None`` for Cobb-Douglas.
    """

    family: str
    alpha: tuple[float, ...]
    rho: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown preference family {self.family!r}")
        if len(self.alpha) < 2:
            raise ValueError("at least two goods are required")
        if not all(math.isfinite(a) and a > 0 for a in self.alpha):
            raise ValueError("alpha entries must be positive and finite")
        if abs(math.fsum(self.alpha) - 1.0) > 1e-12:
            raise ValueError("alpha must sum to 1")
        if self.family == CES:
            if self.rho is None or not math.isfinite(self.rho):
                raise ValueError("CES requires a finite rho")
            object.__setattr__(self, "rho", float(self.rho))
            if not self.rho < 1 or self.rho == 0:
                raise ValueError("CES rho must satisfy rho < 1 and rho != 0")
        elif self.rho is not None:
            raise ValueError("Cobb-Douglas takes no rho")

    @classmethod
    def cobb_douglas(cls, alpha: ArrayLike) -> PreferenceSpec:
        return cls(COBB_DOUGLAS, tuple(np.asarray(alpha, dtype=float)))

    @classmethod
    def ces(cls, alpha: ArrayLike, rho: float) -> PreferenceSpec:
        return cls(CES, tuple(np.asarray(alpha, dtype=float)), rho)

    @property
    def n_goods(self) -> int:
        return len(self.alpha)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, "alpha": list(self.alpha)}
        if self.family == CES:
            out["rho"] = self.rho
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PreferenceSpec:
        family = data.get("family")
        if family == COBB_DOUGLAS:
            return cls(COBB_DOUGLAS, tuple(data["alpha"]))
        if family == CES:
            return cls(CES, tuple(data["alpha"]), data["rho"])
        raise ValueError(f"unknown preference family {family!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> PreferenceSpec:
        return cls.from_dict(json.loads(text))


def _interior(x: ArrayLike, n_goods: int) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n_goods,):
        raise ValueError(f"expected a bundle of length {n_goods}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise NonPositiveBundle(f"bundle must be strictly positive, got {arr.tolist()}")
    return arr


def _prices(p: ArrayLike, n_goods: int) -> NDArray[np.float64]:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (n_goods,):
        raise ValueError(f"expected {n_goods} prices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("prices must be strictly positive and finite")
    return arr


def log_utility(spec: PreferenceSpec, x: ArrayLike) -> float:
    """Logarithm of :func:`utility`, which avoids overflow for extreme bundles."""
    arr = _interior(x, spec.n_goods)
    alpha = np.asarray(spec.alpha)
    if spec.family == COBB_DOUGLAS:
        return float(alpha @ np.log(arr))
    rho = spec.rho
    # log sum_l alpha_l x_l^rho, computed with a log-sum-exp shift
    terms = np.log(alpha) + rho * np.log(arr)
    top = terms.max()
    return float((top + math.log(np.exp(terms - top).sum())) / rho)


def utility(spec: PreferenceSpec, x: ArrayLike) -> float:
    """Evaluate the utility index of ``x``.

    Args:
        spec: Preference to evaluate.
        x: Strictly positive bundle.

    Returns:
        ``prod x_l**alpha_l`` for Cobb-Douglas, ``(sum alpha_l x_l**rho)**(1/rho)`` for CES.

    Raises:
        NonPositiveBundle: If any coordinate of ``x`` is not strictly positive.
    """
    arr = _interior(x, spec.n_goods)
    alpha = np.asarray(spec.alpha)
    if spec.family == COBB_DOUGLAS:
        return float(np.prod(arr**alpha))
    return float((alpha @ arr**spec.rho) ** (1.0 / spec.rho))


def demand(spec: PreferenceSpec, p: ArrayLike, w: float = 1.0) -> NDArray[np.float64]:
    """Walrasian demand at prices ``p`` and income ``w``.

    Args:
        spec: Preference of the consumer.
        p: Strictly positive price vector.
        w: Positive income.

    Returns:
        The unique utility maximizer on ``{x : p.x <= w}``.
    """
    prices = _prices(p, spec.n_goods)
    if not (math.isfinite(w) and w > 0):
        raise ValueError("income must be positive and finite")
    alpha = np.asarray(spec.alpha)
    if spec.family == COBB_DOUGLAS:
        return alpha * w / prices
    sigma = 1.0 / (1.0 - spec.rho)
    # expenditure shares are proportional to alpha^sigma p^(1-sigma); use logs for range
    log_share = sigma * np.log(alpha) + (1.0 - sigma) * np.log(prices)
    share = np.exp(log_share - log_share.max())
    share /= share.sum()
    return share * w / prices


def prefers(spec: PreferenceSpec, x: ArrayLike, y: ArrayLike, tol: float = TOL_INDIFF) -> PrefOrdering:
    """Compare ``x`` against ``y`` with a relative indifference band ``tol`` on utility.

    Componentwise dominance is decided before the band is applied, since both
    families are strictly monotone.
    """
    ux = log_utility(spec, x)
    uy = log_utility(spec, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.array_equal(x, y):
        if np.all(x >= y):
            return PrefOrdering.STRICTLY_PREFERRED
        if np.all(x <= y):
            return PrefOrdering.STRICTLY_DISPREFERRED
    # a relative tolerance on utility values is an absolute one on log utility
    gap = ux - uy
    if abs(gap) <= math.log1p(tol):
        return PrefOrdering.INDIFFERENT
    return PrefOrdering.STRICTLY_PREFERRED if gap > 0 else PrefOrdering.STRICTLY_DISPREFERRED


def demand_many(spec: PreferenceSpec, P: ArrayLike, w: ArrayLike | float = 1.0) -> NDArray[np.float64]:
    """Row-wise :func:`demand` for a stack of price vectors ``P`` of shape ``(n, L)``."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[1] != spec.n_goods:
        raise ValueError("P must have shape (n, L)")
    if P.size and (not np.all(np.isfinite(P)) or np.any(P <= 0)):
        raise ValueError("prices must be strictly positive and finite")
    w = np.broadcast_to(np.asarray(w, dtype=float), (P.shape[0],))[:, None]
    if np.any(w <= 0):
        raise ValueError("incomes must be positive")
    alpha = np.asarray(spec.alpha)
    if spec.family == COBB_DOUGLAS:
        return alpha * w / P
    sigma = 1.0 / (1.0 - spec.rho)
    log_share = sigma * np.log(alpha) + (1.0 - sigma) * np.log(P)
    share = np.exp(log_share - log_share.max(axis=1, keepdims=True))
    share /= share.sum(axis=1, keepdims=True)
    return share * w / P
