"""Revealed preference and equilibrium inference from aggregate data.

Statements must hold for every allocation consistent with the data. They are
certified with bounds that hold uniformly over the per-observation hulls of
consistent splits, and refuted with a concrete consistent allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import UnsupportedDimensions
from ..feasibility import Region
from ..revealed import RevealedGraph, budget_cover, dominates, strictly_less, strictly_revealed_preferred
from ..sequences import EconomyObservation, economy_arrays
from .allocations import INNER_TAU, CnInstance, SplitNetwork, cn_membership, split_network


@dataclass(frozen=True)
class TriState:
    """``"true"``, ``"false"`` or ``"unknown"``; unknown carries the unresolved hull width."""

    status: str
    resolution: float | None = None

    def __post_init__(self) -> None:
        if self.status not in ("true", "false", "unknown"):
            raise ValueError(f"bad status {self.status!r}")

    @classmethod
    def unknown(cls, resolution: float) -> TriState:
        return cls("unknown", float(resolution))

    @property
    def is_true(self) -> bool:
        return self.status == "true"

    @property
    def is_false(self) -> bool:
        return self.status == "false"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "resolution": self.resolution}


TriState.TRUE = TriState("true")  # type: ignore[attr-defined]
TriState.FALSE = TriState("false")  # type: ignore[attr-defined]


def _check_dims(dataset: Sequence[EconomyObservation], h: int) -> None:
    if dataset:
        P, W, _ = economy_arrays(dataset)
        if P.shape[1] != 2 or W.shape[1] != 2:
            raise UnsupportedDimensions("needs two goods and two individuals")
    if h not in (0, 1):
        raise IndexError("individual must be 0 or 1")


@dataclass(frozen=True, eq=False)
class RobustBounds:
    """Bundle bounds for one individual valid for every consistent allocation.

    Attributes:
        upper: Componentwise maximum bundle per observation.
        lower: Componentwise minimum bundle per observation.
        edges: ``edges[i, j]`` when ``x_j`` is strictly cheaper than ``x_i`` at
            ``x_i``'s prices for every consistent split.
    """

    upper: NDArray[np.float64]
    lower: NDArray[np.float64]
    edges: NDArray[np.bool_]

    @classmethod
    def from_hulls(cls, net: SplitNetwork, h: int, hulls: NDArray[np.float64]) -> RobustBounds:
        ends_lo = net.bundles(h, hulls[:, 0])
        ends_hi = net.bundles(h, hulls[:, 1])
        Q = net.Q[h]
        cost = np.maximum(Q @ ends_lo.T, Q @ ends_hi.T)
        edges = strictly_less(cost, 1.0)
        np.fill_diagonal(edges, False)
        return cls(np.maximum(ends_lo, ends_hi), np.minimum(ends_lo, ends_hi), edges)

    def reach_from(self, starts: NDArray[np.bool_]) -> NDArray[np.bool_]:
        """Nodes at the end of a chain of one or more edges from ``starts``."""
        reached = self.edges[starts].any(axis=0)
        frontier = reached.copy()
        while frontier.any():
            new = self.edges[frontier].any(axis=0) & ~reached
            reached |= new
            frontier = new
        return reached

    def chain(self, x: NDArray[np.float64], y: NDArray[np.float64]) -> bool:
        starts = np.all(self.upper <= x, axis=1)
        if not starts.any():
            return False
        ends = np.all(self.lower >= y, axis=1)
        if not ends.any():
            return False
        return bool((self.reach_from(starts) & ends).any())


def robust_bounds(dataset: Sequence[EconomyObservation], h: int) -> RobustBounds | None:
    """:class:`RobustBounds` from the split hulls, or ``None`` if nothing is consistent."""
    net = split_network(dataset)
    key = ("robust", h)
    if key not in net.memo:
        sol = net.solve()
        net.memo[key] = None if sol is None else RobustBounds.from_hulls(net, h, sol.hulls())
    return net.memo[key]


def _witness_graph(inner: SplitNetwork, h: int) -> RevealedGraph | None:
    key = ("witness", h)
    if key not in inner.memo:
        graph = None
        sol = inner.solve()
        if sol is not None:
            s = sol.model()
            if cn_membership(CnInstance(inner.dataset, inner.candidate(s))):
                graph = RevealedGraph.from_arrays(inner.Q[h], inner.bundles(h, s))
        inner.memo[key] = graph
    return inner.memo[key]


def _witness(inner: SplitNetwork, h: int, x, y) -> bool:
    """Whether some verified member allocation reveals no chain from ``x`` to ``y``."""
    graph = _witness_graph(inner, h)
    return graph is not None and not strictly_revealed_preferred(graph, x, y)


def _forall(outer: SplitNetwork, inner: SplitNetwork, h: int, x, y, depth: int) -> TriState:
    sol = outer.solve()
    if sol is None:
        return TriState.TRUE  # type: ignore[attr-defined]
    # a witness is cheap and rules out any uniform chain, so try it first
    if _witness(inner, h, x, y):
        return TriState.FALSE  # type: ignore[attr-defined]
    hulls = sol.hulls()
    bounds = outer.memo.get(("robust", h)) or RobustBounds.from_hulls(outer, h, hulls)
    outer.memo[("robust", h)] = bounds
    if bounds.chain(x, y):
        return TriState.TRUE  # type: ignore[attr-defined]
    widths = hulls[:, 1] - hulls[:, 0]
    if depth <= 0 or widths.max() <= 0:
        return TriState.unknown(widths.max())
    k = int(np.argmax(widths))
    cut = 0.5 * (hulls[k, 0] + hulls[k, 1])
    results = []
    for lower, upper in ((None, cut), (cut, None)):
        r = _forall(
            outer.restricted(k, lower, upper), inner.restricted(k, lower, upper), h, x, y, depth - 1
        )
        if r.is_false:
            return r
        results.append(r)
    if all(r.is_true for r in results):
        return TriState.TRUE  # type: ignore[attr-defined]
    return TriState.unknown(max(r.resolution or 0.0 for r in results if not r.is_true))


def eq_revealed_preferred(
    dataset: Sequence[EconomyObservation],
    h: int,
    x: ArrayLike,
    y: ArrayLike,
    depth: int = 0,
) -> TriState:
    """Whether every allocation consistent with the data reveals ``x`` over ``y`` for ``h``.

    ``true`` is certified by a chain that works for every consistent split;
    ``false`` by a consistent allocation (verified against the full
    membership test) without any chain. Otherwise the consistent set is
    bisected ``depth`` times before giving up with ``unknown``.

    Raises:
        UnsupportedDimensions: Unless two goods and two individuals.
    """
    _check_dims(dataset, h)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y):
        return TriState.TRUE  # type: ignore[attr-defined]
    if not dataset:
        return TriState.FALSE  # type: ignore[attr-defined]
    return _forall(split_network(dataset), split_network(dataset, INNER_TAU), h, x, y, depth)


def eq_revealed_demand_bounds(
    dataset: Sequence[EconomyObservation],
    h: int,
    p: ArrayLike,
    depth: int,
    bounds: RobustBounds | None = None,
) -> Region:
    """Outer approximation of individual ``h``'s revealed demand at normalized prices ``p``.

    A budget point is dropped only if an affordable bundle is revealed
    preferred to it under every consistent allocation.
    """
    _check_dims(dataset, h)
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any(p <= 0):
        raise ValueError("p must be a positive price vector of length 2")
    floors = np.empty((0, 2))
    if dataset:
        rb = bounds if bounds is not None else robust_bounds(dataset, h)
        if rb is not None:
            starts = rb.upper @ p <= 1.0
            if starts.any():
                floors = rb.lower[rb.reach_from(starts)]
    return budget_cover(p, floors, depth)


# ------------------------------------------------------ approximate equilibria


@dataclass(frozen=True)
class ApproxEquilibriumSet:
    """Grid prices ``(i / grid_res, 1 - i / grid_res)`` that survive the test."""

    grid_res: int
    eps: float
    indices: tuple[int, ...]

    @property
    def prices(self) -> NDArray[np.float64]:
        i = np.asarray(self.indices, dtype=float)
        return np.stack([i / self.grid_res, 1.0 - i / self.grid_res], axis=1).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: object) -> bool:
        return index in self.indices

    def interval(self) -> tuple[int, int] | None:
        return (self.indices[0], self.indices[-1]) if self.indices else None

    @property
    def width(self) -> float:
        """Span of the surviving first-good prices."""
        if not self.indices:
            return 0.0
        return (self.indices[-1] - self.indices[0]) / self.grid_res

    def to_dict(self) -> dict[str, Any]:
        return {"grid_res": self.grid_res, "eps": self.eps, "indices": list(self.indices)}


def grid_index(price: ArrayLike, grid_res: int) -> int:
    """Nearest grid index of a two-good price after simplex normalization."""
    price = np.asarray(price, dtype=float)
    return int(round(price[0] / price.sum() * grid_res))


def _first_good_intervals(region: Region) -> list[tuple[float, float]]:
    return [(float(b.lo[0]), float(b.hi[0])) for b in region.candidates()]


def _gap(a: list[tuple[float, float]], b: list[tuple[float, float]]) -> float:
    if not a or not b:
        return float("inf")
    A = np.asarray(a)
    B = np.asarray(b)
    gaps = np.maximum(0.0, np.maximum(A[:, None, 0] - B[None, :, 1], B[None, :, 0] - A[:, None, 1]))
    return float(gaps.min())


def approx_equilibrium_set(
    dataset: Sequence[EconomyObservation],
    endowments: ArrayLike,
    grid_res: int,
    eps: float,
    depth: int = 12,
) -> ApproxEquilibriumSet:
    """Interior simplex grid prices compatible with approximate equilibrium.

    A price ``p`` is kept when some allocation on the individual budget lines
    clears the market up to ``eps`` (Euclidean norm of the excess) while no
    individual's bundle is revealed dominated by an affordable alternative.

    Args:
        dataset: Aggregate observations (two goods, two individuals).
        endowments: Array ``(2, 2)``, one row per individual.
        grid_res: Number of grid intervals on the price simplex.
        eps: Allowed market-clearing error.
        depth: Bisection depth of each individual demand cover.
    """
    if grid_res < 2:
        raise ValueError("grid_res must be at least 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    e = np.asarray(endowments, dtype=float)
    if e.shape != (2, 2):
        raise UnsupportedDimensions("needs two goods and two individuals")
    _check_dims(dataset, 0)
    total = e.sum(axis=0)
    bounds = [robust_bounds(dataset, h) if dataset else None for h in (0, 1)]
    keep = []
    for i in range(1, grid_res):
        p = np.array([i / grid_res, 1.0 - i / grid_res])
        w = e @ p
        if np.any(w <= 0):
            continue
        own: list[list[tuple[float, float]]] = []
        for h in (0, 1):
            region = eq_revealed_demand_bounds(dataset, h, p / w[h], depth, bounds[h])
            own.append(_first_good_intervals(region))
        # individual 1's first-good quantity r leaves total - r for individual 0
        mirrored = [(total[0] - hi, total[0] - lo) for lo, hi in own[1]]
        slack = eps / np.hypot(1.0, p[0] / p[1])
        if _gap(own[0], mirrored) <= slack:
            keep.append(i)
    return ApproxEquilibriumSet(grid_res, float(eps), tuple(keep))
