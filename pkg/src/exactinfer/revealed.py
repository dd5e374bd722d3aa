"""Revealed preference from observed demand: SARP, the strict relation, bounds."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import IndifferentQuery
from .feasibility import Box, Classification, Region, branch_and_bound_cover
from .prefs import PreferenceSpec, PrefOrdering, demand_many, prefers
from .sequences import DemandObservation, SequenceConfig, demand_arrays, gen_prices, validate_demand_dataset

TOL_STRICT = 1e-9
SARP_BUDGET_TOL = 1e-9


def strictly_less(a: ArrayLike, b: ArrayLike, tol: float = TOL_STRICT) -> NDArray[np.bool_]:
    """``a < b`` accepted only with margin ``tol * max(1, |b|)``."""
    b = np.asarray(b, dtype=float)
    return np.asarray(a) < b - tol * np.maximum(1.0, np.abs(b))


def dominates(x: ArrayLike, y: ArrayLike) -> bool:
    """``x >= y`` componentwise with ``x != y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return bool(np.all(x >= y) and np.any(x > y))


class RevealedGraph:
    """Strict revealed-preference digraph with an incrementally kept closure.

    Node ``i`` has an edge to ``j`` when ``p_i . x_j`` is strictly below
    ``p_i . x_i``. Appending an observation updates the reachability matrix by
    propagating through the new node only.

    Args:
        n_goods: Number of goods ``L``.
        tol: Relative margin for accepting a strict inequality.
    """

    def __init__(self, n_goods: int, tol: float = TOL_STRICT):
        if n_goods < 1:
            raise ValueError("n_goods must be positive")
        self.n_goods = n_goods
        self.tol = tol
        self._n = 0
        self._alloc(16)

    def _alloc(self, cap: int) -> None:
        P = np.zeros((cap, self.n_goods))
        X = np.zeros((cap, self.n_goods))
        spend = np.zeros(cap)
        edges = np.zeros((cap, cap), dtype=bool)
        closure = np.zeros((cap, cap), dtype=bool)
        n = self._n
        if n:
            P[:n], X[:n], spend[:n] = self._P[:n], self._X[:n], self._spend[:n]
            edges[:n, :n] = self._edges[:n, :n]
            closure[:n, :n] = self._closure[:n, :n]
        self._P, self._X, self._spend, self._edges, self._closure = P, X, spend, edges, closure

    @classmethod
    def from_arrays(cls, P: ArrayLike, X: ArrayLike, tol: float = TOL_STRICT) -> RevealedGraph:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        X = np.atleast_2d(np.asarray(X, dtype=float))
        graph = cls(P.shape[1], tol)
        for p, x in zip(P, X):
            graph.extend(p, x)
        return graph

    @classmethod
    def from_dataset(cls, dataset: Sequence[DemandObservation], tol: float = TOL_STRICT) -> RevealedGraph:
        if not dataset:
            raise ValueError("use RevealedGraph(n_goods) for an empty dataset")
        P, X = demand_arrays(dataset)
        return cls.from_arrays(P, X, tol)

    def __len__(self) -> int:
        return self._n

    @property
    def n(self) -> int:
        return self._n

    @property
    def prices(self) -> NDArray[np.float64]:
        return self._P[: self._n]

    @property
    def bundles(self) -> NDArray[np.float64]:
        return self._X[: self._n]

    @property
    def strict_edges(self) -> NDArray[np.bool_]:
        return self._edges[: self._n, : self._n]

    @property
    def closure(self) -> NDArray[np.bool_]:
        return self._closure[: self._n, : self._n]

    def extend(self, p: ArrayLike, x: ArrayLike) -> int:
        """Append observation ``(p, x)`` and return its index."""
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        if p.shape != (self.n_goods,) or x.shape != (self.n_goods,):
            raise ValueError("observation has the wrong number of goods")
        n = self._n
        if n == self._P.shape[0]:
            self._alloc(2 * n)
        k = n
        self._P[k], self._X[k] = p, x
        spend_k = float(p @ x)
        self._spend[k] = spend_k

        old_P, old_X, old_spend = self._P[:n], self._X[:n], self._spend[:n]
        into = strictly_less(old_P @ x, old_spend, self.tol)  # i -> k
        out = strictly_less(old_X @ p, spend_k, self.tol)  # k -> j
        C = self._closure
        self._edges[:n, k] = into
        self._edges[k, :n] = out

        reach = out | C[:n, :n][out].any(axis=0)
        anc = into | C[:n, :n][:, into].any(axis=1)
        C[k, :n] = reach
        C[:n, k] = anc
        C[k, k] = bool((reach & anc).any())
        rows = np.flatnonzero(anc)
        if rows.size:
            C[rows, :n] |= reach
        self._n = n + 1
        return k

    def reachable(self, i: int, j: int) -> bool:
        return bool(self._closure[i, j])

    def path(self, i: int, j: int) -> list[int] | None:
        """Shortest chain of strict edges from ``i`` to ``j`` (at least one edge)."""
        E = self.strict_edges
        parent: dict[int, int] = {}
        queue: deque[int] = deque()
        for v in np.flatnonzero(E[i]):
            parent[int(v)] = i
            queue.append(int(v))
        while queue and j not in parent:
            u = queue.popleft()
            for v in np.flatnonzero(E[u]):
                if int(v) not in parent:
                    parent[int(v)] = u
                    queue.append(int(v))
        if j not in parent:
            return None
        chain = [j]
        node = parent[j]
        while node != i:
            chain.append(node)
            node = parent[node]
        chain.append(i)
        return chain[::-1]


# ------------------------------------------------------------------- SARP


@dataclass(frozen=True)
class SarpResult:
    holds: bool
    witness_cycle: tuple[int, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "witness_cycle": None if self.witness_cycle is None else list(self.witness_cycle),
        }


def weak_revealed(P: NDArray[np.float64], X: NDArray[np.float64], tol: float = TOL_STRICT) -> NDArray[np.bool_]:
    """``W[i, j]``: ``p_i . x_j`` is not strictly above ``p_i . x_i`` and ``x_i != x_j``."""
    cross = P @ X.T
    own = np.diag(cross)
    weak = ~strictly_less(own[:, None], cross, tol)
    same = np.all(X[:, None, :] == X[None, :, :], axis=2)
    return weak & ~same


def _shortcut(cycle: list[int], X: NDArray[np.float64]) -> list[int]:
    # an edge into a node is also an edge into any node with the same bundle
    while True:
        seen: dict[bytes, int] = {}
        for pos, node in enumerate(cycle):
            key = X[node].tobytes()
            if key in seen:
                cycle = cycle[seen[key] : pos]
                break
            seen[key] = pos
        else:
            return cycle


def check_sarp_arrays(P: ArrayLike, X: ArrayLike, tol: float = TOL_STRICT) -> SarpResult:
    """SARP on stacked income-normalized prices ``P`` and bundles ``X``."""
    P = np.asarray(P, dtype=float)
    X = np.asarray(X, dtype=float)
    n = len(P)
    if n < 2:
        return SarpResult(True)
    W = weak_revealed(P, X, tol)
    n_comp, labels = connected_components(csr_matrix(W), directed=True, connection="strong")
    if n_comp == n:
        return SarpResult(True)
    sizes = np.bincount(labels)
    comp = int(np.argmax(sizes > 1))
    members = np.flatnonzero(labels == comp)
    start = int(members[0])
    inside = labels == comp
    parent: dict[int, int] = {}
    queue = deque()
    for v in np.flatnonzero(W[start] & inside):
        parent[int(v)] = start
        queue.append(int(v))
    while queue:
        u = queue.popleft()
        if u == start:
            break
        for v in np.flatnonzero(W[u] & inside):
            v = int(v)
            if v not in parent:
                parent[v] = u
                queue.append(v)
    cycle = [start]
    node = parent[start]
    while node != start:
        cycle.append(node)
        node = parent[node]
    cycle.reverse()
    cycle = [cycle[-1]] + cycle[:-1]
    return SarpResult(False, tuple(_shortcut(cycle, X)))


def check_sarp(dataset: Sequence[DemandObservation], tol: float = TOL_STRICT) -> SarpResult:
    """Test the strong axiom of revealed preference.

    A violation is a cycle of weak revealed preferences among distinct
    bundles, found as a nontrivial strongly connected component of the weak
    relation. The witness lists observation indices in chain order.

    Raises:
        MalformedDataset: If some ``p_k . x_k`` is not one within tolerance.
    """
    validate_demand_dataset(dataset, SARP_BUDGET_TOL)
    if len(dataset) < 2:
        return SarpResult(True)
    P, X = demand_arrays(dataset)
    return check_sarp_arrays(P, X, tol)


def verify_sarp_witness(P: ArrayLike, X: ArrayLike, cycle: Sequence[int], tol: float = TOL_STRICT) -> bool:
    """Re-check a witness cycle arithmetically: every link weak, bundles distinct."""
    P = np.asarray(P, dtype=float)
    X = np.asarray(X, dtype=float)
    cycle = list(cycle)
    if len(cycle) < 2 or len({X[i].tobytes() for i in cycle}) != len(cycle):
        return False
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        own, cross = P[a] @ X[a], P[a] @ X[b]
        if strictly_less(own, cross, tol):
            return False
    return True


# ------------------------------------------------ strict revealed relation


def _endpoints(graph: RevealedGraph, x: NDArray[np.float64], y: NDArray[np.float64]):
    X = graph.bundles
    return np.all(X <= x, axis=1), np.all(X >= y, axis=1)


def strictly_revealed_preferred(graph: RevealedGraph, x: ArrayLike, y: ArrayLike) -> bool:
    """Whether the data reveal ``x`` strictly preferred to ``y``.

    True when ``x`` dominates ``y``, or when some observed bundle below ``x``
    starts a chain of strictly cheaper choices ending at a bundle above ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y):
        return True
    if graph.n == 0:
        return False
    starts, ends = _endpoints(graph, x, y)
    if not starts.any() or not ends.any():
        return False
    return bool(graph.closure[starts][:, ends].any())


def revealed_chain(graph: RevealedGraph, x: ArrayLike, y: ArrayLike) -> list[int] | None:
    """A witnessing chain for :func:`strictly_revealed_preferred`.

    Returns ``[]`` for pure dominance, a list of observation indices for a
    chain, or ``None`` when ``x`` is not revealed preferred to ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y):
        return []
    if graph.n == 0:
        return None
    starts, ends = _endpoints(graph, x, y)
    C = graph.closure
    for i in np.flatnonzero(starts):
        hits = np.flatnonzero(C[i] & ends)
        if hits.size:
            return graph.path(int(i), int(hits[0]))
    return None


def verify_chain(P: ArrayLike, X: ArrayLike, chain: Sequence[int], x: ArrayLike, y: ArrayLike, tol: float = TOL_STRICT) -> bool:
    """Arithmetic re-check of a chain returned by :func:`revealed_chain`."""
    P = np.asarray(P, dtype=float)
    X = np.asarray(X, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not chain:
        return dominates(x, y)
    if not (np.all(x >= X[chain[0]]) and np.all(X[chain[-1]] >= y)):
        return False
    return all(bool(strictly_less(P[a] @ X[b], P[a] @ X[a], tol)) for a, b in zip(chain, chain[1:]))


def detection_index(
    spec: PreferenceSpec,
    config: SequenceConfig,
    x: ArrayLike,
    y: ArrayLike,
    n_max: int,
    tol: float = TOL_STRICT,
) -> int | None:
    """Smallest number of observations after which ``x`` is revealed preferred to ``y``.

    Observations are demands of ``spec`` at the prices of ``config``. Returns
    ``0`` when ``x`` dominates ``y`` and ``None`` if nothing is revealed
    within ``n_max`` observations.

    Raises:
        IndifferentQuery: If ``spec`` is indifferent between ``x`` and ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if prefers(spec, x, y) is PrefOrdering.INDIFFERENT:
        raise IndifferentQuery("x and y are indifferent")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if dominates(x, y):
        return 0
    P = np.stack(gen_prices(config, n_max))
    return first_detection(P, demand_many(spec, P), x, y, tol)


def first_detection(
    P: NDArray[np.float64],
    X: NDArray[np.float64],
    x: NDArray[np.float64],
    y: NDArray[np.float64],
    tol: float = TOL_STRICT,
    return_chain: bool = False,
):
    """Scan nested prefixes of ``(P, X)`` and return the first revealing length.

    Keeps the set of nodes reachable from bundles below ``x``. Edges among
    earlier observations never change, so each new node is either reached
    from the current set or not; a newly reached node is propagated by search.

    Returns:
        The prefix length, or ``None``. With ``return_chain`` a pair
        ``(length, chain)`` where ``chain`` lists the observation indices.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y):
        return (0, []) if return_chain else 0
    n = len(P)
    if np.array_equal(x, y) or n == 0:
        return (None, None) if return_chain else None
    spend = np.einsum("ij,ij->i", P, X)
    thresh = spend - tol * np.maximum(1.0, np.abs(spend))
    start = np.all(X <= x, axis=1)
    end = np.all(X >= y, axis=1)
    reached = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    count = 0
    for k in range(n):
        if not start[k]:
            if count == 0:
                continue
            idx = order[:count]
            hits = np.flatnonzero(P[idx] @ X[k] < thresh[idx])
            if hits.size == 0:
                continue
            parent[k] = idx[hits[0]]
        reached[k] = True
        order[count] = k
        count += 1
        queue = [k]
        while queue:
            j = queue.pop()
            if end[j]:
                if not return_chain:
                    return k + 1
                chain = [j]
                while parent[chain[-1]] >= 0:
                    chain.append(int(parent[chain[-1]]))
                return k + 1, chain[::-1]
            new = np.flatnonzero(~reached[: k + 1] & (X[: k + 1] @ P[j] < thresh[j]))
            reached[new] = True
            parent[new] = j
            order[count : count + new.size] = new
            count += new.size
            queue.extend(int(v) for v in new)
    return (None, None) if return_chain else None


# ----------------------------------------------------------- demand bounds


def budget_cover(p: ArrayLike, floors: ArrayLike, depth: int) -> Region:
    """Cover of ``{x >= 0 : p.x = 1}`` minus points lying below some floor.

    A budget point ``x`` is excluded when ``x <= f`` for a row ``f`` of
    ``floors``. The search runs over the first ``L - 1`` coordinates; the
    last one is pinned by the budget identity. Returned boxes are in full
    coordinates.
    """
    p = np.asarray(p, dtype=float)
    L = p.size
    F = np.asarray(floors, dtype=float).reshape(-1, L)
    head, pL = p[:-1], p[-1]

    def last_range(box: Box) -> tuple[float, float]:
        return (1.0 - head @ box.hi) / pL, (1.0 - head @ box.lo) / pL

    def classify(box: Box) -> Classification:
        lo_last, hi_last = last_range(box)
        if hi_last < 0:
            return Classification.ALL_OUT
        top = np.append(box.hi, hi_last)
        if F.size and np.any(np.all(top <= F, axis=1)):
            return Classification.ALL_OUT
        if lo_last < 0:
            return Classification.SPLIT
        bottom = np.append(box.lo, lo_last)
        if F.size == 0 or np.all(np.any(bottom > F, axis=1)):
            return Classification.ALL_IN
        return Classification.SPLIT

    initial = Box(np.zeros(L - 1), 1.0 / head)
    cover = branch_and_bound_cover(initial, classify, depth)
    boxes = []
    for box in cover.boxes:
        lo_last, hi_last = last_range(box)
        if hi_last >= 0:
            lo_last = max(lo_last, 0.0)
        boxes.append(Box(np.append(box.lo, lo_last), np.append(box.hi, hi_last)))
    return Region(tuple(boxes), cover.status)


def revealed_demand_bounds(graph: RevealedGraph, p: ArrayLike, depth: int) -> Region:
    """Outer approximation of the revealed demand set at income-normalized ``p``.

    A budget point is dropped when some affordable observed bundle starts a
    strict chain ending at a bundle that dominates it. True demand is never
    dropped.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (graph.n_goods,) or np.any(p <= 0):
        raise ValueError("p must be a strictly positive price vector")
    if graph.n:
        affordable = graph.bundles @ p <= 1.0
        targets = graph.closure[affordable].any(axis=0)
        floors = graph.bundles[targets]
    else:
        floors = np.empty((0, graph.n_goods))
    return budget_cover(p, floors, depth)


# ---------------------------------------------------------- binary choice


class ChoiceInference(enum.Enum):
    MUST_PREFER = "must_prefer"
    MUST_DISPREFER = "must_disprefer"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True, eq=False)
class ChoiceData:
    """Pairwise choices stored as chosen bundles ``C`` and rejected bundles ``R``."""

    chosen: NDArray[np.float64]
    rejected: NDArray[np.float64]

    @classmethod
    def from_choices(cls, choices: Sequence[tuple[ArrayLike, ArrayLike, ArrayLike]]) -> ChoiceData:
        chosen, rejected = [], []
        for a, b, c in choices:
            a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
            if np.array_equal(c, a):
                chosen.append(a)
                rejected.append(b)
            elif np.array_equal(c, b):
                chosen.append(b)
                rejected.append(a)
            else:
                raise ValueError("chosen bundle must equal one of the offered pair")
        if not chosen:
            return cls(np.empty((0, 0)), np.empty((0, 0)))
        return cls(np.stack(chosen), np.stack(rejected))

    def __len__(self) -> int:
        return len(self.chosen)


def _first_witness(data: ChoiceData, hi: NDArray[np.float64], lo: NDArray[np.float64]) -> int | None:
    """First choice whose chosen bundle is below ``hi`` and rejected is above ``lo``."""
    if len(data) == 0:
        return None
    C, R = data.chosen, data.rejected
    ok = np.all(C <= hi, axis=1) & np.all(R >= lo, axis=1)
    ok &= np.any(C != hi, axis=1) | np.any(R != lo, axis=1)
    idx = np.flatnonzero(ok)
    return int(idx[0]) if idx.size else None


def binary_choice_infer(
    choices: ChoiceData | Sequence[tuple[ArrayLike, ArrayLike, ArrayLike]],
    x: ArrayLike,
    y: ArrayLike,
) -> ChoiceInference:
    """What pairwise choices plus monotonicity imply about ``x`` versus ``y``.

    ``x`` must be preferred when it dominates ``y``, or when some chosen
    bundle lies below ``x`` while the bundle it beat lies above ``y`` and one
    of the two comparisons is strict.
    """
    data = choices if isinstance(choices, ChoiceData) else ChoiceData.from_choices(choices)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y) or _first_witness(data, x, y) is not None:
        return ChoiceInference.MUST_PREFER
    if dominates(y, x) or _first_witness(data, y, x) is not None:
        return ChoiceInference.MUST_DISPREFER
    return ChoiceInference.UNDETERMINED


def choice_detection_index(data: ChoiceData, x: ArrayLike, y: ArrayLike) -> int | None:
    """Number of leading choices needed before ``x`` must be preferred to ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if dominates(x, y):
        return 0
    idx = _first_witness(data, x, y)
    return None if idx is None else idx + 1
