"""Allocations consistent with aggregate data.

For two goods and two individuals the allocation at observation ``k`` is a
single scalar ``s_k``: individual 0's quantity of good 0. Budget identities
fix the rest. With two goods the strong axiom reduces to forbidding pairs of
observations that are each weakly revealed over the other, and every such
pair constraint is a disjunction of two threshold conditions on ``s``. The
consistent set is therefore a 2-SAT instance over ordered threshold atoms,
which :class:`SplitNetwork` solves exactly (up to a margin ``tau`` that can
only enlarge the set).
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from ..errors import DimensionMismatch, UnsupportedDimensions
from ..feasibility import Box, Classification, Region, branch_and_bound_cover
from ..revealed import SarpResult, check_sarp_arrays
from ..sequences import EconomyObservation, economy_arrays

MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CnInstance:
    """A candidate allocation ``candidate[k, h]`` for every observation and individual."""

    dataset: Sequence[EconomyObservation]
    candidate: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidate", np.asarray(self.candidate, dtype=float))


@dataclass(frozen=True)
class CnCheck:
    """Outcome of a membership test; ``reason`` is empty for members."""

    member: bool
    reason: str = ""
    individual: int | None = None
    sarp: SarpResult | None = None


def cn_check(instance: CnInstance, tol: float = MEMBERSHIP_TOL) -> CnCheck:
    """Membership test that also reports which constraint group failed.

    Raises:
        DimensionMismatch: If the candidate shape is not ``(n, H, L)``.
    """
    P, W, D = economy_arrays(instance.dataset)
    n = len(instance.dataset)
    X = instance.candidate
    if n == 0:
        if X.size:
            raise DimensionMismatch("candidate given for an empty dataset")
        return CnCheck(True)
    H, L = W.shape[1], P.shape[1]
    if X.shape != (n, H, L):
        raise DimensionMismatch(f"candidate has shape {X.shape}, expected {(n, H, L)}")
    if np.any(X < -tol):
        return CnCheck(False, "negative consumption")
    scale = np.maximum(1.0, np.abs(D))
    if np.any(np.abs(X.sum(axis=1) - D) > tol * scale):
        return CnCheck(False, "allocations do not add up to aggregate demand")
    spend = np.einsum("kl,khl->kh", P, X)
    if np.any(np.abs(spend - W) > tol * np.maximum(1.0, W)):
        return CnCheck(False, "budget identity violated")
    for h in range(H):
        result = check_sarp_arrays(P / W[:, h : h + 1], X[:, h, :])
        if not result.holds:
            return CnCheck(False, "revealed preference cycle", h, result)
    return CnCheck(True)


def cn_membership(instance: CnInstance, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether the candidate adds up, exhausts every budget and satisfies SARP per individual."""
    return cn_check(instance, tol).member


# ------------------------------------------------------------ split network


def _require_2x2(P: NDArray[np.float64], W: NDArray[np.float64]) -> None:
    if P.shape[1] != 2 or W.shape[1] != 2:
        raise UnsupportedDimensions("exhaustive allocation search needs two goods and two individuals")


class SplitSolution:
    """Implication graph of a satisfiable network plus optional extra unit literals."""

    def __init__(self, network: SplitNetwork, graph: csr_matrix, labels: NDArray[np.int64]):
        self.network = network
        self.graph = graph
        self.labels = labels
        self._hulls: NDArray[np.float64] | None = None

    def _reaches(self, source: int, target: int) -> bool:
        order = breadth_first_order(self.graph, source, directed=True, return_predecessors=False)
        return bool(np.any(order == target))

    def consistent(self, literal: int) -> bool:
        """Whether the literal can be true in some model."""
        return not self._reaches(literal, literal ^ 1)

    def _search(self, lits: NDArray[np.int64], want_first_true: bool) -> int:
        # first index where consistent(lits[i]) flips, assuming monotonicity
        lo, hi = 0, len(lits) - 1
        if want_first_true:
            while lo < hi:
                mid = (lo + hi) // 2
                if self.consistent(int(lits[mid])):
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.consistent(int(lits[mid])):
                lo = mid
            else:
                hi = mid - 1
        return lo

    def hull(self, k: int) -> tuple[float, float]:
        """Smallest interval containing every consistent value of ``s_k``."""
        net = self.network
        a, b = net.atom_slice(k)
        theta = net.theta[a:b]
        atoms = np.arange(a, b)
        # s_k < theta_i is possible from some index on
        i_lo = self._search(2 * atoms + 1, want_first_true=True)
        # s_k >= theta_i is possible up to some index
        i_hi = self._search(2 * atoms, want_first_true=False)
        lo = theta[max(i_lo - 1, 0)]
        hi = theta[min(i_hi + 1, len(theta) - 1)]
        lo, hi = max(lo, net.lo[k]), min(hi, net.hi[k])
        return float(lo), float(max(hi, lo))

    def hulls(self) -> NDArray[np.float64]:
        """Array of shape ``(n, 2)`` with :meth:`hull` for every observation."""
        if self._hulls is None:
            self._hulls = np.array([self.hull(k) for k in range(self.network.n)]).reshape(-1, 2)
        return self._hulls

    def projection(self, k: int) -> list[tuple[float, float]]:
        """Consistent values of ``s_k`` as a sorted list of disjoint closed intervals."""
        net = self.network
        a, b = net.atom_slice(k)
        theta = net.theta[a:b]
        lo_h, hi_h = self.hull(k)
        pieces: list[tuple[float, float]] = []
        for i in range(b - a - 1):
            left, right = theta[i], theta[i + 1]
            if right < lo_h or left > hi_h:
                continue
            pos, neg = 2 * (a + i), 2 * (a + i + 1) + 1
            reached = breadth_first_order(self.graph, pos, directed=True, return_predecessors=False)
            if np.any((reached == pos ^ 1) | (reached == neg ^ 1)) or self._reaches(neg, neg ^ 1):
                continue
            left, right = max(left, net.lo[k]), min(right, net.hi[k])
            if pieces and left <= pieces[-1][1]:
                pieces[-1] = (pieces[-1][0], max(pieces[-1][1], right))
            else:
                pieces.append((float(left), float(max(right, left))))
        return pieces

    def model(self) -> NDArray[np.float64]:
        """A consistent value of ``s`` for every observation.

        Each value sits midway between the thresholds that bracket it, which
        keeps it away from every constraint boundary.
        """
        net = self.network
        truth = self._assignment()
        s = np.empty(net.n)
        for k in range(net.n):
            a, b = net.atom_slice(k)
            pos_true = truth[2 * np.arange(a, b)]
            count = int(pos_true.sum())
            theta = net.theta[a:b]
            left = theta[count - 1] if count else net.lo[k]
            right = theta[count] if count < len(theta) else net.hi[k]
            s[k] = min(max(0.5 * (left + right), net.lo[k]), net.hi[k])
        return s

    def _assignment(self) -> NDArray[np.bool_]:
        labels = self.labels
        truth = labels[0::2] < labels[1::2]
        lits = np.empty(labels.size, dtype=bool)
        lits[0::2], lits[1::2] = truth, ~truth
        coo = self.graph.tocoo()
        if np.any(lits[coo.row] & ~lits[coo.col]):
            lits = self._assignment_by_topology(coo)
        return lits

    def _assignment_by_topology(self, coo) -> NDArray[np.bool_]:
        labels = self.labels
        n_comp = labels.max() + 1
        src, dst = labels[coo.row], labels[coo.col]
        keep = src != dst
        dag = csr_matrix((np.ones(keep.sum()), (src[keep], dst[keep])), shape=(n_comp, n_comp))
        indeg = np.asarray((dag > 0).sum(axis=0)).ravel()
        order = np.empty(n_comp, dtype=np.int64)
        stack = list(np.flatnonzero(indeg == 0))
        pos = 0
        indptr, indices = dag.indptr, dag.indices
        while stack:
            c = stack.pop()
            order[c] = pos
            pos += 1
            for d in np.unique(indices[indptr[c] : indptr[c + 1]]):
                indeg[d] -= 1
                if indeg[d] == 0:
                    stack.append(d)
        rank = order[labels]
        truth = rank[0::2] > rank[1::2]
        lits = np.empty(labels.size, dtype=bool)
        lits[0::2], lits[1::2] = truth, ~truth
        return lits


class SplitNetwork:
    """All allocation splits of a two-good, two-person dataset that avoid 2-cycles.

    Atoms are conditions ``s_k >= theta`` for finitely many thresholds per
    observation; literal ``2a`` is atom ``a`` and ``2a + 1`` its negation.
    Each pair of observations contributes, per individual, the clause that
    the two cannot be weakly revealed over one another. Violation regions are
    shrunk by ``tau`` and upper-bound literals are shifted by ``eta`` so the
    network never removes a split the exact constraints allow.

    A negative ``tau`` enlarges the violation regions instead, which gives an
    inner approximation whose models are members with room to spare.

    Args:
        dataset: Economy observations with ``L = H = 2``.
        tau: Margin by which each violation region is shrunk.
        eta: Offset turning ``s <= theta`` into the atom negation ``s < theta + eta``.
        lower: Optional extra lower bounds on ``s``, one per observation.
        upper: Optional extra upper bounds on ``s``.
    """

    def __init__(
        self,
        dataset: Sequence[EconomyObservation],
        tau: float = 1e-9,
        eta: float = 1e-12,
        lower: ArrayLike | None = None,
        upper: ArrayLike | None = None,
    ):
        P, W, D = economy_arrays(dataset)
        self.n = n = len(dataset)
        if n == 0:
            raise ValueError("split network needs at least one observation")
        _require_2x2(P, W)
        self.dataset = list(dataset)
        self.P, self.W, self.D = P, W, D
        self.tau, self.eta = tau, eta
        p1, p2 = P[:, 0], P[:, 1]
        w1 = W[:, 0]
        self.lo = np.maximum(0.0, (w1 - p2 * D[:, 1]) / p1)
        self.hi = np.minimum(D[:, 0], w1 / p1)
        self.hi = np.maximum(self.hi, self.lo)
        if lower is not None:
            self.lo = np.maximum(self.lo, np.asarray(lower, dtype=float))
        if upper is not None:
            self.hi = np.minimum(self.hi, np.asarray(upper, dtype=float))
        self.domain_empty = bool(np.any(self.lo > self.hi))
        # individual 0 bundle at observation k: a0[k] + b0[k] * s
        self.a0 = np.stack([np.zeros(n), w1 / p2], axis=1)
        self.b0 = np.stack([np.ones(n), -p1 / p2], axis=1)
        self.Q = np.stack([P / W[:, [0]], P / W[:, [1]]])  # (H, n, L)
        self._build()
        self._solution: SplitSolution | None | bool = False
        self.memo: dict = {}

    def restricted(self, k: int, lower: float | None = None, upper: float | None = None) -> SplitNetwork:
        """Copy of the network with ``s_k`` further confined to ``[lower, upper]``."""
        lo, hi = self.lo.copy(), self.hi.copy()
        if lower is not None:
            lo[k] = max(lo[k], lower)
        if upper is not None:
            hi[k] = min(hi[k], upper)
        return SplitNetwork(self.dataset, self.tau, self.eta, lo, hi)

    # bundle of individual h at observation k for split values s
    def bundles(self, h: int, s: ArrayLike, k: ArrayLike | None = None) -> NDArray[np.float64]:
        s = np.asarray(s, dtype=float)
        idx = np.arange(self.n) if k is None else np.asarray(k)
        x0 = self.a0[idx] + self.b0[idx] * s[..., None]
        return x0 if h == 0 else self.D[idx] - x0

    def candidate(self, s: ArrayLike) -> NDArray[np.float64]:
        """Allocation array ``(n, 2, 2)`` for split values ``s``."""
        x0 = self.bundles(0, s)
        return np.stack([x0, self.D - x0], axis=1)

    def atom_slice(self, k: int) -> tuple[int, int]:
        return int(self.offsets[k]), int(self.offsets[k + 1])

    def _literals(self, var, c, d):
        """Literal for ``c * s_var >= d - tau`` as (kind, theta); kind 1 pos, -1 neg, 2 true, 0 false."""
        rhs = d - self.tau
        tiny = np.abs(c) < 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            theta = np.where(tiny, 0.0, rhs / np.where(tiny, 1.0, c))
        kind = np.where(c > 0, 1, -1)
        theta = np.where(kind < 0, theta + self.eta * np.maximum(1.0, np.abs(theta)), theta)
        kind = np.where(tiny, np.where(0.0 >= rhs, 2, 0), kind)
        return var, kind, theta

    def _build(self) -> None:
        n = self.n
        jj, kk = np.triu_indices(n, 1)
        lit_a, lit_b = [], []
        for h in range(2):
            Q = self.Q[h]
            if h == 0:
                A, B = self.a0, self.b0
            else:
                A, B = self.D - self.a0, -self.b0
            # weak(j -> k): Q_j . (A_k + B_k s_k) <= 1, i.e. c s_k <= d
            C = Q @ B.T
            Dm = 1.0 - Q @ A.T
            lit_a.append(self._literals(kk, C[jj, kk], Dm[jj, kk]))
            lit_b.append(self._literals(jj, C[kk, jj], Dm[kk, jj]))
        var_a = np.concatenate([v for v, _, _ in lit_a] + [v for v, _, _ in lit_b])
        kind_a = np.concatenate([t for _, t, _ in lit_a])
        kind_b = np.concatenate([t for _, t, _ in lit_b])
        theta_a = np.concatenate([x for _, _, x in lit_a])
        theta_b = np.concatenate([x for _, _, x in lit_b])
        va = np.concatenate([v for v, _, _ in lit_a])
        vb = np.concatenate([v for v, _, _ in lit_b])

        self.empty = bool(np.any((kind_a == 0) & (kind_b == 0)))
        live = (kind_a != 2) & (kind_b != 2)
        va, vb, kind_a, kind_b, theta_a, theta_b = (
            arr[live] for arr in (va, vb, kind_a, kind_b, theta_a, theta_b)
        )

        dom_lo = self.lo
        dom_hi = self.hi + self.eta * np.maximum(1.0, np.abs(self.hi))
        all_var = np.concatenate([va, vb, np.arange(n), np.arange(n)])
        all_theta = np.concatenate([theta_a, theta_b, dom_lo, dom_hi])
        useful = np.concatenate([kind_a != 0, kind_b != 0, np.ones(2 * n, bool)])
        all_var, all_theta = all_var[useful], all_theta[useful]
        order = np.lexsort((all_theta, all_var))
        sv, st = all_var[order], all_theta[order]
        first = np.ones(sv.size, dtype=bool)
        first[1:] = (sv[1:] != sv[:-1]) | (st[1:] != st[:-1])
        self.var = sv[first]
        self.theta = st[first]
        self.offsets = np.searchsorted(self.var, np.arange(n + 1))

        def atom(var, theta):
            a, b = self.offsets[var], self.offsets[var + 1]
            idx = np.empty(var.size, dtype=np.int64)
            for v in np.unique(var):
                sel = var == v
                idx[sel] = a[sel][0] + np.searchsorted(self.theta[a[sel][0] : b[sel][0]], theta[sel])
            return idx

        def lit(kind, var, theta):
            out = np.full(var.size, -1, dtype=np.int64)
            ok = kind != 0
            if ok.any():
                out[ok] = 2 * atom(var[ok], theta[ok]) + (kind[ok] < 0)
            return out

        la = lit(kind_a, va, theta_a)
        lb = lit(kind_b, vb, theta_b)
        src, dst = [], []
        both = (la >= 0) & (lb >= 0)
        src += [la[both] ^ 1, lb[both] ^ 1]
        dst += [lb[both], la[both]]
        units = np.concatenate([la[(la >= 0) & (lb < 0)], lb[(lb >= 0) & (la < 0)]])
        lo_atoms = atom(np.arange(n), dom_lo)
        hi_atoms = atom(np.arange(n), dom_hi)
        units = np.concatenate([units, 2 * lo_atoms, 2 * hi_atoms + 1])
        src.append(units ^ 1)
        dst.append(units)
        # ordering: s >= theta_{i+1} implies s >= theta_i
        same = self.var[1:] == self.var[:-1]
        upper = np.flatnonzero(same) + 1
        src += [2 * upper, 2 * (upper - 1) + 1]
        dst += [2 * (upper - 1), 2 * upper + 1]
        self.src = np.concatenate(src).astype(np.int64)
        self.dst = np.concatenate(dst).astype(np.int64)
        self.n_literals = 2 * self.theta.size

    def solve(self) -> SplitSolution | None:
        """Implication graph of the network, or ``None`` if no split is consistent."""
        if self._solution is not False:
            return self._solution  # type: ignore[return-value]
        sol = None
        if not (self.empty or self.domain_empty):
            graph = csr_matrix(
                (np.ones(self.src.size, dtype=np.int8), (self.src, self.dst)),
                shape=(self.n_literals, self.n_literals),
            )
            _, labels = connected_components(graph, directed=True, connection="strong")
            if not np.any(labels[0::2] == labels[1::2]):
                sol = SplitSolution(self, graph, labels)
        self._solution = sol
        return sol


_CACHE: OrderedDict[str, SplitNetwork] = OrderedDict()
_CACHE_SIZE = 16


def _digest(dataset: Sequence[EconomyObservation]) -> str:
    P, W, D = economy_arrays(dataset)
    h = hashlib.sha256()
    for arr in (P, W, D):
        h.update(np.ascontiguousarray(arr).tobytes())
        h.update(str(arr.shape).encode())
    return h.hexdigest()


INNER_TAU = -1e-7


def split_network(dataset: Sequence[EconomyObservation], tau: float = 1e-9) -> SplitNetwork:
    """Cached :class:`SplitNetwork` for a dataset (keyed by its content and ``tau``)."""
    key = f"{_digest(dataset)}:{tau!r}"
    net = _CACHE.get(key)
    if net is None:
        net = SplitNetwork(dataset, tau=tau)
        _CACHE[key] = net
        if len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(key)
    return net


def cnk_projection_bounds(dataset: Sequence[EconomyObservation], k: int, h: int, depth: int) -> Region:
    """Box cover of individual ``h``'s possible consumption at observation ``k``.

    The exact set of consistent splits is a union of intervals of ``s_k``;
    bisection over the feasible segment classifies each piece against it and
    maps it to a bounding box of the corresponding bundles.

    Raises:
        UnsupportedDimensions: Unless there are exactly two goods and two individuals.
    """
    P, W, _ = economy_arrays(dataset)
    if not dataset:
        raise IndexError("dataset is empty")
    _require_2x2(P, W)
    if not 0 <= k < len(dataset) or h not in (0, 1):
        raise IndexError("observation or individual out of range")
    net = split_network(dataset)
    sol = net.solve()
    pieces = [] if sol is None else sol.projection(k)

    def classify(box: Box) -> Classification:
        a, b = box.lo[0], box.hi[0]
        for left, right in pieces:
            if left <= a and b <= right:
                return Classification.ALL_IN
        if any(left <= b and a <= right for left, right in pieces):
            return Classification.SPLIT
        return Classification.ALL_OUT

    cover = branch_and_bound_cover(Box([net.lo[k]], [net.hi[k]]), classify, depth)
    boxes = []
    for box in cover.boxes:
        ends = net.bundles(h, np.array([box.lo[0], box.hi[0]]), np.array([k, k]))
        boxes.append(Box(ends.min(axis=0), ends.max(axis=0)))
    return Region(tuple(boxes), cover.status)
