"""Independent reference computations used as test oracles."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from exactinfer.feasibility import Box, Classification, LinearSystem, LPStatus, branch_and_bound_cover, lp_solve


def floyd_warshall(adj: np.ndarray) -> np.ndarray:
    """Reachability through paths of one or more edges."""
    reach = adj.copy().astype(bool)
    for k in range(reach.shape[0]):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def strict_edges_plain(P: np.ndarray, X: np.ndarray) -> np.ndarray:
    """i -> j when bundle j was strictly cheaper than bundle i at prices i."""
    own = np.einsum("il,il->i", P, X)
    cross = P @ X.T
    return cross < own[:, None] - 1e-9 * np.maximum(1.0, np.abs(own[:, None]))


def brute_force_sarp(P: np.ndarray, X: np.ndarray) -> bool:
    """SARP by enumerating ordered subsets, extended only along weak links.

    A violation is a sequence of distinct bundles, each weakly revealed over
    the next, whose last element is also weakly revealed over the first.
    """
    n = len(P)
    cost = P @ X.T
    own = np.diag(cost)
    weak = [[cost[i, j] <= own[i] for j in range(n)] for i in range(n)]
    distinct = [[not np.array_equal(X[i], X[j]) for j in range(n)] for i in range(n)]

    def extend(seq: list[int]) -> bool:
        last = seq[-1]
        if len(seq) >= 2 and weak[last][seq[0]] and distinct[last][seq[0]]:
            return True
        for j in range(n):
            if j in seq or not weak[last][j]:
                continue
            if not all(distinct[j][s] for s in seq):
                continue
            if extend(seq + [j]):
                return True
        return False

    return not any(extend([i]) for i in range(n))


def cd_equilibrium_2x2(alphas: np.ndarray, endowments: np.ndarray) -> np.ndarray:
    """Clearing price of good 0 from the Cobb-Douglas budget-share identity."""
    a = alphas[:, 0]
    e = endowments
    ratio = (a @ e[:, 1]) / (e[:, 0].sum() - a @ e[:, 0])
    p = np.array([ratio, 1.0])
    return p / p.sum()


def lift_exists(system: LinearSystem, point: tuple[Fraction, ...], var: int) -> bool:
    """Exact check that some value of ``var`` extends ``point`` to a solution."""
    lo, lo_strict, hi, hi_strict = None, False, None, False
    rows = [(a, b, True) for a, b in system.strict] + [(a, b, False) for a, b in system.weak]
    rows += [(a, b, False) for a, b in system.equalities] + [(tuple(-v for v in a), -b, False) for a, b in system.equalities]
    for a, b, strict in rows:
        rest = Fraction(b) - sum(Fraction(a[i]) * v for i, v in enumerate(_insert(point, var)) if i != var)
        c = Fraction(a[var])
        if c == 0:
            if rest < 0 or (strict and rest == 0):
                return False
            continue
        bound = rest / c
        if c > 0:
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_strict = bound, strict
        else:
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
    if lo is None or hi is None:
        return True
    return lo < hi or (lo == hi and not lo_strict and not hi_strict)


def _insert(point: tuple[Fraction, ...], var: int) -> tuple[Fraction, ...]:
    return point[:var] + (Fraction(0),) + point[var:]


def lp_vertex_max(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> float | None:
    """Maximize c.z over {A z <= b} by enumerating vertices; None when empty."""
    d = A.shape[1]
    best = None
    for rows in itertools.combinations(range(len(A)), d):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        z = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ z <= b + 1e-9):
            val = float(c @ z)
            best = val if best is None else max(best, val)
    return best


def projection_interval(system: LinearSystem) -> tuple[float, float] | None:
    """Closure of a one-variable solution set, or None when empty."""
    lo, hi = -np.inf, np.inf
    for a, b in list(system.strict) + list(system.weak):
        c = float(a[0])
        if c > 0:
            hi = min(hi, float(b) / c)
        elif c < 0:
            lo = max(lo, float(b) / c)
        elif float(b) < 0 or (float(b) == 0 and (a, b) in system.strict):
            return None
    return (lo, hi) if lo <= hi else None


def projection_cover(system: LinearSystem, keep: int, box: Box, depth: int):
    """Cover of a two-variable system's projection onto ``keep``, via lp_solve."""

    def with_range(lo: float, hi: float) -> LinearSystem:
        e = [0.0, 0.0]
        e[keep] = 1.0
        f = [0.0, 0.0]
        f[keep] = -1.0
        return system.with_constraints(weak=[(tuple(e), hi), (tuple(f), -lo)])

    def classify(b: Box) -> Classification:
        if lp_solve(with_range(b.lo[0], b.hi[0])).status is LPStatus.INFEASIBLE:
            return Classification.ALL_OUT
        ends = [lp_solve(with_range(v, v)).status is not LPStatus.INFEASIBLE for v in (b.lo[0], b.hi[0])]
        return Classification.ALL_IN if all(ends) else Classification.SPLIT

    return branch_and_bound_cover(box, classify, depth)


def hausdorff_1d(interval: tuple[float, float] | None, region) -> float:
    """Hausdorff distance between a closed interval and a region's candidate union."""
    cand = region.candidates()
    if interval is None or not cand:
        return 0.0 if interval is None and not cand else np.inf
    lo, hi = interval
    cover_lo = min(b.lo[0] for b in cand)
    cover_hi = max(b.hi[0] for b in cand)
    # both sets are unions of intervals; the cover is checked to be gap-free by the caller
    return max(abs(cover_lo - lo), abs(cover_hi - hi))
