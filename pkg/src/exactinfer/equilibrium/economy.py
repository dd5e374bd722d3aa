"""Pure-exchange economies: aggregate demand, excess demand, equilibrium prices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import NoConvergence
from ..prefs import PreferenceSpec, demand
from ..sequences import SequenceConfig, _as_box, _scale, unit_samples

DEFAULT_INCOME_BOUNDS = (0.5, 2.0)


@dataclass(frozen=True, eq=False)
class Economy:
    """``H >= 2`` consumers with preferences, endowments and an income box.

    Endowments must be nonnegative with positive total per individual, so
    every individual has positive income at strictly positive prices.

    Attributes:
        specs: One preference per individual, all over the same goods.
        endowments: Array of shape ``(H, L)``.
        income_box: ``(lo, hi)`` income bounds per individual.
    """

    specs: tuple[PreferenceSpec, ...]
    endowments: NDArray[np.float64]
    income_box: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        specs = tuple(self.specs)
        if len(specs) < 2:
            raise ValueError("an economy needs at least two individuals")
        L = specs[0].n_goods
        if any(s.n_goods != L for s in specs):
            raise ValueError("all individuals must have the same number of goods")
        e = np.array(self.endowments, dtype=float)
        if e.shape != (len(specs), L):
            raise ValueError(f"endowments must have shape ({len(specs)}, {L})")
        if not np.all(np.isfinite(e)) or np.any(e < 0) or np.any(e.sum(axis=1) <= 0):
            raise ValueError("endowments must be nonnegative with a positive entry per individual")
        e.setflags(write=False)
        box = self.income_box or (DEFAULT_INCOME_BOUNDS,) * len(specs)
        box = _as_box(box, "income_box", strict=False)
        if len(box) != len(specs):
            raise ValueError("income_box needs one entry per individual")
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "endowments", e)
        object.__setattr__(self, "income_box", box)

    @property
    def n_goods(self) -> int:
        return self.specs[0].n_goods

    @property
    def n_agents(self) -> int:
        return len(self.specs)

    @property
    def total_endowment(self) -> NDArray[np.float64]:
        return self.endowments.sum(axis=0)

    def aggregate_demand(self, p: ArrayLike, w: ArrayLike) -> NDArray[np.float64]:
        return aggregate_demand(self, p, w)

    def excess_demand(self, p: ArrayLike) -> NDArray[np.float64]:
        return excess_demand(self, p)

    def individual_demands(self, p: ArrayLike, w: ArrayLike) -> NDArray[np.float64]:
        """Array of shape ``(H, L)`` with each individual's demand."""
        w = np.asarray(w, dtype=float)
        if w.shape != (self.n_agents,) or np.any(w <= 0):
            raise ValueError("need one positive income per individual")
        return np.stack([demand(s, p, wh) for s, wh in zip(self.specs, w)])

    def to_dict(self) -> dict[str, Any]:
        return {
            "specs": [s.to_dict() for s in self.specs],
            "endowments": self.endowments.tolist(),
            "income_box": [list(b) for b in self.income_box],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Economy:
        return cls(
            tuple(PreferenceSpec.from_dict(s) for s in data["specs"]),
            np.asarray(data["endowments"], dtype=float),
            tuple(tuple(b) for b in data.get("income_box", ())),
        )


def aggregate_demand(economy: Economy, p: ArrayLike, w: ArrayLike) -> NDArray[np.float64]:
    """Sum of individual demands at common prices ``p`` and incomes ``w``."""
    return economy.individual_demands(p, w).sum(axis=0)


def excess_demand(economy: Economy, p: ArrayLike) -> NDArray[np.float64]:
    """Aggregate demand at incomes ``p . e^h`` minus the aggregate endowment."""
    p = np.asarray(p, dtype=float)
    return aggregate_demand(economy, p, economy.endowments @ p) - economy.total_endowment


def _project_simplex(v: NDArray[np.float64], floor: float = 1e-12) -> NDArray[np.float64]:
    # Euclidean projection onto the simplex, kept strictly inside
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / idx > 0)[-1]
    out = np.maximum(v - css[rho] / (rho + 1), floor)
    return out / out.sum()


def solve_equilibrium(
    economy: Economy,
    tol: float = 1e-12,
    max_iter: int = 200,
    p0: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """Find simplex prices with ``||excess_demand|| <= tol``.

    Damped Newton steps on the first ``L - 1`` excess demands in simplex
    coordinates (Walras law pins the last one). A step is halved up to 40
    times until the residual falls; if it never does, one damped
    tatonnement step ``p <- proj(p + 0.1 Z(p))`` is taken instead.

    Raises:
        NoConvergence: After ``max_iter`` iterations; carries the best price and residual.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    L = economy.n_goods
    p = np.full(L, 1.0 / L) if p0 is None else _project_simplex(np.asarray(p0, dtype=float))

    def lift(q: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.append(q, 1.0 - q.sum())

    def residual(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return excess_demand(economy, p)

    z = residual(p)
    best, best_norm = p.copy(), float(np.linalg.norm(z))
    for _ in range(max_iter):
        norm = float(np.linalg.norm(z))
        if norm < best_norm:
            best, best_norm = p.copy(), norm
        if norm <= tol:
            return p
        q = p[:-1]
        J = np.empty((L - 1, L - 1))
        for j in range(L - 1):
            h = 1e-7 * max(1.0, abs(q[j]))
            h = min(h, 0.5 * min(q[j], 1.0 - q.sum()))
            qp, qm = q.copy(), q.copy()
            qp[j] += h
            qm[j] -= h
            J[:, j] = (residual(lift(qp))[:-1] - residual(lift(qm))[:-1]) / (2 * h)
        try:
            step = np.linalg.solve(J, -z[:-1])
        except np.linalg.LinAlgError:
            step = None
        moved = False
        if step is not None and np.all(np.isfinite(step)):
            t = 1.0
            for _ in range(41):
                cand = lift(q + t * step)
                if np.all(cand > 0):
                    zc = residual(cand)
                    if np.linalg.norm(zc) < norm:
                        p, z, moved = cand, zc, True
                        break
                t *= 0.5
        if not moved:
            p = _project_simplex(p + 0.1 * z)
            z = residual(p)
    norm = float(np.linalg.norm(z))
    if norm < best_norm:
        best, best_norm = p, norm
    if best_norm <= tol:
        return best
    raise NoConvergence(f"no equilibrium within {max_iter} iterations", best, best_norm)


def check_assumption1(
    economy_a: Economy,
    economy_b: Economy,
    config: SequenceConfig,
    n: int,
    threshold: float = 1e-6,
) -> tuple[NDArray[np.float64], NDArray[np.float64]] | None:
    """First sampled ``(p, w)`` at which the two aggregate demands differ.

    Samples are drawn like :func:`~exactinfer.sequences.gen_economy_dataset`
    draws them. Returns ``None`` if the demands agree within ``threshold``
    at all ``n`` samples.
    """
    L, H = economy_a.n_goods, economy_a.n_agents
    if (economy_b.n_goods, economy_b.n_agents) != (L, H):
        raise ValueError("economies must share goods and individuals")
    income_box = config.income_box or economy_a.income_box
    u = unit_samples(config, n, L + H)
    prices = _scale(u[:, :L], config.price_box)
    incomes = _scale(u[:, L:], _as_box(income_box, "income_box", strict=False))
    for p, w in zip(prices, incomes):
        gap = aggregate_demand(economy_a, p, w) - aggregate_demand(economy_b, p, w)
        if np.linalg.norm(gap) > threshold:
            return p, w
    return None
