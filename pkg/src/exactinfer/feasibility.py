"""Linear feasibility, exact Fourier-Motzkin projection and box covers."""

from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linprog

from .errors import NumericalFailure

TOL_STRICT = 1e-9
_AUDIT_TOL = 1e-9

Constraint = tuple[tuple[Any, ...], Any]


def _row(a: Sequence[Any], dim: int) -> tuple[Any, ...]:
    row = tuple(a)
    if len(row) != dim:
        raise ValueError(f"coefficient vector has length {len(row)}, expected {dim}")
    return row


@dataclass(frozen=True)
class LinearSystem:
    """Conjunction of strict, weak and equality constraints on ``z`` in R^dimension.

    Coefficients may be floats or :class:`fractions.Fraction` values; exact
    arithmetic is preserved by :func:`fourier_motzkin_eliminate`.
    """

    dimension: int
    strict: tuple[Constraint, ...] = ()
    weak: tuple[Constraint, ...] = ()
    equalities: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        if self.dimension < 0:
            raise ValueError("dimension must be nonnegative")
        for name in ("strict", "weak", "equalities"):
            rows = tuple((_row(a, self.dimension), b) for a, b in getattr(self, name))
            for a, b in rows:
                if not all(math.isfinite(float(v)) for v in a + (b,)):
                    raise ValueError("constraint entries must be finite")
            object.__setattr__(self, name, rows)

    def with_constraints(
        self,
        strict: Sequence[Constraint] = (),
        weak: Sequence[Constraint] = (),
        equalities: Sequence[Constraint] = (),
    ) -> LinearSystem:
        return LinearSystem(
            self.dimension,
            self.strict + tuple(strict),
            self.weak + tuple(weak),
            self.equalities + tuple(equalities),
        )

    def satisfied_by(self, z: ArrayLike, tol: float = 0.0) -> bool:
        """Check a point, allowing slack ``tol * max(1, |b|)`` on weak and equality rows."""
        z = np.asarray(z, dtype=float)
        for a, b in self.strict:
            lhs, b = float(np.dot(np.asarray(a, float), z)), float(b)
            if not lhs < b:
                return False
        for a, b in self.weak:
            lhs, b = float(np.dot(np.asarray(a, float), z)), float(b)
            if lhs > b + tol * max(1.0, abs(b)):
                return False
        for a, b in self.equalities:
            lhs, b = float(np.dot(np.asarray(a, float), z)), float(b)
            if abs(lhs - b) > tol * max(1.0, abs(b)):
                return False
        return True

    def to_dict(self) -> dict[str, Any]:
        def rows(cs: tuple[Constraint, ...]) -> list[dict[str, Any]]:
            return [{"a": [float(v) for v in a], "b": float(b)} for a, b in cs]

        return {
            "dimension": self.dimension,
            "strict": rows(self.strict),
            "weak": rows(self.weak),
            "equalities": rows(self.equalities),
        }


class LPStatus(enum.Enum):
    INFEASIBLE = "infeasible"
    FEASIBLE = "feasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LPResult:
    status: LPStatus
    point: NDArray[np.float64] | None = None
    value: float | None = None


def lp_solve(
    system: LinearSystem,
    objective: ArrayLike | None = None,
    *,
    eps: float = TOL_STRICT,
) -> LPResult:
    """Decide feasibility of ``system`` or maximize ``objective`` over it.

    Strict rows ``a.z < b`` are tightened to ``a.z <= b - eps * max(1, |b|)``.
    Every returned point is audited against the original system.

    Args:
        system: Constraints, dimension at least one.
        objective: Coefficients to maximize; ``None`` asks for feasibility only.
        eps: Tightening applied to strict rows.

    Returns:
        ``LPResult`` with status ``INFEASIBLE``, ``FEASIBLE`` (point only),
        ``OPTIMAL`` (point and value) or ``UNBOUNDED``.

    Raises:
        NumericalFailure: If the solver reports an error or its point fails the audit.
    """
    d = system.dimension
    if d < 1:
        raise ValueError("lp_solve needs dimension >= 1")
    ub_rows = [np.asarray(a, float) for a, _ in system.weak] + [np.asarray(a, float) for a, _ in system.strict]
    ub_rhs = [float(b) for _, b in system.weak] + [float(b) - eps * max(1.0, abs(float(b))) for _, b in system.strict]
    eq_rows = [np.asarray(a, float) for a, _ in system.equalities]
    eq_rhs = [float(b) for _, b in system.equalities]
    c = np.zeros(d) if objective is None else -np.asarray(objective, dtype=float)
    if c.shape != (d,):
        raise ValueError("objective has the wrong length")
    res = linprog(
        c,
        A_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rows else None,
        A_eq=np.array(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rows else None,
        bounds=[(None, None)] * d,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return LPResult(LPStatus.INFEASIBLE)
    if res.status == 3:
        if objective is None:
            raise NumericalFailure("feasibility problem reported unbounded")
        return LPResult(LPStatus.UNBOUNDED)
    if res.status != 0 or res.x is None:
        raise NumericalFailure(f"linear solver failed: {res.message}")
    point = np.asarray(res.x, dtype=float)
    if not system.satisfied_by(point, tol=_AUDIT_TOL):
        raise NumericalFailure("returned point fails the constraint audit")
    if objective is None:
        return LPResult(LPStatus.FEASIBLE, point)
    return LPResult(LPStatus.OPTIMAL, point, float(np.dot(objective, point)))


# ------------------------------------------------------- Fourier-Motzkin


def _exact(v: Any) -> Any:
    # integers become Fractions so that normalization stays exact
    return Fraction(v) if isinstance(v, (int, np.integer)) else v


def _normalize(a: tuple[Any, ...], b: Any) -> tuple[tuple[Any, ...], Any]:
    scale = max((abs(v) for v in a), default=0)
    if scale == 0:
        return a, b
    return tuple(v / scale for v in a), b / scale


def _prune(rows: list[tuple[tuple[Any, ...], Any, bool]]) -> list[tuple[tuple[Any, ...], Any, bool]]:
    """Drop rows implied by a single other row with the same direction."""
    best: dict[tuple[Any, ...], tuple[Any, bool]] = {}
    order: list[tuple[Any, ...]] = []
    for a, b, strict in rows:
        key = a
        if key not in best:
            best[key] = (b, strict)
            order.append(key)
            continue
        b0, s0 = best[key]
        if b < b0 or (b == b0 and strict and not s0):
            best[key] = (b, strict)
    return [(k, best[k][0], best[k][1]) for k in order]


def fourier_motzkin_eliminate(system: LinearSystem, var_index: int) -> LinearSystem:
    """Project out variable ``var_index`` exactly.

    Equalities are split into two weak inequalities. A combined row is strict
    when either parent is strict. Constant rows that always hold are dropped;
    contradictory ones are kept as ``0 < b`` or ``0 <= b`` so the result stays
    infeasible.

    Args:
        system: System in ``dimension`` variables.
        var_index: Index of the variable to eliminate.

    Returns:
        An equivalent system in ``dimension - 1`` variables (remaining
        variables keep their relative order).
    """
    d = system.dimension
    if not 0 <= var_index < d:
        raise IndexError("var_index out of range")
    rows: list[tuple[tuple[Any, ...], Any, bool]] = []
    rows += [(a, b, True) for a, b in system.strict]
    rows += [(a, b, False) for a, b in system.weak]
    for a, b in system.equalities:
        rows.append((a, b, False))
        rows.append((tuple(-v for v in a), -b, False))
    rows = [(tuple(_exact(v) for v in a), _exact(b), s) for a, b, s in rows]

    upper, lower, rest = [], [], []
    for a, b, s in rows:
        c = a[var_index]
        if c > 0:
            upper.append((a, b, s))
        elif c < 0:
            lower.append((a, b, s))
        else:
            rest.append((a, b, s))

    combined = list(rest)
    for (au, bu, su), (al, bl, sl) in itertools.product(upper, lower):
        cu, cl = au[var_index], -al[var_index]
        a = tuple(cl * u + cu * l for u, l in zip(au, al))
        combined.append((a, cl * bu + cu * bl, su or sl))

    out = []
    for a, b, s in combined:
        a = a[:var_index] + a[var_index + 1 :]
        if all(v == 0 for v in a):
            if (0 < b) if s else (0 <= b):
                continue
        a, b = _normalize(a, b)
        out.append((a, b, s))
    out = _prune(out)
    return LinearSystem(
        d - 1,
        strict=tuple((a, b) for a, b, s in out if s),
        weak=tuple((a, b) for a, b, s in out if not s),
    )


# ------------------------------------------------------------ box covers


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``[lo, hi]``."""

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self) -> None:
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi differ in length")
        if np.any(lo > hi):
            raise ValueError("box has lo > hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> NDArray[np.float64]:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def center(self) -> NDArray[np.float64]:
        return (self.lo + self.hi) / 2

    def contains(self, z: ArrayLike, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lo - tol) and np.all(z <= self.hi + tol))

    def bisect(self, axis: int) -> tuple[Box, Box]:
        mid = 0.5 * (self.lo[axis] + self.hi[axis])
        left_hi = self.hi.copy()
        left_hi[axis] = mid
        right_lo = self.lo.copy()
        right_lo[axis] = mid
        return Box(self.lo, left_hi), Box(right_lo, self.hi)

    def to_dict(self) -> dict[str, Any]:
        return {"lo": [float(v) for v in self.lo], "hi": [float(v) for v in self.hi]}


class BoxStatus(enum.Enum):
    UNDOMINATED = "undominated"
    DOMINATED = "dominated"
    UNRESOLVED = "unresolved"


class Classification(enum.Enum):
    ALL_IN = "all_in"
    ALL_OUT = "all_out"
    SPLIT = "split"


_STATUS_OF = {
    Classification.ALL_IN: BoxStatus.UNDOMINATED,
    Classification.ALL_OUT: BoxStatus.DOMINATED,
    Classification.SPLIT: BoxStatus.UNRESOLVED,
}


@dataclass(frozen=True, eq=False)
class Region:
    """A finite box cover with one status per box.

    Boxes never overlap except along faces. The union of the ``UNDOMINATED``
    and ``UNRESOLVED`` boxes contains the target set.
    """

    boxes: tuple[Box, ...] = ()
    status: tuple[BoxStatus, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "status", tuple(BoxStatus(s) for s in self.status))
        if len(self.boxes) != len(self.status):
            raise ValueError("one status per box is required")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self.boxes == other.boxes and self.status == other.status

    def candidates(self) -> list[Box]:
        """Boxes that may contain target points."""
        return [b for b, s in zip(self.boxes, self.status) if s is not BoxStatus.DOMINATED]

    def is_empty(self) -> bool:
        return not self.candidates()

    def diameter(self) -> float:
        """Largest distance between two points of the candidate boxes."""
        cand = self.candidates()
        if not cand:
            return 0.0
        lo = np.stack([b.lo for b in cand])
        hi = np.stack([b.hi for b in cand])
        best = 0.0
        # max over pairs of the farthest-corner distance, row by row to bound memory
        for i in range(len(cand)):
            span = np.maximum(np.abs(hi[i] - lo), np.abs(hi - lo[i]))
            best = max(best, float(np.sqrt((span**2).sum(axis=1)).max()))
        return best

    def hull(self) -> Box | None:
        cand = self.candidates()
        if not cand:
            return None
        return Box(np.min([b.lo for b in cand], axis=0), np.max([b.hi for b in cand], axis=0))

    def contains(self, z: ArrayLike, tol: float = 1e-9) -> bool:
        """Whether ``z`` lies in some candidate box (closed, with slack ``tol``)."""
        return any(b.contains(z, tol) for b in self.candidates())

    def total_volume(self, status: BoxStatus) -> float:
        return float(sum(b.volume for b, s in zip(self.boxes, self.status) if s is status))

    def to_dict(self) -> list[dict[str, Any]]:
        return [dict(b.to_dict(), status=s.value) for b, s in zip(self.boxes, self.status)]

    @classmethod
    def from_dict(cls, data: Sequence[dict[str, Any]]) -> Region:
        return cls(
            tuple(Box(d["lo"], d["hi"]) for d in data),
            tuple(BoxStatus(d["status"]) for d in data),
        )


def branch_and_bound_cover(
    initial: Box,
    classify: Callable[[Box], Classification],
    max_depth: int,
) -> Region:
    """Cover the target of a conservative ``classify`` by recursive bisection.

    Each ``SPLIT`` box is halved along its relatively widest axis (ties go to
    the lowest index) until ``max_depth`` halvings have been applied on its
    path; boxes still split at that depth are reported ``UNRESOLVED``. Output
    order is depth-first, lower half first, so it is deterministic.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    scale = np.where(initial.widths > 0, initial.widths, 1.0)
    boxes: list[Box] = []
    status: list[BoxStatus] = []
    stack: deque[tuple[Box, int]] = deque([(initial, 0)])
    while stack:
        box, depth = stack.pop()
        verdict = Classification(classify(box))
        if verdict is Classification.SPLIT and depth < max_depth:
            axis = int(np.argmax(box.widths / scale))
            left, right = box.bisect(axis)
            stack.append((right, depth + 1))
            stack.append((left, depth + 1))
            continue
        boxes.append(box)
        status.append(_STATUS_OF[verdict])
    return Region(tuple(boxes), tuple(status))
