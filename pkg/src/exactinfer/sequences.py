"""Seeded, prefix-stable observation sequences and dataset assembly."""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Iterable, Sequence, TextIO, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import qmc

from .errors import InvalidBox, MalformedDataset
from .prefs import PreferenceSpec, demand

if TYPE_CHECKING:
    from .equilibrium.economy import Economy

BUDGET_TOL = 1e-10
WALRAS_TOL = 1e-9


class Generator(enum.Enum):
    UNIFORM_RANDOM = "uniform_random"
    HALTON = "halton"


def _as_box(bounds: Iterable[Sequence[float]], name: str, strict: bool) -> tuple[tuple[float, float], ...]:
    box = []
    for i, pair in enumerate(bounds):
        try:
            lo, hi = (float(v) for v in pair)
        except (TypeError, ValueError) as exc:
            raise InvalidBox(f"{name}[{i}] must be a (lo, hi) pair") from exc
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0:
            raise InvalidBox(f"{name}[{i}] bounds must be positive and finite, got ({lo}, {hi})")
        if hi < lo or (strict and hi == lo):
            raise InvalidBox(f"{name}[{i}] is empty or reversed: ({lo}, {hi})")
        box.append((lo, hi))
    return tuple(box)


@dataclass(frozen=True)
class SequenceConfig:
    """Where and how observation points are drawn.

    Attributes:
        price_box: One ``(lo, hi)`` pair per good, ``0 < lo < hi``.
        income_box: One ``(lo, hi)`` pair per individual, ``0 < lo <= hi``.
            Empty for single-consumer demand data.
        seed: Seed for the random generator (ignored by Halton).
        generator: Sampling scheme.
    """

    price_box: tuple[tuple[float, float], ...]
    income_box: tuple[tuple[float, float], ...] = ()
    seed: int = 0
    generator: Generator = Generator.HALTON

    def __post_init__(self) -> None:
        object.__setattr__(self, "price_box", _as_box(self.price_box, "price_box", strict=True))
        object.__setattr__(self, "income_box", _as_box(self.income_box, "income_box", strict=False))
        if len(self.price_box) < 1:
            raise InvalidBox("price_box needs at least one coordinate")
        object.__setattr__(self, "generator", Generator(self.generator))
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def square(
        cls,
        n_goods: int,
        lo: float,
        hi: float,
        *,
        seed: int = 0,
        generator: Generator | str = Generator.HALTON,
        income_box: Sequence[Sequence[float]] = (),
    ) -> SequenceConfig:
        """The box ``[lo, hi]^n_goods``."""
        return cls(((lo, hi),) * n_goods, tuple(income_box), seed, Generator(generator))

    @property
    def n_goods(self) -> int:
        return len(self.price_box)

    def to_dict(self) -> dict[str, Any]:
        return {
            "generator": self.generator.value,
            "seed": self.seed,
            "price_box": [list(b) for b in self.price_box],
            "income_box": [list(b) for b in self.income_box],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SequenceConfig:
        return cls(
            price_box=tuple(tuple(b) for b in data["price_box"]),
            income_box=tuple(tuple(b) for b in data.get("income_box", ())),
            seed=int(data.get("seed", 0)),
            generator=Generator(data.get("generator", Generator.HALTON.value)),
        )


def unit_samples(config: SequenceConfig, n: int, dim: int) -> NDArray[np.float64]:
    """First ``n`` points of the configured sequence in ``[0, 1)^dim``.

    Halton points skip the origin, so the first two-dimensional points are
    ``(1/2, 1/3), (1/4, 2/3), (3/4, 1/9)``. Both schemes are prefix-stable.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.empty((0, dim))
    if config.generator is Generator.HALTON:
        engine = qmc.Halton(d=dim, scramble=False)
        engine.fast_forward(1)
        return engine.random(n)
    return np.random.default_rng(config.seed).random((n, dim))


def _scale(u: NDArray[np.float64], box: tuple[tuple[float, float], ...]) -> NDArray[np.float64]:
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return lo + u * (hi - lo)


def gen_prices(config: SequenceConfig, n: int) -> list[NDArray[np.float64]]:
    """The first ``n`` price vectors of the sequence, mapped into ``price_box``."""
    pts = _scale(unit_samples(config, n, config.n_goods), config.price_box)
    return [_frozen(row) for row in pts]


def _frozen(a: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DemandObservation:
    """Income-normalized price ``p`` and the bundle ``x`` chosen on ``{p.x <= 1}``."""

    k: int
    p: NDArray[np.float64]
    x: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _frozen(self.p))
        object.__setattr__(self, "x", _frozen(self.x))
        if self.p.shape != self.x.shape or self.p.ndim != 1:
            raise MalformedDataset(f"observation {self.k}: price and bundle shapes differ")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DemandObservation):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.p, other.p) and np.array_equal(self.x, other.x)


@dataclass(frozen=True, eq=False)
class EconomyObservation:
    """Prices ``p``, individual incomes ``w`` and aggregate demand ``D``."""

    k: int
    p: NDArray[np.float64]
    w: NDArray[np.float64]
    D: NDArray[np.float64]

    def __post_init__(self) -> None:
        for name in ("p", "w", "D"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.p.shape != self.D.shape or self.p.ndim != 1 or self.w.ndim != 1:
            raise MalformedDataset(f"observation {self.k}: inconsistent shapes")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EconomyObservation):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.D, other.D)
        )


def gen_demand_dataset(spec: PreferenceSpec, config: SequenceConfig, n: int) -> list[DemandObservation]:
    """Observations ``x_k = demand(spec, p_k, 1)`` at the first ``n`` prices."""
    if config.n_goods != spec.n_goods:
        raise ValueError("price_box dimension differs from the number of goods")
    return [DemandObservation(k, p, demand(spec, p, 1.0)) for k, p in enumerate(gen_prices(config, n))]


def gen_economy_dataset(economy: Economy, config: SequenceConfig, n: int) -> list[EconomyObservation]:
    """Aggregate demand observations at jointly sampled prices and incomes.

    Prices come from the first ``L`` coordinates of each sequence point and
    incomes from the remaining ``H``, so prices and incomes are dense jointly.
    """
    L, H = economy.n_goods, economy.n_agents
    if config.n_goods != L:
        raise ValueError("price_box dimension differs from the number of goods")
    income_box = config.income_box or economy.income_box
    if len(income_box) != H:
        raise InvalidBox(f"income_box needs {H} entries, got {len(income_box)}")
    income_box = _as_box(income_box, "income_box", strict=False)
    u = unit_samples(config, n, L + H)
    prices = _scale(u[:, :L], config.price_box)
    incomes = _scale(u[:, L:], income_box)
    return [
        EconomyObservation(k, prices[k], incomes[k], economy.aggregate_demand(prices[k], incomes[k]))
        for k in range(n)
    ]


def demand_arrays(dataset: Sequence[DemandObservation]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Stack a demand dataset into ``(P, X)`` arrays of shape ``(n, L)``."""
    if not dataset:
        return np.empty((0, 0)), np.empty((0, 0))
    return np.stack([o.p for o in dataset]), np.stack([o.x for o in dataset])


def economy_arrays(
    dataset: Sequence[EconomyObservation],
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Stack an economy dataset into ``(P, W, D)`` arrays."""
    if not dataset:
        return np.empty((0, 0)), np.empty((0, 0)), np.empty((0, 0))
    return np.stack([o.p for o in dataset]), np.stack([o.w for o in dataset]), np.stack([o.D for o in dataset])


def validate_demand_dataset(dataset: Sequence[DemandObservation], tol: float = BUDGET_TOL) -> None:
    """Raise :class:`MalformedDataset` unless every ``p_k . x_k`` equals one."""
    dims = {o.p.shape for o in dataset}
    if len(dims) > 1:
        raise MalformedDataset("observations have different numbers of goods")
    for o in dataset:
        if np.any(o.p <= 0) or np.any(o.x < 0) or not np.all(np.isfinite(o.x)):
            raise MalformedDataset(f"observation {o.k}: prices must be positive and bundles nonnegative")
        spend = float(o.p @ o.x)
        if abs(spend - 1.0) > tol:
            raise MalformedDataset(f"observation {o.k}: expenditure {spend!r} differs from 1")


# ---------------------------------------------------------------- text format

PathOrFile = Union[str, os.PathLike, TextIO]


def _open(target: PathOrFile, mode: str):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode, newline="", encoding="utf-8")
    return _Borrowed(target)


class _Borrowed:
    def __init__(self, handle: TextIO):
        self.handle = handle

    def __enter__(self) -> TextIO:
        return self.handle

    def __exit__(self, *exc: object) -> None:
        return None


def write_dataset(dataset: Sequence[DemandObservation] | Sequence[EconomyObservation], target: PathOrFile) -> None:
    """Write a dataset as CSV preceded by a ``# L=..,H=..,n=..`` line.

    Floats use ``repr`` so reading back reproduces every bit.
    """
    economy = bool(dataset) and isinstance(dataset[0], EconomyObservation)
    L = len(dataset[0].p) if dataset else 0
    H = len(dataset[0].w) if economy else 0
    header = ["k"] + [f"p_{i + 1}" for i in range(L)]
    if economy:
        header += [f"w_{h + 1}" for h in range(H)] + [f"D_{i + 1}" for i in range(L)]
    else:
        header += [f"x_{i + 1}" for i in range(L)]
    with _open(target, "w") as fh:
        fh.write(f"# L={L},H={H},n={len(dataset)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for o in dataset:
            values = list(o.p) + (list(o.w) + list(o.D) if economy else list(o.x))
            writer.writerow([o.k] + [repr(float(v)) for v in values])


def read_dataset(source: PathOrFile) -> list[DemandObservation] | list[EconomyObservation]:
    """Inverse of :func:`write_dataset`."""
    with _open(source, "r") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise MalformedDataset("missing '# L=..,H=..,n=..' metadata line")
        try:
            meta = dict(item.split("=") for item in first[1:].strip().split(","))
            L, H, n = int(meta["L"]), int(meta["H"]), int(meta["n"])
        except (KeyError, ValueError) as exc:
            raise MalformedDataset(f"bad metadata line {first!r}") from exc
        rows = list(csv.reader(fh))
    if n == 0:
        return []
    body = rows[1:]
    if len(body) != n:
        raise MalformedDataset(f"expected {n} records, found {len(body)}")
    out: list[Any] = []
    for row in body:
        try:
            vals = [float(v) for v in row[1:]]
            k = int(row[0])
        except (IndexError, ValueError) as exc:
            raise MalformedDataset(f"unparsable record {row!r}") from exc
        if H:
            if len(vals) != 2 * L + H:
                raise MalformedDataset(f"record {k} has {len(vals)} values")
            out.append(EconomyObservation(k, vals[:L], vals[L : L + H], vals[L + H :]))
        else:
            if len(vals) != 2 * L:
                raise MalformedDataset(f"record {k} has {len(vals)} values")
            out.append(DemandObservation(k, vals[:L], vals[L:]))
    return out


def dataset_to_text(dataset: Sequence[DemandObservation] | Sequence[EconomyObservation]) -> str:
    buf = io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()
