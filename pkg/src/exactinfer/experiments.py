"""Convergence experiments over nested prefixes of one generated sequence.

Every scenario has a fixed column set:

=================  ==============================================================
scenario           columns
=================  ==============================================================
sarp_check         spec, n, holds, witness_length, wall_ms
demand_detection   n, detected, pairs, misclassified, wall_ms
demand_bounds      n, diameter, contains_truth, wall_ms
binary_choice      n, must_prefer, pairs, misclassified, wall_ms
cn_shrinkage       n, diameter, contains_truth, wall_ms
eq_detection       n, true, false, unknown, pairs, false_positives, wall_ms
eq_set             n, set_size, lo_index, hi_index, width, contains_equilibrium,
                   max_excess_norm, wall_ms
=================  ==============================================================

``wall_ms`` is left empty unless ``record_timing`` is set, so that reruns of
the same configuration produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

import numpy as np
import scipy
from numpy.typing import NDArray

from . import __version__
from .equilibrium import (
    Economy,
    approx_equilibrium_set,
    cnk_projection_bounds,
    eq_revealed_preferred,
    excess_demand,
    grid_index,
    solve_equilibrium,
)
from .errors import ConfigError, ExactInferError, InvalidBox
from .prefs import PreferenceSpec, PrefOrdering, demand, demand_many, log_utility, prefers
from .revealed import (
    ChoiceData,
    RevealedGraph,
    choice_detection_index,
    check_sarp,
    dominates,
    first_detection,
    revealed_demand_bounds,
    strictly_revealed_preferred,
    verify_chain,
)
from .sequences import SequenceConfig, gen_demand_dataset, gen_economy_dataset, gen_prices, unit_samples

COLUMNS: dict[str, tuple[str, ...]] = {
    "sarp_check": ("spec", "n", "holds", "witness_length", "wall_ms"),
    "demand_detection": ("n", "detected", "pairs", "misclassified", "wall_ms"),
    "demand_bounds": ("n", "diameter", "contains_truth", "wall_ms"),
    "binary_choice": ("n", "must_prefer", "pairs", "misclassified", "wall_ms"),
    "cn_shrinkage": ("n", "diameter", "contains_truth", "wall_ms"),
    "eq_detection": ("n", "true", "false", "unknown", "pairs", "false_positives", "wall_ms"),
    "eq_set": (
        "n",
        "set_size",
        "lo_index",
        "hi_index",
        "width",
        "contains_equilibrium",
        "max_excess_norm",
        "wall_ms",
    ),
}

_NEEDS_SPEC = {"sarp_check", "demand_detection", "demand_bounds", "binary_choice"}
_NEEDS_ECONOMY = {"cn_shrinkage", "eq_detection", "eq_set"}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Validated experiment description, usually loaded from a JSON file.

    Attributes:
        scenario: One of the keys of :data:`COLUMNS`.
        seed: Seed for pair samplers and random sequences.
        n_schedule: Strictly increasing observation counts.
        sequence: Where prices (and incomes) are drawn.
        preferences: Consumer specs (several only for ``sarp_check``).
        economy: Economy for the aggregate-data scenarios.
        params: Scenario parameters such as ``depth`` or ``grid_res``.
        raw: The original mapping, used for hashing.
    """

    scenario: str
    seed: int
    n_schedule: tuple[int, ...]
    sequence: SequenceConfig
    preferences: tuple[PreferenceSpec, ...] = ()
    economy: Economy | None = None
    params: dict[str, Any] = field(default_factory=dict)
    record_timing: bool = False
    output: str | None = None
    raw: dict[str, Any] = field(default_factory=dict)

    @property
    def preference(self) -> PreferenceSpec:
        return self.preferences[0]

    @property
    def sha256(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Validate a mapping, collecting every problem before raising.

        Raises:
            ConfigError: With one ``field: message`` entry per problem.
        """
        problems: list[str] = []

        def attempt(name: str, fn: Callable[[], Any]) -> Any:
            try:
                return fn()
            except KeyError as exc:
                problems.append(f"{name}: missing key {exc}")
                return None
            except (TypeError, ValueError) as exc:
                problems.append(f"{name}: {exc}")
                return None

        if not isinstance(data, dict):
            raise ConfigError(["config: expected a JSON object"])
        scenario = data.get("scenario")
        if scenario not in COLUMNS:
            problems.append(f"scenario: must be one of {sorted(COLUMNS)}")
        seed = attempt("seed", lambda: int(data.get("seed", 0)))
        schedule = attempt("n_schedule", lambda: tuple(int(n) for n in data["n_schedule"]))
        if schedule is not None:
            if not schedule:
                problems.append("n_schedule: must not be empty")
            elif any(n < 0 for n in schedule) or any(b <= a for a, b in zip(schedule, schedule[1:])):
                problems.append("n_schedule: must be nonnegative and strictly increasing")
        prefs: tuple[PreferenceSpec, ...] = ()
        if "preferences" in data:
            prefs = attempt("preferences", lambda: tuple(PreferenceSpec.from_dict(p) for p in data["preferences"])) or ()
        elif "preference" in data:
            single = attempt("preference", lambda: PreferenceSpec.from_dict(data["preference"]))
            prefs = (single,) if single else ()
        economy = None
        if "economy" in data:
            economy = attempt("economy", lambda: Economy.from_dict(data["economy"]))
        if scenario in _NEEDS_SPEC and not prefs:
            problems.append("preference: required for this scenario")
        if scenario in _NEEDS_ECONOMY and economy is None:
            problems.append("economy: required for this scenario")
        seq_data = data.get("sequence")
        sequence = None
        if not isinstance(seq_data, dict):
            problems.append("sequence: required object")
        else:
            try:
                sequence = SequenceConfig.from_dict(dict(seq_data, seed=seq_data.get("seed", seed or 0)))
            except (InvalidBox, KeyError, TypeError, ValueError) as exc:
                problems.append(f"sequence: {exc}")
        params = data.get("params", {})
        if not isinstance(params, dict):
            problems.append("params: expected an object")
            params = {}
        record_timing = data.get("record_timing", False)
        if not isinstance(record_timing, bool):
            problems.append("record_timing: expected true or false")
        output = data.get("output")
        if output is not None and not isinstance(output, str):
            problems.append("output: expected a path string")
        if problems:
            raise ConfigError(problems)
        return cls(
            scenario=scenario,
            seed=seed,
            n_schedule=schedule,
            sequence=sequence,
            preferences=prefs,
            economy=economy,
            params=dict(params),
            record_timing=record_timing,
            output=output,
            raw=json.loads(json.dumps(data)),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> ExperimentConfig:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"config: invalid JSON ({exc})"]) from exc
        return cls.from_dict(data)

    def param(self, name: str, default: Any = None) -> Any:
        value = self.params.get(name, default)
        if value is None:
            raise ConfigError([f"params.{name}: required for scenario {self.scenario}"])
        return value


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """One row per scheduled ``n`` plus a free-form summary and metadata."""

    scenario: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]
    summary: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "summary": self.summary,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentReport:
        return cls(
            data["scenario"],
            tuple(data["columns"]),
            tuple(tuple(r) for r in data["rows"]),
            data.get("summary", {}),
            data.get("metadata", {}),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return canonical_json(self.to_dict()) == canonical_json(other.to_dict())


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class _Clock:
    """Per-row wall time, plus the schedule entry in progress for error messages."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = time.perf_counter()
        self.n: int | None = None

    def track(self, schedule: Sequence[int]) -> Iterator[int]:
        for n in schedule:
            self.n = n
            yield n

    def lap(self) -> float | None:
        now = time.perf_counter()
        elapsed, self.start = (now - self.start) * 1e3, now
        return round(elapsed, 3) if self.enabled else None


# ----------------------------------------------------------------- samplers


def _box(spec: Any, name: str) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if spec is None:
        raise ConfigError([f"{name}: required"])
    arr = np.asarray(spec, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or np.any(arr[:, 0] > arr[:, 1]):
        raise ConfigError([f"{name}: expected a list of [lo, hi] pairs"])
    return arr[:, 0], arr[:, 1]


def sample_strict_pairs(spec: PreferenceSpec, options: dict[str, Any], default_seed: int) -> list[tuple[NDArray, NDArray]]:
    """Ordered pairs ``(x, y)`` with ``x`` strictly preferred and neither dominating.

    ``options["sampler"]`` is ``"demand_image"`` (both bundles are demands at
    prices drawn uniformly from ``price_box``) or ``"uniform"`` (bundles drawn
    uniformly from ``box``).
    """
    count = int(options.get("count", 0))
    rng = np.random.default_rng(int(options.get("seed", default_seed)))
    sampler = options.get("sampler", "demand_image")
    if sampler == "demand_image":
        lo, hi = _box(options.get("price_box"), "pairs.price_box")
        draw = lambda: demand(spec, rng.uniform(lo, hi), 1.0)  # noqa: E731
    elif sampler == "uniform":
        lo, hi = _box(options.get("box"), "pairs.box")
        draw = lambda: rng.uniform(lo, hi)  # noqa: E731
    else:
        raise ConfigError([f"pairs.sampler: unknown sampler {sampler!r}"])
    pairs = []
    while len(pairs) < count:
        x, y = draw(), draw()
        if dominates(x, y) or dominates(y, x) or np.array_equal(x, y):
            continue
        order = prefers(spec, x, y)
        if order is PrefOrdering.INDIFFERENT:
            continue
        pairs.append((x, y) if order is PrefOrdering.STRICTLY_PREFERRED else (y, x))
    return pairs


def _uniform_pairs(options: dict[str, Any], default_seed: int) -> tuple[NDArray, NDArray]:
    rng = np.random.default_rng(int(options.get("seed", default_seed)))
    lo, hi = _box(options.get("box"), "soundness.box")
    count = int(options.get("pairs", 0))
    return rng.uniform(lo, hi, (count, lo.size)), rng.uniform(lo, hi, (count, lo.size))


def _utility_ratio(spec: PreferenceSpec, x: NDArray, y: NDArray) -> float:
    return float(np.exp(log_utility(spec, x) - log_utility(spec, y)))


# ---------------------------------------------------------------- scenarios


def _run_sarp(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    rows = []
    n_max = cfg.n_schedule[-1]
    for spec in cfg.preferences:
        data = gen_demand_dataset(spec, cfg.sequence, n_max)
        label = canonical_json(spec.to_dict())
        clock.lap()
        for n in clock.track(cfg.n_schedule):
            result = check_sarp(data[:n])
            length = None if result.witness_cycle is None else len(result.witness_cycle)
            rows.append((label, n, result.holds, length, clock.lap()))
    return rows, {"all_hold": all(r[2] for r in rows)}


def _run_demand_detection(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    spec = cfg.preference
    pairs = sample_strict_pairs(spec, cfg.param("pairs"), cfg.seed)
    sound_opts = cfg.params.get("soundness") or {}
    sound_n = sorted(int(v) for v in sound_opts.get("n", []))
    n_total = max([cfg.n_schedule[-1]] + sound_n)
    P = np.stack(gen_prices(cfg.sequence, n_total)) if n_total else np.empty((0, spec.n_goods))
    X = demand_many(spec, P) if n_total else np.empty((0, spec.n_goods))
    P_sched, X_sched = P[: cfg.n_schedule[-1]], X[: cfg.n_schedule[-1]]
    details = []
    for x, y in pairs:
        n_hat, chain = first_detection(P_sched, X_sched, x, y, return_chain=True)
        reverse = first_detection(P_sched, X_sched, y, x)
        chain_ok = None if n_hat is None else verify_chain(P, X, chain, x, y) and max(chain, default=-1) < n_hat
        details.append(
            {
                "x": x,
                "y": y,
                "n_hat": n_hat,
                "reverse_n_hat": reverse,
                "chain_verified": chain_ok,
                "utility_ratio": _utility_ratio(spec, x, y),
            }
        )
    clock.lap()
    rows = []
    for n in clock.track(cfg.n_schedule):
        detected = sum(d["n_hat"] is not None and d["n_hat"] <= n for d in details)
        wrong = sum(d["reverse_n_hat"] is not None and d["reverse_n_hat"] <= n for d in details)
        rows.append((n, detected, len(pairs), wrong, clock.lap()))

    soundness = []
    if sound_opts:
        xs, ys = _uniform_pairs(sound_opts, cfg.seed + 1)
        graph = RevealedGraph(spec.n_goods)
        for n in sound_n:
            while graph.n < n:
                graph.extend(P[graph.n], X[graph.n])
            fp = revealed = 0
            for x, y in zip(xs, ys):
                if strictly_revealed_preferred(graph, x, y):
                    revealed += 1
                    fp += prefers(spec, x, y) is not PrefOrdering.STRICTLY_PREFERRED
            soundness.append({"n": graph.n, "pairs": len(xs), "revealed": revealed, "false_positives": fp})
    summary = {"pairs": details, "soundness": soundness}
    return rows, summary


def _run_demand_bounds(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    spec = cfg.preference
    price = np.asarray(cfg.param("price"), dtype=float)
    depth = int(cfg.param("depth", 12))
    truth = demand(spec, price, 1.0)
    n_max = cfg.n_schedule[-1]
    data = gen_demand_dataset(spec, cfg.sequence, n_max)
    graph = RevealedGraph(spec.n_goods)
    rows = []
    clock.lap()
    for n in clock.track(cfg.n_schedule):
        for obs in data[graph.n : n]:
            graph.extend(obs.p, obs.x)
        region = revealed_demand_bounds(graph, price, depth)
        rows.append((n, region.diameter(), region.contains(truth), clock.lap()))
    return rows, {"truth": truth, "price": price, "depth": depth}


def _choice_data(spec: PreferenceSpec, cfg: ExperimentConfig, n: int) -> ChoiceData:
    L = spec.n_goods
    lo, hi = _box(cfg.param("choice_box"), "params.choice_box")
    u = unit_samples(cfg.sequence, n, 2 * L)
    a = lo + u[:, :L] * (hi - lo)
    b = lo + u[:, L:] * (hi - lo)
    a_wins = np.array([log_utility(spec, s) >= log_utility(spec, t) for s, t in zip(a, b)], dtype=bool)
    chosen = np.where(a_wins[:, None], a, b)
    rejected = np.where(a_wins[:, None], b, a)
    return ChoiceData(chosen, rejected)


def _run_binary_choice(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    spec = cfg.preference
    pairs = sample_strict_pairs(spec, cfg.param("pairs"), cfg.seed)
    n_max = cfg.n_schedule[-1]
    data = _choice_data(spec, cfg, n_max)
    details = []
    for x, y in pairs:
        details.append(
            {
                "x": x,
                "y": y,
                "n_hat": choice_detection_index(data, x, y),
                "reverse_n_hat": choice_detection_index(data, y, x),
                "utility_ratio": _utility_ratio(spec, x, y),
            }
        )
    clock.lap()
    rows = []
    for n in clock.track(cfg.n_schedule):
        hit = sum(d["n_hat"] is not None and d["n_hat"] <= n for d in details)
        wrong = sum(d["reverse_n_hat"] is not None and d["reverse_n_hat"] <= n for d in details)
        rows.append((n, hit, len(pairs), wrong, clock.lap()))
    return rows, {"pairs": details}


def _run_cn_shrinkage(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    economy = cfg.economy
    k = int(cfg.param("k", 0))
    h = int(cfg.param("h", 0))
    depth = int(cfg.param("depth", 14))
    data = gen_economy_dataset(economy, cfg.sequence, cfg.n_schedule[-1])
    obs = data[k]
    truth = demand(economy.specs[h], obs.p, obs.w[h])
    rows = []
    clock.lap()
    for n in clock.track(cfg.n_schedule):
        region = cnk_projection_bounds(data[:n], k, h, depth)
        rows.append((n, region.diameter(), region.contains(truth), clock.lap()))
    return rows, {"truth": truth, "k": k, "h": h, "depth": depth}


def _run_eq_detection(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    economy = cfg.economy
    h = int(cfg.param("h", 0))
    depth = int(cfg.param("depth", 0))
    spec = economy.specs[h]
    pairs = sample_strict_pairs(spec, cfg.param("pairs"), cfg.seed)
    sound_opts = cfg.params.get("soundness") or {}
    xs, ys = _uniform_pairs(sound_opts, cfg.seed + 1) if sound_opts else (np.empty((0, 2)), np.empty((0, 2)))
    data = gen_economy_dataset(economy, cfg.sequence, cfg.n_schedule[-1])
    first_true: list[int | None] = [None] * len(pairs)
    sound_true: list[int] = []
    rows = []
    clock.lap()
    for n in clock.track(cfg.n_schedule):
        prefix = data[:n]
        verdicts = [eq_revealed_preferred(prefix, h, x, y, depth) for x, y in pairs]
        for i, v in enumerate(verdicts):
            if v.is_true and first_true[i] is None:
                first_true[i] = n
        fp = revealed = 0
        for x, y in zip(xs, ys):
            if eq_revealed_preferred(prefix, h, x, y, 0).is_true:
                revealed += 1
                fp += prefers(spec, x, y) is not PrefOrdering.STRICTLY_PREFERRED
        sound_true.append(revealed)
        counts = {s: sum(v.status == s for v in verdicts) for s in ("true", "false", "unknown")}
        rows.append((n, counts["true"], counts["false"], counts["unknown"], len(pairs), fp, clock.lap()))
    details = [
        {"x": x, "y": y, "first_true_n": t, "utility_ratio": _utility_ratio(spec, x, y)}
        for (x, y), t in zip(pairs, first_true)
    ]
    summary = {"pairs": details, "soundness_pairs": len(xs), "soundness_true": sound_true, "h": h, "depth": depth}
    return rows, summary


def _run_eq_set(cfg: ExperimentConfig, clock: _Clock) -> tuple[list[tuple], dict]:
    economy = cfg.economy
    grid_res = int(cfg.param("grid_res", 200))
    eps = float(cfg.param("eps", 0.01))
    depth = int(cfg.param("depth", 12))
    p_star = solve_equilibrium(economy)
    star_index = grid_index(p_star, grid_res)
    data = gen_economy_dataset(economy, cfg.sequence, cfg.n_schedule[-1])
    rows = []
    clock.lap()
    for n in clock.track(cfg.n_schedule):
        result = approx_equilibrium_set(data[:n], economy.endowments, grid_res, eps, depth)
        norms = [float(np.linalg.norm(excess_demand(economy, p))) for p in result.prices]
        lo_hi = result.interval() or (None, None)
        rows.append(
            (
                n,
                len(result),
                lo_hi[0],
                lo_hi[1],
                result.width,
                star_index in result,
                max(norms) if norms else None,
                clock.lap(),
            )
        )
    return rows, {"equilibrium": p_star, "equilibrium_index": star_index, "grid_res": grid_res, "eps": eps}


_RUNNERS = {
    "sarp_check": _run_sarp,
    "demand_detection": _run_demand_detection,
    "demand_bounds": _run_demand_bounds,
    "binary_choice": _run_binary_choice,
    "cn_shrinkage": _run_cn_shrinkage,
    "eq_detection": _run_eq_detection,
    "eq_set": _run_eq_set,
}


def _checks(scenario: str, columns: tuple[str, ...], rows: list[tuple]) -> dict[str, bool]:
    col = lambda name: [r[columns.index(name)] for r in rows]  # noqa: E731
    out: dict[str, bool] = {}
    if "diameter" in columns:
        d = col("diameter")
        out["diameter_non_increasing"] = all(b <= a + 1e-12 for a, b in zip(d, d[1:]))
    if "contains_truth" in columns:
        out["contains_truth"] = all(col("contains_truth"))
    for name in ("detected", "must_prefer"):
        if name in columns:
            d = col(name)
            out[f"{name}_non_decreasing"] = all(b >= a for a, b in zip(d, d[1:]))
    if scenario == "eq_set":
        w = col("width")
        out["width_non_increasing"] = all(b <= a + 1e-12 for a, b in zip(w, w[1:]))
        out["contains_equilibrium"] = all(col("contains_equilibrium"))
    return out


def run_experiment(config: ExperimentConfig | dict[str, Any]) -> ExperimentReport:
    """Run one configured experiment.

    Raises:
        ConfigError: If the configuration does not validate.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    clock = _Clock(cfg.record_timing)
    try:
        rows, summary = _RUNNERS[cfg.scenario](cfg, clock)
    except ExactInferError as exc:
        where = cfg.scenario if clock.n is None else f"{cfg.scenario} at n={clock.n}"
        exc.args = (f"{where}: {exc}",) + exc.args[1:]
        raise
    columns = COLUMNS[cfg.scenario]
    metadata = {
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config_sha256": cfg.sha256,
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "checks": _checks(cfg.scenario, columns, rows),
    }
    return ExperimentReport(
        cfg.scenario,
        columns,
        tuple(tuple(_plain(list(r))) for r in rows),
        _plain(summary),
        metadata,
    )


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_text(report: ExperimentReport, fmt: str = "json") -> str:
    """Serialize a report; the text depends only on the report content."""
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: ExperimentReport, path: str | os.PathLike, fmt: str = "json") -> Path:
    """Write a report as ``json`` or ``csv`` and return the path."""
    path = Path(path)
    text = report_text(report, fmt)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def load_report(path: str | os.PathLike) -> ExperimentReport:
    """Read a report written with ``fmt="json"``."""
    with open(path, encoding="utf-8") as fh:
        return ExperimentReport.from_dict(json.load(fh))
