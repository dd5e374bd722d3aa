"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import click
import numpy as np

from .equilibrium import (
    Economy,
    approx_equilibrium_set,
    cnk_projection_bounds,
    eq_revealed_preferred,
    solve_equilibrium,
)
from .errors import ConfigError, NumericalFailure
from .experiments import ExperimentConfig, emit_report, report_text, run_experiment
from .prefs import PreferenceSpec
from .revealed import RevealedGraph, check_sarp, revealed_chain, revealed_demand_bounds
from .sequences import (
    DemandObservation,
    EconomyObservation,
    Generator,
    SequenceConfig,
    dataset_to_text,
    gen_demand_dataset,
    gen_economy_dataset,
    read_dataset,
)

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 1, 2, 3


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError([f"vector: cannot parse {text!r}"]) from exc


def _matrix(text: str) -> np.ndarray:
    return np.stack([_vector(row) for row in text.split(";")])


def _emit(ctx: click.Context, payload: Any) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    out = ctx.obj["out"]
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _load(path: str):
    data = read_dataset(path)
    if not data:
        raise ConfigError([f"data: {path} holds no observations"])
    return data


@click.group()
@click.option("--seed", type=int, default=None, help="Override the seed of the sequence or experiment.")
@click.option("--config", "config_path", type=click.Path(), default=None, help="Experiment configuration (JSON).")
@click.option("--out", type=click.Path(), default=None, help="Output file (stdout if omitted).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.pass_context
def cli(ctx: click.Context, seed: int | None, config_path: str | None, out: str | None, fmt: str) -> None:
    """Revealed-preference and equilibrium inference from market data."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, config=config_path, out=out, fmt=fmt)


@cli.command()
@click.option("--preference", "preference", default=None, help="Preference as JSON, for demand data.")
@click.option("--economy", "economy_path", type=click.Path(), default=None, help="Economy JSON file, for aggregate data.")
@click.option("-n", "--count", "n", type=int, required=True)
@click.option("--price-box", default="0.5,2.0", show_default=True, help="lo,hi applied to every good.")
@click.option("--generator", type=click.Choice([g.value for g in Generator]), default="halton", show_default=True)
@click.pass_context
def generate(ctx, preference, economy_path, n, price_box, generator) -> None:
    """Generate a demand or economy dataset as CSV."""
    lo, hi = _vector(price_box)
    seed = ctx.obj["seed"] or 0
    if (preference is None) == (economy_path is None):
        raise ConfigError(["generate: give exactly one of --preference and --economy"])
    if preference is not None:
        spec = PreferenceSpec.from_json(preference)
        cfg = SequenceConfig.square(spec.n_goods, lo, hi, seed=seed, generator=generator)
        data = gen_demand_dataset(spec, cfg, n)
    else:
        economy = Economy.from_dict(json.loads(Path(economy_path).read_text(encoding="utf-8")))
        cfg = SequenceConfig.square(
            economy.n_goods, lo, hi, seed=seed, generator=generator, income_box=economy.income_box
        )
        data = gen_economy_dataset(economy, cfg, n)
    text = dataset_to_text(data)
    if ctx.obj["out"]:
        Path(ctx.obj["out"]).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--data", type=click.Path(), required=True)
@click.pass_context
def sarp(ctx, data) -> None:
    """Check the strong axiom on a demand dataset."""
    _emit(ctx, check_sarp(_load(data)).to_dict())


def _graph(data) -> RevealedGraph:
    if not isinstance(data[0], DemandObservation):
        raise ConfigError(["data: expected a demand dataset"])
    return RevealedGraph.from_dataset(data)


@cli.command("query-pref")
@click.option("--data", type=click.Path(), required=True)
@click.option("--x", "x", required=True, help="Bundle x as comma-separated numbers.")
@click.option("--y", "y", required=True, help="Bundle y as comma-separated numbers.")
@click.pass_context
def query_pref(ctx, data, x, y) -> None:
    """Is x revealed strictly preferred to y?"""
    chain = revealed_chain(_graph(_load(data)), _vector(x), _vector(y))
    _emit(ctx, {"revealed": chain is not None, "chain": chain})


@cli.command("demand-set")
@click.option("--data", type=click.Path(), required=True)
@click.option("--price", required=True, help="Income-normalized prices.")
@click.option("--depth", type=int, default=12, show_default=True)
@click.pass_context
def demand_set(ctx, data, price, depth) -> None:
    """Box cover of the revealed demand set at a price."""
    region = revealed_demand_bounds(_graph(_load(data)), _vector(price), depth)
    _emit(ctx, {"diameter": region.diameter(), "boxes": region.to_dict()})


@cli.command()
@click.option("--economy", "economy_path", type=click.Path(), required=True)
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.pass_context
def equilibrium(ctx, economy_path, tol) -> None:
    """Equilibrium prices on the simplex."""
    economy = Economy.from_dict(json.loads(Path(economy_path).read_text(encoding="utf-8")))
    _emit(ctx, {"price": solve_equilibrium(economy, tol).tolist()})


def _economy_data(path: str):
    data = _load(path)
    if not isinstance(data[0], EconomyObservation):
        raise ConfigError(["data: expected an economy dataset"])
    return data


@cli.command("cn-bounds")
@click.option("--data", type=click.Path(), required=True)
@click.option("-k", "k", type=int, default=0, show_default=True)
@click.option("--h", "h", type=int, default=0, show_default=True)
@click.option("--depth", type=int, default=14, show_default=True)
@click.pass_context
def cn_bounds(ctx, data, k, h, depth) -> None:
    """Possible consumption of one individual at one observation."""
    region = cnk_projection_bounds(_economy_data(data), k, h, depth)
    _emit(ctx, {"diameter": region.diameter(), "boxes": region.to_dict()})


@cli.command("eq-query")
@click.option("--data", type=click.Path(), required=True)
@click.option("--h", "h", type=int, default=0, show_default=True)
@click.option("--x", "x", required=True)
@click.option("--y", "y", required=True)
@click.option("--depth", type=int, default=0, show_default=True)
@click.pass_context
def eq_query(ctx, data, h, x, y, depth) -> None:
    """Is x revealed preferred to y by individual h under every consistent allocation?"""
    _emit(ctx, eq_revealed_preferred(_economy_data(data), h, _vector(x), _vector(y), depth).to_dict())


@cli.command("eq-set")
@click.option("--data", type=click.Path(), required=True)
@click.option("--endowments", required=True, help="Rows separated by ';', e.g. '1,0;0,1'.")
@click.option("--grid-res", type=int, default=200, show_default=True)
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--depth", type=int, default=12, show_default=True)
@click.pass_context
def eq_set(ctx, data, endowments, grid_res, eps, depth) -> None:
    """Grid prices compatible with approximate equilibrium."""
    result = approx_equilibrium_set(_economy_data(data), _matrix(endowments), grid_res, eps, depth)
    _emit(ctx, result.to_dict())


@cli.command()
@click.pass_context
def experiment(ctx) -> None:
    """Run the experiment named by the global --config option."""
    path = ctx.obj["config"]
    if not path:
        raise ConfigError(["--config: required for experiment"])
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if ctx.obj["seed"] is not None:
        raw["seed"] = ctx.obj["seed"]
    cfg = ExperimentConfig.from_dict(raw)
    report = run_experiment(cfg)
    out = ctx.obj["out"] or cfg.output
    if out:
        emit_report(report, out, ctx.obj["fmt"])
    else:
        click.echo(report_text(report, ctx.obj["fmt"]), nl=False)


def main(argv: list[str] | None = None) -> int:
    """Entry point returning the process exit code."""
    try:
        cli.main(args=argv, prog_name="exactinfer", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except (ConfigError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERIC
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        return EXIT_IO
    return 0


def run() -> None:
    """Console-script wrapper around :func:`main`."""
    sys.exit(main())


if __name__ == "__main__":
    run()
