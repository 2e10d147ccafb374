"""Command-line front end: train, recommend, evaluate, sweep, inspect, serve.

Every subcommand validates its flags up front, delegates to the library, and
reports data problems as one-line diagnostics (exit 1).  Bad usage exits 2.
"""
from __future__ import annotations

import csv
import functools
import logging
import sys

import click

from .datasets import MovieLensConfig, load_csv_mmer, load_movielens, read_profiles
from .errors import GranrecError
from .experiments import (
    SCENARIO_KINDS,
    Scenario,
    SweepCell,
    evaluate,
    sweep,
    write_report_csv,
)
from .recommend import recommend
from .rules import DEFAULT_TARGET_ATTR_CAP, load_store, save_store, train

THRESHOLD = click.FloatRange(0.0, 1.0, min_open=True)


def data_options(f):
    f = click.option("--movielens", "movielens_dir", type=click.Path(),
                     help="MovieLens 100k directory (u.user, u.item, u.data).")(f)
    f = click.option("--users", "users_csv", type=click.Path(),
                     help="Users CSV (generic format).")(f)
    f = click.option("--items", "items_csv", type=click.Path(),
                     help="Items CSV (generic format).")(f)
    f = click.option("--relation", "relation_csv", type=click.Path(),
                     help="Relation CSV with (left_id, right_id) columns.")(f)
    f = click.option("--genre-mode", type=click.Choice(["presence-only", "full"]),
                     default="presence-only", show_default=True,
                     help="Whether item granules may condition on genre absence.")(f)
    return f


def train_options(f):
    f = click.option("--max-source-attrs", type=click.IntRange(min=1), default=None,
                     help="Cap on conditions per user granule (default none).")(f)
    f = click.option("--max-target-attrs", type=click.IntRange(min=1),
                     default=DEFAULT_TARGET_ATTR_CAP, show_default=True,
                     help="Cap on conditions per item granule.")(f)
    f = click.option("--allow-absence", is_flag=True,
                     help="Also enumerate value-0 conditions on grouped "
                          "boolean attributes.")(f)
    return f


def _load_data(movielens_dir, users_csv, items_csv, relation_csv, genre_mode):
    csv_parts = (users_csv, items_csv, relation_csv)
    if movielens_dir and any(csv_parts):
        raise click.UsageError("give either --movielens or the three CSV options")
    if movielens_dir:
        return load_movielens(MovieLensConfig(movielens_dir, genre_mode=genre_mode))
    if not all(csv_parts):
        raise click.UsageError(
            "a data source is required: --movielens DIR, or all of "
            "--users/--items/--relation"
        )
    return load_csv_mmer(users_csv, items_csv, relation_csv)


def friendly_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except GranrecError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.version_option()
def main():
    """Mine top-k granular association rules and recommend with them."""
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)


@main.command(name="train")
@data_options
@train_options
@click.option("--ms", type=THRESHOLD, required=True,
              help="Minimum source (user) granule coverage.")
@click.option("--mt", type=THRESHOLD, required=True,
              help="Minimum target (item) granule coverage.")
@click.option("--out", type=click.Path(), required=True,
              help="Where to write the serialized rule store.")
@friendly_errors
def train_cmd(movielens_dir, users_csv, items_csv, relation_csv, genre_mode,
              max_source_attrs, max_target_attrs, allow_absence, ms, mt, out):
    """Mine the rule store for a data set and serialize it."""
    es = _load_data(movielens_dir, users_csv, items_csv, relation_csv, genre_mode)
    store = train(es, ms, mt, max_source_attrs=max_source_attrs,
                  max_target_attrs=max_target_attrs, allow_absence=allow_absence)
    save_store(store, out)
    click.echo(
        f"trained {len(store.source_granules)} x {len(store.target_granules)} "
        f"rules (ms={ms}, mt={mt}) -> {out}"
    )


@main.command(name="recommend")
@click.option("--store", "store_path", type=click.Path(), required=True,
              help="Serialized rule store from `train`.")
@click.option("--profiles", type=click.Path(), required=True,
              help="CSV of user profiles: id column, then attribute columns.")
@click.option("--k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", type=click.Path(), default="-", show_default=True,
              help="Recommendation CSV ('-' for stdout).")
@friendly_errors
def recommend_cmd(store_path, profiles, k, out):
    """Top-k item-granule recommendations for each profile."""
    store = load_store(store_path)
    rows = []
    for user_id, profile in read_profiles(profiles):
        rec = recommend(store, profile, k)
        for rank, (cond, entry) in enumerate(
                zip(rec.conditions(), rec.entries), start=1):
            rows.append([user_id, str(rank), cond, format(entry.confidence, ".6g")])
    with click.open_file(out, "w") as handle:
        writer = csv.writer(handle)
        writer.writerow(["user", "rank", "target", "confidence"])
        writer.writerows(rows)


@main.command(name="evaluate")
@data_options
@train_options
@click.option("--scenario", type=click.Choice(SCENARIO_KINDS), required=True)
@click.option("--ms", type=THRESHOLD, default=None,
              help="Required unless the scenario is random.")
@click.option("--mt", type=THRESHOLD, default=None,
              help="Required unless the scenario is random.")
@click.option("--k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--fraction", type=click.FloatRange(0.0, 1.0, min_open=True,
              max_open=True), default=0.6, show_default=True,
              help="Training-set fraction for split scenarios.")
@click.option("--repeats", type=click.IntRange(min=1), default=20,
              show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Accuracy report CSV (omit for summary only).")
@friendly_errors
def evaluate_cmd(movielens_dir, users_csv, items_csv, relation_csv, genre_mode,
                 max_source_attrs, max_target_attrs, allow_absence, scenario,
                 ms, mt, k, fraction, repeats, seed, out):
    """Run one scenario at one parameter setting."""
    if scenario != "random" and (ms is None or mt is None):
        raise click.UsageError("--ms and --mt are required for trained scenarios")
    es = _load_data(movielens_dir, users_csv, items_csv, relation_csv, genre_mode)
    spec = Scenario(scenario, train_fraction=fraction, repeats=repeats, seed=seed)
    report = evaluate(es, spec, ms, mt, k,
                      max_source_attrs=max_source_attrs,
                      max_target_attrs=max_target_attrs,
                      allow_absence=allow_absence)
    if out:
        write_report_csv(out, spec, [SweepCell(ms, mt, report.k, report)])
    mean = report.mean_accuracy
    shown = format(mean, ".4f") if mean is not None else "n/a (no recommendations)"
    click.echo(f"{scenario}: mean accuracy {shown} over "
               f"{len(report.results)} repeat(s)")


def _grid(ctx, param, value):
    try:
        cast = int if param.name == "k_grid" else float
        items = tuple(cast(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"cannot parse {value!r} as a comma list")
    if not items:
        raise click.BadParameter("grid must be non-empty")
    return items


@main.command(name="sweep")
@data_options
@train_options
@click.option("--scenario", type=click.Choice(SCENARIO_KINDS), required=True)
@click.option("--ms-grid", callback=_grid, required=True,
              help="Comma-separated source coverage thresholds.")
@click.option("--mt-grid", callback=_grid, required=True,
              help="Comma-separated target coverage thresholds.")
@click.option("--k-grid", callback=_grid, default="1", show_default=True,
              help="Comma-separated k values.")
@click.option("--fraction", type=click.FloatRange(0.0, 1.0, min_open=True,
              max_open=True), default=0.6, show_default=True)
@click.option("--repeats", type=click.IntRange(min=1), default=20,
              show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True,
              help="Accuracy report CSV, one block per grid cell.")
@friendly_errors
def sweep_cmd(movielens_dir, users_csv, items_csv, relation_csv, genre_mode,
              max_source_attrs, max_target_attrs, allow_absence, scenario,
              ms_grid, mt_grid, k_grid, fraction, repeats, seed, out):
    """Cross-product evaluation over threshold and k grids."""
    for name, grid in (("--ms-grid", ms_grid), ("--mt-grid", mt_grid)):
        bad = [g for g in grid if not 0.0 < g <= 1.0]
        if bad:
            raise click.UsageError(f"{name} values must be in (0, 1]: {bad}")
    if any(k < 1 for k in k_grid):
        raise click.UsageError("--k-grid values must be at least 1")
    es = _load_data(movielens_dir, users_csv, items_csv, relation_csv, genre_mode)
    spec = Scenario(scenario, train_fraction=fraction, repeats=repeats, seed=seed)
    cells = sweep(es, spec, ms_grid, mt_grid, k_grid,
                  max_source_attrs=max_source_attrs,
                  max_target_attrs=max_target_attrs,
                  allow_absence=allow_absence)
    write_report_csv(out, spec, cells)
    failed = sum(1 for c in cells if c.error)
    click.echo(f"swept {len(cells)} cells ({failed} failed) -> {out}")


@main.command(name="inspect")
@click.option("--store", "store_path", type=click.Path(), required=True)
@friendly_errors
def inspect_cmd(store_path):
    """Print the dimensions and rule statistics of a serialized store."""
    store = load_store(store_path)
    conf = store.confidence_matrix
    nonzero = int((store.pair_counts > 0).sum())
    click.echo(f"store: {store_path}")
    click.echo(f"thresholds: ms={store.ms} mt={store.mt}")
    click.echo(f"universe: {store.n_users} users x {store.n_items} items")
    click.echo(f"source granules: {len(store.source_granules)}")
    click.echo(f"target granules: {len(store.target_granules)}")
    click.echo(f"confidence matrix: {store.pair_counts.shape[0]} x "
               f"{store.pair_counts.shape[1]}")
    click.echo(f"rules with positive confidence: {nonzero}")
    click.echo(f"max confidence: {format(float(conf.max(initial=0.0)), '.6g')}")


@main.command(name="serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the HTTP recommendation service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
