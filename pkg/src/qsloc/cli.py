"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 I/O or format error,
4 internal invariant breach.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .encoding import NormalizationConfig
from .errors import (
    DatasetFormatError,
    InternalInvariantError,
    QslocError,
    ValidationError,
)
from .evaluate import (
    CLI_METHODS,
    DEFAULT_SHOTS,
    SWEEPS,
    complexity_report,
    run_evaluation,
    write_report,
)
from .locate import analytic_locate, classical_locate, quantum_locate
from .sim import NoiseModel
from .testbed import Dataset, PathLossParams, generate_synthetic, load_dataset, save_dataset

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _run(body):
    try:
        body()
    except InternalInvariantError as exc:
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    except (DatasetFormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except (ValidationError, QslocError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _parse_area(text: str) -> tuple[float, float]:
    try:
        width, height = text.lower().split("x")
        return float(width), float(height)
    except ValueError as exc:
        raise ValidationError(f"area must look like 450x450, got {text!r}") from exc


@click.group()
def main():
    """Swap-test fingerprint positioning: datasets, queries, sweeps, accounting."""


@main.command()
@click.option("--n", "n_stations", type=int, required=True, help="Number of base stations.")
@click.option("--m", "m_locations", type=int, required=True, help="Number of fingerprint locations.")
@click.option("--num-test", type=int, default=16, show_default=True, help="Held-out test samples.")
@click.option("--area", default="450x450", show_default=True, help="Area WIDTHxHEIGHT in meters.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tx-power", type=float, default=30.0, show_default=True, help="Transmit power, dBm.")
@click.option("--exponent", type=float, default=3.0, show_default=True, help="Path-loss exponent.")
@click.option("--sigma", type=float, default=6.0, show_default=True, help="Shadowing std, dB.")
@click.option("--noise-floor", type=float, default=-110.0, show_default=True, help="Hearability cutoff, dBm.")
@click.option("--floor", type=float, default=-110.0, show_default=True, help="Amplitude floor, dBm.")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output directory.")
def generate(n_stations, m_locations, num_test, area, seed, tx_power, exponent, sigma,
             noise_floor, floor, out):
    """Generate a synthetic dataset and write it to a directory."""

    def body():
        params = PathLossParams(
            tx_power_dbm=tx_power,
            path_loss_exponent=exponent,
            shadowing_sigma_db=sigma,
            noise_floor_dbm=noise_floor,
        )
        normalization = NormalizationConfig(floor_dbm=floor)
        ds = generate_synthetic(
            _parse_area(area), n_stations, m_locations, num_test,
            params=params, seed=seed, normalization=normalization,
        )
        save_dataset(ds, out)
        click.echo(
            f"wrote {m_locations} fingerprint records, {num_test} test samples, "
            f"{n_stations} stations to {out}"
        )

    _run(body)


def _load(dataset_dir: Path) -> Dataset:
    return load_dataset(dataset_dir)


@main.command()
@click.option("--dataset", "dataset_dir", type=click.Path(path_type=Path), required=True)
@click.option("--sample-index", type=int, default=None, help="Index into the test set.")
@click.option("--rss", "inline_rss", default=None,
              help="Inline dBm readings, comma separated; empty cell = not heard.")
@click.option("--method", type=click.Choice(sorted(CLI_METHODS)), default="quantum",
              show_default=True)
@click.option("--k", "shots", type=int, default=DEFAULT_SHOTS, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--depolarizing", type=float, default=0.0, show_default=True)
@click.option("--readout", type=float, default=0.0, show_default=True)
@click.option("--estimator", type=click.Choice(["conditional", "joint"]),
              default="conditional", show_default=True)
def locate(dataset_dir, sample_index, inline_rss, method, shots, seed, depolarizing,
           readout, estimator):
    """Position one sample; prints the location estimate as JSON."""

    def body():
        ds = _load(dataset_dir)
        if (sample_index is None) == (inline_rss is None):
            raise ValidationError("provide exactly one of --sample-index or --rss")
        if sample_index is not None:
            if not 0 <= sample_index < len(ds.test_samples):
                raise ValidationError(
                    f"sample index {sample_index} outside 0..{len(ds.test_samples) - 1}"
                )
            rss = ds.test_samples[sample_index].rss
        else:
            sentinel = ds.normalization.sentinel_dbm
            cells = inline_rss.split(",")
            if len(cells) != len(ds.station_ids):
                raise ValidationError(
                    f"expected {len(ds.station_ids)} readings, got {len(cells)}"
                )
            rss = np.array([sentinel if c.strip() == "" else float(c) for c in cells])
        db = ds.fingerprint
        if method == "classical":
            est = classical_locate(db, rss)
        elif method == "quantum-analytic":
            est = analytic_locate(db, rss)
        else:
            noise = None
            if depolarizing > 0 or readout > 0:
                noise = NoiseModel(depolarizing_prob=depolarizing, readout_flip_prob=readout)
            est = quantum_locate(db, rss, shots, seed, noise=noise, estimator=estimator)
        click.echo(est.to_json())

    _run(body)


@main.command()
@click.option("--dataset", "dataset_dir", type=click.Path(path_type=Path), required=True)
@click.option("--methods", default="classical,quantum-analytic", show_default=True,
              help="Comma-separated subset of classical, quantum-analytic, quantum.")
@click.option("--sweep", type=click.Choice(SWEEPS), default="none", show_default=True)
@click.option("--sweep-values", default=None,
              help="Comma-separated sweep points (defaults depend on the sweep).")
@click.option("--k", "shots", type=int, default=DEFAULT_SHOTS, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True, help="Master seed.")
@click.option("--replicates", type=int, default=1, show_default=True)
@click.option("--depolarizing", type=float, default=0.0, show_default=True)
@click.option("--readout", type=float, default=0.0, show_default=True)
@click.option("--jobs", type=int, default=None, help="Worker threads (default: auto).")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Output prefix for _rows/_summary/_cdf CSV files.")
def evaluate(dataset_dir, methods, sweep, sweep_values, shots, seed, replicates,
             depolarizing, readout, jobs, out):
    """Run paired positioning queries and write plot-ready CSV reports."""

    def body():
        ds = _load(dataset_dir)
        method_list = []
        for name in methods.split(","):
            name = name.strip()
            if name not in CLI_METHODS:
                raise ValidationError(
                    f"unknown method {name!r}; options: {', '.join(sorted(CLI_METHODS))}"
                )
            method_list.append(CLI_METHODS[name])
        values = None
        if sweep_values:
            values = [float(v) for v in sweep_values.split(",")]
        noise = None
        if depolarizing > 0 or readout > 0:
            noise = NoiseModel(depolarizing_prob=depolarizing, readout_flip_prob=readout)
        report = run_evaluation(
            ds, method_list, sweep=sweep, sweep_values=values, shots=shots,
            master_seed=seed, replicates=replicates, noise=noise, jobs=jobs,
        )
        paths = write_report(report, out)
        for kind in ("rows", "summary", "cdf"):
            click.echo(f"{kind}: {paths[kind]}")

    _run(body)


@main.command()
@click.option("--m", "num_records", type=int, required=True, help="Fingerprint locations.")
@click.option("--n", "num_stations", type=int, required=True, help="Base stations.")
@click.option("--k", "shots", type=int, default=2**14, show_default=True)
def complexity(num_records, num_stations, shots):
    """Print the resource accounting for one problem shape as JSON."""

    def body():
        click.echo(complexity_report(num_records, num_stations, shots).to_json())

    _run(body)


if __name__ == "__main__":
    main()
