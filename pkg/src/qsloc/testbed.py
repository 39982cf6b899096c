"""Synthetic RSS testbed: generation, persistence, and the on-disk schema.

RSS follows a log-distance path-loss model with log-normal shadowing:
``rss = tx_power - 10 * exponent * log10(d / d0) + N(0, sigma)``, clipped to
the sentinel below the hearability floor.  Fingerprint locations sit on a
jittered uniform grid; stations and test locations are uniform over the
area.  Everything is deterministic in (parameters, seed).

On disk a dataset is a directory:

* ``fingerprint.csv``: header ``loc_id,x_m,y_m,rss_<station>...``; a missing
  reading is an empty cell; UTF-8, LF line endings.
* ``test.csv``: same schema for the held-out samples.
* ``dataset.json``: seed, path-loss parameters, normalization config,
  station coordinates, area.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .encoding import NormalizationConfig
from .errors import DatasetFormatError, ValidationError
from .locate import FingerprintDb, FingerprintRecord
from .rng import derive_rng

FINGERPRINT_FILE = "fingerprint.csv"
TEST_FILE = "test.csv"
SIDECAR_FILE = "dataset.json"

_STREAM_STATIONS = 0
_STREAM_GRID = 1
_STREAM_FP_SHADOW = 2
_STREAM_TEST_LOCS = 3
_STREAM_TEST_SHADOW = 4


@dataclass(frozen=True)
class PathLossParams:
    tx_power_dbm: float = 30.0
    path_loss_exponent: float = 3.0
    reference_distance_m: float = 1.0
    shadowing_sigma_db: float = 6.0
    noise_floor_dbm: float = -110.0

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise ValidationError(f"path-loss exponent must be > 0, got {self.path_loss_exponent}")
        if self.shadowing_sigma_db < 0:
            raise ValidationError(f"shadowing sigma must be >= 0, got {self.shadowing_sigma_db}")
        if self.reference_distance_m <= 0:
            raise ValidationError(
                f"reference distance must be > 0, got {self.reference_distance_m}"
            )


@dataclass(frozen=True)
class TestSample:
    location: tuple[float, float]
    rss: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rss", np.asarray(self.rss, dtype=float))


@dataclass
class Dataset:
    station_ids: tuple[str, ...]
    station_xy: np.ndarray  # shape (N, 2), meters
    fingerprint: FingerprintDb
    test_samples: tuple[TestSample, ...]
    params: PathLossParams
    normalization: NormalizationConfig
    seed: int
    area_m: tuple[float, float]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.station_ids == other.station_ids
            and np.array_equal(self.station_xy, other.station_xy)
            and self.params == other.params
            and self.normalization == other.normalization
            and self.seed == other.seed
            and self.area_m == other.area_m
            and len(self.test_samples) == len(other.test_samples)
            and all(
                a.location == b.location and np.array_equal(a.rss, b.rss)
                for a, b in zip(self.test_samples, other.test_samples)
            )
            and self.fingerprint.station_ids == other.fingerprint.station_ids
            and self.fingerprint.normalization == other.fingerprint.normalization
            and len(self.fingerprint.records) == len(other.fingerprint.records)
            and all(
                a.location == b.location and np.array_equal(a.rss, b.rss)
                for a, b in zip(self.fingerprint.records, other.fingerprint.records)
            )
        )


def synth_rss(
    location,
    station_xy: np.ndarray,
    params: PathLossParams,
    rng: np.random.Generator | None = None,
    sentinel_dbm: float = -200.0,
) -> np.ndarray:
    """RSS heard at a location from every station; deterministic when sigma is 0."""
    x, y = location
    d = np.hypot(station_xy[:, 0] - x, station_xy[:, 1] - y)
    d = np.maximum(d, params.reference_distance_m)
    rss = params.tx_power_dbm - 10.0 * params.path_loss_exponent * np.log10(
        d / params.reference_distance_m
    )
    if params.shadowing_sigma_db > 0:
        if rng is None:
            raise ValidationError("shadowing requires a random generator")
        rss = rss + rng.normal(0.0, params.shadowing_sigma_db, size=rss.size)
    return np.where(rss < params.noise_floor_dbm, sentinel_dbm, rss)


def _grid_locations(area_m, count: int, rng: np.random.Generator) -> np.ndarray:
    width, height = area_m
    cols = max(1, round(math.sqrt(count * width / height)))
    rows_needed = math.ceil(count / cols)
    if cols * rows_needed < count:  # pragma: no cover - defensive
        raise ValidationError(f"grid of {cols}x{rows_needed} cannot hold {count} locations")
    cell_w = width / cols
    cell_h = height / rows_needed
    jitter = rng.uniform(-0.45, 0.45, size=(count, 2))
    locs = np.empty((count, 2))
    for i in range(count):
        cx = (i % cols + 0.5) * cell_w
        cy = (i // cols + 0.5) * cell_h
        locs[i] = (cx + jitter[i, 0] * cell_w, cy + jitter[i, 1] * cell_h)
    return locs


def generate_synthetic(
    area_m,
    n_stations: int,
    m_locations: int,
    num_test: int,
    params: PathLossParams | None = None,
    seed: int = 0,
    normalization: NormalizationConfig | None = None,
) -> Dataset:
    """Build a synthetic dataset of the requested shape, deterministic in seed."""
    params = params or PathLossParams()
    normalization = normalization or NormalizationConfig()
    width, height = float(area_m[0]), float(area_m[1])
    if width <= 0 or height <= 0:
        raise ValidationError(f"area must be positive, got {width} x {height}")
    if n_stations < 1 or m_locations < 1 or num_test < 1:
        raise ValidationError("station, fingerprint, and test counts must all be >= 1")

    station_xy = derive_rng(seed, _STREAM_STATIONS).uniform(
        low=(0.0, 0.0), high=(width, height), size=(n_stations, 2)
    )
    station_ids = tuple(f"bs{i:02d}" for i in range(n_stations))

    fp_locs = _grid_locations((width, height), m_locations, derive_rng(seed, _STREAM_GRID))
    fp_shadow = derive_rng(seed, _STREAM_FP_SHADOW)
    records = tuple(
        FingerprintRecord(
            location=(float(loc[0]), float(loc[1])),
            rss=synth_rss(loc, station_xy, params, fp_shadow, normalization.sentinel_dbm),
        )
        for loc in fp_locs
    )

    test_locs = derive_rng(seed, _STREAM_TEST_LOCS).uniform(
        low=(0.0, 0.0), high=(width, height), size=(num_test, 2)
    )
    test_shadow = derive_rng(seed, _STREAM_TEST_SHADOW)
    samples = tuple(
        TestSample(
            location=(float(loc[0]), float(loc[1])),
            rss=synth_rss(loc, station_xy, params, test_shadow, normalization.sentinel_dbm),
        )
        for loc in test_locs
    )

    return Dataset(
        station_ids=station_ids,
        station_xy=station_xy,
        fingerprint=FingerprintDb(
            records=records, station_ids=station_ids, normalization=normalization
        ),
        test_samples=samples,
        params=params,
        normalization=normalization,
        seed=seed,
        area_m=(width, height),
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rss_csv(path: Path, station_ids, rows, sentinel: float) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["loc_id", "x_m", "y_m"] + [f"rss_{sid}" for sid in station_ids])
        for loc_id, (location, rss) in enumerate(rows):
            cells = [str(loc_id), _fmt(location[0]), _fmt(location[1])]
            cells += ["" if v == sentinel else _fmt(v) for v in rss]
            writer.writerow(cells)


def save_dataset(ds: Dataset, path) -> None:
    """Write the three dataset files; the round trip through load is exact."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    sentinel = ds.normalization.sentinel_dbm
    _write_rss_csv(
        root / FINGERPRINT_FILE,
        ds.station_ids,
        [(rec.location, rec.rss) for rec in ds.fingerprint.records],
        sentinel,
    )
    _write_rss_csv(
        root / TEST_FILE,
        ds.station_ids,
        [(s.location, s.rss) for s in ds.test_samples],
        sentinel,
    )
    sidecar = {
        "seed": ds.seed,
        "area_m": [ds.area_m[0], ds.area_m[1]],
        "coords": ds.fingerprint.coords,
        "path_loss_params": asdict(ds.params),
        "normalization": asdict(ds.normalization),
        "stations": {
            sid: [float(ds.station_xy[i, 0]), float(ds.station_xy[i, 1])]
            for i, sid in enumerate(ds.station_ids)
        },
    }
    (root / SIDECAR_FILE).write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_rss_csv(path: Path, station_ids, sentinel: float):
    if not path.exists():
        raise DatasetFormatError(f"missing dataset file {path}")
    expected_header = ["loc_id", "x_m", "y_m"] + [f"rss_{sid}" for sid in station_ids]
    rows = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: file is empty") from None
        if header != expected_header:
            raise ValidationError(
                f"{path}: station columns do not match the dataset sidecar "
                f"(got {header[3:]}, expected {expected_header[3:]})"
            )
        for line_no, cells in enumerate(reader, start=2):
            if len(cells) != len(expected_header):
                raise DatasetFormatError(
                    f"{path}: line {line_no}: expected {len(expected_header)} cells, "
                    f"got {len(cells)}"
                )
            try:
                location = (float(cells[1]), float(cells[2]))
                rss = np.array(
                    [sentinel if cell == "" else float(cell) for cell in cells[3:]]
                )
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {line_no}: {exc}") from exc
            rows.append((location, rss))
    return rows


def load_dataset(path) -> Dataset:
    """Read a dataset directory written by save_dataset."""
    root = Path(path)
    sidecar_path = root / SIDECAR_FILE
    if not sidecar_path.exists():
        raise DatasetFormatError(f"missing dataset sidecar {sidecar_path}")
    try:
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        params = PathLossParams(**sidecar["path_loss_params"])
        normalization = NormalizationConfig(**sidecar["normalization"])
        station_ids = tuple(sidecar["stations"].keys())
        station_xy = np.array([sidecar["stations"][sid] for sid in station_ids], dtype=float)
        seed = int(sidecar["seed"])
        area = (float(sidecar["area_m"][0]), float(sidecar["area_m"][1]))
        coords = sidecar.get("coords", "meters")
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"{sidecar_path}: {exc}") from exc

    sentinel = normalization.sentinel_dbm
    fp_rows = _read_rss_csv(root / FINGERPRINT_FILE, station_ids, sentinel)
    test_rows = _read_rss_csv(root / TEST_FILE, station_ids, sentinel)
    if not fp_rows:
        raise DatasetFormatError(f"{root / FINGERPRINT_FILE}: no fingerprint records")

    return Dataset(
        station_ids=station_ids,
        station_xy=station_xy,
        fingerprint=FingerprintDb(
            records=tuple(FingerprintRecord(location=loc, rss=rss) for loc, rss in fp_rows),
            station_ids=station_ids,
            normalization=normalization,
            coords=coords,
        ),
        test_samples=tuple(TestSample(location=loc, rss=rss) for loc, rss in test_rows),
        params=params,
        normalization=normalization,
        seed=seed,
        area_m=area,
    )
