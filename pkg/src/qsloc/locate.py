"""Positioning algorithms.

Three routes produce a location estimate from a fingerprint database and an
online RSS sample:

* ``classical_locate``: exact cosine similarity against every record.
* ``analytic_locate``: the closed-form joint distribution the swap-test
  circuit induces over (ancilla, index), evaluated exactly.  Because the
  ancilla-zero probability ``(1 + overlap^2) / 2`` increases strictly with
  the overlap, its argmax always matches the classical winner.
* ``quantum_locate``: build the circuit, draw shots, and estimate
  similarities from the counts.

The circuit uses ``1 + m + 2n`` qubits: index register on the low bits,
then the fingerprint register, then the sample register, ancilla on top.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .encoding import (
    AmplitudeVector,
    NormalizationConfig,
    prepare_fingerprint,
    prepare_psi,
    rss_to_amplitudes,
)
from .errors import IndexNeverObservedError, ValidationError
from .rng import Seed, rng_from
from .sampling import ShotCounts, sample_counts
from .sim import CSWAP, Circuit, H, NoiseModel, marginal_distribution, run_circuit

METHOD_CLASSICAL = "classical"
METHOD_ANALYTIC = "quantum-analytic"
METHOD_SAMPLED = "quantum-sampled"

_JOINT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FingerprintRecord:
    """One offline observation: where it was taken and what was heard."""

    location: tuple[float, float]
    rss: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rss", np.asarray(self.rss, dtype=float))
        x, y = self.location
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"record location {self.location} is not finite")


@dataclass(frozen=True)
class FingerprintDb:
    """Offline database: M records over a fixed station list.

    The normalization config is part of the database so online samples are
    guaranteed to go through the same dBm-to-amplitude pipeline as the
    stored fingerprint.
    """

    records: tuple[FingerprintRecord, ...]
    station_ids: tuple[str, ...]
    normalization: NormalizationConfig
    coords: str = "meters"

    def __post_init__(self):
        if not self.records:
            raise ValidationError("fingerprint database must hold at least one record")
        n = len(self.station_ids)
        if n < 1:
            raise ValidationError("fingerprint database needs at least one station")
        for i, rec in enumerate(self.records):
            if rec.rss.shape != (n,):
                raise ValidationError(
                    f"record {i} has {rec.rss.shape[0]} readings for {n} stations"
                )
        if self.coords not in ("meters", "latlon"):
            raise ValidationError(f"unknown coordinate kind {self.coords!r}")

    @property
    def num_records(self) -> int:
        return len(self.records)

    def amplitude_rows(self) -> list[AmplitudeVector]:
        return [rss_to_amplitudes(rec.rss, self.normalization) for rec in self.records]


@dataclass(frozen=True)
class AnalyticDistribution:
    """Exact joint law of (ancilla, index) for one sample against a database."""

    joint: np.ndarray  # shape (2, M); joint[a, j] = p(ancilla=a, index=j)
    conditional: np.ndarray  # p(ancilla=0 | index=j)
    cosines: np.ndarray  # |<sample|row_j>|

    def __post_init__(self):
        total = float(self.joint.sum())
        if abs(total - 1.0) > _JOINT_SUM_TOL:
            raise ValidationError(f"joint distribution sums to {total}")

    @property
    def num_records(self) -> int:
        return self.joint.shape[1]

    def index_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)


@dataclass(frozen=True)
class LocationEstimate:
    """Outcome of one positioning query."""

    location: tuple[float, float]
    winning_index: int
    similarity_scores: tuple[float, ...]
    method: str
    raw_counts: ShotCounts | None = None

    def to_json(self) -> str:
        counts = None
        if self.raw_counts is not None:
            counts = {
                f"{a},{j}": c for (a, j), c in sorted(self.raw_counts.counts.items())
            }
        return json.dumps(
            {
                "method": self.method,
                "winning_index": self.winning_index,
                "location": [self.location[0], self.location[1]],
                "scores": list(self.similarity_scores),
                "counts": counts,
            },
            sort_keys=True,
        )


def index_bits_for(num_records: int) -> int:
    return (num_records - 1).bit_length()


def build_positioning_circuit(psi: AmplitudeVector, db_amps) -> Circuit:
    """Swap-test circuit comparing one sample against all rows in superposition.

    Stage one loads the sample and the index-entangled fingerprint; stage
    two is the swap test (H, one controlled swap per data qubit, H); stage
    three measures ancilla and index register only.
    """
    db_amps = list(db_amps)
    if not db_amps:
        raise ValidationError("need at least one fingerprint row")
    n = psi.num_qubits
    for j, row in enumerate(db_amps):
        if row.num_qubits != n:
            raise ValidationError(f"row {j} has {row.num_qubits} qubits, sample has {n}")
    m = index_bits_for(len(db_amps))
    index_reg = tuple(range(m))
    phi_reg = tuple(range(m, m + n))
    psi_reg = tuple(range(m + n, m + 2 * n))
    ancilla = m + 2 * n
    ops = list(prepare_psi(psi, psi_reg).ops)
    ops += list(prepare_fingerprint(db_amps, index_reg, phi_reg).ops)
    ops.append(H(ancilla))
    ops += [CSWAP(ancilla, psi_reg[k], phi_reg[k]) for k in range(n)]
    ops.append(H(ancilla))
    return Circuit(
        num_qubits=1 + m + 2 * n,
        ops=tuple(ops),
        measured_qubits=index_reg + (ancilla,),
    )


def analytic_distribution(psi: AmplitudeVector, db_amps) -> AnalyticDistribution:
    """Exact (ancilla, index) law: uniform over indices, ancilla biased by overlap."""
    db_amps = list(db_amps)
    if not db_amps:
        raise ValidationError("need at least one fingerprint row")
    for j, row in enumerate(db_amps):
        if row.num_qubits != psi.num_qubits:
            raise ValidationError(f"row {j} has {row.num_qubits} qubits, sample has {psi.num_qubits}")
    m_rows = len(db_amps)
    cosines = np.array([abs(float(psi.values @ row.values)) for row in db_amps])
    conditional = 0.5 + 0.5 * cosines * cosines
    joint = np.vstack([conditional, 1.0 - conditional]) / m_rows
    return AnalyticDistribution(joint=joint, conditional=conditional, cosines=cosines)


def circuit_marginal(psi: AmplitudeVector, db_amps, noise=None, seed: Seed = 0) -> np.ndarray:
    """Simulated (ancilla, index) distribution: outcome = index + (ancilla << m)."""
    circ = build_positioning_circuit(psi, db_amps)
    final = run_circuit(circ, noise=noise, seed=seed)
    return marginal_distribution(final, circ.measured_qubits)


def counts_to_similarity(counts: ShotCounts, j: int) -> float:
    """Estimate |<sample|row_j>| from counts via the conditional frequency.

    The ancilla-zero frequency among shots that read index j estimates
    ``(1 + overlap^2) / 2``; inverting gives ``sqrt(2 p - 1)``, clamped at
    zero so sampling noise below one half cannot produce an invalid root.
    """
    seen = counts.index_total(j)
    if seen == 0:
        raise IndexNeverObservedError(j)
    p_hat = counts.joint(0, j) / seen
    return math.sqrt(max(2.0 * p_hat - 1.0, 0.0))


def _argmax_lowest(values: np.ndarray) -> int:
    # ties resolve to the lowest index
    return int(np.argmax(values))


def _estimate_from_counts(counts: ShotCounts, num_records: int, estimator: str):
    joint0 = np.array([counts.joint(0, j) for j in range(num_records)], dtype=float)
    totals = joint0 + np.array(
        [counts.joint(1, j) for j in range(num_records)], dtype=float
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        conditional = np.where(totals > 0, joint0 / np.maximum(totals, 1), 0.0)
    scores = np.sqrt(np.maximum(2.0 * conditional - 1.0, 0.0))
    if estimator == "joint":
        winner = _argmax_lowest(joint0)
    elif estimator == "conditional":
        winner = _argmax_lowest(scores)
    else:
        raise ValidationError(f"unknown estimator {estimator!r}")
    return winner, scores


def quantum_locate(
    db: FingerprintDb,
    sample_rss,
    shots: int,
    seed: Seed,
    noise: NoiseModel | None = None,
    *,
    estimator: str = "conditional",
    sampling: str = "marginal",
) -> LocationEstimate:
    """Position a sample by running the swap-test circuit for ``shots`` shots.

    ``sampling="marginal"`` evaluates the circuit once and draws all shots
    from its exact measured-qubit marginal; ``sampling="per-shot"`` re-runs
    the circuit for every shot (fresh noise trajectory each time) and draws
    a single outcome per run, mirroring the shot loop literally.

    ``estimator`` picks the winner rule: "conditional" takes the argmax of
    the per-index similarity estimates, "joint" takes the argmax of the raw
    ancilla-zero counts.  The two agree in expectation because the index
    marginal is uniform.
    """
    if shots < 1:
        raise ValidationError(f"shot count must be >= 1, got {shots}")
    if sampling not in ("marginal", "per-shot"):
        raise ValidationError(f"unknown sampling mode {sampling!r}")
    rows = db.amplitude_rows()
    psi = rss_to_amplitudes(np.asarray(sample_rss, dtype=float), db.normalization)
    m = index_bits_for(db.num_records)
    readout = noise.readout_flip_prob if noise is not None else 0.0

    if sampling == "marginal":
        dist = circuit_marginal(psi, rows, noise=noise, seed=_sub(seed, 0))
        counts = sample_counts(dist, shots, _sub(seed, 1), readout, index_bits=m)
    else:
        counts = _per_shot_counts(psi, rows, shots, seed, noise, readout, m)

    winner, scores = _estimate_from_counts(counts, db.num_records, estimator)
    return LocationEstimate(
        location=db.records[winner].location,
        winning_index=winner,
        similarity_scores=tuple(float(s) for s in scores),
        method=METHOD_SAMPLED,
        raw_counts=counts,
    )


def _sub(seed: Seed, *path: int) -> tuple[int, ...]:
    base = seed if isinstance(seed, tuple) else (int(seed),)
    return base + path


def _per_shot_counts(psi, rows, shots, seed, noise, readout, m) -> ShotCounts:
    tally: dict[tuple[int, int], int] = {}
    mask = (1 << m) - 1
    for k in range(shots):
        dist = circuit_marginal(psi, rows, noise=noise, seed=_sub(seed, 2, k))
        rng = rng_from(_sub(seed, 3, k))
        outcome = int(rng.choice(dist.size, p=dist / dist.sum()))
        if readout > 0.0:
            bits = m + 1
            flips = rng.random(bits) < readout
            outcome ^= int(flips @ (1 << np.arange(bits)))
        key = (outcome >> m, outcome & mask)
        tally[key] = tally.get(key, 0) + 1
    return ShotCounts(counts=tally, total_shots=shots, index_bits=m)


def analytic_locate(db: FingerprintDb, sample_rss) -> LocationEstimate:
    """Infinite-shot positioning from the exact circuit distribution."""
    rows = db.amplitude_rows()
    psi = rss_to_amplitudes(np.asarray(sample_rss, dtype=float), db.normalization)
    dist = analytic_distribution(psi, rows)
    winner = _argmax_lowest(dist.conditional)
    return LocationEstimate(
        location=db.records[winner].location,
        winning_index=winner,
        similarity_scores=tuple(float(c) for c in dist.cosines),
        method=METHOD_ANALYTIC,
    )


def classical_locate(db: FingerprintDb, sample_rss) -> LocationEstimate:
    """Exact cosine match against every record; the O(M N) baseline."""
    rows = db.amplitude_rows()
    psi = rss_to_amplitudes(np.asarray(sample_rss, dtype=float), db.normalization)
    scores = np.array([abs(float(psi.values @ row.values)) for row in rows])
    winner = _argmax_lowest(scores)
    return LocationEstimate(
        location=db.records[winner].location,
        winning_index=winner,
        similarity_scores=tuple(float(s) for s in scores),
        method=METHOD_CLASSICAL,
    )


@dataclass(frozen=True)
class SwapIdentityReport:
    """Explicit-vector check of the swap-test measurement statistics.

    For unit vectors u, v the post-test state splits into a symmetric
    branch (ancilla 0) and an antisymmetric branch (ancilla 1).  The report
    carries the combined norm (always 2), the squared norm of the symmetric
    branch (2 + 2 overlap^2), and the ancilla-zero probability computed both
    from that norm and from the closed form (1 + overlap^2) / 2.
    """

    overlap: float
    combined_norm: float
    symmetric_norm_sq: float
    ancilla_zero_prob: float
    predicted_prob: float

    @property
    def discrepancy(self) -> float:
        return abs(self.ancilla_zero_prob - self.predicted_prob)


def swap_test_identities(psi: AmplitudeVector, phi: AmplitudeVector) -> SwapIdentityReport:
    """Build the branch vectors explicitly and compare norms against the closed form."""
    if psi.num_qubits != phi.num_qubits:
        raise ValidationError("identity check needs equal-width vectors")
    uv = np.kron(psi.values, phi.values)
    vu = np.kron(phi.values, psi.values)
    symmetric = uv + vu
    antisymmetric = uv - vu
    zero = np.array([1.0, 0.0])
    one = np.array([0.0, 1.0])
    combined = np.kron(zero, symmetric) + np.kron(one, antisymmetric)
    overlap = abs(float(psi.values @ phi.values))
    sym_sq = float(symmetric @ symmetric)
    return SwapIdentityReport(
        overlap=overlap,
        combined_norm=float(np.linalg.norm(combined)),
        symmetric_norm_sq=sym_sq,
        ancilla_zero_prob=sym_sq / 4.0,
        predicted_prob=0.5 + 0.5 * overlap * overlap,
    )
