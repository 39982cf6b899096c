"""Amplitude encoding of RSS vectors.

A classical unit vector with non-negative entries is loaded into a qubit
register through a cascade of Y-rotations.  The angles come from a binary
tree over the amplitudes: at each node the rotation splits probability mass
between the left and right subtree, ``theta = 2 * atan2(|right|, |left|)``,
which is total even when one subtree is empty.  Because all entries are
non-negative no phase corrections are needed and every angle lies in
``[0, pi]``.

Registers are ordered least-significant first: ``register[l]`` holds bit
``l`` of the encoded value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoSignalError, ValidationError
from .sim import CNOT, CRy, GateOp, H, Ry

_UNIT_TOL = 1e-10


@dataclass(frozen=True)
class NormalizationConfig:
    """How raw dBm readings become non-negative amplitudes.

    Readings are shifted by ``floor_dbm`` and clipped at zero; a reading
    equal to ``sentinel_dbm`` means "station not heard" and contributes
    nothing.  ``ceiling_dbm`` bounds plausible readings and must exceed the
    floor.
    """

    floor_dbm: float = -110.0
    ceiling_dbm: float = 30.0
    sentinel_dbm: float = -200.0

    def __post_init__(self):
        if not self.floor_dbm < self.ceiling_dbm:
            raise ValidationError(
                f"floor_dbm {self.floor_dbm} must be below ceiling_dbm {self.ceiling_dbm}"
            )
        if self.sentinel_dbm > self.floor_dbm:
            raise ValidationError(
                f"sentinel_dbm {self.sentinel_dbm} must not exceed floor_dbm {self.floor_dbm}"
            )


@dataclass(frozen=True)
class AmplitudeVector:
    """Unit-norm vector of 2**num_qubits non-negative real amplitudes."""

    values: np.ndarray
    num_qubits: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (1 << self.num_qubits,):
            raise ValidationError(
                f"amplitude vector over {self.num_qubits} qubits needs "
                f"{1 << self.num_qubits} entries, got shape {values.shape}"
            )
        if np.any(values < 0):
            raise ValidationError("amplitudes must be non-negative")
        norm_sq = float(values @ values)
        if abs(norm_sq - 1.0) > _UNIT_TOL:
            raise ValidationError(f"amplitudes must be unit norm, got |v|^2 = {norm_sq}")


def amplitude_vector(values) -> AmplitudeVector:
    """Normalize a non-negative vector of power-of-two length into an AmplitudeVector."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 1:
        raise ValidationError(f"expected a non-empty 1-d vector, got shape {values.shape}")
    size = values.size
    if size & (size - 1):
        raise ValidationError(f"length must be a power of two, got {size}")
    if np.any(values < 0):
        raise ValidationError("amplitudes must be non-negative")
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        raise ValidationError("cannot normalize the zero vector")
    return AmplitudeVector(values / norm, size.bit_length() - 1)


@dataclass(frozen=True)
class AngleSchedule:
    """Rotation angles per level of the amplitude tree; level k has 2**k angles."""

    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        for k, level in enumerate(self.levels):
            if level.shape != (1 << k,):
                raise ValidationError(f"level {k} must hold {1 << k} angles, got {level.shape}")

    @property
    def num_qubits(self) -> int:
        return len(self.levels)


def angles_from_amplitudes(amps: AmplitudeVector) -> AngleSchedule:
    """Binary-tree decomposition of a non-negative unit vector into Ry angles."""
    sums = amps.values * amps.values
    stack = [sums]
    while stack[-1].size > 1:
        stack.append(stack[-1].reshape(-1, 2).sum(axis=1))
    stack.reverse()  # stack[k] now holds the 2**k subtree mass sums at depth k
    levels = []
    for k in range(amps.num_qubits):
        child = stack[k + 1]
        left = child[0::2]
        right = child[1::2]
        levels.append(2.0 * np.arctan2(np.sqrt(right), np.sqrt(left)))
    return AngleSchedule(tuple(levels))


def reconstruct_amplitudes(schedule: AngleSchedule) -> np.ndarray:
    """Amplitudes a schedule prepares; inverse of angles_from_amplitudes."""
    amps = np.array([1.0])
    for level in schedule.levels:
        half = level / 2.0
        expanded = np.empty(amps.size * 2)
        expanded[0::2] = amps * np.cos(half)
        expanded[1::2] = amps * np.sin(half)
        amps = expanded
    return amps


@dataclass(frozen=True)
class PreparedOracle:
    """A circuit fragment that loads target_state onto target_register.

    ``target_register`` lists qubits least-significant first: entry ``l``
    holds bit ``l`` of the index into ``target_state``.  Applying the
    fragment to the all-zeros state reproduces ``target_state`` on those
    qubits (identity elsewhere).
    """

    ops: tuple[GateOp, ...]
    target_register: tuple[int, ...]
    gate_count: int
    target_state: np.ndarray


def _cascade_ops(levels, register) -> list[GateOp]:
    """Multi-controlled Ry cascade for the given angle levels on ``register``.

    Level k rotates register[L-1-k] once per pattern of the k more
    significant register qubits; zero angles are identities and are skipped.
    """
    length = len(register)
    ops: list[GateOp] = []
    for k in range(length):
        target = register[length - 1 - k]
        for pattern, theta in enumerate(levels[k]):
            theta = float(theta)
            if theta == 0.0:
                continue
            controls = tuple(
                (register[length - 1 - l], (pattern >> (k - 1 - l)) & 1) for l in range(k)
            )
            if controls:
                ops.append(CRy(controls, target, theta))
            else:
                ops.append(Ry(target, theta))
    return ops


def prepare_psi(amps: AmplitudeVector, register) -> PreparedOracle:
    """Fragment loading ``amps`` onto ``register`` from the all-zeros state."""
    register = tuple(int(r) for r in register)
    if len(register) != amps.num_qubits:
        raise ValidationError(
            f"register has {len(register)} qubits but amplitudes need {amps.num_qubits}"
        )
    if len(set(register)) != len(register):
        raise ValidationError(f"register {register} contains duplicates")
    ops = _cascade_ops(angles_from_amplitudes(amps).levels, register)
    return PreparedOracle(tuple(ops), register, len(ops), amps.values.copy())


def fingerprint_joint_state(rows) -> np.ndarray:
    """The joint (index, data) state a fingerprint oracle must produce.

    Block ``j`` of the returned vector (stride ``2**n``) holds row ``j``
    scaled by ``1/sqrt(M)``; blocks for padded indices ``j >= M`` are zero.
    """
    m_rows = len(rows)
    n = rows[0].num_qubits
    m_bits = (m_rows - 1).bit_length()
    joint = np.zeros((1 << m_bits) << n)
    scale = 1.0 / math.sqrt(m_rows)
    for j, row in enumerate(rows):
        joint[j << n : (j + 1) << n] = row.values * scale
    return joint


def prepare_fingerprint(
    rows, index_register, data_register, *, construction: str = "auto"
) -> PreparedOracle:
    """Fragment loading every fingerprint row, entangled with its index.

    From all-zeros this produces the uniform superposition over the M live
    index values with row j on the data register alongside index j.  When M
    is a power of two the index part is plain Hadamards; otherwise the
    cascade itself shapes the index marginal so padded indices carry exactly
    zero probability.

    ``construction`` picks the realization: "auto" uses the two-row
    CNOT-conjugated shortcut when M == 2 and n == 1 and the generic cascade
    otherwise; "pair" and "cascade" force one or the other.
    """
    rows = list(rows)
    if not rows:
        raise ValidationError("fingerprint needs at least one row")
    n = rows[0].num_qubits
    for j, row in enumerate(rows):
        if row.num_qubits != n:
            raise ValidationError(f"row {j} has {row.num_qubits} qubits, expected {n}")
    m_rows = len(rows)
    m_bits = (m_rows - 1).bit_length()
    index_register = tuple(int(r) for r in index_register)
    data_register = tuple(int(r) for r in data_register)
    if len(index_register) != m_bits:
        raise ValidationError(
            f"index register has {len(index_register)} qubits, need {m_bits} for {m_rows} rows"
        )
    if len(data_register) != n:
        raise ValidationError(f"data register has {len(data_register)} qubits, need {n}")
    combined = data_register + index_register
    if len(set(combined)) != len(combined):
        raise ValidationError("index and data registers overlap")
    if construction not in ("auto", "cascade", "pair"):
        raise ValidationError(f"unknown construction {construction!r}")
    if construction == "pair" and not (m_rows == 2 and n == 1):
        raise ValidationError("pair construction requires exactly 2 rows of 1 qubit")

    joint = fingerprint_joint_state(rows)

    if m_rows == 1:
        inner = prepare_psi(rows[0], data_register)
        return PreparedOracle(inner.ops, combined, inner.gate_count, joint)

    use_pair = construction == "pair" or (construction == "auto" and m_rows == 2 and n == 1)
    if use_pair:
        ops = _pair_ops(rows, index_register[0], data_register[0])
    else:
        schedule = angles_from_amplitudes(amplitude_vector(joint))
        ops = []
        power_of_two = (m_rows & (m_rows - 1)) == 0
        if power_of_two:
            # uniform index marginal: the first m_bits levels collapse to
            # one Hadamard per index qubit
            for k in range(m_bits):
                ops.append(H(combined[len(combined) - 1 - k]))
            tail = _cascade_ops(schedule.levels, combined)
            ops.extend(op for op in tail if op.targets[0] in data_register)
        else:
            ops = _cascade_ops(schedule.levels, combined)
    return PreparedOracle(tuple(ops), combined, len(ops), joint)


def _pair_ops(rows, index_qubit: int, data_qubit: int) -> list[GateOp]:
    """Two-row shortcut: mean rotation plus a CNOT-conjugated half-difference.

    The index qubit (in uniform superposition) flips the sign of the
    correction, so index 0 receives theta_0 and index 1 receives theta_1.
    """
    theta0 = pair_rotation_angle(rows[0])
    theta1 = pair_rotation_angle(rows[1])
    mean = (theta0 + theta1) / 2.0
    correction = (theta0 - theta1) / 2.0
    ops = [H(index_qubit), Ry(data_qubit, mean)]
    if correction != 0.0:
        ops += [
            CNOT(index_qubit, data_qubit),
            Ry(data_qubit, correction),
            CNOT(index_qubit, data_qubit),
        ]
    return ops


def pair_rotation_angle(row: AmplitudeVector) -> float:
    """Y-rotation taking |0> to a single-qubit non-negative amplitude pair."""
    if row.num_qubits != 1:
        raise ValidationError("rotation angle shortcut needs a 1-qubit row")
    return 2.0 * math.atan2(row.values[1], row.values[0])


def embed_state(local: np.ndarray, register, num_qubits: int) -> np.ndarray:
    """Scatter a register-local vector into a full statevector (others at |0>)."""
    register = tuple(int(r) for r in register)
    if local.shape != (1 << len(register),):
        raise ValidationError(
            f"local state of {len(register)} qubits needs {1 << len(register)} entries"
        )
    out = np.zeros(1 << num_qubits, dtype=np.complex128)
    for value, amp in enumerate(local):
        if amp == 0:
            continue
        pos = 0
        for l, qubit in enumerate(register):
            if (value >> l) & 1:
                pos |= 1 << qubit
        out[pos] = amp
    return out


def rss_to_amplitudes(rss, cfg: NormalizationConfig) -> AmplitudeVector:
    """Map raw dBm readings to amplitudes: floor-shift, clip, pad, normalize.

    Entry i becomes ``max(rss_i - floor_dbm, 0)``; sentinel readings map to
    zero.  The vector is zero-padded to the next power of two and
    L2-normalized.  Raises NoSignalError when nothing survives the floor.
    """
    rss = np.asarray(rss, dtype=float)
    if rss.ndim != 1 or rss.size < 1:
        raise ValidationError(f"RSS vector must be non-empty and 1-d, got shape {rss.shape}")
    shifted = np.where(rss == cfg.sentinel_dbm, 0.0, np.maximum(rss - cfg.floor_dbm, 0.0))
    n_bits = max((int(rss.size) - 1).bit_length(), 0)
    padded = np.zeros(1 << n_bits)
    padded[: rss.size] = shifted
    norm = float(np.linalg.norm(padded))
    if norm == 0.0:
        raise NoSignalError(
            f"no reading above the floor of {cfg.floor_dbm} dBm; cannot form an amplitude vector"
        )
    return AmplitudeVector(padded / norm, n_bits)
