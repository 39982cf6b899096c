"""Minimal gate-level statevector simulator.

Conventions used throughout the package:

* Qubit ``k`` is bit ``k`` of the basis-state index (least significant
  first), so basis state ``|b_{q-1} ... b_1 b_0>`` lives at array position
  ``sum_k b_k * 2**k``.
* Gates never mutate their input; public operations return new states.
* All randomness flows through explicit seeds (see :mod:`qsloc.rng`).

The gate set is deliberately small: H, X, Ry, and their controlled forms
(CNOT, multi-controlled Ry with per-control polarity, controlled SWAP).
That is everything the positioning circuits need.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .rng import Seed, rng_from

DEFAULT_MAX_QUBITS = 20
MAX_QUBITS_ENV = "QSL_MAX_QUBITS"

_GATE_TARGETS = {"h": 1, "x": 1, "ry": 1, "swap": 2}

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_PAULIS = (_PAULI_X, _PAULI_Y, _PAULI_Z)


def max_qubits() -> int:
    """Capacity cap on statevector size; QSL_MAX_QUBITS overrides the default of 20."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{MAX_QUBITS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValidationError(f"{MAX_QUBITS_ENV} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class GateOp:
    """A single gate application.

    ``controls`` holds ``(qubit, polarity)`` pairs: polarity 1 fires the gate
    when the control reads 1, polarity 0 when it reads 0.  ``theta`` is set
    only for rotations.
    """

    name: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    theta: float | None = None

    def __post_init__(self):
        if self.name not in _GATE_TARGETS:
            raise ValidationError(f"unknown gate {self.name!r}")
        if len(self.targets) != _GATE_TARGETS[self.name]:
            raise ValidationError(
                f"gate {self.name!r} takes {_GATE_TARGETS[self.name]} target(s), got {self.targets}"
            )
        if (self.theta is not None) != (self.name == "ry"):
            raise ValidationError(f"gate {self.name!r} and theta={self.theta} do not go together")
        seen = set()
        for q in self.qubits:
            if not isinstance(q, (int, np.integer)) or q < 0:
                raise ValidationError(f"qubit indices must be non-negative integers, got {q!r}")
            if q in seen:
                raise ValidationError(f"gate {self.name!r} uses qubit {q} twice")
            seen.add(q)
        for _, pol in self.controls:
            if pol not in (0, 1):
                raise ValidationError(f"control polarity must be 0 or 1, got {pol!r}")

    @property
    def qubits(self) -> tuple[int, ...]:
        """All qubits the gate touches, controls first."""
        return tuple(q for q, _ in self.controls) + self.targets


def H(target: int) -> GateOp:
    return GateOp("h", (int(target),))


def X(target: int) -> GateOp:
    return GateOp("x", (int(target),))


def Ry(target: int, theta: float) -> GateOp:
    return GateOp("ry", (int(target),), theta=float(theta))


def CNOT(control: int, target: int) -> GateOp:
    return GateOp("x", (int(target),), controls=((int(control), 1),))


def CRy(controls, target: int, theta: float) -> GateOp:
    ctl = tuple((int(q), int(p)) for q, p in controls)
    return GateOp("ry", (int(target),), controls=ctl, theta=float(theta))


def CSWAP(control: int, a: int, b: int) -> GateOp:
    return GateOp("swap", (int(a), int(b)), controls=((int(control), 1),))


@dataclass(frozen=True)
class Circuit:
    """An ordered list of gates on a fixed-width register plus the qubits to measure."""

    num_qubits: int
    ops: tuple[GateOp, ...]
    measured_qubits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValidationError(f"circuit needs at least one qubit, got {self.num_qubits}")
        for op in self.ops:
            for q in op.qubits:
                if q >= self.num_qubits:
                    raise ValidationError(
                        f"gate {op.name!r} touches qubit {q} but circuit has {self.num_qubits}"
                    )
        if len(set(self.measured_qubits)) != len(self.measured_qubits):
            raise ValidationError("measured_qubits contains duplicates")
        for q in self.measured_qubits:
            if q < 0 or q >= self.num_qubits:
                raise ValidationError(f"measured qubit {q} out of range")


@dataclass(frozen=True)
class NoiseModel:
    """Parametric machine-quality stand-in.

    ``depolarizing_prob`` is applied independently to each qubit a gate
    touches, after the gate: with that probability a uniformly random Pauli
    is inserted.  ``readout_flip_prob`` flips each measured bit
    independently at sampling time.
    """

    depolarizing_prob: float = 0.0
    readout_flip_prob: float = 0.0

    def __post_init__(self):
        for label, p in (
            ("depolarizing_prob", self.depolarizing_prob),
            ("readout_flip_prob", self.readout_flip_prob),
        ):
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{label} must lie in [0, 1], got {p}")


@dataclass
class StateVector:
    """Complex amplitudes over 2**num_qubits basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValidationError(
                f"state over {self.num_qubits} qubits needs {1 << self.num_qubits} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return (a.real * a.real + a.imag * a.imag)


def new_zero_state(num_qubits: int, *, cap: int | None = None) -> StateVector:
    """The all-zeros product state on ``num_qubits`` qubits."""
    cap = max_qubits() if cap is None else cap
    if num_qubits < 1:
        raise CapacityError(f"qubit count must be >= 1, got {num_qubits}")
    if num_qubits > cap:
        raise CapacityError(
            f"{num_qubits} qubits exceeds the cap of {cap} "
            f"(set {MAX_QUBITS_ENV} to raise it)"
        )
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def _check_op(op: GateOp, num_qubits: int) -> None:
    for q in op.qubits:
        if q >= num_qubits:
            raise ValidationError(f"gate {op.name!r} touches qubit {q} of {num_qubits}")


def _control_selector(q: int, controls) -> list:
    sel = [slice(None)] * q
    for cq, pol in controls:
        # slice keeps the axis so target axis numbers stay stable
        sel[q - 1 - cq] = slice(pol, pol + 1)
    return sel


def _apply_2x2_inplace(arr: np.ndarray, q: int, target: int, mat: np.ndarray, controls=()) -> None:
    view = arr.reshape((2,) * q)
    sel = _control_selector(q, controls)
    ax = q - 1 - target
    sel0 = list(sel)
    sel0[ax] = slice(0, 1)
    sel1 = list(sel)
    sel1[ax] = slice(1, 2)
    s0 = view[tuple(sel0)]
    s1 = view[tuple(sel1)]
    n0 = mat[0, 0] * s0 + mat[0, 1] * s1
    n1 = mat[1, 0] * s0 + mat[1, 1] * s1
    view[tuple(sel0)] = n0
    view[tuple(sel1)] = n1


def _apply_op_inplace(arr: np.ndarray, q: int, op: GateOp) -> None:
    view = arr.reshape((2,) * q)
    sel = tuple(_control_selector(q, op.controls))
    if op.name == "x":
        t = op.targets[0]
        view[sel] = np.flip(view[sel], axis=q - 1 - t).copy()
    elif op.name == "swap":
        a, b = op.targets
        view[sel] = np.swapaxes(view[sel], q - 1 - a, q - 1 - b).copy()
    elif op.name == "h":
        mat = np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]])
        _apply_2x2_inplace(arr, q, op.targets[0], mat, op.controls)
    elif op.name == "ry":
        c = math.cos(op.theta / 2.0)
        s = math.sin(op.theta / 2.0)
        mat = np.array([[c, -s], [s, c]])
        _apply_2x2_inplace(arr, q, op.targets[0], mat, op.controls)
    else:  # pragma: no cover - rejected at construction
        raise ValidationError(f"unknown gate {op.name!r}")


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Return ``op`` applied to ``state``; the input is left untouched."""
    _check_op(op, state.num_qubits)
    arr = state.amplitudes.copy()
    _apply_op_inplace(arr, state.num_qubits, op)
    return StateVector(state.num_qubits, arr)


def run_circuit(circ: Circuit, noise: NoiseModel | None = None, seed: Seed = 0) -> StateVector:
    """Run all gates and return the final statevector (before any measurement).

    With a noise model, one stochastic depolarizing trajectory is sampled:
    after each gate, each touched qubit independently suffers a uniformly
    random Pauli with the configured probability.  The trajectory is fully
    determined by ``seed``.
    """
    state = new_zero_state(circ.num_qubits)
    arr = state.amplitudes
    q = circ.num_qubits
    depol = noise.depolarizing_prob if noise is not None else 0.0
    rng = rng_from(seed) if depol > 0.0 else None
    for op in circ.ops:
        _apply_op_inplace(arr, q, op)
        if rng is not None:
            for touched in sorted(op.qubits):
                if rng.random() < depol:
                    pauli = _PAULIS[rng.integers(3)]
                    _apply_2x2_inplace(arr, q, touched, pauli)
    return StateVector(q, arr)


def marginal_distribution(state: StateVector, qubits) -> np.ndarray:
    """Probability table over the listed qubits, tracing out the rest.

    Outcome ``o`` has bit ``k`` equal to the measured value of ``qubits[k]``,
    i.e. the first listed qubit is the least significant bit of the outcome.
    """
    qubits = [int(x) for x in qubits]
    q = state.num_qubits
    if not qubits:
        raise ValidationError("need at least one qubit to marginalize onto")
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"qubit list {qubits} contains duplicates")
    for k in qubits:
        if k < 0 or k >= q:
            raise ValidationError(f"qubit {k} out of range for {q}-qubit state")
    probs = state.probabilities().reshape((2,) * q)
    keep_axes = sorted(q - 1 - k for k in qubits)
    other_axes = tuple(ax for ax in range(q) if ax not in keep_axes)
    marg = probs.sum(axis=other_axes) if other_axes else probs
    # axis j of marg currently holds the qubit with the j-th largest index;
    # reorder so flattening makes qubits[k] bit k of the outcome.
    axis_qubit = sorted(qubits, reverse=True)
    perm = [axis_qubit.index(qb) for qb in reversed(qubits)]
    return marg.transpose(perm).reshape(-1)


def state_to_json(state: StateVector) -> str:
    """Debug dump: basis index (as string) to [re, im], nonzero entries only."""
    entries = {
        str(i): [float(a.real), float(a.imag)]
        for i, a in enumerate(state.amplitudes)
        if a != 0
    }
    return json.dumps({"num_qubits": state.num_qubits, "amplitudes": entries}, sort_keys=True)


def state_from_json(text: str) -> StateVector:
    data = json.loads(text)
    q = int(data["num_qubits"])
    amps = np.zeros(1 << q, dtype=np.complex128)
    for key, (re, im) in data["amplitudes"].items():
        amps[int(key)] = complex(re, im)
    return StateVector(q, amps)
