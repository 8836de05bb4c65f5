"""Exact state-vector simulator.

Conventions (pinned by tests):
  * qubit 0 is the most significant bit of the basis index, so the ket
    |q0 q1 ... q_{n-1}> reads left to right;
  * double-precision complex amplitudes, absolute tolerance 1e-9;
  * measurement samples by inverse CDF over cumulative |amp|^2 using a seeded
    numpy Generator(PCG64) -- replaying a seed replays the transcript.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from typing import Iterable, Sequence

import numpy as np

from qlab._kernels import apply_1q as _apply_1q
from qlab._kernels import apply_ctrl_1q as _apply_ctrl_1q

ATOL = 1e-9

_SQRT2 = math.sqrt(2.0)


class ResourceError(RuntimeError):
    """Raised when a request would exceed the configured memory budget."""


def max_qubits() -> int:
    return int(os.environ.get("QLAB_MAX_QUBITS", "24"))


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _check_unitary(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    if dev > ATOL:
        raise ValueError(f"matrix is not unitary: max deviation {dev:.3e}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix has non-finite entries")
    return m


class Gate1Q:
    """A 2x2 unitary; rejected at construction if ||U+U - I||_max > 1e-9."""

    def __init__(self, matrix):
        self.matrix = _check_unitary(matrix)
        if self.matrix.shape != (2, 2):
            raise ValueError("Gate1Q must be 2x2")


class DenseUnitary:
    """A d x d unitary with d a power of two."""

    def __init__(self, matrix):
        self.matrix = _check_unitary(matrix)
        d = self.matrix.shape[0]
        if d < 2 or d & (d - 1):
            raise ValueError(f"dimension {d} is not a power of two")
        self.num_qubits = d.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def standard_gate(name: str, angle: float | None = None) -> Gate1Q:
    """Named single-qubit gates; Rx/Ry/Rz require an angle, the rest reject one."""
    rotations = {"Rx", "Ry", "Rz"}
    if name in rotations:
        if angle is None:
            raise ValueError(f"{name} requires an angle")
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        if name == "Rx":
            return Gate1Q([[c, -1j * s], [-1j * s, c]])
        if name == "Ry":
            return Gate1Q([[c, -s], [s, c]])
        return Gate1Q([[cmath.exp(-1j * angle / 2.0), 0], [0, cmath.exp(1j * angle / 2.0)]])
    if angle is not None:
        raise ValueError(f"{name} takes no angle")
    fixed = {
        "I": [[1, 0], [0, 1]],
        "X": [[0, 1], [1, 0]],
        "S": [[1, 0], [0, 1j]],
        "T": [[1, 0], [0, cmath.exp(1j * math.pi / 4.0)]],
        "Z": [[1, 0], [0, -1]],
        "H": [[1 / _SQRT2, 1 / _SQRT2], [1 / _SQRT2, -1 / _SQRT2]],
    }
    if name not in fixed:
        raise ValueError(f"unknown gate {name!r}")
    return Gate1Q(fixed[name])


def phase_gate(theta: float) -> Gate1Q:
    """diag(1, e^{i theta}); used by the inverse QFT."""
    return Gate1Q([[1, 0], [0, cmath.exp(1j * theta)]])


class StateVector:
    """2^num_qubits complex amplitudes; all apply_* methods return new states."""

    def __init__(self, num_qubits: int, amps: np.ndarray):
        self.num_qubits = num_qubits
        self.amps = amps

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def to_json(self) -> str:
        return json.dumps([[a.real, a.imag] for a in self.amps])

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        pairs = json.loads(text)
        amps = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
        d = len(amps)
        if d < 2 or d & (d - 1):
            raise ValueError("amplitude count is not a power of two")
        return cls(d.bit_length() - 1, amps)


def new_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if num_qubits > max_qubits():
        raise ResourceError(f"{num_qubits} qubits exceeds the cap of {max_qubits()}")
    if not 0 <= basis_index < (1 << num_qubits):
        raise ValueError(f"basis_index {basis_index} out of range")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def from_amplitudes(amps: Sequence[complex]) -> StateVector:
    amps = np.asarray(amps, dtype=np.complex128)
    d = len(amps)
    if d < 2 or d & (d - 1):
        raise ValueError("amplitude count is not a power of two")
    n2 = float(np.vdot(amps, amps).real)
    if abs(n2 - 1.0) > 1e-7:
        raise ValueError("amplitudes are not normalized")
    return StateVector(d.bit_length() - 1, amps.copy())


def apply_gate(s: StateVector, g: Gate1Q, target: int) -> StateVector:
    if not 0 <= target < s.num_qubits:
        raise ValueError(f"bad target qubit {target}")
    out = s.amps.copy()
    _apply_1q(out, g.matrix, target, s.num_qubits)
    return StateVector(s.num_qubits, out)


def apply_controlled(s: StateVector, g: Gate1Q, controls: Iterable[int], target: int) -> StateVector:
    controls = list(controls)
    if target in controls or len(set(controls)) != len(controls):
        raise ValueError("controls must be distinct and disjoint from target")
    for q in controls + [target]:
        if not 0 <= q < s.num_qubits:
            raise ValueError(f"bad qubit index {q}")
    cmask = 0
    for q in controls:
        cmask |= 1 << (s.num_qubits - 1 - q)
    out = s.amps.copy()
    _apply_ctrl_1q(out, g.matrix, target, s.num_qubits, cmask)
    return StateVector(s.num_qubits, out)


def apply_unitary(s: StateVector, u: DenseUnitary, qubit_subset: Sequence[int]) -> StateVector:
    targets = list(qubit_subset)
    k = len(targets)
    if u.dim != (1 << k):
        raise ValueError("unitary dimension does not match qubit subset")
    if len(set(targets)) != k or any(not 0 <= q < s.num_qubits for q in targets):
        raise ValueError("bad qubit subset")
    n = s.num_qubits
    psi = s.amps.reshape([2] * n)
    perm = [q for q in range(n) if q not in targets] + targets
    psi = np.transpose(psi, perm)
    shape = psi.shape
    psi = psi.reshape(-1, 1 << k)
    psi = psi @ u.matrix.T
    psi = psi.reshape(shape)
    inv = np.argsort(perm)
    psi = np.transpose(psi, inv)
    return StateVector(n, psi.reshape(-1).copy())


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    r = rng.random() * cdf[-1]
    return int(np.searchsorted(cdf, r, side="right").clip(0, len(probs) - 1))


def measure_all(s: StateVector, rng_seed) -> tuple[int, StateVector]:
    rng = as_generator(rng_seed)
    idx = _sample_index(s.probabilities(), rng)
    return idx, new_state(s.num_qubits, idx)


def measure_partial(s: StateVector, qubits: Sequence[int], rng_seed) -> tuple[list[int], StateVector]:
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError("cannot measure the same qubit twice in one call")
    if any(not 0 <= q < s.num_qubits for q in qubits):
        raise ValueError("bad qubit index")
    rng = as_generator(rng_seed)
    n = s.num_qubits
    idx = np.arange(1 << n)
    keys = np.zeros(1 << n, dtype=np.int64)
    for pos, q in enumerate(qubits):
        bit = (idx >> (n - 1 - q)) & 1
        keys |= bit << (len(qubits) - 1 - pos)
    probs = s.probabilities()
    marginal = np.bincount(keys, weights=probs, minlength=1 << len(qubits))
    outcome = _sample_index(marginal, rng)
    mask = keys == outcome
    residual = np.where(mask, s.amps, 0.0)
    residual = residual / math.sqrt(marginal[outcome])
    bits = [(outcome >> (len(qubits) - 1 - pos)) & 1 for pos in range(len(qubits))]
    return bits, StateVector(n, residual)


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.num_qubits != b.num_qubits:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(a.amps, b.amps))


def _controlled_block(u_power: np.ndarray) -> DenseUnitary:
    d = u_power.shape[0]
    block = np.eye(2 * d, dtype=np.complex128)
    block[d:, d:] = u_power
    return DenseUnitary(block)


def _inverse_qft(s: StateVector, qubits: Sequence[int]) -> StateVector:
    """Textbook inverse QFT on the given qubits (qubit order: MSB first)."""
    m = len(qubits)
    # Reverse the forward QFT: undo in opposite gate order with conjugate phases.
    for j in range(m // 2):
        a, b = qubits[j], qubits[m - 1 - j]
        swap = DenseUnitary(np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                                      [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128))
        s = apply_unitary(s, swap, [a, b])
    h = standard_gate("H")
    for j in reversed(range(m)):
        for k in reversed(range(j + 1, m)):
            s = apply_controlled(s, phase_gate(-math.pi / (1 << (k - j))), [qubits[k]], qubits[j])
        s = apply_gate(s, h, qubits[j])
    return s


def phase_estimate(u: DenseUnitary, eigen_input: StateVector, precision_bits: int, rng_seed) -> float:
    """Estimate phi where U|psi> = e^{2 pi i phi}|psi>, via controlled powers + inverse QFT."""
    if precision_bits < 1:
        raise ValueError("precision_bits must be >= 1")
    k = u.num_qubits
    if eigen_input.num_qubits != k:
        raise ValueError("eigen_input dimension does not match unitary")
    total = precision_bits + k
    if total > max_qubits():
        raise ResourceError(
            f"phase estimation needs {total} qubits, cap is {max_qubits()}")
    amps = np.zeros(1 << total, dtype=np.complex128)
    amps.reshape(1 << precision_bits, 1 << k)[0, :] = eigen_input.amps
    s = StateVector(total, amps)
    h = standard_gate("H")
    for j in range(precision_bits):
        s = apply_gate(s, h, j)
    targets = list(range(precision_bits, total))
    u_power = u.matrix
    # Ancilla j controls U^{2^{precision_bits-1-j}}; iterate from the LSB up.
    for j in reversed(range(precision_bits)):
        s = apply_unitary(s, _controlled_block(u_power), [j] + targets)
        u_power = u_power @ u_power
    s = _inverse_qft(s, list(range(precision_bits)))
    bits, _ = measure_partial(s, list(range(precision_bits)), rng_seed)
    y = 0
    for b in bits:
        y = (y << 1) | b
    return y / (1 << precision_bits)
