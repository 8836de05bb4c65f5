"""Queried boolean functions with exact accounting, oracle unitaries, noise.

One application of the oracle unitary to the full superposed register counts
as ONE query; classical evaluation charges one per evaluated index.  Diffusion
is free.  `peek` is the uncharged simulator-privileged view used by the
analytic emulator; algorithms must never answer through it.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from qlab.ledger import QueryLedger
from qlab.simulator import DenseUnitary, StateVector, apply_unitary, as_generator


class BooleanOracle:
    """f: {0..n-1} -> {0,1} with a query ledger.

    `evaluate` must be uncharged (pure) for flat oracles; `query` then adds
    `cost` to the ledger.  Derived oracles whose evaluation performs real
    charged sub-queries are built with cost=0 and an uncharged `peek_fn`.
    """

    def __init__(self, n: int, evaluate: Callable[[int], int],
                 ledger: QueryLedger | None = None, label: str = "oracle",
                 cost: int = 1, peek_fn: Callable[[int], int] | None = None,
                 marked_hint: Callable[[int, int], list[int]] | None = None):
        self.n = n
        self._evaluate = evaluate
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.label = label
        self.cost = cost
        self._peek = peek_fn if peek_fn is not None else evaluate
        self._marked_hint = marked_hint

    def query(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise ValueError(f"index {i} out of domain [0, {self.n})")
        if self.cost:
            self.ledger.charge(self.label, self.cost)
        return int(self._evaluate(i))

    def peek(self, i: int) -> int:
        return int(self._peek(i))

    def charge_application(self) -> None:
        """One superposed application of the oracle unitary."""
        self.ledger.charge(self.label, 1)

    def marked_in(self, lo: int, hi: int) -> list[int]:
        """Uncharged scan for marked indices in [lo, hi] (simulator privilege)."""
        if self._marked_hint is not None:
            return self._marked_hint(lo, hi)
        return [i for i in range(lo, hi + 1) if self._peek(i)]

    def shifted(self, offset: int, size: int) -> "BooleanOracle":
        """View f(offset + i) on [0, size); shares the ledger and label."""
        hint = None
        if self._marked_hint is not None:
            hint = lambda lo, hi: [j - offset for j in self._marked_hint(lo + offset, hi + offset)]
        return BooleanOracle(
            size, lambda i: self._evaluate(offset + i), self.ledger, self.label,
            cost=self.cost, peek_fn=lambda i: self._peek(offset + i), marked_hint=hint)


def oracle_from_bits(bits, ledger=None, label="oracle") -> BooleanOracle:
    arr = np.asarray([int(b) for b in bits], dtype=np.int8)

    def hint(lo, hi):
        return [int(i) for i in np.flatnonzero(arr[lo:hi + 1]) + lo]

    return BooleanOracle(len(arr), lambda i: int(arr[i]), ledger, label, marked_hint=hint)


def oracle_from_file(path, ledger=None, label="oracle") -> BooleanOracle:
    with open(path) as fh:
        text = "".join(fh.read().split())
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"{path}: expected a file of 0/1 characters")
    return oracle_from_bits(text, ledger, label)


def oracle_from_generator(spec: str, n: int, ledger=None, label="oracle") -> BooleanOracle:
    """Named families: "single-marked:k", "marked-set:i,j,...", "none", "all"."""
    if spec == "none":
        return oracle_from_bits([0] * n, ledger, label)
    if spec == "all":
        return oracle_from_bits([1] * n, ledger, label)
    kind, _, arg = spec.partition(":")
    if kind == "single-marked":
        k = int(arg)
        if not 0 <= k < n:
            raise ValueError("marked index out of range")
        bits = [0] * n
        bits[k] = 1
        return oracle_from_bits(bits, ledger, label)
    if kind == "marked-set":
        bits = [0] * n
        for tok in arg.split(","):
            i = int(tok)
            if not 0 <= i < n:
                raise ValueError("marked index out of range")
            bits[i] = 1
        return oracle_from_bits(bits, ledger, label)
    raise ValueError(f"unknown oracle generator {spec!r}")


class OracleUnitary:
    """An oracle as a unitary; each .apply charges one query."""

    def __init__(self, f: BooleanOracle, unitary: DenseUnitary):
        self.f = f
        self.unitary = unitary

    def apply(self, s: StateVector, qubits) -> StateVector:
        self.f.charge_application()
        return apply_unitary(s, self.unitary, qubits)


def phase_oracle(f: BooleanOracle, dim: int | None = None) -> OracleUnitary:
    """diag((-1)^{f(i)}) over a register of dim >= n; indices >= n untouched."""
    if dim is None:
        dim = 1 << max(1, (f.n - 1).bit_length())
    if dim < f.n or dim & (dim - 1):
        raise ValueError("dim must be a power of two >= n")
    diag = np.ones(dim, dtype=np.complex128)
    for i in f.marked_in(0, f.n - 1):
        diag[i] = -1.0
    return OracleUnitary(f, DenseUnitary(np.diag(diag)))


def xor_oracle(f: BooleanOracle, dim: int | None = None) -> OracleUnitary:
    """|i>|b> -> |i>|b xor f(i)> with one target qubit appended (the LSB)."""
    if dim is None:
        dim = 1 << max(1, (f.n - 1).bit_length())
    if dim < f.n or dim & (dim - 1):
        raise ValueError("dim must be a power of two >= n")
    m = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    marked = set(f.marked_in(0, f.n - 1))
    for i in range(dim):
        v = 1 if i in marked else 0
        for b in (0, 1):
            m[2 * i + (b ^ v), 2 * i + b] = 1.0
    return OracleUnitary(f, DenseUnitary(m))


class NoisyOracle:
    """Bounded-error wrapper: one-sided never flips a 0-answer of f."""

    def __init__(self, inner: BooleanOracle, eps: float,
                 sidedness: str = "one-sided", rng_seed=0):
        if not 0.0 < eps < 1.0:
            raise ValueError("eps must be in (0, 1)")
        if sidedness not in ("one-sided", "two-sided"):
            raise ValueError(f"unknown sidedness {sidedness!r}")
        self.inner = inner
        self.eps = eps
        self.sidedness = sidedness
        self.rng = as_generator(rng_seed)


def noisy_query(g: NoisyOracle, i: int) -> int:
    truth = g.inner.query(i)
    if g.sidedness == "one-sided":
        if truth == 0:
            return 0
        return 1 if g.rng.random() < g.eps else 0
    return truth ^ (1 if g.rng.random() < g.eps else 0)


def majority_boost(g: NoisyOracle, i: int, reps: int) -> int:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    answers = [noisy_query(g, i) for _ in range(reps)]
    if g.sidedness == "one-sided":
        return 1 if any(answers) else 0
    return 1 if 2 * sum(answers) > reps else 0
