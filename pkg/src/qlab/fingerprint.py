"""Classical CRT fingerprinting, quantum fingerprints, and the SWAP test.

value(x) reads the bit string LSB-first: bit j (0-indexed) contributes 2^j,
so value("10110101") = 173.

Rotation scale: with an integer coefficient k and integer value difference
a - b, an angle 2*pi*k*(a - b) is a whole number of turns and every
fingerprint would collide.  All rotations here therefore carry a 1/q factor
for a prime modulus q larger than any string value: the qubit angle after
reading u is 2*pi*k*value(u)/q, and Pr(0) = cos^2(2*pi*k*(a-b)/q).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from qlab.ledger import CostReport, QueryLedger
from qlab.simulator import (DenseUnitary, StateVector, apply_gate,
                            apply_unitary, as_generator, from_amplitudes,
                            measure_all, measure_partial, new_state,
                            standard_gate)

_primes: list[int] = []


def _extend_primes(count: int) -> None:
    global _primes
    if len(_primes) >= count:
        return
    # Prime-counting bound p_m <= m (ln m + ln ln m) for m >= 6.
    m = max(count, 6)
    limit = int(m * (math.log(m) + math.log(math.log(m)))) + 10
    while True:
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(limit ** 0.5) + 1):
            if sieve[p]:
                sieve[p * p::p] = False
        found = np.flatnonzero(sieve)
        if len(found) >= count:
            _primes = [int(p) for p in found]
            return
        limit *= 2


def first_primes(count: int) -> list[int]:
    """The first `count` primes, from a deterministic sieve."""
    if count < 1:
        raise ValueError("count must be >= 1")
    _extend_primes(count)
    return _primes[:count]


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for p in range(2, int(q ** 0.5) + 1):
        if q % p == 0:
            return False
    return True


def value_of(x: str) -> int:
    """Sum of x_j * 2^j over 0-indexed bit positions j (LSB-first)."""
    if any(c not in "01" for c in x):
        raise ValueError("expected a 0/1 string")
    return int(x[::-1], 2) if x else 0


def parse_stream(stream: str) -> tuple[str, str]:
    """ASCII '0'/'1' with exactly one '2' separator; newline terminates."""
    body, _, _ = stream.partition("\n")
    if body.count("2") != 1:
        raise ValueError("stream must contain exactly one '2' separator")
    u, _, v = body.partition("2")
    if any(c not in "01" for c in u + v):
        raise ValueError("stream symbols must be '0', '1' or '2'")
    return u, v


def classical_fingerprint_stream(stream: str, eps: float, rng_seed=0
                                 ) -> tuple[bool, CostReport]:
    """Compare the two halves of `stream` modulo one random small prime.

    The prime is drawn uniformly from the first ceil(n/eps) primes; the
    verdict hu == hv never errs on equal strings and errs on unequal ones
    with probability <= eps.  The streaming recurrence hu <- (2 hu + x) mod p
    reads MSB-first, i.e. hu = value(reverse(u)) mod p; equality semantics
    are unaffected.  The memory-bits flag gauges the working registers
    (p, hu, hv), O(log n + log(1/eps)) bits.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    u, v = parse_stream(stream)
    n = max(len(u), len(v), 1)
    rng = as_generator(rng_seed)
    ledger = QueryLedger()
    t0 = time.perf_counter_ns()
    primes = first_primes(math.ceil(n / eps))
    p = primes[int(rng.integers(len(primes)))]
    hu = 0
    for c in u:
        ledger.charge("fpstream")
        hu = (hu * 2 + int(c)) % p
    hv = 0
    for c in v:
        ledger.charge("fpstream")
        hv = (hv * 2 + int(c)) % p
    bits = 3 * max(1, p.bit_length())
    rep = CostReport.from_delta(ledger, (0, {}), t0,
                                flags=[f"memory-bits:{bits}"])
    return hu == hv, rep


@dataclass
class FingerprintParams:
    q: int
    coefficients: list

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError("modulus must be prime")
        self.coefficients = [int(k) for k in self.coefficients]
        t = len(self.coefficients)
        if t < 1 or t & (t - 1):
            raise ValueError("coefficient count must be a power of two")
        if any(not 1 <= k <= self.q - 1 for k in self.coefficients):
            raise ValueError("coefficients must lie in [1, q-1]")

    @property
    def t(self) -> int:
        return len(self.coefficients)

    @classmethod
    def draw(cls, t: int, q: int, rng_seed=0) -> "FingerprintParams":
        """t coefficients uniform in [1, q-1]; explicit lists can be passed
        to the constructor instead (reproducing published sets)."""
        rng = as_generator(rng_seed)
        return cls(q, [int(k) for k in rng.integers(1, q, size=t)])


def _check_modulus(q: int, u: str, v: str) -> None:
    if q <= max(value_of(u), value_of(v)):
        raise ValueError("modulus must exceed both string values")


def quantum_fingerprint_single(u: str, v: str, k: int, q: int, rng_seed=0
                               ) -> tuple[int, float]:
    """One-qubit fingerprint: +2 pi k 2^j / q per 1-bit of u, the negative
    per 1-bit of v; returns (measured bit, analytic Pr(0))."""
    _check_modulus(q, u, v)
    if not 1 <= k <= q - 1:
        raise ValueError("coefficient must lie in [1, q-1]")
    s = new_state(1)
    for bits, sign in ((u, 1.0), (v, -1.0)):
        for j, c in enumerate(bits):
            if c == "1":
                gamma = sign * 2.0 * math.pi * k * (1 << j) / q
                s = apply_gate(s, standard_gate("Ry", 2.0 * gamma), 0)
    diff = value_of(u) - value_of(v)
    pr0 = math.cos(2.0 * math.pi * k * diff / q) ** 2
    outcome, _ = measure_all(s, rng_seed)
    return outcome, pr0


def _multi_rotation(coeffs, q: int, j: int, sign: float) -> DenseUnitary:
    """Block-diagonal over |i>: Ry(2 * sign * 2 pi k_i 2^j / q) on the target."""
    t = len(coeffs)
    m = np.zeros((2 * t, 2 * t), dtype=np.complex128)
    for i, k in enumerate(coeffs):
        gamma = sign * 2.0 * math.pi * k * (1 << j) / q
        c, s = math.cos(gamma), math.sin(gamma)
        m[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, -s], [s, c]]
    return DenseUnitary(m)


def fingerprint_state(u: str, v: str, params: FingerprintParams) -> StateVector:
    """The (log2 t + 1)-qubit state before measurement: H on the index
    register, one controlled rotation per 1-bit of u and (negated) of v,
    H on the index register again."""
    _check_modulus(params.q, u, v)
    t = params.t
    m = t.bit_length() - 1
    s = new_state(m + 1)
    h = standard_gate("H")
    for qb in range(m):
        s = apply_gate(s, h, qb)
    all_qubits = list(range(m + 1))
    for bits, sign in ((u, 1.0), (v, -1.0)):
        for j, c in enumerate(bits):
            if c == "1":
                s = apply_unitary(s, _multi_rotation(params.coefficients,
                                                     params.q, j, sign),
                                  all_qubits)
    for qb in range(m):
        s = apply_gate(s, h, qb)
    return s


def fingerprint_error_probability(params: FingerprintParams, a: int, b: int
                                  ) -> float:
    """Closed-form Pr(all-zeros) = (1/t^2) (sum_i cos(2 pi k_i (a-b)/q))^2."""
    acc = sum(math.cos(2.0 * math.pi * k * (a - b) / params.q)
              for k in params.coefficients)
    return (acc / params.t) ** 2


def quantum_fingerprint_multi(u: str, v: str, params: FingerprintParams,
                              rng_seed=0) -> tuple[bool, float]:
    """All-zeros outcome <=> "equal"; returns (equal?, analytic p_error)."""
    if params.t == 1:
        outcome, _ = quantum_fingerprint_single(u, v, params.coefficients[0],
                                                params.q, rng_seed)
        equal = outcome == 0
    else:
        s = fingerprint_state(u, v, params)
        outcome, _ = measure_all(s, rng_seed)
        equal = outcome == 0
    p_error = fingerprint_error_probability(params, value_of(u), value_of(v))
    return equal, p_error


_CSWAP = None


def _cswap() -> DenseUnitary:
    """SWAP on qubits (1, 2) controlled by qubit 0 (the MSB)."""
    global _CSWAP
    if _CSWAP is None:
        m = np.eye(8, dtype=np.complex128)
        m[[5, 6]] = m[[6, 5]]
        _CSWAP = DenseUnitary(m)
    return _CSWAP


def swap_test(a: StateVector, b: StateVector, reps: int = 1, rng_seed=0
              ) -> tuple[bool, float]:
    """H - controlled-SWAP - H on an ancilla; Pr(0) = 1/2 + |<b|a>|^2 / 2.

    Verdict "equal" iff all `reps` ancilla measurements give 0; returns
    (verdict, observed Pr(0))."""
    if a.num_qubits != 1 or b.num_qubits != 1:
        raise ValueError("swap_test compares single-qubit states")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rng = as_generator(rng_seed)
    amps = np.kron(np.array([1.0, 0.0], dtype=np.complex128),
                   np.kron(a.amps, b.amps))
    h = standard_gate("H")
    zeros = 0
    for _ in range(reps):
        s = StateVector(3, amps.copy())
        s = apply_gate(s, h, 0)
        s = apply_unitary(s, _cswap(), [0, 1, 2])
        s = apply_gate(s, h, 0)
        bits, _ = measure_partial(s, [0], rng)
        zeros += bits[0] == 0
    return zeros == reps, zeros / reps


def swap_test_probability(a: StateVector, b: StateVector) -> float:
    overlap = np.vdot(a.amps, b.amps)
    return 0.5 + 0.5 * abs(overlap) ** 2
