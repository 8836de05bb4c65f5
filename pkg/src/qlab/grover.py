"""Grover iterate and schedules on the state-vector, plus closed-form models.

Non-power-of-two search spaces are embedded in the next power of two: dead
indices start with zero amplitude, are never marked, and the diffusion is the
n-dimensional reflection acting as a block (identity on dead indices), so the
textbook two-amplitude analysis stays exact on live indices.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from qlab.ledger import CostReport, QueryLedger
from qlab.oracles import BooleanOracle
from qlab.simulator import DenseUnitary, as_generator

STATEVECTOR_LIMIT = 1 << 20


@dataclass
class GroverPlan:
    n: int
    t: int | None
    theta: float
    L: int


def plan_known_t(n: int, t: int) -> GroverPlan:
    if not 1 <= t <= n:
        raise ValueError("need 1 <= t <= n")
    theta = math.asin(math.sqrt(t / n))
    L = max(0, round(math.pi / (4.0 * theta) - 0.5))
    return GroverPlan(n, t, theta, L)


def analytic_success(n: int, t: int, L: int) -> float:
    if not 1 <= t <= n or L < 0:
        raise ValueError("need 1 <= t <= n and L >= 0")
    return math.sin((2 * L + 1) * math.asin(math.sqrt(t / n))) ** 2


def two_amplitude_trace(n: int, t: int, iters: int) -> list[tuple[float, float]]:
    """(B_j, G_j) per iteration j = 0..iters: unmarked/marked amplitudes."""
    theta = math.asin(math.sqrt(t / n))
    out = []
    for j in range(iters + 1):
        g = math.sin((2 * j + 1) * theta) / math.sqrt(t)
        b = (math.cos((2 * j + 1) * theta) / math.sqrt(n - t)) if t < n else 0.0
        out.append((b, g))
    return out


def unknown_t_stages(n: int, t_floor: int = 1) -> list[int]:
    """Iteration counts per stage: 2^{j-1} for j = 1..ceil(log2(pi/4 sqrt(n)))+1.

    A promised lower bound t_floor on the marked count caps the schedule at
    the stages useful for t >= t_floor, i.e. iterations up to ~ sqrt(n/t_floor).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= t_floor <= n:
        raise ValueError("need 1 <= t_floor <= n")
    top = math.pi / 4.0 * math.sqrt(n / t_floor)
    j_max = max(0, math.ceil(math.log2(top)) if top > 1 else 0) + 1
    return [1 << (j - 1) for j in range(1, j_max + 1)]


def staged_charge(n: int) -> int:
    """Exact charge of a fully failed unknown-t run: iterations + one
    verification per stage."""
    stages = unknown_t_stages(n)
    return sum(stages) + len(stages)


def diffusion(n: int) -> DenseUnitary:
    """Reflection about the uniform state: diagonal 2/n - 1, off-diagonal 2/n.

    For non-power-of-two n the n x n reflection is embedded as a block in the
    next power of two with identity on the dead indices.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    dim = 1 << max(1, (n - 1).bit_length())
    m = np.eye(dim, dtype=np.complex128)
    m[:n, :n] = np.full((n, n), 2.0 / n) - np.eye(n)
    return DenseUnitary(m)


def _uniform_live(n: int) -> np.ndarray:
    dim = 1 << max(1, (n - 1).bit_length())
    amps = np.zeros(dim, dtype=np.complex128)
    amps[:n] = 1.0 / math.sqrt(n)
    return amps


def _grover_iterations(amps: np.ndarray, n: int, marked: np.ndarray,
                       f: BooleanOracle, iters: int) -> None:
    """Run `iters` rounds of (phase oracle; diffusion) in place, charging one
    query per oracle application."""
    for _ in range(iters):
        f.charge_application()
        amps[marked] *= -1.0
        live = amps[:n]
        live[:] = 2.0 * live.mean() - live


def _measure_and_verify(amps: np.ndarray, f: BooleanOracle,
                        rng: np.random.Generator) -> int | None:
    probs = np.abs(amps) ** 2
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right").clip(0, len(probs) - 1))
    if idx < f.n and f.query(idx):
        return idx
    return None


def grover_known_t(f: BooleanOracle, n: int | None = None, t: int | None = None,
                   rng_seed=0) -> tuple[int | None, CostReport]:
    n = f.n if n is None else n
    dim = 1 << max(1, (n - 1).bit_length())
    if dim > STATEVECTOR_LIMIT:
        raise ValueError(f"state-vector search limited to {STATEVECTOR_LIMIT} amplitudes")
    marked = np.asarray(f.marked_in(0, n - 1), dtype=np.int64)
    if t is None:
        t = len(marked)
    if t == 0:
        raise ValueError("t = 0: use grover_unknown_t")
    if t != len(marked):
        raise ValueError("declared t does not match the oracle")
    rng = as_generator(rng_seed)
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    plan = plan_known_t(n, t)
    amps = _uniform_live(n)
    _grover_iterations(amps, n, marked, f, plan.L)
    found = _measure_and_verify(amps, f, rng)
    return found, CostReport.from_delta(f.ledger, snap, t0)


def grover_final_probabilities(n: int, marked, L: int) -> np.ndarray:
    """Pre-measurement distribution of grover_known_t (deterministic)."""
    marked = np.asarray(sorted(marked), dtype=np.int64)
    amps = _uniform_live(n)
    ledger = QueryLedger()
    shadow = BooleanOracle(n, lambda i: 0, ledger)
    _grover_iterations(amps, n, marked, shadow, L)
    return np.abs(amps) ** 2


def grover_unknown_t(f: BooleanOracle, n: int | None = None,
                     rng_seed=0) -> tuple[int | None, CostReport]:
    n = f.n if n is None else n
    dim = 1 << max(1, (n - 1).bit_length())
    if dim > STATEVECTOR_LIMIT:
        raise ValueError(f"state-vector search limited to {STATEVECTOR_LIMIT} amplitudes")
    marked = np.asarray(f.marked_in(0, n - 1), dtype=np.int64)
    rng = as_generator(rng_seed)
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    found = None
    for iters in unknown_t_stages(n):
        amps = _uniform_live(n)
        _grover_iterations(amps, n, marked, f, iters)
        found = _measure_and_verify(amps, f, rng)
        if found is not None:
            break
    return found, CostReport.from_delta(f.ledger, snap, t0)


def amplitude_amplify(A: DenseUnitary, good, p: float | None = None,
                      rng_seed=0, ledger: QueryLedger | None = None,
                      label: str = "aamp") -> tuple[int | None, CostReport]:
    """Amplify the good outcomes of A|0> with D_A = A R A^{-1},
    R = diag(1,-1,...,-1)."""
    dim = A.dim
    if isinstance(good, BooleanOracle):
        f = good
    else:
        good_set = set(good) if not callable(good) else None
        pred = (lambda i: 1 if i in good_set else 0) if good_set is not None else (
            lambda i: 1 if good(i) else 0)
        f = BooleanOracle(dim, pred, ledger, label)
    flags = []
    start = np.zeros(dim, dtype=np.complex128)
    start[0] = 1.0
    psi0 = A.matrix @ start
    if p is None:
        p = float(sum(abs(psi0[i]) ** 2 for i in f.marked_in(0, dim - 1)))
        flags.append("simulator-privilege:success-probability")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    theta = math.asin(math.sqrt(min(1.0, p)))
    L = max(0, round(math.pi / (4.0 * theta) - 0.5))
    rng = as_generator(rng_seed)
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    marked = np.asarray(f.marked_in(0, dim - 1), dtype=np.int64)
    amps = psi0.copy()
    a_dag = A.matrix.conj().T
    for _ in range(L):
        f.charge_application()
        amps[marked] *= -1.0
        amps = a_dag @ amps
        amps[1:] *= -1.0
        amps = A.matrix @ amps
    found = _measure_and_verify(amps, f, rng)
    report = CostReport.from_delta(f.ledger, snap, t0, flags)
    return found, report
