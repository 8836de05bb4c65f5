"""Search applications on top of any SearchBackend: minimum/maximum search,
first-one (binary and via-minimum variants), bounded first-one, all-ones.

Query units are reads of the underlying array/oracle; every found answer is
certified by a charged read before being returned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from qlab import config
from qlab.emulator import SearchBackend, emulated_search
from qlab.ledger import CostReport, QueryLedger
from qlab.oracles import BooleanOracle
from qlab.simulator import as_generator


@dataclass(frozen=True, order=True)
class RankedValue:
    value: int
    index: int


def _generic_minimum(n: int, key_charged: Callable[[int], object],
                     key_peek: Callable[[int], object], ledger: QueryLedger,
                     label: str, backend: SearchBackend, rng,
                     confirm: int | None = None,
                     marked_hint_for=None) -> int:
    """Iterated strict-improvement search; returns the index of the minimum key.

    Stops after `confirm` consecutive failed inner searches (1 suffices for the
    ideal backend whose failures are certain)."""
    if confirm is None:
        confirm = 1 if backend.kind == "analytic-ideal" else config.MINSEARCH_CONFIRM
    j = int(rng.integers(n))
    pivot = key_charged(j)
    fails = 0
    while fails < confirm:
        pivot_peek = key_peek(j)
        f = BooleanOracle(
            n, lambda i: int(key_charged(i) < pivot_peek), ledger, label, cost=0,
            peek_fn=lambda i: int(key_peek(i) < pivot_peek),
            marked_hint=None if marked_hint_for is None else marked_hint_for(pivot_peek))
        idx, _ = emulated_search(f, 0, n - 1, "unknown-t", backend)
        if idx is None:
            fails += 1
        else:
            j = idx
            fails = 0
    return j


def minimum_search(a: Sequence[int], backend: SearchBackend, rng_seed=None,
                   confirm: int | None = None) -> tuple[int, CostReport]:
    if len(a) == 0:
        raise ValueError("empty array")
    arr = np.asarray(a)
    n = len(arr)
    ledger = QueryLedger()
    label = "minsearch"
    rng = backend.rng if rng_seed is None else as_generator(rng_seed)
    t0 = time.perf_counter_ns()

    def key_charged(i: int):
        ledger.charge(label)
        return arr[i]

    def hint_for(pivot):
        def hint(lo, hi):
            return [int(i) for i in np.flatnonzero(arr[lo:hi + 1] < pivot) + lo]
        return hint

    j = _generic_minimum(n, key_charged, lambda i: arr[i], ledger, label,
                         backend, rng, confirm, hint_for)
    snap = (0, {})
    return j, CostReport.from_delta(ledger, snap, t0)


def minimum_search_boosted(a: Sequence[int], backend: SearchBackend, k: int,
                           rng_seed=None) -> tuple[int, CostReport]:
    """Repeat k times and keep the smallest answer; error decays like 0.1^k."""
    best = None
    report = CostReport(0)
    for _ in range(max(1, k)):
        j, rep = minimum_search(a, backend, rng_seed)
        rng_seed = None  # only the first round may be explicitly seeded
        report = report.merged_with(rep)
        if best is None or a[j] < a[best]:
            best = j
    return best, report


def maximum_search(a: Sequence[int], backend: SearchBackend, rng_seed=None
                   ) -> tuple[int, CostReport]:
    neg = [-x for x in a]
    return minimum_search(neg, backend, rng_seed)


def first_one_search(f: BooleanOracle, search_range: tuple[int, int] | None = None,
                     variant: str = "binary", backend: SearchBackend | None = None,
                     rng_seed=None, witness: int | None = None
                     ) -> tuple[int | None, CostReport]:
    if backend is None:
        raise ValueError("backend required")
    lo, hi = (0, f.n - 1) if search_range is None else search_range
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    if variant == "via-minimum":
        idx = _first_one_via_minimum(f, lo, hi, backend, rng_seed)
    elif variant == "binary":
        idx = _first_one_binary(f, lo, hi, backend, witness)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return idx, CostReport.from_delta(f.ledger, snap, t0)


def _first_one_via_minimum(f: BooleanOracle, lo: int, hi: int,
                           backend: SearchBackend, rng_seed) -> int | None:
    n = hi - lo + 1
    rng = backend.rng if rng_seed is None else as_generator(rng_seed)

    # g(i) = (1 - f(i), i): its lexicographic minimum is the first one, if any.
    def key_charged(i: int):
        return (1 - f.query(lo + i), i)

    def key_peek(i: int):
        return (1 - f.peek(lo + i), i)

    j = _generic_minimum(n, key_charged, key_peek, f.ledger, f.label,
                         backend, rng)
    return lo + j if f.query(lo + j) else None


def _first_one_binary(f: BooleanOracle, lo: int, hi: int,
                      backend: SearchBackend, witness: int | None) -> int | None:
    if witness is None:
        for _ in range(2):
            witness, _ = emulated_search(f, lo, hi, "unknown-t", backend)
            if witness is not None:
                break
        if witness is None:
            return None
    l, r = lo, witness
    stage = 0
    while l < r:
        mid = (l + r) // 2
        stage += 1
        found = None
        for _ in range(2 * stage):
            found, _ = emulated_search(f, l, mid, "unknown-t", backend)
            if found is not None:
                break
        if found is not None:
            r = mid
        else:
            l = mid + 1
    return l if f.query(l) else witness


def bounded_first_one(f: BooleanOracle, backend: SearchBackend, rng_seed=None
                      ) -> tuple[int | None, CostReport]:
    """First one in O(sqrt(x)) where x is the answer, via doubling borders."""
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    n = f.n
    z = 0
    witness = None
    while True:
        z += 1
        b = min(1 << z, n)
        for _ in range(z):
            witness, _ = emulated_search(f, 0, b - 1, "unknown-t", backend)
            if witness is not None:
                break
        if witness is not None or b == n:
            break
    if witness is None:
        return None, CostReport.from_delta(f.ledger, snap, t0)
    idx = _first_one_binary(f, 0, witness, backend, witness)
    return idx, CostReport.from_delta(f.ledger, snap, t0)


def all_ones(f: BooleanOracle, search_range: tuple[int, int] | None = None,
             backend: SearchBackend | None = None, rng_seed=None
             ) -> tuple[list[int], CostReport]:
    """All marked indices by repeated first-one over shrinking suffixes."""
    if backend is None:
        raise ValueError("backend required")
    lo, hi = (0, f.n - 1) if search_range is None else search_range
    snap = f.ledger.snapshot()
    t0 = time.perf_counter_ns()
    out: list[int] = []
    cur = lo
    while cur <= hi:
        idx = _first_one_binary(f, cur, hi, backend, None)
        if idx is None:
            break
        out.append(idx)
        cur = idx + 1
    return out, CostReport.from_delta(f.ledger, snap, t0)
