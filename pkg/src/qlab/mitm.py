"""Meet-in-the-middle subset sum and the 2-to-1 collision decision.

Splitting off the first t = floor(n/3) elements turns the 2^n mask scan into
a 2^t sum table plus a search over the 2^(n-t) completions; Grover-emulating
that outer search lands near 2^(n/3) ledger queries against 2^(n/2) for plain
Grover over all masks.  The sum table (and the collision prefix set) is a
membership structure whose lookups are counted in wall time, not in the query
ledger -- a ledger query is a read of the input, nothing else.
"""

from __future__ import annotations

import bisect
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from qlab.emulator import SearchBackend, emulated_search
from qlab.ledger import CostReport, QueryLedger
from qlab.oracles import BooleanOracle
from qlab.simulator import as_generator

SUBSET_VARIANTS = ("brute", "grover", "mitm-classical", "mitm-quantum")
COLLISION_VARIANTS = ("simple", "mitm")


@dataclass
class SubsetSumInstance:
    a: list
    k: int

    def __post_init__(self):
        self.a = [int(x) for x in self.a]
        if not self.a:
            raise ValueError("empty instance")
        if any(x < 1 for x in self.a):
            raise ValueError("all elements must be >= 1")
        self.k = int(self.k)

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def from_json(cls, text: str) -> "SubsetSumInstance":
        obj = json.loads(text)
        return cls(list(obj["a"]), obj["k"])

    def to_json(self) -> str:
        return json.dumps({"a": self.a, "k": self.k})


def _mask_sums(a) -> np.ndarray:
    """sums[mask] = sum of a[j] over set bits j (bit j <-> element j)."""
    s = np.zeros(1, dtype=np.int64)
    for x in a:
        s = np.concatenate([s, s + int(x)])
    return s


def _mask_indices(mask: int, offset: int = 0) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(offset + j)
        mask >>= 1
        j += 1
    return out


class _SumTable:
    """First-part sums -> one representative mask per sum.

    "ordered" keeps a sorted array probed by binary search (comparison-based);
    "hash" keeps a dict.  Lookup cost lives in wall time only.
    """

    def __init__(self, rep: dict, membership: str = "ordered"):
        if membership not in ("ordered", "hash"):
            raise ValueError(f"unknown membership structure {membership!r}")
        self.membership = membership
        if membership == "hash":
            self._map = rep
        else:
            self._sums = sorted(rep)
            self._masks = [rep[s] for s in self._sums]

    def get(self, s: int):
        if self.membership == "hash":
            return self._map.get(s)
        j = bisect.bisect_left(self._sums, s)
        if j < len(self._sums) and self._sums[j] == s:
            return self._masks[j]
        return None

    def sums_array(self) -> np.ndarray:
        keys = self._map.keys() if self.membership == "hash" else self._sums
        return np.asarray(sorted(keys), dtype=np.int64)


def subset_sum(inst: SubsetSumInstance, variant: str,
               backend: SearchBackend | None = None, rng_seed=0,
               membership: str = "ordered"):
    """Find a subset of inst.a summing to inst.k, or None.

    Returns (sorted index list or None, CostReport); any returned subset is
    re-summed against k before being reported (hard check).
    """
    if variant not in SUBSET_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n, k = inst.n, inst.k
    if variant in ("brute", "grover") and n > 24:
        raise ValueError("brute/grover variants limited to n <= 24")
    if n > 30:
        raise ValueError("mitm variants limited to n <= 30")
    if backend is None:
        backend = SearchBackend("analytic", rng_seed)
    ledger = QueryLedger()
    label = "subsetsum"
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    flags: list[str] = []

    def finish(subset):
        if subset is not None:
            subset = sorted(subset)
            if sum(inst.a[i] for i in subset) != k:
                raise RuntimeError("returned subset failed the re-sum check")
        return subset, CostReport.from_delta(ledger, snap, t0, flags)

    attempts = 1 if backend.kind == "analytic-ideal" else backend.nested_reps

    if variant == "brute":
        sums = _mask_sums(inst.a)
        hits = np.flatnonzero(sums == k)
        scanned = int(hits[0]) + 1 if len(hits) else len(sums)
        ledger.charge(label, scanned)
        return finish(None if not len(hits) else _mask_indices(int(hits[0])))

    if variant == "grover":
        sums = _mask_sums(inst.a)

        def hint(lo, hi):
            return [int(i) for i in np.flatnonzero(sums[lo:hi + 1] == k) + lo]

        f = BooleanOracle(len(sums), lambda m: int(sums[m] == k), ledger,
                          label, marked_hint=hint)
        mask = None
        for _ in range(attempts):
            mask, rep = emulated_search(f, 0, len(sums) - 1, "unknown-t", backend)
            flags = sorted(set(flags) | set(rep.flags))
            if mask is not None:
                break
        return finish(None if mask is None else _mask_indices(mask))

    # meet in the middle: first part = elements [0, t), bit j of a second-part
    # mask = element t + j
    t = n // 3
    fsums = _mask_sums(inst.a[:t])
    ledger.charge(label, len(fsums))  # one sum evaluation per first-part mask
    rep_mask: dict = {}
    for m, s in enumerate(fsums.tolist()):
        if s not in rep_mask:  # one representative mask per sum
            rep_mask[s] = m
    table = _SumTable(rep_mask, membership)
    rsums = _mask_sums(inst.a[t:])
    need = k - rsums

    if variant == "mitm-classical":
        present = np.isin(need, table.sums_array())
        hits = np.flatnonzero(present)
        scanned = int(hits[0]) + 1 if len(hits) else len(rsums)
        ledger.charge(label, scanned)
        if not len(hits):
            return finish(None)
        m2 = int(hits[0])
        m1 = table.get(int(need[m2]))
        return finish(_mask_indices(m1) + _mask_indices(m2, offset=t))

    # mitm-quantum
    present = np.isin(need, table.sums_array())

    def hint(lo, hi):
        return [int(i) for i in np.flatnonzero(present[lo:hi + 1]) + lo]

    g = BooleanOracle(len(rsums),
                      lambda m2: int(table.get(int(need[m2])) is not None),
                      ledger, label, peek_fn=lambda m2: int(present[m2]),
                      marked_hint=hint)
    m2 = None
    for _ in range(attempts):
        m2, rep = emulated_search(g, 0, len(rsums) - 1, "unknown-t", backend)
        flags = sorted(set(flags) | set(rep.flags))
        if m2 is not None:
            break
    if m2 is None:
        return finish(None)
    m1 = table.get(int(need[m2]))
    return finish(_mask_indices(m1) + _mask_indices(m2, offset=t))


def subset_sum_brute_oracle(inst: SubsetSumInstance) -> bool:
    """Uncharged exhaustive decision, for cross-checking."""
    return bool(np.any(_mask_sums(inst.a) == inst.k))


def collision_decide(a, promise: str, variant: str = "mitm",
                     backend: SearchBackend | None = None, rng_seed=0):
    """Decide whether `a` is 1-to-1 or 2-to-1 under that promise.

    The mitm variant reads t = ceil(n^(1/3)) elements into a set; a collision
    inside the prefix decides "2-to-1" with zero search queries, otherwise the
    2-to-1 promise puts >= t partners in the remainder, so the membership
    search runs a schedule capped at sqrt((n-t)/t) ~ n^(1/3) iterations.
    """
    if promise not in ("1-to-1", "2-to-1"):
        raise ValueError(f"unknown promise {promise!r}")
    if variant not in COLLISION_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    arr = np.asarray(a)
    n = len(arr)
    if n < 2:
        raise ValueError("need at least two elements")
    if backend is None:
        backend = SearchBackend("analytic", rng_seed)
    rng = as_generator(rng_seed)
    ledger = QueryLedger()
    label = "collision"
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    flags: list[str] = []
    attempts = 1 if backend.kind == "analytic-ideal" else 2

    def finish(lab):
        return lab, CostReport.from_delta(ledger, snap, t0, flags)

    if variant == "simple":
        pivot = int(rng.integers(n))
        ledger.charge(label)
        target = arr[pivot]
        pos = lambda i: i if i < pivot else i + 1
        match = arr[np.arange(n) != pivot] == target

        def hint(lo, hi):
            return [int(i) for i in np.flatnonzero(match[lo:hi + 1]) + lo]

        f = BooleanOracle(n - 1, lambda i: int(arr[pos(i)] == target), ledger,
                          label, marked_hint=hint)
        idx = None
        for _ in range(attempts):
            idx, rep = emulated_search(f, 0, n - 2, "unknown-t", backend)
            flags = sorted(set(flags) | set(rep.flags))
            if idx is not None:
                break
        return finish("2-to-1" if idx is not None else "1-to-1")

    # mitm
    t = min(n - 1, math.ceil(n ** (1.0 / 3.0)))
    ledger.charge(label, t)
    prefix = arr[:t].tolist()
    if len(set(prefix)) < t:
        return finish("2-to-1")  # internal collision: no search queries
    prefix_sorted = sorted(prefix)

    def member(x) -> bool:
        j = bisect.bisect_left(prefix_sorted, x)
        return j < t and prefix_sorted[j] == x

    match = np.isin(arr[t:], arr[:t])

    def hint(lo, hi):
        return [int(i) for i in np.flatnonzero(match[lo:hi + 1]) + lo]

    g = BooleanOracle(n - t, lambda i: int(member(arr[t + i])), ledger, label,
                      peek_fn=lambda i: int(match[i]), marked_hint=hint)
    idx = None
    for _ in range(attempts):
        idx, rep = emulated_search(g, 0, n - t - 1, "unknown-t", backend,
                                   t_floor=min(t, n - t))
        flags = sorted(set(flags) | set(rep.flags))
        if idx is not None:
            break
    return finish("2-to-1" if idx is not None else "1-to-1")


def two_to_one_instance(n: int, rng_seed=0) -> list[int]:
    """n even; every value appears exactly twice, pairing uniform in the seed."""
    if n % 2:
        raise ValueError("n must be even for a 2-to-1 instance")
    rng = as_generator(rng_seed)
    values = rng.permutation(4 * n)[: n // 2]
    slots = rng.permutation(n)
    out = [0] * n
    for j, v in enumerate(values):
        out[slots[2 * j]] = int(v)
        out[slots[2 * j + 1]] = int(v)
    return out


def one_to_one_instance(n: int, rng_seed=0) -> list[int]:
    rng = as_generator(rng_seed)
    return [int(v) for v in rng.permutation(4 * n)[:n]]
