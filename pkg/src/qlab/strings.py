"""String predicates and structures over bit strings.

All predicates run mismatch searches through a SearchBackend and charge one
query per inspected position pair.  "unequal" verdicts always carry a witness
index certified by a direct charged read; "equal" verdicts are one-sided and
boostable.
"""

from __future__ import annotations

import math
import time
from collections import Counter

import numpy as np

from qlab import config
from qlab.emulator import SearchBackend, emulated_search
from qlab.ledger import CostReport, QueryLedger
from qlab.oracles import BooleanOracle
from qlab.search import bounded_first_one
from qlab.simulator import as_generator


def as_bits(s) -> str:
    if isinstance(s, str):
        if any(c not in "01" for c in s):
            raise ValueError("bit strings contain only 0/1")
        return s
    return "".join("1" if int(b) else "0" for b in s)


def read_bit_file(path: str) -> str:
    with open(path) as fh:
        return as_bits("".join(fh.read().split()))


def _mismatch_oracle(s: str, t: str, ledger: QueryLedger, label: str) -> BooleanOracle:
    m = min(len(s), len(t))
    sa = np.frombuffer(s[:m].encode(), dtype=np.uint8)
    ta = np.frombuffer(t[:m].encode(), dtype=np.uint8)

    def hint(lo, hi):
        return [int(i) for i in np.flatnonzero(sa[lo:hi + 1] != ta[lo:hi + 1]) + lo]

    return BooleanOracle(m, lambda i: int(s[i] != t[i]), ledger, label, marked_hint=hint)


def strings_equal(s, t, backend: SearchBackend, rng_seed=None,
                  ledger: QueryLedger | None = None
                  ) -> tuple[bool, CostReport, int | None]:
    """One-sided equality test; returns (verdict, cost, witness-or-None)."""
    s, t = as_bits(s), as_bits(t)
    ledger = ledger if ledger is not None else QueryLedger()
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    if len(s) != len(t):
        return False, CostReport.from_delta(ledger, snap, t0), None
    if len(s) == 0:
        return True, CostReport.from_delta(ledger, snap, t0), None
    f = _mismatch_oracle(s, t, ledger, "streq")
    idx, _ = emulated_search(f, 0, f.n - 1, "unknown-t", backend)
    return idx is None, CostReport.from_delta(ledger, snap, t0), idx


def palindrome_check(s, backend: SearchBackend, rng_seed=None
                     ) -> tuple[bool, CostReport, int | None]:
    s = as_bits(s)
    ledger = QueryLedger()
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    half = len(s) // 2
    if half == 0:
        return True, CostReport.from_delta(ledger, snap, t0), None
    f = BooleanOracle(half, lambda i: int(s[i] != s[len(s) - 1 - i]), ledger, "palindrome")
    idx, _ = emulated_search(f, 0, half - 1, "unknown-t", backend)
    return idx is None, CostReport.from_delta(ledger, snap, t0), idx


def lcp(s, t, backend: SearchBackend, rng_seed=None,
        ledger: QueryLedger | None = None) -> tuple[int, CostReport]:
    """Length of the longest common prefix: position of the first mismatch."""
    s, t = as_bits(s), as_bits(t)
    ledger = ledger if ledger is not None else QueryLedger()
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    m = min(len(s), len(t))
    if m == 0:
        return 0, CostReport.from_delta(ledger, snap, t0)
    f = _mismatch_oracle(s, t, ledger, "lcp")
    idx, _ = bounded_first_one(f, backend, rng_seed)
    return (m if idx is None else idx), CostReport.from_delta(ledger, snap, t0)


def compare_lex(s, t, backend: SearchBackend, rng_seed=None,
                ledger: QueryLedger | None = None) -> tuple[int, CostReport]:
    """-1 if s < t, 0 if equal, +1 if s > t (lexicographic; prefix is smaller)."""
    s, t = as_bits(s), as_bits(t)
    ledger = ledger if ledger is not None else QueryLedger()
    snap = ledger.snapshot()
    t0 = time.perf_counter_ns()
    j, _ = lcp(s, t, backend, rng_seed, ledger)
    n, m = len(s), len(t)
    if j == min(n, m):
        if n == m:
            result = 0
        elif m == min(n, m):
            result = 1
        else:
            result = -1
    else:
        ledger.charge("strcmp", 2)
        result = -1 if s[j] < t[j] else 1
    return result, CostReport.from_delta(ledger, snap, t0)


class _TreapNode:
    __slots__ = ("idx", "prio", "left", "right")

    def __init__(self, idx, prio):
        self.idx = idx
        self.prio = prio
        self.left = None
        self.right = None


class SortedStringSet:
    """Treap over string indexes ordered by a repeated noisy comparator.

    Each comparison is the majority of 3*ceil(log2 capacity) quantum compares,
    driving the per-comparison error down to O(1/capacity^3).  The
    `comparator_errors` counter (instrumented against the classical compare)
    reports whether any comparison went wrong during the run.
    """

    def __init__(self, strings, backend: SearchBackend, rng_seed=0,
                 capacity: int | None = None, reps: int | None = None):
        self.strings = [as_bits(s) for s in strings]
        self.backend = backend
        self.rng = as_generator(rng_seed)
        cap = capacity if capacity is not None else max(2, len(self.strings))
        self.reps = reps if reps is not None else \
            config.COMPARATOR_REPS_FACTOR * max(1, math.ceil(math.log2(cap)))
        self.ledger = QueryLedger()
        self.root = None
        self.size = 0
        self.comparator_errors = 0

    def _compare(self, i: int, j: int) -> int:
        votes = Counter()
        for _ in range(self.reps):
            r, _ = compare_lex(self.strings[i], self.strings[j], self.backend,
                               ledger=self.ledger)
            votes[r] += 1
        result = votes.most_common(1)[0][0]
        truth = (self.strings[i] > self.strings[j]) - (self.strings[i] < self.strings[j])
        if result != truth:
            self.comparator_errors += 1
        return result

    def add(self, idx: int) -> None:
        node = _TreapNode(idx, self.rng.random())
        self.root = self._insert(self.root, node)
        self.size += 1

    def _insert(self, root, node):
        if root is None:
            return node
        if self._compare(node.idx, root.idx) < 0:
            root.left = self._insert(root.left, node)
            if root.left.prio > root.prio:
                root = self._rotate_right(root)
        else:
            root.right = self._insert(root.right, node)
            if root.right.prio > root.prio:
                root = self._rotate_left(root)
        return root

    @staticmethod
    def _rotate_right(y):
        x = y.left
        y.left = x.right
        x.right = y
        return x

    @staticmethod
    def _rotate_left(x):
        y = x.right
        x.right = y.left
        y.left = x
        return y

    def pop_min(self) -> int:
        if self.root is None:
            raise IndexError("pop from empty set")
        parent, node = None, self.root
        while node.left is not None:
            parent, node = node, node.left
        if parent is None:
            self.root = node.right
        else:
            parent.left = node.right
        self.size -= 1
        return node.idx

    def in_order(self) -> list[int]:
        out, stack, node = [], [], self.root
        while stack or node:
            while node:
                stack.append(node)
                node = node.left
            node = stack.pop()
            out.append(node.idx)
            node = node.right
        return out


def string_sort(strings, backend: SearchBackend, rng_seed=0
                ) -> tuple[list[int], CostReport]:
    """Permutation sorting the strings: Add all, then PopMin n times."""
    t0 = time.perf_counter_ns()
    sset = SortedStringSet(strings, backend, rng_seed)
    for i in range(len(sset.strings)):
        sset.add(i)
    order = [sset.pop_min() for _ in range(len(sset.strings))]
    report = CostReport.from_delta(sset.ledger, (0, {}), t0)
    return order, report


def most_frequent(strings, backend: SearchBackend, rng_seed=0
                  ) -> tuple[int, CostReport]:
    """Minimal original index of a most-frequent string: sort, then scan for
    the largest segment of equal strings."""
    t0 = time.perf_counter_ns()
    strings = [as_bits(s) for s in strings]
    n = len(strings)
    if n == 0:
        raise ValueError("empty input")
    ledger = QueryLedger()
    order, sort_rep = string_sort(strings, backend, rng_seed)
    eq_reps = config.COMPARATOR_REPS_FACTOR * max(1, math.ceil(math.log2(max(2, n))))

    def equal_boosted(a: str, b: str) -> bool:
        # one-sided: any certified mismatch wins
        for _ in range(eq_reps):
            eq, _, _ = strings_equal(a, b, backend, ledger=ledger)
            if not eq:
                return False
        return True

    best_count, best_index = 0, None
    seg_start = 0
    for pos in range(1, n + 1):
        boundary = pos == n or not equal_boosted(
            strings[order[pos]], strings[order[pos - 1]])
        if boundary:
            count = pos - seg_start
            min_idx = min(order[seg_start:pos])
            if count > best_count or (count == best_count and min_idx < best_index):
                best_count, best_index = count, min_idx
            seg_start = pos
    report = sort_rep.merged_with(CostReport.from_delta(ledger, (0, {}), t0))
    return best_index, report
