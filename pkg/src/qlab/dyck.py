"""Dyck-language recognition by searching for overweight substrings.

A string x is Dyck(k) iff it is balanced and its running balance stays in
[0, k].  Pad u = 1^k x 0^k; then x is Dyck(k) iff u contains no minimal
substring whose balance reaches +-(k+1).  The detectors below locate such
substrings: a +-2 substring is an adjacent equal pair, and a +-t substring is
grown from a +-(t-1) one by attaching the nearest same-sign +-(t-1) substring
on the left or right, checked around a fixed point q within a length budget d.

Conventions: bit '0' opens (sign +1), bit '1' closes (sign -1); segments are
inclusive index pairs (i, j) with a sign.
"""

from __future__ import annotations

import math
import time

import numpy as np

from qlab.emulator import SearchBackend, emulated_search
from qlab.ledger import CostReport, QueryLedger
from qlab.oracles import BooleanOracle
from qlab.search import _first_one_binary
from qlab.strings import as_bits


def parse_paren(s: str) -> str:
    """Accept either 0/1 text or ()-text; returns a bit string."""
    if set(s) <= {"(", ")"}:
        return s.replace("(", "0").replace(")", "1")
    return as_bits(s)


def pad_instance(x: str, k: int) -> str:
    if k < 1:
        raise ValueError("k must be >= 1")
    return "1" * k + parse_paren(x) + "0" * k


class _DyckContext:
    """Charged/uncharged views of the padded string plus its pair oracle."""

    def __init__(self, u: str, backend: SearchBackend,
                 ledger: QueryLedger | None = None, is_twin: bool = False):
        self.text = u
        self.u = np.frombuffer(u.encode(), dtype=np.uint8)
        self.m = len(u)
        self.backend = backend
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.is_twin = is_twin
        self._twin: "_DyckContext" | None = None
        self._pair: BooleanOracle | None = None
        self._memo: dict = {}

    def read(self, i: int) -> int:
        self.ledger.charge("dyck")
        return int(self.u[i])

    def sign(self, i: int) -> int:
        return 1 if self.u[i] == ord("0") else -1

    def twin(self) -> "_DyckContext":
        """Deterministic uncharged evaluator used for emulator peeks."""
        if self.is_twin:
            return self
        if self._twin is None:
            self._twin = _DyckContext(self.text, SearchBackend("analytic-ideal", 0),
                                      QueryLedger(), is_twin=True)
        return self._twin

    def pair_oracle(self) -> BooleanOracle:
        if self._pair is None:
            eq = self.u[:-1] == self.u[1:]

            def evaluate(i: int) -> int:
                return int(self.read(i) == self.read(i + 1))

            def hint(lo, hi):
                return [int(i) for i in np.flatnonzero(eq[lo:hi + 1]) + lo]

            self._pair = BooleanOracle(self.m - 1, evaluate, self.ledger, "dyck",
                                       cost=0, peek_fn=lambda i: int(eq[i]),
                                       marked_hint=hint)
        return self._pair

    def rev_pair_oracle(self, last: int) -> BooleanOracle:
        """Pair oracle read right-to-left: index k maps to pair (last - k)."""
        eq = self.u[:-1] == self.u[1:]

        def evaluate(k: int) -> int:
            i = last - k
            return int(self.read(i) == self.read(i + 1))

        def hint(lo, hi):
            idxs = last - np.arange(lo, hi + 1)
            return [int(k) for k in np.flatnonzero(eq[idxs]) + lo]

        return BooleanOracle(last + 1, evaluate, self.ledger, "dyck",
                             cost=0, peek_fn=lambda k: int(eq[last - k]),
                             marked_hint=hint)


def _seg2(ctx: _DyckContext, L: int, R: int, mode: str):
    """A +-2 substring (adjacent equal pair) within [L, R]."""
    if R - L < 1:
        return None
    if mode == "any":
        idx, _ = emulated_search(ctx.pair_oracle(), L, R - 1, "unknown-t",
                                 ctx.backend)
    elif mode == "minimal":
        idx = _first_one_binary(ctx.pair_oracle(), L, R - 1, ctx.backend, None)
    elif mode == "maximal":
        rev = ctx.rev_pair_oracle(R - 1)
        k = _first_one_binary(rev, 0, R - 1 - L, ctx.backend, None)
        idx = None if k is None else R - 1 - k
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if idx is None:
        return None
    return (idx, idx + 1, ctx.sign(idx))


def fixed_point_fixed_len(ctx: _DyckContext, q: int, d: int, t: int,
                          L: int, R: int):
    """A +-t substring of length <= d around the fixed point q, or None.

    t = 2 checks the two pairs touching q.  For t >= 3, find a +-(t-1)
    substring at q and extend it right by the nearest same-sign +-(t-1)
    substring (or, failing that, extend left); if q carries no +-(t-1)
    substring, look for one just right of q and extend it left.
    """
    if not L <= q <= R or d < t:
        return None
    if ctx.is_twin:
        key = (q, d, t, L, R)
        if key in ctx._memo:
            return ctx._memo[key]
        res = _fpfl_impl(ctx, q, d, t, L, R)
        ctx._memo[key] = res
        return res
    return _fpfl_impl(ctx, q, d, t, L, R)


def _fpfl_impl(ctx: _DyckContext, q: int, d: int, t: int, L: int, R: int):
    if t == 2:
        if q + 1 <= R:
            a, b = ctx.read(q), ctx.read(q + 1)
            if a == b:
                return (q, q + 1, ctx.sign(q))
        if q - 1 >= L:
            a, b = ctx.read(q - 1), ctx.read(q)
            if a == b:
                return (q - 1, q, ctx.sign(q - 1))
        return None
    sub = fixed_point_fixed_len(ctx, q, d, t - 1, L, R)
    if sub is not None:
        i1, j1, s1 = sub
        seg = _window_extreme(ctx, t - 1, i1 + 1, min(i1 + d - 2, R), "minimal")
        if seg is not None and seg[2] == s1:
            return (i1, seg[1], s1)
        seg = _window_extreme(ctx, t - 1, max(L, j1 - d + 1), j1 - 1, "maximal")
        if seg is not None and seg[2] == s1:
            return (seg[0], j1, s1)
        return None
    seg = _window_extreme(ctx, t - 1, q, min(R, q + d - 2), "minimal")
    if seg is None:
        return None
    i1, j1, s1 = seg
    seg2 = _window_extreme(ctx, t - 1, max(L, j1 - d + 1), j1 - 1, "maximal")
    if seg2 is not None and seg2[2] == s1:
        return (seg2[0], j1, s1)
    return None


def _window_extreme(ctx: _DyckContext, t: int, L: int, R: int, mode: str):
    """The true first/last minimal +-t substring fully inside [L, R].

    The window itself is the length budget here: doubling budgets with early
    return (as in segment_search) could return a short segment instead of the
    nearest one and glue non-adjacent segments into a false +-(t+1) witness.
    """
    if R - L + 1 < t:
        return None
    if t == 2:
        return _seg2(ctx, L, R, mode)
    runner = _fixed_len_minimal if mode == "minimal" else _fixed_len_maximal
    return runner(ctx, R - L + 1, t, L, R)


def _fixed_len(ctx: _DyckContext, d: int, t: int, L: int, R: int,
               t_floor: int = 1):
    """Any +-t substring of length <= d inside [L, R] by amplifying a random
    fixed point.

    When a segment of length ~d exists it marks ~d fixed points, so callers
    scanning doubling budgets pass t_floor ~ d/2 to cap the schedule at
    ~sqrt((R-L)/d) rounds; a capped failure then means "none at this budget".
    """
    if R < L:
        return None
    cell: dict[int, tuple] = {}
    twin = ctx.twin()

    def evaluate(q: int) -> int:
        res = fixed_point_fixed_len(ctx, q, d, t, L, R)
        if res is not None:
            cell[q] = res
        return 1 if res is not None else 0

    def peek(q: int) -> int:
        return 1 if fixed_point_fixed_len(twin, q, d, t, L, R) is not None else 0

    f = BooleanOracle(ctx.m, evaluate, ctx.ledger, "dyck", cost=0, peek_fn=peek)
    idx, _ = emulated_search(f, L, R, "unknown-t", ctx.backend, t_floor)
    if idx is None:
        return None
    return cell.get(idx) or fixed_point_fixed_len(ctx, idx, d, t, L, R)


def _fixed_len_minimal(ctx: _DyckContext, d: int, t: int, L: int, R: int,
                       t_floor: int = 1):
    best = _fixed_len(ctx, d, t, L, R, t_floor)
    if best is None:
        return None
    left, right = L, R
    while left < right:
        middle = (left + right + 1) // 2
        res = _fixed_len(ctx, d, t, left, middle - 1, t_floor)
        if res is not None:
            best = res
            right = middle - 1
        else:
            res = fixed_point_fixed_len(ctx, middle, d, t, left, right)
            if res is not None:
                return res
            left = middle + 1
    if left == right:
        res = fixed_point_fixed_len(ctx, left, d, t, L, R)
        if res is not None:
            return res
    return best


def _fixed_len_maximal(ctx: _DyckContext, d: int, t: int, L: int, R: int,
                       t_floor: int = 1):
    best = _fixed_len(ctx, d, t, L, R, t_floor)
    if best is None:
        return None
    left, right = L, R
    while left < right:
        middle = (left + right) // 2
        res = _fixed_len(ctx, d, t, middle + 1, right, t_floor)
        if res is not None:
            best = res
            left = middle + 1
        else:
            res = fixed_point_fixed_len(ctx, middle, d, t, left, right)
            if res is not None:
                return res
            right = middle - 1
    if left == right:
        res = fixed_point_fixed_len(ctx, left, d, t, L, R)
        if res is not None:
            return res
    return best


def segment_search(ctx: _DyckContext, t: int, L: int, R: int, mode: str):
    """First/last/any minimal +-t substring in [L, R] via doubling budgets."""
    if t < 2:
        raise ValueError("t must be >= 2")
    if R - L + 1 < t:
        return None
    if t == 2:
        return _seg2(ctx, L, R, mode)
    runner = {"any": _fixed_len, "minimal": _fixed_len_minimal,
              "maximal": _fixed_len_maximal}[mode]
    stochastic = ctx.backend.kind != "analytic-ideal"
    border = 0
    for z in range(math.ceil(math.log2(R - L + 1)) + 1):
        d = 1 << z
        if d < t:
            continue
        border += 1
        for _ in range(border if stochastic else 1):
            res = runner(ctx, d, t, L, R, max(1, (d + 1) // 2))
            if res is not None:
                return res
    return None


def dyck_fixed_point_fixed_len(u: str, q: int, d: int, t: int,
                               L: int | None = None, R: int | None = None,
                               backend: SearchBackend | None = None
                               ) -> tuple[tuple | None, CostReport]:
    if backend is None:
        backend = SearchBackend()
    ctx = _DyckContext(parse_paren(u), backend)
    snap = ctx.ledger.snapshot()
    t0 = time.perf_counter_ns()
    seg = fixed_point_fixed_len(ctx, q, d, t,
                                0 if L is None else L,
                                ctx.m - 1 if R is None else R)
    return seg, CostReport.from_delta(ctx.ledger, snap, t0)


def dyck_segment_search(u: str, t: int, mode: str = "any",
                        L: int | None = None, R: int | None = None,
                        backend: SearchBackend | None = None
                        ) -> tuple[tuple | None, CostReport]:
    if backend is None:
        backend = SearchBackend()
    ctx = _DyckContext(parse_paren(u), backend)
    snap = ctx.ledger.snapshot()
    t0 = time.perf_counter_ns()
    seg = segment_search(ctx, t, 0 if L is None else L,
                         ctx.m - 1 if R is None else R, mode)
    return seg, CostReport.from_delta(ctx.ledger, snap, t0)


def dyck_decide(x: str, k: int, backend: SearchBackend | None = None
                ) -> tuple[bool, CostReport, tuple | None]:
    """True iff x is balanced with nesting depth <= k.

    Searches the padded string 1^k x 0^k for any +-(k+1) substring; the
    returned witness (if any) is such a substring in padded coordinates.
    """
    if backend is None:
        backend = SearchBackend()
    u = pad_instance(x, k)
    ctx = _DyckContext(u, backend)
    snap = ctx.ledger.snapshot()
    t0 = time.perf_counter_ns()
    seg = segment_search(ctx, k + 1, 0, ctx.m - 1, "any")
    return seg is None, CostReport.from_delta(ctx.ledger, snap, t0), seg
