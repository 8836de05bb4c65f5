"""Coined quantum walks and their classical baselines.

Covers the exact random-walk distributions on the line and circle, coined
walks on the line and the n x n torus (with the marked-vertex search),
NAND-formula evaluation by a tail-augmented tree walk, the MNRS cost model
with the Johnson-graph element-distinctness walk, the electric-network
hitting-time identity H = 2WR, and a toy phase-estimation backtracking
detector.

Conventions: 1-D direction 0 = left, 1 = right; the coin acts on the
direction index only; one step applies the coin C first, then the shift S.
Torus directions 0..3 = up, down, right, left, with "up" increasing y.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from qlab import config
from qlab.ledger import CostReport, QueryLedger
from qlab.simulator import (ATOL, DenseUnitary, Gate1Q, StateVector,
                            as_generator, from_amplitudes, phase_estimate)

# ---------------------------------------------------------------------------
# classical baselines


def random_walk_line(steps: int, q_right: float = 0.5, exact: bool = False):
    """Exact distribution on {-steps..steps} after `steps` moves (no sampling)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if not 0.0 <= q_right <= 1.0:
        raise ValueError("q_right must be in [0, 1]")
    size = 2 * steps + 1
    one = Fraction(1) if exact else 1.0
    q = Fraction(q_right).limit_denominator(10 ** 12) if exact else q_right
    p = [one * 0] * size
    p[steps] = one
    for _ in range(steps):
        nxt = [one * 0] * size
        for i, mass in enumerate(p):
            if not mass:
                continue
            if i > 0:
                nxt[i - 1] += mass * (1 - q)
            if i < size - 1:
                nxt[i + 1] += mass * q
        p = nxt
    return p if exact else np.asarray(p)


def random_walk_circle(size: int, steps: int, start: int = 0,
                       exact: bool = False):
    """Exact symmetric-walk distribution on a circle of `size` vertices."""
    if size < 3:
        raise ValueError("circle needs size >= 3")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if not 0 <= start < size:
        raise ValueError("start out of range")
    half = Fraction(1, 2) if exact else 0.5
    p = [half * 0] * size
    p[start] = half * 2
    for _ in range(steps):
        nxt = [half * 0] * size
        for i, mass in enumerate(p):
            if mass:
                nxt[(i - 1) % size] += mass * half
                nxt[(i + 1) % size] += mass * half
        p = nxt
    return p if exact else np.asarray(p)


def circle_transition_matrix(size: int) -> np.ndarray:
    m = np.zeros((size, size))
    for i in range(size):
        m[(i - 1) % size, i] = 0.5
        m[(i + 1) % size, i] = 0.5
    return m


# ---------------------------------------------------------------------------
# coined walk on the line


def coined_walk_1d(steps: int, coin: Gate1Q,
                   initial: tuple[int, int] = (0, 0)):
    """Amplitude-exact coined walk; returns (positions, per-position probs).

    State space is (position, direction); C acts on the direction, then S
    moves direction-0 amplitude left and direction-1 amplitude right.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    pos0, dir0 = initial
    if dir0 not in (0, 1):
        raise ValueError("direction must be 0 (left) or 1 (right)")
    size = 2 * steps + 1
    amps = np.zeros((size, 2), dtype=np.complex128)
    amps[steps, dir0] = 1.0
    for _ in range(steps):
        amps = amps @ coin.matrix.T
        nxt = np.zeros_like(amps)
        nxt[:-1, 0] = amps[1:, 0]
        nxt[1:, 1] = amps[:-1, 1]
        amps = nxt
    positions = np.arange(-steps, steps + 1) + pos0
    return positions, np.abs(amps[:, 0]) ** 2 + np.abs(amps[:, 1]) ** 2


def coined_step_unitary_circle(size: int, coin: Gate1Q) -> DenseUnitary:
    """Dense S.C on a circle of `size` positions (basis index = 2*pos + dir);
    used to cross-check the line walk while the wavefront stays inside."""
    if size < 2 or size & (size - 1):
        raise ValueError("size must be a power of two for the dense check")
    dim = 2 * size
    c = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(size):
        c[2 * i:2 * i + 2, 2 * i:2 * i + 2] = coin.matrix
    s = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(size):
        s[2 * ((i - 1) % size) + 0, 2 * i + 0] = 1.0
        s[2 * ((i + 1) % size) + 1, 2 * i + 1] = 1.0
    return DenseUnitary(s @ c)


# ---------------------------------------------------------------------------
# coined walk on the n x n torus, and the marked-vertex search


def _grover_coin(j: int) -> np.ndarray:
    return np.full((j, j), 2.0 / j) - np.eye(j)


def _torus_step(amps: np.ndarray, marked: tuple[int, int] | None,
                coin: np.ndarray) -> np.ndarray:
    """One step Q, C = D4, S on amplitudes shaped (n, n, 4)."""
    if marked is not None:
        amps = amps.copy()
        amps[marked[0], marked[1], :] *= -1.0
    amps = amps @ coin.T
    out = np.empty_like(amps)
    # up (0) at (x, y) swaps with down (1) at (x, y+1); right (2) at (x, y)
    # swaps with left (3) at (x+1, y)
    out[:, :, 0] = np.roll(amps[:, :, 1], -1, axis=1)
    out[:, :, 1] = np.roll(amps[:, :, 0], 1, axis=1)
    out[:, :, 2] = np.roll(amps[:, :, 3], -1, axis=0)
    out[:, :, 3] = np.roll(amps[:, :, 2], 1, axis=0)
    return out


def grid_walk_search(n: int, marked: tuple[int, int] | None = None,
                     steps: int | None = None):
    """Exact torus-walk evolution from the uniform edge state.

    Returns (per-vertex probabilities after the final step, peak report);
    the report tracks the best marked-vertex mass over all intermediate
    steps and its factor over the uniform 1/n^2.
    """
    if n < 4:
        raise ValueError("grid needs n >= 4")
    if steps is None:
        steps = math.ceil(8 * n * math.log(n))
    coin = _grover_coin(4)
    amps = np.full((n, n, 4), 1.0 / math.sqrt(4 * n * n), dtype=np.complex128)
    best_step, best_prob = 0, 1.0 / (n * n)
    for step in range(1, steps + 1):
        amps = _torus_step(amps, marked, coin)
        if marked is not None:
            prob = float(np.sum(np.abs(amps[marked[0], marked[1], :]) ** 2))
            if prob > best_prob:
                best_step, best_prob = step, prob
    vertex_probs = np.sum(np.abs(amps) ** 2, axis=2)
    report = {
        "steps": steps,
        "best_step": best_step,
        "best_probability": best_prob,
        "factor_over_uniform": best_prob * n * n,
    }
    return vertex_probs, report


def grid_step_unitary(n: int, marked: tuple[int, int] | None = None
                      ) -> np.ndarray:
    """The dense 4n^2 x 4n^2 step operator (column-by-column materialization)."""
    if n > 32:
        raise ValueError("dense torus step limited to n <= 32")
    dim = 4 * n * n
    coin = _grover_coin(4)
    m = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        basis = np.zeros((n, n, 4), dtype=np.complex128)
        basis[col // (4 * n), (col // 4) % n, col % 4] = 1.0
        m[:, col] = _torus_step(basis, marked, coin).reshape(-1)
    return m


# ---------------------------------------------------------------------------
# NAND-formula evaluation


def nand_value(x) -> int:
    """Classical evaluation of the balanced NAND tree over len(x) leaves."""
    vals = [int(b) for b in x]
    n = len(vals)
    if n < 1 or n & (n - 1):
        raise ValueError("leaf count must be a power of two")
    while len(vals) > 1:
        vals = [1 - (vals[2 * i] & vals[2 * i + 1])
                for i in range(len(vals) // 2)]
    return vals[0]


class _NandWalk:
    """Tail-augmented balanced NAND tree: directed-edge state space.

    Nodes: tail w_L..w_1, then the balanced tree in heap order (node 1 is
    the root, children of k are 2k and 2k+1, leaves are n..2n-1).
    """

    def __init__(self, n: int):
        if n < 2 or n & (n - 1):
            raise ValueError("leaf count must be a power of two")
        if n > 64:
            raise ValueError("balanced NAND walk limited to n <= 64 leaves")
        self.n = n
        self.L = 2 * math.ceil(math.sqrt(n))
        edges = []  # undirected (a, b) with a, b node ids
        # tail node w_i has id ("w", i); tree node k has id ("t", k)
        for i in range(self.L, 1, -1):
            edges.append((("w", i), ("w", i - 1)))
        edges.append((("w", 1), ("t", 1)))
        for k in range(1, n):
            edges.append((("t", k), ("t", 2 * k)))
            edges.append((("t", k), ("t", 2 * k + 1)))
        self.edges = edges
        self.states = []  # directed edges (a -> b)
        for a, b in edges:
            self.states.append((a, b))
            self.states.append((b, a))
        self.index = {s: i for i, s in enumerate(self.states)}
        self.out_edges: dict = {}
        for a, b in self.states:
            self.out_edges.setdefault(a, []).append(self.index[(a, b)])
        self.dim = len(self.states)

    def leaf_state(self, j: int) -> int:
        """The outgoing edge of leaf j (0-indexed)."""
        return self.index[(("t", self.n + j), ("t", (self.n + j) // 2))]

    def step_matrix(self, x) -> np.ndarray:
        """Dense one-step operator S.C.Q for input bits x."""
        q = np.ones(self.dim)
        for j, bit in enumerate(x):
            if int(bit):
                q[self.leaf_state(j)] = -1.0
        c = np.zeros((self.dim, self.dim))
        for node, outs in self.out_edges.items():
            d = _grover_coin(len(outs))
            for a, ia in enumerate(outs):
                for b, ib in enumerate(outs):
                    c[ia, ib] = d[a, b]
        s = np.zeros((self.dim, self.dim))
        for a, b in self.edges:
            s[self.index[(a, b)], self.index[(b, a)]] = 1.0
            s[self.index[(b, a)], self.index[(a, b)]] = 1.0
        return s @ c @ np.diag(q)

    def start_state(self) -> np.ndarray:
        """Momentum-pi/2 packet on the tail, shaped to match the tail profile
        of the step operator's eigenvalue-i eigenvector.

        The walk restricted to the tail does not depend on x, so the profile
        is universal: incoming edges (w_i -> w_{i-1}) carry phase (-i)^(i-1),
        outgoing edges (w_i -> w_{i+1}) carry -(i)^(i-1).  Formulas with a
        value-0 subtree at the root keep an eigenvalue-i eigenvector with
        constant modulus on the tail (overlap ~ 0.4-0.6 with this packet);
        value-1 formulas have none.
        """
        v = np.zeros(self.dim, dtype=np.complex128)
        for i in range(1, self.L + 1):
            down = ("w", i - 1) if i > 1 else ("t", 1)
            v[self.index[(("w", i), down)]] = (-1j) ** (i - 1)
            if i < self.L:
                v[self.index[(("w", i), ("w", i + 1))]] = -(1j) ** (i - 1)
        return v / np.linalg.norm(v)


def nand_phase_probability(x, steps: int) -> float:
    """Exact probability that phase estimation of the step operator on the
    start packet reads phase 1/4 (eigenvalue i), with steps = 2^b - 1 walk
    applications for b precision bits."""
    b = (steps + 1).bit_length() - 1
    if steps < 1 or (1 << b) != steps + 1:
        raise ValueError("steps must be 2^b - 1 for some b >= 1")
    walk = _NandWalk(len(x))
    u = walk.step_matrix(x)
    # Pr[y = 2^(b-2)] = || 2^-b sum_t (e^{-i pi/2} U)^t |packet> ||^2
    acc = np.zeros(walk.dim, dtype=np.complex128)
    cur = walk.start_state()
    for _ in range(steps + 1):
        acc += cur
        cur = -1j * (u @ cur)
    acc /= steps + 1
    return float(np.linalg.norm(acc) ** 2)


def _nand_inputs(n: int, rng, samples: int) -> list[str]:
    if n <= 8:
        return [format(v, f"0{n}b") for v in range(2 ** n)]
    out = {"0" * n, "1" * n}
    while len(out) < samples:
        out.add("".join(str(b) for b in rng.integers(0, 2, size=n)))
    return sorted(out)


def nand_calibrate(n: int, rng_seed=0, samples: int = 40) -> int:
    """Pin the per-estimation step count by sweeping precision bits b
    (walk steps 2^b - 1 spanning roughly [sqrt(n), 40 sqrt(n)]) and
    maximizing the worst-case vote margin on a held-out input set."""
    rng = as_generator(rng_seed)
    inputs = _nand_inputs(n, rng, samples)
    vals = {x: nand_value(x) for x in inputs}
    g = config.NAND_VOTE_OR
    lo = max(2, math.ceil(math.log2(math.sqrt(n))))
    hi = math.ceil(math.log2(10 * math.sqrt(n))) + 2
    best_t, best_margin = (1 << lo) - 1, -1.0
    for b in range(lo, hi + 1):
        steps = (1 << b) - 1
        margin = 2.0
        for x in inputs:
            run = 1.0 - (1.0 - nand_phase_probability(x, steps)) ** g
            margin = min(margin, 0.5 - run if vals[x] else run - 0.5)
        if margin > best_margin:
            best_t, best_margin = steps, margin
    if best_margin <= 0:
        raise RuntimeError(f"calibration failed to separate classes at n={n}")
    return best_t


def nand_evaluate(x, rng_seed=0, reps: int = 25, backend: str = "analytic"
                  ) -> tuple[int, CostReport]:
    """Walk-based NAND evaluation, majority over `reps` runs.

    One run ORs NAND_VOTE_OR phase estimations of the step operator on the
    tail packet; a reading of phase 1/4 (eigenvalue i) flags a value-0
    formula, so the majority bit is inverted at the end.  The statevector
    backend runs the estimation circuit; the analytic backend samples the
    same outcome law from the exact phase-1/4 probability.
    """
    n = len(x)
    if backend not in ("analytic", "statevector"):
        raise ValueError(f"unknown backend {backend!r}")
    walk = _NandWalk(n)
    tstar = config.NAND_TSTAR.get(n)
    if tstar is None:
        tstar = nand_calibrate(n)
    bits = (tstar + 1).bit_length() - 1
    g = config.NAND_VOTE_OR
    rng = as_generator(rng_seed)
    ledger = QueryLedger()
    t0 = time.perf_counter_ns()
    if backend == "analytic":
        p = nand_phase_probability(x, tstar)
        outcomes = rng.random((reps, g)) < p
    else:
        u = walk.step_matrix(x).astype(np.complex128)
        d = 1 << math.ceil(math.log2(walk.dim))
        m = np.eye(d, dtype=np.complex128)
        m[:walk.dim, :walk.dim] = u
        amps = np.zeros(d, dtype=np.complex128)
        amps[:walk.dim] = walk.start_state()
        dense = DenseUnitary(m)
        packet = from_amplitudes(amps)
        outcomes = np.array([[phase_estimate(dense, packet, bits, rng) == 0.25
                              for _ in range(g)] for _ in range(reps)])
    votes = 0
    for run in outcomes:
        ledger.charge("nand", g * tstar)  # one query per walk step (Q)
        votes += bool(run.any())
    bit = 0 if 2 * votes > reps else 1
    return bit, CostReport.from_delta(ledger, (0, {}), t0)


# ---------------------------------------------------------------------------
# MNRS cost model and the Johnson-graph walk


@dataclass
class MnrsCosts:
    S: float
    U: float
    C: float
    eps: float
    delta: float

    def __post_init__(self):
        if min(self.S, self.U, self.C) < 0:
            raise ValueError("costs must be non-negative")
        if not 0 < self.eps <= 1 or not 0 < self.delta <= 1:
            raise ValueError("need 0 < eps <= 1 and 0 < delta <= 1")


def mnrs_cost(costs: MnrsCosts, solution: int, regime: str) -> float:
    """Unit-constant evaluation of the sampling / walk cost formulas."""
    if regime not in ("classical", "quantum"):
        raise ValueError(f"unknown regime {regime!r}")
    s, u, c = costs.S, costs.U, costs.C
    inv_e, inv_ed = 1.0 / costs.eps, 1.0 / (costs.eps * costs.delta)
    if regime == "quantum":
        inv_e, inv_ed = math.sqrt(inv_e), math.sqrt(inv_ed)
    if solution == 1:
        return inv_e * (s + c)
    if solution == 2:
        return s + inv_ed * u + inv_e * c
    if solution == 3:
        return s + inv_ed * (u + c)
    raise ValueError("solution must be 1, 2 or 3")


def johnson_eps(n: int, r: int) -> float:
    """Worst-case marked-vertex probability: one duplicate pair in the subset."""
    return r * (r - 1) / (n * (n - 1))


def johnson_delta(n: int, r: int) -> float:
    return n / (r * (n - r))


def johnson_transition_matrix(n: int, r: int) -> np.ndarray:
    """Dense J(n, r) transition matrix (uniform over neighbor subsets)."""
    if n > 12:
        raise ValueError("dense Johnson matrix limited to n <= 12")
    verts = list(itertools.combinations(range(n), r))
    pos = {v: i for i, v in enumerate(verts)}
    m = np.zeros((len(verts), len(verts)))
    deg = r * (n - r)
    for v in verts:
        inside = set(v)
        for i in v:
            for j in range(n):
                if j not in inside:
                    w = tuple(sorted(inside - {i} | {j}))
                    m[pos[w], pos[v]] += 1.0 / deg
    return m


def johnson_spectral_gap(n: int, r: int) -> float:
    """1 - lambda_2 of J(n, r), with lambda_2 the second largest (signed)."""
    vals = np.sort(np.linalg.eigvalsh(johnson_transition_matrix(n, r)))
    return float(1.0 - vals[-2])


def johnson_walk_distinctness(x, r: int, rng_seed=0,
                              eps_samples: int = 0):
    """Classical random walk on J(n, r) searching a duplicate pair.

    Step 0 queries the r sampled elements; each move queries the one new
    element.  The move budget is 20 (1/eps)(1/delta).  Returns
    (pair or None, CostReport, report dict); with eps_samples > 0 the report
    adds an uncharged marked-frequency estimate over fresh uniform subsets.
    """
    arr = list(x)
    n = len(arr)
    if not 2 <= r < n:
        raise ValueError("need 2 <= r < n")
    if n > 200:
        raise ValueError("johnson walk limited to n <= 200")
    rng = as_generator(rng_seed)
    ledger = QueryLedger()
    t0 = time.perf_counter_ns()
    eps = johnson_eps(n, r)
    delta = johnson_delta(n, r)
    budget = math.ceil(20.0 / (eps * delta))

    def find_pair(idxs) -> tuple[int, int] | None:
        seen: dict = {}
        for i in sorted(idxs):
            if arr[i] in seen:
                return seen[arr[i]], i
            seen[arr[i]] = i
        return None

    subset = set(int(i) for i in rng.choice(n, size=r, replace=False))
    ledger.charge("johnson", r)
    pair = find_pair(subset)
    moves = 0
    while pair is None and moves < budget:
        outs = [i for i in range(n) if i not in subset]
        i = int(rng.choice(sorted(subset)))
        j = int(rng.choice(outs))
        subset.remove(i)
        subset.add(j)
        ledger.charge("johnson")
        moves += 1
        pair = find_pair(subset)
    report = {"moves": moves, "budget": budget, "eps": eps, "delta": delta}
    if eps_samples > 0:
        hits = 0
        for _ in range(eps_samples):
            s = rng.choice(n, size=r, replace=False)
            hits += len(set(arr[int(i)] for i in s)) < r
        report["eps_empirical"] = hits / eps_samples
        report["eps_samples"] = eps_samples
    flags = ["uncharged-eps-sampling"] if eps_samples else []
    return pair, CostReport.from_delta(ledger, (0, {}), t0, flags), report


# ---------------------------------------------------------------------------
# electric networks: hitting time vs effective resistance


@dataclass
class ElectricNetwork:
    n: int
    edges: list  # (u, v, weight)
    marked: set
    sigma: list | None = None  # defaults to the stationary distribution

    def __post_init__(self):
        self.marked = set(self.marked)
        if not self.marked:
            raise ValueError("marked set must be non-empty")
        for u, v, w in self.edges:
            if w <= 0:
                raise ValueError("weights must be positive")
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise ValueError("bad edge")

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def stationary(self) -> np.ndarray:
        deg = np.zeros(self.n)
        for u, v, w in self.edges:
            deg[u] += w
            deg[v] += w
        return deg / (2.0 * self.total_weight())


def _check_connected(net: ElectricNetwork) -> None:
    seen = {0}
    frontier = [0]
    adj: dict = {}
    for u, v, _ in net.edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    while frontier:
        u = frontier.pop()
        for v in adj.get(u, []):
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    if len(seen) != net.n:
        raise ValueError("graph is disconnected")


def hitting_resistance_check(net: ElectricNetwork) -> tuple[float, float, float]:
    """Computes the hitting time H from the stationary start and 2WR with R
    from an independent Laplacian flow solve; returns (H, 2WR, relative gap).
    """
    _check_connected(net)
    n = net.n
    xi = net.stationary()
    W = net.total_weight()
    marked = sorted(net.marked)
    if len(marked) == n:
        return 0.0, 0.0, 0.0
    free = [u for u in range(n) if u not in net.marked]
    fpos = {u: i for i, u in enumerate(free)}
    deg = np.zeros(n)
    lap = np.zeros((n, n))
    for u, v, w in net.edges:
        deg[u] += w
        deg[v] += w
        lap[u, u] += w
        lap[v, v] += w
        lap[u, v] -= w
        lap[v, u] -= w
    # hitting time: h = 1 + P h on unmarked vertices, h = 0 on marked
    a = np.eye(len(free))
    for u, v, w in net.edges:
        for s, t in ((u, v), (v, u)):
            if s in fpos and t in fpos:
                a[fpos[s], fpos[t]] -= w / deg[s]
    h = np.linalg.solve(a, np.ones(len(free)))
    H = float(sum(xi[u] * h[fpos[u]] for u in free))
    # effective resistance: ground M, inject sigma = xi, energy = phi^T sigma
    lap_ff = lap[np.ix_(free, free)]
    sigma_f = xi[free]
    phi = np.linalg.solve(lap_ff, sigma_f)
    if np.max(np.abs(lap_ff @ phi - sigma_f)) > 1e-10:
        raise ValueError("flow solve residual exceeds 1e-10 (ill-conditioned)")
    R = float(phi @ sigma_f)
    two_wr = 2.0 * W * R
    gap = abs(H - two_wr) / H if H else abs(H - two_wr)
    return H, two_wr, gap


# ---------------------------------------------------------------------------
# quantum backtracking (detection of a marked node in an explicit tree)


@dataclass
class RootedTree:
    """Explicit rooted tree on nodes 0..n-1 with node 0 the root."""
    parent: list  # parent[0] ignored

    @property
    def n(self) -> int:
        return len(self.parent)

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(1, self.n):
            out[self.parent[v]].append(v)
        return out

    def depths(self) -> list[int]:
        d = [0] * self.n
        for v in range(1, self.n):
            if self.parent[v] >= v:
                raise ValueError("parent array must be topologically ordered")
            d[v] = d[self.parent[v]] + 1
        return d


def _backtracking_operator(tree: RootedTree, marked: set
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Dense R_B R_A on the root+edge space, plus the M = empty-set
    stationary vector (root term sqrt(sigma / (C1 R)), 1 per edge)."""
    n = tree.n
    children = tree.children()
    depth = tree.depths()
    # state 0 is |root>, state v (v >= 1) is the edge (parent[v], v)
    dim = n
    r_bound = max(max(depth), 1) * config.BACKTRACK_C1
    root_term = math.sqrt(1.0 / r_bound)

    def reflection(part: int) -> np.ndarray:
        m = np.eye(dim)
        for v in range(n):
            if depth[v] % 2 != part:
                continue
            block = ([0] if v == 0 else [v]) + children[v]
            if v in marked:
                # identity coin composed with the query's phase flip
                for s in block:
                    m[s, s] = -1.0
                continue
            psi = np.zeros(dim)
            for s in block:
                psi[s] = root_term if s == 0 else 1.0
            norm = np.linalg.norm(psi)
            if norm == 0:
                continue
            psi /= norm
            for a in block:
                for b in block:
                    m[a, b] = 2.0 * psi[a] * psi[b] - (1.0 if a == b else 0.0)
        return m

    u = reflection(1) @ reflection(0)
    stat = np.ones(dim)
    stat[0] = root_term
    return u, stat / np.linalg.norm(stat)


def backtracking_detect(tree: RootedTree, marked, precision_bits: int | None = None,
                        rng_seed=0) -> tuple[bool, CostReport]:
    """Phase-estimates R_B R_A on the stationary-form start state; "exists"
    iff the estimated phase is at least one ulp away from zero."""
    marked = set(marked)
    n = tree.n
    if n > 31:
        raise ValueError("backtracking detector limited to 31 nodes")
    ledger = QueryLedger()
    t0 = time.perf_counter_ns()
    if 0 in marked:
        ledger.charge("backtrack")
        return True, CostReport.from_delta(ledger, (0, {}), t0)
    if precision_bits is None:
        precision_bits = math.ceil(
            math.log2(config.BACKTRACK_C * math.sqrt(n))) + 2
    u, start = _backtracking_operator(tree, marked)
    dim = 1 << max(1, (n - 1).bit_length())
    m = np.eye(dim, dtype=np.complex128)
    m[:n, :n] = u
    amps = np.zeros(dim, dtype=np.complex128)
    amps[:n] = start
    phi = phase_estimate(DenseUnitary(m), StateVector(dim.bit_length() - 1, amps),
                         precision_bits, rng_seed)
    # each controlled power of R_B R_A consults the marked-set oracle once
    ledger.charge("backtrack", (1 << precision_bits) - 1)
    exists = 0.0 < phi < 1.0 and min(phi, 1.0 - phi) >= 1.0 / (1 << precision_bits)
    return exists, CostReport.from_delta(ledger, (0, {}), t0)
