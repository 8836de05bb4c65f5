"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single "criterion NN <name>: PASS" line (visible with -s
or in the captured output) and asserts the same condition.
"""

import contextlib
import io
import itertools
import json
import math

import numpy as np
import pytest

from qlab import cli, config, grover, walks
from qlab.dyck import dyck_decide
from qlab.emulator import SearchBackend, ideal_backend
from qlab.fingerprint import (FingerprintParams, classical_fingerprint_stream,
                              fingerprint_error_probability,
                              fingerprint_state, swap_test,
                              swap_test_probability, value_of)
from qlab.graphs import Graph, hamiltonian_path, qbfs, qdfs
from qlab.mitm import SubsetSumInstance, subset_sum, subset_sum_brute_oracle
from qlab.oracles import oracle_from_generator
from qlab.search import minimum_search, minimum_search_boosted
from qlab.simulator import as_generator, from_amplitudes, standard_gate
from qlab.strings import palindrome_check, strings_equal
from qlab.walks import (ElectricNetwork, RootedTree, backtracking_detect,
                        coined_step_unitary_circle, coined_walk_1d,
                        grid_step_unitary, grid_walk_search,
                        hitting_resistance_check, johnson_delta,
                        johnson_spectral_gap, johnson_walk_distinctness,
                        nand_evaluate, nand_value, random_walk_circle,
                        random_walk_line)


def _verdict(num: int, name: str, ok: bool) -> None:
    print(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num:02d} {name}"


def _run_cli(*argv) -> dict:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(argv))
    assert code == 0, argv
    return json.loads(buf.getvalue())


def test_criterion_01_grover_success_law():
    trials = 10_000
    rng = as_generator(101)
    ok = True
    for n in (4, 8, 16, 32, 64, 128, 256, 512, 1024):
        for t in range(1, min(n, 16) + 1):
            plan = grover.plan_known_t(n, t)
            marked = sorted(int(i) for i in rng.choice(n, size=t, replace=False))
            probs = grover.grover_final_probabilities(n, marked, plan.L)
            # sample the measurement step of grover_known_t in bulk
            cdf = np.cumsum(probs)
            idx = np.searchsorted(cdf, rng.random(trials) * cdf[-1], "right")
            hits = int(np.isin(idx.clip(0, len(probs) - 1), marked).sum())
            p = grover.analytic_success(n, t, plan.L)
            sigma = math.sqrt(max(p * (1 - p), 1e-12) / trials)
            ok &= abs(hits / trials - p) <= 3 * sigma + 1e-9
            ok &= 1 - hits / trials <= t / n + 3 * sigma + 1e-9
    # honest end-to-end runs on a subsample
    for n, t in ((64, 1), (256, 3), (1024, 16)):
        marked = list(range(t))
        p = grover.analytic_success(n, t, grover.plan_known_t(n, t).L)
        runs = 400
        wins = 0
        for seed in range(runs):
            f = oracle_from_generator("marked-set:" + ",".join(map(str, marked)), n)
            found, _ = grover.grover_known_t(f, rng_seed=seed)
            wins += found in set(marked)
        sigma = math.sqrt(p * (1 - p) / runs)
        ok &= abs(wins / runs - p) <= 3 * sigma + 1e-9
    _verdict(1, "grover success law", ok)


def test_criterion_02_two_amplitude_closed_forms():
    ok = True
    for n in range(2, 33):
        for t in range(1, n + 1):
            plan = grover.plan_known_t(n, t)
            iters = max(plan.L, 3)
            trace = grover.two_amplitude_trace(n, t, iters)
            dim = 1 << max(1, (n - 1).bit_length())
            amps = np.zeros(dim, dtype=np.complex128)
            amps[:n] = 1.0 / math.sqrt(n)
            marked = np.arange(t)
            d = grover.diffusion(n).matrix
            for j in range(iters + 1):
                b, g = trace[j]
                ok &= np.max(np.abs(amps[marked] - g)) < 1e-9
                if t < n:
                    ok &= np.max(np.abs(amps[t:n] - b)) < 1e-9
                amps[marked] *= -1.0
                amps = d @ amps
    _verdict(2, "two-amplitude collapse", ok)


def test_criterion_03_unknown_t():
    n, trials, hits = 1024, 1000, 0
    for seed in range(trials):
        f = oracle_from_generator("single-marked:77", n)
        found, _ = grover.grover_unknown_t(f, rng_seed=seed)
        hits += found == 77
    f = oracle_from_generator("none", n)
    _, rep = grover.grover_unknown_t(f, rng_seed=0)
    ok = hits / trials >= 0.5 and rep.queries == grover.staged_charge(n)
    _verdict(3, "unknown-t schedule", ok)


def test_criterion_04_minimum_finding():
    # rank chain: visiting probability of the j-th smallest is 1/j
    n, trials = 64, 100_000
    rng = as_generator(4)
    visits = np.zeros(n + 1, dtype=np.int64)
    ranks = rng.integers(1, n + 1, size=trials)
    while len(ranks):
        visits += np.bincount(ranks, minlength=n + 1)
        ranks = ranks[ranks > 1]
        ranks = (rng.random(len(ranks)) * (ranks - 1)).astype(np.int64) + 1
    ok = True
    for j in range(1, n + 1):
        p = 1.0 / j
        sigma = math.sqrt(p * (1 - p) / trials)
        ok &= visits[j] / trials <= p + 3 * sigma + 1e-9
    ratios = []
    for size in (64, 256, 1024, 4096):
        qs = []
        for seed in range(30):
            a = [int(v) for v in as_generator(seed).permutation(size)]
            _, rep = minimum_search(a, SearchBackend("analytic", seed),
                                    rng_seed=seed)
            qs.append(rep.queries)
        ratios.append(np.mean(qs) / math.sqrt(size))
    ok &= max(ratios) / min(ratios) <= 2.0
    _verdict(4, "minimum finding", ok)


def test_criterion_05_oracle_equivalence():
    ok = True
    ib = ideal_backend(0)
    # strings: exhaustive pairs, exhaustive palindromes, random length <= 20
    for n in range(0, 6):
        for s in itertools.product("01", repeat=n):
            for t in itertools.product("01", repeat=n):
                s2, t2 = "".join(s), "".join(t)
                ok &= strings_equal(s2, t2, ib)[0] == (s2 == t2)
    for n in range(0, 15):
        for s in ("".join(b) for b in itertools.product("01", repeat=min(n, 12))):
            ok &= palindrome_check(s, ib)[0] == (s == s[::-1])
    rng = as_generator(5)
    for _ in range(200):
        s = "".join(rng.choice(["0", "1"], size=20))
        t = "".join(rng.choice(["0", "1"], size=20))
        ok &= strings_equal(s, t, ib)[0] == (s == t)
    # graphs: exhaustive n = 4, random n in {5, 6, 7}
    def ham_brute(g):
        return any(all(g.has_edge(p[i], p[i + 1]) for i in range(g.n - 1))
                   for p in itertools.permutations(range(g.n)))

    pairs = list(itertools.combinations(range(4), 2))
    for mask in range(1 << len(pairs)):
        g = Graph(4)
        for b, (u, v) in enumerate(pairs):
            if mask >> b & 1:
                g.add_edge(u, v)
        g.finalize()
        path, _ = hamiltonian_path(g, "quantum-dp", ib)
        ok &= (path is not None) == ham_brute(g)
    for seed in range(30):
        rng = as_generator(seed)
        n = 5 + seed % 3
        g = Graph(n)
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < 0.5:
                    g.add_edge(u, v)
        g.finalize()
        path, _ = hamiltonian_path(g, "quantum-bf", ib)
        ok &= (path is not None) == ham_brute(g)
    # subset-sum: random n <= 16, all variants vs the exhaustive oracle
    rng = as_generator(55)
    for trial in range(40):
        n = int(rng.integers(2, 17))
        a = [int(v) for v in rng.integers(1, 50, size=n)]
        k = int(rng.integers(0, sum(a) + 2))
        inst = SubsetSumInstance(a, k)
        want = subset_sum_brute_oracle(inst)
        for variant in ("brute", "grover", "mitm-classical", "mitm-quantum"):
            subset, _ = subset_sum(inst, variant, ib)
            ok &= (subset is not None) == want
    # Dyck: all inputs up to length 14
    def dyck_brute(x, k):
        d = 0
        for c in x:
            d += 1 if c == "0" else -1
            if d < 0 or d > k:
                return False
        return d == 0

    for k in (1, 2):
        for n in range(0, 15):
            for bits in itertools.product("01", repeat=n):
                x = "".join(bits)
                ok &= dyck_decide(x, k, ib)[0] == dyck_brute(x, k)
    # stochastic budgets: single run >= 2/3, boosted >= 0.99
    hits = 0
    for seed in range(150):
        a = [int(v) for v in as_generator(seed).permutation(128)]
        j, _ = minimum_search(a, SearchBackend("analytic", seed), rng_seed=seed)
        hits += a[j] == 0
    ok &= hits / 150 >= 2 / 3
    trials, wins = 800, 0
    for seed in range(trials):
        a = [int(v) for v in as_generator(seed + 1).permutation(64)]
        j, _ = minimum_search_boosted(a, SearchBackend("analytic", seed), k=5)
        wins += a[j] == 0
    sigma = math.sqrt(0.99 * 0.01 / trials)
    ok &= wins / trials >= 0.99 - 3 * sigma
    _verdict(5, "oracle equivalence", ok)


def test_criterion_06_query_exponent_regressions():
    res = _run_cli("sweep", "--sub", "minsearch", "--axis", "n", "--values",
                   "64,128,256,512", "--seed", "0", "--trials", "20")
    ok = 0.4 <= res["exponent"] <= 0.6
    # all_ones: queries track sqrt(n * t) along both axes
    consts = []
    res = _run_cli("sweep", "--sub", "allones", "--axis", "n", "--values",
                   "256,1024,4096", "--set", "t=4", "--seed", "0",
                   "--trials", "10")
    ok &= 0.3 <= res["exponent"] <= 0.7
    consts += [r["queries_mean"] / math.sqrt(r["n"] * 4) for r in res["rows"]]
    res = _run_cli("sweep", "--sub", "allones", "--axis", "t", "--values",
                   "2,8,32", "--set", "n=4096", "--seed", "0", "--trials", "10")
    consts += [r["queries_mean"] / math.sqrt(4096 * r["t"]) for r in res["rows"]]
    ok &= max(consts) / min(consts) <= 2.0
    # grover vs meet-in-the-middle gap on unsolvable instances
    for n in (18, 24):
        gaps = []
        for seed in range(3):
            _, g = subset_sum(SubsetSumInstance([1] * n, -1), "grover",
                              SearchBackend("analytic", seed))
            _, m = subset_sum(SubsetSumInstance([1] * n, -1), "mitm-quantum",
                              SearchBackend("analytic", seed))
            gaps.append(math.log2(g.queries / m.queries))
        ok &= abs(float(np.mean(gaps)) - n / 6) <= 2.0
    res = _run_cli("sweep", "--sub", "dyck", "--axis", "n", "--values",
                   "256,1024,4096", "--set", "k=1", "--seed", "0",
                   "--trials", "10")
    ok &= 0.35 <= res["exponent"] <= 0.65
    _verdict(6, "query-exponent regressions", ok)


def test_criterion_07_walk_figures():
    p = random_walk_circle(5, 98)
    ok = abs(p[0] - 0.2) < 1e-6
    from fractions import Fraction
    exact = random_walk_line(3, exact=True)
    ok &= exact == [Fraction(1, 8), 0, Fraction(3, 8), 0,
                    Fraction(3, 8), 0, Fraction(1, 8)]
    coin = standard_gate("H")
    positions, probs = coined_walk_1d(20, coin)
    u = coined_step_unitary_circle(64, coin).matrix
    amps = np.zeros(128, dtype=np.complex128)
    amps[0] = 1.0
    amps = np.linalg.matrix_power(u, 20) @ amps
    dense = (np.abs(amps.reshape(64, 2)) ** 2).sum(axis=1)
    ok &= all(abs(pr - dense[pos % 64]) < 1e-9
              for pos, pr in zip(positions, probs))
    ok &= probs[positions < 0].sum() > probs[positions > 0].sum()
    _verdict(7, "walk figures", ok)


def test_criterion_08_torus_walk():
    n = 6
    u = grid_step_unitary(n)
    uniform = np.full(4 * n * n, 1.0 / math.sqrt(4 * n * n))
    ok = np.max(np.abs(np.linalg.matrix_power(u, 100) @ uniform - uniform)) < 1e-9
    for n in (4, 6, 8):
        _, report = grid_walk_search(n, marked=(1, 2))
        ok &= report["steps"] == math.ceil(8 * n * math.log(n))
        ok &= report["best_probability"] > 5.0 / (n * n)
    _verdict(8, "torus walk", ok)


def test_criterion_09_swap_test():
    zero = from_amplitudes([1.0, 0.0])
    one = from_amplitudes([0.0, 1.0])
    ok = abs(swap_test_probability(zero, zero) - 1.0) < 1e-9
    ok &= abs(swap_test_probability(zero, one) - 0.5) < 1e-9
    rng = as_generator(9)
    runs = 10_000
    for pair in range(20):
        def rand_state():
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            return from_amplitudes(v / np.linalg.norm(v))
        a, b = rand_state(), rand_state()
        p = swap_test_probability(a, b)
        _, observed = swap_test(a, b, reps=runs, rng_seed=pair)
        sigma = math.sqrt(p * (1 - p) / runs)
        ok &= abs(observed - p) <= 3 * sigma + 1e-9
    _verdict(9, "swap test", ok)


def test_criterion_10_fingerprinting():
    ok = True
    for seed in range(100_000):
        eq, _ = classical_fingerprint_stream("10110210110\n", 0.2, seed)
        if not eq:
            ok = False
            break
    stream = "101101101121011011010\n"
    for eps in (0.5, 0.2, 0.1):
        trials, errs = 5000, 0
        for seed in range(trials):
            eq, _ = classical_fingerprint_stream(stream, eps, seed)
            errs += eq
        sigma = math.sqrt(eps * (1 - eps) / trials)
        ok &= errs / trials <= eps + 3 * sigma
    rng = np.random.default_rng(10)
    for t in (1, 2, 4, 8):
        for trial in range(3):
            params = FingerprintParams.draw(t, 257, rng_seed=31 * t + trial)
            u = "".join(rng.choice(["0", "1"], size=7))
            v = "".join(rng.choice(["0", "1"], size=7))
            if t == 1:
                gamma = 2 * math.pi * params.coefficients[0] * (
                    value_of(u) - value_of(v)) / params.q
                pr = math.cos(gamma) ** 2
            else:
                pr = abs(fingerprint_state(u, v, params).amps[0]) ** 2
            want = fingerprint_error_probability(params, value_of(u),
                                                 value_of(v))
            ok &= abs(pr - want) < 1e-9
    _verdict(10, "fingerprinting", ok)


def test_criterion_11_electric_identity():
    net = ElectricNetwork(2, [(0, 1, 1.0)], {1})
    h, two_wr, gap = hitting_resistance_check(net)
    ok = abs(h - 0.5) < 1e-12 and gap < 1e-12
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(3, 51))
        edges = [(v, int(rng.integers(0, v)), float(rng.uniform(0.2, 5.0)))
                 for v in range(1, n)]      # random spanning tree
        extra = int(rng.integers(0, 2 * n))
        for _ in range(extra):
            u, v = rng.integers(0, n, size=2)
            if u != v:
                edges.append((int(u), int(v), float(rng.uniform(0.2, 5.0))))
        marked = {int(v) for v in
                  rng.choice(n, size=int(rng.integers(1, 4)), replace=False)}
        _, _, gap = hitting_resistance_check(ElectricNetwork(n, edges, marked))
        ok &= gap <= 1e-6
    _verdict(11, "electric identity", ok)


def test_criterion_12_johnson_graph():
    ok = True
    for n in range(2, 13):
        for r in range(1, n):
            ok &= abs(johnson_spectral_gap(n, r) - johnson_delta(n, r)) < 1e-9
    x = list(range(20)) + [3]               # exactly one duplicate pair
    n, r, samples = len(x), 5, 20_000
    _, _, report = johnson_walk_distinctness(x, r, rng_seed=0,
                                             eps_samples=samples)
    eps = r * (r - 1) / (n * (n - 1))
    sigma = math.sqrt(eps * (1 - eps) / samples)
    ok &= abs(report["eps_empirical"] - eps) <= 3 * sigma
    consts = []
    for size in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        rr = round(size ** (2 / 3))
        costs = walks.MnrsCosts(S=rr, U=1.0, C=0.0,
                                eps=rr * (rr - 1) / (size * (size - 1)),
                                delta=size / (rr * (size - rr)))
        consts.append(walks.mnrs_cost(costs, 2, "quantum") / size ** (2 / 3))
    ok &= max(consts) / min(consts) <= 2.0
    _verdict(12, "johnson graph", ok)


def test_criterion_13_nand_walk():
    correct = 0
    for v in range(256):
        x = format(v, "08b")
        bit, _ = nand_evaluate(x, rng_seed=v)
        correct += bit == nand_value(x)
    ok = correct == 256
    rng = np.random.default_rng(13)
    for n in (16, 32):
        wins = 0
        for trial in range(200):
            x = "".join(rng.choice(["0", "1"], size=n))
            bit, _ = nand_evaluate(x, rng_seed=trial)
            wins += bit == nand_value(x)
        ok &= wins >= 198
    _verdict(13, "nand walk", ok)


def test_criterion_14_backtracking_detector():
    rng = np.random.default_rng(14)
    correct = 0
    for trial in range(200):
        n = int(rng.integers(2, 32))
        parent = [0] + [int(rng.integers(0, v)) for v in range(1, n)]
        tree = RootedTree(parent)
        if rng.random() < 0.5 and n > 1:
            marked = {int(rng.integers(1, n))}
        else:
            marked = set()
        found, _ = backtracking_detect(tree, marked, rng_seed=trial)
        correct += found == bool(marked)
    ok = correct >= 2 * 200 // 3
    # no marked node: the start state is an exact +1 eigenvector
    tree = RootedTree([0, 0, 0, 1, 1, 2, 2])
    u, start = walks._backtracking_operator(tree, set())
    ok &= np.max(np.abs(u @ start - start)) < 1e-12
    for seed in range(20):
        found, _ = backtracking_detect(tree, set(), rng_seed=seed)
        ok &= not found
    _verdict(14, "backtracking detector", ok)
