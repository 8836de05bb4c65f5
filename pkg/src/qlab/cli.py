"""Experiment runner: every qlab operation as a subcommand.

Output is canonical JSON (sorted keys, floats printed to 12 significant
digits) or CSV; identical (arguments, seed) replay byte-identical artifacts.
Exit codes: 0 success, 2 validation error, 3 resource guard.

Stochastic subcommands require --seed.  With --trials T the per-trial seeds
are derived from (seed, worker, index); --parallel N splits the trials into N
contiguous chunks merged back in worker order, so a run is reproducible for a
fixed (seed, trials, parallel) triple.

A key=value --config file overrides the pinned constants in qlab.config
(integer values only); QLAB_MAX_QUBITS caps simulator memory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import sys

import numpy as np

from qlab import config, fingerprint, graphs, grover, mitm, search, strings, walks
from qlab.dyck import dyck_decide
from qlab.emulator import SearchBackend
from qlab.ledger import QueryLedger
from qlab.oracles import BooleanOracle, oracle_from_generator
from qlab.simulator import (DenseUnitary, ResourceError, as_generator,
                            from_amplitudes, standard_gate)

# Guard messages that signal a size/memory limit rather than bad input.
_GUARD_MARKS = ("limited to", "refuses", "cap is", "exceed", "supported for")


def canonicalize(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, (int, str)) or obj is None:
        return obj
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return canonicalize(float(obj))
    if isinstance(obj, np.ndarray):
        return canonicalize(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(canonicalize(obj), sort_keys=True, separators=(",", ": "),
                      indent=1)


def to_csv(obj) -> str:
    """Rows for list-of-dicts results, key,value rows otherwise."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    obj = canonicalize(obj)
    rows = obj.get("rows") if isinstance(obj, dict) else None
    if rows:
        cols = sorted(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([r.get(c, "") for c in cols])
        return out.getvalue()

    def flat(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                yield from flat(f"{prefix}{k}." if prefix else f"{k}.", v[k])
        elif isinstance(v, list):
            for i, item in enumerate(v):
                yield from flat(f"{prefix}{i}.", item)
        else:
            yield prefix.rstrip("."), v

    w.writerow(["key", "value"])
    for key, val in flat("", obj):
        w.writerow([key, val])
    return out.getvalue()


# ---------------------------------------------------------------------------
# argument helpers


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _load_graph(params: dict) -> graphs.Graph:
    directed = bool(params.get("directed"))
    representation = params.get("representation") or "list"
    if params.get("graph"):
        with open(params["graph"]) as fh:
            text = fh.read()
        if params.get("matrix"):
            return graphs.parse_matrix(text, directed)
        return graphs.parse_edge_list(text, directed, representation)
    if not params.get("edges"):
        raise ValueError("provide --edges or --graph")
    lines = []
    for tok in params["edges"].split(","):
        u, _, rest = tok.partition("-")
        v, _, w = rest.partition(":")
        lines.append(f"{u} {v} {w}".strip())
    if params.get("n") is not None:
        lines.insert(0, str(params["n"]))
    return graphs.parse_edge_list("\n".join(lines), directed, representation)


def _gen_dyck(n: int, k: int, rng) -> str:
    """Random balanced string of even length n with nesting depth <= k."""
    if n % 2:
        raise ValueError("balanced strings have even length")
    out = []
    depth = 0
    for pos in range(n):
        remaining = n - pos
        can_open = depth < k and depth + 1 <= remaining - 1
        can_close = depth > 0
        if can_open and (not can_close or rng.random() < 0.5):
            out.append("(")
            depth += 1
        else:
            out.append(")")
            depth -= 1
    return "".join(out)


def _backend(params: dict, seed) -> SearchBackend:
    return SearchBackend(params.get("backend") or "analytic", seed)


# ---------------------------------------------------------------------------
# one function per subcommand: run_one(params, seed) -> (result dict, queries)


def run_grover(params, seed):
    n = params["n"]
    marked = _ints(params["marked"])
    f = oracle_from_generator("marked-set:" + ",".join(map(str, marked)), n)
    plan = grover.plan_known_t(n, len(marked))
    found, rep = grover.grover_known_t(f, rng_seed=seed)
    return {
        "found": found,
        "success": found is not None,
        "analytic_success": grover.analytic_success(n, len(marked), plan.L),
        "iterations": plan.L,
    }, rep


def run_aamp(params, seed):
    k = params["qubits"]
    h = standard_gate("H").matrix
    m = np.array([[1.0]])
    for _ in range(k):
        m = np.kron(m, h)
    A = DenseUnitary(m)
    good = _ints(params["good"])
    found, rep = grover.amplitude_amplify(A, good, rng_seed=seed)
    return {"found": found, "success": found in good}, rep


def run_minsearch(params, seed):
    rng = as_generator(seed)
    a = [int(v) for v in rng.permutation(params["n"])]
    j, rep = search.minimum_search(a, _backend(params, seed), rng_seed=seed)
    return {"index": j, "success": a[j] == min(a)}, rep


def run_firstone(params, seed):
    n = params["n"]
    first = params["first"]
    bits = [0] * n if first < 0 else [0] * first + [1] * (n - first)
    f = BooleanOracle(n, lambda i: bits[i], QueryLedger(), "firstone")
    backend = _backend(params, seed)
    variant = params.get("variant") or "binary"
    if variant == "bounded":
        idx, rep = search.bounded_first_one(f, backend, rng_seed=seed)
    else:
        idx, rep = search.first_one_search(f, variant=variant, backend=backend,
                                           rng_seed=seed)
    want = None if first < 0 else first
    return {"index": idx, "success": idx == want}, rep


def run_allones(params, seed):
    n, t = params["n"], params["t"]
    marked = sorted(set(i * n // max(1, t) for i in range(t)))
    f = oracle_from_generator(
        "marked-set:" + ",".join(map(str, marked)) if marked else "none", n)
    found, rep = search.all_ones(f, backend=_backend(params, seed), rng_seed=seed)
    return {"indices": found, "success": found == marked}, rep


def run_streq(params, seed):
    eq, rep, witness = strings.strings_equal(params["s"], params["t"],
                                             _backend(params, seed), seed)
    return {"equal": eq, "witness": witness}, rep


def run_palindrome(params, seed):
    ok, rep, witness = strings.palindrome_check(params["s"],
                                                _backend(params, seed), seed)
    return {"palindrome": ok, "witness": witness}, rep


def run_lcp(params, seed):
    val, rep = strings.lcp(params["s"], params["t"], _backend(params, seed), seed)
    return {"lcp": val}, rep


def run_strcmp(params, seed):
    val, rep = strings.compare_lex(params["s"], params["t"],
                                   _backend(params, seed), seed)
    return {"order": val}, rep


def run_strsort(params, seed):
    items = params["strings"].split(",")
    order, rep = strings.string_sort(items, _backend(params, seed), seed)
    return {"order": order,
            "success": [items[i] for i in order] == sorted(items)}, rep


def run_mostfreq(params, seed):
    items = params["strings"].split(",")
    idx, rep = strings.most_frequent(items, _backend(params, seed), seed)
    best = max(items.count(s) for s in items)
    return {"index": idx, "success": items.count(items[idx]) == best}, rep


def run_dyck(params, seed):
    k = params["k"]
    x = params.get("x")
    if x is None:
        if params.get("n") is None:
            raise ValueError("provide --x or --n")
        x = _gen_dyck(params["n"], k, as_generator(seed))
    ok, rep, witness = dyck_decide(x, k, _backend(params, seed))
    return {"balanced_depth_le_k": ok,
            "witness": None if witness is None else list(witness),
            "length": len(x)}, rep


def run_dfs(params, seed):
    g = _load_graph(params)
    order, rep = graphs.qdfs(g, params.get("start") or 0,
                             _backend(params, seed), seed)
    return {"order": order}, rep


def run_bfs(params, seed):
    g = _load_graph(params)
    dist, rep = graphs.qbfs(g, params.get("start") or 0,
                            _backend(params, seed), seed)
    return {"dist": [d if d != math.inf else None for d in dist]}, rep


def run_topsort(params, seed):
    params = dict(params, directed=True)
    g = _load_graph(params)
    order, rep = graphs.qtopsort(g, _backend(params, seed), seed)
    pos = {v: i for i, v in enumerate(order)}
    ok = all(pos[u] < pos[v] for u in range(g.n) for v in g.neighbors(u))
    return {"order": order, "success": ok}, rep


def run_daggame(params, seed):
    params = dict(params, directed=True)
    g = _load_graph(params)
    win, rep = graphs.dag_game_solve(g, _backend(params, seed), seed)
    return {"win": [bool(w) for w in win]}, rep


def run_daglongest(params, seed):
    params = dict(params, directed=True)
    g = _load_graph(params)
    length, rep = graphs.dag_longest_path(g, params.get("source") or 0,
                                          _backend(params, seed), seed)
    return {"length": length}, rep


def run_hampath(params, seed):
    g = _load_graph(params)
    path, rep = graphs.hamiltonian_path(g, params.get("variant") or "dp",
                                        _backend(params, seed), seed)
    return {"path": path, "exists": path is not None}, rep


def run_tsp(params, seed):
    g = _load_graph(params)
    (weight, path), rep = graphs.tsp(g, params.get("variant") or "dp",
                                     _backend(params, seed), seed)
    return {"weight": weight if path is not None else None, "path": path}, rep


def run_subsetsum(params, seed):
    if params.get("a"):
        inst = mitm.SubsetSumInstance(_ints(params["a"]), params["k"])
    else:
        if params.get("n") is None:
            raise ValueError("provide --a or --n")
        rng = as_generator(seed)
        a = [int(v) for v in rng.integers(1, 1 << 16, size=params["n"])]
        inst = mitm.SubsetSumInstance(a, params["k"])
    subset, rep = mitm.subset_sum(
        inst, params.get("variant") or "mitm-quantum",
        _backend(params, seed), seed,
        membership=params.get("membership") or "ordered")
    return {"subset": subset, "found": subset is not None}, rep


def run_collision(params, seed):
    if params.get("values"):
        arr = _ints(params["values"])
    else:
        if params.get("n") is None:
            raise ValueError("provide --values or --n")
        gen = (mitm.two_to_one_instance if params["promise"] == "2-to-1"
               else mitm.one_to_one_instance)
        arr = gen(params["n"], seed)
    label, rep = mitm.collision_decide(arr, params["promise"],
                                       params.get("variant") or "mitm",
                                       _backend(params, seed), seed)
    return {"label": label, "success": label == params["promise"]}, rep


def run_fpclassic(params, seed):
    if params.get("stream-file"):
        with open(params["stream-file"]) as fh:
            stream = fh.read()
    else:
        stream = params["stream"]
    equal, rep = fingerprint.classical_fingerprint_stream(stream, params["eps"],
                                                          seed)
    return {"equal": equal}, rep


def run_fpquantum(params, seed):
    u, v, q = params["u"], params["v"], params["q"]
    if params.get("coeffs"):
        fp = fingerprint.FingerprintParams(q, _ints(params["coeffs"]))
    else:
        fp = fingerprint.FingerprintParams.draw(params.get("t") or 1, q, seed)
    equal, p_err = fingerprint.quantum_fingerprint_multi(u, v, fp, seed)
    return {"equal": equal, "p_error": p_err, "coefficients": fp.coefficients}, None


def run_swaptest(params, seed):
    def state(text):
        amps = np.array(_floats(text), dtype=np.complex128)
        return from_amplitudes(amps / np.linalg.norm(amps))

    verdict, pr0 = fingerprint.swap_test(state(params["a"]), state(params["b"]),
                                         params.get("reps") or 1, seed)
    return {"equal": verdict, "pr0": pr0}, None


def run_walk1d(params, seed):
    coin = standard_gate(params.get("coin") or "H")
    positions, probs = walks.coined_walk_1d(params["steps"], coin)
    rows = [{"position": int(p), "probability": float(q)}
            for p, q in zip(positions, probs)]
    return {"rows": rows, "total": float(np.sum(probs))}, None


def run_walkcircle(params, seed):
    probs = walks.random_walk_circle(params["size"], params["steps"],
                                     params.get("start") or 0)
    rows = [{"vertex": i, "probability": float(q)} for i, q in enumerate(probs)]
    return {"rows": rows}, None


def run_walkgrid(params, seed):
    n = params["n"]
    marked = None if params.get("marked") is None else tuple(
        _ints(params["marked"]))
    probs, report = walks.grid_walk_search(n, marked, params.get("steps"))
    return {"best_step": report["best_step"],
            "best_probability": report["best_probability"],
            "factor_over_uniform": report["factor_over_uniform"],
            "steps": report["steps"]}, None


def run_nand(params, seed):
    bit, rep = walks.nand_evaluate(params["x"], seed,
                                   params.get("reps") or 25,
                                   params.get("backend") or "analytic")
    return {"value": bit, "classical": walks.nand_value(params["x"]),
            "success": bit == walks.nand_value(params["x"])}, rep


def run_johnson(params, seed):
    x = _ints(params["x"])
    pair, rep, report = walks.johnson_walk_distinctness(
        x, params["r"], seed, params.get("eps-samples") or 0)
    return {"pair": None if pair is None else list(pair),
            "moves": report["moves"], "eps": report["eps"],
            "delta": report["delta"]}, rep


def run_mnrscost(params, seed):
    costs = walks.MnrsCosts(params["S"], params["U"], params["C"],
                            params["eps"], params["delta"])
    val = walks.mnrs_cost(costs, params.get("solution") or 2,
                          params.get("regime") or "quantum")
    return {"cost": val}, None


def run_hrcheck(params, seed):
    with open(params["graph"]) as fh:
        rows = [ln.split() for ln in fh.read().splitlines() if ln.split()]
    edges = [(int(u), int(v), float(w) if w else 1.0)
             for u, v, *rest in rows for w in [rest[0] if rest else ""]]
    n = 1 + max(max(u, v) for u, v, _ in edges)
    net = walks.ElectricNetwork(n, edges, set(_ints(params["marked"])))
    H, twoWR, gap = walks.hitting_resistance_check(net)
    return {"H": H, "twoWR": twoWR, "gap": gap}, None


def run_backtrack(params, seed):
    tree = walks.RootedTree(_ints(params["parent"]))
    marked = set(_ints(params["marked"])) if params.get("marked") else set()
    exists, rep = walks.backtracking_detect(tree, marked,
                                            params.get("precision"), seed)
    return {"exists": exists, "success": exists == bool(marked)}, rep


SUBCOMMANDS = {
    # name: (runner, stochastic, {param: (type, required, help)})
    "grover": (run_grover, True, {
        "n": (int, True, "search-space size"),
        "marked": (str, True, "comma list of marked indices"),
    }),
    "aamp": (run_aamp, True, {
        "qubits": (int, True, "qubits prepared by A = H^k"),
        "good": (str, True, "comma list of good outcomes"),
    }),
    "minsearch": (run_minsearch, True, {
        "n": (int, True, "array length (seeded random permutation)"),
        "backend": (str, False, "statevector | analytic | analytic-ideal"),
    }),
    "firstone": (run_firstone, True, {
        "n": (int, True, "domain size"),
        "first": (int, True, "position of the first 1 (-1 for none)"),
        "variant": (str, False, "binary | via-minimum | bounded"),
        "backend": (str, False, "search backend"),
    }),
    "allones": (run_allones, True, {
        "n": (int, True, "domain size"),
        "t": (int, True, "number of marked indices (evenly spaced)"),
        "backend": (str, False, "search backend"),
    }),
    "streq": (run_streq, True, {
        "s": (str, True, "first bit string"),
        "t": (str, True, "second bit string"),
        "backend": (str, False, "search backend"),
    }),
    "palindrome": (run_palindrome, True, {
        "s": (str, True, "bit string"),
        "backend": (str, False, "search backend"),
    }),
    "lcp": (run_lcp, True, {
        "s": (str, True, "first bit string"),
        "t": (str, True, "second bit string"),
        "backend": (str, False, "search backend"),
    }),
    "strcmp": (run_strcmp, True, {
        "s": (str, True, "first bit string"),
        "t": (str, True, "second bit string"),
        "backend": (str, False, "search backend"),
    }),
    "strsort": (run_strsort, True, {
        "strings": (str, True, "comma list of bit strings"),
        "backend": (str, False, "search backend"),
    }),
    "mostfreq": (run_mostfreq, True, {
        "strings": (str, True, "comma list of bit strings"),
        "backend": (str, False, "search backend"),
    }),
    "dyck": (run_dyck, True, {
        "k": (int, True, "depth bound"),
        "x": (str, False, "parenthesis string (()...)"),
        "n": (int, False, "generate a random depth-<=k balanced input"),
        "backend": (str, False, "search backend"),
    }),
    "dfs": (run_dfs, True, {
        "edges": (str, False, "u-v[,u-v...] edge list"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "start": (int, False, "start vertex"),
        "directed": (bool, False, "directed edges"),
        "representation": (str, False, "list | matrix"),
        "backend": (str, False, "search backend"),
    }),
    "bfs": (run_bfs, True, {
        "edges": (str, False, "u-v[,u-v...] edge list"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "start": (int, False, "start vertex"),
        "directed": (bool, False, "directed edges"),
        "representation": (str, False, "list | matrix"),
        "backend": (str, False, "search backend"),
    }),
    "topsort": (run_topsort, True, {
        "edges": (str, False, "u-v[,u-v...] edge list (directed)"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "backend": (str, False, "search backend"),
    }),
    "daggame": (run_daggame, True, {
        "edges": (str, False, "u-v[,u-v...] edge list (directed)"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "backend": (str, False, "search backend"),
    }),
    "daglongest": (run_daglongest, True, {
        "edges": (str, False, "u-v[,u-v...] edge list (directed)"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "source": (int, False, "source vertex"),
        "backend": (str, False, "search backend"),
    }),
    "hampath": (run_hampath, True, {
        "edges": (str, False, "u-v[,u-v...] edge list"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "variant": (str, False, "brute | dp | quantum-bf | quantum-dp"),
        "backend": (str, False, "search backend"),
    }),
    "tsp": (run_tsp, True, {
        "edges": (str, False, "u-v:w[,u-v:w...] weighted edge list"),
        "graph": (str, False, "edge-list file"),
        "n": (int, False, "vertex count (with --edges)"),
        "variant": (str, False, "dp | quantum-dp"),
        "backend": (str, False, "search backend"),
    }),
    "subsetsum": (run_subsetsum, True, {
        "k": (int, True, "target sum"),
        "a": (str, False, "comma list of elements"),
        "n": (int, False, "generate a seeded random instance"),
        "variant": (str, False, "brute | grover | mitm-classical | mitm-quantum"),
        "membership": (str, False, "ordered | hash"),
        "backend": (str, False, "search backend"),
    }),
    "collision": (run_collision, True, {
        "promise": (str, True, "1-to-1 | 2-to-1"),
        "values": (str, False, "comma list of values"),
        "n": (int, False, "generate a seeded instance under the promise"),
        "variant": (str, False, "simple | mitm"),
        "backend": (str, False, "search backend"),
    }),
    "fpclassic": (run_fpclassic, True, {
        "stream": (str, False, "0/1 symbols with one '2' separator"),
        "stream-file": (str, False, "file holding the stream"),
        "eps": (float, True, "false-equal budget"),
    }),
    "fpquantum": (run_fpquantum, True, {
        "u": (str, True, "first bit string"),
        "v": (str, True, "second bit string"),
        "q": (int, True, "prime modulus exceeding both values"),
        "t": (int, False, "coefficient count (power of two, drawn from seed)"),
        "coeffs": (str, False, "explicit comma list of coefficients"),
    }),
    "swaptest": (run_swaptest, True, {
        "a": (str, True, "two real amplitudes, comma separated"),
        "b": (str, True, "two real amplitudes, comma separated"),
        "reps": (int, False, "ancilla measurements"),
    }),
    "walk1d": (run_walk1d, False, {
        "steps": (int, True, "walk steps"),
        "coin": (str, False, "coin gate name (default H)"),
    }),
    "walkcircle": (run_walkcircle, False, {
        "size": (int, True, "circle size"),
        "steps": (int, True, "walk steps"),
        "start": (int, False, "start vertex"),
    }),
    "walkgrid": (run_walkgrid, False, {
        "n": (int, True, "torus side length"),
        "marked": (str, False, "marked vertex x,y"),
        "steps": (int, False, "step budget"),
    }),
    "nand": (run_nand, True, {
        "x": (str, True, "leaf bits (power-of-two length)"),
        "reps": (int, False, "majority votes"),
        "backend": (str, False, "analytic | statevector"),
    }),
    "johnson": (run_johnson, True, {
        "x": (str, True, "comma list of values"),
        "r": (int, True, "subset size"),
        "eps-samples": (int, False, "uncharged marked-fraction samples"),
    }),
    "mnrscost": (run_mnrscost, False, {
        "S": (float, True, "setup cost"),
        "U": (float, True, "update cost"),
        "C": (float, True, "checking cost"),
        "eps": (float, True, "marked fraction"),
        "delta": (float, True, "spectral gap"),
        "solution": (int, False, "cost formula 1 | 2 | 3"),
        "regime": (str, False, "classical | quantum"),
    }),
    "hrcheck": (run_hrcheck, False, {
        "graph": (str, True, "weighted edge-list file (u v w)"),
        "marked": (str, True, "comma list of marked vertices"),
    }),
    "backtrack": (run_backtrack, True, {
        "parent": (str, True, "comma parent array (root first, parent[0]=0)"),
        "marked": (str, False, "comma list of marked vertices"),
        "precision": (int, False, "phase-estimation bits"),
    }),
}


# ---------------------------------------------------------------------------
# trial fan-out


def _trial_seed(seed: int, worker: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, worker, index]).generate_state(1)[0])


def _run_chunk(name: str, params: dict, seed, worker: int, count: int):
    runner = SUBCOMMANDS[name][0]
    out = []
    for j in range(count):
        s = None if seed is None else _trial_seed(seed, worker, j)
        result, rep = runner(params, s)
        out.append((result, None if rep is None else rep.queries))
    return out


def _aggregate(name: str, params: dict, seed, trials: int, parallel: int) -> dict:
    counts = [trials // parallel + (w < trials % parallel)
              for w in range(parallel)]
    if parallel == 1:
        chunks = [_run_chunk(name, params, seed, 0, trials)]
    else:
        with concurrent.futures.ProcessPoolExecutor(parallel) as pool:
            futures = [pool.submit(_run_chunk, name, params, seed, w, c)
                       for w, c in enumerate(counts)]
            chunks = [f.result() for f in futures]
    results = [r for chunk in chunks for r, _ in chunk]
    queries = [q for chunk in chunks for _, q in chunk if q is not None]
    out: dict = {"subcommand": name, "seed": seed, "trials": trials,
                 "params": {k: v for k, v in params.items() if v is not None},
                 "config": {"NAND_TSTAR": config.NAND_TSTAR,
                            "MINSEARCH_CONFIRM": config.MINSEARCH_CONFIRM,
                            "NESTED_REPS": config.NESTED_REPS}}
    if trials == 1:
        out.update(results[0])
    else:
        agg: dict = {}
        for key in results[0]:
            vals = [r[key] for r in results]
            if all(isinstance(v, (bool, int, float)) and v is not None
                   for v in vals):
                agg[f"{key}_mean"] = float(np.mean([float(v) for v in vals]))
        out["aggregate"] = agg
        out["first"] = results[0]
    if queries:
        out["cost"] = {
            "queries_mean": float(np.mean(queries)),
            "queries_median": float(np.median(queries)),
            "queries_p95": float(np.percentile(queries, 95)),
        }
    return out


def run_sweep(args, params: dict) -> dict:
    if any(params.get(k) is None for k in ("sub", "axis", "values")):
        raise ValueError("sweep requires --sub, --axis and --values")
    name = params["sub"]
    if name not in SUBCOMMANDS or name == "sweep":
        raise ValueError(f"cannot sweep subcommand {name!r}")
    axis = params["axis"]
    values = _ints(params["values"])
    _, stochastic, schema = SUBCOMMANDS[name]
    if axis not in schema:
        raise ValueError(f"{axis!r} is not a parameter of {name!r}")
    base: dict = {k: None for k in schema}
    for setting in params.get("set") or []:
        key, _, val = setting.partition("=")
        if key not in schema:
            raise ValueError(f"{key!r} is not a parameter of {name!r}")
        base[key] = schema[key][0](val)
    rows = []
    for v in values:
        point = dict(base)
        point[axis] = schema[axis][0](v)
        res = _aggregate(name, point, args.seed, args.trials, args.parallel)
        if "cost" not in res:
            raise ValueError(f"{name!r} reports no query costs to sweep")
        rows.append({axis: v, "queries_mean": res["cost"]["queries_mean"],
                     "queries_median": res["cost"]["queries_median"],
                     "queries_p95": res["cost"]["queries_p95"]})
    logs = np.log([r["queries_mean"] for r in rows])
    logx = np.log([float(v) for v in values])
    exponent, intercept = np.polyfit(logx, logs, 1)
    return {"subcommand": "sweep", "sub": name, "axis": axis, "seed": args.seed,
            "trials": args.trials, "rows": rows,
            "exponent": float(exponent), "intercept": float(intercept)}


# ---------------------------------------------------------------------------
# parsing and entry point


def _schema_json(name: str) -> str:
    if name == "sweep":
        return canonical_json({
            "subcommand": "sweep", "stochastic": True,
            "parameters": {"sub": {"type": "str", "required": True,
                                   "help": "subcommand to sweep"},
                           "axis": {"type": "str", "required": True,
                                    "help": "numeric parameter"},
                           "values": {"type": "str", "required": True,
                                      "help": "comma list of axis values"},
                           "set": {"type": "str", "required": False,
                                   "help": "key=value base parameter"}}})
    runner, stochastic, schema = SUBCOMMANDS[name]
    return canonical_json({
        "subcommand": name,
        "stochastic": stochastic,
        "parameters": {k: {"type": t.__name__, "required": req, "help": h}
                       for k, (t, req, h) in schema.items()},
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlab", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, (runner, stochastic, schema) in SUBCOMMANDS.items():
        sp = subs.add_parser(
            name, epilog="schema: " + _schema_json(name),
            formatter_class=argparse.RawDescriptionHelpFormatter)
        for key, (typ, required, help_text) in schema.items():
            # requiredness is enforced in main() so --schema works alone
            if typ is bool:
                sp.add_argument(f"--{key}", action="store_true", help=help_text)
            else:
                sp.add_argument(f"--{key}", type=typ, help=help_text)
        _common_options(sp, stochastic)
    sweep = subs.add_parser(
        "sweep", epilog="schema: " + _schema_json("sweep"),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sweep.add_argument("--sub")
    sweep.add_argument("--axis")
    sweep.add_argument("--values")
    sweep.add_argument("--set", action="append")
    _common_options(sweep, stochastic=True)
    return parser


def _common_options(sp: argparse.ArgumentParser, stochastic: bool) -> None:
    sp.add_argument("--seed", type=int, required=False,
                    help="PRNG seed (mandatory for stochastic runs)")
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--parallel", type=int, default=1)
    sp.add_argument("--out", help="output path (default stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--config", help="key=value overrides for qlab.config")
    sp.add_argument("--schema", action="store_true",
                    help="print the parameter schema and exit")
    sp.set_defaults(_stochastic=stochastic)


def _apply_config(path: str) -> None:
    with open(path) as fh:
        for ln in fh:
            ln = ln.split("#")[0].strip()
            if not ln:
                continue
            key, sep, val = ln.partition("=")
            key, val = key.strip(), val.strip()
            if not sep or not hasattr(config, key):
                raise ValueError(f"unknown config key {key!r}")
            current = getattr(config, key)
            if isinstance(current, dict):
                setattr(config, key, json.loads(val))
            else:
                setattr(config, key, int(val))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.subcommand
    try:
        if args.schema:
            _emit(_schema_json(name) + "\n", args.out)
            return 0
        if args.config:
            _apply_config(args.config)
        if args.trials < 1 or args.parallel < 1:
            raise ValueError("trials and parallel must be >= 1")
        if args._stochastic and args.seed is None:
            raise ValueError(f"{name!r} is stochastic: --seed is required")
        if name == "sweep":
            result = run_sweep(args, {"sub": args.sub, "axis": args.axis,
                                      "values": args.values, "set": args.set})
        else:
            schema = SUBCOMMANDS[name][2]
            params = {k: getattr(args, k.replace("-", "_")) for k in schema}
            missing = [k for k, (_, req, _) in schema.items()
                       if req and params[k] is None]
            if missing:
                raise ValueError(
                    f"missing required arguments: "
                    + ", ".join(f"--{k}" for k in missing))
            result = _aggregate(name, params, args.seed, args.trials,
                                args.parallel)
        text = (canonical_json(result) + "\n" if args.format == "json"
                else to_csv(result))
        _emit(text, args.out)
        return 0
    except ResourceError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        if any(mark in str(exc) for mark in _GUARD_MARKS):
            print(f"resource guard: {exc}", file=sys.stderr)
            return 3
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
