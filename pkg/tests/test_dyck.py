import itertools

import pytest

from qlab.dyck import dyck_decide, dyck_segment_search, pad_instance, parse_paren
from qlab.emulator import SearchBackend, ideal_backend


def dyck_brute(x: str, k: int) -> bool:
    depth = 0
    for c in x:
        depth += 1 if c in "(0" else -1   # 0 encodes the opening symbol
        if depth < 0 or depth > k:
            return False
    return depth == 0


def all_inputs(n: int):
    for bits in itertools.product("01", repeat=n):
        yield "".join(bits)


def test_parse_and_pad():
    assert parse_paren("(())") == "0011"   # '(' -> 0, ')' -> 1
    assert parse_paren("1100") == "1100"
    assert pad_instance("()", 2) == "110100"
    with pytest.raises(ValueError):
        parse_paren("(a)")


@pytest.mark.parametrize("k", [1, 2, 3])
def test_decide_exhaustive_small(k):
    for n in range(0, 11):
        for x in all_inputs(n):
            got, _, witness = dyck_decide(x, k, ideal_backend(0))
            assert got == dyck_brute(x, k), (x, k)
            if not got:
                lo, hi, sign = witness
                u = pad_instance(x, k)
                change = sum(1 if c == "1" else -1 for c in u[lo:hi + 1])
                # the witness certifies a height change of at least k+1
                assert change * sign < 0 and abs(change) >= k + 1


def test_decide_stochastic_two_thirds():
    bad = "()" * 6 + "((()))" + "()" * 6   # depth 3
    hits = 0
    for seed in range(120):
        got, _, _ = dyck_decide(bad, 2, SearchBackend("analytic", seed))
        hits += not got
    assert hits >= 80
    # one-sided: no false substring witnesses on good inputs
    good = "(())" * 8
    for seed in range(120):
        got, _, _ = dyck_decide(good, 2, SearchBackend("analytic", seed))
        assert got


def test_segment_search_modes():
    u = "1101100010"                      # heights 1 2 1 2 3 2 1 0 1 0
    first = dyck_segment_search(u, 2, "minimal", backend=ideal_backend(0))[0]
    last = dyck_segment_search(u, 2, "maximal", backend=ideal_backend(0))[0]
    anyw = dyck_segment_search(u, 2, "any", backend=ideal_backend(0))[0]
    assert first is not None and last is not None and anyw is not None
    assert first[0] <= anyw[0] <= last[0]


def test_segment_search_validation():
    with pytest.raises(ValueError):
        dyck_segment_search("1100", 1, backend=ideal_backend(0))


def test_query_cost_scales_like_sqrt():
    import math

    import numpy as np

    means = {}
    for n in (256, 4096):
        qs = []
        x = "()" * (n // 2)               # the unique depth-1 balanced string
        for seed in range(15):
            _, rep, _ = dyck_decide(x, 1, SearchBackend("analytic", seed))
            qs.append(rep.queries)
        means[n] = np.mean(qs)
    ratio = means[4096] / means[256]
    # sqrt scaling predicts 4; allow a wide band around it
    assert 2.0 <= ratio <= 10.0, means
