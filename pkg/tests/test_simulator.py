import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlab.simulator import (ATOL, DenseUnitary, Gate1Q, ResourceError,
                            apply_controlled, apply_gate, apply_unitary,
                            as_generator, from_amplitudes, inner_product,
                            measure_all, measure_partial, new_state,
                            phase_estimate, phase_gate, standard_gate)


def dense_1q(gate: np.ndarray, target: int, n: int) -> np.ndarray:
    """Reference kron expansion: qubit 0 is the most significant."""
    m = np.array([[1.0]], dtype=np.complex128)
    for q in range(n):
        m = np.kron(m, gate if q == target else np.eye(2))
    return m


def test_apply_gate_matches_kron_expansion():
    rng = as_generator(0)
    for n in (1, 2, 3, 5):
        amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        amps /= np.linalg.norm(amps)
        for name in ("H", "X", "Z"):
            g = standard_gate(name)
            for target in range(n):
                s = apply_gate(from_amplitudes(amps), g, target)
                want = dense_1q(g.matrix, target, n) @ amps
                assert np.allclose(s.amps, want, atol=1e-12)


def test_qubit_zero_is_msb():
    s = new_state(2)                      # |00>
    s = apply_gate(s, standard_gate("X"), 0)
    assert np.argmax(np.abs(s.amps)) == 0b10


def test_apply_controlled_matches_dense():
    rng = as_generator(1)
    n = 3
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    g = standard_gate("Ry", 0.7)
    s = apply_controlled(from_amplitudes(amps), g, [0], 2)
    dense = np.eye(8, dtype=np.complex128)
    for i in range(8):
        if i & 0b100:
            dense[i, i] = 0.0
    block = dense_1q(g.matrix, 2, 3)
    for i in range(8):
        for j in range(8):
            if (i & 0b100) and (j & 0b100):
                dense[i, j] = block[i, j]
    assert np.allclose(s.amps, dense @ amps, atol=1e-12)


def test_apply_unitary_subset_and_order():
    # CNOT on (control=1, target=0) applied via a 2-qubit block
    cnot = DenseUnitary(np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                                  [0, 0, 0, 1], [0, 0, 1, 0]],
                                 dtype=np.complex128))
    s = new_state(3, 0b010)
    s = apply_unitary(s, cnot, [1, 0])    # qubit 1 is the block's MSB
    assert np.argmax(np.abs(s.amps)) == 0b110


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_gates_preserve_norm(seed, n):
    rng = as_generator(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    s = from_amplitudes(amps)
    for name in ("H", "X", "Z", "S", "T"):
        s = apply_gate(s, standard_gate(name), int(rng.integers(n)))
    assert abs(np.linalg.norm(s.amps) - 1.0) < 1e-9


def test_standard_gate_angle_rules():
    with pytest.raises(ValueError):
        standard_gate("Rx")
    with pytest.raises(ValueError):
        standard_gate("H", 0.3)
    ry = standard_gate("Ry", math.pi)
    assert np.allclose(ry.matrix, [[0, -1], [1, 0]], atol=1e-12)


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        Gate1Q([[1, 0], [0, 2]])
    with pytest.raises(ValueError):
        DenseUnitary(np.ones((3, 3)))


def test_from_amplitudes_validation():
    with pytest.raises(ValueError):
        from_amplitudes([1.0, 0.0, 0.0])      # not a power of two
    with pytest.raises(ValueError):
        from_amplitudes([1.0, 1.0])            # not normalized


def test_measurement_is_seeded_and_reproducible():
    s = apply_gate(new_state(1), standard_gate("H"), 0)
    a = [measure_all(s, seed)[0] for seed in range(200)]
    b = [measure_all(s, seed)[0] for seed in range(200)]
    assert a == b
    # fair coin within 3 sigma
    assert abs(np.mean(a) - 0.5) <= 3 * math.sqrt(0.25 / 200)


def test_measure_partial_collapse():
    s = new_state(2)
    s = apply_gate(s, standard_gate("H"), 0)
    # entangle: CNOT 0 -> 1
    s = apply_controlled(s, standard_gate("X"), [0], 1)
    bits, post = measure_partial(s, [0], rng_seed=3)
    idx, _ = measure_all(post, 4)
    assert (idx >> 1) & 1 == bits[0]
    assert idx & 1 == bits[0]             # perfectly correlated


def test_phase_estimate_exact_phase():
    # diag(1, e^{2 pi i * 5/16}): eigenstate |1> has phase 5/16
    u = DenseUnitary(np.diag([1.0, np.exp(2j * math.pi * 5 / 16)]))
    eigen = from_amplitudes([0.0, 1.0])
    for seed in range(5):
        assert phase_estimate(u, eigen, 4, seed) == pytest.approx(5 / 16)


def test_phase_estimate_resource_guard(monkeypatch):
    monkeypatch.setenv("QLAB_MAX_QUBITS", "4")
    u = DenseUnitary(np.eye(8, dtype=np.complex128))
    with pytest.raises(ResourceError):
        phase_estimate(u, new_state(3), 4, 0)


def test_inner_product_and_phase_gate():
    a = apply_gate(new_state(1), standard_gate("H"), 0)
    b = apply_gate(a, phase_gate(math.pi / 2), 0)
    assert inner_product(a, a) == pytest.approx(1.0)
    assert inner_product(a, b) == pytest.approx(0.5 + 0.5j)
