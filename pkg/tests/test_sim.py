import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import relabel_random
from oracles import dense_expectation, dense_qaoa_state, grid_search
from qaoa_bench import sim
from qaoa_bench.errors import CapacityError, InputError
from qaoa_bench.graphs import (
    complete_graph,
    cut_value,
    cycle_graph,
    generate_er,
    index_to_bits,
    maxcut_bruteforce,
)
from qaoa_bench.sim import (
    QaoaParams,
    apply_mixer,
    apply_phase,
    build_cut_table,
    expectation,
    make_objective,
    prepare_plus_state,
    qaoa_expectation_vec,
    qaoa_state,
)

angles = st.floats(-10.0, 10.0, allow_nan=False)


def test_cut_table_examples(k2, k3, c5):
    assert build_cut_table(k2).values.tolist() == [0, 1, 1, 0]
    assert build_cut_table(k3).values.tolist() == [0, 2, 2, 2, 2, 2, 2, 0]
    assert build_cut_table(c5).max_value == 4


def test_cut_table_matches_per_bitstring(small_graphs):
    for g in small_graphs + [generate_er(10, 0.5, 9)]:
        t = build_cut_table(g)
        assert len(t.values) == 1 << g.n
        for z in range(1 << g.n):
            assert t.values[z] == cut_value(g, index_to_bits(z, g.n))
        full = (1 << g.n) - 1
        assert np.array_equal(t.values, t.values[full ^ np.arange(1 << g.n)])
        assert t.max_value == maxcut_bruteforce(g).max_value


def test_cut_table_is_read_only(k3):
    t = build_cut_table(k3)
    with pytest.raises(ValueError):
        t.values[0] = 5


def test_cut_table_capacity():
    with pytest.raises(CapacityError):
        build_cut_table(complete_graph(6), capacity=5)


def test_plus_state():
    s1 = prepare_plus_state(1)
    assert np.allclose(s1.amplitudes, [math.sqrt(0.5)] * 2, atol=1e-15)
    assert np.allclose(prepare_plus_state(2).amplitudes, 0.5)
    for n in range(1, 12):
        assert abs(prepare_plus_state(n).norm_sq() - 1) < 1e-12


def test_apply_phase_examples(k2):
    t = build_cut_table(k2)
    s = apply_phase(prepare_plus_state(2), t, 0.0)
    assert np.array_equal(s.amplitudes, prepare_plus_state(2).amplitudes)
    s = apply_phase(prepare_plus_state(2), t, 2 * math.pi)
    assert np.allclose(s.amplitudes, prepare_plus_state(2).amplitudes, atol=1e-12)
    s = apply_phase(prepare_plus_state(2), t, math.pi / 2)
    assert np.allclose(s.amplitudes, [0.5, -0.5j, -0.5j, 0.5], atol=1e-15)


def test_apply_phase_dimension_mismatch(k3):
    with pytest.raises(InputError):
        apply_phase(prepare_plus_state(2), build_cut_table(k3), 0.1)


def test_apply_mixer_examples():
    rng = np.random.default_rng(0)
    for n in (1, 2, 5):
        amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        amps /= np.linalg.norm(amps)
        s = sim.Statevector(n, amps.copy())
        assert np.array_equal(apply_mixer(s, 0.0).amplitudes, amps)
        s = apply_mixer(sim.Statevector(n, amps.copy()), math.pi)
        assert np.allclose(s.amplitudes, (-1) ** n * amps, atol=1e-14)
    s = apply_mixer(sim.Statevector(1, np.array([1.0, 0.0], dtype=complex)), math.pi / 4)
    assert np.allclose(s.amplitudes, [math.sqrt(0.5), -1j * math.sqrt(0.5)], atol=1e-15)


def test_qaoa_state_examples(k2):
    t = build_cut_table(k2)
    s = qaoa_state(t, QaoaParams((0.0,), (0.0,)))
    assert np.allclose(s.amplitudes, 0.5)
    s = qaoa_state(t, QaoaParams((math.pi / 8,), (math.pi / 2,)))
    probs = s.probabilities()
    assert probs[0b01] + probs[0b10] == pytest.approx(1.0, abs=1e-12)


def test_negated_angles_give_conjugate_state():
    # QaoaParams wraps -beta to pi - beta, which multiplies the state by
    # (-1)^n per layer; compare after removing that global sign.
    rng = np.random.default_rng(1)
    for n, p in [(3, 1), (4, 2), (5, 3)]:
        t = build_cut_table(generate_er(n, 0.6, n))
        b, g = rng.uniform(0, 3, p), rng.uniform(0, 6, p)
        a = qaoa_state(t, QaoaParams(tuple(b), tuple(g))).amplitudes
        c = qaoa_state(t, QaoaParams(tuple(-b), tuple(-g))).amplitudes
        assert np.allclose(c * (-1) ** (n * p), a.conj(), atol=1e-12)


def test_expectation_examples(k2, k3):
    for s in range(6):
        g = generate_er(7, 0.5, s)
        t = build_cut_table(g)
        for p in (1, 3):
            f = expectation(t, QaoaParams((0.0,) * p, (0.0,) * p))
            assert abs(f - g.num_edges / 2) < 1e-12
    t2 = build_cut_table(k2)
    assert expectation(t2, QaoaParams((math.pi / 8,), (math.pi / 2,))) == pytest.approx(1.0, abs=1e-9)


def test_single_edge_landscape_closed_form(k2):
    t = build_cut_table(k2)
    rng = np.random.default_rng(4)
    for b, g in rng.uniform(0, 2 * math.pi, size=(50, 2)):
        f = qaoa_expectation_vec(t, [b, g])
        assert f == pytest.approx(0.5 + 0.5 * math.sin(4 * b) * math.sin(g), abs=1e-12)


def test_single_edge_grid_oracle(k2):
    t = build_cut_table(k2)
    best, b, g, _ = grid_search(lambda b, g: qaoa_expectation_vec(t, [b, g]), 201, 401)
    assert best == pytest.approx(1.0, abs=1e-9)
    assert qaoa_expectation_vec(t, [math.pi / 8, math.pi / 2]) >= best - 1e-12


def test_triangle_grid_oracle(k3):
    # K3, p=1: the 201 x 401 grid maximum bounds what any optimizer can beat
    # by more than the grid discretisation error.
    t = build_cut_table(k3)
    best, b, g, _ = grid_search(lambda b, g: qaoa_expectation_vec(t, [b, g]), 201, 401)
    assert 1.5 < best <= 2.0
    assert qaoa_expectation_vec(t, [b, g]) == best


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matches_dense_operator_simulator(n):
    rng = np.random.default_rng(100 + n)
    for trial in range(12):
        g = generate_er(n, float(rng.uniform(0.3, 1.0)), int(rng.integers(1 << 30)))
        t = build_cut_table(g)
        p = int(rng.integers(1, 4))
        b, c = rng.uniform(0, math.pi, p), rng.uniform(0, 2 * math.pi, p)
        fast = qaoa_state(t, QaoaParams(tuple(b), tuple(c))).amplitudes
        dense = dense_qaoa_state(g.edges, n, b, c)
        assert np.allclose(fast, dense, atol=1e-10)
        assert abs(expectation(t, QaoaParams(tuple(b), tuple(c)))
                   - dense_expectation(g.edges, n, b, c)) < 1e-9


def test_numpy_and_compiled_kernels_agree():
    rng = np.random.default_rng(2)
    g = generate_er(9, 0.5, 3)
    t = build_cut_table(g)
    for p in (1, 2, 5):
        b, c = rng.uniform(0, math.pi, p), rng.uniform(0, 2 * math.pi, p)
        ref = sim._expectation_numpy(t.values, b, c, g.n)
        assert abs(sim._expectation_kernel(t.values, b, c, g.n) - ref) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(angles, angles), min_size=1, max_size=4), st.integers(0, 50))
def test_norm_preserved(layers, seed):
    g = generate_er(6, 0.5, seed)
    t = build_cut_table(g)
    s = prepare_plus_state(6)
    for b, c in layers:
        apply_phase(s, t, c)
        assert abs(s.norm_sq() - 1) < 1e-12
        apply_mixer(s, b)
        assert abs(s.norm_sq() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000), st.data())
def test_periodicity_and_conjugation(p, seed, data):
    rng = np.random.default_rng(seed)
    g = generate_er(6, 0.5, seed)
    t = build_cut_table(g)
    x = rng.uniform(-4, 8, 2 * p)
    f = qaoa_expectation_vec(t, x)
    k = data.draw(st.integers(0, p - 1))
    y = x.copy()
    y[k] += math.pi
    assert abs(qaoa_expectation_vec(t, y) - f) < 1e-10
    y = x.copy()
    y[p + k] += 2 * math.pi
    assert abs(qaoa_expectation_vec(t, y) - f) < 1e-10
    assert abs(qaoa_expectation_vec(t, -x) - f) < 1e-10
    assert 0.0 <= f <= t.max_value + 1e-12


def test_isomorphism_invariance():
    rng = np.random.default_rng(8)
    for s in range(8):
        g = generate_er(8, 0.5, s)
        h, _ = relabel_random(g, rng)
        tg, th = build_cut_table(g), build_cut_table(h)
        for p in (1, 2, 3):
            x = rng.uniform(0, 2 * math.pi, 2 * p)
            assert abs(qaoa_expectation_vec(tg, x) - qaoa_expectation_vec(th, x)) < 1e-12


def test_params_wrapping():
    q = QaoaParams((math.pi, -0.5, 4.0), (2 * math.pi, -1.0, 7.0))
    assert q.betas[0] == math.pi
    assert q.betas[1] == pytest.approx(math.pi - 0.5)
    assert q.betas[2] == pytest.approx(4.0 - math.pi)
    assert q.gammas[0] == 2 * math.pi
    assert q.gammas[1] == pytest.approx(2 * math.pi - 1.0)
    assert q.gammas[2] == pytest.approx(7.0 - 2 * math.pi)
    assert q.p == 3
    assert QaoaParams.from_vector(q.to_vector()) == q
    with pytest.raises(InputError):
        QaoaParams((0.1,), (0.1, 0.2))


def test_wrapping_leaves_expectation_unchanged():
    t = build_cut_table(cycle_graph(5))
    raw = np.array([-0.4, 5.0, -2.0, 9.0])
    assert expectation(t, QaoaParams.from_vector(raw)) == pytest.approx(
        qaoa_expectation_vec(t, raw), abs=1e-12)


def test_make_objective_negates(k3):
    t = build_cut_table(k3)
    obj = make_objective(t)
    assert obj(np.array([0.3, 1.2])) == -qaoa_expectation_vec(t, [0.3, 1.2])
