import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoa_bench import optim
from qaoa_bench.errors import EvaluationError, InputError
from qaoa_bench.graphs import complete_graph, generate_er
from qaoa_bench.optim import Bounds, local_optimize, multistart, uniform_start
from qaoa_bench.sim import build_cut_table, make_objective

BOX2 = Bounds([0.0, 0.0], [math.pi, 2 * math.pi])


def shifted_quadratic(x):
    return (x[0] - 0.3) ** 2 + (x[1] - 0.7) ** 2


def random_quadratic(d, rng):
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    h = q @ np.diag(rng.uniform(0.5, 5.0, d)) @ q.T
    xs = rng.uniform(1.0, 2 * math.pi - 1.0, d)
    return (lambda x: 0.5 * (x - xs) @ h @ (x - xs)), xs


def test_bounds_validation():
    with pytest.raises(InputError):
        Bounds([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(InputError):
        Bounds([0.0], [1.0, 2.0])
    b = Bounds.qaoa(2)
    assert b.dim == 4
    assert b.upper.tolist() == [math.pi, math.pi, 2 * math.pi, 2 * math.pi]


def test_quadratic_from_corner():
    r = local_optimize(shifted_quadratic, [2.0, 2.0], BOX2)
    assert np.max(np.abs(r.best_point - [0.3, 0.7])) < 1e-2
    assert r.best_value < 1e-3


def test_start_at_minimizer():
    r = local_optimize(shifted_quadratic, [0.3, 0.7], BOX2)
    assert abs(r.best_value) <= 1e-12
    assert r.evaluations_used < 50


def test_single_edge_from_small_angles():
    obj = make_objective(build_cut_table(complete_graph(2)))
    r = local_optimize(obj, [0.1, 0.1], BOX2)
    assert r.best_value <= -0.99


def test_returned_value_matches_reevaluation_and_never_worse_than_start():
    rng = np.random.default_rng(0)
    obj = make_objective(build_cut_table(generate_er(8, 0.5, 1)))
    b = Bounds.qaoa(2)
    for _ in range(10):
        x0 = uniform_start(b, 3, int(rng.integers(1000)))
        r = local_optimize(obj, x0, b)
        assert r.best_value <= obj(x0)
        assert abs(obj(r.best_point) - r.best_value) <= 1e-12


def test_every_evaluation_in_bounds():
    seen = []
    b = Bounds.qaoa(3)
    obj = make_objective(build_cut_table(generate_er(7, 0.5, 2)))

    def spy(x):
        seen.append(np.array(x))
        return obj(x)

    multistart(spy, b, 3000, seed=5)
    assert len(seen) == 3000
    assert all(b.contains(x) for x in seen)


def test_start_outside_bounds():
    with pytest.raises(InputError):
        local_optimize(shifted_quadratic, [-0.1, 1.0], BOX2)
    with pytest.raises(InputError):
        local_optimize(shifted_quadratic, [0.1, 1.0, 2.0], BOX2)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_objective(bad):
    calls = []

    def obj(x):
        calls.append(x.copy())
        return bad if len(calls) == 3 else shifted_quadratic(x)

    with pytest.raises(EvaluationError) as exc:
        local_optimize(obj, [1.0, 1.0], BOX2)
    assert np.array_equal(exc.value.point, calls[-1])


def test_max_evals_respected():
    r = local_optimize(shifted_quadratic, [2.0, 2.0], BOX2, ftol=1e-14, xtol=1e-14, max_evals=7)
    assert r.evaluations_used == 7
    assert r.history[0].stop_reason == optim.STOP_MAXEVAL
    assert not r.converged[0]


def test_multistart_budget_one():
    obj = make_objective(build_cut_table(complete_graph(3)))
    b = Bounds.qaoa(1)
    r = multistart(obj, b, 1, seed=9)
    assert r.evaluations_used == 1
    assert r.starts_completed == 1
    x0 = uniform_start(b, 9, 0)
    assert np.array_equal(r.best_point, x0)
    assert r.best_value == obj(x0)


def test_multistart_deterministic():
    obj = make_objective(build_cut_table(generate_er(8, 0.5, 4)))
    b = Bounds.qaoa(2)
    r1 = multistart(obj, b, 2500, seed=17)
    r2 = multistart(obj, b, 2500, seed=17)
    assert np.array_equal(r1.best_point, r2.best_point)
    assert r1.best_value == r2.best_value
    assert r1.starts_completed == r2.starts_completed
    assert [h.evaluations for h in r1.history] == [h.evaluations for h in r2.history]
    assert r1.best_start == r2.best_start


def test_multistart_uses_whole_budget_and_monotone_in_budget():
    obj = make_objective(build_cut_table(generate_er(8, 0.5, 6)))
    b = Bounds.qaoa(2)
    prev = math.inf
    for budget in (50, 400, 1500, 4000):
        r = multistart(obj, b, budget, seed=2)
        assert r.evaluations_used == budget
        assert sum(h.evaluations for h in r.history) == budget
        assert r.best_value <= prev
        prev = r.best_value


def test_multistart_best_so_far_non_increasing():
    obj = make_objective(build_cut_table(generate_er(8, 0.5, 7)))
    r = multistart(obj, Bounds.qaoa(1), 3000, seed=1)
    vals = np.minimum.accumulate([h.value for h in r.history])
    assert r.best_value == vals[-1]
    assert r.history[r.best_start].value == r.best_value


def test_multistart_initial_points_first():
    seen = []

    def spy(x):
        seen.append(np.array(x))
        return shifted_quadratic(x)

    r = multistart(spy, BOX2, 200, seed=0, initial_points=[[0.3, 0.7]])
    assert np.array_equal(seen[0], [0.3, 0.7])
    assert r.best_start == 0
    assert r.best_value == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(0, 1000))
def test_uniform_start_inside_and_reproducible(seed, index):
    b = Bounds.qaoa(3)
    x = uniform_start(b, seed, index)
    assert b.contains(x)
    assert np.array_equal(x, uniform_start(b, seed, index))


def test_random_quadratics_converge():
    rng = np.random.default_rng(2024)
    hits = 0
    for trial in range(100):
        d = 2 + trial % 7
        f, _ = random_quadratic(d, rng)
        b = Bounds(np.zeros(d), np.full(d, 2 * math.pi))
        x0 = rng.uniform(0, 2 * math.pi, d)
        r = local_optimize(f, x0, b, max_evals=200 * d)
        hits += r.best_value < 1e-2
    assert hits >= 95


def test_trsbox_compiled_matches_python():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 9))
        a = rng.normal(size=(d, d))
        hess = a + a.T
        g = rng.normal(size=d)
        delta = float(rng.uniform(0.05, 1.0))
        sl = -rng.uniform(0, 1, d)
        su = rng.uniform(0, 1, d)
        s1 = optim._trsbox_py(g, hess, delta, sl, su)
        s2 = optim.trsbox(g, hess, delta, sl, su)
        assert np.allclose(s1, s2, atol=1e-12)
        assert np.all(s2 >= sl - 1e-12) and np.all(s2 <= su + 1e-12)
        assert np.linalg.norm(s2) <= delta * (1 + 1e-9)


def test_iteration_count_statistic():
    # Soft check: typical p=1 starts need a few to a few dozen improvement
    # cycles. Only guard against pathological behaviour.
    obj = make_objective(build_cut_table(generate_er(10, 0.5, 11)))
    r = multistart(obj, Bounds.qaoa(1), 4000, seed=3)
    its = [h.iterations for h in r.history if h.converged]
    assert its
    assert 1 <= float(np.median(its)) <= 60
