import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qaoa_bench.graphs import Graph, complete_graph, cycle_graph, generate_er, path_graph  # noqa: E402

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _ACCEPTANCE.get(label, "PASS")
        now = "PASS" if rep.outcome == "passed" else rep.outcome.upper()
        _ACCEPTANCE[label] = now if prev == "PASS" else prev


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(f"{_ACCEPTANCE[label]:<6} {label}")


@pytest.fixture
def k2():
    return complete_graph(2)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def c5():
    return cycle_graph(5)


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture(scope="session")
def small_graphs():
    """Seeded random graphs with 2..6 vertices, all with at least one edge."""
    out = []
    seed = 0
    while len(out) < 24:
        n = 2 + seed % 5
        g = generate_er(n, 0.3 + 0.1 * (seed % 5), 1000 + seed)
        if g.num_edges:
            out.append(g)
        seed += 1
    return out


def relabel_random(g: Graph, rng):
    perm = [int(v) for v in rng.permutation(g.n)]
    return g.relabeled(perm, new_id=g.id + "_perm"), perm
