import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_maxcut, cut_by_edges
from qaoa_bench.errors import CapacityError, InputError
from qaoa_bench.rng import SplitMix64, derive_seed
from qaoa_bench.graphs import (
    Graph,
    bits_to_index,
    complement,
    complete_graph,
    cut_value,
    cycle_graph,
    dumps_manifest,
    empty_graph,
    generate_er,
    index_to_bits,
    load_manifest,
    maxcut_bruteforce,
    save_manifest,
)


@st.composite
def graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph("h", n, chosen)


def test_graph_canonical_edges():
    g = Graph("g", 4, [(3, 1), (0, 2), (1, 0)])
    assert g.edges == ((0, 1), (0, 2), (1, 3))
    assert g == Graph("g", 4, [(0, 1), (1, 3), (2, 0)])


@pytest.mark.parametrize("edges", [[(1, 1)], [(0, 1), (1, 0)], [(0, 4)], [(-1, 2)]])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(InputError):
        Graph("bad", 4, edges)


def test_generate_er_degenerate_probabilities():
    assert generate_er(4, 0.0, 7).edges == ()
    k4 = generate_er(4, 1.0, 7)
    assert k4.num_edges == 6


def test_generate_er_deterministic():
    a = generate_er(10, 0.5, 12345)
    b = generate_er(10, 0.5, 12345)
    assert a == b
    assert a.edges != generate_er(10, 0.5, 12346).edges


SPLITMIX64_SEED_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_splitmix64_reference_vector():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == SPLITMIX64_SEED_1234567


def test_generate_er_uses_documented_stream():
    # Pair order (0,1), (0,2), ..., one draw per pair, top 53 bits as a double.
    g = generate_er(3, 0.5, 1234567)
    draws = [(x >> 11) / 2.0 ** 53 for x in SPLITMIX64_SEED_1234567[:3]]
    pairs = [(0, 1), (0, 2), (1, 2)]
    assert g.edges == tuple(e for e, u in zip(pairs, draws) if u < 0.5)


def test_generate_er_edge_frequency():
    counts = sum(generate_er(10, 0.3, s).num_edges for s in range(400))
    assert abs(counts / (400 * 45) - 0.3) < 0.01


def test_generate_er_validates():
    with pytest.raises(InputError):
        generate_er(0, 0.5, 1)
    with pytest.raises(InputError):
        generate_er(3, 1.5, 1)


def test_cut_value_examples(k3, c5):
    assert cut_value(k3, "100") == 2
    assert cut_value(c5, "00000") == 0
    assert cut_value(c5, "01010") == 4
    assert cut_value(c5, [0, 1, 0, 1, 0]) == 4


def test_cut_value_length_mismatch(k3):
    with pytest.raises(InputError):
        cut_value(k3, "10")


@given(graphs(), st.data())
def test_cut_value_complement_symmetry(g, data):
    bits = data.draw(st.text(alphabet="01", min_size=g.n, max_size=g.n))
    assert cut_value(g, bits) == cut_value(g, complement(bits))


def test_bit_conventions():
    assert index_to_bits(1, 3) == "100"
    assert bits_to_index("100") == 1
    assert all(bits_to_index(index_to_bits(z, 5)) == z for z in range(32))


def test_maxcut_examples(k2, k3, c5):
    r = maxcut_bruteforce(k2)
    assert r.max_value == 1
    assert sorted(r.maximizers) == ["01", "10"]
    assert maxcut_bruteforce(k3).max_value == 2
    assert maxcut_bruteforce(c5).max_value == 4
    assert maxcut_bruteforce(empty_graph(3)).max_value == 0


@settings(max_examples=60)
@given(graphs(max_n=6))
def test_maxcut_matches_independent_enumeration(g):
    r = maxcut_bruteforce(g)
    assert r.max_value == brute_maxcut(g.edges, g.n)
    assert r.max_value <= g.num_edges
    assert r.maximizers
    for s in r.maximizers:
        assert cut_by_edges(g.edges, [c == "1" for c in s]) == r.max_value
        assert complement(s) in r.maximizers


def test_maxcut_exact_for_all_graphs_up_to_4_vertices():
    for n in range(1, 5):
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        for mask in range(1 << len(pairs)):
            edges = [e for i, e in enumerate(pairs) if mask >> i & 1]
            assert maxcut_bruteforce(Graph("x", n, edges)).max_value == brute_maxcut(edges, n)


def test_maxcut_random_scan_lower_bound():
    rng = np.random.default_rng(3)
    for s in range(5):
        g = generate_er(12, 0.5, s)
        exact = maxcut_bruteforce(g).max_value
        sampled = max(cut_value(g, rng.integers(0, 2, g.n)) for _ in range(1000))
        assert sampled <= exact


def test_maxcut_capacity():
    with pytest.raises(CapacityError):
        maxcut_bruteforce(complete_graph(5), limit=4)


def test_isomorphic_graphs_same_maxcut():
    rng = np.random.default_rng(0)
    for s in range(10):
        g = generate_er(8, 0.5, s)
        h = g.relabeled([int(v) for v in rng.permutation(8)])
        assert maxcut_bruteforce(g).max_value == maxcut_bruteforce(h).max_value


def test_manifest_round_trip(tmp_path):
    gs = [generate_er(6, 0.4, s, graph_id=f"g{s}") for s in range(3)] + [cycle_graph(5)]
    path = tmp_path / "m.json"
    save_manifest(gs, path)
    assert load_manifest(path) == gs
    data = json.loads(path.read_text())
    assert list(data[0]) == ["id", "n", "edges", "e_p", "seed"]
    assert path.read_text() == dumps_manifest(gs)


def test_manifest_rejects_duplicates(tmp_path):
    path = tmp_path / "m.json"
    save_manifest([cycle_graph(4), cycle_graph(4)], path)
    with pytest.raises(InputError):
        load_manifest(path)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, "graph", 3) == derive_seed(1, "graph", 3)
    seeds = {derive_seed(1, "graph", k) for k in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 1 << 63 for s in seeds)
