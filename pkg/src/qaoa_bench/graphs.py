"""Max-Cut problem instances: generation, cut evaluation, exact ground truth.

Bit convention used throughout the package: vertex ``i`` is bit ``i`` of an
integer basis index (little-endian), and in a bitstring ``s`` it is the
character ``s[i]``. So index 1 on three vertices is the bitstring ``"100"``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InputError, StorageError
from .rng import SplitMix64

MAXCUT_ENUMERATION_LIMIT = 26
_CHUNK_BITS = 20


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with optional generation metadata.

    ``edges`` is stored canonically: each pair as ``(u, v)`` with ``u < v``,
    the tuple sorted, so equal graphs compare and serialize identically.
    """

    id: str
    n: int
    edges: tuple = ()
    e_p: float | None = None
    seed: int | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise InputError(f"graph {self.id!r}: n must be >= 1, got {n}")
        canon = set()
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise InputError(f"graph {self.id!r}: self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"graph {self.id!r}: edge ({u}, {v}) out of range for n={n}")
            pair = (u, v) if u < v else (v, u)
            if pair in canon:
                raise InputError(f"graph {self.id!r}: duplicate edge {pair}")
            canon.add(pair)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def num_edges(self):
        return len(self.edges)

    def adjacency(self):
        """Dense 0/1 adjacency matrix (``int8``)."""
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def degrees(self):
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def relabeled(self, perm: Sequence[int], new_id: str | None = None) -> "Graph":
        """Image of the graph under the vertex map ``i -> perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise InputError("perm must be a permutation of range(n)")
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        return Graph(new_id or self.id, self.n, edges, self.e_p, self.seed)

    def to_dict(self):
        return {
            "id": self.id,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "e_p": self.e_p,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                id=str(d["id"]),
                n=int(d["n"]),
                edges=tuple(tuple(e) for e in d["edges"]),
                e_p=None if d.get("e_p") is None else float(d["e_p"]),
                seed=None if d.get("seed") is None else int(d["seed"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed graph record: {exc}") from exc


@dataclass
class CutResult:
    max_value: int
    maximizers: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Generation


def generate_er(n: int, e_p: float, seed: int, graph_id: str | None = None) -> Graph:
    """Erdős–Rényi G(n, e_p) sample.

    Pairs are visited in lexicographic order ``(0,1), (0,2), ..., (n-2,n-1)``
    and each is kept when the next SplitMix64 double (seeded with ``seed``)
    is ``< e_p``. One draw is consumed per pair regardless of outcome.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if not 0.0 <= e_p <= 1.0:
        raise InputError(f"e_p must lie in [0, 1], got {e_p}")
    rng = SplitMix64(seed)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < e_p:
                edges.append((u, v))
    if graph_id is None:
        graph_id = f"er_n{n}_p{e_p:g}_s{seed}"
    return Graph(graph_id, n, edges, float(e_p), int(seed))


def complete_graph(n, graph_id=None):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return Graph(graph_id or f"K{n}", n, edges)


def cycle_graph(n, graph_id=None):
    edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)][: n - 1]
    return Graph(graph_id or f"C{n}", n, edges)


def path_graph(n, graph_id=None):
    return Graph(graph_id or f"P{n}", n, [(i, i + 1) for i in range(n - 1)])


def empty_graph(n, graph_id=None):
    return Graph(graph_id or f"E{n}", n, ())


# ---------------------------------------------------------------------------
# Bitstrings and cuts


def index_to_bits(z: int, n: int) -> str:
    return "".join("1" if (z >> i) & 1 else "0" for i in range(n))


def bits_to_index(bits) -> int:
    return sum(1 << i for i, b in enumerate(_as_bits(bits)) if b)


def complement(bits) -> str:
    return "".join("0" if b else "1" for b in _as_bits(bits))


def _as_bits(assignment) -> list:
    if isinstance(assignment, str):
        if set(assignment) - {"0", "1"}:
            raise InputError(f"bitstring may only contain 0/1: {assignment!r}")
        return [c == "1" for c in assignment]
    return [bool(int(b)) for b in assignment]


def cut_value(g: Graph, assignment) -> int:
    """Number of edges whose endpoints fall on different sides."""
    bits = _as_bits(assignment)
    if len(bits) != g.n:
        raise InputError(f"assignment has length {len(bits)}, graph has n={g.n}")
    return sum(1 for u, v in g.edges if bits[u] != bits[v])


def maxcut_bruteforce(g: Graph, limit: int = MAXCUT_ENUMERATION_LIMIT) -> CutResult:
    """Exact Max-Cut by enumeration.

    Vertex ``n-1`` is pinned to side 0, so only ``2**(n-1)`` assignments are
    scanned; the maximizer list is completed with global bit-flips.
    Cut values are summed edge by edge over the bit columns of the index.
    """
    n = g.n
    if n > limit:
        raise CapacityError(f"maxcut enumeration limited to n <= {limit}, got n={n}")
    half = 1 << (n - 1)
    best = -1
    argmax: list[np.ndarray] = []
    chunk = 1 << min(_CHUNK_BITS, n - 1)
    for start in range(0, half, chunk):
        z = np.arange(start, min(start + chunk, half), dtype=np.int64)
        vals = np.zeros(z.shape, dtype=np.int32)
        for u, v in g.edges:
            vals += ((z >> u) ^ (z >> v)) & 1
        m = int(vals.max())
        if m > best:
            best, argmax = m, [z[vals == m]]
        elif m == best:
            argmax.append(z[vals == m])
    full = (1 << n) - 1
    idx = np.concatenate(argmax)
    all_idx = np.concatenate([idx, full ^ idx])
    maximizers = sorted(index_to_bits(int(z), n) for z in all_idx)
    return CutResult(best, maximizers)


# ---------------------------------------------------------------------------
# Manifest I/O


def dumps_manifest(graphs: Iterable[Graph]) -> str:
    return json.dumps([g.to_dict() for g in graphs], indent=1) + "\n"


def save_manifest(graphs: Iterable[Graph], path) -> None:
    text = dumps_manifest(graphs)
    tmp = f"{path}.tmp"
    try:
        d = os.path.dirname(os.fspath(path))
        if d:
            os.makedirs(d, exist_ok=True)
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"cannot write manifest {path}: {exc}") from exc


def load_manifest(path) -> list[Graph]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise InputError(f"manifest {path} must be a JSON array of graphs")
    graphs = [Graph.from_dict(d) for d in data]
    ids = [g.id for g in graphs]
    if len(set(ids)) != len(ids):
        raise InputError(f"manifest {path} has duplicate graph ids")
    return graphs
