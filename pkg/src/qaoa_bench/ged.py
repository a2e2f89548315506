"""Exact graph edit distance for small unlabeled graphs.

Costs: node insertion/deletion 1, edge insertion/deletion 1, node
substitution 0. Under this model an optimal edit path never deletes and
re-inserts a node, so after padding the smaller graph with isolated
vertices the distance is ``|n1 - n2| + min_pi |E1 ^ pi(E2)|`` over vertex
bijections ``pi``. The minimum is found by depth-first branch-and-bound.

Lower bound at a partial assignment (``U``: unassigned vertices of g1,
``V``: unused vertices of g2): every remaining mismatched edge either
joins an unassigned vertex to an assigned one ("cross", charged to the
unassigned endpoint) or lies inside ``U``/``V`` ("inner"). For a
completion ``sigma``::

    cost >= sum_u cross(u, sigma(u)) + 1/2 * sum_u |din1(u) - din2(sigma(u))|

where ``din`` counts inner neighbours. Minimising the right side over all
bijections ``U -> V`` is a linear assignment problem, which gives an
admissible bound (rounded up, as costs are integral).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CapacityError
from .graphs import Graph

GED_SIZE_LIMIT = 12


def _masks(g: Graph, n: int) -> list[int]:
    adj = [0] * n
    for u, v in g.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return adj


def _search_order(adj: list[int], n: int) -> list[int]:
    """Highest degree first, then greedily the vertex with most edges into
    the already-ordered prefix (mismatch costs materialise early)."""
    deg = [a.bit_count() for a in adj]
    order = [max(range(n), key=lambda u: (deg[u], -u))]
    placed = 1 << order[0]
    while len(order) < n:
        rest = [u for u in range(n) if not placed >> u & 1]
        u = max(rest, key=lambda u: ((adj[u] & placed).bit_count(), deg[u], -u))
        order.append(u)
        placed |= 1 << u
    return order


def edge_mismatch(adj1: list[int], adj2: list[int], perm: list[int]) -> int:
    """``|E1 ^ perm(E2)|`` with ``perm`` mapping g1 vertices to g2 vertices."""
    n = len(adj1)
    cost = 0
    for u in range(n):
        for w in range(u + 1, n):
            if (adj1[u] >> w & 1) != (adj2[perm[u]] >> perm[w] & 1):
                cost += 1
    return cost


class _BranchAndBound:
    def __init__(self, adj1, adj2, n):
        self.adj1, self.adj2, self.n = adj1, adj2, n
        self.order = _search_order(adj1, n)
        self.full = (1 << n) - 1
        self.best = math.inf
        self.best_perm = None
        self.nodes = 0

    def _bound(self, unassigned: list[int], assigned_mask: int, used_mask: int,
               img: list[int]):
        adj1, adj2, n = self.adj1, self.adj2, self.n
        free2 = [v for v in range(n) if not used_mask >> v & 1]
        unassigned_mask = self.full & ~assigned_mask
        free_mask = self.full & ~used_mask
        m = len(unassigned)
        cost = np.empty((m, m))
        for a, u in enumerate(unassigned):
            din1 = (adj1[u] & unassigned_mask).bit_count()
            iu = img[u]
            for b, v in enumerate(free2):
                cross = (iu ^ (adj2[v] & used_mask)).bit_count()
                din2 = (adj2[v] & free_mask).bit_count()
                cost[a, b] = cross + 0.5 * abs(din1 - din2)
        rows, cols = linear_sum_assignment(cost)
        lb = math.ceil(cost[rows, cols].sum() - 1e-9)
        guess = {unassigned[r]: free2[c] for r, c in zip(rows, cols)}
        return lb, guess

    def run(self):
        n = self.n
        perm = [-1] * n
        img = [0] * n
        self._dfs(0, 0, 0, 0, perm, img)
        return self.best, self.best_perm

    def _complete(self, perm, guess):
        full = list(perm)
        for u, v in guess.items():
            full[u] = v
        c = edge_mismatch(self.adj1, self.adj2, full)
        if c < self.best:
            self.best, self.best_perm = c, full

    def _dfs(self, depth, cost, assigned_mask, used_mask, perm, img):
        self.nodes += 1
        n = self.n
        if depth == n:
            if cost < self.best:
                self.best, self.best_perm = cost, list(perm)
            return
        unassigned = self.order[depth:]
        lb, guess = self._bound(unassigned, assigned_mask, used_mask, img)
        if cost + lb >= self.best:
            return
        # The LSAP solution is a full bijection; its true cost tightens the
        # incumbent before branching.
        self._complete(perm, guess)
        if cost + lb >= self.best:
            return
        u = self.order[depth]
        adj1, adj2 = self.adj1, self.adj2
        iu = img[u]
        cands = []
        for v in range(n):
            if used_mask >> v & 1:
                continue
            inc = (iu ^ (adj2[v] & used_mask)).bit_count()
            cands.append((inc, v != guess[u], v))
        cands.sort()
        neighbours = [w for w in unassigned[1:] if adj1[u] >> w & 1]
        for inc, _, v in cands:
            if cost + inc >= self.best:
                break
            perm[u] = v
            bit = 1 << v
            for w in neighbours:
                img[w] |= bit
            self._dfs(depth + 1, cost + inc, assigned_mask | 1 << u,
                      used_mask | bit, perm, img)
            for w in neighbours:
                img[w] &= ~bit
            perm[u] = -1


def graph_edit_distance(g1: Graph, g2: Graph, limit: int = GED_SIZE_LIMIT,
                        return_mapping: bool = False):
    """Exact GED between two unlabeled graphs (see module docstring).

    With ``return_mapping`` also returns the optimal vertex map from the
    padded g1 to the padded g2 as a list.
    """
    n = max(g1.n, g2.n)
    if n > limit:
        raise CapacityError(f"exact GED limited to n <= {limit}, got n={n}")
    adj1, adj2 = _masks(g1, n), _masks(g2, n)
    bb = _BranchAndBound(adj1, adj2, n)
    best, perm = bb.run()
    dist = abs(g1.n - g2.n) + best
    if return_mapping:
        return dist, perm
    return dist
