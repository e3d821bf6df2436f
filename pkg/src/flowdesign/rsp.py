"""Restricted shortest path: cheapest s-t path subject to a length budget.

Costs live on one axis, lengths on the other. The exact solver keeps, per
node, the Pareto frontier of (cost, length) labels and settles them in
(cost, length, arc-sequence) order, which is the label-setting form of the
classic cost-indexed DP: for every reachable integer cost it implicitly
knows the minimal length. Lengths are never rounded anywhere, so a returned
path always satisfies the budget exactly; the FPTAS scales and rounds only
the cost axis.

Arcs are traversable in both directions and returned paths are simple.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import Infeasible, ValidationError


@dataclass(frozen=True)
class RspInstance:
    n: int
    arcs: tuple[tuple[int, int], ...]
    s: int
    t: int
    cost: tuple[float, ...]
    length: tuple[float, ...]
    budget: float

    def __post_init__(self):
        if not (0 <= self.s < self.n and 0 <= self.t < self.n) or self.s == self.t:
            raise ValidationError("terminals must be distinct in-range nodes")
        if len(self.cost) != len(self.arcs) or len(self.length) != len(self.arcs):
            raise ValidationError("cost and length must have one entry per arc")
        for v in self.cost:
            if not (v >= 0.0) or math.isinf(v):
                raise ValidationError("costs must be finite and >= 0")
        for v in self.length:
            if not (v >= 0.0) or math.isinf(v):
                raise ValidationError("lengths must be finite and >= 0")
        if not (self.budget >= 0.0):
            raise ValidationError("budget must be >= 0")


def _adjacency(n, arcs):
    adj = [[] for _ in range(n)]
    for a, (u, v) in enumerate(arcs):
        if u != v:
            adj[u].append((a, v))
            adj[v].append((a, u))
    return adj


def _label_search(n, arcs, s, t, cost, length, budget, cost_cap):
    """Cheapest feasible path by label-setting over (cost, length) frontiers.

    Labels pop in (cost, length, sequence) order; a label weakly dominated
    by one already settled at its node is discarded, so every surviving
    label is simple and the first one settled at t is the answer.
    """
    adj = _adjacency(n, arcs)
    frontier: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    heap = [(0, 0.0, (), s, 1 << s)]
    while heap:
        dc, dl, seq, v, mask = heapq.heappop(heap)
        if any(fc <= dc and fl <= dl for fc, fl in frontier[v]):
            continue
        if v == t:
            return seq, dc, dl
        frontier[v].append((dc, dl))
        for a, w in adj[v]:
            if mask & (1 << w):
                continue
            nc = dc + cost[a]
            if nc > cost_cap:
                continue
            nl = dl + length[a]
            if nl > budget:
                continue
            if any(fc <= nc and fl <= nl for fc, fl in frontier[w]):
                continue
            heapq.heappush(heap, (nc, nl, seq + (a,), w, mask | (1 << w)))
    return None


def rsp_exact(inst: RspInstance, cost_cap=None) -> tuple[int, ...]:
    """Minimum-cost path within the length budget, for integer costs.

    Ties break toward the shorter, then lexicographically smaller path.
    """
    icost = []
    for v in inst.cost:
        iv = int(v)
        if iv != v:
            raise ValidationError("rsp_exact needs integer costs")
        icost.append(iv)
    if cost_cap is None:
        cost_cap = sum(icost)
    hit = _label_search(
        inst.n, inst.arcs, inst.s, inst.t, tuple(icost), inst.length, inst.budget, cost_cap
    )
    if hit is None:
        raise Infeasible("no s-t path satisfies the length budget")
    return hit[0]


def _dijkstra2(n, arcs, w1, w2, s, t):
    """Lexicographic bi-criteria shortest path: minimize (sum w1, sum w2, seq)."""
    adj = _adjacency(n, arcs)
    best = {s: (0.0, 0.0, ())}
    heap = [(0.0, 0.0, (), s)]
    settled = set()
    while heap:
        d1, d2, seq, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        if v == t:
            return d1, d2, seq
        for a, w in adj[v]:
            if w in settled:
                continue
            cand = (d1 + w1[a], d2 + w2[a], seq + (a,))
            if w not in best or cand < best[w]:
                best[w] = cand
                heapq.heappush(heap, (*cand, w))
    return None


def rsp_fptas(inst: RspInstance, epsilon: float) -> tuple[int, ...]:
    """A feasible path of cost at most (1+epsilon) times the optimum.

    Hassin-style scheme: bracket the optimal cost by doubling coarse tests,
    then run the exact solver once on costs rounded down to multiples of
    delta = epsilon * LB / n. Rounding drops at most delta per arc and a
    simple path has at most n-1 of them, hence the guarantee.
    """
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError("epsilon must be in (0, 1]")

    by_len = _dijkstra2(inst.n, inst.arcs, inst.length, inst.cost, inst.s, inst.t)
    if by_len is None or by_len[0] > inst.budget:
        raise Infeasible("no s-t path satisfies the length budget")
    ub = by_len[1]
    ub_path = by_len[2]

    by_cost = _dijkstra2(inst.n, inst.arcs, inst.cost, inst.length, inst.s, inst.t)
    if by_cost[1] <= inst.budget:
        return by_cost[2]  # the unconstrained cheapest path is feasible: exact
    c0 = by_cost[0]

    pos = [v for v in inst.cost if v > 0.0]
    lb = max(c0, min(pos)) if pos else 0.0
    if lb <= 0.0 or ub <= lb:
        return ub_path

    h1 = inst.n  # path arcs + 1
    while 2.0 * lb < ub:
        probe = 2.0 * lb
        delta = probe / h1
        scaled = tuple(int(v / delta) for v in inst.cost)
        hit = _label_search(
            inst.n, inst.arcs, inst.s, inst.t, scaled, inst.length, inst.budget, h1
        )
        if hit is None:
            lb = probe  # certified: every feasible path costs more than probe
        else:
            true_cost = sum(inst.cost[a] for a in hit[0])
            if true_cost < ub:
                ub = true_cost
                ub_path = hit[0]
            break

    delta = epsilon * lb / h1
    scaled = tuple(int(v / delta) for v in inst.cost)
    cap = math.floor(ub / delta) + 1
    hit = _label_search(
        inst.n, inst.arcs, inst.s, inst.t, scaled, inst.length, inst.budget, cap
    )
    if hit is None:
        return ub_path  # the bracketing path itself is within the guarantee
    best = hit[0]
    if sum(inst.cost[a] for a in best) <= sum(inst.cost[a] for a in ub_path):
        return best
    return ub_path
