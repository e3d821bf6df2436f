"""Design without conductance bounds: the optimal support is an s-t path.

With ybar unbounded, some optimal solution installs exactly the arcs of one
simple s-t path and gives every positive-variable-cost arc on it the
closed-form conductance

    y_a = (sum_{a' in P+} c_{a'}^{r/(r+1)})^{1/r} / (c_a^{1/(r+1)} * B^{1/r})

which meets the resistance budget with equality; zero-variable-cost arcs
get UNBOUNDED conductance and contribute only their fixed cost. Finding the
best path is exact when one cost vector vanishes (a shortest-path problem)
and otherwise approximated by searching a geometric grid of the KKT
multiplier, solving one restricted shortest path problem per grid point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .core import UNBOUNDED, Instance, Solution
from .errors import AllVariableCostsZero, Disconnected, Infeasible, ValidationError
from .rsp import RspInstance, rsp_fptas


@dataclass(frozen=True)
class PathSolution:
    """An s-t path (arc indices, in walk order) with conductances per path arc."""

    path: tuple[int, ...]
    y: tuple[float, ...]
    objective: float


@dataclass(frozen=True)
class LambdaGrid:
    L: float
    U: float
    epsilon: float
    points: tuple[float, ...]


def _adjacency(n, arcs):
    adj = [[] for _ in range(n)]
    for a, (u, v) in enumerate(arcs):
        if u != v:
            adj[u].append((a, v))
            adj[v].append((a, u))
    return adj


def _dijkstra(n, arcs, weights, s, t):
    """Shortest s-t path, ties by lexicographic arc sequence. Arcs are two-way."""
    adj = _adjacency(n, arcs)
    best = {s: (0.0, ())}
    heap = [(0.0, (), s)]
    settled = set()
    while heap:
        d, seq, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        if v == t:
            return d, seq
        for a, w in adj[v]:
            if w in settled:
                continue
            cand = (d + weights[a], seq + (a,))
            if w not in best or cand < best[w]:
                best[w] = cand
                heapq.heappush(heap, (cand[0], cand[1], w))
    raise Disconnected("no s-t path exists")


def optimal_y_for_path(path, c, B: float, r: float, gamma=None):
    """Closed-form conductances and objective for a fixed path.

    gamma defaults to all zeros. Arcs with c_a = 0 get UNBOUNDED; when the
    whole path is free of variable costs the resistance is 0 and only fixed
    costs remain.
    """
    if not (B > 0.0):
        raise ValidationError("budget B must be > 0")
    e = r / (r + 1.0)
    S = sum(c[a] ** e for a in path if c[a] > 0.0)
    y = []
    for a in path:
        if c[a] > 0.0:
            y.append(S ** (1.0 / r) / (c[a] ** (1.0 / (r + 1.0)) * B ** (1.0 / r)))
        else:
            y.append(UNBOUNDED)
    objective = S ** ((r + 1.0) / r) / B ** (1.0 / r) if S > 0.0 else 0.0
    if gamma is not None:
        objective += sum(gamma[a] for a in path)
    return tuple(y), objective


def to_solution(inst: Instance, ps: PathSolution) -> Solution:
    """Expand a PathSolution into full per-arc vectors."""
    x = [0] * inst.m
    y = [0.0] * inst.m
    for a, ya in zip(ps.path, ps.y):
        x[a] = 1
        y[a] = ya
    achieved = 0.0
    for a in ps.path:
        ya = y[a]
        if not math.isinf(ya):
            achieved += ya ** (-float(inst.r))
    return Solution(x=tuple(x), y=tuple(y), cost=ps.objective, achievedR=achieved)


def solve_fixed_cost_only(inst: Instance) -> PathSolution:
    """Exact solver for c == 0: a shortest path under the fixed costs gamma."""
    if any(v > 0.0 for v in inst.c):
        raise ValidationError("solve_fixed_cost_only needs c == 0 on every arc")
    if not inst.unbounded():
        raise ValidationError("conductance bounds are not supported here")
    d, seq = _dijkstra(inst.n, inst.arcs, inst.gamma, inst.s, inst.t)
    y = (UNBOUNDED,) * len(seq)
    return PathSolution(path=seq, y=y, objective=d)


def solve_variable_cost_only(inst: Instance) -> PathSolution:
    """Exact solver for gamma == 0: shortest path under lengths c^(r/(r+1))."""
    if any(v > 0.0 for v in inst.gamma):
        raise ValidationError("solve_variable_cost_only needs gamma == 0 on every arc")
    if not inst.unbounded():
        raise ValidationError("conductance bounds are not supported here")
    e = inst.r / (inst.r + 1.0)
    weights = tuple(v ** e for v in inst.c)
    _, seq = _dijkstra(inst.n, inst.arcs, weights, inst.s, inst.t)
    y, objective = optimal_y_for_path(seq, inst.c, inst.B, inst.r)
    return PathSolution(path=seq, y=y, objective=objective)


def lambda_bounds(inst: Instance) -> tuple[float, float]:
    """Bracket [L, U] for the KKT multiplier of the budget constraint."""
    pos = [v for v in inst.c if v > 0.0]
    if not pos:
        raise AllVariableCostsZero("every variable cost is zero; use solve_fixed_cost_only")
    denom = inst.r * inst.B ** ((inst.r + 1.0) / inst.r)
    L = min(pos) / denom
    U = max(pos) * (inst.n - 1.0) ** ((inst.r + 1.0) / inst.r) / denom
    return L, U


def lambda_grid(inst: Instance, epsilon: float) -> LambdaGrid:
    """Geometric grid covering [L, U] plus one point above U.

    The in-range point count is asserted against its analytic bound.
    """
    L, U = lambda_bounds(inst)
    step = (1.0 + epsilon / 3.0) ** (inst.r + 1.0)
    points = []
    lam = L
    i = 0
    while lam <= U:
        points.append(lam)
        i += 1
        lam = L * step ** i
    inside = len(points)
    points.append(lam)

    pos = [v for v in inst.c if v > 0.0]
    ratio = max(pos) / min(pos)
    bound = math.ceil(3.0 * math.log2((inst.n - 1.0) ** ((inst.r + 1.0) / inst.r) * ratio) / epsilon) + 1
    assert inside <= bound, f"lambda grid has {inside} points, bound {bound}"
    return LambdaGrid(L=L, U=U, epsilon=epsilon, points=tuple(points))


def solve_path_fptas(inst: Instance, epsilon: float) -> PathSolution:
    """(1+epsilon)-approximation for general costs with ybar unbounded.

    Per grid multiplier lambda the subproblem is a restricted shortest path
    with cost (lambda*r)^(1/(r+1)) * c^(r/(r+1)) + gamma, length c^(r/(r+1))
    and length budget (lambda*r)^(r/(r+1)) * B, solved at factor 1+eps/3;
    the grid itself costs another 1+eps/3 and (1+eps/3)^2 <= 1+eps on (0,1].
    The winning path's conductances are re-derived in closed form, so the
    budget is met exactly no matter what the approximation did.
    """
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError("epsilon must be in (0, 1]")
    if not inst.unbounded():
        raise ValidationError("conductance bounds are not supported here")
    if all(v == 0.0 for v in inst.c):
        return solve_fixed_cost_only(inst)
    # Fail loudly (and uniformly) when the terminals are not connected.
    _dijkstra(inst.n, inst.arcs, (0.0,) * inst.m, inst.s, inst.t)

    r = inst.r
    e = r / (r + 1.0)
    lengths = tuple(v ** e for v in inst.c)
    grid = lambda_grid(inst, epsilon)

    best = None
    for lam in grid.points:
        factor = (lam * r) ** (1.0 / (r + 1.0))
        costs = tuple(factor * lengths[a] + inst.gamma[a] for a in range(inst.m))
        budget = (lam * r) ** e * inst.B
        sub = RspInstance(
            n=inst.n, arcs=inst.arcs, s=inst.s, t=inst.t,
            cost=costs, length=lengths, budget=budget,
        )
        try:
            path = rsp_fptas(sub, epsilon / 3.0)
        except Infeasible:
            continue
        value = sum(costs[a] for a in path)
        if best is None or (value, path) < best:
            best = (value, path)

    if best is None:
        # Unreachable once connectivity holds: the top grid point's budget
        # admits every simple path.
        raise Disconnected("no s-t path exists")
    path = best[1]
    y, objective = optimal_y_for_path(path, inst.c, inst.B, r, inst.gamma)
    return PathSolution(path=path, y=y, objective=objective)
