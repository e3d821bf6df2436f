"""Minimum-energy unit flows and effective resistance.

For conductances y and exponent r, a flow f routed from s to t has energy
sum_a |f_a|^{r+1} / y_a^r over the supported arcs. The unique minimizer of
that energy among unit s-t flows induces node potentials pi with
pi_tail - pi_head = sign(f_a) * (|f_a| / y_a)^r on every supported arc, and
the effective resistance is R = pi_s - pi_t (equal to the optimal energy).

The solver works in cycle space: it builds a spanning tree of the support,
starts from the unit flow on the tree's s-t path, and repeatedly performs
exact one-dimensional minimizations along each fundamental cycle. Each line
search is strictly convex in the step, so it is solved in closed form for
r = 1 and by safeguarded Newton otherwise. Round-robin sweeps alone converge
linearly and can crawl on ill-conditioned cycle overlaps, so the sweeps are
interleaved with a damped Newton step in the full cycle coordinate space;
the minimizer is the same (the energy is strictly convex on the affine flow
space), the polish only changes how fast we land on it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import Disconnected, NonConvergence, ValidationError


@dataclass(frozen=True)
class FlowState:
    """A unit s-t flow with its induced potentials and energy.

    f is aligned with arc orientation (negative = against the arrow); pi is
    indexed by node with pi_t = 0 and zeros on nodes the support does not
    connect to t.
    """

    f: tuple[float, ...]
    pi: tuple[float, ...]
    energy: float


def _check_inputs(n, arcs, y, r, s, t):
    if len(y) != len(arcs):
        raise ValidationError("y must have one entry per arc")
    for v in y:
        if math.isnan(v) or v < 0.0:
            raise ValidationError("conductances must be >= 0")
        if math.isinf(v):
            raise ValidationError("contract infinite conductances before solving")
    if not (r >= 1.0) or not math.isfinite(r):
        raise ValidationError("flow exponent r must be a finite real >= 1")
    if not (0 <= s < n and 0 <= t < n) or s == t:
        raise ValidationError("terminals must be distinct in-range nodes")


def _phi(z: float, r: float) -> float:
    """sign(z) * |z|^r, the arc potential drop per unit of conductance weight."""
    if z == 0.0:
        return 0.0
    return math.copysign(abs(z) ** r, z)


def _line_search(f, cyc_arcs, sigmas, weights, r):
    """Exact step theta minimizing the energy along one cycle direction.

    The derivative g(theta) = sum sigma * phi(f + sigma*theta) / y^r is
    strictly increasing, so the minimizer is g's unique root.
    """
    vals = [f[a] for a in cyc_arcs]

    if r == 1.0:
        num = 0.0
        den = 0.0
        for v, sg, w in zip(vals, sigmas, weights):
            num += sg * v * w
            den += w
        return -num / den

    def g(theta):
        acc = 0.0
        for v, sg, w in zip(vals, sigmas, weights):
            acc += sg * w * _phi(v + sg * theta, r)
        return acc

    d0 = g(0.0)
    if d0 == 0.0:
        return 0.0
    # Bracket the root: move against the gradient, doubling the step.
    span = 1.0 + max(abs(v) for v in vals)
    if d0 > 0.0:
        hi, lo = 0.0, -span
        while g(lo) > 0.0:
            lo *= 2.0
            if lo < -1e30:
                raise NonConvergence("line search failed to bracket")
    else:
        lo, hi = 0.0, span
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e30:
                raise NonConvergence("line search failed to bracket")

    theta = 0.5 * (lo + hi)
    for _ in range(120):
        gv = g(theta)
        if gv > 0.0:
            hi = theta
        elif gv < 0.0:
            lo = theta
        else:
            return theta
        # Newton step when it stays inside the bracket, bisection otherwise.
        gp = 0.0
        for v, sg, w in zip(vals, sigmas, weights):
            z = abs(v + sg * theta)
            if z > 0.0:
                gp += w * r * z ** (r - 1.0)
        nxt = theta - gv / gp if gp > 0.0 else None
        if nxt is None or not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
            return nxt
        theta = nxt
    return theta


def _descend(f, cycles, m, y, r, tol, max_line_searches):
    """Drive the cycle derivatives of the energy to (near) zero, in place.

    Alternates exact per-cycle line searches with a damped Newton step over
    all cycle coordinates at once. Converged means the largest cycle
    derivative is below tol * (1 + energy) and the last joint step moved no
    arc by more than tol * max(1, |f|).
    """
    k = len(cycles)
    w = np.array([y[a] ** -r if y[a] > 0.0 else 0.0 for a in range(m)])
    member = np.zeros((k, m))
    for i, (cyc_arcs, sigmas, _) in enumerate(cycles):
        for b, sg in zip(cyc_arcs, sigmas):
            member[i, b] += sg

    fv = np.asarray(f)

    def energy_of(vec):
        return float(np.sum(w * np.abs(vec) ** (r + 1.0)))

    def grad_cycles(vec):
        ga = (r + 1.0) * w * np.sign(vec) * np.abs(vec) ** r
        return member @ ga

    # Aim two orders below the caller's tolerance: the potential-flow
    # coupling error downstream is the residual amplified by |drop|^{1/r-1},
    # so delivering exactly tol would leak visibly larger flow errors.
    target = 0.01 * tol
    prev_energy = math.inf
    searches = 0
    while True:
        # one exact round-robin sweep; guarantees progress from anywhere
        for cyc_arcs, sigmas, weights in cycles:
            searches += 1
            if searches > max_line_searches:
                raise NonConvergence("energy descent exhausted its line-search budget")
            theta = _line_search(f, cyc_arcs, sigmas, weights, r)
            if theta != 0.0:
                for b, sg in zip(cyc_arcs, sigmas):
                    f[b] += sg * theta

        fv = np.asarray(f)
        fmax = max(1.0, float(np.max(np.abs(fv))))
        energy = energy_of(fv)
        moved = math.inf

        # Newton polish in cycle coordinates, with Levenberg damping and a
        # backtracking energy check so it can never undo the sweep's work.
        damping = 0.0
        for _ in range(60):
            searches += 1
            if searches > max_line_searches:
                raise NonConvergence("energy descent exhausted its line-search budget")
            g = grad_cycles(fv)
            if np.max(np.abs(g)) <= target * (1.0 + energy):
                moved = 0.0
                break
            h = np.minimum(w * r * (r + 1.0) * np.abs(fv) ** (r - 1.0), 1e30)
            H = (member * h) @ member.T
            scale = max(float(np.max(np.diag(H))), 1.0)
            try:
                d = np.linalg.solve(H + (damping + 1e-14) * scale * np.eye(k), -g)
            except np.linalg.LinAlgError:
                damping = max(2.0 * damping, 1e-8)
                continue
            step = member.T @ d
            alpha = 1.0
            improved = False
            for _ in range(40):
                trial = fv + alpha * step
                if energy_of(trial) < energy:
                    improved = True
                    break
                alpha *= 0.5
            if not improved:
                damping = max(2.0 * damping, 1e-8)
                continue
            fv = fv + alpha * step
            energy = energy_of(fv)
            moved = alpha * float(np.max(np.abs(step)))
            damping *= 0.25
            if alpha == 1.0 and moved <= target * fmax:
                break

        g = grad_cycles(fv)
        f[:] = fv.tolist()
        if np.max(np.abs(g)) <= target * (1.0 + energy) and moved <= target * fmax:
            return
        if energy == prev_energy and np.max(np.abs(g)) <= tol * (1.0 + energy):
            return  # at the floating-point floor but within the caller's tolerance
        prev_energy = energy


def min_energy_flow(n, arcs, y, r, s, t, tol: float = 1e-10, max_line_searches: int = 1_000_000) -> FlowState:
    """Minimum-energy unit s-t flow on the supported arcs (y_a > 0).

    Raises Disconnected when the support does not connect s to t, and
    NonConvergence if the sweep budget runs out first.
    """
    _check_inputs(n, arcs, y, r, s, t)
    m = len(arcs)

    adj = [[] for _ in range(n)]
    for a, (u, v) in enumerate(arcs):
        if y[a] > 0.0 and u != v:
            adj[u].append((a, v))
            adj[v].append((a, u))

    parent: list[tuple[int, int] | None] = [None] * n
    seen = [False] * n
    seen[t] = True
    queue = deque([t])
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for a, w in adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = (u, a)
                queue.append(w)
    if not seen[s]:
        raise Disconnected("s and t are not connected by installed arcs")

    tree_arcs = {p[1] for p in parent if p is not None}

    f = [0.0] * m
    v = s
    while v != t:
        pv, a = parent[v]
        f[a] += 1.0 if arcs[a][0] == v else -1.0
        v = pv

    def chain(x):
        """Arcs from x down to t as (arc, sigma along the walk)."""
        out = []
        while parent[x] is not None:
            px, a = parent[x]
            out.append((a, 1.0 if arcs[a][0] == x else -1.0))
            x = px
        return out

    cycles = []
    for a, (u, v) in enumerate(arcs):
        if y[a] <= 0.0 or a in tree_arcs:
            continue
        if u == v:
            continue  # a self-loop carries no flow at optimality
        if not seen[u]:
            continue  # support component without the terminals
        cu, cv = chain(u), chain(v)
        while cu and cv and cu[-1][0] == cv[-1][0]:
            cu.pop()
            cv.pop()
        steps = [(a, 1.0)]
        steps.extend(cv)
        steps.extend((b, -sg) for b, sg in reversed(cu))
        cyc_arcs = tuple(b for b, _ in steps)
        sigmas = tuple(sg for _, sg in steps)
        weights = tuple(y[b] ** -r for b in cyc_arcs)
        cycles.append((cyc_arcs, sigmas, weights))

    if cycles:
        _descend(f, cycles, m, y, r, tol, max_line_searches)

    pi = [0.0] * n
    for u in order:
        if parent[u] is None:
            continue
        pu, a = parent[u]
        drop = _phi(f[a], r) / y[a] ** r  # potential falls in the flow direction
        pi[u] = pi[pu] + drop if arcs[a][0] == u else pi[pu] - drop

    energy = 0.0
    for a in range(m):
        if y[a] > 0.0 and f[a] != 0.0:
            energy += abs(f[a]) ** (r + 1.0) / y[a] ** r
    return FlowState(f=tuple(f), pi=tuple(pi), energy=energy)


def effective_resistance(n, arcs, y, r, s, t, tol: float = 1e-10) -> float:
    """pi_s - pi_t for the minimum-energy unit flow; +inf when disconnected."""
    try:
        state = min_energy_flow(n, arcs, y, r, s, t, tol=tol)
    except Disconnected:
        return math.inf
    return state.pi[s] - state.pi[t]


def effective_conductance(n, arcs, y, r, s, t, tol: float = 1e-10) -> float:
    """R^(-1/r), with the conventions 0 -> +inf and +inf -> 0."""
    R = effective_resistance(n, arcs, y, r, s, t, tol=tol)
    if R == 0.0:
        return math.inf
    if math.isinf(R):
        return 0.0
    return R ** (-1.0 / r)
