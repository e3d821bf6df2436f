"""Instance/solution data model, JSON I/O, and the solution checker.

An instance is a directed multigraph with designated terminals s and t, a
flow exponent r >= 1, per-arc variable costs c, fixed costs gamma, upper
conductance bounds ybar, and a resistance budget B. A solution installs a
subset of arcs (x) with chosen conductances (y); it is feasible when the
effective resistance of the installed network between s and t stays within
the budget. Arc direction never matters for feasibility: flow may traverse
an arc against its orientation.

Conductances may be UNBOUNDED (infinite). That is only meaningful on arcs
with zero variable cost and no upper bound; such an arc behaves like a
short circuit and is serialized as the string "inf".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DimensionMismatch, SchemaError, ValidationError

UNBOUNDED = math.inf

_INSTANCE_REQUIRED = ("n", "arcs", "s", "t", "r", "c", "gamma", "B")
_INSTANCE_OPTIONAL = ("ybar",)
_SOLUTION_FIELDS = ("x", "y", "cost", "achievedR")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (isinstance(v, float) or _is_int(v)) and math.isfinite(v)


@dataclass(frozen=True)
class Instance:
    """A design instance. Arrays are indexed by arc in file order."""

    n: int
    arcs: tuple[tuple[int, int], ...]
    s: int
    t: int
    r: float
    c: tuple[float, ...]
    gamma: tuple[float, ...]
    ybar: tuple[float, ...]
    B: float

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("need at least two nodes")
        if not (0 <= self.s < self.n and 0 <= self.t < self.n):
            raise ValidationError("terminal out of range")
        if self.s == self.t:
            raise ValidationError("s and t must differ")
        if not (self.r >= 1.0) or not math.isfinite(self.r):
            raise ValidationError("flow exponent r must be a finite real >= 1")
        m = len(self.arcs)
        for name in ("c", "gamma", "ybar"):
            if len(getattr(self, name)) != m:
                raise ValidationError(f"{name} must have one entry per arc")
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError("arc endpoint out of range")
        for a in range(m):
            if not (self.c[a] >= 0.0) or not math.isfinite(self.c[a]):
                raise ValidationError("variable costs must be finite and >= 0")
            if not (self.gamma[a] >= 0.0) or not math.isfinite(self.gamma[a]):
                raise ValidationError("fixed costs must be finite and >= 0")
            if not (self.ybar[a] > 0.0):
                raise ValidationError("conductance bounds must be > 0")
        if not (self.B > 0.0):
            raise ValidationError("budget B must be > 0")

    @property
    def m(self) -> int:
        return len(self.arcs)

    def unbounded(self) -> bool:
        """True when no arc has a finite conductance bound."""
        return all(math.isinf(ub) for ub in self.ybar)


@dataclass(frozen=True)
class Solution:
    x: tuple[int, ...]
    y: tuple[float, ...]
    cost: float
    achievedR: float


@dataclass(frozen=True)
class FixedInstance:
    """A design instance whose conductances come from a discrete menu.

    ``options[a]`` lists the installable (mu, p) pairs for arc a: conductance
    mu at price p. Installing nothing is always allowed. Fixed costs are
    folded into the prices.
    """

    n: int
    arcs: tuple[tuple[int, int], ...]
    s: int
    t: int
    r: float
    B: float
    options: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("need at least two nodes")
        if not (0 <= self.s < self.n and 0 <= self.t < self.n):
            raise ValidationError("terminal out of range")
        if self.s == self.t:
            raise ValidationError("s and t must differ")
        if not (self.r >= 1.0) or not math.isfinite(self.r):
            raise ValidationError("flow exponent r must be a finite real >= 1")
        if len(self.options) != len(self.arcs):
            raise ValidationError("options must have one entry per arc")
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError("arc endpoint out of range")
        for opts in self.options:
            for mu, p in opts:
                if not (mu > 0.0) or not math.isfinite(mu):
                    raise ValidationError("option conductances must be finite and > 0")
                if not (p >= 0.0) or not math.isfinite(p):
                    raise ValidationError("option prices must be finite and >= 0")
        if not (self.B > 0.0):
            raise ValidationError("budget B must be > 0")

    @property
    def m(self) -> int:
        return len(self.arcs)


@dataclass(frozen=True)
class VerificationReport:
    feasible: bool
    achievedR: float
    cost: float
    reasons: tuple[str, ...] = field(default=())


def _require_fields(doc: dict, required, optional, what: str) -> None:
    for key in required:
        if key not in doc:
            raise SchemaError(f"{what} is missing field {key!r}")
    allowed = set(required) | set(optional)
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"{what} has unknown field {key!r}")


def _loads(text: str) -> dict:
    def bad_const(name):
        raise SchemaError(f"non-finite literal {name!r} is not allowed")

    try:
        doc = json.loads(text, parse_constant=bad_const)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    return doc


def parse_instance(text: str) -> Instance:
    """Parse an instance document, rejecting unknown fields.

    Omitting "ybar" means every arc is unbounded; an explicit entry may be
    the string "inf" for the same effect on a single arc.
    """
    doc = _loads(text)
    _require_fields(doc, _INSTANCE_REQUIRED, _INSTANCE_OPTIONAL, "instance")

    n = doc["n"]
    if not _is_int(n):
        raise SchemaError("n must be an integer")
    raw_arcs = doc["arcs"]
    if not isinstance(raw_arcs, list):
        raise SchemaError("arcs must be a list")
    arcs = []
    for ent in raw_arcs:
        if not isinstance(ent, list) or len(ent) != 2 or not all(_is_int(e) for e in ent):
            raise SchemaError("each arc must be a [tail, head] pair of integers")
        arcs.append((ent[0], ent[1]))
    for key in ("s", "t"):
        if not _is_int(doc[key]):
            raise SchemaError(f"{key} must be an integer")
    for key in ("r", "B"):
        if not _is_real(doc[key]):
            raise SchemaError(f"{key} must be a finite number")

    def number_list(key):
        val = doc[key]
        if not isinstance(val, list) or not all(_is_real(v) for v in val):
            raise SchemaError(f"{key} must be a list of finite numbers")
        return tuple(float(v) for v in val)

    c = number_list("c")
    gamma = number_list("gamma")
    if "ybar" in doc:
        raw = doc["ybar"]
        if not isinstance(raw, list):
            raise SchemaError("ybar must be a list")
        ybar = []
        for v in raw:
            if v == "inf":
                ybar.append(math.inf)
            elif _is_real(v):
                ybar.append(float(v))
            else:
                raise SchemaError('ybar entries must be numbers or "inf"')
        ybar = tuple(ybar)
    else:
        ybar = (math.inf,) * len(arcs)

    return Instance(
        n=n,
        arcs=tuple(arcs),
        s=doc["s"],
        t=doc["t"],
        r=float(doc["r"]),
        c=c,
        gamma=gamma,
        ybar=ybar,
        B=float(doc["B"]),
    )


def write_instance(inst: Instance) -> str:
    """Serialize an instance. The ybar field is omitted when all-unbounded."""
    if not math.isfinite(inst.B):
        raise ValidationError("cannot serialize an infinite budget")
    doc = {
        "n": inst.n,
        "arcs": [[u, v] for u, v in inst.arcs],
        "s": inst.s,
        "t": inst.t,
        "r": inst.r,
        "c": list(inst.c),
        "gamma": list(inst.gamma),
        "B": inst.B,
    }
    if not inst.unbounded():
        doc["ybar"] = ["inf" if math.isinf(ub) else ub for ub in inst.ybar]
    return json.dumps(doc, sort_keys=True)


def read_solution(text: str) -> Solution:
    doc = _loads(text)
    _require_fields(doc, _SOLUTION_FIELDS, (), "solution")
    raw_x = doc["x"]
    if not isinstance(raw_x, list) or not all(_is_int(v) and v in (0, 1) for v in raw_x):
        raise SchemaError("x must be a list of 0/1 integers")
    raw_y = doc["y"]
    if not isinstance(raw_y, list):
        raise SchemaError("y must be a list")
    y = []
    for v in raw_y:
        if v == "inf":
            y.append(math.inf)
        elif _is_real(v):
            y.append(float(v))
        else:
            raise SchemaError('y entries must be numbers or "inf"')
    if not _is_real(doc["cost"]):
        raise SchemaError("cost must be a finite number")
    ar = doc["achievedR"]
    if ar == "inf":
        ar = math.inf
    elif _is_real(ar):
        ar = float(ar)
    else:
        raise SchemaError('achievedR must be a number or "inf"')
    return Solution(x=tuple(raw_x), y=tuple(y), cost=float(doc["cost"]), achievedR=ar)


def write_solution(sol: Solution) -> str:
    """Serialize a solution so that reading it back is value-exact.

    Finite floats go through repr (shortest round-trip form); infinite
    conductances and an infinite achievedR become the string "inf".
    """
    if not math.isfinite(sol.cost):
        raise ValidationError("cannot serialize a non-finite cost")
    for v in sol.y:
        if math.isnan(v):
            raise ValidationError("conductances must not be NaN")
    doc = {
        "x": list(sol.x),
        "y": ["inf" if math.isinf(v) else v for v in sol.y],
        "cost": sol.cost,
        "achievedR": "inf" if math.isinf(sol.achievedR) else sol.achievedR,
    }
    return json.dumps(doc, sort_keys=True)


class _DisjointSets:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _support_resistance(inst: Instance, y, tol: float) -> float:
    """Effective s-t resistance of the installed arcs, shorting infinite ones."""
    from .resistance import effective_resistance

    ds = _DisjointSets(inst.n)
    for a, (u, v) in enumerate(inst.arcs):
        if math.isinf(y[a]):
            ds.union(u, v)
    label = {}
    for v in range(inst.n):
        label.setdefault(ds.find(v), len(label))
    qs, qt = label[ds.find(inst.s)], label[ds.find(inst.t)]
    if qs == qt:
        return 0.0
    q_arcs = []
    q_y = []
    for a, (u, v) in enumerate(inst.arcs):
        if y[a] > 0.0 and not math.isinf(y[a]):
            q_arcs.append((label[ds.find(u)], label[ds.find(v)]))
            q_y.append(y[a])
    return effective_resistance(
        len(label), q_arcs, q_y, inst.r, qs, qt, tol=min(1e-10, tol)
    )


def verify(inst: Instance, sol: Solution, tol: float = 1e-9) -> VerificationReport:
    """Check a solution against an instance.

    Feasibility means: x is binary, y respects 0 <= y <= ybar, any positive
    conductance is on an installed arc, infinite conductance appears only on
    zero-variable-cost arcs, and the effective resistance of the installed
    network is at most B * (1 + tol). The reported cost is recomputed from
    scratch; it does not have to match sol.cost for the solution to verify.
    """
    if len(sol.x) != inst.m or len(sol.y) != inst.m:
        raise DimensionMismatch(
            f"solution has {len(sol.x)} / {len(sol.y)} entries for {inst.m} arcs"
        )
    reasons = []
    for a in range(inst.m):
        if sol.x[a] not in (0, 1):
            reasons.append(f"x[{a}] is not binary")
        if math.isnan(sol.y[a]) or sol.y[a] < 0.0:
            reasons.append(f"y[{a}] is negative or NaN")
        elif sol.y[a] > inst.ybar[a]:
            reasons.append(f"y[{a}] exceeds its bound")
        if sol.y[a] > 0.0 and sol.x[a] != 1:
            reasons.append(f"y[{a}] > 0 on an uninstalled arc")
        if math.isinf(sol.y[a]) and inst.c[a] > 0.0:
            reasons.append(f"y[{a}] is unbounded but arc {a} has positive variable cost")

    cost = 0.0
    for a in range(inst.m):
        if sol.x[a] == 1:
            cost += inst.gamma[a]
        if sol.y[a] > 0.0:
            if math.isinf(sol.y[a]):
                if inst.c[a] > 0.0:
                    cost = math.inf
            else:
                cost += inst.c[a] * sol.y[a]

    achieved = _support_resistance(inst, sol.y, tol)
    feasible = not reasons and achieved <= inst.B * (1.0 + tol)
    return VerificationReport(
        feasible=feasible, achievedR=achieved, cost=cost, reasons=tuple(reasons)
    )
