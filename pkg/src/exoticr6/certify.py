"""Certified lower bounds for polynomials over boxes, by exact interval branch-and-bound.

Interval endpoints are Fractions, so every enclosure is sound without any
rounding control.  Boxes are refined breadth-first, one depth level at a
time, by bisecting the widest side (lowest index on ties).  Pruning only
compares against the fixed target, so the subdivision tree (and with it every
count in :class:`CertificateResult`) is independent of how many worker
processes evaluate a level.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from itertools import product
from math import comb
from typing import Iterable, Sequence

from .algebra import NVARS, Polynomial, Scalar, as_rational

CERTIFIED = "certified"
INCONCLUSIVE = "inconclusive"
INFEASIBLE_DOMAIN = "infeasible-domain"

EQ = "equals-zero"
LE = "at-most-zero"

CERT_FORMAT = "exoticr6-bb-certificate/1"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: Scalar) -> Interval:
        return cls(v, v)

    def __add__(self, other: Interval) -> Interval:
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: Interval) -> Interval:
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other) -> Interval:
        if not isinstance(other, Interval):
            c = as_rational(other)
            return Interval(self.lo * c, self.hi * c) if c >= 0 else Interval(self.hi * c, self.lo * c)
        ends = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ends), max(ends))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Interval:
        if n < 0:
            raise ValueError("negative interval power")
        if n == 0:
            return Interval(1, 1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0, max(a, b))

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def intersect(self, other: Interval) -> Interval:
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def to_json(self) -> list[str]:
        return [str(self.lo), str(self.hi)]

    @classmethod
    def from_json(cls, pair: Sequence[str]) -> Interval:
        return cls(Fraction(pair[0]), Fraction(pair[1]))


def interval_arith(op: str, a: Interval, b) -> Interval:
    """Dispatch ``add``, ``sub``, ``mul`` or ``pow`` (``b`` an int exponent)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** b
    raise ValueError(f"unknown interval op {op!r}")


Box = tuple  # tuple[Interval, ...]


def make_box(bounds: Iterable[Sequence[Scalar]]) -> Box:
    return tuple(Interval(lo, hi) for lo, hi in bounds)


def box_key(box: Box) -> tuple:
    return tuple((str(iv.lo), str(iv.hi)) for iv in box)


def box_to_json(box: Box) -> list:
    return [iv.to_json() for iv in box]


def box_from_json(data) -> Box:
    return tuple(Interval.from_json(pair) for pair in data)


def bisect(box: Box) -> tuple[Box, Box]:
    widths = [iv.width for iv in box]
    k = widths.index(max(widths))
    m = box[k].mid
    left = box[:k] + (Interval(box[k].lo, m),) + box[k + 1:]
    right = box[:k] + (Interval(m, box[k].hi),) + box[k + 1:]
    return left, right


@dataclass(frozen=True)
class Constraint:
    g: Polynomial
    relation: str  # EQ or LE

    def __post_init__(self):
        if self.relation not in (EQ, LE):
            raise ValueError(f"unknown constraint relation {self.relation!r}")


ConstraintList = tuple  # tuple[Constraint, ...]


# -- enclosures -----------------------------------------------------------

def _check_vars(p: Polynomial, n: int) -> None:
    if p.nvars() > n:
        raise ValueError(f"polynomial uses {p.nvars()} variables but the box has {n}")


@lru_cache(maxsize=64)
def _integer_form(p: Polynomial, n: int) -> tuple:
    """``(den, degs, [(exp, int_coeff)])`` with ``p = sum(int_coeff * x^exp) / den``."""
    den = 1
    for _, c in p.items():
        den = den * c.denominator // math.gcd(den, c.denominator)
    degs = tuple(max(p.degree_in(i), 0) for i in range(n))
    return den, degs, tuple((e[:n], int(c * den)) for e, c in p.items())


def centered_expansion(p: Polynomial, box: Box) -> tuple[int, dict]:
    """Expand ``p`` in the box-normalized variables ``s_i`` in [-1, 1].

    With ``x_i = (alpha_i + rho_i s_i) / delta_i`` (box midpoint plus
    half-width times ``s_i``), returns ``(scale, coeffs)`` such that
    ``p(x) = sum(coeffs[e] * s^e) / scale`` with all ``coeffs`` integers.
    """
    n = len(box)
    den, degs, terms = _integer_form(p, n)
    alpha, rho, delta = [], [], []
    for iv in box:
        d = 2 * iv.lo.denominator * iv.hi.denominator // math.gcd(iv.lo.denominator, iv.hi.denominator)
        a = int(iv.lo * d)
        b = int(iv.hi * d)
        alpha.append(a + b)
        rho.append(b - a)
        delta.append(2 * d)
    coeffs = {e: c for e, c in terms}
    for i in range(n):
        al, rh, de, dg = alpha[i], rho[i], delta[i], degs[i]
        if dg == 0:
            continue
        binom_rows: dict = {}
        out: dict = {}
        for e, c in coeffs.items():
            k = e[i]
            row = binom_rows.get(k)
            if row is None:
                pad = de ** (dg - k)
                row = [comb(k, j) * al ** (k - j) * rh ** j * pad for j in range(k + 1)]
                binom_rows[k] = row
            for j, w in enumerate(row):
                if w:
                    ne = e[:i] + (j,) + e[i + 1:]
                    out[ne] = out.get(ne, 0) + c * w
        coeffs = {e: v for e, v in out.items() if v}
    scale = den
    for i in range(n):
        scale *= delta[i] ** degs[i]
    return scale, coeffs


def poly_range(p: Polynomial, box: Box, form: str = "centered") -> Interval:
    """Sound enclosure of ``p`` over ``box``.

    ``natural`` evaluates the stored terms with interval powers;
    ``centered`` first re-expands ``p`` about the box midpoint (exactly, in
    integers), which makes the overestimation shrink quadratically with the
    box width.  Both collapse to the exact value on a degenerate box.
    """
    n = len(box)
    _check_vars(p, n)
    if form == "natural":
        lo = hi = Fraction(0)
        for e, c in p.items():
            term = Interval(c, c)
            for i in range(n):
                if e[i]:
                    term = term * (box[i] ** e[i])
            lo += term.lo
            hi += term.hi
        return Interval(lo, hi)
    if form != "centered":
        raise ValueError(f"unknown enclosure form {form!r}")
    scale, coeffs = centered_expansion(p, box)
    lo = hi = 0
    for e, c in coeffs.items():
        if not any(e):
            lo += c
            hi += c
        elif all(k % 2 == 0 for k in e):
            if c > 0:
                hi += c
            else:
                lo += c
        else:
            lo -= abs(c)
            hi += abs(c)
    return Interval(Fraction(lo, scale), Fraction(hi, scale))


def constraint_excludes(con: Constraint, rng: Interval) -> bool:
    if con.relation == EQ:
        return not (rng.lo <= 0 <= rng.hi)
    return rng.lo > 0


# -- branch and bound -----------------------------------------------------

@dataclass
class CertificateResult:
    certified_lower_bound: Fraction | None
    status: str
    boxes_processed: int
    max_depth_reached: int
    budget_exhausted: bool
    target: Fraction
    leaves: list = field(default_factory=list, repr=False)
    header: dict = field(default_factory=dict, repr=False)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "certified_lower_bound": None if self.certified_lower_bound is None else str(self.certified_lower_bound),
            "target": str(self.target),
            "boxes_processed": self.boxes_processed,
            "max_depth_reached": self.max_depth_reached,
            "budget_exhausted": self.budget_exhausted,
            "leaf_count": len(self.leaves),
        }

    def certificate(self) -> dict:
        return {"header": {**self.header, **self.summary()}, "leaves": self.leaves}


_WORKER_STATE: dict = {}


def _init_worker(p: Polynomial, cons: tuple, form: str) -> None:
    _WORKER_STATE["job"] = (p, cons, form)


def _evaluate(p: Polynomial, cons: Sequence[Constraint], form: str, box: Box):
    for idx, con in enumerate(cons):
        rng = poly_range(con.g, box, form)
        if constraint_excludes(con, rng):
            return ("infeasible", idx, rng)
    return ("objective", None, poly_range(p, box, form))


def _evaluate_in_worker(box: Box):
    p, cons, form = _WORKER_STATE["job"]
    return _evaluate(p, cons, form, box)


def bb_lower_bound(p: Polynomial, box: Box, cons: Sequence[Constraint] = (), target: Scalar = 0,
                   max_depth: int = 40, max_boxes: int = 200_000, workers: int = 1,
                   form: str = "centered") -> CertificateResult:
    """Certify ``p >= target`` on the feasible part of ``box`` or report why not.

    The returned bound is always a valid lower bound of ``p`` over the
    feasible part of ``box``: it is the least effective lower endpoint among
    objective leaves, open leaves and unprocessed boxes, where a box's
    effective endpoint is the larger of its own and its parent's.
    """
    target = as_rational(target)
    box = tuple(box)
    cons = tuple(cons)
    if max_depth < 0 or max_boxes < 1:
        raise ValueError("budget must allow at least the root box")
    _check_vars(p, len(box))
    for con in cons:
        _check_vars(con.g, len(box))

    header = {
        "format": CERT_FORMAT,
        "objective": p.serialize(),
        "nvars": len(box),
        "root_box": box_to_json(box),
        "constraints": [[c.g.serialize(), c.relation] for c in cons],
        "form": form,
        "policy": "bisect widest side, lowest index on ties; breadth-first by depth",
        "max_depth": max_depth,
        "max_boxes": max_boxes,
    }

    leaves: list[dict] = []
    level: list[tuple[Box, int, Fraction | None]] = [(box, 0, None)]
    processed = 0
    depth_reached = 0
    exhausted = False
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(p, cons, form))
    try:
        while level:
            room = max_boxes - processed
            todo, rest = level[:room], level[room:]
            boxes = [node[0] for node in todo]
            if pool is not None and len(boxes) > 1:
                chunk = max(1, math.ceil(len(boxes) / (4 * workers)))
                results = list(pool.map(_evaluate_in_worker, boxes, chunksize=chunk))
            else:
                results = [_evaluate(p, cons, form, b) for b in boxes]
            processed += len(todo)
            next_level = []
            for (b, depth, inherited), (kind, idx, rng) in zip(todo, results):
                depth_reached = max(depth_reached, depth)
                if kind == "infeasible":
                    leaves.append({"box": box_to_json(b), "depth": depth, "kind": "infeasible",
                                   "constraint": idx, "range": rng.to_json()})
                    continue
                eff = rng.lo if inherited is None else max(rng.lo, inherited)
                if eff >= target:
                    leaves.append({"box": box_to_json(b), "depth": depth, "kind": "objective",
                                   "enclosure": rng.to_json(), "effective_lo": str(eff)})
                elif depth >= max_depth:
                    exhausted = True
                    leaves.append({"box": box_to_json(b), "depth": depth, "kind": "open",
                                   "enclosure": rng.to_json(), "effective_lo": str(eff)})
                else:
                    for child in bisect(b):
                        next_level.append((child, depth + 1, eff))
            if rest:
                exhausted = True
                for b, depth, inherited in rest + next_level:
                    leaves.append({"box": box_to_json(b), "depth": depth, "kind": "pending",
                                   "effective_lo": None if inherited is None else str(inherited)})
                break
            level = next_level
    finally:
        if pool is not None:
            pool.shutdown()

    bound = leaf_bound(leaves)
    if bound is None and not any(leaf["kind"] == "pending" for leaf in leaves):
        status = INFEASIBLE_DOMAIN
    elif not exhausted and bound is not None and bound >= target:
        status = CERTIFIED
    else:
        status = INCONCLUSIVE
    return CertificateResult(certified_lower_bound=bound, status=status, boxes_processed=processed,
                             max_depth_reached=depth_reached, budget_exhausted=exhausted,
                             target=target, leaves=leaves, header=header)


def leaf_bound(leaves: Sequence[dict]) -> Fraction | None:
    vals = []
    for leaf in leaves:
        if leaf["kind"] in ("objective", "open", "pending"):
            if leaf.get("effective_lo") is None:
                return None  # root never evaluated: no finite bound
            vals.append(Fraction(leaf["effective_lo"]))
    return min(vals) if vals else None


# -- certificate files and replay ------------------------------------------

def dump_certificate(result: CertificateResult, path) -> None:
    """JSON lines: one header object, then one object per leaf box."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(result.certificate()["header"], sort_keys=True) + "\n")
        for leaf in result.leaves:
            fh.write(json.dumps(leaf, sort_keys=True) + "\n")


def load_certificate(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    return {"header": lines[0], "leaves": lines[1:]}


@dataclass
class ReplayResult:
    ok: bool
    leaves_checked: int
    nodes_evaluated: int
    bound: Fraction | None
    discrepancies: list


def replay_certificate(cert: dict, max_discrepancies: int = 20) -> ReplayResult:
    """Re-derive every leaf of a certificate from its header alone.

    The subdivision tree is rebuilt from the root box by the same bisection
    rule; each recorded leaf must be reached exactly once, every enclosure
    and constraint exclusion is recomputed, and the bound is recomputed from
    the recomputed enclosures.
    """
    head = cert["header"]
    p = Polynomial.parse(head["objective"])
    cons = [Constraint(Polynomial.parse(g), rel) for g, rel in head["constraints"]]
    form = head["form"]
    target = Fraction(head["target"])
    root = box_from_json(head["root_box"])
    recorded = {}
    problems: list[str] = []

    def note(msg: str) -> None:
        if len(problems) < max_discrepancies:
            problems.append(msg)

    for leaf in cert["leaves"]:
        key = box_key(box_from_json(leaf["box"]))
        if key in recorded:
            note(f"duplicate leaf {key}")
        recorded[key] = leaf
    max_leaf_depth = max((leaf["depth"] for leaf in cert["leaves"]), default=0)

    seen = set()
    effs: list[Fraction] = []
    nodes = 0
    stack = [(root, 0, None)]
    while stack:
        b, depth, inherited = stack.pop()
        key = box_key(b)
        leaf = recorded.get(key)
        if leaf is not None and leaf["depth"] == depth:
            seen.add(key)
            kind = leaf["kind"]
            if kind == "pending":
                want = None if inherited is None else str(inherited)
                if leaf["effective_lo"] != want:
                    note(f"pending leaf {key}: inherited bound {want} != recorded {leaf['effective_lo']}")
                if inherited is None:
                    effs.append(None)
                else:
                    effs.append(inherited)
                continue
            nodes += 1
            if kind == "infeasible":
                con = cons[leaf["constraint"]]
                rng = poly_range(con.g, b, form)
                if rng.to_json() != leaf["range"] or not constraint_excludes(con, rng):
                    note(f"infeasible leaf {key} not confirmed")
                continue
            rng = poly_range(p, b, form)
            eff = rng.lo if inherited is None else max(rng.lo, inherited)
            if rng.to_json() != leaf["enclosure"] or str(eff) != leaf["effective_lo"]:
                note(f"leaf {key}: enclosure {rng.to_json()} differs from recorded {leaf['enclosure']}")
            if kind == "objective" and eff < target:
                note(f"objective leaf {key} below target")
            effs.append(eff)
            continue
        if depth >= max_leaf_depth:
            note(f"box {key} at depth {depth} is not covered by any leaf")
            continue
        nodes += 1
        rng = poly_range(p, b, form)
        eff = rng.lo if inherited is None else max(rng.lo, inherited)
        left, right = bisect(b)
        stack.append((right, depth + 1, eff))
        stack.append((left, depth + 1, eff))

    if len(seen) != len(recorded):
        note(f"{len(recorded) - len(seen)} recorded leaves were never reached")
    bound = None if (not effs or any(e is None for e in effs)) else min(effs)
    want = head.get("certified_lower_bound")
    if (None if bound is None else str(bound)) != want:
        note(f"recomputed bound {bound} != recorded {want}")
    if head.get("status") == CERTIFIED:
        if any(leaf["kind"] in ("open", "pending") for leaf in cert["leaves"]):
            note("certified status with open or pending leaves")
        if bound is None or bound < target:
            note("certified status but bound below target")
    return ReplayResult(ok=not problems, leaves_checked=len(seen), nodes_evaluated=nodes,
                        bound=bound, discrepancies=problems)


# -- grid oracle ---------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    point: tuple | None
    value: Fraction | None
    nodes: int
    feasible_nodes: int

    @property
    def empty(self) -> bool:
        return self.point is None

    def __iter__(self):
        return iter((self.point, self.value))


class _ScaledEvaluator:
    """Exact evaluation at points ``n / m`` with integer ``n`` using only int arithmetic."""

    def __init__(self, p: Polynomial, nvars: int, m: int):
        self.m = m
        self.deg = max(p.degree(), 0)
        den = 1
        for _, c in p.items():
            den = den * c.denominator // math.gcd(den, c.denominator)
        self.den = den
        self.terms = [(e[:nvars], int(c * den) * m ** (self.deg - sum(e))) for e, c in p.items()]

    def __call__(self, ints: Sequence[int]) -> Fraction:
        total = 0
        for e, c in self.terms:
            t = c
            for n, k in zip(ints, e):
                if k:
                    t *= n ** k
            total += t
        return Fraction(total, self.den * self.m ** self.deg)


def grid_oracle_min(p: Polynomial, box: Box, cons: Sequence[Constraint] = (), step: Scalar = Fraction(1, 10)) -> GridResult:
    """Exhaustive scan of the rational grid ``lo + k*step`` inside ``box``.

    Inequality constraints are tested exactly at each node.  Equality
    constraints accept nodes with ``|g| <= step * sum_i sup|dg/dx_i|``, so the
    grid keeps the nodes within about one step of the constraint surface.
    """
    step = as_rational(step)
    if step <= 0:
        raise ValueError("grid step must be positive")
    box = tuple(box)
    n = len(box)
    _check_vars(p, n)
    m = step.denominator
    for iv in box:
        m = m * iv.lo.denominator // math.gcd(m, iv.lo.denominator)
    axes = []
    for iv in box:
        count = int((iv.hi - iv.lo) / step)
        axes.append([int((iv.lo + k * step) * m) for k in range(count + 1)])
    objective = _ScaledEvaluator(p, n, m)
    checks = []
    for con in cons:
        _check_vars(con.g, n)
        tol = Fraction(0)
        if con.relation == EQ:
            for i in range(n):
                r = poly_range(con.g.diff(i), box, "natural")
                tol += max(abs(r.lo), abs(r.hi))
            tol *= step
        checks.append((_ScaledEvaluator(con.g, n, m), con.relation, tol))
    best_val = None
    best_pt = None
    feasible = 0
    total = 0
    for ints in product(*axes):
        total += 1
        ok = True
        for ev, rel, tol in checks:
            g = ev(ints)
            if (rel == LE and g > 0) or (rel == EQ and abs(g) > tol):
                ok = False
                break
        if not ok:
            continue
        feasible += 1
        v = objective(ints)
        if best_val is None or v < best_val:
            best_val, best_pt = v, ints
    point = None if best_pt is None else tuple(Fraction(k, m) for k in best_pt)
    return GridResult(point=point, value=best_val, nodes=total, feasible_nodes=feasible)
