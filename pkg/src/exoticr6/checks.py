"""Named verification checks, one per computational claim about the construction."""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field, replace
from decimal import ROUND_DOWN, Context, Decimal
from fractions import Fraction
from typing import Callable

from .algebra import NVARS, X1, X2, X3, Polynomial
from .certify import EQ, LE, CERTIFIED, Constraint, bb_lower_bound, grid_oracle_min, make_box
from .construction import (
    ANCHOR,
    REFERENCE_Q_BOUND,
    SPHERE_LEVEL,
    apply_matrix,
    block_rotation,
    build_all,
    common_zero_probe,
    rank4_at,
    reduced_system,
    sample_reduced_sphere_points,
    sample_sphere_points,
    sample_torus_points,
)
from .forms import (
    DiffForm,
    all_multi_indices,
    ext_d,
    hodge_star,
    pullback_linear,
    wedge,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

DEFAULT_THRESHOLD = Fraction(5, 1000)


@dataclass(frozen=True)
class CheckConfig:
    """Knobs shared by all checks; ``None`` means the check's own default."""

    check_id: str = "all"
    threshold: Fraction = DEFAULT_THRESHOLD
    max_depth: int | None = None
    max_boxes: int | None = None
    grid_step: Fraction | None = None
    samples: int | None = None
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        for name in ("max_depth", "max_boxes", "samples", "workers"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.grid_step is not None and self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    def echo(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = str(v) if isinstance(v, Fraction) else v
        return out


def decimal_down(x: Fraction, digits: int = 20) -> str:
    """Display value with ``digits`` significant digits, rounded toward zero."""
    ctx = Context(prec=digits, rounding=ROUND_DOWN)
    return str(ctx.divide(Decimal(x.numerator), Decimal(x.denominator)))


def rational_record(x: Fraction | None) -> dict | None:
    if x is None:
        return None
    return {"rational": str(x), "decimal": decimal_down(x)}


def point_record(pt) -> list[str]:
    return [str(v) for v in pt]


@dataclass
class CheckOutcome:
    status: str
    details: dict = field(default_factory=dict)
    discovered: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)  # (label, CertificateResult)
    lower_bound: Fraction | None = None


# -- randomized forms ---------------------------------------------------------

def random_rational(rng: random.Random, size: int = 9) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, size))


def random_polynomial(rng: random.Random, max_terms: int = 3, max_degree: int = 3) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exp = [0] * NVARS
        for _ in range(rng.randint(0, max_degree)):
            exp[rng.randrange(NVARS)] += 1
        terms[tuple(exp)] = random_rational(rng)
    return Polynomial(terms)


def random_form(rng: random.Random, degree: int, max_terms: int = 2) -> DiffForm:
    idx = all_multi_indices(degree)
    chosen = rng.sample(idx, min(len(idx), rng.randint(1, max_terms)))
    return DiffForm(degree, {I: random_polynomial(rng) for I in chosen})


def random_matrix(rng: random.Random, size: int = 3) -> list[list[Fraction]]:
    return [[Fraction(rng.randint(-size, size), rng.randint(1, 2)) if rng.random() < 0.4 else Fraction(0)
             for _ in range(NVARS)] for _ in range(NVARS)]


def matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(NVARS)), Fraction(0)) for j in range(NVARS)]
            for i in range(NVARS)]


def exterior_property_failures(rng: random.Random) -> dict[str, bool]:
    """One randomized trial of every exterior-calculus identity; True marks a failure."""
    a_deg = rng.randint(0, 4)
    b_deg = rng.randint(0, 5 - a_deg)
    a, b = random_form(rng, a_deg), random_form(rng, b_deg)
    sign = -1 if (a_deg * b_deg) % 2 else 1
    fails = {}
    fails["graded_anticommutativity"] = wedge(a, b) != wedge(b, a) * sign
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) + wedge(a, ext_d(b)) * (-1 if a_deg % 2 else 1)
    fails["leibniz"] = lhs != rhs
    fails["d_squared_zero"] = not ext_d(ext_d(a)).is_zero()
    k = rng.randint(0, 6)
    c = random_form(rng, k)
    fails["star_star_sign_rule"] = hodge_star(hodge_star(c)) != c * star_star_sign(k)
    five = random_form(rng, 5, max_terms=3)
    vol = wedge(five, hodge_star(five)).coeff(tuple(range(NVARS)))
    fails["beta_star_beta_norm"] = vol != sum((k * k for _, k in five.items()), Polynomial.zero())
    M, N = random_matrix(rng), random_matrix(rng)
    small = random_form(rng, rng.randint(0, 2))
    fails["pullback_functorial"] = (pullback_linear(pullback_linear(small, M), N)
                                    != pullback_linear(small, matmul(M, N)))
    other = random_form(rng, rng.randint(0, 2))
    fails["pullback_wedge"] = (pullback_linear(wedge(small, other), M)
                               != wedge(pullback_linear(small, M), pullback_linear(other, M)))
    fails["pullback_d"] = pullback_linear(ext_d(small), M) != ext_d(pullback_linear(small, M))
    return fails


def star_star_sign(k: int) -> int:
    """``** = (-1)^(k(6-k))`` on k-forms: +1 in even degree, -1 in odd degree."""
    return -1 if (k * (NVARS - k)) % 2 else 1


def beta_norm_identity(beta: DiffForm) -> bool:
    vol = wedge(beta, hodge_star(beta)).coeff(tuple(range(NVARS)))
    return vol == sum((k * k for _, k in beta.items()), Polynomial.zero())


# -- the checks -----------------------------------------------------------------

def check_axioms(cfg: CheckConfig) -> CheckOutcome:
    n = cfg.samples or 200
    rng = random.Random(cfg.seed)
    counts: dict[str, int] = {}
    first_failure = None
    for trial in range(n):
        for name, failed in exterior_property_failures(rng).items():
            counts.setdefault(name, 0)
            if failed:
                counts[name] += 1
                first_failure = first_failure or {"trial": trial, "property": name}
    c = build_all()
    bridge = beta_norm_identity(c.beta)
    ok = not any(counts.values()) and bridge
    return CheckOutcome(
        status=PASS if ok else FAIL,
        details={"trials": n, "failures_by_property": counts, "first_failure": first_failure,
                 "beta_wedge_star_beta_equals_norm_squared_vol": bridge},
    )


def check_torus_exact(cfg: CheckConfig) -> CheckOutcome:
    n = cfg.samples or 100
    c = build_all()
    anchors = {str(u): str(c.p.evaluate([u, 0, 0, 0, 0, 0])) for u in (0, 1, 3)}
    anchors_ok = anchors == {"0": "1", "1": "0", "3": "-1"}
    zeros = 0
    offending = None
    for pt in sample_torus_points(n, cfg.seed):
        on_torus = all(pt[a] ** 2 + pt[3 + a] ** 2 == 1 for a in range(3))
        if on_torus and not c.psi.evaluate(pt):
            zeros += 1
        elif offending is None:
            offending = point_record(pt)
    ok = anchors_ok and zeros == n
    return CheckOutcome(
        status=PASS if ok else FAIL,
        details={"samples": n, "exact_zeros": f"{zeros}/{n}", "p_anchor_values": anchors,
                 "offending_point": offending},
    )


def check_invariance(cfg: CheckConfig) -> CheckOutcome:
    n = cfg.samples or 20
    c = build_all()
    rng = random.Random(cfg.seed)
    results = {"psi": 0, "h": 0, "beta": 0}
    offending = None
    for _ in range(n):
        ts = [random_rational(rng, 20) for _ in range(3)]
        M = block_rotation(ts)
        h_pulled = pullback_linear(DiffForm.function(c.h), M).coeff(())
        same = {
            "psi": pullback_linear(c.psi, M) == c.psi,
            "h": h_pulled == c.h,
            "beta": pullback_linear(c.beta, M) == c.beta,
        }
        for k, v in same.items():
            results[k] += v
        if not all(same.values()) and offending is None:
            offending = {"rotation_parameters": point_record(ts), "invariant": same}
    ok = all(v == n for v in results.values())
    return CheckOutcome(
        status=PASS if ok else FAIL,
        details={"rotations": n, "exact_invariant": {k: f"{v}/{n}" for k, v in results.items()},
                 "offending": offending},
    )


def check_reduction(cfg: CheckConfig) -> CheckOutcome:
    n = cfg.samples or 1000
    c = build_all()
    r = reduced_system(c)
    agree = 0
    pattern_agree = 0
    sos_agree = 0
    simultaneous = 0
    offending = None
    paired = {p["component"]: p["paired_stated"] for p in r.relation["pairs"]}
    names = ("dx1", "dx2", "dx3", "dy1", "dy2", "dy3")
    for pt in sample_reduced_sphere_points(n, cfg.seed):
        chi_vals = [k.evaluate(pt) for k in r.chi_y0]
        stated_vals = [s.evaluate(pt) for s in r.stated_polys]
        chi_zero = all(v == 0 for v in chi_vals)
        stated_zero = all(v == 0 for v in stated_vals)
        sos_zero = r.sum_sq_reduced.evaluate(pt) == 0
        simultaneous += stated_zero
        agree += chi_zero == stated_zero
        sos_agree += sos_zero == stated_zero
        pattern = all((chi_vals[i] == 0) == (stated_vals[j] == 0)
                      for i, name in enumerate(names)
                      if (j := paired.get(name)) is not None)
        pattern_agree += pattern
        if (chi_zero != stated_zero or not pattern) and offending is None:
            offending = point_record(pt[:3])
    ok = agree == n and sos_agree == n
    return CheckOutcome(
        status=PASS if ok else FAIL,
        details={"samples": n, "simultaneous_zero_agreement": f"{agree}/{n}",
                 "sum_of_squares_agreement": f"{sos_agree}/{n}",
                 "per_component_agreement": f"{pattern_agree}/{n}",
                 "sampled_simultaneous_zeros": simultaneous,
                 "offending_point": offending},
        discovered={"chi_y0_vs_stated_polynomials": r.relation},
    )


def check_rank4(cfg: CheckConfig) -> CheckOutcome:
    n = cfg.samples or 100
    c = build_all()
    rng = random.Random(cfg.seed)
    good = 0
    offending = None
    ranks: dict[int, int] = {}
    rotated_same = 0
    rotated_checked = 0
    for k, pt in enumerate([ANCHOR] + sample_sphere_points(n - 1, cfg.seed) if n > 1 else [ANCHOR]):
        rk = rank4_at(c, pt)
        ranks[rk] = ranks.get(rk, 0) + 1
        if rk == 4:
            good += 1
        elif offending is None:
            offending = {"point": point_record(pt), "rank": rk}
        if k < 10:
            M = block_rotation([random_rational(rng, 20) for _ in range(3)])
            rotated_checked += 1
            rotated_same += rank4_at(c, apply_matrix(M, pt)) == rk
    ok = good == n and rotated_same == rotated_checked
    return CheckOutcome(
        status=PASS if ok else FAIL,
        details={"samples": n, "rank_four": f"{good}/{n}",
                 "rank_histogram": {str(k): v for k, v in sorted(ranks.items())},
                 "rotation_rank_agreement": f"{rotated_same}/{rotated_checked}",
                 "scope": "exact rank at sampled rational points of the sphere",
                 "offending": offending},
    )


def _certified_with_oracle(cfg: CheckConfig, label: str, p: Polynomial, box, cons, default_boxes: int,
                           default_step: Fraction) -> CheckOutcome:
    res = bb_lower_bound(p, box, cons, cfg.threshold, max_depth=cfg.max_depth or 40,
                         max_boxes=cfg.max_boxes or default_boxes, workers=cfg.workers)
    step = cfg.grid_step or default_step
    grid = grid_oracle_min(p, box, cons, step)
    bound = res.certified_lower_bound
    oracle_ok = (not grid.empty and bound is not None and grid.value >= bound)
    if res.status == CERTIFIED:
        status = PASS if oracle_ok else FAIL
    elif not grid.empty and grid.value < cfg.threshold:
        status = FAIL  # a feasible grid node already violates the target
    else:
        status = INCONCLUSIVE
    return CheckOutcome(
        status=status,
        details={"branch_and_bound": res.summary(), "grid_step": str(step),
                 "grid_nodes": grid.nodes, "grid_feasible_nodes": grid.feasible_nodes,
                 "oracle_not_below_certified_bound": oracle_ok},
        discovered={
            "grid_minimum": rational_record(grid.value),
            "grid_minimizer": None if grid.empty else point_record(grid.point),
            "reference_bound": rational_record(REFERENCE_Q_BOUND),
            "grid_minimum_at_least_reference": (not grid.empty and grid.value >= REFERENCE_Q_BOUND),
        },
        certificates=[(label, res)],
        lower_bound=bound,
    )


def check_q_simplex(cfg: CheckConfig) -> CheckOutcome:
    r = reduced_system(build_all())
    box = make_box([(0, 3), (0, 3)])
    cons = (Constraint(X1 + X2 - 3, LE),)
    return _certified_with_oracle(cfg, "q-simplex", r.Q_simplex_2d, box, cons, 100_000, Fraction(1, 100))


def check_q_ball(cfg: CheckConfig) -> CheckOutcome:
    c = build_all()
    box = make_box([(-3, 3)] * 3)
    cons = (Constraint(X1 ** 2 + X2 ** 2 + X3 ** 2 - 9, LE),)
    return _certified_with_oracle(cfg, "q-ball", c.Q, box, cons, 400_000, Fraction(1, 10))


def slice_objective(sum_sq: Polynomial, zero_var: int) -> Polynomial:
    """``sum_sq`` on the slice ``x_i = 0``, with the other two x variables moved to slots 0, 1."""
    rest = [v for v in range(3) if v != zero_var]
    return sum_sq.subst(zero_var, 0).rename({rest[0]: 0, rest[1]: 1})


def check_coordinate_slices(cfg: CheckConfig) -> CheckOutcome:
    r = reduced_system(build_all())
    box = make_box([(-2, 2), (-2, 2)])
    circle = (Constraint(X1 ** 2 + X2 ** 2 - 3, EQ),)
    certs = []
    per_slice = {}
    bounds = []
    all_certified = True
    refuted = False
    for i in range(3):
        p = slice_objective(r.sum_sq_reduced, i)
        res = bb_lower_bound(p, box, circle, cfg.threshold, max_depth=cfg.max_depth or 40,
                             max_boxes=cfg.max_boxes or 100_000, workers=cfg.workers)
        grid = grid_oracle_min(p, box, circle, cfg.grid_step or Fraction(1, 50))
        label = f"slice-x{i + 1}"
        certs.append((label, res))
        per_slice[label] = {**res.summary(), "grid_minimum": rational_record(grid.value)}
        all_certified = all_certified and res.status == CERTIFIED
        refuted = refuted or (not grid.empty and grid.value < cfg.threshold and res.status != CERTIFIED)
        if res.certified_lower_bound is not None:
            bounds.append(res.certified_lower_bound)
    status = PASS if all_certified else FAIL if refuted else INCONCLUSIVE
    return CheckOutcome(status=status, details={"slices": per_slice}, certificates=certs,
                        lower_bound=min(bounds) if len(bounds) == 3 else None)


def check_claim1_full(cfg: CheckConfig) -> CheckOutcome:
    c = build_all()
    r = reduced_system(c)
    norm_sq = sum((k * k for _, k in c.beta.items()), Polynomial.zero())
    box = make_box([(-2, 2)] * NVARS)
    sphere = (Constraint(c.h * 2 - 3, EQ),)
    res = bb_lower_bound(norm_sq, box, sphere, cfg.threshold, max_depth=cfg.max_depth or 40,
                         max_boxes=cfg.max_boxes or 256, workers=cfg.workers)
    probe = common_zero_probe(r.chi_y0)
    discovered = {"common_zero_probe": probe}
    if probe["status"] == "common-zero-found":
        status = FAIL
        discovered["refutation"] = (
            "chi (hence beta = dh^dpsi^dpsi) vanishes at a real point of the sphere h = 3/2: "
            "all dx components of chi vanish identically at y = 0 and every dy component "
            "carries a factor that vanishes at the bracketed root")
        discovered["beta_norm_sq_near_witness"] = _norm_near_witness(norm_sq, c.h, probe["findings"][0])
    elif res.status == CERTIFIED:
        status = PASS
    else:
        status = INCONCLUSIVE
    return CheckOutcome(status=status, details={"branch_and_bound": res.summary()},
                        discovered=discovered, certificates=[("claim1-full", res)],
                        lower_bound=res.certified_lower_bound)


def _norm_near_witness(norm_sq: Polynomial, h: Polynomial, finding: dict) -> dict:
    """Exact |beta|^2 and h at a rational point within ~1e-15 of the witness (display only)."""
    import math

    t = (Fraction(finding["t_bracket"][0]) + Fraction(finding["t_bracket"][1])) / 2
    line = finding["line"]
    big = int(line.split(", u")[1][0]) - 1
    pt = [Fraction(0)] * NVARS
    for a in range(3):
        u = 3 - 2 * t if a == big else t
        pt[a] = Fraction(math.sqrt(float(u))).limit_denominator(10 ** 15)
    return {"point_x": [decimal_down(v) for v in pt[:3]],
            "h_minus_3/2": float(h.evaluate(pt) - SPHERE_LEVEL),
            "beta_norm_sq": float(norm_sq.evaluate(pt))}


@dataclass(frozen=True)
class CheckEntry:
    check_id: str
    claim: str
    run: Callable[[CheckConfig], CheckOutcome]


REGISTRY: dict[str, CheckEntry] = {
    entry.check_id: entry
    for entry in (
        CheckEntry("axioms", "exterior calculus identities; beta ^ *beta = |beta|^2 vol (nondegeneracy bridge)",
                  check_axioms),
        CheckEntry("torus-exact", "psi vanishes identically on the torus T; p(0)=1, p(1)=0, p(3)=-1",
                  check_torus_exact),
        CheckEntry("invariance", "psi, h and beta are invariant under the torus action", check_invariance),
        CheckEntry("reduction", "chi at y=0 versus the three stated polynomials", check_reduction),
        CheckEntry("rank4", "pullback of dpsi to the sphere has rank four", check_rank4),
        CheckEntry("q-simplex", "Q has a positive minimum on the simplex", check_q_simplex),
        CheckEntry("q-ball", "Q is bounded below on the ball of radius 3", check_q_ball),
        CheckEntry("coordinate-slices", "no simultaneous zeros with some x_i = 0", check_coordinate_slices),
        CheckEntry("claim1-full", "dh ^ dpsi ^ dpsi has rank five (is nonzero) on the sphere", check_claim1_full),
    )
}

CHECK_IDS = tuple(REGISTRY)


def run_check(check_id: str, cfg: CheckConfig) -> dict:
    if check_id not in REGISTRY:
        raise KeyError(f"unknown check id {check_id!r}; choose from: {', '.join(CHECK_IDS)} or all")
    entry = REGISTRY[check_id]
    start = time.perf_counter()
    outcome = entry.run(replace(cfg, check_id=check_id))
    elapsed = int((time.perf_counter() - start) * 1000)
    boxes = sum(res.boxes_processed for _, res in outcome.certificates)
    depth = max((res.max_depth_reached for _, res in outcome.certificates), default=0)
    record = {
        "check_id": check_id,
        "claim": entry.claim,
        "status": outcome.status,
        "certified_lower_bound": rational_record(outcome.lower_bound),
        "discovered_constants": outcome.discovered,
        "boxes_processed": boxes,
        "depth": depth,
        "details": outcome.details,
        "wall_time_ms": elapsed,
    }
    record["_certificates"] = outcome.certificates
    return record
