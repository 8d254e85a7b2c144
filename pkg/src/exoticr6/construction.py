"""The symplectic potential on R^6 and everything derived from it.

All objects are built exactly: the quadratic ``h``, the twisted one-forms
``psi_a``, the five-form ``beta = dh ^ dpsi ^ dpsi`` and its Hodge dual ``chi``,
together with the two-variable polynomial ``q``, the sum of squares ``Q`` and
the rational samplers used to probe the torus and the sphere ``h = 3/2``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .algebra import NVARS, X1, X2, X3, Y1, Y2, Y3, Polynomial, Scalar, as_rational
from .forms import (
    DiffForm,
    eval_two_form,
    ext_d,
    hodge_star,
    one_form,
    rank_exact,
    restrict_two_form,
    subst_coeffs_y0,
    tangent_basis,
    wedge,
)

XS = (X1, X2, X3)
YS = (Y1, Y2, Y3)

P_COEFFS = (Fraction(1), Fraction(-7, 6), Fraction(1, 6))
SPHERE_LEVEL = Fraction(3, 2)
ANCHOR = (Fraction(1),) * 3 + (Fraction(0),) * 3
REFERENCE_Q_BOUND = Fraction(7, 1000)


def p_poly(arg: Polynomial) -> Polynomial:
    """``p(arg) = 1 - 7 arg / 6 + arg^2 / 6``."""
    c0, c1, c2 = P_COEFFS
    return c0 + arg * c1 + arg * arg * c2


def q_poly(a: Polynomial, b: Polynomial) -> Polynomial:
    """The two-slot polynomial ``q`` evaluated on polynomial arguments."""
    return (2 - (a + b) * Fraction(14, 3) + a * b * Fraction(205, 18) + a * a + b * b
            - (a * a * b - a * b * b) * Fraction(7, 3))


@dataclass(frozen=True)
class ConstructionSet:
    h: Polynomial
    p: Polynomial  # univariate, in slot x1
    psi_a: tuple
    psi: DiffForm
    dh: DiffForm
    dpsi: DiffForm
    beta: DiffForm
    chi: DiffForm
    q: Polynomial  # slots (x1, x2)
    Q: Polynomial  # slots (x1, x2, x3)
    p_coeffs: tuple = P_COEFFS


@dataclass(frozen=True)
class ReducedSystem:
    chi_y0: tuple  # six coefficient polynomials of chi with y := 0, order dx1..dy3
    stated_polys: tuple  # x3 q(x1^2,x2^2), x1 q(x2^2,x3^2), x2 q(x3^2,x1^2)
    sum_sq_reduced: Polynomial
    Q_simplex_2d: Polynomial  # Q with x3 := 3 - x1 - x2
    relation: dict = field(default_factory=dict)


@lru_cache(maxsize=1)
def build_all() -> ConstructionSet:
    h = sum((v * v for v in XS + YS), Polynomial.zero()) * Fraction(1, 2)
    psi_a = []
    for a in range(3):
        x, y = XS[a], YS[a]
        coef = p_poly(x * x + y * y) * Fraction(1, 2)
        comps = [Polynomial.zero()] * NVARS
        comps[a] = -(coef * y)
        comps[3 + a] = coef * x
        psi_a.append(one_form(comps))
    psi = psi_a[0] + psi_a[1] + psi_a[2]
    dh = ext_d(DiffForm.function(h))
    dpsi = ext_d(psi)
    beta = wedge(dh, wedge(dpsi, dpsi))
    chi = hodge_star(beta)
    q = q_poly(X1, X2)
    Q = q_poly(X1, X2) ** 2 + q_poly(X2, X3) ** 2 + q_poly(X3, X1) ** 2
    return ConstructionSet(h=h, p=p_poly(X1), psi_a=tuple(psi_a), psi=psi, dh=dh, dpsi=dpsi,
                           beta=beta, chi=chi, q=q, Q=Q)


def stated_polynomials() -> tuple:
    sq = [x * x for x in XS]
    return (X3 * q_poly(sq[0], sq[1]), X1 * q_poly(sq[1], sq[2]), X2 * q_poly(sq[2], sq[0]))


def reduced_system(c: ConstructionSet) -> ReducedSystem:
    chi0 = subst_coeffs_y0(c.chi)
    coeffs = tuple(chi0.coeff((i,)) for i in range(NVARS))
    stated = stated_polynomials()
    sum_sq = sum((k * k for k in coeffs), Polynomial.zero())
    q2d = c.Q.subst(2, 3 - X1 - X2)
    return ReducedSystem(chi_y0=coeffs, stated_polys=stated, sum_sq_reduced=sum_sq,
                         Q_simplex_2d=q2d, relation=discover_relation(coeffs, stated))


# -- relation between chi|_{y=0} and the stated polynomials --------------------

def proportionality(a: Polynomial, b: Polynomial) -> Fraction | None:
    """``lam`` with ``a == lam * b`` exactly, or None."""
    if b.is_zero():
        return Fraction(0) if a.is_zero() else None
    e, cb = next(b.items())
    lam = a.terms.get(e, Fraction(0)) / cb
    return lam if a == b * lam else None


def odd_part(p: Polynomial) -> tuple | None:
    """Common exponent parity vector of all terms, or None if it differs between terms."""
    parities = {tuple(k % 2 for k in e) for e, _ in p.items()}
    return parities.pop() if len(parities) == 1 else None


def squared_core(p: Polynomial) -> tuple[tuple, Polynomial] | None:
    """Write ``p = x^m * G(x1^2, ..., y3^2)``; return ``(m, G)`` with G in the squared variables."""
    m = odd_part(p)
    if m is None:
        return None
    return m, Polynomial({tuple((k - mi) // 2 for k, mi in zip(e, m)): c for e, c in p.items()})


def discover_relation(chi_y0: Sequence[Polynomial], stated: Sequence[Polynomial]) -> dict:
    """Exact comparison of the surviving chi coefficients with the stated polynomials.

    Each coefficient is paired with the stated polynomial carrying the same
    odd monomial factor; the record says whether every pair is a single
    common rational multiple and, if not, how the squared cores differ.
    """
    names = ("dx1", "dx2", "dx3", "dy1", "dy2", "dy3")
    zero_components = [names[i] for i, k in enumerate(chi_y0) if k.is_zero()]
    stated_by_factor = {}
    for j, s in enumerate(stated):
        sc = squared_core(s)
        if sc is not None:
            stated_by_factor[sc[0]] = (j, sc[1])
    pairs = []
    constants = set()
    for i, k in enumerate(chi_y0):
        if k.is_zero():
            continue
        kc = squared_core(k)
        entry = {"component": names[i], "paired_stated": None, "constant": None}
        if kc is not None and kc[0] in stated_by_factor:
            j, s_core = stated_by_factor[kc[0]]
            lam = proportionality(k, stated[j])
            entry["paired_stated"] = j
            entry["constant"] = None if lam is None else str(lam)
            entry["core"] = kc[1].serialize()
            entry["stated_core"] = s_core.serialize()
            if lam is None:
                norm = kc[1].constant_term() / s_core.constant_term() if s_core.constant_term() else Fraction(1)
                entry["normalizer"] = str(norm)
                entry["core_minus_normalized_stated"] = (kc[1] - s_core * norm).serialize()
            constants.add(lam)
        else:
            constants.add(None)
        pairs.append(entry)
    single = len(constants) == 1 and None not in constants
    return {
        "identically_zero_components": zero_components,
        "pairs": pairs,
        "kind": "single-constant" if single else "not-proportional",
        "constant": str(next(iter(constants))) if single else None,
        "core_variables": "u_a = x_a^2 (written in slots x1..x3)",
    }


# -- common zeros of the reduced system on the symmetric lines of the simplex ----

def _uni_coeffs(p: Polynomial) -> list[Fraction]:
    if any(any(e[1:]) for e, _ in p.items()):
        raise ValueError("not univariate in x1")
    out = [Fraction(0)] * (p.degree() + 1 if not p.is_zero() else 0)
    for e, c in p.items():
        out[e[0]] = c
    return out


def _uni_trim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _uni_rem(a: list, b: list) -> list:
    a = _uni_trim(a)
    while len(a) >= len(b):
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] -= f * bc
        a = _uni_trim(a)
    return a


def uni_gcd(a: list, b: list) -> list:
    a, b = _uni_trim(a), _uni_trim(b)
    while b:
        a, b = b, _uni_rem(a, b)
    if not a:
        return a
    return [c / a[-1] for c in a]


def uni_eval(a: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * t + c
    return acc


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def common_zero_probe(chi_y0: Sequence[Polynomial], total: Fraction = Fraction(3),
                      scan: int = 96, bracket_bits: int = 48) -> dict:
    """Search the symmetric lines ``u_j = u_k = t`` of the simplex for a common zero.

    Works in squared variables ``u_a = x_a^2`` on ``u_1 + u_2 + u_3 = total``.
    A sign change of the gcd of the restricted cores on a rational bracket
    proves (intermediate value theorem) that all coefficients of chi vanish at
    a real point of the sphere with ``y = 0``.
    """
    cores = []
    for k in chi_y0:
        if k.is_zero():
            continue
        sc = squared_core(k)
        if sc is None:
            return {"status": "unsupported", "reason": "coefficient is not x^m * G(x^2)"}
        cores.append(sc[1])
    t = X1
    findings = []
    for i in range(3):
        j, k = [a for a in range(3) if a != i]
        reps = [Polynomial.zero()] * NVARS
        reps[i] = total - t * 2
        reps[j] = t
        reps[k] = t
        restricted = [_uni_coeffs(g.compose(reps)) for g in cores]
        g = restricted[0]
        for r in restricted[1:]:
            g = uni_gcd(g, r)
        if len(_uni_trim(g)) <= 1:
            continue
        hi_t = total / 2
        grid = [hi_t * n / scan for n in range(scan + 1)]
        for a, b in zip(grid, grid[1:]):
            va, vb = uni_eval(g, a), uni_eval(g, b)
            if va == 0 or _sign(va) * _sign(vb) < 0:
                lo, hi = (a, a) if va == 0 else (a, b)
                for _ in range(bracket_bits):
                    if lo == hi:
                        break
                    mid = (lo + hi) / 2
                    vm = uni_eval(g, mid)
                    if vm == 0:
                        lo = hi = mid
                    elif _sign(vm) == _sign(uni_eval(g, lo)):
                        lo = mid
                    else:
                        hi = mid
                findings.append({
                    "line": f"u{j + 1} = u{k + 1} = t, u{i + 1} = {total} - 2t",
                    "gcd": Polynomial({(n, 0, 0, 0, 0, 0): c for n, c in enumerate(g)}).serialize().replace("x1", "t"),
                    "t_bracket": [str(lo), str(hi)],
                    "t_bracket_decimal": [float(lo), float(hi)],
                    "witness": (f"y = 0, x{i + 1}^2 = {total} - 2t, x{j + 1}^2 = x{k + 1}^2 = t "
                                f"for the root t of the gcd in the bracket"),
                })
                break
    return {"status": "common-zero-found" if findings else "none-found", "findings": findings}


# -- samplers ----------------------------------------------------------------

def _rand_rational(rng: random.Random, size: int = 20) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, size))


def circle_point(t: Scalar) -> tuple[Fraction, Fraction]:
    t = as_rational(t)
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def torus_point(ts: Sequence[Scalar]) -> tuple:
    pts = [circle_point(t) for t in ts]
    return tuple(p[0] for p in pts) + tuple(p[1] for p in pts)


def sample_torus_points(n: int, seed: int) -> list[tuple]:
    if n < 1:
        raise ValueError("need at least one sample")
    rng = random.Random(seed)
    return [torus_point([_rand_rational(rng) for _ in range(3)]) for _ in range(n)]


def stereographic_point(base: Sequence[Scalar], v: Sequence[Scalar]) -> tuple:
    """Second intersection of the line from ``base`` through ``v`` (projected to base-perp) with the sphere |z| = |base|."""
    N = [as_rational(a) for a in base]
    w = [as_rational(a) for a in v]
    nn = sum(a * a for a in N)
    proj = sum(a * b for a, b in zip(N, w)) / nn
    w = [a - proj * b for a, b in zip(w, N)]
    lam = 2 * nn / (sum(a * a for a in w) + nn)
    return tuple(b + lam * (a - b) for a, b in zip(w, N))


def sample_sphere(base: Sequence[Scalar], n: int, seed: int) -> list[tuple]:
    if n < 1:
        raise ValueError("need at least one sample")
    rng = random.Random(seed)
    return [stereographic_point(base, [_rand_rational(rng) for _ in base]) for _ in range(n)]


def sample_sphere_points(n: int, seed: int) -> list[tuple]:
    """Rational points with h = 3/2, projected from the anchor (1,1,1,0,0,0)."""
    return sample_sphere(ANCHOR, n, seed)


def sample_reduced_sphere_points(n: int, seed: int) -> list[tuple]:
    """Rational points of x1^2 + x2^2 + x3^2 = 3 with y = 0, as 6-tuples."""
    return [p + (Fraction(0),) * 3 for p in sample_sphere(ANCHOR[:3], n, seed)]


def block_rotation(ts: Sequence[Scalar]) -> list[list[Fraction]]:
    """Rotation by the Pythagorean angle of ``ts[a]`` in each (x_a, y_a) plane."""
    M = [[Fraction(0)] * NVARS for _ in range(NVARS)]
    for a, t in enumerate(ts):
        c, s = circle_point(t)
        M[a][a], M[a][3 + a] = c, -s
        M[3 + a][a], M[3 + a][3 + a] = s, c
    return M


def apply_matrix(M: Sequence[Sequence[Fraction]], point: Sequence[Scalar]) -> tuple:
    pt = [as_rational(v) for v in point]
    return tuple(sum((M[i][j] * pt[j] for j in range(NVARS)), Fraction(0)) for i in range(NVARS))


def rank4_at(c: ConstructionSet, point: Sequence[Scalar]) -> int:
    """Rank of dpsi restricted to the tangent space of the sphere at ``point``."""
    point = tuple(as_rational(v) for v in point)
    if c.h.evaluate(point) != SPHERE_LEVEL:
        raise ValueError(f"point is not on the sphere h = 3/2: {[str(v) for v in point]}")
    M = eval_two_form(c.dpsi, point)
    # grad h = point
    return rank_exact(restrict_two_form(M, tangent_basis(point), normal=point).entries)


# -- golden artifacts ----------------------------------------------------------

GOLDEN_NAMES = ("psi", "dpsi", "beta", "chi", "sum_sq_reduced", "Q", "Q_simplex_2d")


def golden_artifacts(c: ConstructionSet | None = None, r: ReducedSystem | None = None) -> dict[str, str]:
    c = c or build_all()
    r = r or reduced_system(c)
    return {
        "psi": c.psi.serialize(),
        "dpsi": c.dpsi.serialize(),
        "beta": c.beta.serialize(),
        "chi": c.chi.serialize(),
        "sum_sq_reduced": r.sum_sq_reduced.serialize(),
        "Q": c.Q.serialize(),
        "Q_simplex_2d": r.Q_simplex_2d.serialize(),
    }


def write_golden(directory) -> list:
    from pathlib import Path

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in golden_artifacts().items():
        path = out / f"{name}.txt"
        path.write_text(text + "\n", encoding="utf-8")
        written.append(path)
    return written
