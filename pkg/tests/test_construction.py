import math
from fractions import Fraction
from itertools import combinations, permutations
from pathlib import Path

import pytest
import sympy
from sympy.combinatorics import Permutation

from exoticr6.algebra import X1, X2, X3, Polynomial
from exoticr6.construction import (
    ANCHOR,
    GOLDEN_NAMES,
    apply_matrix,
    block_rotation,
    build_all,
    common_zero_probe,
    golden_artifacts,
    proportionality,
    rank4_at,
    reduced_system,
    sample_reduced_sphere_points,
    sample_sphere_points,
    sample_torus_points,
    stereographic_point,
    torus_point,
)
from exoticr6.forms import hodge_star, pullback_linear, wedge

GOLDEN = Path(__file__).parent / "golden"
SYMS = sympy.symbols("x1 x2 x3 y1 y2 y3")


@pytest.fixture(scope="module")
def cs():
    return build_all()


@pytest.fixture(scope="module")
def rs(cs):
    return reduced_system(cs)


def to_sympy(p: Polynomial):
    return sympy.sympify(p.serialize().replace("^", "**"), locals=dict(zip(map(str, SYMS), SYMS)))


def test_p_anchor_values(cs):
    assert [cs.p.evaluate([u, 0, 0, 0, 0, 0]) for u in (0, 1, 3)] == [1, 0, -1]


def test_q_and_Q_values(cs):
    assert cs.q.evaluate([0] * 6) == 2
    # hand evaluation: 2 - 28/3 + 205/18 + 2 + 0
    assert cs.q.evaluate([1, 1, 0, 0, 0, 0]) == Fraction(109, 18)
    assert cs.Q.evaluate([1, 1, 1, 0, 0, 0]) == Fraction(11881, 108) == 3 * Fraction(109, 18) ** 2


def test_structure_invariants(cs):
    assert cs.psi == cs.psi_a[0] + cs.psi_a[1] + cs.psi_a[2]
    assert cs.beta.degree == 5 and cs.chi.degree == 1
    assert cs.chi == hodge_star(cs.beta)
    assert cs.beta == wedge(cs.dh, wedge(cs.dpsi, cs.dpsi))


def test_beta_and_chi_against_independent_sympy_oracle(cs):
    """beta_J = (1/4) sum_sigma sgn(sigma) a_{J s1} W_{J s2, J s3} W_{J s4, J s5} with sympy ψ."""
    xs, ys = SYMS[:3], SYMS[3:]
    psi = [0] * 6
    for a in range(3):
        u = xs[a] ** 2 + ys[a] ** 2
        c = sympy.Rational(1, 2) * (1 - sympy.Rational(7, 6) * u + sympy.Rational(1, 6) * u ** 2)
        psi[a] += -c * ys[a]
        psi[3 + a] += c * xs[a]
    W = [[sympy.diff(psi[j], SYMS[i]) - sympy.diff(psi[i], SYMS[j]) for j in range(6)] for i in range(6)]
    grad_h = list(SYMS)
    for J in combinations(range(6), 5):
        total = 0
        for perm in permutations(range(5)):
            s = Permutation(list(perm)).signature()
            j = [J[k] for k in perm]
            total += s * grad_h[j[0]] * W[j[1]][j[2]] * W[j[3]][j[4]]
        oracle = sympy.expand(total / 4)
        assert sympy.expand(to_sympy(cs.beta.coeff(J)) - oracle) == 0
        (missing,) = set(range(6)) - set(J)
        sign = Permutation(list(J) + [missing]).signature()
        assert sympy.expand(to_sympy(cs.chi.coeff((missing,))) - sign * oracle) == 0


def test_chi_y0_factorization_against_sympy(rs):
    x1, x2, x3 = SYMS[:3]
    r = lambda u: 3 * u ** 2 - 14 * u + 6  # noqa: E731
    expected = {3: -x1 * r(x2 ** 2) * r(x3 ** 2) / 18,
                4: -x2 * r(x1 ** 2) * r(x3 ** 2) / 18,
                5: -x3 * r(x1 ** 2) * r(x2 ** 2) / 18}
    for i in range(6):
        got = to_sympy(rs.chi_y0[i])
        assert sympy.expand(got - expected.get(i, 0)) == 0


def test_relation_is_discovered_not_assumed(rs):
    rel = rs.relation
    assert rel["identically_zero_components"] == ["dx1", "dx2", "dx3"]
    assert rel["kind"] == "not-proportional"
    assert [p["paired_stated"] for p in rel["pairs"]] == [1, 2, 0]
    for pair in rel["pairs"]:
        assert pair["constant"] is None
        assert pair["normalizer"] == "-1"


def test_proportionality():
    assert proportionality(X1 * 3, X1) == 3
    assert proportionality(X1 + 1, X1) is None
    assert proportionality(Polynomial.zero(), Polynomial.zero()) == 0


def test_reduced_system_examples(rs):
    for s in rs.stated_polys:
        assert s.evaluate([1, 1, 1, 0, 0, 0]) == Fraction(109, 18)
    assert rs.stated_polys[1].evaluate([0, 2, Fraction(1, 3), 0, 0, 0]) == 0
    assert rs.sum_sq_reduced.evaluate(ANCHOR) > 0


def test_Q_cyclic_symmetry(cs):
    cyc = cs.Q.compose([X2, X3, X1, 0, 0, 0])
    assert cyc == cs.Q


def test_torus_sampler():
    assert torus_point([0, 0, 0]) == ANCHOR
    assert torus_point([1, 0, 0]) == (0, 1, 1, 1, 0, 0)
    pt = torus_point([Fraction(1, 2), 0, 0])
    assert pt[0] == Fraction(3, 5) and pt[3] == Fraction(4, 5)
    pts = sample_torus_points(50, seed=4)
    assert pts == sample_torus_points(50, seed=4)
    assert pts != sample_torus_points(50, seed=5)
    for p in pts:
        assert all(p[a] ** 2 + p[3 + a] ** 2 == 1 for a in range(3))
    with pytest.raises(ValueError):
        sample_torus_points(0, 1)


def test_psi_vanishes_on_torus_samples(cs):
    for p in sample_torus_points(40, seed=9):
        assert cs.psi.evaluate(p) == {}


def test_sphere_sampler(cs):
    assert cs.h.evaluate(ANCHOR) == Fraction(3, 2)
    antipode = stereographic_point(ANCHOR, [0] * 6)
    assert antipode == (-1, -1, -1, 0, 0, 0)
    pts = sample_sphere_points(200, seed=2)
    assert pts == sample_sphere_points(200, seed=2)
    assert all(cs.h.evaluate(p) == Fraction(3, 2) for p in pts)
    assert len(set(pts)) > 190
    for p in sample_reduced_sphere_points(50, seed=3):
        assert p[3:] == (0, 0, 0) and sum(v * v for v in p) == 3


def test_rank4_examples(cs):
    assert rank4_at(cs, ANCHOR) == 4
    for p in sample_sphere_points(15, seed=6):
        rk = rank4_at(cs, p)
        assert rk in (0, 2, 4) and rk == 4
        M = block_rotation([Fraction(2, 3), Fraction(-1, 5), Fraction(7, 2)])
        assert rank4_at(cs, apply_matrix(M, p)) == rk
    with pytest.raises(ValueError):
        rank4_at(cs, [1, 0, 0, 0, 0, 0])


def test_beta_invariant_under_rotation(cs):
    M = block_rotation([Fraction(1, 3), Fraction(5, 2), Fraction(-4, 7)])
    assert pullback_linear(cs.beta, M) == cs.beta


def test_common_zero_probe_refutes_nonvanishing(rs):
    probe = common_zero_probe(rs.chi_y0)
    assert probe["status"] == "common-zero-found"
    root = (7 - math.sqrt(31)) / 3  # root of 3t^2 - 14t + 6
    for f in probe["findings"]:
        assert f["gcd"] == "t^2 - 14/3*t + 2"
        lo, hi = map(Fraction, f["t_bracket"])
        assert lo <= Fraction(root) + Fraction(1, 10 ** 12) and Fraction(root) - Fraction(1, 10 ** 12) <= hi
        assert lo > 0 and hi < Fraction(3, 2)


def test_common_zero_probe_negative_case():
    # cores that never vanish together on the symmetric lines
    probe = common_zero_probe([Polynomial.zero(), X1 ** 2 + 1, X2 ** 2 + 1])
    assert probe["status"] == "none-found"


@pytest.mark.parametrize("name", GOLDEN_NAMES)
def test_golden_files_byte_identical(name):
    text = golden_artifacts()[name] + "\n"
    assert (GOLDEN / f"{name}.txt").read_text(encoding="utf-8") == text
