import random
from itertools import combinations
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from exoticr6.algebra import X1, X2, Y1, Y2, Polynomial
from exoticr6.checks import exterior_property_failures, random_form, random_matrix, star_star_sign
from exoticr6.construction import ANCHOR, build_all, circle_point
from exoticr6.forms import (
    AntisymMatrix,
    DiffForm,
    eval_two_form,
    ext_d,
    hodge_star,
    one_form,
    pullback_linear,
    rank_exact,
    restrict_two_form,
    subst_coeffs_y0,
    tangent_basis,
    wedge,
)

dx1, dx2, dx3, dy1, dy2, dy3 = (DiffForm.basis(i) for i in range(6))
omega0 = wedge(dx1, dy1) + wedge(dx2, dy2) + wedge(dx3, dy3)
IDENTITY = [[Fraction(int(i == j)) for j in range(6)] for i in range(6)]


def test_wedge_examples():
    assert wedge(dx1, dx1).is_zero()
    assert wedge(X1 * dy1, X2 * dy2) == DiffForm(2, {(3, 4): X1 * X2})
    assert wedge(dx1, dy1) == -wedge(dy1, dx1)


def test_wedge_degree_overflow():
    with pytest.raises(ValueError):
        wedge(DiffForm.basis(0, 1, 2, 3), DiffForm.basis(4, 5, 0))


def test_ext_d_examples():
    assert ext_d(X1 * dy1) == wedge(dx1, dy1)
    f = DiffForm.function(X1 ** 3 * Y2)
    assert ext_d(ext_d(f)).is_zero()


def test_dpsi_nonzero_where_psi_vanishes():
    c = build_all()
    x, y = circle_point(Fraction(1, 2))
    assert (x, y) == (Fraction(3, 5), Fraction(4, 5))
    pt = [x, 0, 0, y, 0, 0]
    assert not c.psi_a[0].evaluate(pt)
    assert c.dpsi.evaluate(pt)


def test_hodge_star_examples():
    vol = DiffForm.basis(0, 1, 2, 3, 4, 5)
    assert hodge_star(DiffForm.function(1)) == vol
    assert hodge_star(dx1) == DiffForm.basis(1, 2, 3, 4, 5)
    for k in range(7):
        f = random_form(random.Random(k), k)
        assert hodge_star(hodge_star(f)) == f * star_star_sign(k)
        if k % 2 == 0:
            assert hodge_star(hodge_star(f)) == f


def test_star_star_is_minus_identity_in_odd_degree():
    # forced by star(dx1) = +dx2^...^dy3: the complement permutation (2,3,4,5,6,1) is odd
    assert hodge_star(DiffForm.basis(1, 2, 3, 4, 5)) == -dx1
    assert hodge_star(hodge_star(dx1)) == -dx1


def test_hodge_star_basis_convention():
    # dz_I ^ star(dz_I) = vol for every basis element
    vol = DiffForm.basis(0, 1, 2, 3, 4, 5)
    for k in range(7):
        for I in combinations(range(6), k):
            b = DiffForm.basis(*I)
            assert wedge(b, hodge_star(b)) == vol


def test_pullback_examples():
    c = build_all()
    assert pullback_linear(c.psi, IDENTITY) == c.psi
    co, si = Fraction(3, 5), Fraction(4, 5)
    M = [row[:] for row in IDENTITY]
    M[0][0], M[0][3], M[3][0], M[3][3] = co, -si, si, co
    assert pullback_linear(c.psi, M) == c.psi
    assert pullback_linear(DiffForm.function(c.h), M) == DiffForm.function(c.h)


def test_pullback_is_substitution_on_functions():
    M = random_matrix(random.Random(3))
    f = X1 * Y2 + X2 ** 2
    images = [sum((Polynomial.var(j) * M[i][j] for j in range(6)), Polynomial.zero()) for i in range(6)]
    assert pullback_linear(DiffForm.function(f), M).coeff(()) == f.compose(images)


def test_eval_two_form_examples():
    m = eval_two_form(omega0, [5, 0, 1, 2, 0, 0])
    assert m.entries[0][3] == 1 and m.entries[3][0] == -1
    assert rank_exact(m.entries) == 6
    z = eval_two_form(DiffForm.zero(2), ANCHOR)
    assert rank_exact(z.entries) == 0
    with pytest.raises(ValueError):
        eval_two_form(dx1, ANCHOR)


def test_eval_two_form_matches_finite_differences():
    """dpsi(P)[i][j] = d_i psi_j - d_j psi_i, checked by exact symmetric differences.

    psi has degree 5 coefficients, so a rational central difference with a
    tiny step agrees to O(step^2); the test bounds that error.
    """
    c = build_all()
    P = [Fraction(1, 3), Fraction(-2, 5), Fraction(1), Fraction(1, 2), Fraction(0), Fraction(-1, 7)]
    eps = Fraction(1, 10 ** 6)
    comps = [c.psi.coeff((k,)) for k in range(6)]

    def partial(f, i):
        lo, hi = list(P), list(P)
        lo[i] -= eps
        hi[i] += eps
        return (f.evaluate(hi) - f.evaluate(lo)) / (2 * eps)

    M = eval_two_form(c.dpsi, P).entries
    for i in range(6):
        for j in range(6):
            approx = partial(comps[j], i) - partial(comps[i], j)
            assert abs(approx - M[i][j]) < Fraction(1, 10 ** 9)


def test_restrict_two_form_examples():
    basis = tangent_basis(ANCHOR)
    zero = AntisymMatrix(tuple(tuple(Fraction(0) for _ in range(6)) for _ in range(6)))
    assert rank_exact(restrict_two_form(zero, basis).entries) == 0
    om = eval_two_form(omega0, ANCHOR)
    assert rank_exact(restrict_two_form(om, basis, normal=ANCHOR).entries) == 4
    c = build_all()
    assert rank_exact(restrict_two_form(eval_two_form(c.dpsi, ANCHOR), basis).entries) == 4


def test_restrict_rejects_bad_bases():
    om = eval_two_form(omega0, ANCHOR)
    basis = tangent_basis(ANCHOR)
    with pytest.raises(ValueError):
        restrict_two_form(om, [basis[0]] * 5)
    e1 = [1, 0, 0, 0, 0, 0]
    with pytest.raises(ValueError):
        restrict_two_form(om, [e1] + basis[1:], normal=ANCHOR)


def test_tangent_basis_is_orthogonal_complement():
    for normal in (ANCHOR, [Fraction(3, 5), 2, 0, -1, Fraction(1, 9), 4]):
        basis = tangent_basis(normal)
        assert len(basis) == 5
        assert rank_exact(basis) == 5
        assert all(sum(a * b for a, b in zip(v, normal)) == 0 for v in basis)


def test_rank_examples_and_sympy_oracle():
    assert rank_exact(IDENTITY) == 6
    assert rank_exact([[0] * 6] * 6) == 0
    assert rank_exact(eval_two_form(omega0, ANCHOR).entries) == 6
    rng = random.Random(11)
    for _ in range(30):
        rows = [[Fraction(rng.randint(-2, 2), rng.randint(1, 3)) if rng.random() < 0.5 else 0
                 for _ in range(6)] for _ in range(rng.randint(1, 6))]
        assert rank_exact(rows) == sympy.Matrix(rows).rank()


def test_subst_coeffs_y0_examples():
    c = build_all()
    psi0 = subst_coeffs_y0(c.psi)
    assert all(I[0] >= 3 for I, _ in psi0.items())
    for a in range(3):
        x = Polynomial.var(a)
        expected = (1 - Fraction(7, 6) * x ** 2 + Fraction(1, 6) * x ** 4) * x * Fraction(1, 2)
        assert psi0.coeff((3 + a,)) == expected
    assert subst_coeffs_y0(c.dh) == one_form([X1, X2, Polynomial.var(2), 0, 0, 0])
    assert subst_coeffs_y0(DiffForm.zero(3)).is_zero()


def test_form_serialize_roundtrip():
    c = build_all()
    for form in (c.psi, c.dpsi, c.beta, c.chi, DiffForm.function(c.h), DiffForm.zero(2)):
        text = form.serialize()
        assert DiffForm.parse(text, form.degree) == form
    assert (X1 * dy1).serialize() == "(x1) * dy1"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_exterior_identities_randomized(seed):
    failures = exterior_property_failures(random.Random(seed))
    assert not any(failures.values()), failures


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_pullback_functorial_randomized(seed):
    rng = random.Random(seed)
    M, N = random_matrix(rng), random_matrix(rng)
    a = random_form(rng, rng.randint(0, 3))
    MN = [[sum((M[i][k] * N[k][j] for k in range(6)), Fraction(0)) for j in range(6)] for i in range(6)]
    assert pullback_linear(pullback_linear(a, M), N) == pullback_linear(a, MN)
