"""Differential forms on R^6 with polynomial coefficients.

Basis covectors are ``dz_0..dz_5`` = ``dx1, dx2, dx3, dy1, dy2, dy3``.  A form
of degree ``k`` maps strictly increasing index tuples of length ``k`` to
nonzero :class:`~exoticr6.algebra.Polynomial` coefficients.  The Hodge star
uses the Euclidean metric and the orientation ``dx1^dx2^dx3^dy1^dy2^dy3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .algebra import NVARS, Polynomial, Scalar, as_rational

ORIENTATION = "dx1^dx2^dx3^dy1^dy2^dy3"
BASIS_NAMES = ("dx1", "dx2", "dx3", "dy1", "dy2", "dy3")
_BASIS_INDEX = {n: i for i, n in enumerate(BASIS_NAMES)}

MultiIndex = tuple  # strictly increasing tuple of ints in range(6)

Matrix = list  # list[list[Fraction]]


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _check_index(idx: Sequence[int], degree: int) -> MultiIndex:
    idx = tuple(idx)
    if len(idx) != degree:
        raise ValueError(f"multi-index {idx} does not have length {degree}")
    if any(not 0 <= i < NVARS for i in idx) or any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"multi-index {idx} is not strictly increasing in 0..5")
    return idx


class DiffForm:
    """Immutable differential form of fixed degree."""

    __slots__ = ("degree", "_terms")

    def __init__(self, degree: int, terms: Mapping[Sequence[int], Polynomial | Scalar] | None = None):
        if not 0 <= degree <= NVARS:
            raise ValueError(f"form degree {degree} outside 0..6")
        self.degree = degree
        acc: dict[MultiIndex, Polynomial] = {}
        for idx, c in (terms or {}).items():
            idx = _check_index(idx, degree)
            c = c if isinstance(c, Polynomial) else Polynomial.const(c)
            acc[idx] = acc[idx] + c if idx in acc else c
        self._terms = {i: acc[i] for i in sorted(acc) if not acc[i].is_zero()}

    @classmethod
    def zero(cls, degree: int) -> DiffForm:
        return cls(degree)

    @classmethod
    def function(cls, f: Polynomial | Scalar) -> DiffForm:
        return cls(0, {(): f})

    @classmethod
    def basis(cls, *idx: int) -> DiffForm:
        """``basis(0, 3)`` is dx1^dy1; the indices may come in any order."""
        sign = permutation_sign(idx)
        if sign == 0:
            return cls(len(idx))
        return cls(len(idx), {tuple(sorted(idx)): sign})

    @property
    def terms(self) -> Mapping[MultiIndex, Polynomial]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms.items())

    def coeff(self, idx: Sequence[int]) -> Polynomial:
        return self._terms.get(tuple(idx), Polynomial.zero())

    def is_zero(self) -> bool:
        return not self._terms

    def map_coeffs(self, fn: Callable[[Polynomial], Polynomial]) -> DiffForm:
        return DiffForm(self.degree, {i: fn(c) for i, c in self._terms.items()})

    # -- linear structure --------------------------------------------------
    def __add__(self, other: DiffForm) -> DiffForm:
        if not isinstance(other, DiffForm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self._terms)
        for i, c in other._terms.items():
            out[i] = out[i] + c if i in out else c
        return DiffForm(self.degree, out)

    def __neg__(self) -> DiffForm:
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other: DiffForm) -> DiffForm:
        return self + (-other)

    def __mul__(self, f) -> DiffForm:
        if isinstance(f, DiffForm):
            return NotImplemented
        return self.map_coeffs(lambda c: c * f)

    __rmul__ = __mul__

    def __xor__(self, other: DiffForm) -> DiffForm:
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.degree, tuple(self._terms.items())))

    # -- evaluation --------------------------------------------------------
    def evaluate(self, point: Sequence[Scalar]) -> dict[MultiIndex, Fraction]:
        """Coefficients at ``point``; zero components are omitted."""
        vals = {i: c.evaluate(point) for i, c in self._terms.items()}
        return {i: v for i, v in vals.items() if v != 0}

    # -- text form ---------------------------------------------------------
    def serialize(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for idx, c in self._terms.items():
            if self.degree == 0:
                parts.append(f"({c.serialize()})")
            else:
                parts.append(f"({c.serialize()}) * " + "^".join(BASIS_NAMES[i] for i in idx))
        return " + ".join(parts)

    __str__ = serialize

    def __repr__(self) -> str:
        return f"DiffForm({self.degree}, {self.serialize()!r})"

    @classmethod
    def parse(cls, text: str, degree: int) -> DiffForm:
        text = text.strip()
        if text == "0":
            return cls(degree)
        terms: dict[MultiIndex, Polynomial] = {}
        pos = 0
        while pos < len(text):
            if text[pos] != "(":
                raise ValueError(f"expected '(' at offset {pos}")
            depth, end = 0, pos
            for end in range(pos, len(text)):
                depth += {"(": 1, ")": -1}.get(text[end], 0)
                if depth == 0:
                    break
            coeff = Polynomial.parse(text[pos + 1:end])
            rest = text[end + 1:]
            nxt = rest.find(" + (")
            tail = rest if nxt < 0 else rest[:nxt]
            if tail.startswith(" * "):
                idx = tuple(_BASIS_INDEX[n] for n in tail[3:].split("^"))
            elif tail == "":
                idx = ()
            else:
                raise ValueError(f"bad basis label {tail!r}")
            terms[_check_index(idx, degree)] = coeff
            pos = len(text) if nxt < 0 else end + 1 + nxt + 3
        return cls(degree, terms)


def one_form(coeffs: Sequence[Polynomial | Scalar]) -> DiffForm:
    return DiffForm(1, {(i,): c for i, c in enumerate(coeffs)})


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.degree + b.degree > NVARS:
        raise ValueError(f"wedge degree {a.degree}+{b.degree} exceeds {NVARS}")
    out: dict[MultiIndex, Polynomial] = {}
    for I, ca in a.items():
        for J, cb in b.items():
            sign = permutation_sign(I + J)
            if sign == 0:
                continue
            K = tuple(sorted(I + J))
            term = ca * cb if sign > 0 else -(ca * cb)
            out[K] = out[K] + term if K in out else term
    return DiffForm(a.degree + b.degree, out)


def ext_d(a: DiffForm) -> DiffForm:
    if a.degree >= NVARS:
        return DiffForm(NVARS)
    out: dict[MultiIndex, Polynomial] = {}
    for I, c in a.items():
        for v in range(NVARS):
            if v in I:
                continue
            partial = c.diff(v)
            if partial.is_zero():
                continue
            sign = permutation_sign((v,) + I)
            K = tuple(sorted((v,) + I))
            term = partial if sign > 0 else -partial
            out[K] = out[K] + term if K in out else term
    return DiffForm(a.degree + 1, out)


def hodge_star(a: DiffForm) -> DiffForm:
    out = {}
    for I, c in a.items():
        comp = tuple(k for k in range(NVARS) if k not in I)
        sign = permutation_sign(I + comp)
        out[comp] = c if sign > 0 else -c
    return DiffForm(NVARS - a.degree, out)


def pullback_linear(a: DiffForm, M: Sequence[Sequence[Scalar]]) -> DiffForm:
    """Pull ``a`` back along the linear map ``z -> M z``."""
    M = [[as_rational(v) for v in row] for row in M]
    if len(M) != NVARS or any(len(row) != NVARS for row in M):
        raise ValueError("pullback needs a 6x6 matrix")
    images = [
        sum((Polynomial.var(j) * M[i][j] for j in range(NVARS) if M[i][j]), Polynomial.zero())
        for i in range(NVARS)
    ]
    covectors = [one_form(M[i]) for i in range(NVARS)]
    basis_cache: dict[MultiIndex, DiffForm] = {}
    out = DiffForm.zero(a.degree)
    for I, c in a.items():
        if I not in basis_cache:
            form = DiffForm.function(1)
            for i in I:
                form = wedge(form, covectors[i])
            basis_cache[I] = form
        pulled = c.compose(images)
        out = out + basis_cache[I] * pulled
    return out


def subst_coeffs_y0(a: DiffForm) -> DiffForm:
    """Set y1 = y2 = y3 = 0 in every coefficient, keeping all basis covectors."""
    reps = [Polynomial.var(i) for i in range(3)] + [Polynomial.zero()] * 3
    return a.map_coeffs(lambda c: c.compose(reps))


# -- pointwise linear algebra ------------------------------------------------

@dataclass(frozen=True)
class AntisymMatrix:
    entries: tuple

    def __post_init__(self):
        n = len(self.entries)
        for i in range(n):
            if len(self.entries[i]) != n:
                raise ValueError("matrix is not square")
            for j in range(n):
                if self.entries[i][j] != -self.entries[j][i]:
                    raise ValueError("matrix is not antisymmetric")

    @property
    def size(self) -> int:
        return len(self.entries)

    def rows(self) -> Matrix:
        return [list(r) for r in self.entries]

    def rank(self) -> int:
        return rank_exact(self.entries)


def eval_two_form(a: DiffForm, point: Sequence[Scalar]) -> AntisymMatrix:
    if a.degree != 2:
        raise ValueError(f"expected a 2-form, got degree {a.degree}")
    m = [[Fraction(0)] * NVARS for _ in range(NVARS)]
    for (i, j), v in a.evaluate(point).items():
        m[i][j] = v
        m[j][i] = -v
    return AntisymMatrix(tuple(tuple(r) for r in m))


def rank_exact(M: Sequence[Sequence[Scalar]]) -> int:
    """Rank over Q by Gaussian elimination on Fractions."""
    rows = [[as_rational(v) for v in r] for r in M]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f:
                f /= p[col]
                rows[r] = [x - f * y for x, y in zip(rows[r], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def tangent_basis(normal: Sequence[Scalar]) -> list[list[Fraction]]:
    """Five rational vectors spanning the orthogonal complement of ``normal``.

    Gram-Schmidt (unnormalized) over ``[normal, e_1, ..., e_6]``; the first
    surviving vector is ``normal`` itself and is dropped.
    """
    n = [as_rational(v) for v in normal]
    if not any(n):
        raise ValueError("normal vector is zero")
    candidates = [n] + [[Fraction(int(i == j)) for j in range(NVARS)] for i in range(NVARS)]
    ortho: list[list[Fraction]] = []
    for v in candidates:
        w = list(v)
        for u in ortho:
            f = _dot(w, u) / _dot(u, u)
            w = [a - f * b for a, b in zip(w, u)]
        if any(w):
            ortho.append(w)
        if len(ortho) == NVARS:
            break
    return ortho[1:]


def restrict_two_form(M: AntisymMatrix, basis: Sequence[Sequence[Scalar]],
                      normal: Sequence[Scalar] | None = None) -> AntisymMatrix:
    """Gram matrix ``B[i][j] = b_i^T M b_j`` of the 2-form on a 5-dim subspace."""
    B = [[as_rational(v) for v in b] for b in basis]
    if len(B) != NVARS - 1 or any(len(b) != NVARS for b in B):
        raise ValueError("restriction needs five vectors of length six")
    if rank_exact(B) != len(B):
        raise ValueError("restriction basis is linearly dependent")
    if normal is not None:
        nv = [as_rational(v) for v in normal]
        if any(_dot(b, nv) != 0 for b in B):
            raise ValueError("restriction basis is not tangent (not orthogonal to the normal)")
    rows = M.entries
    MB = [[_dot(rows[i], b) for i in range(NVARS)] for b in B]  # M b_j, stored per j
    out = tuple(tuple(_dot(B[i], MB[j]) for j in range(len(B))) for i in range(len(B)))
    return AntisymMatrix(out)


def all_multi_indices(degree: int) -> list[MultiIndex]:
    return list(combinations(range(NVARS), degree))
