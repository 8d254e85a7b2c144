"""Exact rational scalars and sparse polynomials in the six coordinates of R^6.

Scalars are :class:`fractions.Fraction`.  A :class:`Polynomial` maps exponent
vectors of length six, ordered ``(x1, x2, x3, y1, y2, y3)``, to nonzero
rational coefficients.  Terms are kept in graded lexicographic order (highest
total degree first, ties broken by comparing exponents from ``x1`` onwards), so
equal polynomials always serialize to the same text.

>>> h = sum((Polynomial.var(i) ** 2 for i in range(6)), Polynomial.zero()) * Fraction(1, 2)
>>> h.evaluate([1, 1, 1, 0, 0, 0])
Fraction(3, 2)
>>> str(h.diff(0))
'x1'
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction

NVARS = 6
VAR_NAMES = ("x1", "x2", "x3", "y1", "y2", "y3")
_VAR_INDEX = {name: i for i, name in enumerate(VAR_NAMES)}

Exponent = tuple  # tuple[int, ...] of length NVARS
Scalar = Union[int, Fraction]

ZERO_EXP: Exponent = (0,) * NVARS


def _order_key(exp: Exponent) -> tuple:
    return (-sum(exp), tuple(-e for e in exp))


def _unit(i: int, power: int = 1) -> Exponent:
    e = [0] * NVARS
    e[i] = power
    return tuple(e)


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Scalar] | Iterable[tuple[Exponent, Scalar]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, Fraction] = {}
        for exp, c in items:
            exp = tuple(exp)
            if len(exp) != NVARS or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp!r}")
            acc[exp] = acc.get(exp, 0) + as_rational(c)
        self._terms = {e: acc[e] for e in sorted(acc, key=_order_key) if acc[e] != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> Polynomial:
        # terms already exact and keyed by valid exponent tuples; zeros allowed
        p = cls.__new__(cls)
        p._terms = {e: terms[e] for e in sorted(terms, key=_order_key) if terms[e] != 0}
        p._hash = None
        return p

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> Polynomial:
        return cls._raw({})

    @classmethod
    def const(cls, c: Scalar) -> Polynomial:
        return cls._raw({ZERO_EXP: as_rational(c)})

    @classmethod
    def var(cls, i: int) -> Polynomial:
        if not 0 <= i < NVARS:
            raise IndexError(f"variable index {i} out of range")
        return cls._raw({_unit(i): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], c: Scalar = 1) -> Polynomial:
        return cls({tuple(exp): c})

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exponent, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ZERO_EXP in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ZERO_EXP, Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self._terms), default=-1)

    def used_vars(self) -> tuple[int, ...]:
        return tuple(i for i in range(NVARS) if any(e[i] for e in self._terms))

    def nvars(self) -> int:
        """One past the highest variable index that occurs (0 for constants)."""
        used = self.used_vars()
        return used[-1] + 1 if used else 0

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other) -> Polynomial:
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = Fraction(other)
            if c == 0:
                return Polynomial.zero()
            return Polynomial._raw({e: v * c for e, v in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2],
                     e1[3] + e2[3], e1[4] + e2[4], e1[5] + e2[5])
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result, base = Polynomial.const(1), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- calculus and evaluation --------------------------------------------
    def diff(self, i: int) -> Polynomial:
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(out)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != NVARS:
            raise ValueError(f"expected {NVARS} coordinates, got {len(point)}")
        pt = [as_rational(v) for v in point]
        powers: list[dict[int, Fraction]] = [{0: Fraction(1)} for _ in range(NVARS)]
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    pw = powers[i]
                    if k not in pw:
                        pw[k] = pt[i] ** k
                    term *= pw[k]
            total += term
        return total

    def compose(self, replacements: Sequence[Polynomial]) -> Polynomial:
        """Simultaneously substitute ``replacements[i]`` for variable ``i``."""
        if len(replacements) != NVARS:
            raise ValueError(f"need {NVARS} replacement polynomials")
        reps = [_lift(r) for r in replacements]
        cache: list[dict[int, Polynomial]] = [{0: Polynomial.const(1), 1: r} for r in reps]

        def power(i: int, k: int) -> Polynomial:
            pw = cache[i]
            if k not in pw:
                pw[k] = power(i, k - 1) * reps[i]
            return pw[k]

        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            term = Polynomial.const(c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term._terms.items():
                out[te] = out.get(te, 0) + tc
        return Polynomial._raw(out)

    def subst(self, i: int, replacement: Polynomial | Scalar) -> Polynomial:
        reps = [Polynomial.var(j) for j in range(NVARS)]
        reps[i] = _lift(replacement)
        return self.compose(reps)

    def rename(self, mapping: Mapping[int, int]) -> Polynomial:
        """Move variable ``k`` to slot ``mapping[k]``; unmapped variables must not occur."""
        out = {}
        for e, c in self._terms.items():
            ne = [0] * NVARS
            for i, k in enumerate(e):
                if k:
                    if i not in mapping:
                        raise ValueError(f"variable {VAR_NAMES[i]} has no target slot")
                    ne[mapping[i]] += k
            out[tuple(ne)] = out.get(tuple(ne), 0) + c
        return Polynomial._raw(out)

    # -- text form ---------------------------------------------------------
    def serialize(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for n, (e, c) in enumerate(self._terms.items()):
            mono = "*".join(
                VAR_NAMES[i] if k == 1 else f"{VAR_NAMES[i]}^{k}" for i, k in enumerate(e) if k
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if n == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    __str__ = serialize

    def __repr__(self) -> str:
        return f"Polynomial({self.serialize()!r})"

    @classmethod
    def parse(cls, text: str) -> Polynomial:
        src = text.replace(" ", "")
        if not src:
            raise ValueError("empty polynomial text")
        chunks = re.findall(r"[+-]?[^+-]+", src)
        if "".join(chunks) != src:
            raise ValueError(f"cannot parse polynomial {text!r}")
        out: dict[Exponent, Fraction] = {}
        for chunk in chunks:
            sign = -1 if chunk[0] == "-" else 1
            body = chunk.lstrip("+-")
            coef = Fraction(sign)
            exp = [0] * NVARS
            for factor in body.split("*"):
                m = re.fullmatch(r"([xy][123])(?:\^(\d+))?", factor)
                if m:
                    exp[_VAR_INDEX[m.group(1)]] += int(m.group(2) or 1)
                elif re.fullmatch(r"\d+(?:/\d+)?", factor):
                    coef *= Fraction(factor)
                else:
                    raise ValueError(f"bad factor {factor!r} in {text!r}")
            out[tuple(exp)] = out.get(tuple(exp), 0) + coef
        return cls._raw(out)


def _lift(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Polynomial.const(value)
    return NotImplemented


X1, X2, X3, Y1, Y2, Y3 = (Polynomial.var(i) for i in range(NVARS))


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def poly_diff(a: Polynomial, var: int) -> Polynomial:
    return a.diff(var)


def poly_eval(a: Polynomial, point: Sequence[Scalar]) -> Fraction:
    return a.evaluate(point)


def poly_subst(a: Polynomial, var: int, replacement: Polynomial | Scalar) -> Polynomial:
    return a.subst(var, replacement)
