"""Exact scalar arithmetic for the symbolic layer.

Two kinds of values live here:

- GaussRat: a complex number a + b*i with both parts exact rationals.
- QScalar: a Laurent polynomial in a formal unit-modulus symbol q, with
  GaussRat coefficients.  All algebraic identities of the deformed algebra
  are verified with q kept formal, so no floating point enters until a
  caller explicitly substitutes q = exp(i*theta).
"""

from __future__ import annotations

import cmath
from fractions import Fraction


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class GaussRat:
    """Gaussian rational: re + im*i with re, im exact Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    @staticmethod
    def coerce(x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        return GaussRat(_as_fraction(x))

    def __add__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussRat.coerce(other) - self

    def __mul__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __truediv__(self, other):
        other = GaussRat.coerce(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussRat")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def conjugate(self):
        return GaussRat(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            other = GaussRat.coerce(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GaussRat({self.re})"
        return f"GaussRat({self.re}, {self.im})"


#: the imaginary unit as an exact scalar
I_UNIT = GaussRat(0, 1)


class QScalar:
    """Laurent polynomial in q: a finite sum c_k * q^k with GaussRat c_k.

    Immutable; zero coefficients are never stored.  Arithmetic is exact.
    Substituting a numeric theta (q = exp(i*theta)) is a separate, lossy
    operation returning a Python complex.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for power, coeff in terms.items():
                coeff = GaussRat.coerce(coeff)
                if not coeff.is_zero():
                    clean[int(power)] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("QScalar is immutable")

    @staticmethod
    def coerce(x) -> "QScalar":
        if isinstance(x, QScalar):
            return x
        if isinstance(x, (int, Fraction, GaussRat)):
            return QScalar({0: GaussRat.coerce(x)})
        raise TypeError(f"cannot coerce {type(x).__name__} to QScalar")

    @staticmethod
    def from_q_power(power: int, coeff=1) -> "QScalar":
        return QScalar({power: GaussRat.coerce(coeff)})

    @staticmethod
    def zero() -> "QScalar":
        return QScalar()

    @staticmethod
    def one() -> "QScalar":
        return QScalar({0: GaussRat(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = QScalar.coerce(other)
        terms = dict(self.terms)
        for power, coeff in other.terms.items():
            acc = terms.get(power, GaussRat(0)) + coeff
            if acc.is_zero():
                terms.pop(power, None)
            else:
                terms[power] = acc
        return QScalar(terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-QScalar.coerce(other))

    def __rsub__(self, other):
        return QScalar.coerce(other) + (-self)

    def __neg__(self):
        return QScalar({p: -c for p, c in self.terms.items()})

    def __mul__(self, other):
        other = QScalar.coerce(other)
        terms: dict[int, GaussRat] = {}
        for p1, c1 in self.terms.items():
            for p2, c2 in other.terms.items():
                acc = terms.get(p1 + p2, GaussRat(0)) + c1 * c2
                if acc.is_zero():
                    terms.pop(p1 + p2, None)
                else:
                    terms[p1 + p2] = acc
        return QScalar(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = QScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def substitute(self, theta: float) -> complex:
        """Evaluate at q = exp(i*theta).  Lossy: exact -> float."""
        total = 0j
        for power, coeff in self.terms.items():
            total += complex(coeff) * cmath.exp(1j * theta * power)
        return total

    def at_q_one(self) -> GaussRat:
        """Exact value at q = 1 (sum of all coefficients)."""
        total = GaussRat(0)
        for coeff in self.terms.values():
            total = total + coeff
        return total

    def coeff_rows(self) -> list[list[int]]:
        """Canonical rows [q_power, re_num, re_den, im_num, im_den]."""
        rows = []
        for power in sorted(self.terms):
            c = self.terms[power]
            rows.append([
                power,
                c.re.numerator, c.re.denominator,
                c.im.numerator, c.im.denominator,
            ])
        return rows

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for power in sorted(self.terms):
            c = self.terms[power]
            if c.im == 0:
                cs = str(c.re)
            elif c.re == 0:
                cs = f"{c.im}*i"
            else:
                cs = f"({c.re}{'+' if c.im > 0 else ''}{c.im}*i)"
            if power == 0:
                parts.append(cs)
            else:
                qs = "q" if power == 1 else f"q^{power}"
                parts.append(qs if cs == "1" else f"{cs}*{qs}")
        return " + ".join(parts)


#: the formal deformation unit
Q = QScalar.from_q_power(1)
Q_INV = QScalar.from_q_power(-1)
