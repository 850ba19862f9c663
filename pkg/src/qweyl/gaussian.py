"""Symbolic calculus on polynomial-times-Gaussian wavefunctions.

CPoly3 is a commutative polynomial in (x, y, z) and a formal deformation
symbol theta, with exact Gaussian-rational coefficients.  GaussianPoly is
a CPoly3 prefactor attached to the fixed envelope exp(-r^2/2); DiffOp3 is
a polynomial-coefficient differential operator.  Differentiating through
the envelope uses

    d/dx_j (p * exp(-r^2/2)) = (dp/dx_j - x_j p) * exp(-r^2/2),

so every operator action stays inside the GaussianPoly class.  Operator
composition follows the Leibniz rule

    (p D^a) (r D^b) = sum_{g <= a} C(a, g) p (D^{a-g} r) D^{g+b}.

Deformation bookkeeping is first order: operators carry a truncation flag
(on by default) that discards theta powers above 1 after every product.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iter_product
from math import comb

from .scalars import GaussRat

Key = tuple  # (a, b, c, t): exponents of x, y, z and the theta power

AXES = ("x", "y", "z")


class CPoly3:
    """Polynomial in x, y, z, theta with GaussRat coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                a, b, c, t = (int(v) for v in key)
                if min(a, b, c, t) < 0:
                    raise ValueError(f"negative exponent in {key}")
                coeff = GaussRat.coerce(coeff)
                if not coeff.is_zero():
                    clean[(a, b, c, t)] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("CPoly3 is immutable")

    # ------------------------------------------------------- constructors

    @staticmethod
    def zero() -> "CPoly3":
        return CPoly3()

    @staticmethod
    def const(coeff) -> "CPoly3":
        return CPoly3({(0, 0, 0, 0): GaussRat.coerce(coeff)})

    @staticmethod
    def one() -> "CPoly3":
        return CPoly3.const(1)

    @staticmethod
    def variable(axis: int) -> "CPoly3":
        key = [0, 0, 0, 0]
        key[axis] = 1
        return CPoly3({tuple(key): GaussRat(1)})

    @staticmethod
    def theta() -> "CPoly3":
        return CPoly3({(0, 0, 0, 1): GaussRat(1)})

    @staticmethod
    def monomial(a, b, c, t=0, coeff=1) -> "CPoly3":
        return CPoly3({(a, b, c, t): GaussRat.coerce(coeff)})

    # --------------------------------------------------------- arithmetic

    def __add__(self, other):
        other = _coerce_poly(other)
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = terms.get(key, GaussRat(0)) + coeff
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
        return CPoly3(terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) + (-self)

    def __neg__(self):
        return CPoly3({k: -c for k, c in self.terms.items()})

    def __mul__(self, other):
        other = _coerce_poly(other)
        terms: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(k1[i] + k2[i] for i in range(4))
                acc = terms.get(key, GaussRat(0)) + c1 * c2
                if acc.is_zero():
                    terms.pop(key, None)
                else:
                    terms[key] = acc
        return CPoly3(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = _coerce_poly(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    # --------------------------------------------------------- structure

    def derivative(self, axis: int) -> "CPoly3":
        terms = {}
        for key, coeff in self.terms.items():
            if key[axis] == 0:
                continue
            new = list(key)
            new[axis] -= 1
            terms[tuple(new)] = coeff * key[axis]
        return CPoly3(terms)

    def truncate_theta(self, max_degree: int = 1) -> "CPoly3":
        return CPoly3({k: c for k, c in self.terms.items() if k[3] <= max_degree})

    def theta_slice(self, degree: int) -> "CPoly3":
        """Coefficient of theta^degree, with the theta factor removed."""
        return CPoly3({
            (k[0], k[1], k[2], 0): c for k, c in self.terms.items() if k[3] == degree
        })

    def max_theta_degree(self) -> int:
        return max((k[3] for k in self.terms), default=0)

    def parity_split(self):
        """(even, odd) parts under (x, y, z) -> (-x, -y, -z)."""
        even, odd = {}, {}
        for key, coeff in self.terms.items():
            (even if (key[0] + key[1] + key[2]) % 2 == 0 else odd)[key] = coeff
        return CPoly3(even), CPoly3(odd)

    def real_imag_split(self):
        """(re, im) with self = re + i*im, both with real coefficients."""
        re, im = {}, {}
        for key, coeff in self.terms.items():
            if coeff.re != 0:
                re[key] = GaussRat(coeff.re)
            if coeff.im != 0:
                im[key] = GaussRat(coeff.im)
        return CPoly3(re), CPoly3(im)

    def eval_theta(self, theta: float) -> dict:
        """Numeric theta substitution: map (a,b,c) -> complex coefficient."""
        out: dict = {}
        for (a, b, c, t), coeff in self.terms.items():
            out[(a, b, c)] = out.get((a, b, c), 0.0) + complex(coeff) * theta ** t
        return {k: v for k, v in out.items() if v != 0.0}

    def to_json(self):
        """Canonical JSON: {"(a,b,c)": sorted rows [re, im, theta_degree]}."""
        grouped: dict = {}
        for (a, b, c, t), coeff in sorted(self.terms.items()):
            grouped.setdefault((a, b, c), []).append(
                [float(coeff.re), float(coeff.im), t]
            )
        return {
            f"({a},{b},{c})": sorted(rows, key=lambda r: r[2])
            for (a, b, c), rows in sorted(grouped.items())
        }

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        order = sorted(self.terms, key=lambda k: (k[3], sum(k[:3]), k[:3]))
        for key in order:
            coeff = self.terms[key]
            factors = []
            if key[3] == 1:
                factors.append("theta")
            elif key[3] > 1:
                factors.append(f"theta^{key[3]}")
            for axis in range(3):
                if key[axis] == 1:
                    factors.append(AXES[axis])
                elif key[axis] > 1:
                    factors.append(f"{AXES[axis]}^{key[axis]}")
            if coeff.im == 0:
                cs = str(coeff.re)
            elif coeff.re == 0:
                cs = f"{coeff.im}i"
            else:
                sign = "+" if coeff.im > 0 else "-"
                cs = f"({coeff.re}{sign}{abs(coeff.im)}i)"
            if factors and cs == "1":
                parts.append("*".join(factors))
            elif factors and cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                parts.append("*".join([cs] + factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def _coerce_poly(x) -> CPoly3:
    if isinstance(x, CPoly3):
        return x
    if isinstance(x, (int, Fraction, GaussRat)):
        return CPoly3.const(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to CPoly3")


R_SQUARED = (
    CPoly3.variable(0) * CPoly3.variable(0)
    + CPoly3.variable(1) * CPoly3.variable(1)
    + CPoly3.variable(2) * CPoly3.variable(2)
)


class GaussianPoly:
    """Prefactor polynomial attached to the fixed envelope exp(-r^2/2).

    The envelope itself is immutable and implicit; all operations act on
    the prefactor.  The ground-state wavefunction is the unit prefactor
    (an overall normalization constant scales out of every identity
    checked here).
    """

    __slots__ = ("p",)

    def __init__(self, p: CPoly3):
        object.__setattr__(self, "p", _coerce_poly(p))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianPoly is immutable")

    @staticmethod
    def ground_state() -> "GaussianPoly":
        return GaussianPoly(CPoly3.one())

    def __add__(self, other):
        return GaussianPoly(self.p + other.p)

    def __sub__(self, other):
        return GaussianPoly(self.p - other.p)

    def scale(self, factor) -> "GaussianPoly":
        return GaussianPoly(self.p * _coerce_poly(factor))

    def gauss_derivative(self, axis: int) -> "GaussianPoly":
        # chain rule through the envelope
        return GaussianPoly(self.p.derivative(axis) - CPoly3.variable(axis) * self.p)

    def __eq__(self, other):
        if not isinstance(other, GaussianPoly):
            return NotImplemented
        return self.p == other.p

    def __repr__(self):
        return f"({self.p!r}) * exp(-r^2/2)"


class DiffOp3:
    """Sum of CPoly3 coefficients times partial-derivative monomials.

    terms maps (dx, dy, dz) derivative orders to CPoly3 coefficients.
    When truncate is set (the default) every product discards theta
    powers above 1, keeping the whole calculus first order.
    """

    __slots__ = ("terms", "truncate")

    def __init__(self, terms=None, truncate: bool = True):
        clean = {}
        if terms:
            for key, poly in terms.items():
                key = (int(key[0]), int(key[1]), int(key[2]))
                if min(key) < 0:
                    raise ValueError(f"negative derivative order in {key}")
                poly = _coerce_poly(poly)
                if truncate:
                    poly = poly.truncate_theta(1)
                if not poly.is_zero():
                    clean[key] = poly
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "truncate", truncate)

    def __setattr__(self, name, value):
        raise AttributeError("DiffOp3 is immutable")

    @staticmethod
    def zero(truncate: bool = True) -> "DiffOp3":
        return DiffOp3({}, truncate=truncate)

    @staticmethod
    def identity(truncate: bool = True) -> "DiffOp3":
        return DiffOp3({(0, 0, 0): CPoly3.one()}, truncate=truncate)

    @staticmethod
    def from_poly(poly, truncate: bool = True) -> "DiffOp3":
        """Multiplication operator."""
        return DiffOp3({(0, 0, 0): _coerce_poly(poly)}, truncate=truncate)

    @staticmethod
    def partial(axis: int, truncate: bool = True) -> "DiffOp3":
        key = [0, 0, 0]
        key[axis] = 1
        return DiffOp3({tuple(key): CPoly3.one()}, truncate=truncate)

    @staticmethod
    def scaling(axis: int, truncate: bool = True) -> "DiffOp3":
        """The operator x_axis d/dx_axis, diagonal on monomials."""
        key = [0, 0, 0]
        key[axis] = 1
        return DiffOp3({tuple(key): CPoly3.variable(axis)}, truncate=truncate)

    def __add__(self, other):
        if not isinstance(other, DiffOp3):
            return NotImplemented
        terms = dict(self.terms)
        for key, poly in other.terms.items():
            terms[key] = terms.get(key, CPoly3.zero()) + poly
        return DiffOp3(terms, truncate=self.truncate and other.truncate)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor) -> "DiffOp3":
        factor = _coerce_poly(factor)
        return DiffOp3(
            {k: p * factor for k, p in self.terms.items()}, truncate=self.truncate
        )

    def compose(self, other: "DiffOp3") -> "DiffOp3":
        """Operator product self after other, via the Leibniz rule."""
        terms: dict = {}
        for alpha, p in self.terms.items():
            for beta, r in other.terms.items():
                for gamma in iter_product(*(range(a + 1) for a in alpha)):
                    coeff = 1
                    for a, g in zip(alpha, gamma):
                        coeff *= comb(a, g)
                    shifted = r
                    for axis in range(3):
                        for _ in range(alpha[axis] - gamma[axis]):
                            shifted = shifted.derivative(axis)
                    if shifted.is_zero():
                        continue
                    key = tuple(g + b for g, b in zip(gamma, beta))
                    add = p * shifted * coeff
                    terms[key] = terms.get(key, CPoly3.zero()) + add
        return DiffOp3(terms, truncate=self.truncate and other.truncate)

    def apply(self, f: GaussianPoly) -> GaussianPoly:
        """Act on a Gaussian-enveloped polynomial."""
        total = CPoly3.zero()
        for key, poly in self.terms.items():
            g = f
            for axis in (2, 1, 0):
                for _ in range(key[axis]):
                    g = g.gauss_derivative(axis)
            total = total + poly * g.p
        if self.truncate:
            total = total.truncate_theta(1)
        return GaussianPoly(total)

    def theta_slice(self, degree: int) -> "DiffOp3":
        """Operator made of the theta^degree parts, theta factor removed."""
        return DiffOp3(
            {k: p.theta_slice(degree) for k, p in self.terms.items()},
            truncate=self.truncate,
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DiffOp3):
            return NotImplemented
        return self.terms == other.terms

    def to_json(self):
        return {
            f"d({k[0]},{k[1]},{k[2]})": p.to_json()
            for k, p in sorted(self.terms.items())
        }

    def __repr__(self):
        if not self.terms:
            return "DiffOp3(0)"
        parts = []
        for key in sorted(self.terms):
            ds = []
            for axis in range(3):
                if key[axis] == 1:
                    ds.append(f"d{AXES[axis]}")
                elif key[axis] > 1:
                    ds.append(f"d{AXES[axis]}^{key[axis]}")
            dstr = "*".join(ds) if ds else "1"
            parts.append(f"[{self.terms[key]!r}] {dstr}")
        return "DiffOp3(" + " + ".join(parts) + ")"


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def gaussian_expectation(poly: CPoly3) -> CPoly3:
    """Exact expectation of a polynomial under the unit-normalized weight
    exp(-r^2) (the squared ground state).  Odd monomials vanish; even ones
    contribute the closed-form moment (2k-1)!!/2^k per axis.  theta stays
    formal, so the result is a constant polynomial in theta.
    """
    total = CPoly3.zero()
    for (a, b, c, t), coeff in poly.terms.items():
        if a % 2 or b % 2 or c % 2:
            continue
        moment = Fraction(1)
        for e in (a, b, c):
            moment *= Fraction(_double_factorial(e - 1), 2 ** (e // 2))
        total = total + CPoly3.monomial(0, 0, 0, t, coeff * moment)
    return total
