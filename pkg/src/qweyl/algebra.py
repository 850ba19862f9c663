"""Noncommutative polynomial engine for the q-deformed Weyl algebra in 3D.

Generators are X1, X2, X3 (coordinates) and d1, d2, d3 (derivatives),
encoded as integers 0..5 in that order.  The defining relations are

    X_i X_j = q X_j X_i                 (i < j)
    d_i d_j = q^{-1} d_j d_i            (i < j)
    d_i X_j = q X_j d_i                 (i != j)
    d_i X_i - q^2 X_i d_i = 1 + (q^2 - 1) * sum_{j>i} X_j d_j

A word is in canonical (normal) form when all X's precede all d's and each
group has non-decreasing index, which with this encoding is exactly the
non-decreasing words over 0..5.  Rewriting is oriented left-to-right:

    X_b X_a -> q^{-1} X_a X_b                      (b > a)
    d_b d_a -> q       d_a d_b                     (b > a)
    d_a X_b -> q       X_b d_a                     (a != b)
    d_a X_a -> 1 + q^2 X_a d_a + (q^2-1) sum_{k>a} X_k d_k

Termination: order words by (m, s) where m counts derivative-before-
coordinate letter pairs and s counts same-type index inversions.  The two
swap rules leave m fixed and drop s by one; the mixed rules drop m by one
(letters outside the rewritten pair contribute identically before and
after, including for the diagonal rule, whose output words either drop
both letters or replace the inverted pair d_a X_a by a non-inverted pair
X_k d_k).  Each rewrite therefore strictly decreases (m, s)
lexicographically, and normalization reaches a fixpoint.  Confluence is
exercised by test suites that normalize random words under different
admissible strategies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .scalars import GaussRat, QScalar, Q, Q_INV

N_GEN = 6
GEN_NAMES = ("X1", "X2", "X3", "d1", "d2", "d3")

Word = tuple  # tuple of int generator codes; () is the identity


class NoRewriteApplicable(Exception):
    """Raised when a word is already in canonical form."""


def gen_code(g) -> int:
    """Resolve a generator given as code 0..5 or name "X1".."d3"."""
    if isinstance(g, str):
        try:
            return GEN_NAMES.index(g)
        except ValueError:
            raise ValueError(f"unknown generator name {g!r}") from None
    g = int(g)
    if not 0 <= g < N_GEN:
        raise ValueError(f"generator code {g} out of range 0..5")
    return g


def x_code(i: int) -> int:
    """Generator code of X_i, i in 1..3."""
    if not 1 <= i <= 3:
        raise ValueError(f"coordinate index {i} out of range 1..3")
    return i - 1


def d_code(i: int) -> int:
    """Generator code of d_i, i in 1..3."""
    if not 1 <= i <= 3:
        raise ValueError(f"derivative index {i} out of range 1..3")
    return i + 2


def is_normal(word) -> bool:
    return all(word[p] <= word[p + 1] for p in range(len(word) - 1))


def inversion_measure(word) -> tuple:
    """(mixed, same_type) inversion counts; strictly decreases per rewrite.

    mixed counts pairs (p < r) with word[p] a derivative and word[r] a
    coordinate; same_type counts strictly-decreasing index pairs within
    the coordinate letters plus those within the derivative letters.
    """
    mixed = 0
    same = 0
    n = len(word)
    for p in range(n):
        for r in range(p + 1, n):
            a, b = word[p], word[r]
            if a >= 3 and b < 3:
                mixed += 1
            elif (a < 3) == (b < 3) and a > b:
                same += 1
    return (mixed, same)


def rewrite_at(word, pos):
    """Apply the defining relation at adjacent position pos.

    Returns a list of (word, QScalar factor) pairs whose sum, times the
    original coefficient, equals the original word.
    """
    a, b = word[pos], word[pos + 1]
    if a <= b:
        raise NoRewriteApplicable(f"pair {GEN_NAMES[a]} {GEN_NAMES[b]} is in order")
    head, tail = word[:pos], word[pos + 2:]
    swapped = head + (b, a) + tail
    if a < 3:
        # X_b X_a with b > a
        return [(swapped, Q_INV)]
    if b >= 3:
        # d_b d_a with b > a
        return [(swapped, Q)]
    i, j = a - 3, b  # derivative index, coordinate index (0-based)
    if i != j:
        return [(swapped, Q)]
    # diagonal pair d_i X_i
    out = [(head + tail, QScalar.one()), (swapped, QScalar.from_q_power(2))]
    qsq_minus_1 = QScalar.from_q_power(2) - QScalar.one()
    for k in range(i + 1, 3):
        out.append((head + (k, k + 3) + tail, qsq_minus_1))
    return out


def _rewrite_positions(word):
    return [p for p in range(len(word) - 1) if word[p] > word[p + 1]]


def rewrite_step(word, coeff) -> "NCPoly":
    """One rewrite at the leftmost out-of-order adjacent pair."""
    positions = _rewrite_positions(word)
    if not positions:
        raise NoRewriteApplicable(f"word {word_to_str(word)} is already normal")
    coeff = QScalar.coerce(coeff)
    terms = {}
    for new_word, factor in rewrite_at(word, positions[0]):
        _accumulate(terms, new_word, coeff * factor)
    return NCPoly(terms)


def _accumulate(terms, word, coeff):
    acc = terms.get(word, QScalar.zero()) + coeff
    if acc.is_zero():
        terms.pop(word, None)
    else:
        terms[word] = acc


def normalize(terms, strategy="leftmost", seed=None) -> "NCPoly":
    """Rewrite every word of the input to canonical form.

    terms may be an NCPoly or any mapping word -> coefficient.  strategy
    selects which out-of-order position is rewritten next ("leftmost",
    "rightmost", or "random" with the given seed); all strategies must
    agree on the result, which the confluence tests check.
    """
    if isinstance(terms, NCPoly):
        terms = terms.terms
    rng = random.Random(seed) if strategy == "random" else None
    done: dict = {}
    pending: dict = {}
    for word, coeff in terms.items():
        _accumulate(pending, tuple(word), QScalar.coerce(coeff))
    while pending:
        word, coeff = pending.popitem()
        positions = _rewrite_positions(word)
        if not positions:
            _accumulate(done, word, coeff)
            continue
        if strategy == "leftmost":
            pos = positions[0]
        elif strategy == "rightmost":
            pos = positions[-1]
        elif strategy == "random":
            pos = rng.choice(positions)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        for new_word, factor in rewrite_at(word, pos):
            _accumulate(pending, new_word, coeff * factor)
    return NCPoly(done)


class NCPoly:
    """Noncommutative polynomial in canonical form: map normal word -> QScalar.

    Construction does not rewrite; callers pass already-normal words or go
    through normalize()/nc_mul().  Zero coefficients are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for word, coeff in terms.items():
                word = tuple(word)
                if not is_normal(word):
                    raise ValueError(f"word {word_to_str(word)} is not normal")
                coeff = QScalar.coerce(coeff)
                if not coeff.is_zero():
                    clean[word] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("NCPoly is immutable")

    @staticmethod
    def zero() -> "NCPoly":
        return NCPoly()

    @staticmethod
    def one() -> "NCPoly":
        return NCPoly({(): QScalar.one()})

    @staticmethod
    def generator(code: int) -> "NCPoly":
        if not 0 <= code < N_GEN:
            raise ValueError(f"generator code {code} out of range")
        return NCPoly({(code,): QScalar.one()})

    @staticmethod
    def from_word(word, coeff=1) -> "NCPoly":
        """Single normal word with coefficient."""
        return NCPoly({tuple(word): QScalar.coerce(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            _accumulate(terms, word, coeff)
        return NCPoly(terms)

    def __sub__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, factor) -> "NCPoly":
        factor = QScalar.coerce(factor)
        if factor.is_zero():
            return NCPoly()
        return NCPoly({w: c * factor for w, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset((w, c) for w, c in self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "NCPoly(0)"
        parts = [f"({c!r})*{word_to_str(w)}" for w, c in sorted(self.terms.items())]
        return "NCPoly(" + " + ".join(parts) + ")"


def nc_mul(a: NCPoly, b: NCPoly) -> NCPoly:
    """Product in the algebra: concatenate, distribute, normalize."""
    raw: dict = {}
    for w1, c1 in a.terms.items():
        for w2, c2 in b.terms.items():
            _accumulate(raw, w1 + w2, c1 * c2)
    return normalize(raw)


@dataclass(frozen=True)
class RelationReport:
    name: str
    holds: bool
    residual: NCPoly

    def to_json(self):
        return {
            "name": self.name,
            "holds": self.holds,
            "residual": poly_to_json(self.residual),
        }


def check_relation(lhs: NCPoly, rhs: NCPoly, name="relation") -> RelationReport:
    """Decide lhs = rhs by canonical forms; failed checks keep the residual."""
    residual = normalize(lhs - rhs)
    return RelationReport(name=name, holds=residual.is_zero(), residual=residual)


def raw_defining_relations():
    """All 15 generator-pair relations as raw word sums, before rewriting.

    Each entry is (name, lhs, rhs) with both sides given as mappings from
    (possibly non-normal) words to QScalar coefficients, suitable for both
    symbolic normalization and term-by-term numeric application.
    """
    out = []
    qsq = QScalar.from_q_power(2)
    one = QScalar.one()
    for i in range(3):
        for j in range(i + 1, 3):
            out.append((
                f"X{i+1} X{j+1} = q X{j+1} X{i+1}",
                {(x_code(i + 1), x_code(j + 1)): one},
                {(x_code(j + 1), x_code(i + 1)): Q},
            ))
    for i in range(3):
        for j in range(i + 1, 3):
            out.append((
                f"d{i+1} d{j+1} = q^-1 d{j+1} d{i+1}",
                {(d_code(i + 1), d_code(j + 1)): one},
                {(d_code(j + 1), d_code(i + 1)): Q_INV},
            ))
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            out.append((
                f"d{i+1} X{j+1} = q X{j+1} d{i+1}",
                {(d_code(i + 1), x_code(j + 1)): one},
                {(x_code(j + 1), d_code(i + 1)): Q},
            ))
    for i in range(3):
        rhs = {(): one}
        for k in range(i + 1, 3):
            rhs[(x_code(k + 1), d_code(k + 1))] = qsq - one
        out.append((
            f"d{i+1} X{i+1} - q^2 X{i+1} d{i+1} = 1 + (q^2-1) sum",
            {(d_code(i + 1), x_code(i + 1)): one, (x_code(i + 1), d_code(i + 1)): -qsq},
            rhs,
        ))
    return out


def defining_relations():
    """The 15 relations with both sides brought to canonical form."""
    return [
        (name, normalize(lhs), normalize(rhs))
        for name, lhs, rhs in raw_defining_relations()
    ]


def y_generator(i: int, alpha) -> NCPoly:
    """Symplectic-style generators: y_1..y_3 are scaled derivatives in
    reversed order, y_4..y_6 are the coordinates.
    """
    alpha = QScalar.coerce(alpha)
    if i == 1:
        return NCPoly.generator(d_code(3)).scale(alpha * Q)
    if i == 2:
        return NCPoly.generator(d_code(2)).scale(alpha * QScalar.from_q_power(2))
    if i == 3:
        return NCPoly.generator(d_code(1)).scale(alpha * QScalar.from_q_power(3))
    if i in (4, 5, 6):
        return NCPoly.generator(x_code(i - 3))
    raise ValueError(f"y-generator index {i} out of range 1..6")


@dataclass(frozen=True)
class SymplecticPairing:
    """Pairing convention for the reduced symplectic identity.

    partner(j) = partner_offset - j, and the right-hand sum runs over
    y_k y_{partner_offset - k} for k < j.  The tested j values must keep
    every index inside 1..6.
    """

    name: str
    partner_offset: int
    js: tuple

    def partner(self, j: int) -> int:
        return self.partner_offset - j

    def validate(self):
        for j in self.js:
            for idx in (j, self.partner(j)):
                if not 1 <= idx <= 6:
                    raise ValueError(
                        f"pairing {self.name}: index {idx} escapes 1..6 at j={j}"
                    )


def literal_pairing() -> SymplecticPairing:
    """Partner 4-j; only j in 1..3 keeps indices in range."""
    return SymplecticPairing(name="literal-4-j", partner_offset=4, js=(1, 2, 3))


def alternative_pairing() -> SymplecticPairing:
    """Partner 7-j; well-defined for all j in 1..6."""
    return SymplecticPairing(name="alternative-7-j", partner_offset=7, js=(1, 2, 3, 4, 5, 6))


def check_reduced_symplectic(pairing: SymplecticPairing, alpha) -> list:
    """Evaluate y_p(j) y_j - q^-2 y_j y_p(j) against
    -q^-j alpha (q^-2 - 1) sum_{k<j} q^{k-j} y_k y_p(k) for each tested j.

    Returns one RelationReport per j.  Reports record pass or fail with the
    full residual; callers decide what to make of them.
    """
    pairing.validate()
    alpha = QScalar.coerce(alpha)
    q_m2 = QScalar.from_q_power(-2)
    reports = []
    for j in pairing.js:
        p = pairing.partner(j)
        yj = y_generator(j, alpha)
        yp = y_generator(p, alpha)
        lhs = nc_mul(yp, yj) - nc_mul(yj, yp).scale(q_m2)
        rhs = NCPoly.zero()
        for k in range(1, j):
            term = nc_mul(y_generator(k, alpha), y_generator(pairing.partner(k), alpha))
            rhs = rhs + term.scale(QScalar.from_q_power(k - j))
        rhs = rhs.scale(alpha * (q_m2 - QScalar.one()) * QScalar.from_q_power(-j)).scale(-1)
        reports.append(check_relation(lhs, rhs, name=f"{pairing.name} j={j} partner={p}"))
    return reports


def word_to_str(word) -> str:
    """Canonical text form, e.g. "X1^2 X3 d2"; the empty word prints as "1"."""
    if not word:
        return "1"
    parts = []
    pos = 0
    while pos < len(word):
        run = 1
        while pos + run < len(word) and word[pos + run] == word[pos]:
            run += 1
        name = GEN_NAMES[word[pos]]
        parts.append(name if run == 1 else f"{name}^{run}")
        pos += run
    return " ".join(parts)


def poly_to_json(p: NCPoly) -> list:
    """Canonical JSON form: sorted list of {word, coeff rows}."""
    return [
        {"word": word_to_str(w), "coeff": p.terms[w].coeff_rows()}
        for w in sorted(p.terms)
    ]
