"""Truncated oscillator-basis matrices for the effective Hamiltonian.

The basis-independent first-order operator comes from the composed
route in the effective module.  Every polynomial-coefficient term is
assembled as a product of band matrices built above the cutoff and
cropped afterwards, so all stored elements equal their infinite-basis
values; truncation only limits which states exist, never corrupts an
element.  The zeroth-order part is written directly as the exact
diagonal n1+n2+n3+3/2.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iter_product

import numpy as np

from .effective import hamiltonian_operator
from .gaussian import DiffOp3
from .realization import MODES

COUPLING_TOL = 1e-12
INTERIOR_MARGIN = 4  # highest per-axis degree of any first-order term

CONJECTURED_OFFSETS = frozenset(iter_product((-1, 0, 1), repeat=3))


class FockBasis:
    """Ordered product basis |n1,n2,n3> with each n_j <= n_max."""

    def __init__(self, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        self.n_max = n_max
        self.dim = (n_max + 1) ** 3

    def index(self, state) -> int:
        n1, n2, n3 = state
        for n in (n1, n2, n3):
            if not 0 <= n <= self.n_max:
                raise ValueError(f"state {state} outside cutoff {self.n_max}")
        side = self.n_max + 1
        return (n1 * side + n2) * side + n3

    def state(self, index: int) -> tuple:
        side = self.n_max + 1
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside dimension {self.dim}")
        n1, rest = divmod(index, side * side)
        n2, n3 = divmod(rest, side)
        return (n1, n2, n3)

    def states(self):
        side = self.n_max + 1
        return iter_product(range(side), repeat=3)

    def interior_states(self, margin: int = INTERIOR_MARGIN):
        top = self.n_max - margin
        return iter_product(range(top + 1), repeat=3)


def ladder_matrices(n_max: int):
    """Single-mode position and derivative matrices on n <= n_max.

    The position matrix is real symmetric with <n-1|x|n> = sqrt(n/2);
    the derivative matrix is real antisymmetric with the same
    superdiagonal and the negated subdiagonal.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    side = n_max + 1
    x = np.zeros((side, side))
    d = np.zeros((side, side))
    for n in range(1, side):
        root = math.sqrt(n / 2.0)
        x[n - 1, n] = root
        x[n, n - 1] = root
        d[n - 1, n] = root
        d[n, n - 1] = -root
    return x, d


@lru_cache(maxsize=None)
def _axis_term_matrix(n_max: int, power: int, deriv: int):
    """Cropped matrix of u^power d^deriv, exact on all stored elements.

    Built at cutoff n_max + power + deriv so no intermediate state in
    the band product is lost, then cropped back.
    """
    ext = n_max + power + deriv
    if ext < 1:
        ext = 1
    x, d = ladder_matrices(ext)
    m = np.eye(ext + 1)
    for _ in range(deriv):
        m = d @ m
    for _ in range(power):
        m = x @ m
    m = m[: n_max + 1, : n_max + 1].copy()
    m.flags.writeable = False
    return m


def operator_matrix(op: DiffOp3, n_max: int) -> np.ndarray:
    """Dense matrix of a theta-free polynomial-coefficient operator."""
    side = n_max + 1
    out = np.zeros((side ** 3, side ** 3), dtype=complex)
    for (dx, dy, dz), poly in op.terms.items():
        for (a, b, c, t), coeff in poly.terms.items():
            if t != 0:
                raise ValueError(
                    "operator still carries theta; take a theta slice first"
                )
            m1 = _axis_term_matrix(n_max, a, dx)
            m2 = _axis_term_matrix(n_max, b, dy)
            m3 = _axis_term_matrix(n_max, c, dz)
            out += complex(coeff) * np.kron(m1, np.kron(m2, m3))
    return out


def build_h1_matrix(n_max: int, mode: str) -> np.ndarray:
    """Matrix of the first-order operator (the theta coefficient)."""
    return operator_matrix(hamiltonian_operator(mode).theta_slice(1), n_max)


def h0_diagonal(n_max: int) -> np.ndarray:
    basis = FockBasis(n_max)
    return np.array([sum(n) + 1.5 for n in basis.states()])


@dataclass(frozen=True)
class FockOperator:
    """Dense operator over the truncated basis with cutoff metadata."""

    matrix: np.ndarray
    n_max: int
    theta: float
    mode: str

    @property
    def basis(self) -> FockBasis:
        return FockBasis(self.n_max)

    def hermitian_part(self) -> np.ndarray:
        return (self.matrix + self.matrix.conj().T) / 2

    def antihermitian_generator(self) -> np.ndarray:
        """H_I in the exact split H = H_R + i H_I, both Hermitian."""
        return (self.matrix - self.matrix.conj().T) / 2j

    def element(self, bra, ket) -> complex:
        basis = self.basis
        return complex(self.matrix[basis.index(bra), basis.index(ket)])

    def save_binary(self, path) -> None:
        """JSON header line, newline, then row-major complex doubles."""
        header = {
            "dimension": int(self.matrix.shape[0]),
            "n_max": self.n_max,
            "theta": self.theta,
            "mode": self.mode,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode())
            fh.write(b"\n")
            fh.write(np.ascontiguousarray(self.matrix, dtype=complex).tobytes())

    @staticmethod
    def load_binary(path) -> "FockOperator":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            raw = fh.read()
        dim = header["dimension"]
        matrix = np.frombuffer(raw, dtype=complex).reshape(dim, dim)
        return FockOperator(
            matrix=matrix,
            n_max=header["n_max"],
            theta=header["theta"],
            mode=header["mode"],
        )

    def save_csv(self, path, tol: float = COUPLING_TOL) -> None:
        """Nonzero elements for small cutoffs, with provenance columns."""
        basis = self.basis
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["n1", "n2", "n3", "m1", "m2", "m3", "re", "im",
                 "mode", "theta", "n_max"]
            )
            for i in range(self.matrix.shape[0]):
                bra = basis.state(i)
                for j in range(self.matrix.shape[1]):
                    el = self.matrix[i, j]
                    if abs(el) <= tol:
                        continue
                    ket = basis.state(j)
                    writer.writerow(
                        [*bra, *ket, repr(el.real), repr(el.imag),
                         self.mode, repr(self.theta), self.n_max]
                    )


def build_h_eff(n_max: int, theta: float, mode: str) -> FockOperator:
    """Effective Hamiltonian H0 + theta*H1 over the truncated basis."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    matrix = np.diag(h0_diagonal(n_max)).astype(complex)
    if theta != 0.0:
        matrix = matrix + theta * build_h1_matrix(n_max, mode)
    return FockOperator(matrix=matrix, n_max=n_max, theta=theta, mode=mode)


@dataclass(frozen=True)
class SparsityReport:
    """Transition offsets of the first-order operator between interior
    states, with magnitudes and the comparison against the conjectured
    nearest-neighbor mixing set."""

    n_max: int
    tol: float
    margin: int
    offsets: tuple
    max_magnitude: dict
    inside_conjecture: tuple
    outside_conjecture: tuple
    weight_inside: float
    weight_outside: float

    @property
    def outside_weight_fraction(self) -> float:
        total = self.weight_inside + self.weight_outside
        return self.weight_outside / total if total else 0.0

    def to_json(self):
        return {
            "n_max": self.n_max,
            "tol": self.tol,
            "margin": self.margin,
            "offsets": [list(o) for o in self.offsets],
            "max_magnitude": {
                ",".join(map(str, k)): v for k, v in self.max_magnitude.items()
            },
            "inside_conjecture": [list(o) for o in self.inside_conjecture],
            "outside_conjecture": [list(o) for o in self.outside_conjecture],
            "contained_in_conjecture": not self.outside_conjecture,
            "weight_inside": self.weight_inside,
            "weight_outside": self.weight_outside,
            "outside_weight_fraction": self.outside_weight_fraction,
        }


def sparsity_pattern(
    h1: np.ndarray,
    basis: FockBasis,
    tol: float = COUPLING_TOL,
    margin: int = INTERIOR_MARGIN,
) -> SparsityReport:
    """Scan interior-to-interior couplings for their offset set.

    Both bra and ket stay at least margin below the cutoff so every
    offset the operator can produce is visible.  Weights are summed
    squared magnitudes, split by membership in the conjectured
    {-1,0,1}^3 offset set.
    """
    if basis.n_max - margin < 0:
        raise ValueError("cutoff too small for the interior margin")
    offsets = {}
    weight_inside = 0.0
    weight_outside = 0.0
    interior = list(basis.interior_states(margin))
    for ket in interior:
        j = basis.index(ket)
        for bra in interior:
            el = h1[basis.index(bra), j]
            mag = abs(el)
            if mag <= tol:
                continue
            delta = tuple(b - k for b, k in zip(bra, ket))
            prev = offsets.get(delta, 0.0)
            if mag > prev:
                offsets[delta] = mag
            if delta in CONJECTURED_OFFSETS:
                weight_inside += mag * mag
            else:
                weight_outside += mag * mag
    ordered = tuple(sorted(offsets))
    return SparsityReport(
        n_max=basis.n_max,
        tol=tol,
        margin=margin,
        offsets=ordered,
        max_magnitude={o: offsets[o] for o in ordered},
        inside_conjecture=tuple(o for o in ordered if o in CONJECTURED_OFFSETS),
        outside_conjecture=tuple(
            o for o in ordered if o not in CONJECTURED_OFFSETS
        ),
        weight_inside=weight_inside,
        weight_outside=weight_outside,
    )


def mixing_amplitudes(
    h1: np.ndarray, basis: FockBasis, source, tol: float = COUPLING_TOL
) -> dict:
    """Per-target amplitudes <target|H1|source> above tolerance."""
    j = basis.index(source)
    out = {}
    for i in range(h1.shape[0]):
        el = h1[i, j]
        if abs(el) > tol:
            out[basis.state(i)] = complex(el)
    return out


def energy_shift(n, theta: float, mode: str, n_max: int = None) -> complex:
    """First-order shift theta*<n|H1|n>, linear in theta by construction.

    The state must sit at least the interior margin below the cutoff;
    by default the cutoff is chosen minimally around the state.
    """
    n = tuple(int(v) for v in n)
    if n_max is None:
        n_max = max(n) + INTERIOR_MARGIN
    if any(v > n_max - INTERIOR_MARGIN for v in n) or min(n) < 0:
        raise ValueError(
            f"state {n} too close to cutoff {n_max} for an exact shift"
        )
    h1 = build_h1_matrix(n_max, mode)
    basis = FockBasis(n_max)
    i = basis.index(n)
    return theta * complex(h1[i, i])


@dataclass(frozen=True)
class ConvergenceTable:
    """A quantity evaluated over increasing cutoffs, with successive
    absolute differences."""

    label: str
    n_max_values: tuple
    values: tuple
    diffs: tuple

    def to_json(self):
        return {
            "label": self.label,
            "n_max": list(self.n_max_values),
            "values": [[v.real, v.imag] for v in self.values],
            "successive_diffs": list(self.diffs),
        }


def cutoff_convergence(quantity, n_max_values, label: str = "") -> ConvergenceTable:
    """Evaluate quantity(n_max) over strictly increasing cutoffs."""
    n_max_values = tuple(int(v) for v in n_max_values)
    if len(n_max_values) < 2:
        raise ValueError("need at least two cutoffs")
    if any(b <= a for a, b in zip(n_max_values, n_max_values[1:])):
        raise ValueError("cutoffs must be strictly increasing")
    values = tuple(complex(quantity(v)) for v in n_max_values)
    diffs = tuple(
        abs(b - a) for a, b in zip(values, values[1:])
    )
    return ConvergenceTable(
        label=label, n_max_values=n_max_values, values=values, diffs=diffs
    )
