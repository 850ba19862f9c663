import math
from itertools import product as iter_product

import numpy as np
import pytest

from qweyl.effective import ground_state_energy, hamiltonian_operator
from qweyl.fock import (
    CONJECTURED_OFFSETS,
    FockBasis,
    FockOperator,
    build_h1_matrix,
    build_h_eff,
    cutoff_convergence,
    energy_shift,
    h0_diagonal,
    ladder_matrices,
    mixing_amplitudes,
    operator_matrix,
    sparsity_pattern,
)
from qweyl.quadrature import element_1d, element_3d, hermite_prefactor


def states_up_to(total: int):
    return [
        (n1, n2, n3)
        for n1 in range(total + 1)
        for n2 in range(total + 1)
        for n3 in range(total + 1)
        if n1 + n2 + n3 <= total
    ]


def test_basis_roundtrip():
    basis = FockBasis(4)
    assert basis.dim == 125
    for i in range(basis.dim):
        assert basis.index(basis.state(i)) == i
    assert basis.index((0, 0, 0)) == 0
    assert basis.state(basis.dim - 1) == (4, 4, 4)
    with pytest.raises(ValueError):
        basis.index((5, 0, 0))
    with pytest.raises(ValueError):
        basis.state(basis.dim)
    with pytest.raises(ValueError):
        FockBasis(0)


def test_ladder_matrix_elements():
    x, d = ladder_matrices(5)
    assert x[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert np.array_equal(x, x.T)
    assert np.array_equal(d, -d.T)
    assert d[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert d[1, 0] == pytest.approx(-1 / math.sqrt(2))
    with pytest.raises(ValueError):
        ladder_matrices(0)


def test_canonical_commutator_on_interior():
    x, d = ladder_matrices(7)
    comm = d @ x - x @ d
    interior = comm[:7, :7]
    assert np.max(np.abs(interior - np.eye(7))) < 1e-14
    # the last diagonal entry is a pure truncation artifact
    assert comm[7, 7] == pytest.approx(-7.0)


def test_h_eff_at_theta_zero_is_exactly_diagonal():
    h = build_h_eff(4, 0.0, "paper")
    want = np.diag(h0_diagonal(4)).astype(complex)
    assert np.array_equal(h.matrix, want)
    assert h.matrix[0, 0] == 1.5
    basis = h.basis
    n = (2, 1, 0)
    assert h.matrix[basis.index(n), basis.index(n)] == 4.5


def test_h0_through_ladder_route_is_diagonal():
    # composing the theta^0 operator from band products must agree with
    # the exact diagonal to rounding
    got = operator_matrix(hamiltonian_operator("paper").theta_slice(0), 4)
    want = np.diag(h0_diagonal(4))
    assert np.max(np.abs(got - want)) < 1e-12


def test_operator_matrix_rejects_theta_terms():
    with pytest.raises(ValueError):
        operator_matrix(hamiltonian_operator("paper"), 2)


def test_build_h_eff_validation():
    with pytest.raises(ValueError):
        build_h_eff(4, 0.01, "classical")
    with pytest.raises(ValueError):
        build_h_eff(4, float("nan"), "paper")


def test_ground_state_first_order_element():
    h1 = build_h1_matrix(6, "paper")
    got = h1[0, 0]
    # cross-check against the symbolic Gaussian integral of the same
    # operator route
    symbolic = complex(
        ground_state_energy("paper").theta_slice(1).terms[(0, 0, 0, 0)]
    )
    assert abs(got - symbolic) < 1e-12
    assert abs(got - (-1.5j)) < 1e-12
    # the imaginary part is genuinely nonzero: the first-order operator
    # drains ground-state probability
    assert got.imag < -1


def test_frozen_interior_elements():
    h1 = build_h1_matrix(6, "paper")
    basis = FockBasis(6)
    got = h1[basis.index((2, 0, 0)), basis.index((0, 0, 0))]
    assert abs(got - (-3 * math.sqrt(2) / 4) * 1j) < 1e-12
    # parity forbids odd transfer
    assert h1[basis.index((0, 0, 0)), basis.index((1, 0, 0))] == 0
    assert h1[basis.index((1, 1, 1)), basis.index((0, 0, 0))] == 0


def test_hermitian_split_is_exact():
    h = build_h_eff(4, 0.01, "paper")
    h_r = h.hermitian_part()
    h_i = h.antihermitian_generator()
    assert np.array_equal(h_r, h_r.conj().T)
    assert np.array_equal(h_i, h_i.conj().T)
    recon = h_r + 1j * h_i
    assert np.max(np.abs(recon - h.matrix)) < 1e-15


def test_ladder_route_agrees_with_quadrature():
    op1 = hamiltonian_operator("paper").theta_slice(1)
    h1 = build_h1_matrix(6, "paper")
    basis = FockBasis(6)
    for bra in states_up_to(3):
        for ket in states_up_to(3):
            lm = h1[basis.index(bra), basis.index(ket)]
            qd = element_3d(op1, bra, ket)
            assert abs(lm - qd) < 1e-10, (bra, ket)


def test_hermite_prefactors_normalized():
    from numpy.polynomial.hermite import hermgauss

    nodes, weights = hermgauss(48)
    for n in (0, 1, 4, 9):
        p = hermite_prefactor(n)
        assert np.dot(weights, p(nodes) ** 2) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        hermite_prefactor(-1)


def test_quadrature_identity_and_position():
    assert element_1d(2, 0, 0, 2) == pytest.approx(1.0, abs=1e-12)
    assert element_1d(2, 0, 0, 3) == pytest.approx(0.0, abs=1e-13)
    assert element_1d(0, 1, 0, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert element_1d(0, 0, 1, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_sparsity_offsets_even_and_axis_aligned():
    basis = FockBasis(6)
    rep = sparsity_pattern(build_h1_matrix(6, "paper"), basis)
    singles = {
        tuple(s * v for v in axis)
        for axis in ((1, 0, 0), (0, 1, 0), (0, 0, 1))
        for s in (-2, 2)
    }
    assert set(rep.offsets) == singles | {(0, 0, 0)}
    assert all(all(v % 2 == 0 for v in off) for off in rep.offsets)
    assert rep.inside_conjecture == ((0, 0, 0),)
    assert rep.outside_conjecture == tuple(sorted(singles))
    assert 0.0 < rep.outside_weight_fraction < 1.0


def test_sparsity_no_odd_offsets():
    # single-step and triple-step transfers are absent: the cubic terms
    # cancel pairwise, leaving only even ladder moves
    rep = sparsity_pattern(build_h1_matrix(6, "paper"), FockBasis(6))
    assert (1, 0, 0) not in rep.offsets
    assert (3, 0, 0) not in rep.offsets
    assert (-1, 0, 0) not in rep.offsets


def test_sparsity_at_theta_zero():
    h = build_h_eff(6, 0.0, "paper")
    rep = sparsity_pattern(h.matrix, h.basis)
    assert rep.offsets == ((0, 0, 0),)
    assert rep.outside_weight_fraction == 0.0


def test_sparsity_cutoff_stable():
    rep6 = sparsity_pattern(build_h1_matrix(6, "paper"), FockBasis(6))
    rep8 = sparsity_pattern(build_h1_matrix(8, "paper"), FockBasis(8))
    assert rep6.offsets == rep8.offsets
    with pytest.raises(ValueError):
        sparsity_pattern(build_h1_matrix(2, "paper"), FockBasis(2))


def test_sparsity_report_json():
    rep = sparsity_pattern(build_h1_matrix(6, "paper"), FockBasis(6))
    doc = rep.to_json()
    assert doc["contained_in_conjecture"] is False
    assert doc["outside_weight_fraction"] == rep.outside_weight_fraction
    assert [0, 0, 0] in doc["offsets"]


def test_parity_consistency_computed_from_operator():
    # per-axis degree parity of every generating term, computed from the
    # symbolic operator itself
    op1 = hamiltonian_operator("paper").theta_slice(1)
    parities = set()
    for (dx, dy, dz), poly in op1.terms.items():
        for (a, b, c, _t) in poly.terms:
            parities.add(((a + dx) % 2, (b + dy) % 2, (c + dz) % 2))
    assert parities == {(0, 0, 0)}
    # matrix couplings must respect exactly that parity per axis
    h1 = build_h1_matrix(5, "paper")
    basis = FockBasis(5)
    rows, cols = np.nonzero(np.abs(h1) > 1e-12)
    for i, j in zip(rows, cols):
        bra, ket = basis.state(i), basis.state(j)
        assert all((b - k) % 2 == 0 for b, k in zip(bra, ket))


def test_mixing_amplitudes_from_ground_state():
    basis = FockBasis(6)
    h1 = build_h1_matrix(6, "paper")
    amps = mixing_amplitudes(h1, basis, (0, 0, 0))
    assert set(amps) == {(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)}
    assert amps[(2, 0, 0)] == pytest.approx(-3 * math.sqrt(2) / 4 * 1j)
    op1 = hamiltonian_operator("paper").theta_slice(1)
    for target, amp in amps.items():
        assert amp == pytest.approx(
            element_3d(op1, target, (0, 0, 0)), abs=1e-10
        )
    # the conjectured nearest-neighbor targets receive nothing
    for off in sorted(CONJECTURED_OFFSETS):
        if off != (0, 0, 0):
            assert tuple(off) not in amps


def test_energy_shift_values_and_linearity():
    s1 = energy_shift((0, 0, 0), 0.01, "paper")
    assert s1 == pytest.approx(-0.015j)
    assert energy_shift((0, 0, 0), 0.02, "paper") == pytest.approx(2 * s1)
    # the shift of the ground state is purely imaginary and nonzero
    assert s1.real == pytest.approx(0.0, abs=1e-14)
    assert s1.imag != 0.0
    with pytest.raises(ValueError):
        energy_shift((8, 0, 0), 0.01, "paper", n_max=10)
    with pytest.raises(ValueError):
        energy_shift((-1, 0, 0), 0.01, "paper")


def test_energy_shift_mode_dependence():
    p = energy_shift((0, 0, 0), 0.01, "paper")
    r = energy_shift((0, 0, 0), 0.01, "rederived")
    assert r == pytest.approx(-0.03j)
    assert r != p


def test_cutoff_convergence_of_interior_element():
    def element(n_max):
        basis = FockBasis(n_max)
        h1 = build_h1_matrix(n_max, "paper")
        return h1[basis.index((2, 0, 0)), basis.index((0, 0, 0))]

    table = cutoff_convergence(element, (6, 8), label="cubic transfer")
    assert table.diffs == (0.0,)
    assert table.values[0] == pytest.approx(-3 * math.sqrt(2) / 4 * 1j)
    doc = table.to_json()
    assert doc["label"] == "cubic transfer"
    assert doc["successive_diffs"] == [0.0]


def test_cutoff_convergence_validation():
    with pytest.raises(ValueError):
        cutoff_convergence(lambda n: 0.0, (6,))
    with pytest.raises(ValueError):
        cutoff_convergence(lambda n: 0.0, (8, 6))


def test_h0_spectrum_exact_at_every_cutoff():
    for n_max in (2, 4):
        h = build_h_eff(n_max, 0.0, "paper")
        eigs = np.sort(np.linalg.eigvalsh(h.matrix.real))
        want = np.sort(h0_diagonal(n_max))
        assert np.array_equal(eigs, want)


def test_binary_roundtrip(tmp_path):
    h = build_h_eff(3, 0.01, "paper")
    path = tmp_path / "h_eff.bin"
    h.save_binary(path)
    back = FockOperator.load_binary(path)
    assert np.array_equal(back.matrix, h.matrix)
    assert back.n_max == 3 and back.theta == 0.01 and back.mode == "paper"


def test_csv_export_deterministic(tmp_path):
    h = build_h_eff(2, 0.01, "paper")
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    h.save_csv(p1)
    h.save_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "n1,n2,n3,m1,m2,m3,re,im,mode,theta,n_max"
    assert all(line.endswith(",paper,0.01,2") for line in lines[1:])
