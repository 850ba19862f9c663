"""Evolution tests: closed-form decay oracle, unitarity in the
undeformed limit, integrator cross-validation, the norm-flow identity
dP/dt = 2<H_I>, and the truncation guard rails."""

import warnings

import numpy as np
import pytest

from qweyl.dynamics import (
    EDGE_OCCUPATION_LIMIT,
    GainLossMap,
    decay_operator,
    export_trajectory_csv,
    gain_loss_map,
    initial_norm_rate,
    norm_flow_check,
    propagate,
    trajectory_metadata,
)
from qweyl.fock import FockBasis, FockOperator, build_h1_matrix, build_h_eff


def basis_vector(basis, state):
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(state)] = 1.0
    return v


def ground(n_max):
    basis = FockBasis(n_max)
    return basis, basis_vector(basis, (0, 0, 0))


class TestClosedFormOracles:
    def test_decay_matches_exponential_law(self):
        # diagonal sink: P(t) = exp(-2*alpha*t) exactly
        basis = FockBasis(3)
        psi0 = basis_vector(basis, (1, 1, 0))
        for alpha in (0.1, 0.5, 1.0):
            h = decay_operator(3, alpha)
            traj = propagate(h, psi0, T=5.0, dt=1e-3)
            exact = np.exp(-2.0 * alpha * traj.times)
            rel = np.max(np.abs(traj.norms - exact) / exact)
            assert rel <= 1e-8

    def test_decay_operator_structure(self):
        h = decay_operator(2, 0.7)
        basis = FockBasis(2)
        gen = h.antihermitian_generator()
        assert np.array_equal(gen, -0.7 * np.eye(basis.dim))
        herm = h.hermitian_part()
        expected = np.diag([sum(basis.state(i)) + 1.5 for i in range(basis.dim)])
        assert np.array_equal(herm, expected)

    def test_unitarity_in_undeformed_limit(self):
        h = build_h_eff(4, 0.0, "paper")
        _, psi0 = ground(4)
        traj = propagate(h, psi0, T=10.0, dt=1e-3)
        assert np.max(np.abs(traj.norms - 1.0)) <= 1e-10

    def test_occupations_constant_in_undeformed_limit(self):
        h = build_h_eff(3, 0.0, "paper")
        basis = FockBasis(3)
        psi0 = (basis_vector(basis, (0, 0, 0)) + basis_vector(basis, (1, 1, 0)))
        psi0 /= np.linalg.norm(psi0)
        traj = propagate(h, psi0, T=2.0, dt=1e-2)
        for state in ((0, 0, 0), (1, 1, 0), (2, 0, 0)):
            occ = traj.occupation(state)
            assert np.max(np.abs(occ - occ[0])) <= 1e-12
        # the state still acquires relative phase
        assert np.max(np.abs(traj.final_state - psi0)) > 0.1


class TestIntegrators:
    def test_methods_agree(self):
        h = build_h_eff(4, 0.01, "paper")
        _, psi0 = ground(4)
        ta = propagate(h, psi0, T=1.0, dt=1e-3, method="matrix-exponential")
        tb = propagate(h, psi0, T=1.0, dt=1e-3, method="fourth-order-explicit")
        assert abs(np.linalg.norm(ta.final_state) - np.linalg.norm(tb.final_state)) <= 1e-6
        assert np.max(np.abs(ta.final_state - tb.final_state)) <= 1e-9

    def test_explicit_step_limit_enforced(self):
        h = build_h_eff(4, 0.01, "paper")
        _, psi0 = ground(4)
        with pytest.raises(ValueError, match="stability margin"):
            propagate(h, psi0, T=1.0, dt=0.1, method="fourth-order-explicit")

    def test_propagate_validation(self):
        h = build_h_eff(2, 0.0, "paper")
        basis, psi0 = ground(2)
        with pytest.raises(ValueError, match="method"):
            propagate(h, psi0, T=1.0, dt=0.1, method="euler")
        with pytest.raises(ValueError, match="positive"):
            propagate(h, psi0, T=-1.0, dt=0.1)
        with pytest.raises(ValueError, match="positive"):
            propagate(h, psi0, T=1.0, dt=0.0)
        with pytest.raises(ValueError, match="multiple"):
            propagate(h, psi0, T=1.0, dt=0.3)
        with pytest.raises(ValueError, match="unit-normalized"):
            propagate(h, 2.0 * psi0, T=1.0, dt=0.1)
        with pytest.raises(ValueError, match="dimension"):
            propagate(h, np.ones(3, dtype=complex), T=1.0, dt=0.1)

    def test_time_grid_uniform(self):
        h = build_h_eff(2, 0.0, "paper")
        _, psi0 = ground(2)
        traj = propagate(h, psi0, T=1.0, dt=0.25)
        assert np.array_equal(traj.times, np.array([0.0, 0.25, 0.5, 0.75, 1.0]))


class TestNormFlow:
    def test_flow_identity_deformed(self):
        h = build_h_eff(4, 0.01, "paper")
        _, psi0 = ground(4)
        traj = propagate(h, psi0, T=1.0, dt=1e-3)
        assert norm_flow_check(traj, h) <= 1e-6

    def test_flow_identity_decay(self):
        # centered differences leave an O(dt^2) floor, well under 1e-6
        h = decay_operator(3, 0.5)
        basis = FockBasis(3)
        traj = propagate(h, basis_vector(basis, (0, 0, 0)), T=2.0, dt=1e-3)
        assert norm_flow_check(traj, h) <= 1e-6

    def test_flow_flat_for_hermitian(self):
        h = build_h_eff(3, 0.0, "paper")
        _, psi0 = ground(3)
        traj = propagate(h, psi0, T=1.0, dt=1e-2)
        assert norm_flow_check(traj, h) <= 1e-10
        gen = h.antihermitian_generator()
        assert np.max(np.abs(traj.expectation_series(gen))) <= 1e-12

    def test_initial_rate_matches_generator_expectation(self):
        # ground-state loss rate: 2 * theta * Im<000|H1|000> = -3 * theta
        theta = 0.01
        h = build_h_eff(6, theta, "paper")
        _, psi0 = ground(6)
        traj = propagate(h, psi0, T=0.05, dt=1e-3)
        rate = initial_norm_rate(traj)
        expected = 2.0 * (psi0.conj() @ (h.antihermitian_generator() @ psi0)).real
        assert abs(expected - (-3.0 * theta)) <= 1e-12
        assert abs(rate - expected) <= 1e-6

    def test_short_trajectories_rejected(self):
        h = build_h_eff(2, 0.0, "paper")
        _, psi0 = ground(2)
        traj = propagate(h, psi0, T=0.1, dt=0.1)
        with pytest.raises(ValueError, match="three"):
            norm_flow_check(traj, h)
        with pytest.raises(ValueError, match="three"):
            initial_norm_rate(traj)


class TestTransfer:
    def test_short_time_rates_follow_matrix_elements(self):
        # first-order perturbation theory: occ(m) ~ |theta*<m|H1|n>|^2 t^2
        theta = 0.01
        h = build_h_eff(6, theta, "paper")
        basis = FockBasis(6)
        psi0 = basis_vector(basis, (1, 0, 0))
        traj = propagate(h, psi0, T=0.01, dt=1e-3)
        m1 = build_h1_matrix(6, "paper")
        col = basis.index((1, 0, 0))
        t = traj.times[-1]
        for target in ((3, 0, 0), (1, 2, 0), (1, 0, 2)):
            occ = traj.occupation(target)[-1]
            predicted = (theta * abs(m1[basis.index(target), col]) * t) ** 2
            assert occ == pytest.approx(predicted, rel=5e-3)

    def test_transfer_respects_coupling_pattern(self):
        h = build_h_eff(6, 0.01, "paper")
        basis = FockBasis(6)
        _, psi0 = ground(6)
        traj = propagate(h, psi0, T=0.01, dt=1e-3)
        # parity-forbidden states never populate
        for target in ((1, 0, 0), (1, 1, 0), (1, 1, 1)):
            assert np.max(traj.occupation(target)) == 0.0
        # even states two hops away stay below the direct-coupling scale
        for target in ((4, 0, 0), (2, 2, 0)):
            assert np.max(traj.occupation(target)) <= 1e-10
        # directly coupled states do populate
        assert traj.occupation((2, 0, 0))[-1] > 1e-9

    def test_gain_loss_map_ground_state(self):
        h = build_h_eff(6, 0.01, "paper")
        _, psi0 = ground(6)
        traj = propagate(h, psi0, T=0.1, dt=1e-3)
        tracked = [(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 0, 0)]
        gmap = gain_loss_map(traj, tracked)
        assert isinstance(gmap, GainLossMap)
        assert gmap.net_change[(0, 0, 0)] < 0.0
        for target in ((2, 0, 0), (0, 2, 0), (0, 0, 2)):
            assert gmap.net_change[target] > 0.0
        assert gmap.net_change[(1, 0, 0)] == 0.0
        assert (0, 0, 0) in gmap.losing()
        assert (2, 0, 0) in gmap.gaining()
        payload = gmap.to_json()
        assert "0,0,0" in payload["net_change"]
        assert [2, 0, 0] in payload["gaining"]

    def test_gain_loss_map_flat_when_undeformed(self):
        h = build_h_eff(3, 0.0, "paper")
        _, psi0 = ground(3)
        traj = propagate(h, psi0, T=1.0, dt=1e-2)
        gmap = gain_loss_map(traj, [(0, 0, 0), (2, 0, 0)])
        assert gmap.net_change[(0, 0, 0)] == pytest.approx(0.0, abs=1e-12)
        assert gmap.gaining(tol=1e-12) == []
        assert gmap.losing(tol=1e-12) == []


class TestGuardRails:
    def test_edge_abort_flags_and_truncates(self):
        # at n_max=2 the ground state couples straight into the cutoff edge
        h = build_h_eff(2, 0.5, "paper")
        _, psi0 = ground(2)
        with pytest.warns(RuntimeWarning, match="edge occupation"):
            traj = propagate(h, psi0, T=1.0, dt=1e-3)
        assert traj.edge_aborted
        assert len(traj.times) < 1001
        edge_final = max(
            traj.occupation(s)[-1] for s in ((2, 0, 0), (0, 2, 0), (0, 0, 2))
        )
        assert edge_final > EDGE_OCCUPATION_LIMIT

    def test_edge_abort_on_initial_state(self):
        h = build_h_eff(2, 0.0, "paper")
        basis = FockBasis(2)
        psi0 = basis_vector(basis, (2, 2, 2))
        with pytest.warns(RuntimeWarning, match="initial state"):
            traj = propagate(h, psi0, T=1.0, dt=0.1)
        assert traj.edge_aborted
        assert len(traj.times) == 1

    def test_non_finite_amplitudes_raise(self):
        basis = FockBasis(2)
        grow = FockOperator(
            matrix=np.diag(np.full(basis.dim, 1000.0j)),
            n_max=2,
            theta=0.0,
            mode="paper",
        )
        psi0 = basis_vector(basis, (0, 0, 0))
        with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
            warnings.simplefilter("ignore")
            with pytest.raises(RuntimeError, match="non-finite"):
                propagate(grow, psi0, T=2.0, dt=1.0)

    def test_no_renormalization(self):
        h = decay_operator(2, 1.0)
        basis = FockBasis(2)
        traj = propagate(h, basis_vector(basis, (0, 0, 0)), T=2.0, dt=1e-2)
        assert traj.norms[-1] < 0.05


class TestExport:
    def test_csv_roundtrip_deterministic(self, tmp_path):
        h = build_h_eff(4, 0.01, "paper")
        _, psi0 = ground(4)
        traj = propagate(h, psi0, T=0.1, dt=1e-2)
        tracked = [(0, 0, 0), (2, 0, 0)]
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        export_trajectory_csv(traj, h, path_a, states=tracked)
        export_trajectory_csv(traj, h, path_b, states=tracked)
        assert path_a.read_bytes() == path_b.read_bytes()
        lines = path_a.read_text().strip().splitlines()
        assert lines[0] == "t,p,re_h_i,occ_0_0_0,occ_2_0_0,mode,theta,n_max"
        assert len(lines) == len(traj.times) + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 1.0
        assert float(first[3]) == 1.0
        assert first[5:] == ["paper", "0.01", "4"]

    def test_metadata_fields(self):
        h = build_h_eff(3, 0.01, "rederived")
        _, psi0 = ground(3)
        traj = propagate(h, psi0, T=0.1, dt=1e-2)
        meta = trajectory_metadata(traj)
        assert meta["theta"] == 0.01
        assert meta["n_max"] == 3
        assert meta["dt"] == 1e-2
        assert meta["method"] == "matrix-exponential"
        assert meta["mode"] == "rederived"
        assert meta["edge_aborted"] is False
        assert meta["points"] == 11
        assert meta["t_final"] == pytest.approx(0.1)
