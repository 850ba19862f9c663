"""Non-Hermitian time evolution over the truncated basis.

Solves i dpsi/dt = H psi without renormalizing: the squared norm P(t)
is the observable, and its flow obeys dP/dt = 2<H_I> with H_I the
Hermitian generator of the anti-Hermitian part.  Probability pumped
into the cutoff edge is an artifact of truncation, so evolution stops
with a warning as soon as any edge state (some n_j = n_max) holds more
than a threshold occupation; non-finite amplitudes abort outright.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .fock import FockBasis, FockOperator, h0_diagonal

METHODS = ("matrix-exponential", "fourth-order-explicit")
EDGE_OCCUPATION_LIMIT = 1e-6
EXPLICIT_STEP_LIMIT = 0.1


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid evolution record: states stored as rows."""

    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    method: str
    dt: float
    n_max: int
    theta: float
    mode: str
    edge_aborted: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def occupation(self, state) -> np.ndarray:
        i = FockBasis(self.n_max).index(state)
        return np.abs(self.states[:, i]) ** 2

    def expectation_series(self, matrix: np.ndarray) -> np.ndarray:
        """<psi(t)|M|psi(t)> along the trajectory, batched."""
        acted = self.states @ matrix.T
        return np.sum(self.states.conj() * acted, axis=1)


def _edge_indices(basis: FockBasis) -> np.ndarray:
    return np.array(
        [i for i in range(basis.dim) if max(basis.state(i)) == basis.n_max]
    )


def propagate(
    h: FockOperator,
    psi0,
    T: float,
    dt: float,
    method: str = "matrix-exponential",
) -> Trajectory:
    """Evolve psi0 under i dpsi/dt = H psi on a uniform grid.

    The matrix-exponential method computes the step propagator once
    (closed form on a diagonal matrix, scaling-and-squaring otherwise)
    and reapplies it; the explicit method is classical four-stage
    Runge-Kutta and requires dt*|H| below the stability margin.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    T = float(T)
    dt = float(dt)
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a positive integer multiple of dt")
    matrix = h.matrix
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (matrix.shape[0],):
        raise ValueError("psi0 dimension does not match the operator")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-6:
        raise ValueError("psi0 must be unit-normalized")

    if method == "fourth-order-explicit":
        scale = dt * np.linalg.norm(matrix, np.inf)
        if scale > EXPLICIT_STEP_LIMIT:
            raise ValueError(
                f"dt*|H| = {scale:.3g} exceeds the explicit stability margin "
                f"{EXPLICIT_STEP_LIMIT}; shrink dt"
            )

        def step(v):
            k1 = -1j * (matrix @ v)
            k2 = -1j * (matrix @ (v + 0.5 * dt * k1))
            k3 = -1j * (matrix @ (v + 0.5 * dt * k2))
            k4 = -1j * (matrix @ (v + dt * k3))
            return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    else:
        diag = np.diag(matrix)
        if np.count_nonzero(matrix - np.diag(diag)) == 0:
            phases = np.exp(-1j * diag * dt)

            def step(v):
                return phases * v

        else:
            u = expm(-1j * dt * matrix)

            def step(v):
                return u @ v

    basis = FockBasis(h.n_max)
    edge = _edge_indices(basis)

    def edge_occupation(v):
        return float(np.max(np.abs(v[edge]) ** 2)) if edge.size else 0.0

    states = [psi0]
    aborted = False
    occ0 = edge_occupation(psi0)
    if occ0 > EDGE_OCCUPATION_LIMIT:
        warnings.warn(
            f"edge occupation {occ0:.3g} in the initial state exceeds "
            f"{EDGE_OCCUPATION_LIMIT}; not evolving",
            RuntimeWarning,
        )
        aborted = True
    else:
        v = psi0
        for k in range(n_steps):
            v = step(v)
            if not np.all(np.isfinite(v)):
                raise RuntimeError(
                    f"non-finite amplitudes at t = {(k + 1) * dt:.6g}; "
                    "growth overflowed the truncated basis"
                )
            states.append(v)
            occ = edge_occupation(v)
            if occ > EDGE_OCCUPATION_LIMIT:
                warnings.warn(
                    f"edge occupation {occ:.3g} at t = {(k + 1) * dt:.6g} "
                    f"exceeds {EDGE_OCCUPATION_LIMIT}; stopping early",
                    RuntimeWarning,
                )
                aborted = True
                break

    arr = np.array(states)
    times = np.arange(len(states)) * dt
    norms = np.sum(np.abs(arr) ** 2, axis=1)
    return Trajectory(
        times=times,
        states=arr,
        norms=norms,
        method=method,
        dt=dt,
        n_max=h.n_max,
        theta=h.theta,
        mode=h.mode,
        edge_aborted=aborted,
    )


def norm_flow_check(traj: Trajectory, h: FockOperator) -> float:
    """Max over interior grid points of |dP/dt - 2<H_I>|.

    dP/dt is estimated by centered differences, so the returned
    deviation carries an O(dt^2) discretization floor.
    """
    if len(traj.times) < 3:
        raise ValueError("need at least three time points")
    h_i = h.antihermitian_generator()
    expect = traj.expectation_series(h_i).real
    dp = (traj.norms[2:] - traj.norms[:-2]) / (2.0 * traj.dt)
    return float(np.max(np.abs(dp - 2.0 * expect[1:-1])))


def initial_norm_rate(traj: Trajectory) -> float:
    """Second-order one-sided estimate of dP/dt at t = 0."""
    if len(traj.norms) < 3:
        raise ValueError("need at least three time points")
    p = traj.norms
    return float((-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * traj.dt))


def decay_operator(n_max: int, alpha: float, mode: str = "paper") -> FockOperator:
    """Constant-sink case: the diagonal oscillator minus i*alpha.

    Its squared norm obeys P(t) = exp(-2*alpha*t) exactly, which makes
    it the closed-form oracle for the integrator.
    """
    diag = h0_diagonal(n_max).astype(complex) - 1j * float(alpha)
    return FockOperator(
        matrix=np.diag(diag), n_max=n_max, theta=0.0, mode=mode
    )


@dataclass(frozen=True)
class GainLossMap:
    """Occupation time series for selected states, with net change."""

    series: dict
    net_change: dict

    def gaining(self, tol: float = 0.0):
        return sorted(s for s, d in self.net_change.items() if d > tol)

    def losing(self, tol: float = 0.0):
        return sorted(s for s, d in self.net_change.items() if d < -tol)

    def to_json(self):
        return {
            "net_change": {
                ",".join(map(str, s)): v for s, v in self.net_change.items()
            },
            "gaining": [list(s) for s in self.gaining()],
            "losing": [list(s) for s in self.losing()],
        }


def gain_loss_map(traj: Trajectory, states) -> GainLossMap:
    series = {}
    net = {}
    for state in states:
        state = tuple(int(v) for v in state)
        occ = traj.occupation(state)
        series[state] = occ
        net[state] = float(occ[-1] - occ[0])
    return GainLossMap(series=series, net_change=net)


def trajectory_metadata(traj: Trajectory) -> dict:
    return {
        "theta": traj.theta,
        "n_max": traj.n_max,
        "dt": traj.dt,
        "method": traj.method,
        "mode": traj.mode,
        "edge_aborted": traj.edge_aborted,
        "points": int(len(traj.times)),
        "t_final": float(traj.times[-1]),
    }


def export_trajectory_csv(traj: Trajectory, h: FockOperator, path, states=()):
    """CSV of t, P, Re<H_I>, and selected occupations; timestamp-free.

    Rows carry constant provenance columns (mode, theta, n_max) so the
    table stays self-describing away from its metadata file.
    """
    import csv

    states = [tuple(int(v) for v in s) for s in states]
    expect = traj.expectation_series(h.antihermitian_generator()).real
    occs = [traj.occupation(s) for s in states]
    provenance = [traj.mode, repr(float(traj.theta)), str(traj.n_max)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "p", "re_h_i"]
            + ["occ_" + "_".join(map(str, s)) for s in states]
            + ["mode", "theta", "n_max"]
        )
        for k in range(len(traj.times)):
            writer.writerow(
                [repr(float(traj.times[k])), repr(float(traj.norms[k])),
                 repr(float(expect[k]))]
                + [repr(float(o[k])) for o in occs]
                + provenance
            )
