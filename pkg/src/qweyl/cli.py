"""Command-line front end orchestrating the verification pipeline.

Every run is driven by a RunConfig assembled from defaults, an optional
key=value config file, and flag overrides, in that order.  Outputs land
in the configured directory as JSON reports (byte-identical across
reruns except for a single timestamp field) plus plot-ready CSV tables.
Numeric tables always carry provenance columns (mode, theta, n_max) so
results from the two first-order conventions can never be confused.

Exit codes: 0 all checks pass, 1 check failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .algebra import check_relation, defining_relations
from .dynamics import (
    decay_operator,
    export_trajectory_csv,
    gain_loss_map,
    initial_norm_rate,
    norm_flow_check,
    propagate,
)
from .effective import assemble_effective, compare_to_reference
from .fock import (
    COUPLING_TOL,
    FockBasis,
    INTERIOR_MARGIN,
    build_h1_matrix,
    build_h_eff,
    mixing_amplitudes,
    sparsity_pattern,
)
from .realization import (
    MODES,
    MonomialVec,
    expansion_order_scan,
    relation_residual_numeric,
)

NUMERIC_RESIDUAL_LIMIT = 1e-12
DECAY_LIMIT = 1e-8
NORM_FLOW_LIMIT = 1e-6
SLOPE_WINDOW = (1.9, 2.1)
SCAN_MONOMIALS = ((2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (3, 3, 3))
TRACKED_STATES = ((0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2))


class ConfigError(Exception):
    """Invalid configuration or parameters; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    theta: float = 0.01
    n_max: int = 10
    degree: int = 6
    mode: str = "paper"
    t_final: float = 5.0
    dt: float = 1e-3
    alpha: float = 0.5
    out: str = ""
    fmt: str = "json"


# config key, dataclass field, parser for the value
_CONFIG_TABLE = (
    ("theta", "theta", float),
    ("nmax", "n_max", int),
    ("degree", "degree", int),
    ("mode", "mode", str),
    ("T", "t_final", float),
    ("dt", "dt", float),
    ("alpha", "alpha", float),
    ("out", "out", str),
    ("format", "fmt", str),
)


def default_out() -> str:
    return os.environ.get("QWEYL_OUT", "qweyl_out")


def save_config(config: RunConfig, path) -> None:
    """Write the config as key=value lines; floats use repr and so
    round-trip losslessly through load_config."""
    lines = []
    for key, field, kind in _CONFIG_TABLE:
        value = getattr(config, field)
        text = repr(value) if kind is float else str(value)
        lines.append(f"{key}={text}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_config(path) -> dict:
    """Parse a key=value config file into dataclass field overrides."""
    keys = {key: (field, kind) for key, field, kind in _CONFIG_TABLE}
    overrides = {}
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in keys:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        field, kind = keys[key]
        try:
            overrides[field] = kind(text)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {text!r}") from exc
    return overrides


def validate_config(config: RunConfig) -> None:
    if not np.isfinite(config.theta):
        raise ConfigError("theta must be a finite real number")
    if config.n_max < 1:
        raise ConfigError("nmax must be at least 1")
    if config.degree < 1:
        raise ConfigError("degree must be at least 1")
    if config.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {config.mode!r}")
    if config.t_final <= 0:
        raise ConfigError("T must be positive")
    if config.dt <= 0:
        raise ConfigError("dt must be positive")
    if config.alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    if config.fmt not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {config.fmt!r}")


def assemble_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for _, field, _ in _CONFIG_TABLE:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag
    config = replace(RunConfig(), **values)
    if not config.out:
        config = replace(config, out=default_out())
    validate_config(config)
    return config


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def write_report(config: RunConfig, name: str, payload: dict) -> str:
    os.makedirs(config.out, exist_ok=True)
    data = {
        "command": name,
        "provenance": {
            "mode": config.mode,
            "theta": config.theta,
            "n_max": config.n_max,
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    data.update(payload)
    path = os.path.join(config.out, name.replace("-", "_") + ".json")
    with open(path, "w") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _ground_vector(basis: FockBasis) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index((0, 0, 0))] = 1.0
    return psi


def cmd_verify_algebra(config: RunConfig, args) -> tuple:
    reports = [
        check_relation(lhs, rhs, name)
        for name, lhs, rhs in defining_relations()
    ]
    symbolic_ok = all(r.holds for r in reports)
    if getattr(args, "corrupt_relation", False):
        # negative control: doubling one side must break the relation
        name, lhs, rhs = defining_relations()[0]
        bad = check_relation(lhs, rhs.scale(2), name + " (corrupted control)")
        reports.append(bad)
        symbolic_ok = symbolic_ok and bad.holds
    numeric = relation_residual_numeric(config.theta, config.degree)
    numeric_ok = numeric.max_residual <= NUMERIC_RESIDUAL_LIMIT
    ok = symbolic_ok and numeric_ok
    payload = {
        "relations": [r.to_json() for r in reports],
        "numeric": numeric.to_json(),
        "numeric_threshold": NUMERIC_RESIDUAL_LIMIT,
        "ok": ok,
    }
    return (0 if ok else 1), payload


def cmd_expand_scan(config: RunConfig, args) -> tuple:
    thetas = np.geomspace(1e-4, 1e-1, 13)
    interior = []
    gate_ok = True
    for code in range(6):
        for mono in SCAN_MONOMIALS:
            vec = MonomialVec.basis(mono)
            for mode in MODES:
                res = expansion_order_scan(code, vec, thetas, mode)
                row = res.to_json()
                row["monomial"] = list(mono)
                interior.append(row)
                if mode == "rederived" and res.slope is not None:
                    lo, hi = SLOPE_WINDOW
                    if not lo <= res.slope <= hi:
                        gate_ok = False
    origin = []
    vec0 = MonomialVec.basis((0, 0, 0))
    for code in range(6):
        for mode in MODES:
            res = expansion_order_scan(code, vec0, thetas, mode)
            row = res.to_json()
            row["monomial"] = [0, 0, 0]
            origin.append(row)
    payload = {
        "interior": interior,
        "origin": origin,
        "rederived_gate": {"window": list(SLOPE_WINDOW), "holds": gate_ok},
        "ok": gate_ok,
    }
    return (0 if gate_ok else 1), payload


def cmd_effective(config: RunConfig, args) -> tuple:
    effs = {mode: assemble_effective(mode) for mode in MODES}
    comparison = compare_to_reference(effs["paper"])
    shift_a = [
        (effs["rederived"].a[j] - effs["paper"].a[j]).to_json() for j in range(3)
    ]
    shift_v_i = (effs["rederived"].v_i - effs["paper"].v_i).to_json()
    payload = {
        "modes": {mode: eff.to_json() for mode, eff in effs.items()},
        "reference_comparison": comparison.to_json(),
        "mode_shift": {"a": shift_a, "v_i": shift_v_i},
        "ok": True,
    }
    return 0, payload


def _write_spectrum_csv(config: RunConfig, eigs: np.ndarray) -> str:
    import csv

    path = os.path.join(config.out, "spectrum.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im", "mode", "theta", "n_max"])
        for value in eigs:
            writer.writerow(
                [repr(float(value.real)), repr(float(value.imag)),
                 config.mode, repr(float(config.theta)), str(config.n_max)]
            )
    return path


def cmd_spectrum(config: RunConfig, args) -> tuple:
    if config.n_max < 4:
        raise ConfigError("spectrum runs need nmax >= 4")
    h = build_h_eff(config.n_max, config.theta, config.mode)
    diag = np.diag(h.matrix)
    if np.count_nonzero(h.matrix - np.diag(diag)) == 0:
        eigs = np.sort_complex(diag)
    else:
        eigs = np.sort_complex(np.linalg.eigvals(h.matrix))
    payload = {
        "dimension": int(h.matrix.shape[0]),
        "eigenvalues": [[float(v.real), float(v.imag)] for v in eigs],
        "ground": [float(eigs[0].real), float(eigs[0].imag)],
        "ok": True,
    }
    extra = []
    if config.fmt == "csv":
        os.makedirs(config.out, exist_ok=True)
        extra.append(_write_spectrum_csv(config, eigs))
    payload["files"] = [os.path.basename(p) for p in extra]
    return 0, payload


def cmd_mixing(config: RunConfig, args) -> tuple:
    if config.n_max <= INTERIOR_MARGIN:
        raise ConfigError(
            f"mixing runs need nmax > {INTERIOR_MARGIN} so the scan has interior states"
        )
    h1 = build_h1_matrix(config.n_max, config.mode)
    basis = FockBasis(config.n_max)
    report = sparsity_pattern(h1, basis)
    couplings = mixing_amplitudes(h1, basis, (0, 0, 0))
    payload = {
        "sparsity": report.to_json(),
        "ground_couplings": {
            ",".join(map(str, state)): [value.real, value.imag]
            for state, value in sorted(couplings.items())
        },
        "ok": True,
    }
    if config.fmt == "csv":
        import csv

        os.makedirs(config.out, exist_ok=True)
        path = os.path.join(config.out, "mixing.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dx", "dy", "dz", "in_conjectured_set",
                             "mode", "theta", "n_max"])
            conjectured = {
                offset: offset in report.inside_conjecture
                for offset in report.offsets
            }
            for offset in report.offsets:
                writer.writerow(
                    [str(offset[0]), str(offset[1]), str(offset[2]),
                     str(conjectured[offset]).lower(),
                     config.mode, repr(float(config.theta)), str(config.n_max)]
                )
        payload["files"] = ["mixing.csv"]
    else:
        payload["files"] = []
    return 0, payload


def cmd_evolve(config: RunConfig, args) -> tuple:
    basis = FockBasis(config.n_max)
    psi0 = _ground_vector(basis)
    if getattr(args, "decay_oracle", False):
        alphas = sorted({0.1, 0.5, 1.0, config.alpha})
        rows = []
        ok = True
        for alpha in alphas:
            h = decay_operator(config.n_max, alpha, config.mode)
            traj = propagate(h, psi0, config.t_final, config.dt)
            exact = np.exp(-2.0 * alpha * traj.times)
            deviation = float(np.max(np.abs(traj.norms - exact)))
            row_ok = deviation <= DECAY_LIMIT
            ok = ok and row_ok
            rows.append({"alpha": alpha, "max_abs_deviation": deviation, "ok": row_ok})
        payload = {"decay_table": rows, "threshold": DECAY_LIMIT, "ok": ok}
        return (0 if ok else 1), payload

    h = build_h_eff(config.n_max, config.theta, config.mode)
    traj = propagate(h, psi0, config.t_final, config.dt)
    flow = norm_flow_check(traj, h)
    rate = initial_norm_rate(traj)
    generator_rate = float(
        2.0 * (psi0.conj() @ (h.antihermitian_generator() @ psi0)).real
    )
    tracked = [s for s in TRACKED_STATES if max(s) <= config.n_max]
    gmap = gain_loss_map(traj, tracked)
    os.makedirs(config.out, exist_ok=True)
    csv_path = os.path.join(config.out, "trajectory.csv")
    export_trajectory_csv(traj, h, csv_path, states=tracked)
    ok = flow <= NORM_FLOW_LIMIT
    payload = {
        "method": traj.method,
        "points": int(len(traj.times)),
        "final_norm": float(traj.norms[-1]),
        "norm_flow_deviation": flow,
        "norm_flow_threshold": NORM_FLOW_LIMIT,
        "initial_rate": rate,
        "generator_expectation_rate": generator_rate,
        "edge_aborted": traj.edge_aborted,
        "gain_loss": gmap.to_json(),
        "files": ["trajectory.csv"],
        "ok": ok,
    }
    return (0 if ok else 1), payload


_COMMANDS = {
    "verify-algebra": cmd_verify_algebra,
    "expand-scan": cmd_expand_scan,
    "effective": cmd_effective,
    "spectrum": cmd_spectrum,
    "mixing": cmd_mixing,
    "evolve": cmd_evolve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qweyl",
        description="Symbolic and numeric checks for the deformed oscillator pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "verify-algebra": "run the symbolic relation suite and the numeric residual check",
        "expand-scan": "measure first-order residual slopes across theta for both modes",
        "effective": "emit the effective-Hamiltonian decomposition and discrepancy report",
        "spectrum": "diagonalize the truncated Hamiltonian",
        "mixing": "scan coupling sparsity and compare against the conjectured offsets",
        "evolve": "propagate the ground state and check norm-flow identities",
    }
    for name, blurb in descriptions.items():
        sp = sub.add_parser(name, help=blurb)
        sp.add_argument("--config", help="key=value config file; flags override it")
        sp.add_argument("--theta", type=float, dest="theta")
        sp.add_argument("--nmax", type=int, dest="n_max")
        sp.add_argument("--degree", type=int, dest="degree")
        sp.add_argument("--mode", choices=MODES, dest="mode")
        sp.add_argument("--T", type=float, dest="t_final")
        sp.add_argument("--dt", type=float, dest="dt")
        sp.add_argument("--alpha", type=float, dest="alpha")
        sp.add_argument("--out", dest="out")
        sp.add_argument("--format", choices=("json", "csv"), dest="fmt")
        if name == "verify-algebra":
            sp.add_argument(
                "--corrupt-relation", action="store_true", help=argparse.SUPPRESS
            )
        if name == "evolve":
            sp.add_argument(
                "--decay-oracle",
                action="store_true",
                help="check the constant-sink closed-form decay law instead",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = assemble_config(args)
        code, payload = _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    path = write_report(config, args.command, payload)
    status = "ok" if code == 0 else "FAIL"
    print(f"{args.command}: {status} -> {path}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
