"""Batch runner: ``sim run``, ``sim validate`` and ``sim plot``.

Each run writes CSV tables, SVG figures and JSON sidecars into the output
directory and finishes by writing ``manifest.json``, which lists every emitted
file with its SHA-256 hash.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_pulse, parse_range, parse_state, parse_sweep
from .dynamics import (
    PropagationError,
    build_dressed_operators,
    correlator_operators,
    landau_zener_probability,
    max_series_change,
    propagate_lindblad,
    propagate_schrodinger,
)
from .hamiltonian import ParameterError, SystemParams, build_h0, build_hint, drive_hamiltonian, total_hamiltonian
from .hilbert import BasisSpec, build_basis, ladder_operators
from .perturbation import CASES, closed_form_coupling, get_case, oracle_sample, resonance_zero
from .plotting import PlotError, emit_plot, read_table
from .protocols import ProtocolError, ProtocolSpec, run_protocol
from .spectrum import (
    BracketError,
    NumericalError,
    default_basis_spec,
    diagonalize,
    find_case_splitting,
    find_splitting,
    splitting_map,
    track_cavity_scan,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
NUMERICAL_ERRORS = (NumericalError, PropagationError, BracketError, ProtocolError, ParameterError, np.linalg.LinAlgError)


# ---------------------------------------------------------------------------
# file helpers


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> Path:
    """Stable column order; floats in full-precision scientific notation."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, SystemParams):
        return obj.to_dict()
    if isinstance(obj, BasisSpec):
        return {"n_ions": obj.n_ions, "photon_cutoff": obj.photon_cutoff, "phonon_cutoff": obj.phonon_cutoff}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def verify_manifest(manifest_path: str | Path) -> list[str]:
    """Files whose content no longer matches the manifest (missing files included)."""
    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text())
    bad = []
    for entry in data["files"]:
        f = manifest_path.parent / entry["path"]
        if not f.exists() or sha256_file(f) != entry["sha256"]:
            bad.append(entry["path"])
    return bad


# ---------------------------------------------------------------------------
# run bookkeeping


@dataclass
class RunManifest:
    config: dict
    experiment: str
    output_dir: Path
    files: list[dict] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    status: str = "ok"
    version: str = __version__

    def add(self, path: Path) -> Path:
        self.files.append({"path": path.name, "sha256": sha256_file(path), "bytes": path.stat().st_size})
        return path

    def to_dict(self) -> dict:
        return {
            "engine": "vibqed",
            "version": self.version,
            "experiment": self.experiment,
            "status": self.status,
            "config": self.config,
            "files": self.files,
            "diagnostics": self.diagnostics,
            "failures": self.failures,
            "timings": self.timings,
        }

    def write(self) -> Path:
        return write_json(self.output_dir / "manifest.json", self.to_dict())


def _basis_spec(cfg: RunConfig, n_ions: int) -> BasisSpec:
    if cfg.basis is not None:
        if cfg.basis.n_ions != n_ions:
            raise ConfigError("basis.n_ions", f"this run needs {n_ions} ion(s)")
        return cfg.basis
    return default_basis_spec(n_ions)


def _plot(man: RunManifest, table: dict, spec: dict, name: str):
    man.add(emit_plot(table, spec, man.output_dir / name))


def _rows_to_table(columns: list[str], rows: list[dict]) -> dict:
    table = {}
    for c in columns:
        vals = [r[c] for r in rows]
        try:
            table[c] = np.array(vals, dtype=float)
        except (TypeError, ValueError):
            table[c] = np.array(vals, dtype=object)
    return table


# ---------------------------------------------------------------------------
# experiments


def run_spectrum_scan(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    omega_c = parse_range(block, "omega_c", "spectrum_scan")
    n_ions = cfg.basis.n_ions if cfg.basis else 1
    spec = _basis_spec(cfg, n_ions)
    basis = build_basis(spec)
    n_levels = block.get("n_levels", 20)
    tracks = track_cavity_scan(basis, cfg.params, omega_c, cfg.interaction, n_levels)
    level_cols = [f"level_{k}" for k in range(tracks.energies.shape[1])]
    rows = [{"omega_c": w, **{c: e for c, e in zip(level_cols, tracks.energies[i])}} for i, w in enumerate(omega_c)]
    man.add(write_csv(man.output_dir / "levels.csv", ["omega_c", *level_cols], rows))
    man.add(write_json(man.output_dir / "levels.json", {
        "columns": {c: {"start": s.label(), "end": e.label()} for c, s, e in zip(level_cols, tracks.labels, tracks.end_labels)},
        "basis": spec,
        "params": cfg.params,
        "min_overlap": tracks.min_overlap,
        "ambiguous_points": tracks.ambiguous,
    }))
    _plot(man, _rows_to_table(["omega_c", *level_cols], rows), {"kind": "line", "x": "omega_c", "y": level_cols, "ylabel": r"energy $/\omega_0$"}, "levels.svg")
    man.diagnostics["tracking_min_overlap"] = tracks.min_overlap
    pairs = block.get("pairs", [])
    if pairs:
        pair_rows = []
        cols = ["state_1", "state_2", "omega_c_star", "gap", "fidelity", "mixing_imbalance"]
        for i, pair in enumerate(pairs):
            states = tuple(parse_state(s, f"spectrum_scan.pairs[{i}].states") for s in pair["states"])
            bracket = tuple(pair.get("bracket", (omega_c[0], omega_c[-1])))
            try:
                res = find_splitting(states, cfg.params, bracket=bracket, basis_spec=spec, mode=cfg.interaction)
                pair_rows.append({"state_1": states[0].label(), "state_2": states[1].label(), "omega_c_star": res.omega_c_star,
                                  "gap": res.gap, "fidelity": res.fidelity, "mixing_imbalance": res.mixing_imbalance})
            except NUMERICAL_ERRORS as exc:
                man.failures.append({"pair": [s.label() for s in states], "error": f"{type(exc).__name__}: {exc}"})
                pair_rows.append({"state_1": states[0].label(), "state_2": states[1].label(), "omega_c_star": math.nan,
                                  "gap": math.nan, "fidelity": math.nan, "mixing_imbalance": math.nan})
        man.add(write_csv(man.output_dir / "pairs.csv", cols, pair_rows))


def run_splitting_map(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    case = block["case"]
    nu = parse_range(block, "nu", "splitting_map")
    eta_g = parse_range(block, "eta_g", "splitting_map")
    spec = _basis_spec(cfg, get_case(case).n_ions)
    points = splitting_map(case, nu, eta_g, spec, cfg.interaction, cfg.workers, block.get("coarse_points", 121))
    cols = ["nu", "eta_g", "omega_c_star", "gap", "fidelity"]
    rows = [p.as_row() for p in points]
    man.add(write_csv(man.output_dir / "splitting_map.csv", cols, rows))
    for k, p in enumerate(points):
        if p.error:
            man.failures.append({"index": k, "nu": p.nu, "eta_g": p.eta_g, "error": p.error})
    table = _rows_to_table(cols, rows)
    if len(nu) > 1 and len(eta_g) > 1:
        _plot(man, table, {"kind": "heatmap", "x": "nu", "y": "eta_g", "z": "gap", "contour": "fidelity",
                           "levels": block.get("contours", [0.90, 0.95]), "title": f"family {case}"}, "splitting_map.svg")
    else:
        x = "nu" if len(nu) > 1 else "eta_g"
        _plot(man, table, {"kind": "line", "x": x, "y": ["gap"], "title": f"family {case}"}, "splitting_map.svg")
    fid = table["fidelity"]
    man.diagnostics.update({
        "points": len(points),
        "failed_points": sum(1 for p in points if p.error),
        "low_fidelity_points": int(np.sum(fid[np.isfinite(fid)] < 0.9)),
    })
    # closed forms flagged divergent on the grid
    flagged = sorted({float(v) for v in nu if closed_form_coupling(case, SystemParams(nu=float(v), omega_c=1.0, eta_g=0.0)).divergent})
    man.diagnostics["closed_form_divergent_nu"] = flagged


def run_perturbation_check(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    points = block.get("points", 20)
    nu_range = tuple(block.get("nu", [0.05, 0.45]))
    eta_range = tuple(block.get("eta_g", [0.01, 0.1]))
    cases = list(dict.fromkeys(block["cases"]))
    rows = []
    for c in cases:
        rows.extend(r.as_row() for r in oracle_sample(c, points, nu_range, eta_range))
    for k, r in enumerate(rows):
        r["point"] = k
    cols = ["point", "case", "nu", "eta_g", "omega_c", "delta", "m", "n", "omega_closed", "omega_enumerated", "rel_error", "omega_c_predicted"]
    man.add(write_csv(man.output_dir / "oracle.csv", cols, rows))
    per_case = {}
    for c in cases:
        errs = [r["rel_error"] for r in rows if r["case"] == c]
        per_case[c] = max(errs)
    zeros = {}
    for c in cases:
        if c in ("f", "h", "no_phonon"):
            zeros[c] = abs(resonance_zero(c, 0.2, float(np.mean(eta_range))))
    table = _rows_to_table(["point", "rel_error"], rows)
    table["rel_error"] = np.maximum(table["rel_error"], 1e-18)
    _plot(man, table, {"kind": "line", "x": "point", "y": ["rel_error"], "logy": True, "ylabel": "relative error"}, "oracle.svg")
    man.diagnostics.update({
        "max_rel_error": max(per_case.values()),
        "max_rel_error_by_case": per_case,
        "resonance_zero_abs": zeros,
        "passes_1e-9": max(per_case.values()) < 1e-9,
    })


def _dressed_index(spectrum, state) -> int:
    return int(np.argmax(spectrum.weights(state)))


def run_dynamics(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    params = cfg.params
    initial = parse_state(block["initial"], "dynamics.initial")
    case = block.get("case")
    spec = _basis_spec(cfg, initial.n_ions)
    omega_c = block.get("omega_c", "resonance")
    if omega_c == "resonance":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            crossing = find_case_splitting(case, params, basis_spec=spec, mode=cfg.interaction)
        man.diagnostics["crossing"] = {"omega_c_star": crossing.omega_c_star, "gap": crossing.gap, "fidelity": crossing.fidelity}
        man.diagnostics.setdefault("warnings", []).extend(str(w.message) for w in caught)
        params = params.replace(omega_c=crossing.omega_c_star)
    else:
        params = params.replace(omega_c=float(omega_c))
    basis = build_basis(spec)
    spectrum = diagonalize(build_h0(basis, params) + build_hint(basis, params, cfg.interaction), basis, params)
    k = min(block.get("K", 60), basis.dimension)
    dressed = build_dressed_operators(spectrum, basis, k)
    ops = correlator_operators(dressed)
    wanted = block.get("observables", ["XmXp", "G2", "G3", "PmPp"])
    for i, name in enumerate(wanted):
        if name not in ops:
            raise ConfigError(f"dynamics.observables[{i}]", f"unknown observable {name!r}; expected one of {sorted(ops)}")
    observables = {name: ops[name] for name in wanted}
    pop_states = [initial] + ([s for s in get_case(case).pair if s != initial] if case else [])
    pop_states += [parse_state(s, f"dynamics.populations[{i}]") for i, s in enumerate(block.get("populations", []))]
    populations = {f"P({s.label()})": s for s in dict.fromkeys(pop_states)}
    drive = None
    if "pulse" in block:
        pulse = parse_pulse(block["pulse"], "dynamics.pulse")
        if block["pulse"].get("omega", "auto") == "auto":
            target = parse_state(block["pulse"].get("target", get_case(case).other.label() if case else initial.label()), "dynamics.pulse.target")
            carrier = abs(spectrum.eigenvalues[_dressed_index(spectrum, target)] - spectrum.eigenvalues[_dressed_index(spectrum, initial)])
            pulse = type(pulse)(pulse.amplitude, pulse.tau, pulse.t0, carrier, pulse.target_ion, pulse.channel)
        man.diagnostics["pulse"] = {"amplitude": pulse.amplitude, "tau": pulse.tau, "t0": pulse.t0, "omega": pulse.omega, "channel": pulse.channel}
        drive = drive_hamiltonian(basis, pulse)
    rho0 = basis.ket(initial)
    if block.get("start", "bare") == "ground":
        rho0 = spectrum.eigenvectors[:, 0]
    t_final, dt = float(block["t_final"]), float(block["dt"])
    meta = {"params": params, "basis": spec, "initial": initial.label(), "interaction": cfg.interaction}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = propagate_lindblad(dressed, params, rho0, t_final, dt, drive=drive, observables=observables, populations=populations, metadata=meta)
        if block.get("check_dt", False):
            half = propagate_lindblad(dressed, params, rho0, t_final, dt / 2, drive=drive, observables=observables, populations=populations)
            change = max_series_change(trace, half, list(observables) + list(populations))
            trace.metadata["dt_halving_change"] = change
            man.diagnostics["dt_halving_max_change"] = max(change.values())
    man.diagnostics.setdefault("warnings", []).extend(str(w.message) for w in caught)
    man.add(trace.to_csv(man.output_dir / "trace.csv"))
    man.add(trace.write_sidecar(man.output_dir / "trace.json"))
    table = {"time": trace.times, **trace.series}
    corr = [n for n in ("XmXp", "G2", "G3") if n in trace.series] or list(observables)[:3]
    if corr:
        _plot(man, table, {"kind": "line", "x": "time", "y": corr, "ylabel": "correlator"}, "correlators.svg")
    _plot(man, table, {"kind": "line", "x": "time", "y": list(populations), "ylabel": "population"}, "populations.svg")
    man.diagnostics.update({
        "peaks": {name: float(np.max(trace[name])) for name in observables},
        "max_trace_error": trace.metadata["max_trace_error"],
        "min_eigenvalue": trace.metadata["min_eigenvalue"],
        "initial_weight_captured": trace.metadata["initial_weight_captured"],
        "K": k,
    })


def run_landau_zener(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    sweep = parse_sweep(block["sweep"], "landau_zener.sweep")
    initial = parse_state(block["initial"], "landau_zener.initial")
    spec = cfg.basis or BasisSpec(initial.n_ions, 8, 7)
    basis = build_basis(spec)
    params = cfg.params.replace(omega_c=sweep.omega_c_start)
    h = total_hamiltonian(basis, params, sweep=sweep, mode=cfg.interaction)
    spectrum = diagonalize(h.static, basis, params)
    j = int(np.argmax(spectrum.weights(initial)))
    psi0 = spectrum.eigenvectors[:, j].astype(complex)
    names = [initial] + [parse_state(s, f"landau_zener.populations[{i}]") for i, s in enumerate(block.get("populations", []))]
    populations = {f"P({s.label()})": s for s in dict.fromkeys(names)}
    lad = ladder_operators(basis)
    observables = {"n_photon": lad.num_photons, "n_phonon": lad.num_phonons}
    meta = {"params": params, "basis": spec, "sweep": {"omega_c_start": sweep.omega_c_start, "speed": sweep.speed, "t_final": sweep.t_final},
            "initial_dressed_overlap": float(spectrum.weights(initial)[j])}
    trace = propagate_schrodinger(h, psi0, sweep.t_final, float(block["dt"]), observables=observables, populations=populations, basis=basis, metadata=meta)
    trace.series["omega_c"] = sweep.omega_c(trace.times)
    man.add(trace.to_csv(man.output_dir / "landau_zener.csv"))
    man.add(trace.write_sidecar(man.output_dir / "landau_zener.json"))
    table = {"time": trace.times, **trace.series}
    _plot(man, table, {"kind": "line", "x": "omega_c", "y": list(populations), "ylabel": "population"}, "landau_zener.svg")
    final = {name: float(trace[name][-1]) for name in populations}
    man.diagnostics.update({"final_populations": final, "max_norm_drift": trace.metadata["max_norm_drift"]})
    case = block.get("case")
    if case in CASES:
        omega = abs(closed_form_coupling(case, params).value)
        slope = abs(get_case(case).photon_difference) * abs(sweep.speed)
        man.diagnostics["lz_formula"] = {"omega_eff": omega, "p_diabatic": landau_zener_probability(omega, abs(sweep.speed), slope / abs(sweep.speed))}


def run_protocol_experiment(cfg: RunConfig, man: RunManifest):
    block = cfg.block
    kind = block["kind"]
    engines = block.get("engines", ["effective", "full"])
    thetas = parse_range(block, "theta", "protocol") if "theta" in block else np.array([math.pi / 4])
    phis = parse_range(block, "phi", "protocol") if "phi" in block else np.array([0.0])
    ks = block.get("k", [0])
    timing = block.get("timing", "numerical")
    rows = []
    cols = ["kind", "theta", "phi", "k", "engine", "fidelity", "local_phase_fidelity", "success_probability", "time", "omega_eff", "omega_c"]
    for engine in engines:
        for k in ks:
            for phi in phis:
                for theta in thetas:
                    spec = ProtocolSpec(kind, cfg.params, float(theta), float(phi), int(k), cfg.basis, timing)
                    try:
                        res = run_protocol(spec, engine)
                    except NUMERICAL_ERRORS as exc:
                        man.failures.append({"engine": engine, "theta": float(theta), "phi": float(phi), "k": int(k), "error": f"{type(exc).__name__}: {exc}"})
                        continue
                    rows.append({**res.as_row(spec), "time": res.time, "omega_eff": res.omega_eff, "omega_c": res.omega_c})
    if not rows:
        raise ProtocolError("every protocol run failed")
    man.add(write_csv(man.output_dir / "protocol.csv", cols, rows))
    by_engine = {}
    for e in engines:
        sel = [r for r in rows if r["engine"] == e]
        if sel:
            by_engine[e] = {"min_fidelity": min(r["fidelity"] for r in sel), "min_local_phase_fidelity": min(r["local_phase_fidelity"] for r in sel)}
    man.diagnostics["by_engine"] = by_engine
    if len(thetas) > 1:
        table = {"theta": thetas.astype(float)}
        ys = []
        for e in engines:
            sel = [r for r in rows if r["engine"] == e and r["k"] == ks[0] and r["phi"] == float(phis[0])]
            if len(sel) == len(thetas):
                table[f"fidelity_{e}"] = np.array([r["fidelity"] for r in sel])
                ys.append(f"fidelity_{e}")
        if ys:
            _plot(man, table, {"kind": "line", "x": "theta", "y": ys, "xlabel": r"$\theta$", "ylabel": "fidelity"}, "protocol.svg")


RUNNERS = {
    "spectrum-scan": run_spectrum_scan,
    "splitting-map": run_splitting_map,
    "perturbation-check": run_perturbation_check,
    "dynamics": run_dynamics,
    "landau-zener": run_landau_zener,
    "protocol": run_protocol_experiment,
}


def run(config_path: str | Path, output_dir: str | Path | None = None, workers: int | None = None, seedless: bool = False) -> RunManifest:
    """Run one experiment; raises on configuration, numerical or IO failure after writing the manifest."""
    cfg = load_config(config_path, output_dir, workers)
    return run_config(cfg, seedless)


def run_config(cfg: RunConfig, seedless: bool = False) -> RunManifest:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    config_echo = {**cfg.raw, "output_dir": str(cfg.output_dir), "workers": cfg.workers}
    man = RunManifest(config_echo, cfg.experiment, cfg.output_dir)
    man.diagnostics["seedless"] = bool(seedless)
    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            RUNNERS[cfg.experiment](cfg, man)
        msgs = man.diagnostics.setdefault("warnings", [])
        msgs.extend(str(w.message) for w in caught)
        man.diagnostics["warnings"] = list(dict.fromkeys(msgs))
    except (ConfigError, *NUMERICAL_ERRORS) as exc:
        man.status = "failed"
        man.failures.append({"error": f"{type(exc).__name__}: {exc}"})
        man.timings["total_s"] = time.perf_counter() - start
        man.write()
        raise
    if man.failures:
        man.status = "partial"
    man.timings["total_s"] = time.perf_counter() - start
    man.write()
    return man


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description="Qubit-photon-phonon cavity QED simulations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a YAML config")
    r.add_argument("config")
    r.add_argument("--workers", type=int, default=None, help="worker processes for grid sweeps")
    r.add_argument("--output-dir", default=None, help="override the config's output_dir")
    r.add_argument("--seedless", action="store_true", help="reserved; no run uses random numbers")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    pl = sub.add_parser("plot", help="render an SVG from a CSV and a YAML plot spec")
    pl.add_argument("csv")
    pl.add_argument("plot_spec")
    pl.add_argument("--output", default=None, help="SVG path (default: plot spec 'output' or CSV name with .svg)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            print(f"ok: {cfg.experiment} config is valid")
        elif args.command == "run":
            if args.workers is not None and args.workers < 1:
                raise ConfigError("--workers", "must be >= 1")
            man = run(args.config, args.output_dir, args.workers, args.seedless)
            print(f"{man.status}: {len(man.files)} file(s) written to {man.output_dir}")
            for f in man.failures:
                print(f"  failure: {f}", file=sys.stderr)
        else:
            spec = yaml.safe_load(Path(args.plot_spec).read_text())
            out = args.output or (spec.get("output") if isinstance(spec, dict) else None) or str(Path(args.csv).with_suffix(".svg"))
            path = emit_plot(read_table(args.csv), spec, out)
            print(f"wrote {path}")
    except (ConfigError, PlotError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
