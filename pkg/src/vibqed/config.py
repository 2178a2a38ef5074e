"""YAML run configuration and validation.

Every validation failure raises ConfigError carrying the dotted key path of
the offending entry, e.g. ``splitting_map.nu.points``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .hamiltonian import INTERACTION_MODES, ParameterError, PulseSpec, SweepSpec, SystemParams
from .hilbert import BareState, BasisError, BasisSpec
from .perturbation import CASE_IDS, CASES

EXPERIMENTS = ("spectrum-scan", "splitting-map", "perturbation-check", "dynamics", "landau-zener", "protocol")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass
class RunConfig:
    experiment: str
    params: SystemParams | None
    block: dict
    output_dir: Path
    workers: int = 1
    basis: BasisSpec | None = None
    interaction: str = "linearized"
    raw: dict = field(default_factory=dict)

    @property
    def block_name(self) -> str:
        return self.experiment.replace("-", "_")


def _get(d: dict, key: str, path: str, kind=None, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
        return default
    value = d[key]
    if kind is not None and not isinstance(value, kind):
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _number(d: dict, key: str, path: str, default=..., positive=False, nonneg=False) -> float:
    value = _get(d, key, path, None, default)
    full = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(full, f"expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(full, "must be finite")
    if positive and value <= 0:
        raise ConfigError(full, "must be > 0")
    if nonneg and value < 0:
        raise ConfigError(full, "must be >= 0")
    return value


def _integer(d: dict, key: str, path: str, default=..., minimum=None) -> int:
    value = _get(d, key, path, None, default)
    full = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(full, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(full, f"must be >= {minimum}")
    return value


def parse_range(d: dict, key: str, path: str) -> np.ndarray:
    """A range is either a list of values or {start, stop, points}."""
    full = f"{path}.{key}"
    value = _get(d, key, path)
    if isinstance(value, list):
        if not value:
            raise ConfigError(full, "range must be non-empty")
        try:
            return np.array([float(v) for v in value])
        except (TypeError, ValueError):
            raise ConfigError(full, "values must be numbers") from None
    if isinstance(value, dict):
        start = _number(value, "start", full)
        stop = _number(value, "stop", full)
        points = _integer(value, "points", full, minimum=1)
        if points > 1 and not stop > start:
            raise ConfigError(full, "stop must exceed start")
        return np.linspace(start, stop, points)
    raise ConfigError(full, "expected a list or a {start, stop, points} mapping")


def parse_state(value, path: str) -> BareState:
    try:
        return BareState.parse(str(value))
    except BasisError as exc:
        raise ConfigError(path, str(exc)) from None


# protocol runs default to operating points with a clean two-state resonance
DEFAULT_PROTOCOL_NU = {"noon3": 0.7, "ghz4": 0.5}


def _params(raw: dict, need_omega_c: bool, nu_default=...) -> SystemParams:
    p = _get(raw, "params", "", dict)
    known = {"nu", "omega_c", "eta_g", "eta", "kappa", "gamma", "zeta", "omega0"}
    for key in p:
        if key not in known:
            raise ConfigError(f"params.{key}", "unknown parameter")
    nu = _number(p, "nu", "params", default=nu_default, positive=True)
    eta_g = _number(p, "eta_g", "params", nonneg=True)
    omega_c = _number(p, "omega_c", "params", positive=True) if ("omega_c" in p or need_omega_c) else None
    try:
        return SystemParams(
            nu=nu,
            omega_c=omega_c if omega_c is not None else 1.0,
            eta_g=eta_g,
            eta=_number(p, "eta", "params", default=0.0, nonneg=True),
            kappa=_number(p, "kappa", "params", default=0.0, nonneg=True),
            gamma=_number(p, "gamma", "params", default=0.0, nonneg=True),
            zeta=_number(p, "zeta", "params", default=0.0, nonneg=True),
            omega0=_number(p, "omega0", "params", default=1.0),
        )
    except ParameterError as exc:
        raise ConfigError("params", str(exc)) from None


def _basis(raw: dict) -> BasisSpec | None:
    b = raw.get("basis")
    if b is None:
        return None
    if not isinstance(b, dict):
        raise ConfigError("basis", "expected a mapping")
    try:
        return BasisSpec(
            _integer(b, "n_ions", "basis", minimum=1),
            _integer(b, "photon_cutoff", "basis", minimum=0),
            _integer(b, "phonon_cutoff", "basis", minimum=0),
        )
    except BasisError as exc:
        raise ConfigError("basis", str(exc)) from None


def _case(block: dict, path: str, allow=tuple(CASES)) -> str:
    case = _get(block, "case", path, str)
    if case not in allow:
        raise ConfigError(f"{path}.case", f"unknown case {case!r}; expected one of {allow}")
    return case


def _validate_block(exp: str, block: dict, path: str, cfg: RunConfig):
    if exp == "spectrum-scan":
        parse_range(block, "omega_c", path)
        _integer(block, "n_levels", path, default=20, minimum=1)
        for i, pair in enumerate(block.get("pairs", [])):
            if not isinstance(pair, dict):
                raise ConfigError(f"{path}.pairs[{i}]", "expected a mapping with states and bracket")
            states = _get(pair, "states", f"{path}.pairs[{i}]", list)
            if len(states) != 2:
                raise ConfigError(f"{path}.pairs[{i}].states", "need exactly two states")
            for j, s in enumerate(states):
                parse_state(s, f"{path}.pairs[{i}].states[{j}]")
            if "bracket" in pair:
                br = pair["bracket"]
                if not (isinstance(br, list) and len(br) == 2 and all(isinstance(v, (int, float)) for v in br) and br[0] < br[1]):
                    raise ConfigError(f"{path}.pairs[{i}].bracket", "expected [low, high] with low < high")
    elif exp == "splitting-map":
        _case(block, path)
        parse_range(block, "nu", path)
        parse_range(block, "eta_g", path)
        _integer(block, "coarse_points", path, default=121, minimum=11)
    elif exp == "perturbation-check":
        cases = _get(block, "cases", path, list)
        if not cases:
            raise ConfigError(f"{path}.cases", "must be non-empty")
        for i, c in enumerate(cases):
            if c not in CASE_IDS and c not in ("e_general", "g_general"):
                raise ConfigError(f"{path}.cases[{i}]", f"unknown case {c!r}")
        _integer(block, "points", path, default=20, minimum=1)
        for key in ("nu", "eta_g"):
            r = _get(block, key, path, list, default=[0.05, 0.45] if key == "nu" else [0.01, 0.1])
            if len(r) != 2 or not r[0] < r[1]:
                raise ConfigError(f"{path}.{key}", "expected [low, high] with low < high")
    elif exp == "dynamics":
        if "case" in block:
            _case(block, path)
        parse_state(_get(block, "initial", path), f"{path}.initial")
        _number(block, "t_final", path, positive=True)
        _number(block, "dt", path, positive=True)
        _integer(block, "K", path, default=60, minimum=1)
        oc = block.get("omega_c", "resonance")
        if not (oc == "resonance" or isinstance(oc, (int, float))):
            raise ConfigError(f"{path}.omega_c", "expected 'resonance' or a number")
        if oc == "resonance" and "case" not in block:
            raise ConfigError(f"{path}.case", "required when omega_c is 'resonance'")
        if "pulse" in block:
            parse_pulse(block["pulse"], f"{path}.pulse")
    elif exp == "landau-zener":
        parse_sweep(_get(block, "sweep", path, dict), f"{path}.sweep")
        parse_state(_get(block, "initial", path), f"{path}.initial")
        _number(block, "dt", path, positive=True)
        for i, s in enumerate(block.get("populations", [])):
            parse_state(s, f"{path}.populations[{i}]")
    elif exp == "protocol":
        kind = _get(block, "kind", path, str)
        if kind not in ("noon3", "ghz4"):
            raise ConfigError(f"{path}.kind", "expected 'noon3' or 'ghz4'")
        engines = block.get("engines", ["effective", "full"])
        if not isinstance(engines, list) or not engines or any(e not in ("effective", "full") for e in engines):
            raise ConfigError(f"{path}.engines", "expected a non-empty list of 'effective'/'full'")
        for key in ("theta", "phi"):
            if key in block:
                parse_range(block, key, path)
        ks = block.get("k", [0])
        if not isinstance(ks, list) or not ks or any(not isinstance(k, int) or isinstance(k, bool) or k < 0 for k in ks):
            raise ConfigError(f"{path}.k", "expected a non-empty list of non-negative integers")
        if block.get("timing", "numerical") not in ("numerical", "closed_form"):
            raise ConfigError(f"{path}.timing", "expected 'numerical' or 'closed_form'")


def parse_pulse(d, path: str) -> PulseSpec:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    try:
        omega = d.get("omega", "auto")
        if omega != "auto" and (isinstance(omega, bool) or not isinstance(omega, (int, float))):
            raise ConfigError(f"{path}.omega", "expected a number or 'auto'")
        return PulseSpec(
            amplitude=_number(d, "amplitude", path, nonneg=True),
            tau=_number(d, "tau", path, positive=True),
            t0=_number(d, "t0", path, default=5 * _number(d, "tau", path, positive=True)),
            omega=0.0 if omega == "auto" else float(omega),
            target_ion=_integer(d, "target_ion", path, default=0, minimum=0),
            channel=d.get("channel", "ion"),
        )
    except ParameterError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_sweep(d: dict, path: str) -> SweepSpec:
    try:
        return SweepSpec(_number(d, "omega_c_start", path, positive=True), _number(d, "speed", path), _number(d, "t_final", path, positive=True))
    except ParameterError as exc:
        raise ConfigError(path, str(exc)) from None


def config_from_dict(raw: Any, output_dir: str | Path | None = None, workers: int | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    exp = _get(raw, "experiment", "", str)
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {exp!r}; expected one of {EXPERIMENTS}")
    block_name = exp.replace("-", "_")
    block = raw.get(block_name, {})
    if not isinstance(block, dict):
        raise ConfigError(block_name, "expected a mapping")
    for key in raw:
        if key not in ("experiment", "params", "basis", "interaction", "output_dir", "workers", block_name):
            raise ConfigError(key, "unknown top-level key")
    interaction = raw.get("interaction", "linearized")
    if interaction not in INTERACTION_MODES:
        raise ConfigError("interaction", f"expected one of {INTERACTION_MODES}")
    need_params = exp not in ("perturbation-check", "splitting-map")
    nu_default = ...
    if exp == "protocol" and isinstance(block.get("kind"), str):
        nu_default = DEFAULT_PROTOCOL_NU.get(block["kind"], ...)
    params = _params(raw, need_omega_c=False, nu_default=nu_default) if need_params or "params" in raw else None
    w = workers if workers is not None else _integer(raw, "workers", "", default=1, minimum=1)
    if w < 1:
        raise ConfigError("workers", "must be >= 1")
    out = output_dir if output_dir is not None else _get(raw, "output_dir", "", str, default="output")
    cfg = RunConfig(exp, params, block, Path(out), w, _basis(raw), interaction, raw)
    if interaction == "full_sine" and (params is None or params.eta <= 0):
        raise ConfigError("params.eta", "full_sine interaction requires eta > 0")
    _validate_block(exp, block, block_name, cfg)
    return cfg


def load_config(path: str | Path, output_dir: str | Path | None = None, workers: int | None = None) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"YAML parse error: {exc}") from None
    return config_from_dict(raw, output_dir, workers)
