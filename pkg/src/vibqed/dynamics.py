"""Time evolution: Schrodinger propagation, Lindblad master equation, correlators.

Unitary evolution uses the fourth-order Magnus integrator (two Gauss points),
which is norm preserving. Large time-dependent problems apply each Magnus
exponential to the state with a sparse Krylov-type action (expm_multiply)
instead of a dense eigendecomposition. The master equation is integrated in the
lowest-K dressed states with an integrating-factor fourth-order Runge-Kutta
scheme: the coherent part diag(E_k) is applied exactly as elementwise phases
and the dissipators (plus any drive) are handled by the RK stages.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import expm_multiply

from .hamiltonian import SystemParams, TimeDependentHamiltonian
from .hilbert import Basis, BareState, OperatorMatrix, as_state, ladder_operators
from .spectrum import Spectrum

MAX_SAMPLES = 4096
NORM_ABORT = 1e-6
TRACE_ABORT = 1e-6
IMAG_TOL = 1e-10
K_CONVERGENCE_TOL = 0.01
SPARSE_MIN_DIM = 300  # auto mode switches to the sparse exponential action here

_GAUSS = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


class PropagationError(RuntimeError):
    pass


class KConvergenceWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# dressed operators


@dataclass
class DressedOperators:
    """Positive-frequency operators in the energy-ordered dressed basis.

    ``X`` (cavity), ``P`` (vibration) and ``C[i]`` (ion i) are the lowering
    parts O = sum_{j<k} <j|(o + o^+)|k> |j><k|; the raising parts are their
    adjoints. Matrices are K x K with K the retained number of dressed states.
    """

    energies: np.ndarray
    vectors: np.ndarray  # bare-basis columns of the retained dressed states
    X: np.ndarray
    P: np.ndarray
    C: tuple[np.ndarray, ...]
    basis: Basis

    @property
    def size(self) -> int:
        return len(self.energies)

    def dag(self, op: np.ndarray) -> np.ndarray:
        return op.conj().T

    def to_dressed(self, state: np.ndarray) -> np.ndarray:
        """Project a bare-basis vector (or density matrix) onto the retained dressed states."""
        v = self.vectors
        if state.ndim == 1:
            return v.conj().T @ state
        return v.conj().T @ state @ v

    def to_bare(self, op: np.ndarray) -> np.ndarray:
        v = self.vectors
        return v @ op @ v.conj().T

    def project(self, op: OperatorMatrix | np.ndarray) -> np.ndarray:
        mat = op.dense() if isinstance(op, OperatorMatrix) else np.asarray(op)
        return self.vectors.conj().T @ mat @ self.vectors


def _positive_part(vectors: np.ndarray, quadrature: np.ndarray) -> np.ndarray:
    full = vectors.conj().T @ quadrature @ vectors
    return np.triu(full, k=1)


def build_dressed_operators(spectrum: Spectrum, basis: Basis | None = None, k: int | None = None) -> DressedOperators:
    """Dressed lowering operators from a full spectrum, truncated to the lowest k states.

    Because each operator only connects a state to lower-energy states, the
    restriction to the lowest k levels is exact for matrix elements inside
    that block. Degenerate eigenpairs keep the ascending order returned by the
    eigensolver.
    """
    basis = basis or spectrum.basis
    if basis is None:
        raise ValueError("a basis is required")
    dim = spectrum.dimension
    k = dim if k is None else int(k)
    if not 1 <= k <= dim:
        raise ValueError(f"k must lie in [1, {dim}]")
    ops = ladder_operators(basis)
    vecs = spectrum.eigenvectors[:, :k]
    x = _positive_part(vecs, (ops.b + ops.bdag).dense())
    p = _positive_part(vecs, (ops.a + ops.adag).dense())
    c = tuple(_positive_part(vecs, (sm + sp).dense()) for sm, sp in zip(ops.sigma_minus, ops.sigma_plus))
    return DressedOperators(spectrum.eigenvalues[:k].copy(), vecs, x, p, c, basis)


def correlator_operators(d: DressedOperators) -> dict[str, np.ndarray]:
    """Normally ordered zero-delay observables, all in the dressed basis."""
    x, p = d.X, d.P
    xd, pd = x.conj().T, p.conj().T
    out = {"XmXp": xd @ x, "PmPp": pd @ p}
    for i, c in enumerate(d.C):
        out[f"C{i + 1}mC{i + 1}p"] = c.conj().T @ c
    out["G2"] = xd @ xd @ x @ x
    out["G3"] = xd @ xd @ xd @ x @ x @ x
    out["G4"] = xd @ xd @ xd @ xd @ x @ x @ x @ x
    out["K2"] = pd @ pd @ p @ p
    if len(d.C) >= 2:
        c1, c2 = d.C[0], d.C[1]
        out["S2"] = c1.conj().T @ c2.conj().T @ c2 @ c1
    if len(d.C) >= 3:
        c1, c2, c3 = d.C[0], d.C[1], d.C[2]
        out["S3"] = c1.conj().T @ c2.conj().T @ c3.conj().T @ c3 @ c2 @ c1
    return out


def correlators(state: np.ndarray, ops: Mapping[str, np.ndarray]) -> dict[str, float]:
    """Expectation values for a dressed-basis state vector or density matrix."""
    return {name: _expect(state, op) for name, op in ops.items()}


def _expect(state: np.ndarray, op: np.ndarray) -> float:
    if state.ndim == 1:
        val = np.vdot(state, op @ state)
    else:
        val = np.einsum("ij,ji->", op, state)
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > IMAG_TOL * scale:
        raise PropagationError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# traces


@dataclass
class DynamicsTrace:
    times: np.ndarray
    series: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.series[name]

    @property
    def columns(self) -> list[str]:
        return ["time"] + list(self.series)

    def rows(self):
        for k, t in enumerate(self.times):
            yield [t] + [self.series[name][k] for name in self.series]

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows():
                writer.writerow([f"{v:.16e}" for v in row])
        return path

    def write_sidecar(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(_jsonable(self.metadata), indent=2, sort_keys=True) + "\n")
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, SystemParams):
        return obj.to_dict()
    if isinstance(obj, BareState):
        return obj.label()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


def _sample_steps(n_steps: int, max_samples: int) -> np.ndarray:
    if n_steps + 1 <= max_samples:
        return np.arange(n_steps + 1)
    stride = math.ceil(n_steps / (max_samples - 1))
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def _steps_for(t_final: float, dt: float) -> tuple[int, float]:
    if t_final <= 0 or dt <= 0:
        raise ValueError("t_final and dt must be positive")
    n = max(1, int(round(t_final / dt)))
    return n, t_final / n


# ---------------------------------------------------------------------------
# Schrodinger


def _as_factory(h) -> tuple[Callable[[float], np.ndarray], bool]:
    if isinstance(h, TimeDependentHamiltonian):
        return h.dense, h.is_static
    if isinstance(h, OperatorMatrix):
        mat = h.dense()
        return (lambda t: mat), True
    if callable(h):
        return (lambda t: np.asarray(h(t).dense() if isinstance(h(t), OperatorMatrix) else h(t))), False
    mat = np.asarray(h)
    return (lambda t: mat), True


def _unitary_from(m: np.ndarray) -> np.ndarray:
    w, v = sla.eigh(m)
    return (v * np.exp(-1j * w)) @ v.conj().T


def propagate_schrodinger(
    h,
    psi0: np.ndarray,
    t_final: float,
    dt: float = 0.02,
    observables: Mapping[str, np.ndarray | OperatorMatrix] | None = None,
    populations: Mapping[str, BareState | str] | None = None,
    basis: Basis | None = None,
    t0: float = 0.0,
    max_samples: int = MAX_SAMPLES,
    renormalize: bool = False,
    metadata: dict | None = None,
    method: str = "auto",
) -> DynamicsTrace:
    """Fixed-step fourth-order Magnus propagation of psi' = -i H(t) psi.

    ``observables`` are operators in the same basis as ``psi0``; ``populations``
    maps column names to bare states (requires ``basis``). The norm drift is
    recorded; a drift above 1e-6 aborts with a step-size diagnostic.
    ``method`` selects how each step exponential is applied: "dense"
    (eigendecomposition), "sparse" (expm_multiply on the sparse generator) or
    "auto" (sparse for time-dependent Hamiltonians of dimension >= 300).
    """
    if method not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown method {method!r}")
    psi = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(psi)
    if abs(norm0 - 1) > 1e-10:
        raise ValueError(f"psi0 must be normalized (norm = {norm0:.12f})")
    factory, static = _as_factory(h)
    n_steps, step = _steps_for(t_final, dt)
    obs = {k: (v.dense() if isinstance(v, OperatorMatrix) else np.asarray(v)) for k, v in (observables or {}).items()}
    pops = {}
    if populations:
        if basis is None:
            raise ValueError("populations require a basis")
        pops = {k: basis.index(as_state(s)) for k, s in populations.items()}
    samples = _sample_steps(n_steps, max_samples)
    times = t0 + samples * step
    series = {name: np.empty(len(samples)) for name in list(pops) + list(obs)}
    norm_drift = np.empty(len(samples))

    def record(slot):
        for name, i in pops.items():
            series[name][slot] = abs(psi[i]) ** 2
        for name, op in obs.items():
            series[name][slot] = _expect(psi, op)
        norm_drift[slot] = abs(np.linalg.norm(psi) - 1.0)
        if norm_drift[slot] > NORM_ABORT:
            raise PropagationError(
                f"norm drift {norm_drift[slot]:.3e} at t = {t0 + samples[slot] * step:.6g} exceeds {NORM_ABORT}; reduce dt (currently {step:.4g})"
            )

    sparse = isinstance(h, TimeDependentHamiltonian) and not static and (
        method == "sparse" or (method == "auto" and len(psi) >= SPARSE_MIN_DIM)
    )
    if sparse:
        sp_static = h.static.data.tocsr()
        sp_terms = [(c, o.data.tocsr()) for c, o in h.terms]

        def sparse_at(t):
            out = sp_static.copy()
            for c, o in sp_terms:
                out = out + float(c(t)) * o
            return out

    u_static = _unitary_from(factory(t0) * step) if static else None
    slot = 0
    record(slot)
    slot += 1
    for k in range(n_steps):
        if static:
            psi = u_static @ psi
        elif sparse:
            t = t0 + k * step
            h1 = sparse_at(t + _GAUSS[0] * step)
            h2 = sparse_at(t + _GAUSS[1] * step)
            omega = 0.5 * step * (h1 + h2) - (1j * math.sqrt(3) / 12) * step**2 * (h2 @ h1 - h1 @ h2)
            psi = expm_multiply(-1j * omega, psi)
        else:
            t = t0 + k * step
            h1 = factory(t + _GAUSS[0] * step)
            h2 = factory(t + _GAUSS[1] * step)
            omega = 0.5 * step * (h1 + h2) - (1j * math.sqrt(3) / 12) * step**2 * (h2 @ h1 - h1 @ h2)
            psi = _unitary_from(omega) @ psi
        if renormalize:
            psi /= np.linalg.norm(psi)
        if slot < len(samples) and k + 1 == samples[slot]:
            record(slot)
            slot += 1
    meta = {
        "solver": "magnus4",
        "step_exponential": "sparse" if sparse else "dense",
        "dt": step,
        "n_steps": n_steps,
        "t0": t0,
        "t_final": t0 + t_final,
        "max_norm_drift": float(norm_drift.max()),
        "renormalize": renormalize,
    }
    meta.update(metadata or {})
    trace = DynamicsTrace(times, series, meta, psi)
    trace.series["norm_drift"] = norm_drift
    return trace


def landau_zener_probability(omega_eff: float, v: float, slope_factor: float = 3.0) -> float:
    """Diabatic passage probability exp(-2 pi Omega^2 / (dDeltaE/dt)), dDeltaE/dt = slope_factor * v."""
    if v <= 0:
        raise ValueError("sweep speed must be positive")
    return math.exp(-2 * math.pi * omega_eff**2 / (slope_factor * v))


# ---------------------------------------------------------------------------
# Lindblad


@dataclass(frozen=True)
class Rates:
    kappa: float = 0.0
    gamma: float = 0.0
    zeta: float = 0.0

    @classmethod
    def from_params(cls, params: SystemParams) -> Rates:
        return cls(params.kappa, params.gamma, params.zeta)


def _jump_operators(d: DressedOperators, rates: Rates) -> list[tuple[float, np.ndarray]]:
    out = []
    if rates.kappa > 0:
        out.append((rates.kappa, d.X))
    if rates.gamma > 0:
        out.extend((rates.gamma, c) for c in d.C)
    if rates.zeta > 0:
        out.append((rates.zeta, d.P))
    return out


def propagate_lindblad(
    dressed: DressedOperators,
    rates: Rates | SystemParams,
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    drive: TimeDependentHamiltonian | None = None,
    observables: Mapping[str, np.ndarray] | None = None,
    populations: Mapping[str, BareState | str] | None = None,
    rho0_basis: str = "bare",
    t0: float = 0.0,
    max_samples: int = MAX_SAMPLES,
    metadata: dict | None = None,
) -> DynamicsTrace:
    """Integrate the zero-temperature master equation in the retained dressed subspace.

    drho/dt = -i[H, rho] + sum_O rate (O rho O^+ - 1/2 {O^+ O, rho}), with
    H = diag(E_k) plus an optional drive projected onto the subspace.
    ``rho0`` may be a bare-basis state vector or density matrix
    (``rho0_basis="bare"``), or already dressed (``rho0_basis="dressed"``).
    ``observables`` are dressed-basis K x K matrices (see ``correlator_operators``).
    """
    if isinstance(rates, SystemParams):
        rates = Rates.from_params(rates)
    rho = np.array(rho0, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    captured = 1.0
    if rho0_basis == "bare":
        total = float(np.trace(rho).real)
        rho = dressed.to_dressed(rho)
        captured = float(np.trace(rho).real) / total
        if abs(1 - captured) > 1e-6:
            warnings.warn(
                f"initial state has weight {1 - captured:.3e} outside the lowest {dressed.size} dressed states; increase K",
                KConvergenceWarning,
                stacklevel=2,
            )
        rho /= np.trace(rho).real
    elif rho0_basis != "dressed":
        raise ValueError("rho0_basis must be 'bare' or 'dressed'")
    if abs(np.trace(rho).real - 1) > 1e-10:
        raise ValueError("rho0 must have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
        raise ValueError("rho0 must be positive semidefinite")

    energies = dressed.energies
    n_steps, h = _steps_for(t_final, dt)
    freq = energies[:, None] - energies[None, :]
    phase_half = np.exp(-1j * freq * h / 2)
    phase_full = phase_half * phase_half
    jumps = _jump_operators(dressed, rates)
    jump_terms = [(r, o, o.conj().T) for r, o in jumps]
    decay = sum((0.5 * r * (o.conj().T @ o) for r, o in jumps), np.zeros((dressed.size, dressed.size), dtype=complex))
    drive_terms = []
    if drive is not None:
        if not np.allclose(drive.static.dense(), 0):
            raise ValueError("drive must have no static part")
        drive_terms = [(c, dressed.project(op)) for c, op in drive.terms]

    def rhs(t, r):
        out = np.zeros_like(r)
        for coef, op in drive_terms:
            hc = float(coef(t)) * op
            out += -1j * (hc @ r - r @ hc)
        if jump_terms:
            out -= decay @ r + r @ decay
            for rate, o, od in jump_terms:
                out += rate * (o @ r @ od)
        return out

    obs = dict(observables or {})
    pops = {}
    if populations:
        pops = {k: dressed.basis.index(as_state(s)) for k, s in populations.items()}
    samples = _sample_steps(n_steps, max_samples)
    times = t0 + samples * h
    series = {name: np.empty(len(samples)) for name in list(pops) + list(obs)}
    trace_err = np.empty(len(samples))
    min_eig = np.empty(len(samples))
    herm_err = np.empty(len(samples))

    def record(slot):
        for name, i in pops.items():
            row = dressed.vectors[i]
            series[name][slot] = float(np.real(row @ rho @ row.conj()))
        for name, op in obs.items():
            series[name][slot] = _expect(rho, op)
        trace_err[slot] = abs(np.trace(rho).real - 1)
        herm_err[slot] = np.abs(rho - rho.conj().T).max()
        min_eig[slot] = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if trace_err[slot] > TRACE_ABORT:
            raise PropagationError(f"trace drift {trace_err[slot]:.3e} exceeds {TRACE_ABORT}; reduce dt (currently {h:.4g})")

    slot = 0
    record(slot)
    slot += 1
    for k in range(n_steps):
        t = t0 + k * h
        k1 = rhs(t, rho)
        k2 = rhs(t + h / 2, phase_half * (rho + 0.5 * h * k1))
        k3 = rhs(t + h / 2, phase_half * rho + 0.5 * h * k2)
        k4 = rhs(t + h, phase_full * rho + h * phase_half * k3)
        rho = phase_full * (rho + h / 6 * k1) + (h / 6) * phase_half * (2 * k2 + 2 * k3) + (h / 6) * k4
        if slot < len(samples) and k + 1 == samples[slot]:
            record(slot)
            slot += 1
    meta = {
        "solver": "lawson_rk4_dressed",
        "dt": h,
        "n_steps": n_steps,
        "K": dressed.size,
        "rates": {"kappa": rates.kappa, "gamma": rates.gamma, "zeta": rates.zeta},
        "initial_weight_captured": captured,
        "max_trace_error": float(trace_err.max()),
        "min_eigenvalue": float(min_eig.min()),
        "max_hermiticity_error": float(herm_err.max()),
    }
    meta.update(metadata or {})
    trace = DynamicsTrace(times, series, meta, rho)
    trace.series["trace_error"] = trace_err
    trace.series["min_eigenvalue"] = min_eig
    return trace


def peak_change(a: DynamicsTrace, b: DynamicsTrace, names) -> dict[str, float]:
    """Relative change of each series maximum between two traces."""
    out = {}
    for name in names:
        pa, pb = float(np.max(a[name])), float(np.max(b[name]))
        out[name] = abs(pa - pb) / max(abs(pa), 1e-300)
    return out


def max_series_change(a: DynamicsTrace, b: DynamicsTrace, names) -> dict[str, float]:
    """Max |a - b| over common sample times, relative to max |a|, per series."""
    common, ia, ib = np.intersect1d(np.round(a.times, 9), np.round(b.times, 9), return_indices=True)
    if len(common) == 0:
        raise ValueError("traces share no sample times")
    out = {}
    for name in names:
        xa, xb = a[name][ia], b[name][ib]
        out[name] = float(np.abs(xa - xb).max() / max(np.abs(xa).max(), 1e-300))
    return out


def check_k_convergence(a: DynamicsTrace, b: DynamicsTrace, names, tol: float = K_CONVERGENCE_TOL) -> dict[str, float]:
    """Compare observable peaks for K and 2K; warn if any moves by more than tol."""
    change = peak_change(a, b, names)
    bad = {k: v for k, v in change.items() if v > tol}
    if bad:
        warnings.warn(f"doubling K changes observable peaks by more than {tol:.0%}: {bad}", KConvergenceWarning, stacklevel=2)
    return change


def envelope_peaks(times: np.ndarray, values: np.ndarray, min_separation: float) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima of an oscillating series, at least ``min_separation`` apart in time."""
    from scipy.signal import find_peaks

    if len(times) < 3:
        return np.array([]), np.array([])
    spacing = float(times[1] - times[0])
    idx, _ = find_peaks(values, distance=max(1, int(min_separation / spacing)))
    return times[idx], values[idx]


def dominant_frequencies(times: np.ndarray, values: np.ndarray, n_peaks: int = 2, rel_height: float = 0.1) -> np.ndarray:
    """Angular frequencies of the strongest spectral lines of a uniformly sampled series."""
    from scipy.signal import find_peaks

    y = values - values.mean()
    dt = float(times[1] - times[0])
    pad = 8 * len(y)
    spec = np.abs(np.fft.rfft(y * np.hanning(len(y)), n=pad))
    freqs = 2 * np.pi * np.fft.rfftfreq(pad, d=dt)
    idx, props = find_peaks(spec, height=rel_height * spec.max())
    order = np.argsort(props["peak_heights"])[::-1][:n_peaks]
    return freqs[idx[order]]
