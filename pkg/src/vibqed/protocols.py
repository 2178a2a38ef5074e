"""Entangled-state preparation: three-quantum N00N state and GHZ4 state.

Both recipes start from a product state, let a third-order resonance rotate
one branch for t_k = pi (4k + 3) / (2 Omega_eff), then project one subsystem
and renormalize.

Effective engine: evolution in the interaction picture of H0 under the
resonant flip-flop H_I = Omega_eff (|f><i| + h.c.), the convention under which
|i> -> cos(Omega t)|i> - i sin(Omega t)|f>.

Full engine: exact evolution under H0 + H_int at the numerically located
resonance, transformed to the interaction picture of H0. Because the true
coupling sign and residual Stark phases are not part of the recipe, the full
engine also reports the fidelity maximized over a relative phase between the
two target branches (a local phase rotation) together with that phase.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .hamiltonian import SystemParams, build_h0, build_hint
from .hilbert import BareState, BasisSpec, build_basis, ladder_operators
from .perturbation import closed_form_coupling, get_case
from .spectrum import default_basis_spec, find_case_splitting

Engine = Literal["effective", "full"]
Timing = Literal["numerical", "closed_form"]


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProtocolSpec:
    kind: Literal["noon3", "ghz4"]
    params: SystemParams
    theta: float = math.pi / 4
    phi: float = 0.0
    k: int = 0
    basis_spec: BasisSpec | None = None
    timing: Timing = "numerical"

    def __post_init__(self):
        if self.kind not in ("noon3", "ghz4"):
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("timing index k must be non-negative")

    @property
    def case_id(self) -> str:
        return "d" if self.kind == "noon3" else "g"

    def with_params(self, **changes) -> ProtocolSpec:
        return ProtocolSpec(self.kind, self.params.replace(**changes), self.theta, self.phi, self.k, self.basis_spec, self.timing)


@dataclass
class ProtocolResult:
    kind: str
    engine: str
    final_state: np.ndarray  # post-measurement, renormalized, in the reduced basis
    target_state: np.ndarray
    reduced_labels: list[str]
    fidelity: float
    success_probability: float
    time: float
    omega_eff: float
    omega_c: float
    local_phase_fidelity: float = 0.0
    phase_offset: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def as_row(self, spec: ProtocolSpec) -> dict:
        return {
            "kind": self.kind,
            "theta": spec.theta,
            "phi": spec.phi,
            "k": spec.k,
            "engine": self.engine,
            "fidelity": self.fidelity,
            "local_phase_fidelity": self.local_phase_fidelity,
            "success_probability": self.success_probability,
        }


def protocol_time(omega_eff: float, k: int) -> float:
    return math.pi * (4 * k + 3) / (2 * abs(omega_eff))


def _layout(kind: str, theta: float, phi: float):
    """Initial bare-state amplitudes, the measured-outcome filter and the target."""
    c, s, ph = math.cos(theta), math.sin(theta), cmath.exp(1j * phi)
    if kind == "noon3":
        initial = {BareState((1,), 0, 3): c, BareState((0,), 0, 3): ph * s}
        keep = lambda st: st.qubits == (0,)  # measure the ion in |g>
        reduce = lambda st: (st.photons, st.phonons)
        target = {(3, 0): 1j / math.sqrt(2), (0, 3): ph / math.sqrt(2)}
        branches = ((3, 0), (0, 3))
    else:
        initial = {BareState((0, 0, 0), 1, 0): c, BareState((0, 0, 0), 0, 0): ph * s}
        keep = lambda st: st.photons == 0  # measure the cavity in vacuum
        reduce = lambda st: (st.qubits, st.phonons)
        target = {((0, 0, 0), 0): ph / math.sqrt(2), ((1, 1, 1), 1): 1j / math.sqrt(2)}
        branches = (((0, 0, 0), 0), ((1, 1, 1), 1))
    return initial, keep, reduce, target, branches


def _reduced_label(key) -> str:
    a, b = key
    if isinstance(a, tuple):
        return "".join("e" if q else "g" for q in a) + f",{b}"
    return f"{a},{b}"


def _measure(basis, psi, kind, theta, phi):
    _, keep, reduce, target, branches = _layout(kind, theta, phi)
    amps: dict = {}
    for idx, st in enumerate(basis.states):
        if keep(st):
            key = reduce(st)
            amps[key] = amps.get(key, 0) + psi[idx]
    keys = sorted(amps, key=lambda k: (str(k[0]), k[1]))
    for key in target:
        if key not in amps:
            keys.append(key)
            amps[key] = 0.0
    vec = np.array([amps[k] for k in keys], dtype=complex)
    prob = float(np.vdot(vec, vec).real)
    if prob < 1e-14:
        raise ProtocolError("measurement outcome has zero probability")
    vec /= math.sqrt(prob)
    tgt = np.array([target.get(k, 0.0) for k in keys], dtype=complex)
    fidelity = float(abs(np.vdot(tgt, vec)) ** 2)
    i1, i2 = keys.index(branches[0]), keys.index(branches[1])
    # best fidelity over a relative phase between the two target branches
    z1 = np.conj(tgt[i1]) * vec[i1]
    z2 = np.conj(tgt[i2]) * vec[i2]
    local = float((abs(z1) + abs(z2)) ** 2)
    offset = float(cmath.phase(z1) - cmath.phase(z2)) if abs(z1) > 0 and abs(z2) > 0 else 0.0
    offset = (offset + math.pi) % (2 * math.pi) - math.pi
    return vec, tgt, [_reduced_label(k) for k in keys], fidelity, prob, max(local, fidelity), offset


def _initial_vector(basis, kind, theta, phi):
    initial = _layout(kind, theta, phi)[0]
    psi = np.zeros(basis.dimension, dtype=complex)
    for st, amp in initial.items():
        psi[basis.index(st)] = amp
    return psi


def _flip_flop_generator(kind: str, basis, params: SystemParams) -> tuple[np.ndarray, float]:
    """Resonant flip-flop with positive coupling, plus the two-state Rabi rate."""
    ops = ladder_operators(basis)
    x = params.eta_g
    if kind == "noon3":
        v = 9 * x**3 / 4
        ad3 = ops.adag @ ops.adag @ ops.adag
        fwd = ad3 @ ops.b @ ops.b @ ops.b @ ops.sigma_plus[0]
        omega = closed_form_coupling("d", params).value
    else:
        v = closed_form_coupling("g", params).value
        triple = ops.sigma_plus[0] @ ops.sigma_plus[1] @ ops.sigma_plus[2]
        fwd = ops.adag @ ops.b @ triple
        omega = v
    return (v * (fwd + fwd.dag())).dense(), omega


@functools.lru_cache(maxsize=32)
def _crossing(case_id: str, params: SystemParams, bspec: BasisSpec):
    # theta, phi and k sweeps share one resonance search
    return find_case_splitting(case_id, params, basis_spec=bspec)


def _run(spec: ProtocolSpec, engine: Engine, time: float | None) -> ProtocolResult:
    case = get_case(spec.case_id)
    nu = spec.params.nu
    if engine == "effective":
        basis = build_basis(spec.basis_spec or (BasisSpec(1, 3, 3) if spec.kind == "noon3" else BasisSpec(3, 1, 1)))
        params = spec.params.replace(omega_c=case.resonance(nu, nu))
        gen, omega = _flip_flop_generator(spec.kind, basis, params)
        t = protocol_time(omega, spec.k) if time is None else time
        psi = sla.expm(-1j * t * gen) @ _initial_vector(basis, spec.kind, spec.theta, spec.phi)
        omega_c = params.omega_c
        diagnostics = {}
    elif engine == "full":
        bspec = spec.basis_spec or default_basis_spec(case.n_ions)
        basis = build_basis(bspec)
        if spec.timing == "numerical":
            crossing = _crossing(spec.case_id, spec.params, bspec)
            omega_c, omega = crossing.omega_c_star, crossing.gap / 2
            diagnostics = {"crossing_fidelity": crossing.fidelity, "gap": crossing.gap}
        else:
            omega_c = case.resonance(nu, nu)
            omega = abs(closed_form_coupling(spec.case_id, spec.params).value)
            diagnostics = {}
        params = spec.params.replace(omega_c=omega_c)
        h0 = build_h0(basis, params)
        h = (h0 + build_hint(basis, params)).dense()
        t = protocol_time(omega, spec.k) if time is None else time
        w, v = sla.eigh(h)
        psi0 = _initial_vector(basis, spec.kind, spec.theta, spec.phi)
        psi = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))
        psi = np.exp(1j * h0.data.diagonal() * t) * psi  # to the interaction picture of H0
    else:
        raise ValueError(f"unknown engine {engine!r}")
    vec, tgt, labels, fidelity, prob, local, offset = _measure(basis, psi, spec.kind, spec.theta, spec.phi)
    if engine == "effective":
        local = max(local, fidelity)
    return ProtocolResult(spec.kind, engine, vec, tgt, labels, fidelity, prob, t, omega, omega_c, local, offset, diagnostics)


def run_noon3(spec: ProtocolSpec, engine: Engine = "effective", time: float | None = None) -> ProtocolResult:
    """Ion superposition x |0 photons, 3 phonons> -> N00N state after measuring the ion in |g>."""
    if spec.kind != "noon3":
        raise ValueError("spec.kind must be 'noon3'")
    return _run(spec, engine, time)


def run_ghz4(spec: ProtocolSpec, engine: Engine = "effective", time: float | None = None) -> ProtocolResult:
    """|ggg> x photon superposition x |0 phonons> -> GHZ4 after detecting the cavity in vacuum."""
    if spec.kind != "ghz4":
        raise ValueError("spec.kind must be 'ghz4'")
    return _run(spec, engine, time)


def run_protocol(spec: ProtocolSpec, engine: Engine = "effective", time: float | None = None) -> ProtocolResult:
    return _run(spec, engine, time)
