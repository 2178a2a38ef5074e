"""Model Hamiltonians in units of the qubit frequency (omega0 = 1).

H0    = nu a^+a + omega_c b^+b + (omega0/2) J_z
H_int = eta_g (a^+ + a)(J_+ + J_-)(b^+ + b)                 (linearized)
      = g sin[eta (a^+ + a)] (J_+ + J_-)(b^+ + b)           (full_sine, g = eta_g/eta)
H_d   = A exp[-(t-t0)^2/(2 tau^2)] / (tau sqrt(2 pi)) cos(omega t) (sigma_- + sigma_+)
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
import scipy.sparse as sps

from .hilbert import Basis, BareState, OperatorMatrix, as_state, ladder_operators, phonon_operator

InteractionMode = Literal["linearized", "full_sine"]
INTERACTION_MODES = ("linearized", "full_sine")


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless model parameters; every frequency is a multiple of omega0."""

    nu: float
    omega_c: float
    eta_g: float
    eta: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    zeta: float = 0.0
    omega0: float = 1.0

    def __post_init__(self):
        if self.omega0 != 1.0:
            raise ParameterError("omega0 is the unit of frequency and must equal 1")
        if self.nu <= 0 or self.omega_c <= 0:
            raise ParameterError(f"nu and omega_c must be positive (nu={self.nu}, omega_c={self.omega_c})")
        if self.eta_g < 0 or self.eta < 0:
            raise ParameterError("eta_g and eta must be non-negative")
        for name in ("kappa", "gamma", "zeta"):
            if getattr(self, name) < 0:
                raise ParameterError(f"decay rate {name} must be non-negative")

    def replace(self, **changes) -> SystemParams:
        return dataclasses.replace(self, **changes)

    @property
    def g(self) -> float:
        """Bare coupling g = eta_g / eta (only meaningful for the full-sine model)."""
        if self.eta <= 0:
            raise ParameterError("eta must be > 0 to separate g from eta_g")
        return self.eta_g / self.eta

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian drive pulse; ``channel`` selects the driven degree of freedom."""

    amplitude: float
    tau: float
    t0: float
    omega: float
    target_ion: int = 0
    channel: Literal["ion", "cavity"] = "ion"

    def __post_init__(self):
        if self.tau <= 0:
            raise ParameterError("pulse tau must be positive")
        if self.amplitude < 0:
            raise ParameterError("pulse amplitude must be non-negative")
        if self.channel not in ("ion", "cavity"):
            raise ParameterError(f"unknown pulse channel {self.channel!r}")

    def envelope(self, t):
        return self.amplitude * np.exp(-((t - self.t0) ** 2) / (2 * self.tau**2)) / (self.tau * np.sqrt(2 * np.pi))

    def coefficient(self, t):
        return self.envelope(t) * np.cos(self.omega * t)


@dataclass(frozen=True)
class SweepSpec:
    """Linear cavity-frequency ramp omega_c(t) = omega_c_start + speed * t."""

    omega_c_start: float
    speed: float
    t_final: float

    def __post_init__(self):
        if self.t_final <= 0:
            raise ParameterError("sweep t_final must be positive")

    def omega_c(self, t):
        return self.omega_c_start + self.speed * t

    @property
    def omega_c_final(self) -> float:
        return self.omega_c(self.t_final)


def bare_energy(state: BareState | str, params: SystemParams) -> float:
    s = as_state(state)
    return params.nu * s.phonons + params.omega_c * s.photons + 0.5 * params.omega0 * (2 * s.n_excited - s.n_ions)


def bare_energies(basis: Basis, params: SystemParams) -> np.ndarray:
    return params.nu * basis.phonon_numbers + params.omega_c * basis.photon_numbers + 0.5 * params.omega0 * basis.jz_values


def build_h0(basis: Basis, params: SystemParams) -> OperatorMatrix:
    return OperatorMatrix(basis, sps.diags(bare_energies(basis, params), format="csr"), hermitian=True)


def _sine_of_position(cutoff: int, eta: float) -> np.ndarray:
    """sin[eta (a + a^+)] on a truncated Fock space, via spectral decomposition."""
    x = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)
    x = x + x.T
    w, v = np.linalg.eigh(x)
    return (v * np.sin(eta * w)) @ v.T


def build_hint(basis: Basis, params: SystemParams, mode: InteractionMode = "linearized") -> OperatorMatrix:
    ops = ladder_operators(basis)
    qubit_field = (ops.j_plus + ops.j_minus) @ (ops.b + ops.bdag)
    if mode == "linearized":
        out = params.eta_g * ((ops.a + ops.adag) @ qubit_field)
    elif mode == "full_sine":
        if params.eta <= 0:
            raise ParameterError("full_sine interaction requires eta > 0")
        sine = phonon_operator(basis, _sine_of_position(basis.spec.phonon_cutoff, params.eta))
        out = params.g * (sine @ qubit_field)
    else:
        raise ParameterError(f"unknown interaction mode {mode!r}; expected one of {INTERACTION_MODES}")
    return OperatorMatrix(basis, out.data, hermitian=True)


def build_rabi_interaction(basis: Basis, g: float) -> OperatorMatrix:
    """Phonon-free coupling g (J_+ + J_-)(b^+ + b), used for comparison studies."""
    ops = ladder_operators(basis)
    out = g * ((ops.j_plus + ops.j_minus) @ (ops.b + ops.bdag))
    return OperatorMatrix(basis, out.data, hermitian=True)


Coefficient = Callable[[float], float]


class TimeDependentHamiltonian:
    """H(t) = static + sum_k c_k(t) O_k with real coefficients and Hermitian O_k."""

    def __init__(self, static: OperatorMatrix, terms: list[tuple[Coefficient, OperatorMatrix]] | None = None):
        self.static = static
        self.terms = list(terms or [])
        self.basis = static.basis
        self._dense = None

    @property
    def is_static(self) -> bool:
        return not self.terms

    def __call__(self, t: float) -> OperatorMatrix:
        out = self.static
        for coef, op in self.terms:
            out = out + float(coef(t)) * op
        return OperatorMatrix(self.basis, out.data, hermitian=False)

    def dense(self, t: float) -> np.ndarray:
        """Fast dense evaluation (cached dense pieces)."""
        if self._dense is None:
            self._dense = (self.static.dense(), [(c, o.dense()) for c, o in self.terms])
        static, terms = self._dense
        out = static.copy()
        for coef, op in terms:
            out += float(coef(t)) * op
        return out

    def __add__(self, other: TimeDependentHamiltonian) -> TimeDependentHamiltonian:
        return TimeDependentHamiltonian(self.static + other.static, self.terms + other.terms)


def drive_hamiltonian(basis: Basis, pulse: PulseSpec) -> TimeDependentHamiltonian:
    ops = ladder_operators(basis)
    if pulse.channel == "ion":
        if not 0 <= pulse.target_ion < basis.spec.n_ions:
            raise ParameterError(f"target_ion {pulse.target_ion} out of range")
        op = ops.sigma_plus[pulse.target_ion] + ops.sigma_minus[pulse.target_ion]
    else:
        op = ops.b + ops.bdag
    zero = OperatorMatrix(basis, sps.csr_matrix((basis.dimension, basis.dimension), dtype=complex))
    return TimeDependentHamiltonian(zero, [(pulse.coefficient, op)])


def total_hamiltonian(
    basis: Basis,
    params: SystemParams,
    sweep: SweepSpec | None = None,
    pulse: PulseSpec | None = None,
    mode: InteractionMode = "linearized",
) -> TimeDependentHamiltonian:
    if sweep is not None:
        params = params.replace(omega_c=sweep.omega_c_start)
    static = build_h0(basis, params) + build_hint(basis, params, mode)
    h = TimeDependentHamiltonian(static)
    if sweep is not None:
        n_photon = ladder_operators(basis).num_photons
        speed = sweep.speed
        h.terms.append((lambda t: speed * t, n_photon))
    if pulse is not None:
        h = h + drive_hamiltonian(basis, pulse)
    return h


class CavityScan:
    """Dense H(omega_c) = H_fixed + omega_c b^+b for fast scans over the cavity frequency."""

    def __init__(self, basis: Basis, params: SystemParams, mode: InteractionMode = "linearized"):
        self.basis = basis
        self.params = params
        self.mode = mode
        h0 = build_h0(basis, params.replace(omega_c=1.0)).dense()
        self.photon_numbers = basis.photon_numbers
        self.fixed = h0 - np.diag(self.photon_numbers) + build_hint(basis, params, mode).dense()

    def __call__(self, omega_c: float) -> np.ndarray:
        h = self.fixed.copy()
        h[np.diag_indices_from(h)] += omega_c * self.photon_numbers
        return h
