"""Truncated Hilbert space: N ion qubits x one photon mode x one phonon mode.

States are ordered lexicographically by (qubit pattern, photons, phonons),
which is the Kronecker order ``qubits (ion 1 first) ⊗ photon ⊗ phonon``
with |g> = 0 and |e> = 1 on each qubit factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sps

DEFAULT_MAX_DIMENSION = 4096
HERMITIAN_TOL = 1e-12


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class BasisSpec:
    n_ions: int
    photon_cutoff: int
    phonon_cutoff: int

    def __post_init__(self):
        if self.n_ions < 1:
            raise BasisError(f"n_ions must be >= 1, got {self.n_ions}")
        if self.photon_cutoff < 0 or self.phonon_cutoff < 0:
            raise BasisError("Fock cutoffs must be >= 0")

    @property
    def dimension(self) -> int:
        return 2**self.n_ions * (self.photon_cutoff + 1) * (self.phonon_cutoff + 1)

    def doubled(self) -> BasisSpec:
        """Same ion count with both Fock cutoffs doubled (convergence checks)."""
        return BasisSpec(self.n_ions, 2 * self.photon_cutoff, 2 * self.phonon_cutoff)


@dataclass(frozen=True, order=True)
class BareState:
    qubits: tuple[int, ...]
    photons: int
    phonons: int

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if any(q not in (0, 1) for q in self.qubits):
            raise BasisError(f"qubit pattern must be bits, got {self.qubits}")
        if self.photons < 0 or self.phonons < 0:
            raise BasisError("occupation numbers must be non-negative")

    @classmethod
    def parse(cls, label: str) -> BareState:
        """Parse labels such as ``"g,3,0"`` or ``"eee,0,0"`` (kets allowed)."""
        text = label.strip().strip("|>⟩ ")
        try:
            pattern, m, n = (part.strip() for part in text.split(","))
            qubits = tuple({"g": 0, "e": 1}[c] for c in pattern)
            return cls(qubits, int(m), int(n))
        except (ValueError, KeyError) as exc:
            raise BasisError(f"cannot parse bare state label {label!r}") from exc

    @property
    def n_ions(self) -> int:
        return len(self.qubits)

    @property
    def n_excited(self) -> int:
        return sum(self.qubits)

    def label(self) -> str:
        pattern = "".join("e" if q else "g" for q in self.qubits)
        return f"{pattern},{self.photons},{self.phonons}"

    def __str__(self) -> str:
        return f"|{self.label()}>"


def as_state(state: BareState | str) -> BareState:
    return state if isinstance(state, BareState) else BareState.parse(state)


@dataclass(frozen=True)
class Basis:
    spec: BasisSpec
    states: tuple[BareState, ...]
    _index: dict = field(repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, state: BareState | str) -> int:
        state = as_state(state)
        try:
            return self._index[state]
        except KeyError:
            raise BasisError(f"{state} is outside the truncated basis {self.spec}") from None

    def state(self, index: int) -> BareState:
        return self.states[index]

    def __contains__(self, state) -> bool:
        return as_state(state) in self._index

    def ket(self, state: BareState | str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=complex)
        vec[self.index(state)] = 1.0
        return vec

    @cached_property
    def photon_numbers(self) -> np.ndarray:
        return np.array([s.photons for s in self.states], dtype=float)

    @cached_property
    def phonon_numbers(self) -> np.ndarray:
        return np.array([s.phonons for s in self.states], dtype=float)

    @cached_property
    def jz_values(self) -> np.ndarray:
        return np.array([2 * s.n_excited - s.n_ions for s in self.states], dtype=float)


def build_basis(spec: BasisSpec, max_dimension: int = DEFAULT_MAX_DIMENSION) -> Basis:
    if spec.dimension > max_dimension:
        raise BasisError(
            f"basis dimension {spec.dimension} exceeds the cap {max_dimension}; "
            "lower the cutoffs or raise max_dimension"
        )
    states = tuple(
        BareState(q, m, n)
        for q in itertools.product((0, 1), repeat=spec.n_ions)
        for m in range(spec.photon_cutoff + 1)
        for n in range(spec.phonon_cutoff + 1)
    )
    return Basis(spec, states, {s: i for i, s in enumerate(states)})


class OperatorMatrix:
    """Complex square matrix on a :class:`Basis` (sparse CSR by default)."""

    __slots__ = ("basis", "data", "hermitian")

    def __init__(self, basis: Basis, data, hermitian: bool = False):
        data = sps.csr_matrix(data, dtype=complex) if not isinstance(data, np.ndarray) else data.astype(complex)
        if data.shape != (basis.dimension, basis.dimension):
            raise BasisError(f"matrix shape {data.shape} does not match basis dimension {basis.dimension}")
        self.basis = basis
        self.data = data
        self.hermitian = bool(hermitian)
        if hermitian and self.hermiticity_error() >= HERMITIAN_TOL:
            raise ValueError(f"operator flagged Hermitian but max|M - M^+| = {self.hermiticity_error():.3e}")

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_sparse(self) -> bool:
        return sps.issparse(self.data)

    def dense(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else np.array(self.data)

    def sparse(self) -> sps.csr_matrix:
        return self.data if self.is_sparse else sps.csr_matrix(self.data)

    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(self.basis, self.data.conj().T, self.hermitian)

    def hermiticity_error(self) -> float:
        diff = self.data - self.data.conj().T
        if sps.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.abs(diff).max()) if diff.size else 0.0

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() < tol

    def element(self, bra: BareState | str, ket: BareState | str) -> complex:
        i, j = self.basis.index(bra), self.basis.index(ket)
        return complex(self.data[i, j])

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.data @ vec

    def expect(self, psi: np.ndarray) -> complex:
        return complex(np.vdot(psi, self.data @ psi))

    def _wrap(self, data, hermitian=False) -> OperatorMatrix:
        return OperatorMatrix(self.basis, data, hermitian)

    def _check(self, other: OperatorMatrix):
        if other.basis.spec != self.basis.spec:
            raise BasisError("operators live on different bases")

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return self._wrap(self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return self._wrap(self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self.data)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return self._wrap(self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return self._wrap(self.data @ other.data)
        return self.data @ other

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"OperatorMatrix({kind}, dim={self.basis.dimension}, spec={self.basis.spec})"


def identity(basis: Basis) -> OperatorMatrix:
    return OperatorMatrix(basis, sps.identity(basis.dimension, dtype=complex, format="csr"), hermitian=True)


def _destroy(cutoff: int) -> sps.csr_matrix:
    return sps.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr", dtype=complex)


def _embed(basis: Basis, qubit_ops: list, photon_op=None, phonon_op=None) -> OperatorMatrix:
    spec = basis.spec
    factors = list(qubit_ops)
    factors.append(photon_op if photon_op is not None else sps.identity(spec.photon_cutoff + 1))
    factors.append(phonon_op if phonon_op is not None else sps.identity(spec.phonon_cutoff + 1))
    out = factors[0]
    for f in factors[1:]:
        out = sps.kron(out, f, format="csr")
    return OperatorMatrix(basis, out)


_SIGMA_PLUS = sps.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))  # |e><g| in [g, e] order
_SIGMA_Z = sps.csr_matrix(np.diag([-1.0, 1.0]).astype(complex))
_ID2 = sps.identity(2, dtype=complex, format="csr")


def qubit_operator(basis: Basis, single, ion: int) -> OperatorMatrix:
    """Embed a 2x2 operator (in [g, e] order) acting on one ion."""
    n = basis.spec.n_ions
    if not 0 <= ion < n:
        raise BasisError(f"ion index {ion} out of range for {n} ions")
    ops = [sps.csr_matrix(single, dtype=complex) if i == ion else _ID2 for i in range(n)]
    return _embed(basis, ops)


def phonon_operator(basis: Basis, single) -> OperatorMatrix:
    """Embed an operator acting on the phonon factor only."""
    return _embed(basis, [_ID2] * basis.spec.n_ions, phonon_op=sps.csr_matrix(single, dtype=complex))


@dataclass(frozen=True)
class LadderOperators:
    a: OperatorMatrix
    adag: OperatorMatrix
    b: OperatorMatrix
    bdag: OperatorMatrix
    sigma_plus: tuple[OperatorMatrix, ...]
    sigma_minus: tuple[OperatorMatrix, ...]
    sigma_z: tuple[OperatorMatrix, ...]
    j_plus: OperatorMatrix
    j_minus: OperatorMatrix
    j_z: OperatorMatrix

    @property
    def num_photons(self) -> OperatorMatrix:
        return self.bdag @ self.b

    @property
    def num_phonons(self) -> OperatorMatrix:
        return self.adag @ self.a


def ladder_operators(basis: Basis) -> LadderOperators:
    """All elementary operators on the full tensor space.

    ``a`` lowers the phonon (vibrational) factor and ``b`` the photon factor;
    both are strict truncations, so ``a^+`` annihilates the top phonon level.
    """
    spec = basis.spec
    n_ions = spec.n_ions
    a = _embed(basis, [_ID2] * n_ions, phonon_op=_destroy(spec.phonon_cutoff))
    b = _embed(basis, [_ID2] * n_ions, photon_op=_destroy(spec.photon_cutoff))
    sp = tuple(qubit_operator(basis, _SIGMA_PLUS, i) for i in range(n_ions))
    sm = tuple(s.dag() for s in sp)
    sz = tuple(qubit_operator(basis, _SIGMA_Z, i) for i in range(n_ions))
    j_plus = sp[0]
    j_z = sz[0]
    for i in range(1, n_ions):
        j_plus = j_plus + sp[i]
        j_z = j_z + sz[i]
    return LadderOperators(a, a.dag(), b, b.dag(), sp, sm, sz, j_plus, j_plus.dag(), j_z)
