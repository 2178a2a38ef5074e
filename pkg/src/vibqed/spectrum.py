"""Exact diagonalization, level tracking and avoided-crossing analysis."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .hamiltonian import CavityScan, InteractionMode, SystemParams
from .hilbert import Basis, BareState, BasisSpec, OperatorMatrix, as_state, build_basis
from .perturbation import CASES, closed_form_coupling, get_case, predicted_resonance

RESIDUAL_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10
HERMITIAN_TOL = 1e-12
FIDELITY_WARNING = 0.9
AMBIGUITY_THRESHOLD = 0.5
REFINE_TOL = 1e-6


class NumericalError(RuntimeError):
    pass


class BracketError(ValueError):
    pass


class LowFidelityWarning(UserWarning):
    pass


class TrackingAmbiguityWarning(UserWarning):
    pass


def default_basis_spec(n_ions: int) -> BasisSpec:
    """Cutoffs for which doubling moves the acceptance-configuration gaps by < 0.1%."""
    return BasisSpec(1, 8, 7) if n_ions == 1 else BasisSpec(n_ions, 4, 5)


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: Basis | None = None
    params: SystemParams | None = None

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    def weights(self, state: BareState | str) -> np.ndarray:
        """|<s|psi_k>|^2 for every eigenvector k."""
        return np.abs(self.eigenvectors[self._index(state)]) ** 2

    def _index(self, state) -> int:
        if isinstance(state, (int, np.integer)):
            return int(state)
        if self.basis is None:
            raise ValueError("spectrum has no basis attached; pass flat indices")
        return self.basis.index(state)

    def dominant_labels(self) -> list[BareState]:
        if self.basis is None:
            raise ValueError("spectrum has no basis attached")
        idx = np.argmax(np.abs(self.eigenvectors) ** 2, axis=0)
        return [self.basis.state(int(i)) for i in idx]

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def diagonalize(h, basis: Basis | None = None, params: SystemParams | None = None, check: bool = True) -> Spectrum:
    """Full dense eigendecomposition of a Hermitian operator, ascending eigenvalues."""
    if isinstance(h, OperatorMatrix):
        basis = basis or h.basis
        mat = h.dense()
    else:
        mat = np.asarray(h)
    scale = max(1.0, float(np.abs(mat).max()) if mat.size else 1.0)
    herm_err = float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0
    if herm_err >= HERMITIAN_TOL * scale:
        raise NumericalError(f"matrix is not Hermitian: max|H - H^+| = {herm_err:.3e}")
    w, v = sla.eigh(mat)
    if check:
        norm = float(np.abs(w).max()) if w.size else 0.0  # spectral norm of a Hermitian matrix
        residual = np.linalg.norm(mat @ v - v * w, axis=0).max()
        if residual > RESIDUAL_TOL * max(norm, 1.0):
            raise NumericalError(f"eigen-residual {residual:.3e} exceeds tolerance")
        ortho = np.abs(v.conj().T @ v - np.eye(len(w))).max()
        if ortho > ORTHONORMAL_TOL:
            raise NumericalError(f"eigenvectors not orthonormal to {ORTHONORMAL_TOL}: {ortho:.3e}")
    return Spectrum(w, v, basis, params)


# ---------------------------------------------------------------------------
# level tracking


@dataclass
class LevelTracks:
    knob: np.ndarray
    energies: np.ndarray  # (n_points, n_levels), columns follow continuous curves
    labels: list[BareState]  # dominant bare state of each curve at the first point
    end_labels: list[BareState]  # dominant bare state of each curve at the last point
    ambiguous: list[int] = field(default_factory=list)  # scan indices with best overlap < 0.5
    min_overlap: float = 1.0

    def curve(self, label: BareState | str) -> np.ndarray:
        return self.energies[:, self.labels.index(as_state(label))]


def track_levels(
    basis: Basis,
    params_list: list[SystemParams],
    knob: list[float] | None = None,
    mode: InteractionMode = "linearized",
    n_levels: int | None = None,
) -> LevelTracks:
    """Follow levels through a scan by maximal eigenvector overlap between neighbours."""
    from .hamiltonian import build_h0, build_hint

    if not params_list:
        raise ValueError("empty scan")
    n_levels = n_levels or basis.dimension
    spectra = [diagonalize(build_h0(basis, p) + build_hint(basis, p, mode), basis, p) for p in params_list]
    return _track(spectra, np.asarray(knob if knob is not None else range(len(params_list)), dtype=float), n_levels)


def track_cavity_scan(basis: Basis, params: SystemParams, omega_c_values, mode: InteractionMode = "linearized", n_levels: int | None = None) -> LevelTracks:
    """Level tracking over omega_c using the cached dense cavity scan."""
    scan = CavityScan(basis, params, mode)
    spectra = [diagonalize(scan(w), basis, params.replace(omega_c=float(w))) for w in omega_c_values]
    return _track(spectra, np.asarray(omega_c_values, dtype=float), n_levels or basis.dimension)


def _track(spectra: list[Spectrum], knob: np.ndarray, n_levels: int) -> LevelTracks:
    n_points = len(spectra)
    dim = spectra[0].dimension
    n_levels = min(n_levels, dim)
    order = np.arange(n_levels)
    energies = np.empty((n_points, n_levels))
    energies[0] = spectra[0].eigenvalues[:n_levels]
    prev_vecs = spectra[0].eigenvectors[:, :n_levels]
    start = [spectra[0].basis.state(int(i)) for i in np.argmax(np.abs(prev_vecs) ** 2, axis=0)]
    ambiguous, min_overlap = [], 1.0
    # the tracked window may exchange levels with states just above it
    window = min(dim, n_levels + max(4, n_levels // 4))
    for k in range(1, n_points):
        vecs = spectra[k].eigenvectors[:, :window]
        overlap = np.abs(prev_vecs.conj().T @ vecs)
        # small penalty on index distance makes exact ties fall back to ascending order
        cost = -overlap + 1e-12 * np.abs(order[:, None] - np.arange(window)[None, :])
        rows, cols = linear_sum_assignment(cost)
        best = overlap[rows, cols]
        if best.min() < AMBIGUITY_THRESHOLD:
            ambiguous.append(k)
        min_overlap = min(min_overlap, float(best.min()))
        energies[k] = spectra[k].eigenvalues[cols]
        prev_vecs = vecs[:, cols]
    if ambiguous:
        warnings.warn(
            f"level tracking ambiguous at {len(ambiguous)} scan point(s) (overlap < {AMBIGUITY_THRESHOLD}); refine the scan step",
            TrackingAmbiguityWarning,
            stacklevel=3,
        )
    end = [spectra[0].basis.state(int(i)) for i in np.argmax(np.abs(prev_vecs) ** 2, axis=0)]
    return LevelTracks(knob, energies, start, end, ambiguous, min_overlap)


# ---------------------------------------------------------------------------
# two-state analysis


@dataclass(frozen=True)
class PairAnalysis:
    gap: float
    fidelity: float
    levels: tuple[int, int]  # eigenvalue indices, ascending
    populations: np.ndarray  # 2x2: rows = eigenvectors, cols = pair states


def analyze_pair(spectrum: Spectrum, pair) -> PairAnalysis:
    """Pick the two eigenvectors with the largest combined weight on the pair."""
    w1 = spectrum.weights(pair[0])
    w2 = spectrum.weights(pair[1])
    total = w1 + w2
    top = np.sort(np.argsort(total)[-2:])
    lo, hi = int(top[0]), int(top[1])
    gap = float(abs(spectrum.eigenvalues[hi] - spectrum.eigenvalues[lo]))
    fidelity = float(min(1.0, 0.5 * (total[lo] + total[hi])))
    pops = np.array([[w1[lo], w2[lo]], [w1[hi], w2[hi]]])
    return PairAnalysis(gap, fidelity, (lo, hi), pops)


def two_state_fidelity(spectrum: Spectrum, pair) -> float:
    """F = 1/2 sum over the two best eigenvectors of |<s1|psi>|^2 + |<s2|psi>|^2."""
    return analyze_pair(spectrum, pair).fidelity


@dataclass
class CrossingResult:
    omega_c_star: float
    gap: float
    fidelity: float
    tracked_pair: tuple[BareState, BareState]
    params: SystemParams
    basis_spec: BasisSpec
    mixing_imbalance: float = 0.0
    bracket: tuple[float, float] = (0.0, 0.0)
    warnings: list[str] = field(default_factory=list)

    def as_row(self) -> dict:
        return {
            "nu": self.params.nu,
            "eta_g": self.params.eta_g,
            "omega_c_star": self.omega_c_star,
            "gap": self.gap,
            "fidelity": self.fidelity,
        }


def default_bracket(case_id: str, params: SystemParams) -> tuple[float, float]:
    """Window around the Stark-shifted resonance of a family."""
    case = get_case(case_id)
    center = predicted_resonance(case_id, params)
    omega = abs(closed_form_coupling(case_id, params).value)
    if not np.isfinite(omega):
        omega = 0.0
    dm = abs(case.photon_difference)
    half = max(0.01 if case.n_ions == 1 else 0.005, 20 * omega / dm)
    return center - half, center + half


def find_splitting(
    pair,
    params: SystemParams,
    bracket: tuple[float, float] | None = None,
    basis_spec: BasisSpec | None = None,
    mode: InteractionMode = "linearized",
    case_id: str | None = None,
    coarse_points: int = 201,
    tol: float = REFINE_TOL,
    scan: CavityScan | None = None,
) -> CrossingResult:
    """Locate the minimum splitting of a bare-state pair over omega_c.

    A coarse grid over the bracket isolates the gap minimum, which is then
    refined by bounded Brent minimization (golden section with parabolic
    steps) to |d omega_c| < tol.
    """
    pair = (as_state(pair[0]), as_state(pair[1]))
    n_ions = pair[0].n_ions
    spec = basis_spec or default_basis_spec(n_ions)
    if spec.n_ions != n_ions:
        raise ValueError("basis ion count does not match the pair")
    if bracket is None:
        if case_id is None:
            raise BracketError("either a bracket or a case_id is required")
        bracket = default_bracket(case_id, params)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"invalid bracket ({lo}, {hi})")
    if scan is None:
        scan = CavityScan(build_basis(spec), params, mode)
    basis = scan.basis
    for s in pair:
        if s not in basis:
            raise ValueError(f"{s} lies outside the basis {spec}")

    def analyse(wc):
        return analyze_pair(diagonalize(scan(wc), basis, check=False), pair)

    grid = np.linspace(lo, hi, coarse_points)
    gaps = np.array([analyse(w).gap for w in grid])
    j = int(np.argmin(gaps))
    if j == 0 or j == len(grid) - 1:
        raise BracketError(f"gap minimum of {pair[0]}/{pair[1]} lies on the bracket edge ({lo:.6g}, {hi:.6g}); widen or move the bracket")
    res = minimize_scalar(lambda w: analyse(w).gap, bounds=(grid[j - 1], grid[j + 1]), method="bounded", options={"xatol": tol / 4})
    wc = float(res.x)
    spectrum = diagonalize(scan(wc), basis, params.replace(omega_c=wc))
    info = analyze_pair(spectrum, pair)
    p = info.populations
    imbalance = float(max(abs(p[0, 0] - p[0, 1]) / max(p[0].sum(), 1e-300), abs(p[1, 0] - p[1, 1]) / max(p[1].sum(), 1e-300)))
    notes = []
    if info.fidelity < FIDELITY_WARNING:
        msg = f"two-state fidelity {info.fidelity:.3f} < {FIDELITY_WARNING}: resonance is not a clean two-level crossing"
        notes.append(msg)
        warnings.warn(msg, LowFidelityWarning, stacklevel=2)
    return CrossingResult(wc, info.gap, info.fidelity, pair, params.replace(omega_c=wc), spec, imbalance, (lo, hi), notes)


def find_case_splitting(case_id: str, params: SystemParams, **kwargs) -> CrossingResult:
    """find_splitting on the reference pair of a resonance family."""
    return find_splitting(get_case(case_id).pair, params, case_id=case_id, **kwargs)


@dataclass
class ConvergenceReport:
    base: CrossingResult
    doubled: CrossingResult
    gap_change: float
    position_change: float

    @property
    def converged(self) -> bool:
        return self.gap_change < 1e-3


def check_cutoff_convergence(pair, params: SystemParams, basis_spec: BasisSpec | None = None, **kwargs) -> ConvergenceReport:
    """Repeat find_splitting with both Fock cutoffs doubled; report relative changes.

    The doubled basis is searched in a window of a few gaps around the base
    crossing (the position barely moves), falling back to the full bracket.
    """
    pair = (as_state(pair[0]), as_state(pair[1]))
    spec = basis_spec or default_basis_spec(pair[0].n_ions)
    base = find_splitting(pair, params, basis_spec=spec, **kwargs)
    half = max(2 * base.gap, 1e-4 * base.omega_c_star)
    local = {**kwargs, "bracket": (base.omega_c_star - half, base.omega_c_star + half), "coarse_points": 21}
    local.pop("case_id", None)
    try:
        doubled = find_splitting(pair, params, basis_spec=spec.doubled(), **local)
    except BracketError:
        doubled = find_splitting(pair, params, basis_spec=spec.doubled(), **kwargs)
    return ConvergenceReport(
        base,
        doubled,
        abs(doubled.gap - base.gap) / max(base.gap, 1e-300),
        abs(doubled.omega_c_star - base.omega_c_star) / base.omega_c_star,
    )


# ---------------------------------------------------------------------------
# maps


@dataclass
class MapPoint:
    nu: float
    eta_g: float
    result: CrossingResult | None
    error: str | None = None

    def as_row(self) -> dict:
        if self.result is None:
            return {"nu": self.nu, "eta_g": self.eta_g, "omega_c_star": np.nan, "gap": np.nan, "fidelity": np.nan}
        return self.result.as_row()


def _map_point(args) -> MapPoint:
    case_id, nu, eta_g, spec, mode, coarse_points = args
    case = get_case(case_id)
    params = SystemParams(nu=nu, omega_c=case.resonance(nu, nu), eta_g=eta_g)
    if eta_g == 0.0:
        wc = case.resonance(nu, nu)
        return MapPoint(nu, eta_g, CrossingResult(wc, 0.0, 1.0, case.pair, params, spec or default_basis_spec(case.n_ions)))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = find_case_splitting(case_id, params, basis_spec=spec, mode=mode, coarse_points=coarse_points)
        return MapPoint(nu, eta_g, res)
    except Exception as exc:  # per-point failures are recorded, the map continues
        return MapPoint(nu, eta_g, None, f"{type(exc).__name__}: {exc}")


def splitting_map(
    case_id: str,
    nu_values,
    eta_g_values,
    basis_spec: BasisSpec | None = None,
    mode: InteractionMode = "linearized",
    workers: int = 1,
    coarse_points: int = 201,
) -> list[MapPoint]:
    """One CrossingResult per (nu, eta_g) grid point, ordered eta_g-major then nu."""
    if case_id not in CASES:
        raise ValueError(f"unknown case {case_id!r}")
    tasks = [(case_id, float(nu), float(x), basis_spec, mode, coarse_points) for x in eta_g_values for nu in nu_values]
    if workers <= 1:
        return [_map_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_map_point, tasks))
