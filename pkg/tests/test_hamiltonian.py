import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibqed.hamiltonian import (
    CavityScan,
    ParameterError,
    PulseSpec,
    SweepSpec,
    SystemParams,
    bare_energy,
    build_h0,
    build_hint,
    build_rabi_interaction,
    drive_hamiltonian,
    total_hamiltonian,
)
from vibqed.hilbert import BasisSpec, build_basis, ladder_operators

P = SystemParams(nu=0.2, omega_c=0.4, eta_g=0.06)


def test_params_validation():
    with pytest.raises(ParameterError):
        SystemParams(nu=0.2, omega_c=0.4, eta_g=0.06, omega0=2.0)
    with pytest.raises(ParameterError):
        SystemParams(nu=-0.2, omega_c=0.4, eta_g=0.06)
    with pytest.raises(ParameterError):
        SystemParams(nu=0.2, omega_c=0.0, eta_g=0.06)
    assert P.replace(nu=0.3).nu == 0.3
    assert P.to_dict()["eta_g"] == 0.06


def test_bare_energies():
    assert math.isclose(bare_energy("g,3,0", P), -0.5 + 3 * 0.4)
    assert math.isclose(bare_energy("e,0,1", P), 0.5 + 0.2)
    assert math.isclose(bare_energy("eee,0,0", P), 1.5)
    basis = build_basis(BasisSpec(2, 2, 2))
    h0 = build_h0(basis, P).dense()
    assert np.allclose(h0, np.diag(np.diag(h0)))
    assert np.allclose(np.diag(h0), [bare_energy(s, P) for s in basis.states])


@pytest.mark.parametrize("n_ions", [1, 3])
def test_interaction_elements(n_ions):
    basis = build_basis(BasisSpec(n_ions, 3, 3))
    h = build_hint(basis, P)
    assert h.is_hermitian()
    g = "g" * n_ions
    e = "e" + "g" * (n_ions - 1)
    # each term changes every subsystem by one quantum
    assert np.isclose(h.element(f"{e},2,3", f"{g},1,2"), 0.06 * math.sqrt(2) * math.sqrt(3))
    assert np.isclose(h.element(f"{e},0,0", f"{g},1,1"), 0.06)
    assert np.isclose(h.element(f"{e},1,0", f"{g},0,0"), 0)
    assert np.isclose(h.element(f"{g},0,0", f"{g},1,1"), 0)
    # the diagonal vanishes
    assert np.allclose(np.diag(h.dense()), 0)


def test_full_sine_reduces_to_linearized():
    basis = build_basis(BasisSpec(1, 3, 4))
    eta = 1e-4
    lin = build_hint(basis, P.replace(eta=eta), "linearized").dense()
    sine = build_hint(basis, P.replace(eta=eta), "full_sine").dense()
    assert np.abs(lin - sine).max() < 1e-7
    with pytest.raises(ParameterError):
        build_hint(basis, P, "full_sine")
    with pytest.raises(ParameterError):
        build_hint(basis, P, "bogus")


def test_rabi_interaction_skips_phonons():
    basis = build_basis(BasisSpec(3, 2, 1))
    h = build_rabi_interaction(basis, 0.1)
    assert np.isclose(h.element("egg,1,0", "ggg,0,0"), 0.1)
    assert np.isclose(h.element("egg,1,1", "ggg,0,0"), 0)


@given(st.floats(0.05, 3.5))
@settings(max_examples=20, deadline=None)
def test_cavity_scan_matches_direct_build(wc):
    basis = build_basis(BasisSpec(1, 3, 2))
    scan = CavityScan(basis, P)
    direct = (build_h0(basis, P.replace(omega_c=wc)) + build_hint(basis, P.replace(omega_c=wc))).dense()
    assert np.allclose(scan(wc), direct, atol=1e-14)


def test_sweep_and_total_hamiltonian():
    sweep = SweepSpec(0.28, 2e-6, 7.5e4)
    assert math.isclose(sweep.omega_c_final, 0.43)
    basis = build_basis(BasisSpec(1, 2, 2))
    h = total_hamiltonian(basis, P, sweep=sweep)
    assert not h.is_static
    t = 3.3e4
    expected = (build_h0(basis, P.replace(omega_c=sweep.omega_c(t))) + build_hint(basis, P)).dense()
    assert np.allclose(h.dense(t), expected)
    static = total_hamiltonian(basis, P)
    assert static.is_static
    with pytest.raises(ParameterError):
        SweepSpec(0.28, 1e-6, 0.0)


def test_pulse_drive():
    pulse = PulseSpec(amplitude=0.5, tau=10.0, t0=50.0, omega=1.0)
    assert math.isclose(pulse.envelope(50.0), 0.5 / (10 * math.sqrt(2 * math.pi)))
    assert pulse.coefficient(50.0 + 1e3) < 1e-12
    basis = build_basis(BasisSpec(1, 1, 1))
    d = drive_hamiltonian(basis, pulse)
    ops = ladder_operators(basis)
    assert np.allclose(d(50.0).dense(), pulse.coefficient(50.0) * (ops.sigma_plus[0] + ops.sigma_minus[0]).dense())
    cav = drive_hamiltonian(basis, PulseSpec(0.5, 10.0, 50.0, 1.0, channel="cavity"))
    assert np.allclose(cav(50.0).dense(), pulse.coefficient(50.0) * (ops.b + ops.bdag).dense())
    with pytest.raises(ParameterError):
        PulseSpec(0.5, 0.0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        drive_hamiltonian(basis, PulseSpec(0.5, 1.0, 0.0, 1.0, target_ion=2))
