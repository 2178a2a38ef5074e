"""Acceptance criteria 1-10 at their stated tolerances.

Each criterion is computed once in a module-scoped fixture; the test records
a one-line PASS/FAIL summary (printed after the run) and then asserts. The
solver checks of criterion 9 are gathered from the runs of criteria 1-8.

Run standalone with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import dataclasses
import math
import sys
import time
import warnings

import numpy as np
import pytest
from scipy.signal import find_peaks

from vibqed.cli import run_config
from vibqed.config import load_config
from vibqed.dynamics import max_series_change
from vibqed.hamiltonian import SystemParams
from vibqed.hilbert import BasisSpec
from vibqed.perturbation import (
    ORACLE_CASES,
    closed_form_coupling,
    get_case,
    oracle_sample,
    predicted_resonance,
    printed_resonance,
    resonance_params,
    resonance_zero,
)
from vibqed.plotting import read_table
from vibqed.protocols import ProtocolSpec, protocol_time, run_protocol
from vibqed.spectrum import check_cutoff_convergence, find_case_splitting, find_splitting

STABILITY = 1e-3  # dt-halving and cutoff-doubling bound (0.1 %)


def _config_path(name: str) -> str:
    from importlib import resources

    return str(resources.files("vibqed") / "configs" / f"{name}.yaml")


def _check(name, value, bound, ok=None):
    return {"check": name, "value": float(value), "bound": bound, "ok": bool(ok if ok is not None else value < bound)}


def _within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


# ---------------------------------------------------------------------------
# spectral criteria


@pytest.fixture(scope="module")
def c1():
    p = SystemParams(nu=0.2, omega_c=0.4, eta_g=0.06)
    pairs = {"g30/e01": (("g,3,0", "e,0,1"), (0.40, 0.43)), "g31/e02": (("g,3,1", "e,0,2"), (0.42, 0.46))}
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = {k: find_splitting(pair, p, bracket=b) for k, (pair, b) in pairs.items()}
        runtime = time.perf_counter() - t0
        conv = {k: check_cutoff_convergence(pair, p, bracket=b) for k, (pair, b) in pairs.items()}
    solver = [_check(f"cutoff doubling {k}", conv[k].gap_change, STABILITY) for k in pairs]
    return {"res": res, "runtime": runtime, "solver": solver}


def test_criterion_1_fig3_splittings(c1, record_criterion):
    g30, g31 = c1["res"]["g30/e01"].gap, c1["res"]["g31/e02"].gap
    ok = _within(g30, 0.008, 0.10) and _within(g31, 0.021, 0.10) and c1["runtime"] < 60
    record_criterion(1, ok, f"gaps {g30:.5f} (0.008) and {g31:.5f} (0.021); runtime {c1['runtime']:.1f}s")
    assert _within(g30, 0.008, 0.10)
    assert _within(g31, 0.021, 0.10)
    assert c1["runtime"] < 60


# eta_g = 0.09 needs larger cutoffs than the default before doubling is stable
C2_BASES = {0.02: BasisSpec(1, 8, 7), 0.05: BasisSpec(1, 8, 7), 0.09: BasisSpec(1, 12, 10)}


@pytest.fixture(scope="module")
def c2():
    rows = {}
    solver = []
    runtime = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for x, spec in C2_BASES.items():
            p = resonance_params("c", 0.2, x)
            t0 = time.perf_counter()
            res = find_case_splitting("c", p, basis_spec=spec)
            runtime += time.perf_counter() - t0
            two_omega = 2 * abs(closed_form_coupling("c", p).value)
            rows[x] = {"gap": res.gap, "two_omega": two_omega, "rel": abs(two_omega - res.gap) / res.gap}
            conv = check_cutoff_convergence(get_case("c").pair, p, spec, case_id="c")
            solver.append(_check(f"cutoff doubling eta_g={x}", conv.gap_change, STABILITY))
    return {"rows": rows, "runtime": runtime, "solver": solver}


def test_criterion_2_closed_form_vs_numerics(c2, record_criterion):
    rel = {x: r["rel"] for x, r in c2["rows"].items()}
    ok = all(v < 0.02 for v in rel.values()) and c2["runtime"] < 120
    detail = ", ".join(f"eta_g={x}: {100 * v:.2f}%" for x, v in rel.items())
    record_criterion(2, ok, f"|2 Omega - gap| / gap: {detail} (bound 2%); runtime {c2['runtime']:.1f}s")
    assert c2["runtime"] < 120
    for x, v in rel.items():
        assert v < 0.02, f"eta_g = {x}: relative difference {v:.4%}"


@pytest.fixture(scope="module")
def c3():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = resonance_params("a", 0.2, 0.06)
        res = find_case_splitting("a", p)
        p2 = resonance_params("a", 0.2, 0.02)
        weak = find_case_splitting("a", p2)
        rel = abs(2 * abs(closed_form_coupling("a", p2).value) - weak.gap) / weak.gap
        conv = [check_cutoff_convergence(get_case("a").pair, q, case_id="a") for q in (p, p2)]
    solver = [_check(f"cutoff doubling eta_g={q.params.eta_g}", c.gap_change, STABILITY) for q, c in zip((res, weak), conv)]
    return {"res": res, "rel": rel, "solver": solver}


def test_criterion_3_case_a(c3, record_criterion):
    r = c3["res"]
    ok = _within(r.gap, 6.19e-3, 0.10) and _within(r.omega_c_star, 0.293, 0.005) and c3["rel"] < 0.05
    record_criterion(3, ok, f"gap {r.gap:.4e} at omega_c* {r.omega_c_star:.5f}; analytic vs numeric {100 * c3['rel']:.2f}% at eta_g=0.02")
    assert _within(r.gap, 6.19e-3, 0.10)
    assert _within(r.omega_c_star, 0.293, 0.005)
    assert c3["rel"] < 0.05


@pytest.fixture(scope="module")
def c4():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = resonance_params("e", 0.2, 0.06)
        conv = check_cutoff_convergence(get_case("e").pair, p, case_id="e")
    res = conv.base
    return {
        "res": res,
        "printed": printed_resonance("e", p),
        "predicted": predicted_resonance("e", p),
        "solver": [_check("cutoff doubling", conv.gap_change, STABILITY)],
    }


def test_criterion_4_case_e(c4, record_criterion):
    r = c4["res"]
    pred_rel = abs(c4["printed"] - r.omega_c_star) / r.omega_c_star
    shift_rel = abs(c4["predicted"] - r.omega_c_star) / r.omega_c_star
    ok = _within(r.gap, 2.3e-4, 0.10) and _within(r.omega_c_star, 2.7925, 0.002) and pred_rel < 0.003
    record_criterion(4, ok, f"N=3 gap {r.gap:.4e} at omega_c* {r.omega_c_star:.5f}; printed formula {c4['printed']:.6f} ({100 * pred_rel:.3f}%), "
                     f"shift-derived {c4['predicted']:.6f} ({100 * shift_rel:.4f}%)")
    assert r.basis_spec.n_ions == 3
    assert _within(r.gap, 2.3e-4, 0.10)
    assert _within(r.omega_c_star, 2.7925, 0.002)
    assert pred_rel < 0.003
    assert shift_rel < 0.003


def _sweep(case_id, nus, eta_g, bracket_of, coarse):
    pair = get_case(case_id).pair
    out = []
    for nu in nus:
        p = resonance_params(case_id, float(nu), eta_g)
        res = find_splitting(pair, p, bracket=bracket_of(float(nu)), coarse_points=coarse)
        out.append(res)
    return out


def _divergent(case_id, nu, eta_g):
    return closed_form_coupling(case_id, SystemParams(nu=float(nu), omega_c=1.0, eta_g=eta_g)).divergent


@pytest.fixture(scope="module")
def c5():
    sweeps = {}
    solver = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        nus = np.round(np.arange(0.40, 0.601, 0.02), 10)
        sweeps["c"] = (0.5, nus, _sweep("c", nus, 0.03, lambda nu: ((1 + nu) / 3 - 0.03, (1 + nu) / 3 + 0.03), 121), 0.03)
        # near the divergences the Stark shifts are large, hence the wide window
        for point in (1.0, 2.0):
            nus = np.round(np.arange(point - 0.1, point + 0.101, 0.02), 10)
            sweeps[f"e@{point:g}"] = (point, nus, _sweep("e", nus, 0.02, lambda nu: (3 - nu - 0.1, 3 - nu + 0.1), 201), 0.02)
        for key, (point, nus, results, eta_g) in sweeps.items():
            r = results[int(np.argmin(np.abs(nus - point)))]
            conv = check_cutoff_convergence(r.tracked_pair, r.params, bracket=r.bracket, coarse_points=121 if key == "c" else 201)
            solver.append(_check(f"cutoff doubling {key}", conv.gap_change, STABILITY))
    return {"sweeps": sweeps, "solver": solver}


def test_criterion_5_divergence_regularization(c5, record_criterion):
    parts, ok = [], True
    for key, (point, nus, results, eta_g) in c5["sweeps"].items():
        gaps = np.array([r.gap for r in results])
        peak_nu = float(nus[int(np.argmax(gaps))])
        finite = bool(np.all(np.isfinite(gaps)) and np.all(gaps > 0) and gaps.max() < 0.2)
        flagged = [float(nu) for nu in nus if _divergent(key[0], nu, eta_g)]
        good = finite and math.isclose(peak_nu, point) and flagged == [point]
        ok &= good
        parts.append(f"{key}: peak {gaps.max():.3e} at nu={peak_nu:g}, closed form divergent at {flagged}")
    record_criterion(5, ok, "; ".join(parts))
    for key, (point, nus, results, eta_g) in c5["sweeps"].items():
        gaps = np.array([r.gap for r in results])
        assert np.all(np.isfinite(gaps)) and np.all(gaps > 0) and gaps.max() < 0.2
        assert math.isclose(float(nus[int(np.argmax(gaps))]), point), key
        assert [float(nu) for nu in nus if _divergent(key[0], nu, eta_g)] == [point]


# ---------------------------------------------------------------------------
# oracle


@pytest.fixture(scope="module")
def c6():
    t0 = time.perf_counter()
    worst = {}
    counts = {}
    for case_id in ORACLE_CASES:
        rows = oracle_sample(case_id, 20)
        counts[case_id] = len(rows)
        worst[case_id] = max(r.rel_error for r in rows)
    zeros = {c: abs(resonance_zero(c, 0.2, 0.06)) for c in ("f", "h", "no_phonon")}
    return {"worst": worst, "counts": counts, "zeros": zeros, "runtime": time.perf_counter() - t0}


def test_criterion_6_oracle_equivalence(c6, record_criterion):
    worst = max(c6["worst"].values())
    zero = max(c6["zeros"].values())
    ok = worst < 1e-9 and zero < 1e-12 and all(n == 20 for n in c6["counts"].values()) and c6["runtime"] < 60
    record_criterion(6, ok, f"{len(c6['worst'])} families x 20 points, max rel error {worst:.2e}; on-resonance zeros <= {zero:.1e}; runtime {c6['runtime']:.1f}s")
    assert set("abcdefgh") <= set(c6["worst"])
    assert all(n == 20 for n in c6["counts"].values()), c6["counts"]
    assert worst < 1e-9, c6["worst"]
    assert zero < 1e-12, c6["zeros"]
    assert c6["runtime"] < 60


# ---------------------------------------------------------------------------
# dynamics


def _run(name, tmp, **block):
    basis = block.pop("basis", None)
    cfg = load_config(_config_path(name), tmp)
    cfg.block.update(block)
    if basis is not None:
        cfg = dataclasses.replace(cfg, basis=basis)
    t0 = time.perf_counter()
    man = run_config(cfg)
    return man, time.perf_counter() - t0


def _trace_object(directory, csv_name):
    from vibqed.dynamics import DynamicsTrace

    table = read_table(directory / csv_name)
    times = table.pop("time")
    return DynamicsTrace(times, table)


CORRELATORS = ["XmXp", "G2", "G3"]


@pytest.fixture(scope="module")
def c7(tmp_path_factory):
    out = {}
    solver = []
    runtime = 0.0
    for name in ("dynamics", "dynamics_damped"):
        d = tmp_path_factory.mktemp(name)
        man, el = _run(name, d / "base")
        runtime += el
        base = _trace_object(d / "base", "trace.csv")
        wc = man.diagnostics["crossing"]["omega_c_star"]
        half_man, _ = _run(name, d / "half", dt=man.config["dynamics"]["dt"] / 2)
        half = _trace_object(d / "half", "trace.csv")
        spec = load_config(_config_path(name)).basis
        dbl_man, _ = _run(name, d / "dbl", omega_c=wc, basis=spec.doubled())
        dbl = _trace_object(d / "dbl", "trace.csv")
        out[name] = {"man": man, "trace": base}
        solver += [
            _check(f"{name} trace error", man.diagnostics["max_trace_error"], 1e-8),
            _check(f"{name} min eigenvalue", man.diagnostics["min_eigenvalue"], -1e-8, man.diagnostics["min_eigenvalue"] >= -1e-8),
            _check(f"{name} dt halving", max(max_series_change(base, half, CORRELATORS).values()), STABILITY),
            _check(f"{name} cutoff doubling", max(max_series_change(base, dbl, CORRELATORS).values()), STABILITY),
        ]
    return {"runs": out, "solver": solver, "runtime": runtime}


def test_criterion_7_fig4_dynamics(c7, record_criterion):
    und = c7["runs"]["dynamics"]
    tr = und["trace"]
    period = 2 * math.pi / und["man"].diagnostics["crossing"]["gap"]
    first = tr.times <= period
    peak = float(tr["XmXp"].max())
    ratio = float(tr["G3"][first].max() / tr["XmXp"][first].max())
    damped = c7["runs"]["dynamics_damped"]["trace"]
    idx, _ = find_peaks(damped["XmXp"], prominence=0.5)
    env = damped["XmXp"][idx]
    monotone = len(env) >= 3 and bool(np.all(np.diff(env) < 0))
    ok = 2.7 <= peak <= 3.0 and 1.8 <= ratio <= 2.2 and monotone and c7["runtime"] < 300
    record_criterion(7, ok, f"peak XmXp {peak:.4f}; first-cycle G3/XmXp {ratio:.3f}; damped envelope {np.round(env, 3).tolist()}; runtime {c7['runtime']:.1f}s")
    assert 2.7 <= peak <= 3.0
    assert 1.8 <= ratio <= 2.2
    assert monotone, env
    assert c7["runtime"] < 300


@pytest.fixture(scope="module")
def c8(tmp_path_factory):
    d = tmp_path_factory.mktemp("lz")
    man, runtime = _run("landau_zener", d / "base")
    half, _ = _run("landau_zener", d / "half", dt=man.config["landau_zener"]["dt"] / 2)
    spec = load_config(_config_path("landau_zener")).basis
    dbl, _ = _run("landau_zener", d / "dbl", basis=spec.doubled())
    key = "P(g,3,1)"
    p = man.diagnostics["final_populations"][key]
    solver = [
        _check("norm drift", man.diagnostics["max_norm_drift"], 1e-8),
        _check("dt halving", abs(half.diagnostics["final_populations"][key] - p) / p, STABILITY),
        _check("cutoff doubling", abs(dbl.diagnostics["final_populations"][key] - p) / p, STABILITY),
    ]
    return {"man": man, "runtime": runtime, "solver": solver}


def test_criterion_8_landau_zener(c8, record_criterion):
    diag = c8["man"].diagnostics
    p = diag["final_populations"]["P(g,3,1)"]
    p_lz = diag["lz_formula"]["p_diabatic"]
    ok = p >= 0.85 and _within(p_lz, 6e-8, 0.05) and c8["runtime"] < 300
    record_criterion(8, ok, f"final P(g,3,1) {p:.4f}; P_LZ {p_lz:.3e}; runtime {c8['runtime']:.1f}s")
    assert p >= 0.85
    assert _within(p_lz, 6e-8, 0.05)
    assert p_lz < 1e-6 < 1 - p  # the diabatic leak is negligible next to the measured loss
    assert c8["runtime"] < 300


# ---------------------------------------------------------------------------
# solver properties over criteria 1-8


def test_criterion_9_solver_properties(c1, c2, c3, c4, c5, c7, c8, record_criterion):
    groups = {1: c1, 2: c2, 3: c3, 4: c4, 5: c5, 7: c7, 8: c8}
    checks = [(n, c) for n, g in groups.items() for c in g["solver"]]
    failed = [f"criterion {n} {c['check']} = {c['value']:.3e}" for n, c in checks if not c["ok"]]
    worst_stability = max(c["value"] for _, c in checks if "halving" in c["check"] or "doubling" in c["check"])
    record_criterion(9, not failed, f"{len(checks)} checks (criterion 6 is exact arithmetic, no solver); worst dt/cutoff change {worst_stability:.2e}"
                     + (f"; failed: {failed}" if failed else ""))
    assert not failed, failed


# ---------------------------------------------------------------------------
# protocols


@pytest.fixture(scope="module")
def c10():
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for kind, nu in (("noon3", 0.7), ("ghz4", 0.5)):
            spec = ProtocolSpec(kind, SystemParams(nu=nu, omega_c=1.0, eta_g=0.03))
            out[kind] = {"effective": run_protocol(spec, "effective"), "full": run_protocol(spec, "full")}
    return out


def test_criterion_10_protocols(c10, record_criterion):
    parts, ok = [], True
    for kind, res in c10.items():
        eff, full = res["effective"], res["full"]
        good = (eff.fidelity >= 1 - 1e-8 and math.isclose(eff.time, protocol_time(eff.omega_eff, 0))
                and math.isclose(eff.time, 3 * math.pi / (2 * abs(eff.omega_eff))) and full.local_phase_fidelity >= 0.9)
        ok &= good
        parts.append(f"{kind}: effective {eff.fidelity:.10f}, full {full.local_phase_fidelity:.4f} (raw overlap {full.fidelity:.3f})")
    record_criterion(10, ok, "; ".join(parts))
    for kind, res in c10.items():
        eff, full = res["effective"], res["full"]
        assert eff.fidelity >= 1 - 1e-8, kind
        assert math.isclose(eff.time, 3 * math.pi / (2 * abs(eff.omega_eff)))
        assert full.local_phase_fidelity >= 0.9, kind
        assert 0 < full.success_probability <= 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
