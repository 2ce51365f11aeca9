"""
Acceptance suite: one PASS/FAIL line per primary criterion.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
where the lines appear in the terminal summary.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from afc_raman import analytic, comb, dynamics, link, optimize
from afc_raman.analytic import ProtocolParams
from afc_raman.comb import CombParams, RegimeWarning

RESULTS: dict[str, tuple[bool, str]] = {}

ALPHAS = (0.1, 1.0, 3.0, 10.0, 30.0)
FINESSES = (2.0, 3.0, 5.0, 10.0, 20.0)


def comb_at(finesse, alpha_L, envelope_ratio=20.0, gamma_fwhm=1e4):
    delta0 = finesse * gamma_fwhm
    return CombParams(gamma_fwhm, delta0, envelope_ratio * delta0, alpha_L)


def record(name, ok, detail):
    RESULTS[name] = (bool(ok), detail)
    return ok


def line(name):
    ok, detail = RESULTS[name]
    return f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"


# criteria -----------------------------------------------------------------

def feasibility():
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        c = link.get_preset("pr_yso_606nm").comb(5.0)
        assert c.alpha_L == 10
        rep = analytic.full_report(c, ProtocolParams(0.1))
    ms = 1e3 * (time.perf_counter() - t0)
    ok = (abs(rep.eta_readout - 0.66) <= 0.02 and 0.085 <= rep.p_stokes <= 0.10
          and rep.snr_lower_bound >= 10 and abs(rep.snr_lower_bound - 13.4) <= 0.5
          and ms < 100)
    return record("feasibility", ok,
                  f"eta={rep.eta_readout:.4f} p={rep.p_stokes:.4f} "
                  f"SNR={rep.snr_lower_bound:.2f} ({ms:.1f} ms)")


def link_numbers():
    lp = link.LinkParams(distance_km=1, attenuation_db_per_km=9, eta_c=0.5, eta_d=0.7,
                         rate_hz=1e3, p=0.05, half_distance=True)
    r = link.link_report(lp)
    ok = 0.07 <= r.T_entangle_s <= 0.13 and 0.84 <= r.fidelity <= 0.90
    return record("link", ok, f"eta_t={r.eta_t:.4f} T={r.T_entangle_s:.4f} s "
                              f"fidelity={r.fidelity:.4f}")


def oracle_equivalence():
    t0 = time.perf_counter()
    worst = {"eta": 0.0, "stokes": 0.0, "noise": 0.0}
    for aL in ALPHAS:
        for f in FINESSES:
            c = comb_at(f, aL)
            # first-order Stokes formula holds for a weak write; see README
            p = ProtocolParams(0.01, t_d=0.25 * c.echo_time, tau=0.1 * c.echo_time)
            g = dynamics.build_grid(c)
            s = dynamics.write_step(g, p)
            eta = dynamics.heralded_readout(s, g, p).echo()[1]
            stokes = dynamics.stokes_flux(s, g, [p.t_d]).mode_count()
            noise = dynamics.noise_flux(g, p).mode_count()
            worst["eta"] = max(worst["eta"], abs(eta / analytic.readout_efficiency_backward(c) - 1))
            worst["stokes"] = max(worst["stokes"],
                                  abs(stokes / analytic.stokes_photons_per_mode(c, p) - 1))
            worst["noise"] = max(worst["noise"], abs(noise / analytic.noise_per_mode(c, p) - 1))
    secs = time.perf_counter() - t0
    ok = worst["eta"] < 0.02 and worst["stokes"] < 0.01 and worst["noise"] < 0.01 and secs < 60
    return record("oracle_equivalence", ok,
                  f"5x5 grid max rel err eta={worst['eta']:.2e} stokes={worst['stokes']:.2e} "
                  f"noise={worst['noise']:.2e} ({secs:.1f} s)")


def echo_timing():
    c = comb_at(5, 10)
    T = c.echo_time
    p = ProtocolParams(0.1, t_d=0.3 * T, tau=0.4 * T)
    g = dynamics.build_grid(c)
    tr = dynamics.heralded_readout(dynamics.write_step(g, p), g, p)
    single = abs(tr.peak_time - (p.tau + T))
    mm = dynamics.multimode_rephasing([0.1 * T, 0.3 * T, 0.55 * T], 0.2 * T, g,
                                      ProtocolParams(0.1))
    ok = single <= g.time_step and len(mm.revival_times) == 3 and mm.max_deviation <= g.time_step
    return record("echo_timing", ok,
                  f"single |dt|={single:.2e} s, 3 revivals max |dt|={mm.max_deviation:.2e} s, "
                  f"step={g.time_step:.2e} s")


def forward_limits():
    r = optimize.optimize_depth("raman_forward")
    m = optimize.optimize_depth("memory_forward")
    ok = (abs(r.value - 0.648) <= 0.005 and abs(r.effective_depth - 1.60) <= 0.05
          and abs(m.value - 0.541) <= 0.005 and abs(m.effective_depth - 2.00) <= 0.05)
    return record("forward_limits",
                  ok, f"raman max {r.value:.4f} at {r.effective_depth:.3f}, "
                      f"memory max {m.value:.4f} at {m.effective_depth:.3f}")


def small_depth():
    r = optimize.optimize_finesse(0.1, "raman_backward")
    m = optimize.optimize_finesse(0.1, "memory_backward")
    x, f = r.effective_depth, r.finesse
    ratio = analytic.backward_raman(x, f) / analytic.backward_memory(x, f)
    expected = 1.0 / -math.expm1(-x)
    ok = (0.008 <= r.value <= 0.02 and 0.0003 <= m.value <= 0.0015
          and math.isclose(ratio, expected, rel_tol=1e-12))
    return record("small_depth", ok,
                  f"raman {100 * r.value:.3f}% (F*={r.finesse:.3f}), memory {100 * m.value:.4f}% "
                  f"(F*={m.finesse:.3f}), ratio at F={f:.3f}: {ratio:.4f} vs {expected:.4f}")


def comb_properties():
    norms = [comb.normalization(comb_at(f, 1.0)) for f in (3, 5, 10)]
    errs = []
    for f in (3, 5, 10):
        c = comb_at(f, 1.0)
        val = comb.fourier(c, c.echo_time, method="adaptive")
        errs.append(abs(abs(val) ** 2 / comb.rephasing_factor(f) - 1))
    ok = max(abs(n - 1) for n in norms) <= 1e-4 and max(errs) <= 0.02
    return record("comb_properties", ok,
                  f"max |int Theta - 1|={max(abs(n - 1) for n in norms):.1e}, "
                  f"max rel dev |Theta~(T)|^2={max(errs):.1e}")


def property_suites():
    notes, ok = [], True
    # monotonicity
    xs = np.linspace(0, 200, 2001)
    mono = all(np.all(np.diff([analytic.readout_efficiency_backward(comb_at(f, a)) for a in xs]) >= 0)
               for f in FINESSES)
    mono &= bool(np.all(np.diff(comb.rephasing_factor(np.linspace(1.01, 100, 1000))) > 0))
    ok &= mono
    notes.append(f"monotone={mono}")
    # scale invariance
    c1 = comb_at(4, 7)
    t = np.linspace(0, 2 * c1.echo_time, 51)
    scale_err = 0.0
    for s in (1e-3, 0.5, 37.0):
        c2 = CombParams(c1.gamma_fwhm * s, c1.delta0 * s, c1.big_gamma * s, c1.alpha_L)
        scale_err = max(scale_err,
                        abs(analytic.readout_efficiency_backward(c2) - analytic.readout_efficiency_backward(c1)),
                        float(np.max(np.abs(comb.fourier(c2, t / s) - comb.fourier(c1, t)))))
    ok &= scale_err < 1e-12
    notes.append(f"scale_err={scale_err:.0e}")
    # coherent vs incoherent
    c = comb_at(5, 10)
    p = ProtocolParams(0.1, t_d=0.3 * c.echo_time)
    g = dynamics.build_grid(c)
    s_ = dynamics.write_step(g, p)
    coh = dynamics.heralded_readout(s_, g, p).echo()[1]
    inc = dynamics.heralded_readout(s_, g, p, coherent=False).echo()[1]
    drop = coh / inc
    ok &= drop >= 10
    notes.append(f"revival drop={drop:.1e}x")
    # grid convergence
    fine = dynamics.build_grid(c, g.spec.refined(2))
    coh2 = dynamics.heralded_readout(dynamics.write_step(fine, p), fine, p).echo()[1]
    conv = abs(coh2 / coh - 1)
    ok &= conv < 0.005
    notes.append(f"refinement change={conv:.1e}")
    # CLI determinism
    same = _cli_determinism()
    ok &= same
    notes.append(f"cli byte-identical={same}")
    return record("property_suites", ok, ", ".join(notes))


def _cli_determinism() -> bool:
    cfg = {"comb": {"preset": "pr_yso_606nm"}, "protocol": {"theta0_sq": 0.1, "t_d": 1e-6},
           "sweep": {"alpha_L": [1, 10], "finesse": [3, 5]}, "output": {"format": "csv"}}
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "cfg.json"
        path.write_text(json.dumps(cfg))
        for run in range(2):
            out = Path(tmp) / f"run{run}"
            for args in (["simulate", str(path), "--out", str(out)],
                         ["sweep", str(path), "--out", str(out / "sweep.csv")],
                         ["optimize", "--alpha-l", "0.1", "--out", str(out / "opt.json")],
                         ["link", "--out", str(out / "link.json")]):
                subprocess.run([sys.executable, "-W", "ignore", "-m", "afc_raman", *args],
                               check=True, capture_output=True)
            outputs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    return len(outputs[0]) == 5 and outputs[0] == outputs[1]


CRITERIA = {
    "feasibility": feasibility,
    "link": link_numbers,
    "oracle_equivalence": oracle_equivalence,
    "echo_timing": echo_timing,
    "forward_limits": forward_limits,
    "small_depth": small_depth,
    "comb_properties": comb_properties,
    "property_suites": property_suites,
}


@pytest.mark.filterwarnings("ignore::afc_raman.comb.RegimeWarning")
@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name):
    CRITERIA[name]()
    print(line(name))
    assert RESULTS[name][0], line(name)


if __name__ == "__main__":
    warnings.simplefilter("ignore", RegimeWarning)
    for key, fn in CRITERIA.items():
        fn()
        print(line(key), flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
