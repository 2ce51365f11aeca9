"""
An elementary repeater link
===========================

Two Pr:YSO crystals, 1 km apart, heralded by a beamsplitter station in the
middle. The comb sets the per-mode efficiencies; the fibre sets the rate.
"""

import warnings

from afc_raman import link
from afc_raman.analytic import ProtocolParams
from afc_raman.comb import RegimeWarning

preset = link.get_preset("pr_yso_606nm")
print(preset)

# The bundled preset is only marginally inside the Gamma >> delta0 regime.
warnings.simplefilter("ignore", RegimeWarning)
rep = link.feasibility_report(preset, link.feasibility_link(), ProtocolParams(theta0_sq=0.1))
eff, lk = rep["efficiency"], rep["link"]
print(f"readout efficiency {eff['eta_readout']:.3f}, p per mode {eff['p_stokes']:.4f}, "
      f"SNR bound {eff['snr_lower_bound']:.1f}, modes {eff['mode_capacity']}")
print(f"fibre transmission {lk['eta_t']:.3f}, time per entangled pair {lk['T_entangle_s']:.3f} s, "
      f"fidelity {lk['fidelity']:.3f}")
print(f"tomography over {rep['tomography']['heralds']:.0f} heralds: "
      f"{rep['tomography']['time_s'] / 3600:.2f} h")

# The trade-off in p: more pairs per second, worse fidelity.
for p in (0.01, 0.02, 0.05, 0.1, 0.2):
    lp = link.LinkParams(**{**link.feasibility_link().to_dict(), "p": p})
    r = link.link_report(lp)
    print(f"p = {p:<5} T = {r.T_entangle_s:7.3f} s  fidelity = {r.fidelity:.3f}")

for flag in rep["flags"]:
    print("note:", flag)
