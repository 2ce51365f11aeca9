"""
The comb and its Fourier transform
==================================

A comb of Gaussian teeth under a broad Gaussian envelope. Its Fourier
transform is a train of revivals spaced by 2 pi/delta0, each damped by the
finite tooth width.
"""

import numpy as np

from afc_raman import comb
from afc_raman.comb import CombParams

# Teeth 10 kHz wide, spaced 50 kHz, envelope twenty spacings wide.
c = CombParams(gamma_fwhm=10e3, delta0=50e3, big_gamma=1e6, alpha_L=5.0)
print(f"finesse {comb.finesse(c):.1f}, effective depth {comb.effective_depth(c):.3f}")
print(f"well resolved: {c.well_resolved}")

# The density is normalized over angular detuning.
print(f"integral of Theta: {comb.normalization(c):.10f}")

# A slice of the density around the centre, one tooth and its neighbours.
d = np.linspace(-1.5, 1.5, 13) * c.delta0_rad
for x, rho in zip(d / c.delta0_rad, comb.density(c, d)):
    print(f"  delta/delta0 = {x:+.2f}   Theta = {rho:.3e} s/rad")

# Three independent evaluations of the transform at the first revival.
T = c.echo_time
for method in ("closed", "adaptive", "grid"):
    val = comb.fourier(c, T, method=method)
    print(f"|Theta~(T)|^2 by {method:8s}: {abs(val) ** 2:.8f}")
print(f"dephasing factor         : {comb.rephasing_factor(comb.finesse(c)):.8f}")

# Between revivals the teeth interfere destructively.
print(f"|Theta~(T/2)| = {abs(comb.fourier(c, T / 2)):.2e}")
