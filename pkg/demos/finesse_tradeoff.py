"""
Choosing the finesse
====================

Narrow teeth rephase well but absorb little. At a fixed peak optical depth
the best finesse balances the two, and the balance differs between the
Raman source and an AFC memory built on the same comb.
"""

import numpy as np

from afc_raman import analytic, optimize

# Optimal finesse and efficiency for both backward schemes.
depths = np.array([0.0, 0.1, 0.3, 1, 3, 10, 30, 100, 300])
raman = optimize.efficiency_curve("raman_backward", depths)
memory = optimize.efficiency_curve("memory_backward", depths)
print(" alpha_L   F*_raman  eta_raman   F*_mem   eta_mem")
for a, fr, er, fm, em in zip(depths, raman["F_star"], raman["eta_star"],
                             memory["F_star"], memory["eta_star"]):
    print(f"{a:8.1f} {fr:10.3f} {er:10.5f} {fm:8.3f} {em:9.5f}")

# At small depth the Raman source wins by 1/(1 - exp(-abar L)).
r = optimize.optimize_finesse(0.1, "raman_backward")
x = r.effective_depth
ratio = analytic.backward_raman(x, r.finesse) / analytic.backward_memory(x, r.finesse)
print(f"\nalpha_L = 0.1: Raman/memory at F = {r.finesse:.3f} is {ratio:.1f}")

# Forward emission is reabsorbed, so even ideal teeth cap the efficiency.
for name in ("raman_forward", "memory_forward"):
    res = optimize.optimize_depth(name)
    print(f"{name}: max {res.value:.4f} at abar L = {res.effective_depth:.3f}")

# The table above as CSV, ready for plotting elsewhere.
print()
print(optimize.curve_to_csv(raman), end="")
