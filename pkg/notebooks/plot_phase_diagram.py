"""
Non-Markovianity across phase and delay
=======================================

Tabulates the geometric measure ``N`` over ``(phi, gamma t_d)``.  The default
grid here is coarse so the script finishes in about a minute; pass ``--full``
for the 81 x 60 grid (several minutes on one core).
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from halfcavity import asymptotic_measure, sweep_measure
from halfcavity.sweep import default_gtd_axis, default_phi_axis

full = "--full" in sys.argv
phi = default_phi_axis(81 if full else 33)
gtd = default_gtd_axis(60 if full else 30)

grid = sweep_measure(phi, gtd)
n_max, g_at, p_at = grid.argmax()
print(f"largest N = {n_max:.4f} at gamma t_d = {g_at:.3f}, phi = {p_at:.3f}")
print(f"large-delay limit = {asymptotic_measure(50):.4f}")
print(f"cells whose tail did not settle: {len(grid.non_converged_cells())}")

###############################################################################
# Contour plot
# ------------
# The white lobe at small delay is the Markovian region; the measure is largest
# along ``phi = 0`` and flattens towards the large-delay limit.

fig, ax = plt.subplots(figsize=(6, 5))
cs = ax.contourf(phi, gtd, grid.measures, levels=20)
fig.colorbar(cs, label="N")
ax.set_yscale("log")
ax.set_xlabel("phi")
ax.set_ylabel("gamma t_d")
fig.savefig("phase_diagram.png", dpi=120)
