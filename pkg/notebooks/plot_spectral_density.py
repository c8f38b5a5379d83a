"""
Spectral density seen by the atom
=================================

``J(Delta)`` oscillates with period ``2 pi / t_d``; the phase sets where the
atomic resonance falls on it.  At a node (``phi = 0``) the resonant density
vanishes, at an antinode (``phi = pi``) it is maximal.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from halfcavity import ModelParams, spectrum_scan

fig, ax = plt.subplots(figsize=(6, 4))
for gtd in (0.2, 2.0, 20.0):
    for phi in (0.0, np.pi):
        pts = spectrum_scan(ModelParams.from_dimensionless(gtd, phi), -5.0, 5.0, 801)
        ax.plot([p.detuning for p in pts], [np.pi * p.density for p in pts], label=f"gamma t_d={gtd}, phi={phi:.2f}")
ax.set_xlabel("Delta / gamma")
ax.set_ylabel("pi J / gamma")
ax.legend(fontsize=7)
fig.savefig("spectral_density.png", dpi=120)
