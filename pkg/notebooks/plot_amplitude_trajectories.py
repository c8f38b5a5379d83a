"""
Emission dynamics in front of a mirror
======================================

The excited-state volume ``|eps(t)|**4`` for four delays and three phases,
next to plain spontaneous emission.  Short delays give exponential decay with
a phase-dependent rate; long delays give a train of revival spikes.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from halfcavity import ModelParams, amplitude_mos

###############################################################################
# One panel per delay
# -------------------
# Time is in units of ``1/gamma``.  For ``t <= t_d`` every curve is the bare
# decay ``e^{-2 gamma t}``, so the long-delay panels start at ``t_d``.

panels = [(0.05, 6.0), (20.0, 100.0), (1.0, 10.0), (2.0, 10.0)]
phases = {"phi = 0": 0.0, "phi = pi/2": np.pi / 2, "phi = pi": np.pi}

fig, axes = plt.subplots(2, 2, figsize=(9, 7))
for ax, (gtd, horizon) in zip(axes.flat, panels):
    for label, phi in phases.items():
        tr = amplitude_mos(ModelParams.from_dimensionless(gtd, phi), horizon)
        keep = tr.times <= horizon
        ax.plot(tr.times[keep], tr.volume()[keep], label=label)
    t = np.linspace(0, horizon, 400)
    ax.plot(t, np.exp(-2 * t), "k-", lw=0.8, label="no mirror")
    if gtd > 0.5:
        ax.set_xlim(gtd, horizon)
    ax.set_title(f"gamma t_d = {gtd}")
    ax.set_xlabel("gamma t")
axes[0, 0].legend()
fig.tight_layout()
fig.savefig("amplitude_trajectories.png", dpi=120)

###############################################################################
# Where the long-delay spikes peak
# --------------------------------
# Each spike sits close to ``m t_d + 2m/gamma`` whatever the phase.

tr = amplitude_mos(ModelParams.from_dimensionless(20.0, 1.0), 80.0)
v4 = tr.volume()
for m in (1, 2, 3):
    seg = (tr.times > 20 * m) & (tr.times < 20 * (m + 1))
    print(m, tr.times[seg][np.argmax(v4[seg])], 20 * m + 2 * m)
