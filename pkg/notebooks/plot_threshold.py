"""
Markovian threshold
===================

For each phase, the smallest ``gamma t_d`` at which the dynamics stops being
Markovian, found by bisection on the verdict.  At ``phi = 0`` an atom-photon
bound state makes every finite delay non-Markovian.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from halfcavity import threshold_curve

phi = np.linspace(0, 2 * np.pi, 41)
curve = threshold_curve(phi, gtd_max=5.0, bisection_tol=0.01)
for p, g in zip(phi[:11], curve.critical_gtd[:11]):
    print(f"phi = {p:.3f}   threshold gamma t_d = {g:.3f}")

fig, ax = plt.subplots(figsize=(6, 4))
ax.fill_between(phi, curve.critical_gtd, 5.0, alpha=0.3, label="non-Markovian")
ax.plot(phi, curve.critical_gtd, "k-")
ax.set_xlabel("phi")
ax.set_ylabel("gamma t_d")
ax.set_ylim(0, 2)
ax.legend()
fig.savefig("threshold.png", dpi=120)

###############################################################################
# Interspersed regions
# --------------------
# Below the threshold maximum, sweeping the phase alone alternates between
# Markovian and non-Markovian behaviour.

from halfcavity.sweep import count_transitions, phase_scan_verdicts

verdicts = phase_scan_verdicts(1.0, phi)
print("transitions along phi at gamma t_d = 1:", count_transitions(verdicts))
