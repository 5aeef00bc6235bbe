# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # A fast-adiabatic CZ
#
# The coupler is pulsed up from idle towards the qubits along a Slepian
# trajectory in the mixing angle between qubit 2 and the coupler.
# Calibration tunes the operation flux and the interaction time until the
# conditional phase is pi and leakage is negligible. This takes a few tens
# of seconds.

# %%
import numpy as np

from coupler_lab import gatesim, hammod, noisemod

s = hammod.reference_system()
cal = gatesim.calibrate_cz(s)
for k, v in cal.report().items():
    print(f"{k:>24}: {v}")

# %% [markdown]
# The propagator is a product of exact step exponentials, so it is unitary
# to rounding error. The midpoint rule converges at second order.

# %%
p = gatesim.build_pulse(s, cal.theta_op, cal.pulse.interaction_ns, cal.pulse.pad_ns, 0.04)
us = [gatesim.evolve(s, p, dt) for dt in (0.02, 0.01, 0.005)]
print(np.abs(us[0].conj().T @ us[0] - np.eye(len(us[0]))).max())
print(np.log2(np.abs(us[0] - us[1]).max() / np.abs(us[1] - us[2]).max()))

# %% [markdown]
# ## Line distortion
#
# A bias line with slow exponential tails smears the pulse. Predistortion
# inverts the filter and brings the phase back.

# %%
filt = gatesim.PredistortionFilter()
for label, pulse in (("ideal", cal.pulse), ("distorted", gatesim.distort(cal.pulse, filt)),
                     ("predistorted", gatesim.distort(gatesim.predistort(cal.pulse, filt), filt))):
    r = gatesim.run_gate(s, pulse)
    print(f"{label:>13}: phi11 = {r.phi11:.4f}  leakage = {r.leakage:.1e}")

# %% [markdown]
# The coupler trajectory is what a coherence budget needs.

# %%
fc = gatesim.coupler_trajectory(s, cal.pulse)
print(f"coupler spans {fc.min():.3f} to {fc.max():.3f} GHz over {cal.pulse.duration:.1f} ns")
