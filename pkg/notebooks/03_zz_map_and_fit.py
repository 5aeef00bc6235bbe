# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Where ZZ vanishes
#
# ZZ is the shift of the |11> level relative to the sum of the single
# excitations. Sweeping the coupler frequency shows where the direct and
# coupler-mediated contributions cancel.

# %%
import numpy as np

from coupler_lab import hammod

s = hammod.reference_system()
fcs = np.linspace(3.0, 3.5, 51)
z = hammod.zz_curve(s, fcs)
for lo, hi in hammod.zero_crossings(fcs, z):
    f0 = hammod.idle_point(s, lo, hi)
    print(f"zero at {f0:.4f} GHz")
print(f"ZZ at 3.195 GHz: {hammod.zz_strength(s.with_coupler_freq(3.195)) * 1e3:.2f} kHz")

# %% [markdown]
# Moving qubit 1 changes the picture. A zero exists only while the
# detuning lies between the two anharmonicities.

# %%
dets = np.linspace(-300, 300, 13)
zmap = hammod.zz_map(s, fcs[::5], dets)
for d, row in zip(dets, zmap):
    print(f"{d:7.0f} MHz  sign change: {bool(np.any(np.diff(np.sign(row))))}")

# %% [markdown]
# ## Fitting couplings to a measured curve
#
# We fake a measurement with 2% noise and fit the three couplings.

# %%
rng = np.random.default_rng(3)
zn = z * (1 + 0.02 * rng.standard_normal(len(z)))
fit = hammod.fit_zz_couplings(np.c_[fcs, zn], s, guess=(45, 60, 3), sigma=0.02 * np.abs(zn))
print(f"g1c = {fit.g1c:.2f} +- {fit.sigma[0]:.2f} MHz")
print(f"g2c = {fit.g2c:.2f} +- {fit.sigma[1]:.2f} MHz")
print(f"g12 = {fit.g12:.2f} +- {fit.sigma[2]:.2f} MHz")
