# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Couplings across a long extender
#
# The qubits reach the coupler through coplanar-waveguide extenders. Treating
# each extender as a two-port and reading capacitances off the admittance
# matrix at 5 GHz gives the effective matrix for any qubit spacing.

# %%
import numpy as np

from coupler_lab import netsim

rows = netsim.coupling_vs_distance([920, 1960, 2960, 4000])
print(" d_qq um   g1c MHz   g2c MHz   g12 MHz")
for d, g1, g2, g12 in rows:
    print(f"{d:7.0f} {g1:9.2f} {g2:9.2f} {g12:9.3f}")

# %% [markdown]
# Going from 920 um to 2960 um costs about a third of the coupling. The
# extender is short compared with the wavelength, so the evaluation
# frequency barely matters.

# %%
for f in (1e9, 5e9):
    m = netsim.effective_matrix(netsim.device_network(1960), f)
    print(f"{f / 1e9:.0f} GHz  C1c = {m.c1c:.3f} fF  CSigma1 = {m.c_sigma1:.2f} fF")

# %% [markdown]
# ## Crossing a drive line
#
# A flux line passing between the coupler islands adds stray capacitance.
# Ratios are given against the direct qubit drive-line coupling.

# %%
caps = netsim.CrosstalkGeometryCaps(c_q_dl=0.12, c_q1_tl=0.004, c_q2_tl=0.003, c_cC_tl=0.9, c_cF_tl=0.85)
r = netsim.crosstalk_ratios(caps)
print(r, netsim.to_db(np.asarray(r)))
