# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Coherence-limited gate error
#
# Each qubit enters with an effective relaxation time, a white dephasing
# time and a quasi-static dephasing time, all in microseconds. The error of
# a gate of length tau is linear in the first two and quadratic in the last.

# %%
import numpy as np

from coupler_lab import noisemod

times = [(14, 67, 17), (43, 43, 6)]
print(f"{noisemod.coherence_limit(times, 33.0):.3e}")

# %% [markdown]
# During the pulse the qubit hybridises with the coupler. Rates mix with the
# participations, except quasi-static dephasing which adds in quadrature.

# %%
q = noisemod.ModeCoherence(t1=40, t_phi1=60, t_phi2=20)
c = noisemod.ModeCoherence(t1=10, t_phi1=5, t_phi2=2)
for p_c in (0.0, 0.05, 0.2):
    h = noisemod.hybrid_rates((1 - p_c, p_c, 0.0), (q, c, q))
    print(f"coupler share {p_c:.2f}: T1 {h.t1:5.1f} us  Tphi1 {h.t_phi1:5.1f} us  Tphi2 {h.t_phi2:5.1f} us")

# %% [markdown]
# ## Flux noise from echo rates
#
# The echo dephasing rate grows linearly with the flux slope. The slope of
# that line gives the 1/f amplitude.

# %%
slopes = np.linspace(0.1, 3.0, 20)
truth = noisemod.FluxNoiseModel(sqrt_a=21.4, offset=0.05)
rng = np.random.default_rng(0)
rates = noisemod.flux_noise_dephasing(slopes, truth) * (1 + 0.05 * rng.standard_normal(20))
fit = noisemod.fit_flux_noise(np.c_[slopes, rates])
print(f"sqrt(A) = {fit.model.sqrt_a:.1f} +- {fit.sigma_sqrt_a:.1f} micro flux quanta")
