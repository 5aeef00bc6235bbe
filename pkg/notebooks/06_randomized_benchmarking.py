# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Interleaved randomized benchmarking
#
# Two-qubit Cliffords are built from CZ and single-qubit rotations. An
# average Clifford costs 1.5 CZ and 8.25 single-qubit gates.

# %%
import numpy as np

from coupler_lab import rbkit

print(len(rbkit.clifford_group()), rbkit.decomposition_stats())

# %% [markdown]
# Simulate a reference and an interleaved experiment with depolarizing
# errors, then compare the decay constants.

# %%
lengths = [1, 5, 10, 20, 40, 60, 80, 100]
p_cz = rbkit.p_from_error(1.9e-3)
model = rbkit.ErrorModel(p_cz=p_cz, p_1q=rbkit.p_from_error(1.1e-3, d=2), p_interleaved=p_cz)
ref = rbkit.fit_decay(rbkit.simulate_decay(rbkit.synth_sequences(lengths, 0, 30, seed=1), model))
inter = rbkit.fit_decay(rbkit.simulate_decay(rbkit.synth_sequences(lengths, 1, 30, seed=2), model))
res = rbkit.interleaved_analysis(ref, inter)
print(f"reference p = {ref.p:.5f}, error per Clifford {ref.epsilon:.4f}")
print(f"CZ error {res.epsilon_gate:.2e} +- {res.epsilon_gate_sigma:.1e}")

# %% [markdown]
# Interleaving several CZs at once separates incoherent from coherent
# errors. A small residual phase on |11> adds up across the block, so the
# per-gate estimate grows with n.

# %%
phase = np.diag([1, 1, 1, np.exp(0.02j)]) @ rbkit.CZ
coherent = rbkit.ErrorModel(p_cz=p_cz, p_1q=model.p_1q, p_interleaved=p_cz, interleaved=phase)
for n in (1, 5, 20):
    fit = rbkit.fit_decay(rbkit.simulate_decay(rbkit.synth_sequences(lengths, n, 30, seed=10 + n), coherent))
    print(n, f"{rbkit.interleaved_analysis(ref, fit, n).epsilon_gate:.2e}")
