# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Reducing the coupler circuit
#
# Two grounded qubits talk through a floating coupler made of two islands.
# We start from the five-node circuit and integrate out the centre of
# capacitance of the islands, which leaves a 3x3 matrix in mode order
# (qubit 1, coupler, qubit 2).

# %%
import numpy as np

from coupler_lab import captools

rc = captools.ReducedCircuit(c1=82, c2=82, c_c=28, c1c_par=8, c1c_perp=1, c2c_par=8, c2c_perp=1,
                             c12=0.07, csD_tilde=100, csE_tilde=98)
m = captools.eliminate_com(rc)
np.set_printoptions(precision=3, suppress=True)
print(m.matrix())
print("gamma1, gamma2 =", round(m.gamma1, 4), round(m.gamma2, 4))

# %% [markdown]
# Eliminating a node from the Maxwell matrix by Schur complement is the
# same as a star-mesh transform at that node. Dropping island E shows it.

# %%
net = rc.as_network()
a = captools.kron_reduce(net, ["1", "D", "2"]).maxwell()
b = captools.star_mesh_reduce(net, ["1", "D", "2"]).maxwell()
print(a)
print(np.abs(a - b).max())

# %% [markdown]
# Cross-island capacitors can be folded away. The barred circuit has no
# C_perp yet gives back the identical effective matrix.

# %%
b = captools.remove_cross_island(rc)
print(b)
m_bar = captools.eliminate_com(b.as_reduced())
print(np.abs(m_bar.matrix() - m.matrix()).max())

# %% [markdown]
# Charging energies follow from the inverse of the effective matrix.

# %%
inv = captools.inverse_cap_params(m)
print(inv)
