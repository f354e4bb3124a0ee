# %% [markdown]
# # Revivals in the PXP-like chain
#
# The Z2 state sits inside a single supersymmetric doublet, so at zero
# chemical potential its fidelity is a pure cosine.  A single fermion
# spreads over all N momentum doublets and revives only approximately.

# %%
import numpy as np

from m1chain.dynamics import (
    fidelity_series,
    single_fermion_fidelity_bessel,
    single_fermion_fidelity_exact,
    single_fermion_state,
    z2_fidelity_analytic,
    z2_initial_state,
)
from m1chain.hilbert import enumerate_basis
from m1chain.operators import build_pxp

N = 12
basis = enumerate_basis(N)
H = build_pxp(basis, 0.0)
t = np.linspace(0, 5, 501)

# %%
z2 = fidelity_series(H, z2_initial_state(basis), t)
print("Z2 vs cos^2(sqrt(6) t):", np.abs(z2.fidelity - z2_fidelity_analytic(N, t)).max())

# %% [markdown]
# Turning on mu splits the doublet; the fidelity now oscillates at
# sqrt(4E + mu^2) = 5 for E = 6, mu = 1.

# %%
T, samples = 100.0, 8192
tt = np.arange(samples) * T / samples
fid = fidelity_series(build_pxp(basis, 1.0), z2_initial_state(basis), tt).fidelity
power = np.abs(np.fft.rfft(fid - fid.mean()))
omega = 2 * np.pi * np.fft.rfftfreq(samples, T / samples)
print("dominant angular frequency:", omega[power.argmax()])

# %%
single = fidelity_series(H, single_fermion_state(basis), t)
print("single fermion ED vs exact sum:", np.abs(single.fidelity - single_fermion_fidelity_exact(N, t)).max())

# %% [markdown]
# At larger N the exact sum is close to cos^2(sqrt(N-2) t) J0^2(t/sqrt(N-2)).
# No diagonalization is needed for the comparison.

# %%
t30 = np.linspace(0, 20, 4001)
exact = single_fermion_fidelity_exact(30, t30)
bessel = single_fermion_fidelity_bessel(30, t30)
print("N=30 max |exact - Bessel|:", np.abs(exact - bessel).max())
print(single.to_csv()[:200])
