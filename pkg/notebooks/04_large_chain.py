# %% [markdown]
# # Beyond dense diagonalization
#
# At N = 18 (dim 5778) evolution goes through the Lanczos propagator.

# %%
import time

import numpy as np

from m1chain.dynamics import default_times, fidelity_series, z2_initial_state
from m1chain.hilbert import enumerate_basis
from m1chain.operators import build_fermion_number, build_pxp

basis = enumerate_basis(18)
H = build_pxp(basis, 0.5)
F = build_fermion_number(basis)
start = time.perf_counter()
res = fidelity_series(H, z2_initial_state(basis), default_times(6.0, 121), {"F": F}, method="krylov")
print(f"{time.perf_counter() - start:.2f}s, method {res.method}")
print("first fidelity minimum", res.fidelity.min(), "at t =", res.times[res.fidelity.argmin()])
print("<F> range:", res.observables["F"].min(), res.observables["F"].max())
