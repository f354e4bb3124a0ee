# %% [markdown]
# # Exact eigenstates from the Bethe ansatz
#
# Setting every rapidity to exp(i pi/3) gives E = N - f whenever
# exp(i pi N/3) = (-1)^(f-1).  The same state has a matrix-product form
# with bond dimension 2(f+1).

# %%
import numpy as np

from m1chain.bethe import append_unity, build_bethe_state, dress_solution, single_fermion_solutions, special_solution
from m1chain.hilbert import enumerate_basis
from m1chain.mps import build_special_mps, mps_to_statevector, schmidt_spectrum
from m1chain.operators import build_m1
from m1chain.spectra import entanglement_entropy

for N in (9, 12):
    basis = enumerate_basis(N)
    H = build_m1(basis)
    for f in range(1, N // 2 + 1):
        sol = special_solution(N, f)
        if not sol:
            continue
        v = build_bethe_state(sol.mus, basis)
        res = np.linalg.norm(H.matrix @ v - (N - f) * v)
        print(f"N={N} f={f}: E={sol.energy:g}, residual {res:.1e}")

# %% [markdown]
# Adding mu = 1 maps to the superpartner.  Where Q^dag kills the state the
# augmented wavefunction vanishes identically.

# %%
basis = enumerate_basis(12)
for f in (1, 3, 5):
    sol = special_solution(12, f)
    try:
        build_bethe_state(append_unity(sol).mus, basis)
        print(f"f={f}: partner built")
    except ValueError as exc:
        print(f"f={f}: {exc}")

# %%
mps = build_special_mps(12, 3)
v = mps_to_statevector(mps, basis)
w = build_bethe_state(special_solution(12, 3).mus, basis)
print("overlap:", abs(np.vdot(v, w)))
print("Schmidt ranks:", [len(schmidt_spectrum(v, basis, L)) for L in range(1, 12)])
print("half-chain entropy:", entanglement_entropy(v, basis, 6), "bound ln 8 =", np.log(8))

# %% [markdown]
# Dressing a single-fermion solution with extra exp(+-i pi/3) rapidities
# gives eigenstates on longer rings with the same energy.

# %%
base = single_fermion_solutions(5)[0]
d = dress_solution(base, 1, 0)
b6 = enumerate_basis(6)
v = build_bethe_state(d.mus, b6)
print("dressed N=6 energy", d.energy, "residual", np.linalg.norm(build_m1(b6).matrix @ v - d.energy * v))
