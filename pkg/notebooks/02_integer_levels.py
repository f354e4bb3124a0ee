# %% [markdown]
# # Integer eigenvalues and supersymmetric multiplets at N = 12

# %%
from m1chain.hilbert import enumerate_basis
from m1chain.operators import build_m1, build_pxp, build_supercharge
from m1chain.spectra import (
    classify_susy,
    diagonalize,
    doublet_pxp_levels,
    format_integer_table,
    integer_eigenvalue_table,
)
import numpy as np

basis = enumerate_basis(12)
Q = build_supercharge(basis)
spec = diagonalize(build_m1(basis, Q))
print(format_integer_table(integer_eigenvalue_table(spec)))

# %% [markdown]
# Every positive level pairs with a partner one sector up.  Only the two
# f = 4 zero modes stay unpaired.

# %%
cls = classify_susy(spec, Q)
print(len(cls.singlets), "singlets,", len(cls.doublets), "doublets")
print("largest partner energy mismatch:", cls.max_energy_mismatch)

# %% [markdown]
# Each doublet is a closed 2x2 block of Q + Q^dag + mu F.  Their levels
# together with the singlets give the whole PXP-like spectrum.

# %%
mu = 0.8
ed = np.linalg.eigvalsh(build_pxp(basis, mu, Q).toarray())
print("max deviation:", np.abs(doublet_pxp_levels(cls, mu) - ed).max())
