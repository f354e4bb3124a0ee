"""Exact diagonalization, quench dynamics, Bethe ansatz and MPS tools for
the supersymmetric M1 chain and its PXP-like fermionic deformation."""

__version__ = "0.1.0"

from .hilbert import BasisState, ConstrainedBasis, enumerate_basis, fermion_sign
from .operators import (
    ModelParams,
    SparseOperator,
    apply,
    build_fermion_number,
    build_m1,
    build_m1_literal,
    build_pxp,
    build_supercharge,
)
from .spectra import (
    DoubletBlock,
    Spectrum,
    classify_susy,
    diagonalize,
    doublet_hamiltonian,
    entanglement_entropy,
    integer_eigenvalue_table,
)
from .dynamics import (
    QuenchResult,
    evolve,
    fermion_number_trace,
    fidelity_series,
    single_fermion_fidelity_bessel,
    single_fermion_fidelity_exact,
    z2_fidelity_analytic,
)
from .bethe import (
    BetheSolution,
    Inadmissible,
    bethe_energy,
    bethe_residuals,
    build_bethe_state,
    dress_solution,
    scattering_g,
    special_solution,
)
from .mps import MpsState, build_special_mps, mps_amplitude, mps_to_statevector, schmidt_spectrum
