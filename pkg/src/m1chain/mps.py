"""Exact matrix-product form of the all-exp(+-i pi/3) Bethe eigenstates.

Bond space = (2-dim blockade factor) x (f+1-dim particle counter).  The
coefficient of ``c_{i1}^dag ... c_{if}^dag |0>`` is
``Tr(A_1^{n_1} ... A_N^{n_N} B)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bethe import Inadmissible, special_solution
from .hilbert import BasisState, ConstrainedBasis
from .spectra import schmidt_values

__all__ = [
    "MpsState",
    "build_special_mps",
    "mps_amplitude",
    "mps_to_statevector",
    "schmidt_spectrum",
]

_RAISE = np.array([[0, 1], [0, 0]], dtype=complex)
_FILL = np.array([[0, 0], [1, 1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class MpsState:
    n_sites: int
    fermion_number: int
    branch: str
    empty: np.ndarray  # A^0, identical on every site
    occupied: np.ndarray  # A_j^1 stacked, shape (N, D, D)
    boundary: np.ndarray

    @property
    def bond_dimension(self) -> int:
        return self.empty.shape[0]

    def site_tensors(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """``(A_j^0, A_j^1)`` for site ``j`` (1-based)."""
        return self.empty, self.occupied[j - 1]


def build_special_mps(n_sites: int, f: int, branch: str = "+") -> MpsState:
    sol = special_solution(n_sites, f, branch)
    if isinstance(sol, Inadmissible):
        raise ValueError(f"(N={n_sites}, f={f}, branch {branch}) is inadmissible: {sol.reason}")
    sign = 1 if branch in ("+", 1, "+1", "plus") else -1
    X = np.eye(f + 1, k=1, dtype=complex)  # X[a, a+1] = 1
    Bt = np.zeros((f + 1, f + 1), dtype=complex)
    Bt[f, 0] = 1.0
    hop = np.kron(_RAISE, X)
    occupied = np.stack(
        [np.exp(sign * 1j * np.pi * j / 3) * hop for j in range(1, n_sites + 1)]
    )
    return MpsState(
        n_sites=n_sites,
        fermion_number=f,
        branch="+" if sign > 0 else "-",
        empty=np.kron(_FILL, np.eye(f + 1, dtype=complex)),
        occupied=occupied,
        boundary=np.kron(np.eye(2, dtype=complex), Bt),
    )


def mps_amplitude(mps: MpsState, config: BasisState | int) -> complex:
    """Trace-formula coefficient for one occupation pattern."""
    if isinstance(config, BasisState):
        if config.n_sites != mps.n_sites:
            raise ValueError(f"config has N={config.n_sites}, MPS has N={mps.n_sites}")
        bits = config.bits
    else:
        bits = int(config)
        if bits >> mps.n_sites:
            raise ValueError("config has bits beyond the MPS length")
    m = np.eye(mps.bond_dimension, dtype=complex)
    for j in range(mps.n_sites):
        m = m @ (mps.occupied[j] if bits >> j & 1 else mps.empty)
    return complex(np.trace(m @ mps.boundary))


def mps_to_statevector(mps: MpsState, basis: ConstrainedBasis) -> np.ndarray:
    """Normalized state vector on ``basis``.

    The trace coefficient multiplies the creation string in increasing site
    order, which is already the canonical Fock ordering, so no extra sign
    enters.  Amplitudes are accumulated sweeping left to right over all
    basis states at once.
    """
    if basis.n_sites != mps.n_sites:
        raise ValueError(f"basis has N={basis.n_sites}, MPS has N={mps.n_sites}")
    D = mps.bond_dimension
    occ = basis.occupations().astype(bool)
    env = np.broadcast_to(np.eye(D, dtype=complex), (basis.dim, D, D)).copy()
    for j in range(mps.n_sites):
        env = np.where(occ[:, j, None, None], env @ mps.occupied[j], env @ mps.empty)
    vec = np.einsum("kab,ba->k", env, mps.boundary)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ArithmeticError("MPS state has zero norm")
    return vec / norm


def schmidt_spectrum(state, basis: ConstrainedBasis, cut) -> np.ndarray:
    """Schmidt coefficients of an :class:`MpsState` or a state vector."""
    if isinstance(state, MpsState):
        state = mps_to_statevector(state, basis)
    return schmidt_values(state, basis, cut)
