"""Supercharges, M1 and PXP-like Hamiltonians as sparse matrices.

All operators live on a :class:`~m1chain.hilbert.ConstrainedBasis` and are
stored as complex CSR matrices.  The M1 Hamiltonian is *defined* as the
anticommutator ``Q Q^dag + Q^dag Q``; :func:`build_m1_literal` writes out the
local hopping-plus-potential form independently so the two can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .hilbert import ConstrainedBasis

__all__ = [
    "ModelParams",
    "SparseOperator",
    "build_supercharge",
    "build_m1",
    "build_m1_literal",
    "build_pxp",
    "build_fermion_number",
    "apply",
    "save_triplets",
    "load_triplets",
]

HERMITIAN_TOL = 1e-12
REAL_TOL = 1e-14


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr.astype(np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class ModelParams:
    n_sites: int
    mu: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) < 3:
            raise ValueError(f"n_sites must be >= 3, got {self.n_sites}")
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """A complex sparse matrix tied to the basis it acts on."""

    basis: ConstrainedBasis
    matrix: sp.csr_matrix
    hermitian: bool = False
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"matrix shape {m.shape} does not match dim {self.basis.dim}")
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            diff = m - m.conj().T
            if diff.nnz and abs(diff).max() > HERMITIAN_TOL:
                raise ValueError(f"{self.name or 'operator'} flagged hermitian but is not")

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def H(self) -> "SparseOperator":
        """Hermitian adjoint."""
        name = self.name + "^dag" if self.name else ""
        return SparseOperator(self.basis, self.matrix.conj().T.tocsr(), self.hermitian, name)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator(self.basis, self.matrix @ other.matrix)
        return apply(self, other)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator(
            self.basis, self.matrix + other.matrix, self.hermitian and other.hermitian
        )

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator(
            self.basis, self.matrix - other.matrix, self.hermitian and other.hermitian
        )

    def __mul__(self, scalar) -> "SparseOperator":
        scalar = complex(scalar)
        herm = self.hermitian and scalar.imag == 0
        return SparseOperator(self.basis, self.matrix * scalar, herm, self.name)

    __rmul__ = __mul__

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def max_abs(self) -> float:
        return float(abs(self.matrix).max()) if self.nnz else 0.0

    def is_block_diagonal(self) -> bool:
        """True when no entry connects different fermion-number sectors."""
        coo = self.matrix.tocoo()
        nf = self.basis.fermion_numbers
        return bool(np.all(nf[coo.row] == nf[coo.col]))

    def sector_block(self, f: int) -> sp.csr_matrix:
        s = self.basis.sector(f)
        return self.matrix[s, s]

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix @ vec))


def apply(op: SparseOperator, vec: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector (or matrix-block) product."""
    vec = np.asarray(vec)
    if vec.shape[0] != op.dim:
        raise ValueError(f"vector length {vec.shape[0]} does not match operator dim {op.dim}")
    return op.matrix @ vec


def _bit(site: int) -> np.uint64:
    return np.uint64(1) << np.uint64(site - 1)


def _neighbors(site: int, n: int) -> tuple[int, int]:
    return (site - 2) % n + 1, site % n + 1


def _jw_parity(states: np.ndarray, site: int) -> np.ndarray:
    below = (np.uint64(1) << np.uint64(site - 1)) - np.uint64(1)
    return _popcount(states & below) % 2


def build_supercharge(basis: ConstrainedBasis) -> SparseOperator:
    """``Q = sum_i P_<i> c_i``; lowers the fermion number by one."""
    n = basis.n_sites
    states = basis.states
    rows, cols, vals = [], [], []
    for i in range(1, n + 1):
        left, right = _neighbors(i, n)
        free = (states & (_bit(left) | _bit(right))) == 0
        hit = ((states & _bit(i)) != 0) & free
        src = np.nonzero(hit)[0]
        dst = basis.index(states[src] ^ _bit(i))
        sign = 1 - 2 * _jw_parity(states[src], i)
        rows.append(dst)
        cols.append(src)
        vals.append(sign.astype(complex))
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )
    return SparseOperator(basis, m, name="Q")


def _assert_real(m: sp.spmatrix, what: str) -> None:
    if m.nnz and np.abs(m.data.imag).max() > REAL_TOL:
        raise AssertionError(f"{what} has complex entries in the occupation basis")


def build_m1(basis: ConstrainedBasis, Q: SparseOperator | None = None) -> SparseOperator:
    """``H_M1 = Q Q^dag + Q^dag Q``."""
    Q = build_supercharge(basis) if Q is None else Q
    q = Q.matrix
    qd = q.conj().T.tocsr()
    h = q @ qd + qd @ q
    _assert_real(h, "H_M1")
    return SparseOperator(basis, h, hermitian=True, name="H_M1")


def build_m1_literal(basis: ConstrainedBasis) -> SparseOperator:
    """Hopping plus potential form of the M1 Hamiltonian, written term by term.

    ``sum_i P_{i-1} (c_i^dag c_{i+1} + h.c.) P_{i+2} + sum_i P_{i-1} P_{i+1}``
    with periodic indices.  Used only as a cross-check of :func:`build_m1`.
    """
    n = basis.n_sites
    states = basis.states
    dim = basis.dim
    rows, cols, vals = [], [], []

    def occ(site):
        return (states & _bit((site - 1) % n + 1)) != 0

    for i in range(1, n + 1):
        j = i % n + 1
        guard = ~occ(i - 1) & ~occ(i + 2)
        # c_i^dag c_j and c_j^dag c_i
        for dst_site, src_site in ((i, j), (j, i)):
            hit = guard & occ(src_site) & ~occ(dst_site)
            src = np.nonzero(hit)[0]
            s = states[src]
            mid = s ^ _bit(src_site)
            sign = (1 - 2 * _jw_parity(s, src_site)) * (1 - 2 * _jw_parity(mid, dst_site))
            dst = basis.index(mid | _bit(dst_site))
            rows.append(dst)
            cols.append(src)
            vals.append(sign.astype(complex))
        pot = np.nonzero(~occ(i - 1) & ~occ(i + 1))[0]
        rows.append(pot)
        cols.append(pot)
        vals.append(np.ones(len(pot), dtype=complex))

    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return SparseOperator(basis, m, hermitian=True, name="H_M1_literal")


def build_fermion_number(basis: ConstrainedBasis) -> SparseOperator:
    m = sp.diags(basis.fermion_numbers.astype(complex), format="csr")
    return SparseOperator(basis, m, hermitian=True, name="F")


def build_pxp(
    basis: ConstrainedBasis, params: ModelParams | float = 0.0, Q: SparseOperator | None = None
) -> SparseOperator:
    """``H_PXP = Q + Q^dag + mu F``.

    ``params`` may be a :class:`ModelParams` or just the chemical potential.
    """
    if isinstance(params, ModelParams):
        if params.n_sites != basis.n_sites:
            raise ValueError(f"params.n_sites={params.n_sites} but basis has N={basis.n_sites}")
        mu = params.mu
    else:
        mu = float(params)
    Q = build_supercharge(basis) if Q is None else Q
    q = Q.matrix
    h = q + q.conj().T
    if mu != 0.0:
        h = h + mu * sp.diags(basis.fermion_numbers.astype(complex))
    _assert_real(h, "H_PXP")
    return SparseOperator(basis, h.tocsr(), hermitian=True, name=f"H_PXP(mu={mu:g})")


def save_triplets(op: SparseOperator, path) -> None:
    """Write ``op`` as text: one header line ``N dim nnz hermitian`` then
    ``row col re im`` per stored entry (0-based indices, row-major order)."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    body = np.column_stack(
        [coo.row[order], coo.col[order], coo.data.real[order], coo.data.imag[order]]
    )
    header = f"{op.basis.n_sites} {op.dim} {op.nnz} {int(op.hermitian)}"
    np.savetxt(path, body, fmt=["%d", "%d", "%.17g", "%.17g"], header=header, comments="")


def load_triplets(path, basis: ConstrainedBasis | None = None) -> SparseOperator:
    from .hilbert import enumerate_basis

    path = Path(path)
    with path.open() as fh:
        n, dim, nnz, herm = (int(x) for x in fh.readline().split())
    basis = enumerate_basis(n) if basis is None else basis
    if basis.n_sites != n or basis.dim != dim:
        raise ValueError(f"file is for N={n}, dim={dim}; basis has N={basis.n_sites}")
    body = np.loadtxt(path, skiprows=1, ndmin=2)
    if len(body) != nnz:
        raise ValueError(f"header declares nnz={nnz}, file holds {len(body)} entries")
    m = sp.csr_matrix(
        (body[:, 2] + 1j * body[:, 3], (body[:, 0].astype(int), body[:, 1].astype(int))),
        shape=(dim, dim),
    ) if nnz else sp.csr_matrix((dim, dim), dtype=complex)
    return SparseOperator(basis, m, hermitian=bool(herm))
