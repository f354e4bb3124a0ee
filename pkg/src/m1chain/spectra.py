"""Spectra of the M1 / PXP-like Hamiltonians and their supersymmetry structure."""

from __future__ import annotations

import json
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as sla

from .hilbert import ConstrainedBasis
from .operators import SparseOperator

__all__ = [
    "DENSE_THRESHOLD",
    "ConvergenceError",
    "SusyConsistencyError",
    "Spectrum",
    "SusyClassification",
    "DoubletBlock",
    "IntegerLevel",
    "diagonalize",
    "classify_susy",
    "integer_eigenvalue_table",
    "format_integer_table",
    "doublet_hamiltonian",
    "doublet_pxp_levels",
    "schmidt_values",
    "entanglement_entropy",
    "entropy_over_cuts",
]

DENSE_THRESHOLD = 4096
PAIR_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed; ``residual`` is the best achieved."""

    def __init__(self, msg: str, residual: float = float("nan")):
        super().__init__(msg)
        self.residual = residual


class SusyConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs of a hermitian operator.

    ``eigenvectors[:, k]`` is a full-basis vector; ``sectors[k]`` is its
    fermion number, or -1 when the operator mixes sectors.
    """

    basis: ConstrainedBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sectors: np.ndarray
    residual_norms: np.ndarray
    name: str = ""

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def in_sector(self, f: int) -> np.ndarray:
        return np.nonzero(self.sectors == f)[0]

    def to_json(self, **meta) -> str:
        """Per-sector eigenvalues and residuals."""
        sectors = {}
        for f in np.unique(self.sectors):
            ids = self.in_sector(int(f))
            sectors[str(int(f))] = {
                "eigenvalues": self.eigenvalues[ids].tolist(),
                "residuals": self.residual_norms[ids].tolist(),
            }
        doc = {"N": self.basis.n_sites, "dim": self.basis.dim, "operator": self.name}
        doc.update(meta)
        doc["sectors"] = sectors
        return json.dumps(doc, indent=2)


def _residuals(op: SparseOperator, vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    if vecs.shape[1] == 0:
        return np.zeros(0)
    r = op.matrix @ vecs - vecs * vals[None, :]
    return np.linalg.norm(r, axis=0)


def _solve_block(block, dense_threshold, k, which, tol):
    n = block.shape[0]
    if n <= dense_threshold:
        vals, vecs = la.eigh(block.toarray())
        return vals, vecs
    k = min(k, n - 1)
    try:
        vals, vecs = sla.eigsh(block, k=k, which=which, tol=tol)
    except sla.ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            r = np.linalg.norm(block @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues, axis=0)
            best = float(r.max())
        else:
            best = float("inf")
        raise ConvergenceError(f"eigsh did not converge ({exc})", best) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def diagonalize(
    op: SparseOperator,
    sector: int | None = None,
    *,
    dense_threshold: int = DENSE_THRESHOLD,
    k: int = 6,
    which: str = "SA",
    tol: float = 0.0,
) -> Spectrum:
    """Eigen-decompose ``op``, sector by sector when it conserves ``F``.

    Blocks up to ``dense_threshold`` states are solved densely (all
    eigenpairs); larger blocks return ``k`` extremal eigenpairs from ARPACK.
    """
    if not op.hermitian:
        raise ValueError("diagonalize requires a hermitian operator")
    basis = op.basis
    conserving = op.is_block_diagonal()
    if sector is not None and not conserving:
        raise ValueError("sector-restricted diagonalization needs an F-conserving operator")

    if conserving:
        sectors = [sector] if sector is not None else range(basis.max_fermions + 1)
    else:
        sectors = [None]

    all_vals, all_vecs, labels = [], [], []
    for f in sectors:
        if f is None:
            block, sl = op.matrix, slice(0, basis.dim)
        else:
            sl = basis.sector(f)
            if sl.stop == sl.start:
                continue
            block = op.matrix[sl, sl]
        vals, vecs = _solve_block(block, dense_threshold, k, which, tol)
        full = np.zeros((basis.dim, len(vals)), dtype=complex)
        full[sl] = vecs
        all_vals.append(vals)
        all_vecs.append(full)
        labels.append(np.full(len(vals), -1 if f is None else f))

    vals = np.concatenate(all_vals)
    vecs = np.concatenate(all_vecs, axis=1)
    res = _residuals(op, vals, vecs)
    bound = 1e-10 * np.maximum(1.0, np.abs(vals))
    if np.any(res > bound):
        worst = float(np.max(res - bound))
        raise ConvergenceError("eigenpair residual above 1e-10 max(1,|E|)", worst)
    return Spectrum(basis, vals, vecs, np.concatenate(labels), res, op.name)


@dataclass(frozen=True, eq=False)
class SusyClassification:
    """Singlets and doublets of an M1 spectrum.

    ``spectrum`` is the input spectrum with eigenvectors rotated inside each
    degenerate cluster so every positive-energy vector has a definite
    partner: ``doublets`` holds ``(lower_id, upper_id, energy)`` with
    ``upper = Q^dag lower / sqrt(E)``.
    """

    spectrum: Spectrum
    singlets: list[int]
    doublets: list[tuple[int, int, float]]
    max_energy_mismatch: float = 0.0
    max_singlet_residual: float = 0.0
    partner_of: dict = field(default_factory=dict, repr=False)


def _clusters(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    if len(vals) == 0:
        return []
    order = np.argsort(vals)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if vals[b] - vals[a] > tol * max(1.0, abs(vals[b])):
            groups.append(np.array(cur))
            cur = []
        cur.append(b)
    groups.append(np.array(cur))
    return groups


def _orth_complement(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(V) minus span(W); W orthonormal inside span(V)."""
    d, m = V.shape[1], W.shape[1]
    if d == m:
        return V[:, :0]
    C = V - W @ (W.conj().T @ V) if m else V
    u, s, _ = np.linalg.svd(C, full_matrices=False)
    return u[:, : d - m]


def classify_susy(
    spec: Spectrum,
    Q: SparseOperator,
    tol: float = 1e-8,
    *,
    cluster_tol: float = 1e-8,
    pair_tol: float = PAIR_TOL,
) -> SusyClassification:
    """Arrange an M1 spectrum into singlets and doublets.

    Sectors are processed in increasing ``f``.  Inside each degenerate
    cluster at energy ``E > tol`` the images ``Q^dag v / sqrt(E)`` of the
    upward-pairing vectors of sector ``f - 1`` are taken as the
    downward-pairing vectors; the orthogonal complement pairs upward.  This
    is exact in the presence of extra (non-SUSY) degeneracies.
    """
    if np.any(spec.sectors < 0):
        raise ValueError("classify_susy needs a sector-resolved spectrum")
    basis = spec.basis
    vecs = spec.eigenvectors.copy()
    q = Q.matrix
    qd = q.conj().T.tocsr()
    singlets, doublets, partner_of = [], [], {}
    worst_mismatch = 0.0
    worst_singlet = 0.0
    pending: list[tuple[float, list[int], np.ndarray]] = []  # from sector f-1

    for f in range(basis.max_fermions + 1):
        ids = spec.in_sector(f)
        vals = spec.eigenvalues[ids]
        groups = _clusters(vals, cluster_tol)
        incoming = pending
        pending = []
        used = [False] * len(incoming)
        for g in groups:
            gid = ids[g]
            E = float(np.mean(spec.eigenvalues[gid]))
            V = vecs[:, gid]
            if E <= tol:
                for i in gid:
                    r = max(np.linalg.norm(q @ vecs[:, i]), np.linalg.norm(qd @ vecs[:, i]))
                    worst_singlet = max(worst_singlet, r)
                    if r > pair_tol:
                        raise SusyConsistencyError(
                            f"zero mode {i} (f={f}) not annihilated by Q, Q^dag: {r:.3g}"
                        )
                    singlets.append(int(i))
                continue
            # images of the upward-pairing vectors of sector f-1 at this energy
            W_parts, lower_ids = [], []
            for n, (E_low, low, imgs) in enumerate(incoming):
                if not used[n] and abs(E_low - E) <= cluster_tol * max(1.0, E):
                    used[n] = True
                    worst_mismatch = max(worst_mismatch, abs(E_low - E))
                    W_parts.append(imgs)
                    lower_ids.extend(low)
            W = np.concatenate(W_parts, axis=1) if W_parts else V[:, :0]
            if W.shape[1] > V.shape[1]:
                raise SusyConsistencyError(
                    f"{W.shape[1]} partners from f={f - 1} but cluster at E={E:.6g} has {V.shape[1]}"
                )
            if W.shape[1]:
                leak = np.linalg.norm(W - V @ (V.conj().T @ W), axis=0).max()
                if leak > pair_tol * 10:
                    raise SusyConsistencyError(f"Q^dag image leaves the E={E:.6g} cluster: {leak:.3g}")
            C = _orth_complement(V, W)
            m = W.shape[1]
            for n, (slot, lo) in enumerate(zip(gid[:m], lower_ids)):
                vecs[:, slot] = W[:, n]
                doublets.append((int(lo), int(slot), E))
                partner_of[int(lo)] = int(slot)
                partner_of[int(slot)] = int(lo)
            up_ids = list(gid[m:])
            if up_ids:
                vecs[:, up_ids] = C
                down = np.linalg.norm(q @ C, axis=0).max()
                if down > pair_tol * np.sqrt(E) * 10:
                    raise SusyConsistencyError(f"upward-pairing vectors not Q-closed: {down:.3g}")
                imgs = (qd @ C) / np.sqrt(E)
                pending.append((E, up_ids, imgs))
        for n, (E_low, low, _) in enumerate(incoming):
            if not used[n]:
                raise SusyConsistencyError(
                    f"{len(low)} state(s) at E={E_low:.10g}, f={f - 1} have no partner in f={f}"
                )
    if pending:
        E_low, low, _ = pending[0]
        raise SusyConsistencyError(f"state(s) {low} at E={E_low:.10g} in the top sector are unpaired")

    adapted = Spectrum(
        basis, spec.eigenvalues.copy(), vecs, spec.sectors.copy(), spec.residual_norms.copy(), spec.name
    )
    return SusyClassification(adapted, singlets, doublets, worst_mismatch, worst_singlet, partner_of)


IntegerLevel = namedtuple("IntegerLevel", "energy multiplicity distance")


def integer_eigenvalue_table(spec: Spectrum, tol: float = 1e-8) -> dict[int, list[IntegerLevel]]:
    """Integer eigenvalues and their multiplicities per sector.

    ``distance`` is the largest ``|E - round(E)|`` among the grouped
    eigenvalues, kept for audit.  Sectors without integers are omitted.
    """
    table = {}
    for f in np.unique(spec.sectors):
        vals = spec.eigenvalues[spec.in_sector(int(f))]
        r = np.rint(vals)
        d = np.abs(vals - r)
        hit = d <= tol
        levels = []
        for e in np.unique(r[hit]):
            sel = hit & (r == e)
            levels.append(IntegerLevel(int(e), int(sel.sum()), float(d[sel].max())))
        if levels:
            table[int(f)] = levels
    return table


def format_integer_table(table: dict[int, list[IntegerLevel]], audit: bool = True) -> str:
    lines = ["f | E (x multiplicity)" + ("   [max |E - int|]" if audit else "")]
    for f in sorted(table):
        cells = ", ".join(f"{lv.energy} (x {lv.multiplicity})" for lv in table[f])
        line = f"{f} | {cells}"
        if audit:
            line += f"   [{max(lv.distance for lv in table[f]):.1e}]"
        lines.append(line)
    return "\n".join(lines)


@dataclass(frozen=True)
class DoubletBlock:
    """A doublet at M1 energy ``energy``; ``fermion_number`` is that of the
    upper member, so the pair spans sectors ``f`` and ``f - 1``."""

    energy: float
    fermion_number: int
    mu: float = 0.0

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError(f"doublet energy must be >= 0, got {self.energy}")


def doublet_hamiltonian(block: DoubletBlock) -> tuple[np.ndarray, np.ndarray]:
    """2x2 PXP-like Hamiltonian on ``{psi_f, Q psi_f / sqrt(E)}`` and its eigenvalues.

    Eigenvalues are ``mu (2f - 1)/2 -+ sqrt(E + mu^2/4)``, ascending.
    """
    E, f, mu = block.energy, block.fermion_number, block.mu
    if E < 0:
        raise ValueError("negative doublet energy")
    c = np.sqrt(E)
    h = np.array([[mu * f, c], [c, mu * (f - 1)]], dtype=float)
    centre = mu * (2 * f - 1) / 2
    half = np.sqrt(E + mu**2 / 4)
    return h, np.array([centre - half, centre + half])


def doublet_pxp_levels(cls: SusyClassification, mu: float = 0.0) -> np.ndarray:
    """PXP-like spectrum assembled from doublets and singlets, sorted."""
    spec = cls.spectrum
    levels = []
    for lo, hi, E in cls.doublets:
        levels.extend(doublet_hamiltonian(DoubletBlock(E, int(spec.sectors[hi]), mu))[1])
    levels.extend(mu * spec.sectors[i] for i in cls.singlets)
    return np.sort(np.array(levels, dtype=float))


def _cut_sites(cut, n_sites: int) -> np.ndarray:
    if isinstance(cut, (int, np.integer)):
        start, length = 1, int(cut)
    else:
        start, length = (int(x) for x in cut)
    if not 1 <= length < n_sites:
        raise ValueError(f"block length {length} must be in 1..{n_sites - 1}")
    return (np.arange(length) + start - 1) % n_sites  # 0-based site columns


def _schmidt_matrix(vec: np.ndarray, basis: ConstrainedBasis, cut) -> np.ndarray:
    n = basis.n_sites
    a_sites = _cut_sites(cut, n)
    in_a = np.zeros(n, dtype=bool)
    in_a[a_sites] = True
    occ = basis.occupations().astype(np.int64)
    occ_b = occ * ~in_a
    # sign from reordering the creation string so all A operators come first
    b_below = np.cumsum(occ_b, axis=1) - occ_b
    swaps = (occ[:, in_a] * b_below[:, in_a]).sum(axis=1)
    amp = vec * (1 - 2 * (swaps % 2))
    weights_a = 1 << np.arange(len(a_sites))
    b_cols = np.nonzero(~in_a)[0]
    key_a = occ[:, a_sites] @ weights_a
    key_b = occ[:, b_cols] @ (1 << np.arange(len(b_cols)))
    ua, ia = np.unique(key_a, return_inverse=True)
    ub, ib = np.unique(key_b, return_inverse=True)
    M = np.zeros((len(ua), len(ub)), dtype=complex)
    M[ia, ib] = amp
    return M


def _check_norm(vec: np.ndarray) -> None:
    if abs(np.linalg.norm(vec) - 1) > 1e-8:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(vec):.10g})")


def schmidt_values(vec: np.ndarray, basis: ConstrainedBasis, cut, cutoff: float = 1e-12) -> np.ndarray:
    """Schmidt coefficients across a contiguous cut, descending, above ``cutoff``.

    ``cut`` is either a block length ``L`` (sites 1..L) or ``(start, L)``
    for the block ``start, ..., start + L - 1`` taken around the ring.
    """
    vec = np.asarray(vec)
    if vec.shape != (basis.dim,):
        raise ValueError(f"vector length {vec.shape} does not match dim {basis.dim}")
    _check_norm(vec)
    s = np.linalg.svd(_schmidt_matrix(vec, basis, cut), compute_uv=False)
    return s[s > cutoff]


def entanglement_entropy(vec: np.ndarray, basis: ConstrainedBasis, cut) -> float:
    """Von Neumann entropy (natural log) of the block ``cut``."""
    p = schmidt_values(vec, basis, cut) ** 2
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entropy_over_cuts(vec: np.ndarray, basis: ConstrainedBasis, length: int) -> np.ndarray:
    """Entropy of every one of the N ring blocks of the given length."""
    return np.array(
        [entanglement_entropy(vec, basis, (s, length)) for s in range(1, basis.n_sites + 1)]
    )
