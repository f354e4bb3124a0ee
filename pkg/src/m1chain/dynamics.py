"""Quench dynamics under the M1 and PXP-like Hamiltonians.

Two propagators are provided: a spectral one (dense eigendecomposition,
exact up to rounding) and a short-iterate Lanczos/Krylov one with adaptive
substeps for spaces too large to diagonalize.  The closed-form revival
formulas for the Z2 and single-fermion initial states live here too.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .hilbert import ConstrainedBasis, from_sites, z2_state
from .operators import SparseOperator
from .spectra import DENSE_THRESHOLD, DoubletBlock, doublet_hamiltonian

__all__ = [
    "KRYLOV_DIM",
    "KRYLOV_TOL",
    "KrylovError",
    "QuenchResult",
    "evolve",
    "krylov_expm",
    "fidelity_series",
    "fermion_number_trace",
    "z2_initial_state",
    "single_fermion_state",
    "z2_fidelity_analytic",
    "single_fermion_fidelity_exact",
    "single_fermion_fidelity_bessel",
    "doublet_fidelity",
    "bessel_j0",
    "default_times",
]

KRYLOV_DIM = 30
KRYLOV_TOL = 1e-10
MAX_SUBSTEPS = 100_000
DEFAULT_SAMPLES = 2000


class KrylovError(RuntimeError):
    def __init__(self, msg: str, error_bound: float):
        super().__init__(msg)
        self.error_bound = error_bound


def default_times(tmax: float, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    if samples < 2:
        raise ValueError("need at least 2 time samples")
    return np.linspace(0.0, float(tmax), int(samples))


def z2_initial_state(basis: ConstrainedBasis) -> np.ndarray:
    return basis.basis_vector(z2_state(basis.n_sites))


def single_fermion_state(basis: ConstrainedBasis, site: int = 1) -> np.ndarray:
    return basis.basis_vector(from_sites([site]))


def _eigh(H: SparseOperator):
    if "eigh" not in H._cache:
        if not H.hermitian:
            raise ValueError("spectral propagation needs a hermitian operator")
        H._cache["eigh"] = la.eigh(H.toarray())
    return H._cache["eigh"]


def _choose(H: SparseOperator, method: str) -> str:
    if method == "auto":
        return "spectral" if H.dim <= DENSE_THRESHOLD else "krylov"
    if method not in ("spectral", "krylov"):
        raise ValueError(f"unknown propagation method {method!r}")
    return method


def _check_state(H: SparseOperator, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (H.dim,):
        raise ValueError(f"state length {psi.shape} does not match dim {H.dim}")
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("initial state must be normalized")
    return psi


def _lanczos(A, v, m):
    """Orthonormal Krylov basis and tridiagonal projection.

    Returns ``(V, alpha, beta, h_next)`` with ``h_next`` the norm of the
    residual that would start the next vector (0 on breakdown).
    """
    n = v.shape[0]
    m = min(m, n)
    V = np.zeros((n, m), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    V[:, 0] = v
    h_next = 0.0
    for j in range(m):
        w = A @ V[:, j]
        alpha[j] = np.vdot(V[:, j], w).real
        w -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        w -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        h = np.linalg.norm(w)
        if j == m - 1:
            h_next = h
            break
        if h < 1e-13:
            return V[:, : j + 1], alpha[: j + 1], beta[:j], 0.0
        beta[j] = h
        V[:, j + 1] = w / h
    return V, alpha, beta, h_next


def _tri_expm_first_col(alpha, beta, tau):
    if len(alpha) == 1:
        return np.array([np.exp(-1j * tau * alpha[0])])
    e, U = la.eigh_tridiagonal(alpha, beta)
    return U @ (np.exp(-1j * tau * e) * U[0].conj())


def krylov_expm(
    H: SparseOperator,
    psi: np.ndarray,
    t: float,
    *,
    m: int = KRYLOV_DIM,
    tol: float = KRYLOV_TOL,
    max_substeps: int = MAX_SUBSTEPS,
) -> tuple[np.ndarray, float, int]:
    """``exp(-i H t) psi`` by restarted Lanczos.

    Each substep ``tau`` is halved until the a-posteriori estimate
    ``beta * h_{m+1,m} * |[exp(-i tau T)]_{m,1}|`` drops below ``tol``.
    Returns the state, the accumulated error estimate and the step count.
    """
    A = H.matrix
    v = np.array(psi, dtype=complex)
    remaining = float(t)
    sgn = 1.0 if remaining >= 0 else -1.0
    remaining = abs(remaining)
    tau = remaining
    err_total = 0.0
    steps = 0
    while remaining > 0:
        if steps >= max_substeps:
            raise KrylovError(f"{max_substeps} substeps without reaching t", err_total)
        beta0 = np.linalg.norm(v)
        V, alpha, beta, h_next = _lanczos(A, v / beta0, m)
        tau = min(tau, remaining)
        while True:
            y = _tri_expm_first_col(alpha, beta, sgn * tau)
            err = beta0 * h_next * abs(y[-1])
            if err <= tol or h_next == 0.0:
                break
            tau /= 2
            if tau < 1e-14 * max(1.0, abs(t)):
                raise KrylovError("substep underflow", err_total + err)
        v = beta0 * (V @ y)
        err_total += err
        remaining -= tau
        steps += 1
        tau = 2 * tau
    return v, err_total, steps


def evolve(H: SparseOperator, psi0: np.ndarray, t: float, method: str = "auto") -> np.ndarray:
    """``exp(-i H t) psi0``."""
    psi0 = _check_state(H, psi0)
    if t == 0:
        return psi0.copy()
    method = _choose(H, method)
    if method == "spectral":
        e, U = _eigh(H)
        return U @ (np.exp(-1j * e * t) * (U.conj().T @ psi0))
    return krylov_expm(H, psi0, t)[0]


@dataclass(frozen=True, eq=False)
class QuenchResult:
    times: np.ndarray
    fidelity: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    method: str = "spectral"
    meta: dict = field(default_factory=dict)

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"t": self.times, "fidelity": self.fidelity}
        cols.update(self.observables)
        return cols

    def to_csv(self, path=None) -> str:
        """CSV with header ``t,fidelity,<observables...>``; '.' decimals."""
        cols = self.columns()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, **extra) -> str:
        meta = dict(self.meta, method=self.method)
        meta.update(extra)
        doc = {"meta": meta, "columns": {k: np.asarray(v).tolist() for k, v in self.columns().items()}}
        return json.dumps(doc, indent=2)


def _states_on_grid(H, psi0, times, method):
    """Yield the evolved state at each grid time."""
    if method == "spectral":
        e, U = _eigh(H)
        c = U.conj().T @ psi0
        for t in times:
            yield U @ (np.exp(-1j * e * t) * c)
    else:
        v = psi0.copy()
        prev = 0.0
        for t in times:
            if t != prev:
                v = krylov_expm(H, v, t - prev)[0]
                prev = t
            yield v


def fidelity_series(
    H: SparseOperator,
    psi0: np.ndarray,
    times,
    observables: dict[str, SparseOperator] | None = None,
    method: str = "auto",
) -> QuenchResult:
    """Return fidelity ``|<psi0|psi(t)>|^2`` and ``<O>(t)`` on a time grid."""
    psi0 = _check_state(H, psi0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or times[0] != 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending and start at 0")
    method = _choose(H, method)
    observables = observables or {}
    fid = np.empty(len(times))
    obs = {name: np.empty(len(times)) for name in observables}
    for n, psi in enumerate(_states_on_grid(H, psi0, times, method)):
        fid[n] = abs(np.vdot(psi0, psi)) ** 2
        for name, op in observables.items():
            obs[name][n] = np.vdot(psi, op.matrix @ psi).real
    meta = {"N": H.basis.n_sites, "dim": H.dim, "hamiltonian": H.name}
    return QuenchResult(times, fid, obs, method, meta)


def fermion_number_trace(
    H: SparseOperator, psi0: np.ndarray, times, method: str = "auto", tol: float = 1e-9
) -> np.ndarray:
    """``<F>(t)`` for a sector-pure initial state, checked against ``f-1 <= <F> <= f+1``."""
    psi0 = _check_state(H, psi0)
    nf = H.basis.fermion_numbers
    support = np.abs(psi0) > 1e-14
    fs = np.unique(nf[support])
    if len(fs) != 1:
        raise ValueError(f"initial state spans fermion sectors {fs.tolist()}")
    f = int(fs[0])
    times = np.asarray(times, dtype=float)
    out = np.array(
        [np.sum(nf * np.abs(psi) ** 2) for psi in _states_on_grid(H, psi0, times, _choose(H, method))]
    )
    lo, hi = max(f - 1, 0), min(f + 1, H.basis.max_fermions)
    if np.any(out < lo - tol) or np.any(out > hi + tol):
        raise AssertionError(f"<F>(t) left [{lo}, {hi}]: range [{out.min()}, {out.max()}]")
    return out


def z2_fidelity_analytic(n_sites: int, t):
    """``cos^2(sqrt(N/2) t)`` for the Z2 state at zero chemical potential."""
    if n_sites % 2 or n_sites < 4:
        raise ValueError(f"Z2 state needs an even ring with N >= 4, got N={n_sites}")
    return np.cos(np.sqrt(n_sites / 2) * np.asarray(t)) ** 2


def single_fermion_fidelity_exact(n_sites: int, t):
    """``(1/N^2) (sum_k cos(sqrt(E_k) t))^2`` with ``E_k = N - 2 + 2 cos k``."""
    if n_sites < 3:
        raise ValueError("N must be >= 3")
    k = 2 * np.pi * np.arange(n_sites) / n_sites
    w = np.sqrt(n_sites - 2 + 2 * np.cos(k))
    t = np.asarray(t, dtype=float)
    s = np.cos(np.multiply.outer(t, w)).sum(axis=-1)
    return (s / n_sites) ** 2


def single_fermion_fidelity_bessel(n_sites: int, t):
    """Large-N form ``cos^2(sqrt(N-2) t) J0^2(t / sqrt(N-2))``."""
    if n_sites < 3:
        raise ValueError("N must be >= 3")
    r = np.sqrt(n_sites - 2)
    t = np.asarray(t, dtype=float)
    return np.cos(r * t) ** 2 * bessel_j0(t / r) ** 2


def doublet_fidelity(energy: float, fermion_number: int, mu: float, t, start: str = "upper"):
    """Return-probability inside the 2x2 doublet model.

    ``fermion_number`` is that of the upper member; ``start`` picks which
    member the evolution starts from.
    """
    h, _ = doublet_hamiltonian(DoubletBlock(energy, fermion_number, mu))
    e, U = np.linalg.eigh(h)
    idx = {"upper": 0, "lower": 1}[start]
    w = np.abs(U[idx]) ** 2
    t = np.asarray(t, dtype=float)
    amp = np.exp(-1j * np.multiply.outer(t, e)) @ w
    return np.abs(amp) ** 2


# Bessel J0: power series near the origin, Hankel asymptotics beyond.
_SERIES_MAX = 12.0


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -(x * x) / 4
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _j0_hankel(x: np.ndarray) -> np.ndarray:
    p = np.ones_like(x)
    q = np.zeros_like(x)
    a = 1.0
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 60):
        a = a * (-((2 * k - 1) ** 2)) / (k * 8)
        term = a / x**k
        # each point stops before its asymptotic series turns around
        active &= np.abs(term) < prev
        if not active.any():
            break
        prev = np.abs(term)
        term = np.where(active, term, 0.0)
        if k % 2:
            q = q + (-1) ** ((k - 1) // 2) * term
        else:
            p = p + (-1) ** (k // 2) * term
    chi = x - np.pi / 4
    return np.sqrt(2 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x <= _SERIES_MAX
    out[small] = _j0_series(x[small])
    if np.any(~small):
        out[~small] = _j0_hankel(x[~small])
    return out if out.ndim else float(out)
