"""Bethe-ansatz eigenstates of the M1 chain.

A solution is a list of complex parameters ``mu_j`` (one per fermion).  The
wavefunction coefficient of ``c_{i1}^dag ... c_{if}^dag |0>`` (i1 < ... < if)
is ``sum_P A_P prod_a mu_{P_a}^{i_a}`` and the amplitudes obey

    A_(..., j, k, ...) / A_(..., k, j, ...) = g(mu_j, mu_k).

This module constructs and verifies distinguished solution families
(single fermion, ``mu = 1`` augmentation, all-``exp(+-i pi/3)`` special
solutions and their dressings).  It does not search for general roots.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .hilbert import (
    BasisState,
    ConstrainedBasis,
    inversion_sign,
    spatial_invert,
)

__all__ = [
    "OMEGA",
    "RESIDUAL_TOL",
    "MAX_PERMUTATION_FERMIONS",
    "BetheSolution",
    "Inadmissible",
    "scattering_g",
    "bethe_energy",
    "bethe_residuals",
    "permutation_amplitudes",
    "build_bethe_state",
    "make_solution",
    "special_solution",
    "dress_solution",
    "append_unity",
    "single_fermion_solutions",
    "inversion_partner",
    "inversion_combinations",
    "solution_to_json",
    "solution_from_json",
]

OMEGA = np.exp(1j * np.pi / 3)
RESIDUAL_TOL = 1e-10
MAX_PERMUTATION_FERMIONS = 8
_SPECIAL_TOL = 1e-12


def _special_branch(mu: complex) -> int:
    """+1 / -1 if ``mu`` is exp(+-i pi/3), else 0."""
    if abs(mu - OMEGA) < _SPECIAL_TOL:
        return 1
    if abs(mu - OMEGA.conjugate()) < _SPECIAL_TOL:
        return -1
    return 0


def scattering_g(mu_j: complex, mu_k: complex) -> complex:
    """Two-body phase shift ``g(mu_j, mu_k)``.

    With ``w = exp(+-i pi/3)`` the generic ratio is 0/0 at ``g(w, w)``, taken
    as 1; elsewhere a common factor ``mu - w`` cancels, leaving
    ``g(w, mu) = -1/mu`` and ``g(mu, w) = -mu``.
    """
    mu_j, mu_k = complex(mu_j), complex(mu_k)
    bj, bk = _special_branch(mu_j), _special_branch(mu_k)
    if bj and bk and bj == bk:
        return 1.0 + 0j
    if bj:
        if mu_k == 0:
            raise ValueError("g(exp(+-i pi/3), 0) is undefined")
        return -1.0 / mu_k
    if bk:
        return -mu_j
    num = mu_j * (mu_j * mu_k - mu_j + 1)
    den = mu_k * (mu_j * mu_k - mu_k + 1)
    if den == 0:
        raise ValueError(f"g({mu_j}, {mu_k}) has a vanishing denominator")
    return -num / den


def bethe_energy(mus, n_sites: int) -> float:
    """``E = N - 2f + sum_j (mu_j + 1/mu_j)``."""
    mus = np.asarray(mus, dtype=complex)
    if np.any(mus == 0):
        raise ValueError("Bethe parameters must be nonzero")
    e = n_sites - 2 * len(mus) + np.sum(mus + 1 / mus)
    if abs(e.imag) > 1e-9:
        raise ValueError(f"complex Bethe energy {e}")
    return float(e.real)


def bethe_residuals(mus, n_sites: int) -> float:
    """Max over j of ``|mu_j^N - (-1)^(f-1) prod_{k != j} g(mu_j, mu_k)|``."""
    mus = [complex(m) for m in mus]
    f = len(mus)
    worst = 0.0
    for j, mj in enumerate(mus):
        rhs = (-1) ** (f - 1)
        for k, mk in enumerate(mus):
            if k != j:
                rhs *= scattering_g(mj, mk)
        worst = max(worst, abs(mj**n_sites - rhs))
    return worst


def permutation_amplitudes(mus, check: bool = False) -> dict[tuple[int, ...], complex]:
    """Amplitudes ``A_P`` for all permutations, with ``A_identity = 1``.

    Built by walking adjacent transpositions out from the identity.  With
    ``check=True`` every alternative chain reaching a permutation is compared
    against the stored value.
    """
    f = len(mus)
    ident = tuple(range(f))
    amps = {ident: 1.0 + 0j}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for a in range(f - 1):
                q = list(p)
                q[a], q[a + 1] = q[a + 1], q[a]
                q = tuple(q)
                # p holds (j, k) at positions a, a+1 and q holds (k, j)
                j, k = p[a], p[a + 1]
                val = amps[p] / scattering_g(mus[j], mus[k])
                if q not in amps:
                    amps[q] = val
                    nxt.append(q)
                elif check and not np.isclose(amps[q], val, rtol=1e-9, atol=1e-12):
                    raise ArithmeticError(f"inconsistent transposition chains at {q}")
        frontier = nxt
    return amps


def _sector_sites(basis: ConstrainedBasis, f: int) -> tuple[slice, np.ndarray]:
    s = basis.sector(f)
    occ = basis.occupations()[s]
    sites = np.nonzero(occ)[1].reshape(-1, f) + 1 if f else np.zeros((s.stop - s.start, 0), int)
    return s, sites


def build_bethe_state(mus, basis: ConstrainedBasis, normalize: bool = True) -> np.ndarray:
    """Bethe wavefunction on ``basis``.

    Raises ``ValueError`` if the norm vanishes (coinciding generic
    parameters, or an otherwise inadmissible set).
    """
    mus = np.asarray(mus, dtype=complex)
    f = len(mus)
    if f > basis.n_sites // 2:
        raise ValueError(f"f={f} exceeds the blockade maximum {basis.n_sites // 2}")
    if f > MAX_PERMUTATION_FERMIONS:
        raise OverflowError(f"permutation sum capped at f <= {MAX_PERMUTATION_FERMIONS}")
    s, sites = _sector_sites(basis, f)
    amps = permutation_amplitudes(mus)
    phi = np.zeros(len(sites), dtype=complex)
    for perm, a in amps.items():
        # mu_{P_a}^{i_a} for every configuration at once
        phi += a * np.prod(mus[list(perm)][None, :] ** sites, axis=1)
    vec = np.zeros(basis.dim, dtype=complex)
    # creation string in increasing site order is the canonical Fock order
    vec[s] = phi
    norm = np.linalg.norm(vec)
    if norm < 1e-12 * max(1.0, len(amps)):
        raise ValueError("Bethe wavefunction vanishes for these parameters")
    return vec / norm if normalize else vec


@dataclass(frozen=True)
class BetheSolution:
    mus: tuple[complex, ...]
    n_sites: int
    fermion_number: int
    momentum_phase: complex
    energy: float
    residual_norm: float
    family: str = ""

    @property
    def momentum(self) -> float:
        """Momentum ``p`` in (-pi, pi]."""
        p = float(np.angle(self.momentum_phase))
        return np.pi if np.isclose(p, -np.pi) else p

    @property
    def verified(self) -> bool:
        return self.residual_norm <= RESIDUAL_TOL


@dataclass(frozen=True)
class Inadmissible:
    """A parameter family that fails its admissibility condition."""

    n_sites: int
    fermion_number: int
    reason: str
    mismatch: float = field(default=float("nan"))

    def __bool__(self) -> bool:
        return False


def make_solution(mus, n_sites: int, family: str = "") -> BetheSolution:
    mus = tuple(complex(m) for m in mus)
    return BetheSolution(
        mus=mus,
        n_sites=int(n_sites),
        fermion_number=len(mus),
        momentum_phase=complex(np.prod(mus)) if mus else 1 + 0j,
        energy=bethe_energy(mus, n_sites),
        residual_norm=bethe_residuals(mus, n_sites),
        family=family,
    )


def _branch_value(branch) -> complex:
    if branch in ("+", 1, "+1", "plus"):
        return OMEGA
    if branch in ("-", -1, "-1", "minus"):
        return OMEGA.conjugate()
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def special_solution(n_sites: int, f: int, branch="+") -> BetheSolution | Inadmissible:
    """All ``mu_j = exp(+-i pi/3)``; admissible iff ``exp(+-i pi N/3) = (-1)^(f-1)``."""
    if n_sites < 3:
        raise ValueError(f"N must be >= 3, got {n_sites}")
    if not 1 <= f <= n_sites // 2:
        raise ValueError(f"f={f} outside 1..{n_sites // 2}")
    w = _branch_value(branch)
    mismatch = abs(w**n_sites - (-1) ** (f - 1))
    if mismatch > RESIDUAL_TOL:
        return Inadmissible(n_sites, f, "parity condition exp(+-i pi N/3) = (-1)^(f-1) fails", mismatch)
    return make_solution([w] * f, n_sites, family=f"special{'+' if w == OMEGA else '-'}")


def dress_solution(
    base: BetheSolution, n_plus: int, n_minus: int, tol: float = RESIDUAL_TOL
) -> BetheSolution | Inadmissible:
    """Append ``n_plus`` copies of exp(i pi/3) and ``n_minus`` of exp(-i pi/3).

    The result lives on ``N + n_plus + n_minus`` sites.  Each appended
    species brings one condition on the base momentum ``p``; a condition is
    only imposed when its species is present.
    """
    if base.residual_norm > tol:
        raise ValueError(f"base residual {base.residual_norm:.3g} exceeds tol {tol:.3g}")
    if n_plus < 0 or n_minus < 0 or n_plus + n_minus == 0:
        raise ValueError("need n_plus, n_minus >= 0, not both zero")
    n = base.n_sites
    eip = base.momentum_phase
    checks = []
    if n_plus:
        lhs = np.exp(1j * np.pi * (n + n_plus) / 3)
        checks.append(abs(lhs - (-1) ** (n_plus - 1) / eip))
    if n_minus:
        lhs = np.exp(-1j * np.pi * (n + n_minus) / 3)
        checks.append(abs(lhs - (-1) ** (n_minus - 1) * eip))
    mismatch = max(checks)
    n_new = n + n_plus + n_minus
    f_new = base.fermion_number + n_plus + n_minus
    if mismatch > tol:
        return Inadmissible(n_new, f_new, "dressing condition fails", mismatch)
    if f_new > n_new // 2:
        return Inadmissible(n_new, f_new, "too many fermions for the enlarged ring")
    mus = list(base.mus) + [OMEGA] * n_plus + [OMEGA.conjugate()] * n_minus
    sol = make_solution(mus, n_new, family=f"dressed({base.family},{n_plus},{n_minus})")
    if sol.residual_norm > tol:
        return Inadmissible(n_new, f_new, "Bethe residual after dressing", sol.residual_norm)
    return sol


def append_unity(sol: BetheSolution) -> BetheSolution:
    """Add ``mu = 1``: the superpartner with one more fermion."""
    if any(abs(m - 1) < _SPECIAL_TOL for m in sol.mus):
        raise ValueError("solution already contains mu = 1")
    return make_solution(list(sol.mus) + [1.0], sol.n_sites, family=f"{sol.family}+1")


def single_fermion_solutions(n_sites: int) -> list[BetheSolution]:
    """``mu = exp(2 pi i n / N)`` for ``n = 0..N-1``."""
    out = []
    for n in range(n_sites):
        mu = np.exp(2j * np.pi * n / n_sites)
        sol = make_solution([mu], n_sites, family=f"single(n={n})")
        # mu^N = 1 holds by construction; rounding is not a residual
        out.append(replace(sol, residual_norm=0.0))
    return out


def inversion_partner(sol: BetheSolution) -> BetheSolution:
    """The solution with inverted parameters (momentum ``-p``)."""
    partner = make_solution([1 / m for m in sol.mus], sol.n_sites, family=f"inv({sol.family})")
    if sol.verified and not partner.verified:
        raise ArithmeticError(f"partner residual {partner.residual_norm:.3g}")
    return partner


def _apply_inversion(vec: np.ndarray, basis: ConstrainedBasis) -> np.ndarray:
    out = np.zeros_like(vec)
    for k in np.nonzero(vec)[0]:
        st = BasisState(int(basis.states[k]), basis.n_sites)
        out[basis.index(spatial_invert(st).bits)] = inversion_sign(st) * vec[k]
    return out


def inversion_combinations(
    sol: BetheSolution, basis: ConstrainedBasis
) -> tuple[np.ndarray, np.ndarray]:
    """Inversion-even and -odd combinations of ``sol`` and its partner.

    The relative phase between the two (separately normalized) Bethe states
    is fixed by ``<partner|I|sol>``; the function checks that the inverted
    state is parallel to the partner.
    """
    psi = build_bethe_state(sol.mus, basis)
    partner = build_bethe_state(inversion_partner(sol).mus, basis)
    inv = _apply_inversion(psi, basis)
    phase = np.vdot(partner, inv)
    if abs(abs(phase) - 1) > 1e-8:
        raise ArithmeticError(f"inverted state not parallel to partner (|overlap|={abs(phase):.3g})")
    even = psi + phase * partner
    odd = psi - phase * partner
    out = []
    for v in (even, odd):
        n = np.linalg.norm(v)
        out.append(v / n if n > 1e-12 else v)
    return out[0], out[1]


def solution_to_json(sol: BetheSolution) -> str:
    return json.dumps(
        {
            "N": sol.n_sites,
            "f": sol.fermion_number,
            "mus": [[m.real, m.imag] for m in sol.mus],
            "energy": sol.energy,
            "momentum_phase": [sol.momentum_phase.real, sol.momentum_phase.imag],
            "residual": sol.residual_norm,
        },
        indent=2,
    )


def solution_from_json(text: str) -> BetheSolution:
    """Parse a solution; energy and residual are recomputed, not trusted."""
    d = json.loads(text)
    try:
        n = int(d["N"])
        mus = [complex(re, im) for re, im in d["mus"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed Bethe solution: {exc}") from exc
    if "f" in d and int(d["f"]) != len(mus):
        raise ValueError(f"f={d['f']} but {len(mus)} parameters given")
    return make_solution(mus, n, family="file")
