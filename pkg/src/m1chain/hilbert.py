"""Blockade-constrained fermionic Fock space on a ring.

A basis state is stored as an integer bitmask: site ``i`` (1-based) is
occupied iff bit ``i - 1`` is set.  Fock states are built by applying
creation operators in increasing site order to the vacuum, so the
Jordan-Wigner string of ``c_i`` counts the occupied sites ``j < i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAX_SITES",
    "BasisState",
    "ConstrainedBasis",
    "enumerate_basis",
    "is_valid",
    "fermion_sign",
    "translate",
    "translation_sign",
    "spatial_invert",
    "inversion_sign",
    "occupied_sites",
    "from_sites",
    "z2_state",
]

MAX_SITES = 32


def _check_n_sites(n_sites: int) -> int:
    n_sites = int(n_sites)
    if n_sites < 3:
        raise ValueError(f"ring needs at least 3 sites, got N={n_sites}")
    if n_sites > MAX_SITES:
        raise ValueError(f"N={n_sites} exceeds the {MAX_SITES}-site word limit")
    return n_sites


def _full_mask(n_sites: int) -> int:
    return (1 << n_sites) - 1


def _rotl(bits: int, shift: int, n_sites: int) -> int:
    shift %= n_sites
    mask = _full_mask(n_sites)
    return ((bits << shift) | (bits >> (n_sites - shift))) & mask


def is_valid(bits: int, n_sites: int) -> bool:
    """True if no two cyclically adjacent sites are occupied."""
    if bits < 0 or bits >> n_sites:
        return False
    return bits & _rotl(bits, 1, n_sites) == 0


@dataclass(frozen=True)
class BasisState:
    """A single occupation pattern on an ``n_sites`` ring."""

    bits: int
    n_sites: int

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        if not is_valid(self.bits, self.n_sites):
            raise ValueError(
                f"{self.bits:0{self.n_sites}b} violates the blockade on N={self.n_sites}"
            )

    @classmethod
    def from_string(cls, s: str) -> "BasisState":
        """Parse ``'1010'`` where the first character is site 1."""
        return cls(from_sites([i + 1 for i, ch in enumerate(s) if ch == "1"]), len(s))

    @property
    def fermion_number(self) -> int:
        return self.bits.bit_count()

    @property
    def sites(self) -> list[int]:
        return occupied_sites(self.bits, self.n_sites)

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.n_sites))


def occupied_sites(bits: int, n_sites: int) -> list[int]:
    """Occupied sites in increasing order, 1-based."""
    return [i + 1 for i in range(n_sites) if bits >> i & 1]


def from_sites(sites) -> int:
    bits = 0
    for s in sites:
        bits |= 1 << (int(s) - 1)
    return bits


def z2_state(n_sites: int) -> int:
    """Bitmask of ``c_2^dag c_4^dag ... c_N^dag |0>`` (even N only)."""
    n_sites = _check_n_sites(n_sites)
    if n_sites % 2:
        raise ValueError(f"Z2 state needs an even ring, got N={n_sites}")
    return from_sites(range(2, n_sites + 1, 2))


def _popcount(arr: np.ndarray) -> np.ndarray:
    arr = arr.astype(np.uint64)
    out = np.zeros(arr.shape, dtype=np.int64)
    for b in range(MAX_SITES):
        out += ((arr >> np.uint64(b)) & np.uint64(1)).astype(np.int64)
    return out


def _open_chain_strings(n: int) -> np.ndarray:
    # strings of length n without adjacent ones, built site by site
    prev2 = np.array([0], dtype=np.uint64)
    prev1 = np.array([0, 1], dtype=np.uint64)
    if n == 1:
        return prev1
    for k in range(2, n + 1):
        top = np.uint64(1) << np.uint64(k - 1)
        cur = np.concatenate([prev1, prev2 | top])
        prev2, prev1 = prev1, cur
    return prev1


@dataclass(frozen=True)
class ConstrainedBasis:
    """All blockade-respecting states of an ``n_sites`` ring, sector-major.

    ``states`` is sorted by fermion number, then by bitmask value, and
    ``sector_offsets[f]:sector_offsets[f + 1]`` is the index range of sector
    ``f``.
    """

    n_sites: int
    states: np.ndarray
    fermion_numbers: np.ndarray
    sector_offsets: np.ndarray
    _sorted_bits: np.ndarray = field(repr=False)
    _sorted_pos: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def max_fermions(self) -> int:
        return len(self.sector_offsets) - 2

    def __len__(self) -> int:
        return self.dim

    def sector(self, f: int) -> slice:
        if not 0 <= f <= self.max_fermions:
            return slice(0, 0)
        return slice(int(self.sector_offsets[f]), int(self.sector_offsets[f + 1]))

    def sector_dim(self, f: int) -> int:
        s = self.sector(f)
        return s.stop - s.start

    def index(self, bits) -> int | np.ndarray:
        """Position of one bitmask (or an array of them); -1 if absent."""
        scalar = np.ndim(bits) == 0
        b = np.atleast_1d(np.asarray(bits, dtype=np.uint64))
        pos = np.searchsorted(self._sorted_bits, b)
        pos = np.minimum(pos, len(self._sorted_bits) - 1)
        found = self._sorted_bits[pos] == b
        out = np.where(found, self._sorted_pos[pos], -1)
        return int(out[0]) if scalar else out

    def state(self, k: int) -> BasisState:
        return BasisState(int(self.states[k]), self.n_sites)

    def basis_vector(self, bits: int) -> np.ndarray:
        k = self.index(bits)
        if k < 0:
            raise ValueError(f"state {bits:#b} is not in the basis")
        v = np.zeros(self.dim, dtype=complex)
        v[k] = 1.0
        return v

    def occupations(self) -> np.ndarray:
        """``(dim, n_sites)`` 0/1 array, column ``i`` is site ``i + 1``."""
        s = self.states[:, None]
        return ((s >> np.arange(self.n_sites, dtype=np.uint64)) & np.uint64(1)).astype(np.int8)


def enumerate_basis(n_sites: int) -> ConstrainedBasis:
    """Enumerate the constrained Fock space of an ``n_sites`` ring."""
    n_sites = _check_n_sites(n_sites)
    chain = _open_chain_strings(n_sites)
    last = np.uint64(1) << np.uint64(n_sites - 1)
    ring = chain[~(((chain & np.uint64(1)) != 0) & ((chain & last) != 0))]
    nf = _popcount(ring)
    order = np.lexsort((ring, nf))
    states = ring[order]
    nf = nf[order]
    counts = np.bincount(nf, minlength=n_sites // 2 + 1)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    by_value = np.argsort(states, kind="stable")
    for arr in (states, nf, offsets):
        arr.setflags(write=False)
    return ConstrainedBasis(
        n_sites=n_sites,
        states=states,
        fermion_numbers=nf,
        sector_offsets=offsets,
        _sorted_bits=states[by_value],
        _sorted_pos=by_value.astype(np.int64),
    )


def _site_check(site: int, n_sites: int) -> None:
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")


def fermion_sign(state: BasisState | int, site: int, n_sites: int | None = None) -> int:
    """Jordan-Wigner sign for ``c_site`` or ``c_site^dag`` acting on ``state``.

    Returns ``(-1)**(number of occupied sites j < site)``.
    """
    if isinstance(state, BasisState):
        bits, n_sites = state.bits, state.n_sites
    else:
        bits = int(state)
        if n_sites is None:
            raise TypeError("n_sites is required for a raw bitmask")
    _site_check(site, n_sites)
    below = bits & ((1 << (site - 1)) - 1)
    return -1 if below.bit_count() % 2 else 1


def translate(state: BasisState, shift: int) -> BasisState:
    """Cyclic shift: an occupation at site ``i`` moves to ``i + shift``."""
    return BasisState(_rotl(state.bits, shift, state.n_sites), state.n_sites)


def translation_sign(state: BasisState, shift: int) -> int:
    """Sign picked up by the fermionic translation ``c_i -> c_{i+shift}``.

    Reordering the shifted creation string back to increasing site order
    moves every wrapped fermion past all non-wrapped ones.
    """
    n = state.n_sites
    shift %= n
    if shift == 0:
        return 1
    sites = state.sites
    wrapped = sum(1 for s in sites if s + shift > n)
    return -1 if (wrapped * (len(sites) - wrapped)) % 2 else 1


def spatial_invert(state: BasisState) -> BasisState:
    """Reflect site ``i`` to ``N + 1 - i``."""
    n = state.n_sites
    return BasisState(from_sites(n + 1 - s for s in state.sites), n)


def inversion_sign(state: BasisState) -> int:
    """Sign from reversing the creation string under ``c_i -> c_{N+1-i}``."""
    f = state.fermion_number
    return -1 if (f * (f - 1) // 2) % 2 else 1
