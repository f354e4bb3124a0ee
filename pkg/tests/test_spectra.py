import json

import numpy as np
import pytest

from m1chain.bethe import build_bethe_state, single_fermion_solutions
from m1chain.operators import build_pxp
from m1chain.spectra import (
    DoubletBlock,
    SusyConsistencyError,
    classify_susy,
    diagonalize,
    doublet_hamiltonian,
    doublet_pxp_levels,
    entanglement_entropy,
    entropy_over_cuts,
    format_integer_table,
    integer_eigenvalue_table,
    schmidt_values,
)
from conftest import basis, m1, m1_classified, m1_spectrum, supercharge
from oracles import rank_mod_p, von_neumann_from_rdm


def test_full_spectrum_and_residuals():
    s = m1_spectrum(10)
    assert len(s) == basis(10).dim
    assert s.residual_norms.max() < 1e-12
    ref = np.linalg.eigvalsh(m1(10).toarray())
    assert np.allclose(np.sort(s.eigenvalues), ref, atol=1e-11)


def test_sector_restriction():
    s = diagonalize(m1(9), sector=3)
    assert set(s.sectors) == {3}
    assert len(s) == basis(9).sector_dim(3)


def test_sparse_path_agrees_with_dense():
    H = m1(14)
    sp = diagonalize(H, sector=4, dense_threshold=10, k=5)
    dn = diagonalize(H, sector=4)
    assert np.allclose(sp.eigenvalues, dn.eigenvalues[:5], atol=1e-9)


def test_pxp_mixes_sectors():
    s = diagonalize(build_pxp(basis(8), 0.4))
    assert np.all(s.sectors == -1)
    with pytest.raises(ValueError):
        diagonalize(build_pxp(basis(8), 0.4), sector=1)


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        diagonalize(supercharge(6))


def test_spectrum_json():
    doc = json.loads(m1_spectrum(6).to_json(mu=0))
    assert doc["N"] == 6 and doc["mu"] == 0
    assert sum(len(v["eigenvalues"]) for v in doc["sectors"].values()) == basis(6).dim


@pytest.mark.parametrize("n", [7, 8, 9])
def test_integer_table_against_exact_rank(n):
    # multiplicity of integer E in sector f = nullity of (H_f - E) over the integers
    table = integer_eigenvalue_table(m1_spectrum(n))
    H = m1(n)
    for f in range(basis(n).max_fermions + 1):
        blk = np.rint(H.sector_block(f).toarray().real).astype(np.int64)
        d = blk.shape[0]
        got = {lv.energy: lv.multiplicity for lv in table.get(f, [])}
        for e in range(0, 2 * n + 1):
            nullity = d - rank_mod_p(blk - e * np.eye(d, dtype=np.int64))
            assert got.get(e, 0) == nullity, (f, e)


def test_format_integer_table():
    txt = format_integer_table(integer_eigenvalue_table(m1_spectrum(6)))
    assert txt.splitlines()[0].startswith("f | E")
    assert "(x " in txt


@pytest.mark.parametrize("n", [8, 10])
def test_susy_classification(n):
    cls = m1_classified(n)
    spec = cls.spectrum
    Q = supercharge(n).matrix
    assert len(cls.singlets) + 2 * len(cls.doublets) == basis(n).dim
    for lo, hi, E in cls.doublets:
        assert spec.sectors[hi] == spec.sectors[lo] + 1
        v_lo, v_hi = spec.eigenvectors[:, lo], spec.eigenvectors[:, hi]
        assert np.linalg.norm(Q.conj().T @ v_lo - np.sqrt(E) * v_hi) < 1e-9
        assert np.linalg.norm(Q @ v_hi - np.sqrt(E) * v_lo) < 1e-9
        assert np.linalg.norm(Q @ v_lo) < 1e-9
    # adapted vectors are still an orthonormal eigenbasis
    V = spec.eigenvectors
    assert np.allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-10)
    assert np.linalg.norm(m1(n).matrix @ V - V * spec.eigenvalues, axis=0).max() < 1e-10


def test_classification_counts():
    assert (len(m1_classified(10).singlets), len(m1_classified(10).doublets)) == (1, 61)
    assert (len(m1_classified(12).singlets), len(m1_classified(12).doublets)) == (2, 160)


def test_classification_needs_sectors():
    with pytest.raises(ValueError):
        classify_susy(diagonalize(build_pxp(basis(6), 0.0)), supercharge(6))


def test_classification_detects_broken_pairing():
    # a spectrum from a different operator cannot be paired by this Q
    s = m1_spectrum(8)
    bad = type(s)(s.basis, s.eigenvalues + 0.5 * s.sectors, s.eigenvectors, s.sectors, s.residual_norms)
    with pytest.raises(SusyConsistencyError):
        classify_susy(bad, supercharge(8))


@pytest.mark.parametrize("mu", [-0.6, 0.0, 0.7, 1.3])
def test_doublet_hamiltonian_eigenvalues(mu):
    for E, f in [(0.5, 1), (4.0, 3), (9.0, 6)]:
        h, ev = doublet_hamiltonian(DoubletBlock(E, f, mu))
        assert np.allclose(np.linalg.eigvalsh(h), ev, atol=1e-13)


def test_doublet_block_validation():
    with pytest.raises(ValueError):
        DoubletBlock(-1.0, 2)


@pytest.mark.parametrize("mu", [0.0, 0.35, 1.0])
def test_doublet_levels_reproduce_pxp_spectrum(mu):
    n = 10
    ref = np.linalg.eigvalsh(build_pxp(basis(n), mu).toarray())
    assert np.allclose(doublet_pxp_levels(m1_classified(n), mu), ref, atol=1e-10)


def _random_sector_state(rng, b, f):
    v = np.zeros(b.dim, dtype=complex)
    sl = b.sector(f)
    v[sl] = rng.normal(size=b.sector_dim(f)) + 1j * rng.normal(size=b.sector_dim(f))
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("n", [7, 10])
def test_entropy_against_full_fock_rdm(n, rng):
    b = basis(n)
    states = [int(s) for s in b.states]
    for f in (1, 2, 3):
        v = _random_sector_state(rng, b, f)
        for cut in [2, 3, (n - 1, 3), (4, n // 2)]:
            start, L = (1, cut) if isinstance(cut, int) else cut
            block = [((start - 1 + k) % n) for k in range(L)]
            assert abs(entanglement_entropy(v, b, cut) - von_neumann_from_rdm(v, n, block, states)) < 1e-10


def test_entropy_on_superposition_of_sectors(rng):
    n = 8
    b = basis(n)
    v = _random_sector_state(rng, b, 1) + _random_sector_state(rng, b, 3)
    v /= np.linalg.norm(v)
    block = [5, 6, 7]
    assert abs(entanglement_entropy(v, b, (6, 3)) - von_neumann_from_rdm(v, n, block, [int(s) for s in b.states])) < 1e-10


def test_schmidt_values_normalized_and_validated(rng):
    b = basis(9)
    v = _random_sector_state(rng, b, 2)
    s = schmidt_values(v, b, 4)
    assert abs((s**2).sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        schmidt_values(2 * v, b, 4)
    with pytest.raises(ValueError):
        schmidt_values(v, b, 0)
    with pytest.raises(ValueError):
        schmidt_values(v[:-1], b, 3)


def test_product_state_has_zero_entropy():
    b = basis(8)
    assert entanglement_entropy(b.basis_vector(0b01010101), b, 4) < 1e-14


def test_momentum_state_entropy_is_cut_independent():
    n = 12
    b = basis(n)
    sol = single_fermion_solutions(n)[3]
    v = build_bethe_state(sol.mus, b)
    s = entropy_over_cuts(v, b, 5)
    assert np.ptp(s) < 1e-10
    # one delocalized fermion: binary entropy of 5/12
    p = 5 / 12
    assert abs(s[0] + p * np.log(p) + (1 - p) * np.log(1 - p)) < 1e-10
