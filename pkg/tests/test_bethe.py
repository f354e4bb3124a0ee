import cmath
import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from m1chain.bethe import (
    OMEGA,
    Inadmissible,
    append_unity,
    bethe_energy,
    bethe_residuals,
    build_bethe_state,
    dress_solution,
    inversion_combinations,
    inversion_partner,
    make_solution,
    permutation_amplitudes,
    scattering_g,
    single_fermion_solutions,
    solution_from_json,
    solution_to_json,
    special_solution,
)
from m1chain.hilbert import BasisState, inversion_sign, spatial_invert, translate, translation_sign
from conftest import basis, m1, supercharge
from oracles import bethe_amplitude_bruteforce


def eig_residual(n, vec, e):
    return np.linalg.norm(m1(n).matrix @ vec - e * vec)


def generic_g(a, b):
    return -(a * (a * b - a + 1)) / (b * (a * b - b + 1))


complex_unit = st.floats(0.05, 2 * np.pi - 0.05).map(lambda x: cmath.exp(1j * x))
complex_any = st.tuples(st.floats(0.3, 3), st.floats(0, 2 * np.pi)).map(lambda p: cmath.rect(*p))


@settings(max_examples=200, deadline=None)
@given(complex_any, complex_any)
def test_g_unitarity(a, b):
    assume(abs(a * b - b + 1) > 1e-3 and abs(a * b - a + 1) > 1e-3)
    assert abs(scattering_g(a, b) * scattering_g(b, a) - 1) < 1e-9


@settings(max_examples=100, deadline=None)
@given(complex_unit, st.sampled_from([OMEGA, OMEGA.conjugate()]))
def test_g_special_limits(mu, w):
    # finite-difference error grows like 1/|mu - w|
    assume(abs(mu - w) > 0.1 and abs(mu - w.conjugate()) > 0.1)
    near = w * cmath.exp(1e-7j)
    assert abs(scattering_g(w, mu) - generic_g(near, mu)) < 1e-5
    assert abs(scattering_g(mu, w) - generic_g(mu, near)) < 1e-5
    assert scattering_g(w, w) == 1


def test_g_special_values():
    assert scattering_g(OMEGA, 2.0) == pytest.approx(-0.5)
    assert scattering_g(2.0, OMEGA) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        bethe_energy([0.0], 5)


@pytest.mark.parametrize("n", [7, 10])
def test_single_fermion_family(n):
    for sol in single_fermion_solutions(n):
        k = np.angle(sol.mus[0])
        assert sol.energy == pytest.approx(n - 2 + 2 * np.cos(k), abs=1e-12)
        assert bethe_residuals(sol.mus, n) < 1e-12
        v = build_bethe_state(sol.mus, basis(n))
        assert eig_residual(n, v, sol.energy) < 1e-12


@pytest.mark.parametrize("n,f", [(12, 3), (9, 2), (12, 5)])
def test_state_matches_bruteforce_permutation_sum(n, f):
    sol = special_solution(n, f)
    b = basis(n)
    v = build_bethe_state(sol.mus, b, normalize=False)
    s = b.sector(f)
    for k in range(s.start, s.stop, 3):
        sites = BasisState(int(b.states[k]), n).sites
        assert abs(v[k] - bethe_amplitude_bruteforce(sol.mus, sites, scattering_g)) < 1e-9


def test_permutation_amplitudes_consistent():
    mus = [cmath.exp(0.3j), cmath.exp(1.9j), 1.4 * cmath.exp(-0.7j), OMEGA]
    amps = permutation_amplitudes(mus, check=True)
    assert len(amps) == 24
    assert amps[(0, 1, 2, 3)] == 1


@pytest.mark.parametrize("n,f", [(12, 1), (12, 3), (12, 5), (9, 2), (9, 4), (15, 2), (15, 4)])
@pytest.mark.parametrize("branch", ["+", "-"])
def test_special_states_are_eigenstates(n, f, branch):
    sol = special_solution(n, f, branch)
    assert sol and sol.verified
    assert sol.energy == pytest.approx(n - f, abs=1e-12)
    v = build_bethe_state(sol.mus, basis(n))
    assert eig_residual(n, v, n - f) < 1e-10


@pytest.mark.parametrize("n,f", [(12, 2), (12, 4), (9, 1), (9, 3)])
def test_parity_rule_rejects(n, f):
    sol = special_solution(n, f)
    assert isinstance(sol, Inadmissible) and not sol
    assert sol.mismatch > 1


def test_special_argument_checks():
    with pytest.raises(ValueError):
        special_solution(12, 7)
    with pytest.raises(ValueError):
        special_solution(12, 1, branch="x")


def test_translation_eigenvalue_is_momentum():
    n, f = 12, 3
    b = basis(n)
    sol = special_solution(n, f)
    v = build_bethe_state(sol.mus, b)
    tv = np.zeros_like(v)
    for k in np.nonzero(np.abs(v) > 0)[0]:
        s = BasisState(int(b.states[k]), n)
        tv[b.index(translate(s, 1).bits)] += translation_sign(s, 1) * v[k]
    # T c_i^dag T^-1 = c_{i+1}^dag sends mu^i -> mu^(i-1)
    assert np.linalg.norm(tv - np.conj(sol.momentum_phase) * v) < 1e-10
    assert sol.momentum == pytest.approx(np.angle(OMEGA**3))


@pytest.mark.parametrize("n,f", [(12, 1), (12, 3), (9, 2)])
def test_append_unity_is_superpartner(n, f):
    sol = special_solution(n, f)
    up = append_unity(sol)
    assert up.energy == pytest.approx(sol.energy, abs=1e-12)
    assert abs(up.momentum_phase - sol.momentum_phase) < 1e-12
    v = build_bethe_state(sol.mus, basis(n))
    w = build_bethe_state(up.mus, basis(n))
    qd = supercharge(n).matrix.conj().T @ v
    assert np.linalg.norm(qd) > 1e-3
    assert abs(abs(np.vdot(w, qd)) - np.linalg.norm(qd)) < 1e-10


@pytest.mark.parametrize("n,f", [(12, 5), (9, 4)])
def test_append_unity_vanishes_with_qdag_image(n, f):
    sol = special_solution(n, f)
    v = build_bethe_state(sol.mus, basis(n))
    assert np.linalg.norm(supercharge(n).matrix.conj().T @ v) < 1e-10
    up = append_unity(sol)
    with pytest.raises(ValueError):
        build_bethe_state(up.mus, basis(n))


def test_append_unity_twice_rejected():
    with pytest.raises(ValueError):
        append_unity(append_unity(special_solution(12, 1)))


def test_dressing_produces_eigenstate():
    base = single_fermion_solutions(5)[0]  # mu = 1, p = 0
    d = dress_solution(base, 1, 0)
    assert d and d.n_sites == 6 and d.fermion_number == 2
    assert d.energy == pytest.approx(5.0)
    v = build_bethe_state(d.mus, basis(6))
    assert eig_residual(6, v, d.energy) < 1e-10


def test_dressing_scan_all_admissible_are_eigenstates():
    hits = 0
    for n in range(4, 9):
        for base in single_fermion_solutions(n):
            for npl in range(3):
                for nmi in range(3):
                    if npl + nmi == 0:
                        continue
                    d = dress_solution(base, npl, nmi)
                    if not d or d.n_sites > 12:
                        continue
                    try:
                        v = build_bethe_state(d.mus, basis(d.n_sites))
                    except ValueError:
                        continue
                    assert eig_residual(d.n_sites, v, d.energy) < 1e-9
                    # each exp(+-i pi/3) adds one site, one fermion and 2 cos(pi/3) = 1
                    assert d.energy == pytest.approx(base.energy, abs=1e-9)
                    hits += 1
    assert hits > 3


def test_dressing_rejections():
    base = single_fermion_solutions(5)[0]
    assert not dress_solution(base, 0, 1) or dress_solution(base, 0, 1).verified
    bad = single_fermion_solutions(5)[1]
    assert isinstance(dress_solution(bad, 1, 0), Inadmissible)
    with pytest.raises(ValueError):
        dress_solution(base, 0, 0)
    with pytest.raises(ValueError):
        dress_solution(make_solution([0.3 + 0.1j], 5), 1, 0)


def _invert(vec, b):
    out = np.zeros_like(vec)
    for k in np.nonzero(vec)[0]:
        s = BasisState(int(b.states[k]), b.n_sites)
        out[b.index(spatial_invert(s).bits)] = inversion_sign(s) * vec[k]
    return out


def test_inversion_partner_and_combinations():
    n = 12
    b = basis(n)
    sol = special_solution(n, 3)
    partner = inversion_partner(sol)
    assert partner.verified
    assert partner.momentum_phase == pytest.approx(np.conj(sol.momentum_phase))
    even, odd = inversion_combinations(sol, b)
    for v, s in ((even, 1), (odd, -1)):
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert np.linalg.norm(_invert(v, b) - s * v) < 1e-10
        assert eig_residual(n, v, n - 3) < 1e-10


def test_json_roundtrip():
    sol = special_solution(12, 3)
    back = solution_from_json(solution_to_json(sol))
    assert back.mus == pytest.approx(sol.mus)
    assert back.energy == pytest.approx(sol.energy)
    assert back.residual_norm == pytest.approx(sol.residual_norm, abs=1e-14)


@pytest.mark.parametrize(
    "doc",
    [{"mus": [[1, 0]]}, {"N": 5, "mus": [1, 0]}, {"N": 5, "f": 2, "mus": [[1, 0]]}],
)
def test_json_malformed(doc):
    with pytest.raises(ValueError):
        solution_from_json(json.dumps(doc))


def test_perturbed_solution_not_verified():
    sol = special_solution(12, 3)
    bad = make_solution([m * cmath.exp(1e-6j) for m in sol.mus], 12)
    assert not bad.verified


def test_size_limits():
    with pytest.raises(ValueError):
        build_bethe_state([OMEGA] * 7, basis(12))
    with pytest.raises(OverflowError):
        build_bethe_state([OMEGA] * 9, basis(18))
