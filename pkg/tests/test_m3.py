import math

import numpy as np
import pytest

from frozencoh import channels as ch
from frozencoh.densmat import InvalidStateError, eig_hermitian, partial_trace, pauli_string, random_density
from frozencoh.m3 import (
    M3Triple,
    StandardFormState,
    evolve_triple,
    freezing_triple,
    is_frozen_family,
    is_ppt_separable,
    is_valid_triple,
    l1_freezing_predicate,
    local_unitary,
    m3_eigensystem,
    m3_state,
    pair_flip_unitary,
    standard_form_state,
    threshold_q_star,
    triple_from_density,
    v_unitary,
)

from .conftest import random_triple

SEPARABLE = M3Triple(0.25, -1 / 16, 0.25)


def test_m3_state_examples():
    assert np.allclose(m3_state(M3Triple(0, 0, 0)), np.eye(4) / 4)
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(m3_state(M3Triple(1, -1, 1)), np.outer(phi, phi))
    rho = m3_state(SEPARABLE)
    assert np.allclose(np.diag(rho).real, [1.25 / 4, 0.75 / 4, 0.75 / 4, 1.25 / 4])


def test_invalid_triples_rejected():
    assert not is_valid_triple(1, 1, 1)
    with pytest.raises(InvalidStateError):
        M3Triple(1, 1, 1)
    with pytest.raises(InvalidStateError):
        M3Triple(1.5, 0, 0)
    with pytest.raises(ValueError):
        M3Triple(0, 0, 0, n=7)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_marginals_are_maximally_mixed(rng, n):
    for _ in range(20):
        rho = m3_state(random_triple(rng, n))
        for k in range(1, n):
            for keep in (list(range(k)), list(range(n - k, n))):
                red = partial_trace(rho, keep, n)
                assert np.max(np.abs(red - np.eye(2**k) / 2**k)) <= 1e-12


@pytest.mark.parametrize("n", [2, 4])
def test_eigensystem_matches_numeric(rng, n):
    for _ in range(200):
        t = random_triple(rng, n)
        rho = m3_state(t)
        pairs = m3_eigensystem(t)
        w, _ = eig_hermitian(rho)
        assert np.max(np.abs(np.sort([e.value for e in pairs]) - w)) <= 1e-10
        for e in pairs:
            assert np.max(np.abs(rho @ e.vector - e.value * e.vector)) <= 1e-10


@pytest.mark.parametrize("n", [2, 4])
def test_eigenvector_parity(n):
    pi3 = pauli_string([3] * n)
    for e in m3_eigensystem(M3Triple(0.1, 0.2, 0.3, n)):
        assert np.allclose(pi3 @ e.vector, (-1) ** e.parity * e.vector, atol=1e-14)


def test_eigensystem_examples():
    assert all(e.value == pytest.approx(1 / 16) for e in m3_eigensystem(M3Triple(0, 0, 0, 4)))
    c1, c2, c3 = 0.5, -0.1, 0.2
    got = sorted(e.value for e in m3_eigensystem(M3Triple(c1, c2, c3)))
    want = sorted(
        [(1 + c1 - c2 + c3) / 4, (1 - c1 + c2 + c3) / 4, (1 + c1 + c2 - c3) / 4, (1 - c1 - c2 - c3) / 4]
    )
    assert np.allclose(got, want, atol=1e-15)
    with pytest.raises(ValueError):
        m3_eigensystem(M3Triple(0, 0, 0, 3))


@pytest.mark.parametrize("n", [2, 4])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_evolve_matches_kraus(rng, n, k):
    t = random_triple(rng, n)
    for q in np.linspace(0, 1, 11):
        lifted = ch.lift_local(ch.flip_channel(k, q), n)
        assert np.max(np.abs(lifted(m3_state(t)) - m3_state(evolve_triple(t, k, q)))) <= 1e-10


def test_evolve_examples(rng):
    t = random_triple(rng)
    assert evolve_triple(t, 1, 0) == t
    t4 = M3Triple(0.2, 0.1, 0.3, 4)
    assert np.allclose(evolve_triple(t4, 1, 0.5).c, [0.2, 0.1 / 16, 0.3 / 16])
    with pytest.raises(ValueError):
        evolve_triple(t, 4, 0.5)


@pytest.mark.parametrize("n", [2, 4])
def test_v_unitary_swaps_c1_c3(rng, n):
    v = local_unitary(v_unitary(), n)
    for _ in range(20):
        t = random_triple(rng, n)
        out = triple_from_density(v @ m3_state(t) @ v.conj().T)
        assert np.allclose(out.c, [t.c3, t.c2, t.c1], atol=1e-12)


def test_pair_flip_leaves_m3_invariant(rng):
    for n in (2, 4):
        rho = m3_state(random_triple(rng, n))
        for j in range(1, n):
            u = pair_flip_unitary(j, n)
            assert np.max(np.abs(u @ rho @ u.conj().T - rho)) <= 1e-12


def test_freezing_triple_examples():
    assert freezing_triple(0.25, 0.25).c == (0.25, -1 / 16, 0.25)
    assert freezing_triple(0.25, 0.25, 4).c == (0.25, 1 / 16, 0.25)
    assert freezing_triple(0, 0.7).c == (0, 0, 0.7)
    with pytest.raises(ValueError):
        freezing_triple(0.25, 0.25, 3)
    assert freezing_triple(0.25, 0.25, 3, allow_odd=True).c2 == pytest.approx(-1 / 16)


def test_frozen_family_is_closed_under_bit_flip(rng):
    for n in (2, 4):
        t = freezing_triple(0.3, -0.6, n)
        assert is_frozen_family(t)
        for q in np.linspace(0, 1, 11):
            assert is_frozen_family(evolve_triple(t, 1, q))
    assert not is_frozen_family((0.5, 0.5, 0.5), n=2)
    assert not is_valid_triple(0.5, 0.5, 0.5)


def test_threshold_against_grid_scan():
    t = freezing_triple(0.3, 0.9)
    q_star = threshold_q_star(t)
    assert q_star == pytest.approx(1 - math.sqrt(1 / 3), abs=1e-12)
    qs = np.linspace(0, 1, 1_000_001)
    holds = 0.9 * (1 - qs) ** 2 >= 0.3
    assert abs(qs[holds][-1] - q_star) <= 1e-6
    assert threshold_q_star(M3Triple(0.4, 0, 0.4)) == 0.0
    assert threshold_q_star(M3Triple(0, 0, 0.4)) == 1.0
    assert threshold_q_star(M3Triple(0.4, 0, 0)) == 0.0


def test_standard_form_examples():
    assert np.allclose(standard_form_state(StandardFormState()), np.eye(4) / 4)
    assert np.allclose(
        standard_form_state(StandardFormState(t=SEPARABLE.c)), m3_state(SEPARABLE)
    )
    rho = standard_form_state(StandardFormState(x=(0, 0, 0.2), t=(0.3, 0.15, 0)))
    assert np.linalg.eigvalsh(rho)[0] >= 0
    with pytest.raises(InvalidStateError):
        standard_form_state(StandardFormState(t=(1, 1, 1)))


def test_l1_freezing_predicate():
    assert l1_freezing_predicate(StandardFormState(t=SEPARABLE.c))
    assert not l1_freezing_predicate(StandardFormState(x=(0, 0.1, 0), t=(0.3, 0, 0)))
    assert not l1_freezing_predicate(StandardFormState(t=(0.2, 0.3, 0)))


def test_ppt_examples():
    assert is_ppt_separable(np.eye(4) / 4)
    assert not is_ppt_separable(m3_state(M3Triple(1, -1, 1)))
    for q in np.linspace(0, 1, 101):
        assert is_ppt_separable(m3_state(evolve_triple(SEPARABLE, 1, q)))
    with pytest.raises(ValueError):
        is_ppt_separable(np.eye(2) / 2)


def test_triple_from_density_rejects_non_m3(rng):
    assert triple_from_density(random_density(4, rng)) is None
    assert triple_from_density(m3_state(SEPARABLE)) == SEPARABLE
