import numpy as np
import pytest

from frozencoh.coherence import (
    CoherenceResult,
    DistanceKind,
    MinimizerOptions,
    c_d,
    c_d_m3_restricted,
    c_l1,
    c_re,
    c_tr_m3,
    diagonal_part,
    distance,
    incoherent_state,
    is_incoherent,
    trace_distance_to_z_family,
)
from frozencoh.densmat import bloch_to_density, random_bloch, random_density, trace_distance
from frozencoh.m3 import M3Triple, freezing_triple, m3_state

from .conftest import random_triple
from .properties import MEASURES, c1_violation, c2a_violation, c3_violation, random_incoherent

PLUS = 0.5 * np.ones((2, 2), dtype=complex)
SEPARABLE = M3Triple(0.25, -1 / 16, 0.25)
# (|00> + |01> + |10>)/sqrt(3): maximally coherent on three levels, C_Tr = 1 - 1/3
W3 = np.outer([1, 1, 1, 0], [1, 1, 1, 0]).astype(complex) / 3



def test_distance_kind_parse():
    assert DistanceKind.parse("tr") is DistanceKind.TRACE
    assert DistanceKind.parse("re") is DistanceKind.RELATIVE_ENTROPY
    assert DistanceKind.parse(DistanceKind.BURES) is DistanceKind.BURES
    with pytest.raises(ValueError):
        DistanceKind.parse("hellinger")


def test_l1_examples():
    assert c_l1(np.eye(4) / 4) == 0
    assert c_l1(PLUS) == pytest.approx(1.0)
    assert c_l1(m3_state(SEPARABLE)) == pytest.approx(0.25, abs=1e-15)


def test_re_examples():
    assert c_re(np.diag([0.3, 0.7])) == pytest.approx(0.0, abs=1e-15)
    assert c_re(PLUS) == pytest.approx(1.0)
    c1, c2, c3 = SEPARABLE.c
    lam = np.array(
        [1 + c1 - c2 + c3, 1 - c1 + c2 + c3, 1 + c1 + c2 - c3, 1 - c1 - c2 - c3]
    ) / 4
    diag = np.array([1 + c3, 1 + c3, 1 - c3, 1 - c3]) / 4
    expected = -np.sum(diag * np.log2(diag)) + np.sum(lam * np.log2(lam))
    assert c_re(m3_state(SEPARABLE)) == pytest.approx(expected, abs=1e-12)


def test_c_tr_m3_examples():
    assert c_tr_m3(M3Triple(0, 0, 0.7)) == 0
    assert c_tr_m3(SEPARABLE) == pytest.approx(0.125, abs=1e-15)
    with pytest.raises(ValueError):
        c_tr_m3(M3Triple(0, 0, 0.1, 4))


def test_z_family_closed_form_matches_brute_force(rng):
    from frozencoh.m3 import z_family_state

    for _ in range(200):
        t = random_triple(rng)
        s = rng.uniform(-1, 1)
        brute = trace_distance(m3_state(t), z_family_state(s, 2))
        assert trace_distance_to_z_family(t, s) == pytest.approx(brute, abs=1e-14)


def test_c_tr_m3_matches_optimizer(rng):
    for _ in range(100):
        t = random_triple(rng)
        assert c_d(m3_state(t), "trace").value == pytest.approx(c_tr_m3(t), abs=1e-6)


def test_c_tr_m3_is_half_l1(rng):
    for _ in range(500):
        t = random_triple(rng)
        assert abs(c_tr_m3(t) - c_l1(m3_state(t)) / 2) <= 1e-9


def test_single_qubit_trace_coherence_is_half_l1(rng):
    for _ in range(500):
        rho = bloch_to_density(random_bloch(rng))
        assert abs(c_d(rho, "trace").value - c_l1(rho) / 2) <= 1e-6


def test_general_two_qubit_counterexample():
    value = c_d(W3, "trace").value
    assert value == pytest.approx(2 / 3, abs=1e-6)
    assert c_l1(W3) / 2 - value > 1e-3


def test_c_d_examples(rng):
    delta = random_incoherent(4, rng)
    for d in DistanceKind:
        res = c_d(delta, d)
        assert res.value == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(res.minimizer, np.diag(delta).real, atol=1e-6)
    res = c_d(m3_state(SEPARABLE), "trace")
    assert res.value == pytest.approx(0.125, abs=1e-6)
    assert res.method == "optimizer" and res.converged


def test_bures_minimizer_is_z_family():
    t = freezing_triple(0.5, 0.3)
    res = c_d(m3_state(t), "bures")
    p = res.minimizer
    # diag of 2^-N (I + c3 ZZ) is ((1+c3), (1-c3), (1-c3), (1+c3)) / 4
    assert np.allclose(p, np.array([1.3, 0.7, 0.7, 1.3]) / 4, atol=1e-4)


def test_relative_entropy_short_circuit(rng):
    rho = random_density(4, rng)
    res = c_d(rho, "re")
    assert res.method == "closed_form"
    assert res.value == pytest.approx(c_re(rho), abs=1e-15)
    assert res.value == pytest.approx(distance("re", rho, diagonal_part(rho)), abs=1e-12)


def test_c_d_is_deterministic(rng):
    rho = random_density(4, rng)
    a = c_d(rho, "bures", MinimizerOptions(seed=5))
    b = c_d(rho, "bures", MinimizerOptions(seed=5))
    assert a.value == b.value
    assert np.array_equal(a.minimizer, b.minimizer)


def test_c_d_rejects_large_dimension():
    with pytest.raises(ValueError):
        c_d(np.eye(32) / 32, "trace")


def test_optimizer_soundness(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        rho = random_density(2**n, rng, rank=int(rng.integers(1, 2**n + 1)))
        for d in ("trace", "bures"):
            res = c_d(rho, d)
            assert isinstance(res, CoherenceResult)
            assert res.value <= distance(d, rho, diagonal_part(rho)) + 1e-9
            assert res.value <= distance(d, rho, incoherent_state(res.minimizer)) + 1e-9


def test_restricted_examples():
    for d in DistanceKind:
        res = c_d_m3_restricted(M3Triple(0, 0, 0.6), d)
        assert res.value == pytest.approx(0.0, abs=1e-9)
        assert res.details["s"] == pytest.approx(0.6)
    t = M3Triple(0.3, -0.1, 0.5)
    assert c_d_m3_restricted(t, "trace").value == pytest.approx(c_tr_m3(t), abs=1e-12)
    t4 = freezing_triple(0.4, 0.5, 4)
    expected = distance("bures", m3_state(M3Triple(0.4, 0, 0, 4)), np.eye(16) / 16)
    assert c_d_m3_restricted(t4, "bures").value == pytest.approx(expected, abs=1e-8)
    with pytest.raises(ValueError):
        c_d_m3_restricted(M3Triple(0, 0, 0.1, 3), "trace")


def test_is_incoherent_examples():
    assert is_incoherent(np.eye(8) / 8)
    assert not is_incoherent(PLUS)
    assert is_incoherent(m3_state(M3Triple(0, 0, 0.7)))


# C1, C2a and C3 over 300 instances each


@pytest.mark.parametrize("name", list(MEASURES))
def test_c1_nonnegative_and_zero_on_incoherent(rng, name):
    assert c1_violation(MEASURES[name], rng) <= 0


@pytest.mark.parametrize("name", list(MEASURES))
def test_c2a_monotone_under_incoherent_channels(rng, name):
    assert c2a_violation(MEASURES[name], rng) <= 0


@pytest.mark.parametrize("name", list(MEASURES))
def test_c3_convex(rng, name):
    assert c3_violation(MEASURES[name], rng) <= 0
