import json
import math

import numpy as np
import pytest

from frozencoh.dynamics import (
    SweepSpec,
    default_grid,
    evaluate_measure,
    evolve,
    format_float,
    freeze_verdict,
    measure_coincidence_report,
    no_common_freezing_scan,
    parse_triple,
    point_seed,
    random_common_freezing_scan,
    run_sweep,
    series_to_csv,
    series_to_json,
    spec_from_config,
    state_from_config,
    trivial_kind,
)
from frozencoh.m3 import M3Triple, freezing_triple, m3_state

from .conftest import random_freezing_pair

GRID = tuple(default_grid(11))


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(M3Triple(0, 0, 0), measures=("l2",))
    with pytest.raises(ValueError):
        SweepSpec(M3Triple(0, 0, 0), channel="teleport")
    with pytest.raises(ValueError):
        SweepSpec(M3Triple(0, 0, 0), grid=(0.0, 1.5))
    with pytest.raises(ValueError):
        SweepSpec(M3Triple(0, 0, 0), extra_points=-1)


def test_point_seed_depends_on_q_not_grid():
    assert point_seed(7, 0.25) == point_seed(7, 0.25)
    assert point_seed(7, 0.25) != point_seed(7, 0.5)
    assert point_seed(7, 0.25) != point_seed(8, 0.25)


def test_evolve_paths_agree(rng):
    t = freezing_triple(0.3, -0.5)
    for q in GRID:
        a, ta = evolve(t, "bit_flip", q)
        b, tb = evolve(t, "bit_flip", q, path="kraus")
        assert np.max(np.abs(a - b)) <= 1e-12
        assert np.allclose(ta.c, tb.c, atol=1e-12)


def test_freeze_verdict_statuses():
    assert freeze_verdict([1.0, 1.0 + 1e-12], 1e-9).status == "frozen"
    v = freeze_verdict([1.0, 1.1], 1e-9)
    assert not v.frozen and v.status == "not_frozen"
    assert v.max_deviation == pytest.approx(0.1)
    v = freeze_verdict([1.0, math.nan], 1e-9)
    assert not v.frozen and v.status == "indeterminate"
    with pytest.raises(ValueError):
        freeze_verdict([], 1e-9)


def test_sweep_freezes_n2(rng):
    c1, c3 = random_freezing_pair(rng)
    s = run_sweep(SweepSpec(freezing_triple(c1, c3), measures=("l1", "re", "tr", "d:trace", "d:bures"), grid=GRID))
    assert all(v.frozen for v in s.verdicts.values())
    assert s.methods["tr"] == "closed_form" and s.methods["d:bures"] == "optimizer"
    assert s.verdicts["d:trace"].tolerance == 1e-5
    assert s.extra_q.size == 20 and not s.degraded and s.trivial is None


def test_sweep_n4_uses_restricted_minimizer():
    s = run_sweep(SweepSpec(freezing_triple(0.4, 0.6, 4), measures=("tr", "d:bures", "re"), grid=GRID, extra_points=3))
    assert s.methods["tr"] == "restricted" and s.methods["d:bures"] == "restricted"
    assert all(v.frozen for v in s.verdicts.values())


def test_sweep_odd_n_not_frozen():
    s = run_sweep(SweepSpec(parse_triple([0.25, "freeze", 0.25], 3), measures=("re",), grid=GRID))
    assert s.verdicts["re"].status == "not_frozen"
    assert s.verdicts["re"].max_deviation > 1e-3


def test_sweep_non_m3_state_varies():
    s = run_sweep(SweepSpec(np.array([0.5, 0.3, 0.2]), measures=("l1",), grid=GRID, extra_points=0))
    assert not s.verdicts["l1"].frozen
    assert s.q_star is None


def test_trivial_flags():
    assert trivial_kind(M3Triple(0, 0, 0.5), "bit_flip", GRID) == "incoherent"
    assert trivial_kind(np.array([0.6, 0.0, 0.0]), "bit_flip", GRID) == "invariant"
    assert trivial_kind(np.array([0.6, 0.1, 0.0]), "bit_flip", GRID) is None


def test_sweep_is_reproducible_and_grid_independent():
    t = freezing_triple(0.2, 0.7)
    a = run_sweep(SweepSpec(t, measures=("d:bures",), grid=GRID, seed=3, extra_points=2))
    b = run_sweep(SweepSpec(t, measures=("d:bures",), grid=GRID, seed=3, extra_points=2))
    assert series_to_json(a) == series_to_json(b)
    c = run_sweep(SweepSpec(t, measures=("d:bures",), grid=GRID[:3], seed=3, extra_points=0))
    assert np.array_equal(a.values["d:bures"][:3], c.values["d:bures"])


def test_gamma_adds_time_axis():
    s = run_sweep(SweepSpec(M3Triple(0.1, 0, 0.2), grid=(0.0, 0.5), gamma=2.0, extra_points=0))
    assert s.t[1] == pytest.approx(-math.log(0.5) / 2)
    assert "t" in json.loads(series_to_json(s))


def test_csv_format():
    s = run_sweep(SweepSpec(M3Triple(0.1, 0, 0.2), measures=("l1", "re"), grid=(0.0, 1.0), extra_points=0))
    lines = series_to_csv(s).splitlines()
    assert lines[0] == "q,l1,re"
    assert all(len(line.split(",")) == 3 for line in lines)
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(math.nan) == "nan"


def test_evaluate_measure_methods():
    t = freezing_triple(0.3, 0.5)
    rho = m3_state(t)
    assert evaluate_measure("tr", rho, t).method == "closed_form"
    assert evaluate_measure("d:trace", rho, t).method == "optimizer"
    assert evaluate_measure("d:re", rho, t).value == pytest.approx(evaluate_measure("re", rho).value)
    with pytest.raises(ValueError):
        evaluate_measure("l2", rho)
    with pytest.raises(ValueError):
        evaluate_measure("tr", np.eye(32) / 32)


def test_single_qubit_common_freezing():
    r = no_common_freezing_scan([0.5, 0.0, 0.2])
    assert r.l1.frozen and not r.re.frozen and not r.nontrivial_common
    reports = random_common_freezing_scan(np.random.default_rng(1), samples=10, grid=GRID)
    assert not any(r.nontrivial_common for r in reports)
    with pytest.raises(ValueError):
        no_common_freezing_scan([0.1, 0.2])


def test_coincidence_report():
    rep = measure_coincidence_report(freezing_triple(0.3, 0.9), grid=default_grid(21))
    assert rep.regimes == {"q<=q*", "q>q*"}
    for row in rep.rows:
        assert row.values["tr"] == pytest.approx(row.values["l1"] / 2, abs=1e-12)
    with pytest.raises(ValueError):
        measure_coincidence_report(M3Triple(0.5, 0, 0.1))


def test_config_parsing():
    assert state_from_config({"m3": [0.25, "freeze", 0.25], "n": 4}).c2 == pytest.approx(1 / 16)
    assert np.allclose(state_from_config({"bloch": [0.1, 0, 0]}), [0.1, 0, 0])
    spec = spec_from_config(
        {
            "initial": {"m3": [0.2, "freeze", 0.4]},
            "channel": {"kind": "phase_flip", "gamma": 1.5},
            "measures": ["l1"],
            "grid": [0, 0.5, 1],
            "seed": 9,
        }
    )
    assert spec.channel == "phase_flip" and spec.gamma == 1.5 and spec.seed == 9
    assert tuple(spec.grid) == (0, 0.5, 1)
    with pytest.raises(ValueError):
        parse_triple([0.1, "thaw", 0.2], 2)


def test_identity_channel_keeps_every_measure_constant():
    s = run_sweep(SweepSpec(np.array([0.3, 0.4, 0.1]), "identity", ("l1", "re", "tr", "d:bures"), GRID, extra_points=2))
    assert all(v.frozen for v in s.verdicts.values())
    assert s.trivial == "invariant"


@pytest.mark.parametrize(
    "n0, trivial", [((0.0, 0.0, 0.3), "incoherent"), ((0.4, 0.0, 0.0), "invariant")]
)
def test_common_freezing_trivial_cases(n0, trivial):
    r = no_common_freezing_scan(n0, grid=GRID)
    assert r.l1.frozen and r.re.frozen
    assert r.trivial == trivial and not r.nontrivial_common
