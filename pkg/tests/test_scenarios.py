import math

import numpy as np
import pytest

from dcemirror.bo import gamma_b_eff
from dcemirror.model import ConfigError
from dcemirror.scenarios import (
    CATALOG,
    FIGURE_GROUPS,
    Scenario,
    get_scenario,
    parse_scenario,
)


def test_catalog_names_unique_and_parse():
    assert len(CATALOG) == len({s.name for s in CATALOG.values()})
    for sc in CATALOG.values():
        for case in sc.cases:
            case.params()  # must validate cleanly


def test_catalog_covers_every_figure():
    for fig, names in FIGURE_GROUPS.items():
        for name in names:
            assert name in CATALOG, f"{fig} member {name} missing"


def test_fig2_caption_parameters():
    ladder = CATALOG["fig2-coupling-ladder"]
    couplings = sorted(c.omega_c for c in ladder.cases)
    assert couplings == pytest.approx([1 / 20, 1 / 15, 1 / 10])
    assert all(c.b0 == 4.0 for c in ladder.cases)
    assert all(c.delta == 0.0 for c in ladder.cases)

    breakdown = CATALOG["fig2-breakdown"]
    assert sorted(c.omega_c for c in breakdown.cases) == pytest.approx([1 / 20, 1 / 15, 1 / 10])
    assert all(c.delta == 10.0 for c in breakdown.cases)

    bo_twa = CATALOG["fig2-bo-twa"]
    assert all(c.b0 == 2.0 for c in bo_twa.cases)
    assert sorted({c.omega_c for c in bo_twa.cases}) == pytest.approx([1 / 20, 1 / 10])
    assert sorted({c.delta for c in bo_twa.cases}) == [0.0, 10.0]
    assert set(bo_twa.methods) == {"master", "bo", "twa"}

    rw = CATALOG["fig2-resonant-weak"]
    assert rw.cases[0].omega_c == pytest.approx(1 / 20)
    assert rw.cases[0].b0 == 4.0
    assert set(rw.methods) == {"master", "semiclassical"}


def test_fig3_fig4_matched_decay_rates():
    fig3 = CATALOG["fig3-shaded"]
    rates = sorted(round(c.gamma_b_eff(), 9) for c in fig3.cases)
    assert rates == pytest.approx(sorted([1 / 36, 1 / 36, 1 / 100, 1 / 100]))
    assert all(c.b0 == 4.0 for c in fig3.cases)
    # matched pairs: the detuned coupling is derived from the rate
    for c in fig3.cases:
        assert gamma_b_eff(c.omega_c, 1.0, c.delta) == pytest.approx(c.gamma_b_eff())

    fig4 = CATALOG["fig4-qfunc"]
    assert {c.delta for c in fig4.cases} == {0.0, 10.0}
    for c in fig4.cases:
        assert c.gamma_b_eff() == pytest.approx(1 / 36)
        assert c.q_schedule is not None
        assert all(t <= c.t_final for t in c.q_schedule.times)


def test_fig5_couplings_and_ensemble():
    fig5 = CATALOG["fig5-varb"]
    assert set(fig5.methods) == {"master", "twa"}
    for c in fig5.cases:
        assert c.b0 == 4.0
        assert c.twa is not None and c.twa.n_traj == 10_000
    by_delta = {}
    for c in fig5.cases:
        by_delta.setdefault(c.delta, []).append(c.omega_c)
    assert sorted(by_delta) == [0.0, 10.0]
    for wcs in by_delta.values():
        assert sorted(wcs) == pytest.approx([1 / 20, 1 / 15, 1 / 10])
    # the Wigner window must reach half an effective decay time
    for c in fig5.cases:
        assert c.t_final >= 0.5 / c.gamma_b_eff() - 1e-9


def test_vacuum_scenario_runs_all_methods():
    sc = CATALOG["vacuum-fixed-point"]
    assert set(sc.methods) == {"master", "semiclassical", "bo", "twa"}
    assert sc.cases[0].b0 == 0.0


def test_parse_scenario_roundtrip():
    text = """
name = "custom"
description = "tiny"
methods = ["master", "twa"]
seed = 7

[[cases]]
label = "a"
delta = 10.0
gamma_b_eff = 0.0277777777778
b0 = [2.0, 1.0]
t_final = 5.0
sample_count = 11
cutoff_cavity = 6
cutoff_mirror = 18

[cases.twa]
n_traj = 500
dt = 0.005
"""
    sc = parse_scenario(text)
    assert sc.name == "custom"
    assert sc.seed == 7
    case = sc.cases[0]
    assert case.b0 == 2.0 + 1.0j
    assert gamma_b_eff(case.omega_c, 1.0, 10.0) == pytest.approx(0.0277777777778)
    assert case.twa.n_traj == 500


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_scenario('name = "x"\nmethods = ["master"]\nbogus = 1\n[[cases]]\ndelta=0.0\nomega_c=0.1\nb0=1.0\nt_final=1.0')


def test_parse_rejects_empty_methods():
    with pytest.raises(ConfigError):
        parse_scenario('name = "x"\nmethods = []\n[[cases]]\ndelta=0.0\nomega_c=0.1\nb0=1.0\nt_final=1.0')


def test_parse_rejects_bad_method():
    with pytest.raises(ConfigError, match="unknown method"):
        parse_scenario('name = "x"\nmethods = ["exact"]\n[[cases]]\ndelta=0.0\nomega_c=0.1\nb0=1.0\nt_final=1.0')


def test_parse_rejects_missing_coupling():
    with pytest.raises(ConfigError, match="omega_c or gamma_b_eff"):
        parse_scenario('name = "x"\nmethods = ["master"]\n[[cases]]\ndelta=0.0\nb0=1.0\nt_final=1.0')


def test_parse_path_precise_message():
    with pytest.raises(ConfigError, match=r"cases\[0\]"):
        parse_scenario('name = "x"\nmethods = ["master"]\n[[cases]]\ndelta=0.0\nomega_c=0.1\nb0=1.0\nt_final=-1.0')


def test_unknown_scenario_name():
    with pytest.raises(ConfigError, match="unknown scenario"):
        get_scenario("fig9-imaginary")
