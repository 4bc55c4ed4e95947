import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastescape import growthfn as gf
from fastescape import regularity as rg
from fastescape import tower as T
from fastescape.errors import DomainError, ParameterError
from fastescape.regularity import Verdict


@pytest.fixture(scope="module")
def cat():
    return gf.load_catalog()


def steps_apart(a, b):
    return abs(gf.coord_of(a) - gf.coord_of(b)) * 64


# --- the scanning engine ------------------------------------------------------

GRID = T.tower_grid(range(0, 3), 8)


def _threshold_pred(c):
    cut = T.as_tower(c)
    return lambda r: (r, cut)


def test_scan_threshold_is_next_grid_point():
    sc = rg.scan(GRID, _threshold_pred(5.0))
    assert sc.verdict is Verdict.SATISFIED_ON_RANGE
    i = GRID.index(sc.R)
    assert T.cmp(GRID[i], T.as_tower(5.0)) >= 0 > T.cmp(GRID[i - 1], T.as_tower(5.0))


def test_ties_pass_weak_and_fail_strict():
    g = GRID
    tie = lambda r: (r, r)
    assert rg.scan(g, tie).R == g[0]
    assert rg.scan(g, tie, strict=True).verdict is Verdict.VIOLATED


def test_failure_in_top_band_is_violated_with_largest_counterexample():
    top = GRID[-3]
    sc = rg.scan(GRID, lambda r: (T.as_tower(1.0), T.as_tower(2.0)) if r == top
                 else (r, r))
    assert sc.verdict is Verdict.VIOLATED and sc.counterexample == top


def test_undefined_top_band_is_inconclusive():
    def pred(r):
        if r.level == 2:
            raise DomainError("out of range")
        return r, r
    assert rg.scan(GRID, pred).verdict is Verdict.INCONCLUSIVE


def test_low_failures_only_move_R():
    sc = rg.scan(GRID, lambda r: (r, T.as_tower(2.0)))
    assert sc.verdict is Verdict.SATISFIED_ON_RANGE and T.cmp(sc.R, T.as_tower(2.0)) >= 0


@given(st.floats(min_value=1.0, max_value=7.5))
def test_scan_R_monotone_in_cut(c):
    # both cuts stay below the top band (e^e on this grid)
    a = rg.scan(GRID, _threshold_pred(c)).R
    b = rg.scan(GRID, _threshold_pred(c * 2)).R
    assert T.cmp(a, b) <= 0


# --- conditions -----------------------------------------------------------------

def test_strong_log_exp_picks_k3(cat):
    rep = rg.check_strong_log_regular(cat["exp"], 0.5)
    assert rep.witness["k"] == 3.0
    assert [row[1] for row in rep.details["per_k"]] == ["VIOLATED"] * 3 + ["SATISFIED_ON_RANGE"]
    assert rep.summary() == "SATISFIED_ON_RANGE k=3 R=9.09902"


def test_lemma34_values():
    # log(r^q) > d (log r)^q  <=>  log r > (d/q)^{1/(1-q)}
    for n, d, q, true in [(1, 0.4, 0.5, math.exp(0.64)), (1, 2.0, 0.5, math.exp(16.0))]:
        rep = rg.check_lemma34(n, d, q)
        assert rep.verdict is Verdict.SATISFIED_ON_RANGE
        assert T.cmp(rep.R, T.as_tower(true)) >= 0
        assert steps_apart(rep.R, T.as_tower(true)) <= 1.0
    # n = 2: with s = log log r the condition is s - log 2 > sqrt(s)
    s0 = ((1 + math.sqrt(1 + 4 * math.log(2))) / 2) ** 2
    true = T.as_tower(math.exp(math.exp(s0)))
    rep = rg.check_lemma34(2, 1.0, 0.5)
    assert T.cmp(rep.R, true) >= 0 and steps_apart(rep.R, true) <= 1.0


def test_lemma23(cat):
    rep = rg.check_lemma23(1, 2.0, [1.0], [1.0])
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE and rep.R == T.ONE
    rep = rg.check_lemma23(2, 1.0, [0.5, 0.5], [1.0, 1.0])
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE
    assert 13.0 < rep.R.to_float() < 15.0
    with pytest.raises(ParameterError):
        rg.check_lemma23(2, 1.0, [1.0], [1.0, 1.0])


def test_theorem22(cat):
    rep = rg.check_theorem22(cat["exp"], 2, 0.5, 2.0, 0.5)
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE
    assert rep.witness["part"] == "conclusion"
    bad = rg.check_theorem22(cat["poly6"], 2, 0.5, 2.0, 0.5)
    assert bad.verdict is Verdict.VIOLATED and bad.witness["part"] == "hypothesis"


def test_m_log_battery(cat):
    for name in ("exp", "cosh", "exp_z2", "exp_quarter"):
        for m in (1, 2, 3):
            assert rg.check_m_log_regular(cat[name], m, 0.5).verdict is Verdict.SATISFIED_ON_RANGE
    assert rg.check_m_log_regular(cat["poly6"], 1, 0.5).verdict is Verdict.VIOLATED
    assert rg.check_m_log_regular(cat["cosh_series"], 1, 0.5).verdict is Verdict.INCONCLUSIVE


def test_example53_profile(cat):
    f = cat["example53"]
    for eps in rg.EPS_MENU:
        assert rg.check_strong_log_regular(f, eps).verdict is Verdict.VIOLATED
    assert rg.check_m_log_regular(f, 2, 0.5).verdict is Verdict.SATISFIED_ON_RANGE
    one = rg.check_m_log_regular(f, 1, 0.5)
    assert one.verdict is Verdict.SATISFIED_ON_RANGE and one.witness["k"] == 10.0


def test_lemma52_on_base_curve():
    rep = rg.check_lemma52_transfer(gf.sqrt_exp_phi, 0.5, 2.0)
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE
    assert 3.0 < rep.witness["t1"].to_float() < 3.4
    assert set(rep.details["branches"]) == {"mu"}


def test_m_weak(cat):
    f = cat["exp"]
    rep = rg.check_m_weak_regular(f, 1, 0.5, 2.0, 20)
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE
    assert math.isclose(rep.witness["r"].to_float(), 5.61, rel_tol=1e-2)
    assert any("finite horizon" in n for n in rep.notes)
    low = rg.check_m_weak_regular(f, 1, 0.5, 2.0, 20, r_start=2.0)
    assert low.verdict is Verdict.VIOLATED and low.witness["max_n"] < 20
    with pytest.raises(ParameterError):
        rg.check_m_weak_regular(cat["exp_quarter"], 1, 0.5, 1.0, 5)


def test_m_weak_from_m_log(cat):
    f = cat["cosh"]
    rep = rg.check_m_log_regular(f, 2, 0.25)
    weak = rg.check_m_weak_from_m_log(f, rep, 30)
    assert weak.verdict is Verdict.SATISFIED_ON_RANGE
    with pytest.raises(ParameterError):
        rg.check_m_weak_from_m_log(f, rg.check_strong_log_regular(f, 0.5), 30)


def test_growth_and_psi_phi(cat):
    assert rg.check_growth_condition(cat["poly6"], 2, 0, 0.9, 1.1).verdict is Verdict.VIOLATED
    rep = rg.check_psi_phi(cat["exp"], 2, 0)
    assert rep.verdict is Verdict.SATISFIED_ON_RANGE and "t0" in rep.witness and "R" not in rep.witness
    with pytest.raises(ParameterError):
        rg.check_growth_condition(cat["exp"], 1, 0, 0.5, 1.1)
    with pytest.raises(ParameterError):
        rg.check_psi_phi(cat["exp"], 2, 0, q=0.4, p=2.0)


def test_parameter_errors(cat):
    with pytest.raises(ParameterError):
        rg.check_strong_log_regular(cat["exp"], 1.0)
    with pytest.raises(ParameterError):
        rg.check_m_log_regular(cat["exp"], 1, 0.5, (1.0, 2.0))
    with pytest.raises(ParameterError):
        rg.check_lemma34(1, 2.0, 1.5)


def test_witness_roundtrip_and_row(cat):
    rep = rg.check_strong_log_regular(cat["exp"], 0.5)
    assert rg.parse_witness(rep.witness_text()) == rep.witness
    row = rep.to_row()
    assert list(row) == rg.REPORT_FIELDS
    assert row["verdict"] == "SATISFIED_ON_RANGE" and row["fn"] == "exp"


def test_checker_table():
    assert set(rg.CHECKERS) >= {"theorem22", "lemma23", "m_log", "m_weak", "strong_log",
                                "growth", "psi_phi", "lemma34", "lemma52"}


def _strong_sides(f, eps, k, r):
    lhs = gf.max_modulus_log(f, T.pow_t(r, k))
    rhs = T.pow_t(T.scale_t(gf.max_modulus_log(f, r), k), 1.0 / eps)
    return lhs, rhs


def _mlog_sides(f, m, eps, k, r):
    return (gf.mu(f, m, eps, T.exp_n(T.pow_t(r, k), m - 1)),
            T.exp_n(T.pow_t(f.M(r), k), m - 1))


@pytest.mark.parametrize("name", ["poly6", "example53"])
def test_violated_counterexamples_reevaluate(cat, name):
    f = cat[name]
    seen = 0
    for eps in rg.EPS_MENU:
        rep = rg.check_strong_log_regular(f, eps)
        if rep.verdict is Verdict.VIOLATED:
            lhs, rhs = _strong_sides(f, eps, rep.witness["k"], rep.counterexample)
            assert T.cmp(lhs, rhs, T.TAU) < 0
            seen += 1
        for m in (1, 2):
            rep = rg.check_m_log_regular(f, m, eps, (1.25, 1.5))
            if rep.verdict is Verdict.VIOLATED:
                lhs, rhs = _mlog_sides(f, m, eps, rep.witness["k"], rep.counterexample)
                assert T.cmp(lhs, rhs, T.TAU) < 0
                seen += 1
    assert seen > 0
