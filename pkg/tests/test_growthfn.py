import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles  # noqa: F401  (60-digit mpmath context)
from fastescape import growthfn as gf
from fastescape import tower as T
from fastescape.errors import CatalogError, DomainError, ParameterError



@pytest.fixture(scope="module")
def cat():
    return gf.load_catalog()


def mp_logM(name, r):
    r = mp.mpf(r)
    return {
        "exp": r,
        "exp_quarter": r + mp.log(mp.mpf("0.25")),
        "cosh": mp.log(mp.cosh(r)),
        "exp_z2": r * r,
        "poly6": mp.log(1 + r ** 2 + r ** 6),
    }[name]


@pytest.mark.parametrize("name", ["exp", "exp_quarter", "cosh", "exp_z2", "poly6"])
@pytest.mark.parametrize("r", [0.3, 1.0, 2.5, 17.0, 240.0, 9.5e3])
def test_closed_form_logM_vs_mpmath(cat, name, r):
    got = gf.max_modulus_log(cat[name], r)
    want = mp_logM(name, r)
    if want > 700:
        assert got.level >= 1
        assert math.isclose(T.log_t(got).to_float(), float(mp.log(want)), rel_tol=1e-12)
    else:
        assert math.isclose(got.to_float(), float(want), rel_tol=1e-12, abs_tol=1e-15)


@pytest.mark.parametrize("r", [0.5, 3.0, 11.0, 24.0])
def test_series_max_modulus_vs_cosh(cat, r):
    # cosh has non-negative Taylor coefficients, so M(r) = cosh r
    f = cat["cosh_series"]
    assert math.isclose(gf.max_modulus_log(f, r).to_float(), float(mp.log(mp.cosh(r))),
                        rel_tol=1e-10)


def test_series_sampling_finds_off_axis_peak():
    # 1 - z^2 peaks at z = +-i on circles, not on the positive axis
    coeffs = (1.0, 0.0, -1.0)
    assert math.isclose(gf.series_max_modulus(coeffs, 2.0), 5.0, rel_tol=1e-9)


def test_series_beyond_sampling_radius(cat):
    with pytest.raises(DomainError):
        gf.max_modulus_log(cat["cosh_series"], 30.0)


def test_mu_is_M_at_eps_one(cat):
    f = cat["exp_z2"]
    for r in (1.5, 40.0):
        assert gf.mu(f, 2, 1.0, r) == f.M(r) or T.isclose(gf.mu(f, 2, 1.0, r), f.M(r), 1e-12)


def test_mu_reference_value(cat):
    # mu_{2,1/2}(r) = exp(exp(sqrt(log r))) ... for exp: log log M(r) = log r
    f = cat["exp"]
    got = gf.mu(f, 2, 0.5, 100.0)
    assert math.isclose(got.to_float(), math.exp(10.0), rel_tol=1e-12)


@settings(max_examples=60)
@given(st.floats(min_value=1.5, max_value=50.0), st.sampled_from([0.25, 0.5, 0.75]))
def test_mu_nesting_above_r0(r, eps):
    for name in ("exp", "cosh", "exp_z2"):
        f = gf.get_model(name)
        x = T.exp_n(T.as_tower(r), 1)
        if T.cmp(x, f.r0) < 0:
            continue
        m1 = gf.mu(f, 1, eps, x)
        assert T.cmp(m1, f.M(x)) < 0
        assert T.cmp(gf.mu(f, 2, eps, x), m1) < 0


def test_iterate_M_conjugated_matches_direct(cat):
    f = cat["exp"]
    direct = gf.iterate_M(f, 1.5, 4, conj_m=1)
    conj = gf.iterate_M(f, 1.5, 4, conj_m=2)
    assert T.isclose(direct, conj, 1e-9)
    assert gf.iterate_M(f, 2.0, 20).level >= 20


def test_psi_identity():
    # n + m - 1 = 1: psi(t) = exp((log t)^p)
    assert math.isclose(gf.psi_m(0, 2, 2.0, 10.0).to_float(),
                        math.exp(math.log(10.0) ** 2), rel_tol=1e-12)


def test_phi_m_exp(cat):
    # phi_2(t) = log M(e^t) = e^t for exp
    assert math.isclose(gf.phi_m(cat["exp"], 2, 3.0).to_float(), math.exp(3.0), rel_tol=1e-12)
    assert gf.phi_m_eps(cat["exp"], 2, 0.5, 3.0) == T.pow_t(gf.phi_m(cat["exp"], 2, 3.0), 0.5)


def test_estimate_order(cat):
    grid = [10.0 ** (j / 2.0) for j in range(2, 22)]
    hi, lo = gf.estimate_order(cat["exp_z2"], grid)
    assert math.isclose(hi, 2.0, rel_tol=1e-12) and math.isclose(lo, 2.0, rel_tol=1e-12)
    # order zero, approached slowly
    hi, lo = gf.estimate_order(cat["poly6"], grid)
    assert lo < 0.25 and lo < hi
    with pytest.raises(ParameterError):
        gf.estimate_order(cat["exp"], grid[:5])
    with pytest.raises(ParameterError):
        gf.estimate_order(cat["exp"], [2 + j for j in range(12)])
    with pytest.raises(ParameterError):
        gf.estimate_order(cat["exp"], [1.0] + grid)


def test_piecewise_phi_continuity(cat):
    spec = cat["example53"].phi_spec
    a, b = spec.segment(1)
    assert T.isclose(spec.phi(a), spec.base_mu(a), 1e-9)
    assert T.isclose(spec.phi(b), spec.base_mu(b), 1e-9)
    # exp(sqrt t) is convex out here, so the chord sits above it
    mid = T.as_tower(0.5 * (a.to_float() + b.to_float()))
    assert T.cmp(spec.phi(mid), spec.base_mu(mid)) > 0
    assert spec.locate(T.as_tower(5.0)) == 0
    assert spec.locate(mid) == 1
    with pytest.raises(DomainError):
        spec.phi(T.as_tower(0.0))


def test_piecewise_chord_vs_mpmath(cat):
    spec = cat["example53"].phi_spec
    b = mp.exp(10)
    a = b ** mp.mpf("0.75")
    for t in (3000.0, 10000.0, 20000.0):
        ya, yb = mp.exp(mp.sqrt(a)), mp.exp(mp.sqrt(b))
        want = ya + (yb - ya) * (t - a) / (b - a)
        got = spec.phi(T.as_tower(t))
        assert math.isclose(T.log_t(got).to_float(), float(mp.log(want)), rel_tol=1e-10)


def test_thresholds_cached(cat):
    for f in cat.values():
        assert f.r0 is not None
        assert T.cmp(f.M(T.as_tower(f.R_min * 1.001)), T.as_tower(f.R_min * 1.001)) > 0


def test_tower_coord_roundtrip():
    for u in (0.0, 0.3, 1.999, 2.5, 3.75):
        assert math.isclose(gf.coord_of(gf.tower_coord(u)), u, abs_tol=1e-12)


def test_bisect_threshold():
    r = gf.bisect_threshold(lambda x: T.cmp(x, T.as_tower(5.0)) >= 0)
    assert math.isclose(r.to_float(), 5.0, rel_tol=1e-9)
    assert gf.bisect_threshold(lambda x: False) is None


def test_catalog_errors(tmp_path):
    with pytest.raises(CatalogError):
        gf.load_catalog(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("[x]\nkind = closed_form\nformula = nope\nR_min = 1\n")
    with pytest.raises(CatalogError):
        gf.load_catalog(bad)
    small = tmp_path / "small.ini"
    small.write_text("[q]\nkind = closed_form\nformula = lambda_exp\nparams = lambda=0.25\nR_min = 0.5\n")
    with pytest.raises(CatalogError, match="R_min"):
        gf.load_catalog(small)
    empty = tmp_path / "empty.ini"
    empty.write_text("")
    with pytest.raises(CatalogError):
        gf.load_catalog(empty)


def test_params_validation():
    with pytest.raises(ParameterError):
        gf.GrowthParams(eps=1.5).validate()
    with pytest.raises(ParameterError):
        gf.GrowthParams(p=1.0, q=0.5).validate(pq_required=True)
    with pytest.raises(ParameterError):
        gf.mu(gf.get_model("exp"), 0, 0.5, 2.0)
