import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastescape import growthfn as gf
from fastescape import tower as T
from fastescape.errors import ParameterError
from fastescape.orbit import (EscapeVerdict, audit_is_nested, classify_escape,
                              hierarchy_audit, iterate, parse_complex)


@pytest.fixture(scope="module")
def cat():
    return gf.load_catalog()


def test_i_pi_orbit_matches_direct_iteration(cat):
    f = cat["exp"]
    rec = iterate(f, complex(0, math.pi), 12)
    z = complex(0, math.pi)
    for j in range(6):
        assert math.isclose(rec.magnitudes[j].to_float(), abs(z), rel_tol=1e-9, abs_tol=1e-12)
        z = cmath.exp(z)
    # |z_6| = e^{69.4...} is past the float ceiling: the tower takes over
    assert rec.backend_switch_index == 6
    assert math.isclose(T.log_t(rec.magnitudes[6]).to_float(), math.log(abs(z)),
                        rel_tol=1e-9)
    assert len(rec.magnitudes) == 13
    assert all(T.cmp(a, b) < 0 for a, b in zip(rec.magnitudes[4:], rec.magnitudes[5:]))


def test_off_axis_escape_is_flagged(cat):
    f = cat["exp"]
    rec = iterate(f, 40 + 1j, 10)
    assert rec.escaped_level0 and rec.backend_switch_index is None
    ec = classify_escape(f, rec, R=2.0)
    assert ec.horizon == 10


def test_ground_truth(cat):
    f = cat["exp"]
    a = classify_escape(f, iterate(f, 10 + 0j, 30), R=2.0)
    assert (a.verdict, a.witness_ell) == (EscapeVerdict.FAST, 0)
    b = classify_escape(f, iterate(f, 0j, 30), R=1.0)
    assert (b.verdict, b.witness_ell) == (EscapeVerdict.FAST, 1)
    q = cat["exp_quarter"]
    c = classify_escape(q, iterate(q, 0j, 100))
    assert c.verdict is EscapeVerdict.NOT_ESCAPED_BY_HORIZON
    # attracting fixed point of e^z / 4
    assert math.isclose(iterate(q, 0j, 100).magnitudes[-1].to_float(), 0.3574, abs_tol=1e-4)


def test_labels(cat):
    f = cat["exp"]
    ec = classify_escape(f, iterate(f, 10 + 0j, 5), R=2.0)
    assert ec.label == "FAST" and ec.m is None


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.sampled_from(["exp", "cosh", "exp_z2"]))
def test_audit_nested(x, y, name):
    f = gf.get_model(name)
    rec = iterate(f, complex(x, y), 20)
    # below r0 a negative log^m M(R) makes mu_{m,eps}(R) exceed M(R)
    R = max(T.as_tower(3.0), f.r0)
    assert audit_is_nested(hierarchy_audit(f, rec, R=R))


def test_nesting_needs_r0(cat):
    f = cat["cosh"]
    R = T.as_tower(3.0)
    assert T.cmp(R, f.r0) < 0
    assert T.cmp(gf.mu(f, 3, 0.5, R), f.M(R)) > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_classification_consistent_with_audit(x, y):
    f = gf.get_model("exp")
    rec = iterate(f, complex(x, y), 20)
    ec = classify_escape(f, rec, R=3.0)
    rows = hierarchy_audit(f, rec, R=3.0)
    if ec.verdict is EscapeVerdict.FAST:
        assert any(r.holds for r in rows if r.condition == "FAST" and r.ell == ec.witness_ell)
    if ec.verdict is EscapeVerdict.ESCAPING_UNCLASSIFIED:
        assert not any(r.holds for r in rows)


def test_errors(cat):
    with pytest.raises(ParameterError):
        iterate(cat["example53"], 1j, 5)
    with pytest.raises(ParameterError):
        iterate(cat["exp"], 1j, 0)
    with pytest.raises(ParameterError):
        classify_escape(cat["exp_quarter"], iterate(cat["exp_quarter"], 0j, 5), R=1.0)


def test_rows_dump(cat):
    rec = iterate(cat["exp"], 1 + 0j, 4)
    rows = rec.rows()
    assert rows[0] == (0, "T(0;1.0)") and len(rows) == 5


@pytest.mark.parametrize("text,value", [("0.0+3.14159i", 3.14159j), ("1.5-2i", 1.5 - 2j),
                                        ("3", 3 + 0j), ("-2.5j", -2.5j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ValueError):
        parse_complex("abc")


def test_orbit_of_zero_is_iterated_exp(cat):
    # f^{n+1}(0) = exp^n(1)
    rec = iterate(cat["exp"], 0j, 5)
    assert rec.magnitudes[0].to_float() == 0.0
    for n in range(5):
        assert T.isclose(rec.magnitudes[n + 1], T.exp_n(T.ONE, n), 1e-12)
