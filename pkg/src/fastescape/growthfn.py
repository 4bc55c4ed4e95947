"""Growth data of entire functions and the derived maps mu, phi_m, psi_m.

Everything is evaluated in tower arithmetic, so radii like exp^3(5) are fine
as long as the model's log M has a tower formula.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional

import numpy as np

from . import core
from .errors import CatalogError, DomainError, ParameterError
from .tower import (TAU, TowerReal, _add, _sub, as_tower, cmp, exp_n, exp_t, log_n,
                    log_t, normalize, pow_t, scale_t, shift_t)


class GrowthKind(str, Enum):
    CLOSED_FORM = "closed_form"
    POWER_SERIES = "power_series"
    PIECEWISE_PHI = "piecewise_phi"


_FORMULAS = {
    "lambda_exp": core.LAMBDA_EXP,
    "cosh": core.COSH,
    "exp_square": core.EXP_SQUARE,
    "poly": core.POLY,
}


@dataclass(frozen=True)
class GrowthParams:
    """Parameter bundle shared by the checkers; unused fields stay None."""
    m: Optional[int] = None
    eps: Optional[float] = None
    n: Optional[int] = None
    q: Optional[float] = None
    q_tilde: Optional[float] = None
    p: Optional[float] = None
    k: Optional[float] = None
    c: Optional[float] = None
    d: Optional[float] = None
    ell: Optional[int] = None
    R: Optional[TowerReal] = None

    def validate(self, pq_required: bool = False):
        if self.m is not None and self.m < 1:
            raise ParameterError("m must be a positive integer")
        if self.eps is not None and not 0.0 < self.eps < 1.0:
            raise ParameterError("eps must lie in (0, 1), got %r" % self.eps)
        if self.k is not None and not self.k > 1.0:
            raise ParameterError("k must exceed 1, got %r" % self.k)
        if self.d is not None and not self.d > 1.0:
            raise ParameterError("d must exceed 1, got %r" % self.d)
        if self.n is not None and self.n < 0:
            raise ParameterError("n must be non-negative")
        if self.ell is not None and self.ell < 0:
            raise ParameterError("ell must be non-negative")
        if pq_required and not (self.p is not None and self.q is not None
                                and self.p * self.q > 1.0):
            raise ParameterError("need p*q > 1")
        return self


@dataclass(frozen=True)
class PiecewisePhiSpec:
    """phi(t) = exp(sqrt t), replaced by its chord on [t_{n+1}^{3/4}, t_{n+1}]
    for every n >= 1, where t_{n+1} = exp(t_n)."""
    t1: float = 10.0

    def breakpoint(self, n: int) -> TowerReal:
        return exp_n(as_tower(self.t1), n - 1)

    def segment(self, n: int) -> tuple[TowerReal, TowerReal]:
        b = self.breakpoint(n + 1)
        return pow_t(b, 0.75), b

    def base_mu(self, t: TowerReal) -> TowerReal:
        return exp_t(pow_t(t, 0.5))

    def locate(self, t: TowerReal) -> int:
        """Segment index containing t, or 0 on the base curve."""
        n = 1
        while True:
            a, b = self.segment(n)
            if cmp(t, b) <= 0:
                return n if cmp(t, a) >= 0 else 0
            n += 1

    def phi(self, t: TowerReal) -> TowerReal:
        if t.level == 0 and t.mantissa <= 0.0:
            raise DomainError("phi needs t > 0, got %s" % t)
        n = self.locate(t)
        if n == 0:
            return self.base_mu(t)
        a, b = self.segment(n)
        ya = self.base_mu(a)
        yb = self.base_mu(b)
        num = _sub(t, a)
        if num.level == 0 and num.mantissa <= 0.0:
            return ya
        frac = math.exp(log_t(num).to_float() - log_t(_sub(b, a)).to_float())
        frac = min(frac, 1.0)
        rise = _sub(yb, ya)
        if frac <= 0.0 or (rise.level == 0 and rise.mantissa <= 0.0):
            return ya
        return _add(ya, scale_t(rise, frac))


def sqrt_exp_phi(t: TowerReal) -> TowerReal:
    """The base curve exp(t^{1/2}) on its own."""
    return exp_t(pow_t(t, 0.5))


@dataclass(frozen=True)
class GrowthModel:
    name: str
    kind: GrowthKind
    formula: str = ""
    lam: float = 1.0
    coefficients: tuple = ()
    phi_spec: Optional[PiecewisePhiSpec] = None
    r_max: float = math.inf
    R_min: float = 1.0
    expects: dict = field(default_factory=dict, compare=False, hash=False)
    r0: Optional[TowerReal] = field(default=None, compare=False, hash=False)

    @property
    def code(self) -> int:
        if self.kind is GrowthKind.CLOSED_FORM:
            return _FORMULAS[self.formula]
        if self.kind is GrowthKind.POWER_SERIES:
            return core.POLY
        raise ParameterError("%s has no complex evaluator" % self.name)

    @property
    def has_complex_evaluator(self) -> bool:
        return self.kind is not GrowthKind.PIECEWISE_PHI

    @property
    def tower_ok(self) -> bool:
        """Whether log M has a tower formula valid at any radius; every
        closed form in the catalog has non-negative Taylor coefficients, so
        it also maps the positive ray into itself with f = M there."""
        return self.kind is GrowthKind.CLOSED_FORM

    def logM(self, r) -> TowerReal:
        return max_modulus_log(self, r)

    def M(self, r) -> TowerReal:
        return exp_t(max_modulus_log(self, r))

    def expected(self, condition_id: str, m: Optional[int] = None) -> Optional[str]:
        if m is not None and "%s.m%d" % (condition_id, m) in self.expects:
            return self.expects["%s.m%d" % (condition_id, m)]
        return self.expects.get(condition_id)


# --- power series -------------------------------------------------------------

def _series_abs(coeffs: np.ndarray, r: float, theta: np.ndarray) -> np.ndarray:
    z = r * np.exp(1j * theta)
    acc = np.zeros_like(z)
    for a in coeffs[::-1]:
        acc = acc * z + a
    return np.abs(acc)


def _golden_max(g: Callable[[float], float], lo: float, hi: float, iters: int = 40) -> float:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = g(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = g(x1)
    return max(f1, f2)


def series_max_modulus(coeffs, r: float, samples: int = 1024, rounds: int = 3) -> float:
    """max |f| on |z| = r: equispaced sampling, then golden-section refinement
    around each of the ``rounds`` largest sampled local maxima."""
    return _series_max_cached(tuple(complex(c) for c in coeffs), float(r), samples, rounds)


@lru_cache(maxsize=4096)
def _series_max_cached(coeffs: tuple, r: float, samples: int, rounds: int) -> float:
    arr = np.asarray(coeffs, dtype=np.complex128)
    theta = np.arange(samples) * (2.0 * math.pi / samples)
    vals = _series_abs(arr, r, theta)
    is_peak = (vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1))
    peaks = sorted(np.flatnonzero(is_peak).tolist(), key=lambda i: -vals[i])
    h = 2.0 * math.pi / samples
    best = float(vals.max())
    rev = coeffs[::-1]

    def g(th):
        z = complex(r * math.cos(th), r * math.sin(th))
        acc = 0j
        for a in rev:
            acc = acc * z + a
        return abs(acc)

    for i in peaks[:rounds]:
        best = max(best, _golden_max(g, theta[i] - h, theta[i] + h))
    return best


# --- the growth maps ----------------------------------------------------------

def max_modulus_log(f: GrowthModel, r) -> TowerReal:
    r = as_tower(r)
    if r.level == 0 and r.mantissa <= 0.0:
        raise DomainError("log M needs r > 0, got %s" % r)
    if f.kind is GrowthKind.CLOSED_FORM:
        return TowerReal(*core.logm_step(f.code, f.lam, list(f.coefficients),
                                         r.level, r.mantissa))
    if f.kind is GrowthKind.POWER_SERIES:
        x = r.to_float()
        if x > f.r_max:
            raise DomainError("%s is sampled only up to r = %g" % (f.name, f.r_max))
        return normalize(0, math.log(series_max_modulus(f.coefficients, x)))
    if r.level == 0 and r.mantissa <= 1.0:
        raise DomainError("%s needs r > 1" % f.name)
    return f.phi_spec.phi(log_t(r))


def mu(f: GrowthModel, m: int, eps: float, r) -> TowerReal:
    """exp^m(eps * log^m M(r)); eps = 1 gives M(r)."""
    if m < 1:
        raise ParameterError("m must be positive")
    if not 0.0 < eps <= 1.0:
        raise ParameterError("eps must lie in (0, 1]")
    inner = log_n(max_modulus_log(f, r), m - 1, "log^%d M" % m)
    return exp_n(scale_t(inner, eps), m)


def iterate_mu(f: GrowthModel, m: int, eps: float, r, n: int) -> TowerReal:
    v = as_tower(r)
    for _ in range(n):
        v = mu(f, m, eps, v)
    return v


def iterate_M(f: GrowthModel, r, n: int, conj_m: Optional[int] = None) -> TowerReal:
    """M^n(r). With ``conj_m`` (used by default for n > 16) the iteration runs
    on phi_m in log^{m-1} coordinates and is mapped back once at the end."""
    v = as_tower(r)
    if conj_m is None and n > 16:
        conj_m = 2
    if conj_m is None or conj_m == 1 or n == 0:
        for _ in range(n):
            v = exp_t(max_modulus_log(f, v))
        return v
    t = log_n(v, conj_m - 1)
    for _ in range(n):
        t = phi_m(f, conj_m, t)
    return exp_n(t, conj_m - 1)


def phi_m(f: GrowthModel, m: int, t) -> TowerReal:
    """log^{m-1} M(exp^{m-1} t)."""
    if m < 1:
        raise ParameterError("m must be positive")
    t = as_tower(t)
    if m == 1:
        return f.M(t)
    return log_n(max_modulus_log(f, exp_n(t, m - 1)), m - 2)


def psi_m(n: int, m: int, p: float, t) -> TowerReal:
    """exp^{n+m-1}((log^{n+m-1} t)^p)."""
    depth = n + m - 1
    return exp_n(pow_t(log_n(as_tower(t), depth), p), depth)


def phi_m_eps(f: GrowthModel, m: int, eps: float, t) -> TowerReal:
    return pow_t(phi_m(f, m, t), eps)


def estimate_order(f: GrowthModel, r_grid) -> tuple[float, float]:
    """Sampled (max, min) of log log M(r) / log r over the grid: estimates of
    the order and the lower order, not the limits themselves."""
    radii = [as_tower(r) for r in r_grid]
    if len(radii) < 10:
        raise ParameterError("need at least 10 radii, got %d" % len(radii))
    lo, hi = min(radii), max(radii)
    if cmp(lo, as_tower(1.0)) <= 0:
        raise ParameterError("radii must exceed 1")
    span = log_t(hi).to_float() - log_t(lo).to_float()
    if span < 6.0 * math.log(10.0) * (1.0 - 1e-12):
        raise ParameterError("grid must span at least 6 decades")
    ratios = []
    for r in radii:
        llm = log_t(max_modulus_log(f, r))
        ratios.append(llm.to_float() / log_t(r).to_float())
    return max(ratios), min(ratios)


# --- thresholds ---------------------------------------------------------------

def tower_coord(u: float) -> TowerReal:
    """Continuous increasing parametrisation of [1, inf): level floor(u),
    mantissa 1 + frac(u)(e - 1)."""
    lv = int(math.floor(u))
    return normalize(lv, 1.0 + (u - lv) * (core.E - 1.0))


def coord_of(r: TowerReal) -> float:
    """Inverse of :func:`tower_coord` for r >= 1."""
    if r.level == 0:
        if r.mantissa < 1.0:
            raise DomainError("tower coordinates start at 1")
        return (r.mantissa - 1.0) / (core.E - 1.0)
    return r.level + (r.mantissa - 1.0) / (core.E - 1.0)


def bisect_threshold(pred: Callable[[TowerReal], bool], lo: float = 0.0,
                     hi: float = 4.0, steps: int = 256, iters: int = 60) -> Optional[TowerReal]:
    """Least r (in tower coordinates) after which pred holds on a fine scan,
    refined by bisection; None when pred fails at the top of the range."""
    def ok(u):
        try:
            return bool(pred(tower_coord(u)))
        except DomainError:
            return False

    us = [lo + (hi - lo) * j / steps for j in range(steps + 1)]
    flags = [ok(u) for u in us]
    if not flags[-1]:
        return None
    last_bad = max((j for j in range(len(us)) if not flags[j]), default=None)
    if last_bad is None:
        return tower_coord(lo)
    a, b = us[last_bad], us[last_bad + 1]
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if ok(mid):
            b = mid
        else:
            a = mid
    return tower_coord(b)


def _nesting_holds(f: GrowthModel, r: TowerReal) -> bool:
    big = f.M(r)
    for eps in (0.25, 0.5, 0.75):
        one = mu(f, 1, eps, r)
        if cmp(one, big) >= 0:
            return False
        for m in (2, 3):
            if cmp(mu(f, m, eps, r), one) >= 0:
                return False
    return True


def _finalize(f: GrowthModel) -> GrowthModel:
    """Verify R_min and cache the nesting threshold r0."""
    hi = 4.0
    if f.kind is GrowthKind.POWER_SERIES:
        hi = min(hi, coord_of(as_tower(f.r_max)) * (1.0 - 1e-12))

    def above(r):
        return cmp(f.M(r), r) > 0

    found = bisect_threshold(above, 0.0, hi)
    if found is None or cmp(found, as_tower(f.R_min), 1e-6) > 0:
        raise CatalogError("%s: M(r) > r fails above R_min=%g (threshold %s)"
                           % (f.name, f.R_min, found))
    r0 = bisect_threshold(lambda r: _nesting_holds(f, r), 0.0, hi)
    object.__setattr__(f, "r0", r0)
    return f


# --- catalog ------------------------------------------------------------------

def _parse_params(text: str) -> dict:
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise CatalogError("bad params entry %r" % part)
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _series_coeffs(params: dict) -> tuple:
    if "coeffs" in params:
        return tuple(float(c) for c in params["coeffs"].split(","))
    terms = int(params.get("terms", "40"))
    series = params.get("series")
    if series == "cosh":
        out = [0.0] * (2 * terms - 1)
        for j in range(terms):
            out[2 * j] = 1.0 / math.factorial(2 * j)
        return tuple(out)
    if series == "exp":
        return tuple(1.0 / math.factorial(j) for j in range(terms))
    raise CatalogError("unknown series %r" % series)


def model_from_record(name: str, rec) -> GrowthModel:
    try:
        kind = GrowthKind(rec["kind"])
    except (KeyError, ValueError):
        raise CatalogError("%s: missing or unknown kind" % name) from None
    params = _parse_params(rec.get("params", ""))
    try:
        r_min = float(rec["R_min"])
    except (KeyError, ValueError):
        raise CatalogError("%s: missing or bad R_min" % name) from None
    expects = {k[len("expect."):]: v.strip() for k, v in rec.items() if k.startswith("expect.")}
    formula = rec.get("formula", "").strip()
    if kind is GrowthKind.CLOSED_FORM:
        if formula not in _FORMULAS:
            raise CatalogError("%s: unknown formula %r" % (name, formula))
        coeffs = tuple(float(c) for c in params["coeffs"].split(",")) if "coeffs" in params else ()
        if formula == "poly" and (not coeffs or any(c < 0 for c in coeffs) or coeffs[-1] == 0):
            raise CatalogError("%s: poly needs non-negative coefficients with a nonzero top one" % name)
        lam = float(params.get("lambda", "1"))
        if not lam > 0:
            raise CatalogError("%s: lambda must be positive" % name)
        f = GrowthModel(name, kind, formula, lam=lam, coefficients=coeffs,
                        R_min=r_min, expects=expects)
    elif kind is GrowthKind.POWER_SERIES:
        f = GrowthModel(name, kind, formula or "series", coefficients=_series_coeffs(params),
                        r_max=float(params.get("r_max", "25")), R_min=r_min, expects=expects)
    else:
        spec = PiecewisePhiSpec(t1=float(params.get("t1", "10")))
        f = GrowthModel(name, kind, formula or "piecewise", phi_spec=spec, R_min=r_min,
                        expects=expects)
    return _finalize(f)


def default_catalog_path():
    return resources.files("fastescape").joinpath("catalog.ini")


def load_catalog(path=None) -> dict[str, GrowthModel]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is None:
        parser.read_string(default_catalog_path().read_text())
    else:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise CatalogError("cannot read catalog %s: %s" % (path, exc)) from None
        except configparser.Error as exc:
            raise CatalogError("malformed catalog %s: %s" % (path, exc)) from None
    out = {}
    for name in parser.sections():
        out[name] = model_from_record(name, parser[name])
    if not out:
        raise CatalogError("catalog is empty")
    return out


_DEFAULT = None


def get_model(name: str, catalog: Optional[dict] = None) -> GrowthModel:
    global _DEFAULT
    if catalog is None:
        if _DEFAULT is None:
            _DEFAULT = load_catalog()
        catalog = _DEFAULT
    try:
        return catalog[name]
    except KeyError:
        raise CatalogError("no function %r in catalog" % name) from None


__all__ = [
    "GrowthKind", "GrowthModel", "GrowthParams", "PiecewisePhiSpec", "TAU",
    "max_modulus_log", "mu", "iterate_mu", "iterate_M", "phi_m", "psi_m",
    "phi_m_eps", "estimate_order", "load_catalog", "get_model", "sqrt_exp_phi",
    "series_max_modulus", "bisect_threshold", "tower_coord",
]
