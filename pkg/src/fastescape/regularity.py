"""Grid checkers for the regularity and growth inequalities.

Each checker samples a tower-spaced grid, evaluates both sides of its
inequality in tower arithmetic and reports a finite-range verdict:

* VIOLATED when some defined point of the top level band fails; the largest
  failing point is returned as the counterexample.
* INCONCLUSIVE when some point of the top band cannot be evaluated.
* SATISFIED_ON_RANGE otherwise, with witness R the grid point following the
  last failing or undefined point.

Ties within ``TAU`` count as satisfied for ``>=`` and as failures for ``>``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

from .errors import DomainError, ParameterError
from .growthfn import (GrowthKind, GrowthModel, GrowthParams, PiecewisePhiSpec, coord_of,
                       max_modulus_log, mu, phi_m, psi_m, tower_coord)
from .tower import (TAU, TowerReal, as_tower, cmp, exp_n, exp_t, log_n, pow_t, scale_t,
                    tower_grid)

K_MENU = (1.25, 1.5, 2.0, 3.0, 5.0, 10.0)
EPS_MENU = (0.25, 0.5, 0.75)
DEFAULT_LEVELS = range(0, 4)


class Verdict(str, Enum):
    SATISFIED_ON_RANGE = "SATISFIED_ON_RANGE"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    params: GrowthParams
    verdict: Verdict
    witness: dict
    tested_range: tuple
    samples: int
    fn: Optional[str] = None
    counterexample: Optional[TowerReal] = None
    notes: tuple = ()
    details: dict = field(default_factory=dict, compare=False)

    @property
    def R(self) -> Optional[TowerReal]:
        return self.witness.get("R")

    def witness_text(self, sep: str = ";") -> str:
        parts = []
        for key, val in self.witness.items():
            parts.append("%s=%s" % (key, _fmt(val)))
        if self.counterexample is not None:
            parts.append("x=%s" % self.counterexample)
        return sep.join(parts)

    def summary(self) -> str:
        bits = [self.verdict.value]
        for key, val in self.witness.items():
            if isinstance(val, TowerReal):
                f = val.to_float()
                bits.append("%s=%s" % (key, ("%.6g" % f) if f < 1e15 else str(val)))
            else:
                bits.append("%s=%s" % (key, _fmt(val)))
        if self.counterexample is not None:
            bits.append("counterexample=%s" % self.counterexample)
        return " ".join(bits)

    def to_row(self) -> dict:
        p = self.params
        return {
            "condition_id": self.condition_id,
            "fn": self.fn or "",
            "m": "" if p.m is None else str(p.m),
            "eps": "" if p.eps is None else repr(p.eps),
            "k": "" if p.k is None else repr(p.k),
            "q": "" if p.q is None else repr(p.q),
            "n": "" if p.n is None else str(p.n),
            "verdict": self.verdict.value,
            "witness": self.witness_text(),
            "range_lo": str(self.tested_range[0]),
            "range_hi": str(self.tested_range[1]),
        }


REPORT_FIELDS = ["condition_id", "fn", "m", "eps", "k", "q", "n", "verdict", "witness",
                 "range_lo", "range_hi"]


_WITNESS_ITEM = re.compile(r"(\w+)=(T\([^)]*\)|[^;]*)")


def parse_witness(text: str) -> dict:
    """Inverse of :meth:`ConditionReport.witness_text`."""
    out = {}
    for key, val in _WITNESS_ITEM.findall(text or ""):
        if val.startswith("T("):
            out[key] = TowerReal.parse(val)
        else:
            try:
                out[key] = int(val)
            except ValueError:
                try:
                    out[key] = float(val)
                except ValueError:
                    out[key] = val
    return out


def _fmt(val) -> str:
    if isinstance(val, float):
        return repr(val) if not val.is_integer() else str(int(val))
    return str(val)


# --- the scanning engine ------------------------------------------------------

Side = tuple  # (lhs, rhs, label)


@dataclass
class _Scan:
    verdict: Verdict
    R: Optional[TowerReal]
    counterexample: Optional[TowerReal]
    states: list
    failed: Optional[tuple] = None


def _eval_point(pred, x, strict):
    try:
        sides = pred(x)
    except DomainError:
        return None, None
    if isinstance(sides, tuple) and len(sides) == 2:
        sides = [sides + ("",)]
    for lhs, rhs, label in sides:
        c = cmp(lhs, rhs, TAU)
        if (c <= 0) if strict else (c < 0):
            return False, (lhs, rhs, label)
    return True, None


def scan(grid: Sequence[TowerReal], pred, strict: bool = False) -> _Scan:
    """Evaluate pred on an increasing grid and apply the top-band rule."""
    states = []
    fails = {}
    for i, x in enumerate(grid):
        ok, info = _eval_point(pred, x, strict)
        states.append(ok)
        if ok is False:
            fails[i] = info
    top = max(x.level for x in grid)
    band = [i for i, x in enumerate(grid) if x.level == top]
    bad = [i for i in range(len(grid)) if states[i] is False]
    if any(states[i] is False for i in band):
        j = bad[-1]
        return _Scan(Verdict.VIOLATED, None, grid[j], states, fails[j])
    if any(states[i] is None for i in band):
        return _Scan(Verdict.INCONCLUSIVE, None, None, states)
    last = max((i for i in range(len(grid)) if states[i] is not True), default=-1)
    return _Scan(Verdict.SATISFIED_ON_RANGE, grid[last + 1], None, states)


def _range(grid):
    return (grid[0], grid[-1])


def _report(cid, params, sc: _Scan, grid, fn=None, witness=None, notes=(), details=None):
    w = dict(witness or {})
    if sc.verdict is Verdict.SATISFIED_ON_RANGE and not {"R", "t0", "t1"} & set(w):
        w["R"] = sc.R
    d = dict(details or {})
    if sc.failed is not None:
        d["lhs"], d["rhs"], d["side"] = sc.failed
    return ConditionReport(cid, params, sc.verdict, w, _range(grid), len(grid), fn,
                           sc.counterexample, tuple(notes), d)


def _fn_name(f):
    return getattr(f, "name", None)


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie in (0, 1), got %r" % eps)


def _check_k_grid(k_grid):
    if not k_grid or any(not k > 1.0 for k in k_grid):
        raise ParameterError("k grid must be a nonempty subset of (1, inf)")


def _notes_for(f):
    if isinstance(f, GrowthModel) and f.kind is GrowthKind.PIECEWISE_PHI:
        return ("breakpoints t1=%g, t_{n+1}=exp(t_n) (assumed)" % f.phi_spec.t1,)
    if isinstance(f, GrowthModel) and f.kind is GrowthKind.POWER_SERIES:
        return ("log M sampled only for r <= %g" % f.r_max,)
    return ()


# --- individual conditions ------------------------------------------------------

def check_theorem22(f: GrowthModel, m: int, eps: float, c: float, q: float, n: int = 0,
                    levels=DEFAULT_LEVELS) -> ConditionReport:
    """Hypothesis M(r) >= exp^{n+1}((log^n r)^q); conclusion mu_{m,eps}(r) > c r."""
    if not q > 0 or not c > 1 or m < 2 or n < 0:
        raise ParameterError("need q > 0, c > 1, m >= 2, n >= 0")
    _check_eps(eps)
    params = GrowthParams(m=m, eps=eps, c=c, q=q, n=n)
    grid = tower_grid(levels)

    def hyp(r):
        return f.M(r), exp_n(pow_t(log_n(r, n), q), n + 1)

    def concl(r):
        return mu(f, m, eps, r), scale_t(r, c)

    h = scan(grid, hyp)
    notes = _notes_for(f)
    if h.verdict is not Verdict.SATISFIED_ON_RANGE:
        return _report("theorem22", params, h, grid, _fn_name(f), {"part": "hypothesis"},
                       notes)
    sc = scan(grid, concl, strict=True)
    return _report("theorem22", params, sc, grid, _fn_name(f),
                   {"part": "conclusion", "hypothesis_R": h.R}, notes)


def check_lemma23(n: int, p: float, a: Sequence[float], b: Sequence[float],
                  levels=None) -> ConditionReport:
    """a1 log(a2 log(... log(a_n r))) >= log(b1 log(... log((b_n r)^p)))."""
    if n < 1 or not p >= 1 or len(a) != n or len(b) != n:
        raise ParameterError("need n >= 1, p >= 1 and n coefficients on each side")
    if any(not x > 0 for x in list(a) + list(b)):
        raise ParameterError("coefficients must be positive")
    grid = tower_grid(range(0, n + 4) if levels is None else levels)

    def pred(r):
        x = scale_t(r, a[n - 1])
        for i in range(n - 2, -1, -1):
            x = scale_t(_log(x), a[i])
        y = _log(pow_t(scale_t(r, b[n - 1]), p))
        for i in range(n - 2, -1, -1):
            y = _log(scale_t(y, b[i]))
        return x, y

    sc = scan(grid, pred)
    return _report("lemma23", GrowthParams(n=n, p=p), sc, grid,
                   details={"a": tuple(a), "b": tuple(b)})


def _log(v):
    return log_n(v, 1)


def _multi_k(cid, f, params_of, pred_of, k_grid, levels, extra_notes=()):
    _check_k_grid(k_grid)
    grid = tower_grid(levels)
    per_k = []
    chosen = None
    for k in sorted(k_grid):
        sc = scan(grid, pred_of(k))
        per_k.append((k, sc))
        if sc.verdict is Verdict.SATISFIED_ON_RANGE:
            chosen = (k, sc)
            break
    table = [(k, s.verdict.value, s.R if s.R is not None else s.counterexample)
             for k, s in per_k]
    notes = _notes_for(f) + tuple(extra_notes)
    if chosen is not None:
        k, sc = chosen
        return _report(cid, params_of(k), sc, grid, _fn_name(f), {"k": k, "R": sc.R},
                       notes, {"per_k": table})
    violated = [(k, s) for k, s in per_k if s.verdict is Verdict.VIOLATED]
    if len(violated) == len(per_k):
        k, sc = violated[-1]
    else:
        k, sc = next((k, s) for k, s in per_k if s.verdict is Verdict.INCONCLUSIVE)
    return _report(cid, params_of(k), sc, grid, _fn_name(f), {"k": k}, notes,
                   {"per_k": table})


def check_m_log_regular(f: GrowthModel, m: int, eps: float, k_grid=K_MENU,
                        levels=DEFAULT_LEVELS) -> ConditionReport:
    """mu_{m,eps}(exp^{m-1}(r^k)) >= exp^{m-1}(M(r)^k) for the smallest k that works."""
    if m < 1:
        raise ParameterError("m must be positive")
    _check_eps(eps)

    def pred_of(k):
        def pred(r):
            return (mu(f, m, eps, exp_n(pow_t(r, k), m - 1)),
                    exp_n(pow_t(f.M(r), k), m - 1))
        return pred

    return _multi_k("m_log", f, lambda k: GrowthParams(m=m, eps=eps, k=k), pred_of,
                    k_grid, levels)


def check_strong_log_regular(f: GrowthModel, eps: float, k_grid=K_MENU,
                             levels=DEFAULT_LEVELS) -> ConditionReport:
    """log M(r^k) >= (k log M(r))^{1/eps}."""
    _check_eps(eps)

    def pred_of(k):
        def pred(r):
            return (max_modulus_log(f, pow_t(r, k)),
                    pow_t(scale_t(max_modulus_log(f, r), k), 1.0 / eps))
        return pred

    return _multi_k("strong_log", f, lambda k: GrowthParams(eps=eps, k=k), pred_of,
                    k_grid, levels)


def check_m_weak_regular(f: GrowthModel, m: int, eps: float, R, N: int,
                         levels=DEFAULT_LEVELS, r_start=None) -> ConditionReport:
    """Least grid r >= R with mu_{m,eps}^n(r) >= M^n(R) for every n <= N.

    With ``r_start`` only that starting value is tried. The verdict is a
    finite-horizon statement only.
    """
    if m < 1 or N < 1:
        raise ParameterError("need m >= 1 and N >= 1")
    _check_eps(eps)
    R = as_tower(R)
    if cmp(f.M(R), R) <= 0:
        raise ParameterError("need M(r) > r at R = %s" % R)
    params = GrowthParams(m=m, eps=eps, n=N, R=R)
    targets = [R]
    for _ in range(N):
        targets.append(exp_t(max_modulus_log(f, targets[-1])))
    if r_start is not None:
        cands = [as_tower(r_start)]
    else:
        cands = [r for r in tower_grid(levels) if cmp(r, R) >= 0] or [R]
    notes = _notes_for(f) + (
        "finite horizon N=%d: only the inequality side of Q_m(f)=A(f) is checked" % N,)
    reached = []
    undefined = 0
    for r in cands:
        v = r
        got = 0
        try:
            for n in range(1, N + 1):
                v = mu(f, m, eps, v)
                if cmp(v, targets[n], TAU) < 0:
                    break
                got = n
        except DomainError:
            undefined += 1
            reached.append((r, None))
            continue
        reached.append((r, got))
        if got == N:
            return ConditionReport("m_weak", params, Verdict.SATISFIED_ON_RANGE,
                                   {"r": r, "N": N}, (cands[0], cands[-1]), len(reached),
                                   _fn_name(f), None, notes, {"reached": reached})
    if undefined == len(cands):
        return ConditionReport("m_weak", params, Verdict.INCONCLUSIVE, {"N": N},
                               (cands[0], cands[-1]), len(reached), _fn_name(f), None,
                               notes, {"reached": reached})
    r_last, n_last = [x for x in reached if x[1] is not None][-1]
    return ConditionReport("m_weak", params, Verdict.VIOLATED,
                           {"N": N, "max_n": max(x[1] for x in reached if x[1] is not None)},
                           (cands[0], cands[-1]), len(reached), _fn_name(f), r_last,
                           notes + ("violated at horizon",),
                           {"reached": reached, "fail_n": n_last + 1})


def check_m_weak_from_m_log(f: GrowthModel, report: ConditionReport,
                            N: int) -> ConditionReport:
    """m-weak inequality implied by a satisfied m-log report, tried only at the
    derived start exp^{m-1}(R'^k) with R' = max(R, R_min)."""
    if report.condition_id != "m_log" or report.verdict is not Verdict.SATISFIED_ON_RANGE:
        raise ParameterError("needs a satisfied m_log report")
    m, eps, k = report.params.m, report.params.eps, report.witness["k"]
    R = report.witness["R"]
    if cmp(R, as_tower(f.R_min)) < 0:
        R = as_tower(f.R_min)
    start = exp_n(pow_t(R, k), m - 1)
    return check_m_weak_regular(f, m, eps, R, N, r_start=start)


def _sandwich_pred(f, m, n, q, q_tilde):
    inner = n + m - 2
    outer = n + m - 1

    def pred(t):
        ph = phi_m(f, m, t)
        base = log_n(t, inner)
        lo = exp_n(pow_t(base, q), outer)
        hi = exp_n(pow_t(base, q_tilde), outer)
        return [(ph, lo, "lower"), (hi, ph, "upper")]

    return pred


def check_growth_condition(f: GrowthModel, m: int, n: int, q: float, q_tilde: float,
                           levels=DEFAULT_LEVELS) -> ConditionReport:
    """exp^{n+m-1}((log^{n+m-2} t)^q) <= phi_m(t) <= exp^{n+m-1}((log^{n+m-2} t)^{q~})."""
    if not 0 < q < 1 or not q_tilde > 0:
        raise ParameterError("need 0 < q < 1 and q~ > 0")
    if m < 1 or n < 0 or n + m < 2:
        raise ParameterError("need n + m >= 2")
    grid = tower_grid(levels)
    sc = scan(grid, _sandwich_pred(f, m, n, q, q_tilde))
    return _report("growth", GrowthParams(m=m, n=n, q=q, q_tilde=q_tilde), sc, grid,
                   _fn_name(f), {"t0": sc.R} if sc.R is not None else {}, _notes_for(f))


def check_psi_phi(f: GrowthModel, m: int, n: int, q: float = 0.9, q_tilde: float = 1.1,
                  p: float = 2.0, d: float = 2.0, levels=DEFAULT_LEVELS) -> ConditionReport:
    """Sandwich first, then phi_m(psi_m(t)) >= (psi_m(phi_m(t)))^d."""
    params = GrowthParams(m=m, n=n, q=q, q_tilde=q_tilde, p=p, d=d)
    params.validate(pq_required=True)
    sand = check_growth_condition(f, m, n, q, q_tilde, levels)
    if sand.verdict is not Verdict.SATISFIED_ON_RANGE:
        return ConditionReport("psi_phi", params, sand.verdict, {"part": "sandwich"},
                               sand.tested_range, sand.samples, _fn_name(f),
                               sand.counterexample, sand.notes, sand.details)
    grid = tower_grid(levels)

    def pred(t):
        return (phi_m(f, m, psi_m(n, m, p, t)),
                pow_t(psi_m(n, m, p, phi_m(f, m, t)), d))

    sc = scan(grid, pred)
    w = {"part": "conclusion", "sandwich_t0": sand.witness.get("t0")}
    if sc.R is not None:
        w["t0"] = sc.R
    return _report("psi_phi", params, sc, grid, _fn_name(f), w, _notes_for(f))


def check_lemma34(n: int, d: float, q: float, levels=None) -> ConditionReport:
    """log^n(r^q) > d (log^n r)^q, strictly."""
    if n < 1 or not d > 0 or not 0 < q < 1:
        raise ParameterError("need n >= 1, d > 0, 0 < q < 1")
    grid = tower_grid(range(0, n + 4) if levels is None else levels)

    def pred(r):
        return log_n(pow_t(r, q), n), scale_t(pow_t(log_n(r, n), q), d)

    sc = scan(grid, pred, strict=True)
    return _report("lemma34", GrowthParams(n=n, d=d, q=q), sc, grid)


PhiLike = Union[PiecewisePhiSpec, GrowthModel, Callable[[TowerReal], TowerReal]]


def _phi_callable(phi: PhiLike):
    if isinstance(phi, PiecewisePhiSpec):
        return phi.phi, phi
    if isinstance(phi, GrowthModel):
        if phi.kind is GrowthKind.PIECEWISE_PHI:
            return phi.phi_spec.phi, phi.phi_spec
        return (lambda t: max_modulus_log(phi, exp_t(t))), None
    return phi, None


def check_lemma52_transfer(phi: PhiLike, eps: float, k: float, levels=DEFAULT_LEVELS,
                           segments: Sequence[int] = (1, 2),
                           per_segment: int = 16) -> ConditionReport:
    """phi(e^{kt}) >= exp((k/eps) phi(t)), with a verdict per branch of phi."""
    _check_eps(eps)
    if not k > 1:
        raise ParameterError("k must exceed 1")
    fn, spec = _phi_callable(phi)
    grid = tower_grid(levels)
    top = max(levels)
    if spec is not None:
        extra = []
        for s in segments:
            a, b = spec.segment(s)
            ua, ub = coord_of(a), coord_of(b)
            for j in range(per_segment):
                u = ua + (ub - ua) * j / (per_segment - 1)
                if u < top + 1:
                    extra.append(tower_coord(u))
        grid = sorted(set(grid) | set(extra), key=coord_of)

    def pred(t):
        return fn(exp_t(scale_t(t, k))), exp_t(scale_t(fn(t), k / eps))

    sc = scan(grid, pred)
    branches = {}
    for x, st in zip(grid, sc.states):
        name = "mu" if spec is None or spec.locate(x) == 0 else "segment%d" % spec.locate(x)
        branches.setdefault(name, []).append((x, st))
    per_branch = {}
    for name, pts in branches.items():
        last = max((i for i, (_, st) in enumerate(pts) if st is not True), default=-1)
        if last == len(pts) - 1:
            v = Verdict.VIOLATED if pts[-1][1] is False else Verdict.INCONCLUSIVE
            per_branch[name] = (v.value, None, len(pts))
        else:
            per_branch[name] = (Verdict.SATISFIED_ON_RANGE.value, pts[last + 1][0], len(pts))
    notes = ()
    if spec is not None:
        notes = ("breakpoints t1=%g, t_{n+1}=exp(t_n) (assumed)" % spec.t1,)
    w = {"t1": sc.R} if sc.R is not None else {}
    return _report("lemma52", GrowthParams(eps=eps, k=k), sc, grid,
                   getattr(phi, "name", None), w, notes, {"branches": per_branch})


CHECKERS = {
    "theorem22": check_theorem22,
    "lemma23": check_lemma23,
    "m_log": check_m_log_regular,
    "m_weak": check_m_weak_regular,
    "strong_log": check_strong_log_regular,
    "growth": check_growth_condition,
    "psi_phi": check_psi_phi,
    "lemma34": check_lemma34,
    "lemma52": check_lemma52_transfer,
}
