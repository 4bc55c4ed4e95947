"""Finite orbits of catalog maps and their escape-speed classification."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

from . import core
from .errors import DomainError, ParameterError
from .growthfn import GrowthModel, max_modulus_log, mu
from .tower import TAU, TowerReal, as_tower, cmp, exp_t

CEILING = 1e15
ANGLE_TOL = 1e-8
M_LIST = (1, 2, 3)
EPS_LIST = (0.25, 0.5, 0.75)
ELL_MAX = 8


class EscapeVerdict(str, Enum):
    FAST = "FAST"
    QUITE_FAST = "QUITE_FAST"
    QM = "QM"
    ESCAPING_UNCLASSIFIED = "ESCAPING_UNCLASSIFIED"
    NOT_ESCAPED_BY_HORIZON = "NOT_ESCAPED_BY_HORIZON"


@dataclass(frozen=True)
class OrbitRecord:
    start: complex
    magnitudes: tuple
    backend_switch_index: Optional[int]
    escaped_level0: bool
    horizon: int
    backend: str

    def rows(self):
        """(step, tower text) pairs for CSV dumps."""
        return [(j, str(v)) for j, v in enumerate(self.magnitudes)]


@dataclass(frozen=True)
class EscapeClass:
    verdict: EscapeVerdict
    m: Optional[int]
    witness_eps: Optional[float]
    witness_ell: int
    horizon: int
    R_used: TowerReal

    @property
    def label(self) -> str:
        if self.verdict is EscapeVerdict.QM:
            return "QM(%d)" % self.m
        return self.verdict.value


@dataclass(frozen=True)
class AuditRow:
    condition: str
    m: Optional[int]
    eps: Optional[float]
    ell: int
    holds: bool


def _kernels(backend):
    return core if backend is None else core.load_backend(backend)


def iterate(f: GrowthModel, z: complex, horizon: int, ceiling: float = CEILING,
            ang_tol: float = ANGLE_TOL, backend: Optional[str] = None) -> OrbitRecord:
    if not f.has_complex_evaluator:
        raise ParameterError("%s has no complex evaluator" % f.name)
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    if not 1.0 < ceiling < 1e300:
        raise ParameterError("ceiling must lie well below the float maximum")
    z = complex(z)
    k = _kernels(backend)
    levels, mants, sw, esc = k.orbit(f.code, f.lam, list(f.coefficients), f.tower_ok,
                                     z.real, z.imag, horizon, ceiling, ang_tol)
    mags = tuple(TowerReal(int(a), float(b)) for a, b in zip(levels, mants))
    return OrbitRecord(z, mags, None if sw < 0 else sw, bool(esc), horizon, k.BACKEND)


@lru_cache(maxsize=256)
def threshold_sequences(f: GrowthModel, R: TowerReal, horizon: int,
                        m_list: tuple = M_LIST, eps_list: tuple = EPS_LIST):
    """[(label, m, eps, [R, s(R), s^2(R), ...])], strongest first: M, then
    mu_{m,eps} for m ascending and eps descending. Sequences stop early at a
    domain error."""
    seqs = [("FAST", None, None, lambda r: exp_t(max_modulus_log(f, r)))]
    for m in sorted(m_list):
        for eps in sorted(eps_list, reverse=True):
            seqs.append(("QM", m, eps, lambda r, m=m, eps=eps: mu(f, m, eps, r)))
    out = []
    for label, m, eps, step in seqs:
        vals = [R]
        try:
            for _ in range(horizon):
                vals.append(step(vals[-1]))
        except DomainError:
            pass
        out.append((label, m, eps, tuple(vals)))
    return tuple(out)


def packed_thresholds(f, R, horizon, m_list=M_LIST, eps_list=EPS_LIST):
    seqs = threshold_sequences(f, as_tower(R), horizon, tuple(m_list), tuple(eps_list))
    th_levels = [[v.level for v in s[3]] for s in seqs]
    th_mants = [[v.mantissa for v in s[3]] for s in seqs]
    th_len = [len(s[3]) - 1 for s in seqs]
    labels = [(s[0], s[1], s[2]) for s in seqs]
    return labels, th_levels, th_mants, th_len


def _check_R(f, R):
    if cmp(f.M(R), R) <= 0:
        raise ParameterError("need M(R) > R, R = %s" % R)


def escape_class_from_index(labels, s: int, ell: int, horizon: int, R) -> EscapeClass:
    if s == -2:
        return EscapeClass(EscapeVerdict.NOT_ESCAPED_BY_HORIZON, None, None, 0, horizon, R)
    if s == -1:
        return EscapeClass(EscapeVerdict.ESCAPING_UNCLASSIFIED, None, None, 0, horizon, R)
    kind, m, eps = labels[s]
    if kind == "FAST":
        return EscapeClass(EscapeVerdict.FAST, None, None, ell, horizon, R)
    v = EscapeVerdict.QUITE_FAST if m == 1 else EscapeVerdict.QM
    return EscapeClass(v, m, eps, ell, horizon, R)


def classify_escape(f: GrowthModel, record: OrbitRecord, R=None, m_list=M_LIST,
                    eps_list=EPS_LIST, ell_max: int = ELL_MAX,
                    backend: Optional[str] = None) -> EscapeClass:
    """Strongest verdict whose inequality holds at every available step
    n >= 1 with n + ell within the computed orbit."""
    R = as_tower(f.R_min if R is None else R)
    _check_R(f, R)
    if not record.magnitudes:
        raise ParameterError("empty orbit")
    horizon = len(record.magnitudes) - 1
    labels, tl, tm, tn = packed_thresholds(f, R, max(horizon, 1), m_list, eps_list)
    levels = [v.level for v in record.magnitudes]
    mants = [v.mantissa for v in record.magnitudes]
    s, ell = _kernels(backend).classify(levels, mants, len(levels), tl, tm, tn, ell_max,
                                        R.level, R.mantissa, TAU)
    return escape_class_from_index(labels, s, ell, record.horizon, R)


def hierarchy_audit(f: GrowthModel, record: OrbitRecord, R=None, m_list=M_LIST,
                    eps_list=EPS_LIST, ell_max: int = ELL_MAX) -> list[AuditRow]:
    """Truth table of every defining inequality over the finite orbit."""
    R = as_tower(f.R_min if R is None else R)
    _check_R(f, R)
    horizon = max(len(record.magnitudes) - 1, 1)
    labels, tl, tm, tn = packed_thresholds(f, R, horizon, m_list, eps_list)
    levels = [v.level for v in record.magnitudes]
    mants = [v.mantissa for v in record.magnitudes]
    rows = []
    for s, (kind, m, eps) in enumerate(labels):
        for ell in range(ell_max + 1):
            h = core.holds(levels, mants, len(levels), tl[s], tm[s], tn[s], ell, TAU)
            rows.append(AuditRow(kind, m, eps, ell, h == 1))
    return rows


def audit_is_nested(rows: Sequence[AuditRow]) -> bool:
    """False when some FAST row holds while a QM row at the same ell fails."""
    for ell in {r.ell for r in rows}:
        fast = [r.holds for r in rows if r.ell == ell and r.condition == "FAST"]
        qm = [r.holds for r in rows if r.ell == ell and r.condition == "QM"]
        if any(fast) and not all(qm):
            return False
    return True


def parse_complex(text: str) -> complex:
    """Accepts '1.5-2i', '0.0+3.14159i', '3', '-2.5j'."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise ValueError("not a complex number: %r" % text) from None


__all__ = [
    "EscapeVerdict", "OrbitRecord", "EscapeClass", "AuditRow", "iterate",
    "classify_escape", "hierarchy_audit", "audit_is_nested", "threshold_sequences",
    "packed_thresholds", "parse_complex", "CEILING", "ANGLE_TOL",
]
