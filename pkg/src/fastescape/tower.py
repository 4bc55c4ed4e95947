"""Magnitudes of the form exp^level(mantissa).

A :class:`TowerReal` is immutable. Canonical values keep the mantissa in
``[1, e)`` for ``level >= 1``, so taking a log is a level decrement and the
order is lexicographic on ``(level, mantissa)``. Level 0 carries every value
below ``e``, zero and negatives included.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import core
from .errors import DomainError

TAU = 1e-9
"""Relative tolerance used for ties in comparisons."""

E = core.E

_TEXT = re.compile(r"^\s*T\(\s*(\d+)\s*;\s*([^)\s]+)\s*\)\s*$")


@dataclass(frozen=True)
class TowerReal:
    level: int
    mantissa: float

    def __str__(self):
        return "T(%d;%r)" % (self.level, self.mantissa)

    @classmethod
    def parse(cls, text: str) -> "TowerReal":
        m = _TEXT.match(text)
        if not m:
            raise ValueError("not a tower literal: %r" % text)
        return normalize(int(m.group(1)), float(m.group(2)))

    @classmethod
    def from_float(cls, x: float) -> "TowerReal":
        return normalize(0, float(x))

    def to_float(self) -> float:
        """Value as a float; ``inf`` when it overflows."""
        return core.t_to_float(self.level, self.mantissa)

    def __lt__(self, other):
        return cmp(self, other) < 0

    def __le__(self, other):
        return cmp(self, other) <= 0

    def __gt__(self, other):
        return cmp(self, other) > 0

    def __ge__(self, other):
        return cmp(self, other) >= 0


def _wrap(pair) -> TowerReal:
    return TowerReal(int(pair[0]), float(pair[1]))


def as_tower(x) -> TowerReal:
    if isinstance(x, TowerReal):
        return x
    return TowerReal.from_float(float(x))


def normalize(level: int, mantissa: float) -> TowerReal:
    if level < 0:
        raise DomainError("negative level %r" % level)
    if level >= 1 and mantissa < 0:
        raise DomainError("negative mantissa %r at level %d" % (mantissa, level))
    return _wrap(core.t_norm(int(level), float(mantissa)))


def log_t(v: TowerReal) -> TowerReal:
    return _wrap(core.t_log(v.level, v.mantissa))


def exp_t(v: TowerReal) -> TowerReal:
    return _wrap(core.t_exp(v.level, v.mantissa))


def log_n(v: TowerReal, n: int, what: str = "log") -> TowerReal:
    """n-fold natural log; the error names the failing depth."""
    for depth in range(1, n + 1):
        try:
            v = log_t(v)
        except DomainError:
            raise DomainError("%s undefined at depth %d of %d" % (what, depth, n)) from None
    return v


def exp_n(v: TowerReal, n: int) -> TowerReal:
    for _ in range(n):
        v = exp_t(v)
    return v


def pow_t(v: TowerReal, k: float) -> TowerReal:
    return _wrap(core.t_pow(v.level, v.mantissa, float(k)))


def scale_t(v: TowerReal, a: float) -> TowerReal:
    return _wrap(core.t_scale(v.level, v.mantissa, float(a)))


def shift_t(v: TowerReal, c: float) -> TowerReal:
    """v + c for a float c."""
    return _wrap(core.t_add_scalar(v.level, v.mantissa, float(c)))


def _add(v: TowerReal, w: TowerReal) -> TowerReal:
    # only the piecewise growth curve needs tower sums
    return _wrap(core.t_add(v.level, v.mantissa, w.level, w.mantissa))


def _sub(v: TowerReal, w: TowerReal) -> TowerReal:
    return _wrap(core.t_sub(v.level, v.mantissa, w.level, w.mantissa))


def cmp(v: TowerReal, w: TowerReal, tol: float = 0.0) -> int:
    """-1, 0 or 1. With ``tol > 0`` values within that relative distance (at
    the lowest level where both are floats) compare equal."""
    return core.t_cmp(v.level, v.mantissa, w.level, w.mantissa, tol)


def isclose(v: TowerReal, w: TowerReal, tol: float = TAU) -> bool:
    return cmp(v, w, tol) == 0


def tower_grid(levels=range(0, 4), per_level: int = 64) -> list[TowerReal]:
    """Increasing tower-spaced grid: ``per_level`` mantissas ``1 + j(e-1)/per_level``
    on each level, starting at 1."""
    step = (E - 1.0) / per_level
    out = []
    for lv in levels:
        for j in range(per_level):
            out.append(normalize(lv, 1.0 + j * step))
    return out


ONE = TowerReal(0, 1.0)
