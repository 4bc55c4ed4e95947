"""Pure-Python kernels: tower arithmetic on (level, mantissa) pairs and the
per-point orbit/classification loop.

This module mirrors ``_core.pyx`` operation for operation so that both
backends produce bit-identical results. Keep the two files in step.

A tower pair ``(level, m)`` denotes ``exp^level(m)``. Canonical pairs have
``m`` in ``[1, e)`` whenever ``level >= 1``; level 0 holds every value below
``e`` (including zero and negatives).
"""
from math import atan2, cos, cosh, exp, inf, log, log1p, sin, sinh, sqrt

from .errors import DomainError

E = 2.718281828459045
LN2 = 0.6931471805599453
LOG_FLOAT_MAX = 709.782712893384

LAMBDA_EXP = 0
COSH = 1
EXP_SQUARE = 2
POLY = 3

BACKEND = "python"


def t_norm(level, m):
    if level < 0 or m != m or m == inf or m == -inf:
        raise DomainError("cannot normalize tower (%r, %r)" % (level, m))
    while True:
        if m >= E:
            m = log(m)
            level += 1
            if m < 1.0:
                m = 1.0
        elif level > 0 and m < 1.0:
            m = exp(m)
            level -= 1
        else:
            return level, m


def t_log(level, m):
    if level > 0:
        return level - 1, m
    if m <= 0.0:
        raise DomainError("log of non-positive value %r" % m)
    return t_norm(0, log(m))


def t_exp(level, m):
    if level > 0:
        return level + 1, m
    if m < 1.0:
        return t_norm(0, exp(m))
    return t_norm(1, m)


def t_to_float(level, m):
    x = m
    for _ in range(level):
        if x > LOG_FLOAT_MAX:
            return inf
        x = exp(x)
    return x


def t_add_scalar(level, m, c):
    if c == 0.0:
        return level, m
    if level == 0:
        return t_norm(0, m + c)
    w = t_to_float(level, m)
    if w != inf:
        if abs(c) < w * 1e-17:
            return level, m
        return t_norm(0, w + c)
    lw = t_to_float(level - 1, m)
    if lw == inf:
        return level, m
    ratio = exp(log(abs(c)) - lw)
    if ratio < 1e-17:
        return level, m
    if c < 0.0:
        ratio = -ratio
    return t_exp(*t_norm(0, lw + log1p(ratio)))


def t_scale(level, m, a):
    if not a > 0.0:
        raise DomainError("scale factor must be positive, got %r" % a)
    if a == 1.0:
        return level, m
    if level == 0:
        return t_norm(0, m * a)
    w = t_to_float(level, m)
    if w != inf:
        y = w * a
        if y != inf:
            return t_norm(0, y)
    ll, lm = t_log(level, m)
    return t_exp(*t_add_scalar(ll, lm, log(a)))


def t_pow(level, m, k):
    if not k > 0.0:
        raise DomainError("power must be positive, got %r" % k)
    if level == 0 and m <= 0.0:
        raise DomainError("power of non-positive value %r" % m)
    if k == 1.0:
        return level, m
    ll, lm = t_log(level, m)
    return t_exp(*t_scale(ll, lm, k))


def t_cmp(l1, m1, l2, m2, tol):
    if l1 - l2 >= 2:
        return 1
    if l2 - l1 >= 2:
        return -1
    while True:
        a = t_to_float(l1, m1)
        b = t_to_float(l2, m2)
        if a != inf and b != inf:
            d = a - b
            if abs(d) <= tol * max(abs(a), abs(b)):
                return 0
            return 1 if d > 0.0 else -1
        l1 -= 1
        l2 -= 1


def t_sub(l1, m1, l2, m2):
    """Tower of x - y for x >= y (y may be a level-0 value of any sign)."""
    if l2 == 0:
        return t_add_scalar(l1, m1, -m2)
    if l1 == 0:
        raise DomainError("subtraction would be negative")
    wx = t_to_float(l1, m1)
    if wx != inf:
        d = wx - t_to_float(l2, m2)
        if d < 0.0:
            if d < -1e-12 * wx:
                raise DomainError("subtraction would be negative")
            d = 0.0
        return t_norm(0, d)
    c = t_cmp(l1 - 1, m1, l2 - 1, m2, 0.0)
    if c <= 0:
        if c < 0 and t_cmp(l1 - 1, m1, l2 - 1, m2, 1e-12) != 0:
            raise DomainError("subtraction would be negative")
        return 0, 0.0
    dl, dm = t_sub(l1 - 1, m1, l2 - 1, m2)
    df = t_to_float(dl, dm)
    if df > 745.0:
        return l1, m1
    ratio = exp(-df)
    if ratio >= 1.0:
        return 0, 0.0
    return t_exp(*t_add_scalar(l1 - 1, m1, log1p(-ratio)))


def t_add(l1, m1, l2, m2):
    if t_cmp(l1, m1, l2, m2, 0.0) < 0:
        l1, m1, l2, m2 = l2, m2, l1, m1
    if l2 == 0:
        return t_add_scalar(l1, m1, m2)
    wx = t_to_float(l1, m1)
    if wx != inf:
        s = wx + t_to_float(l2, m2)
        if s != inf:
            return t_norm(0, s)
    dl, dm = t_sub(l1 - 1, m1, l2 - 1, m2)
    df = t_to_float(dl, dm)
    if df > 745.0:
        return l1, m1
    return t_exp(*t_add_scalar(l1 - 1, m1, log1p(exp(-df))))


# --- growth of the catalog maps on the positive ray -------------------------

def _horner(coeffs, x):
    p = 0.0
    for j in range(len(coeffs) - 1, -1, -1):
        p = p * x + coeffs[j]
    return p


def _degree(coeffs):
    d = len(coeffs) - 1
    while d > 0 and coeffs[d] == 0.0:
        d -= 1
    return d


def logm_step(kind, lam, coeffs, level, m):
    """Tower of log M(r) for the closed-form kinds, r given as a tower."""
    if kind == LAMBDA_EXP:
        return t_add_scalar(level, m, log(lam))
    if kind == COSH:
        x = t_to_float(level, m)
        if x <= 20.0:
            return t_norm(0, log(cosh(x)))
        return t_add_scalar(level, m, -LN2)
    if kind == EXP_SQUARE:
        return t_pow(level, m, 2.0)
    if kind == POLY:
        x = t_to_float(level, m)
        if x != inf:
            p = _horner(coeffs, x)
            if p != inf and p > 0.0:
                return t_norm(0, log(p))
        d = _degree(coeffs)
        ad = coeffs[d]
        s = 0.0
        if x != inf:
            for j in range(d):
                s += (coeffs[j] / ad) * exp((j - d) * log(x))
        ll, lm = t_log(level, m)
        sl, sm = t_scale(ll, lm, float(d))
        return t_add_scalar(sl, sm, log(ad) + log1p(s))
    raise DomainError("unknown kind %r" % kind)


def c_eval(kind, lam, coeffs, zr, zi):
    if kind == LAMBDA_EXP:
        ex = lam * exp(zr)
        return ex * cos(zi), ex * sin(zi)
    if kind == COSH:
        return cosh(zr) * cos(zi), sinh(zr) * sin(zi)
    if kind == EXP_SQUARE:
        ur = zr * zr - zi * zi
        ui = 2.0 * zr * zi
        ex = exp(ur)
        return ex * cos(ui), ex * sin(ui)
    pr = 0.0
    pi = 0.0
    for j in range(len(coeffs) - 1, -1, -1):
        tr = pr * zr - pi * zi + coeffs[j]
        pi = pr * zi + pi * zr
        pr = tr
    return pr, pi


c_eval_py = c_eval


def _log_modulus(wr, wi):
    a = abs(wr)
    b = abs(wi)
    if a < b:
        a, b = b, a
    if a == 0.0:
        return -inf
    q = b / a
    return log(a) + 0.5 * log1p(q * q)


def log_abs_arg(kind, lam, coeffs, zr, zi):
    """(log |f(z)|, arg f(z)) computed without forming f(z) when it would overflow."""
    if kind == LAMBDA_EXP:
        return zr + log(lam), atan2(sin(zi), cos(zi))
    if kind == COSH:
        if zr > 20.0:
            return zr - LN2, atan2(sin(zi), cos(zi))
        if zr < -20.0:
            return -zr - LN2, atan2(-sin(zi), cos(zi))
        wr, wi = c_eval(kind, lam, coeffs, zr, zi)
        return _log_modulus(wr, wi), atan2(wi, wr)
    if kind == EXP_SQUARE:
        ui = 2.0 * zr * zi
        return zr * zr - zi * zi, atan2(sin(ui), cos(ui))
    wr, wi = c_eval(kind, lam, coeffs, zr, zi)
    if abs(wr) != inf and abs(wi) != inf and wr == wr and wi == wi:
        return _log_modulus(wr, wi), atan2(wi, wr)
    d = _degree(coeffs)
    th = d * atan2(zi, zr)
    return (log(abs(coeffs[d])) + d * _log_modulus(zr, zi),
            atan2(sin(th), cos(th)))


def orbit(kind, lam, coeffs, tower_ok, zr, zi, horizon, ceiling, ang_tol):
    """Magnitudes |f^j(z)|, j = 0..horizon, as towers.

    Returns ``(levels, mants, switch_index, escaped_level0)``; switch_index
    is -1 when the tower backend was never used.
    """
    levels = []
    mants = []
    lv, mv = t_norm(0, sqrt(zr * zr + zi * zi))
    levels.append(lv)
    mants.append(mv)
    log_ceiling = log(ceiling)
    switch = -1
    escaped = False
    j = 0
    while j < horizon:
        L, th = log_abs_arg(kind, lam, coeffs, zr, zi)
        if L <= log_ceiling:
            zr, zi = c_eval(kind, lam, coeffs, zr, zi)
            lv, mv = t_norm(0, sqrt(zr * zr + zi * zi))
            levels.append(lv)
            mants.append(mv)
            j += 1
            continue
        lv, mv = t_exp(*t_norm(0, L))
        levels.append(lv)
        mants.append(mv)
        j += 1
        if tower_ok and abs(th) <= ang_tol:
            switch = j
            while j < horizon:
                try:
                    gl, gm = logm_step(kind, lam, coeffs, lv, mv)
                    lv, mv = t_exp(gl, gm)
                except DomainError:
                    escaped = True
                    break
                levels.append(lv)
                mants.append(mv)
                j += 1
        else:
            escaped = True
        break
    return levels, mants, switch, escaped


def holds(levels, mants, n_mag, th_levels, th_mants, th_len, ell, tol):
    """1 if |f^{n+ell}| >= threshold_n for every available n >= 1, 0 if some
    step fails, -1 if no step is available."""
    count = 0
    for k in range(1, th_len + 1):
        idx = k + ell
        if idx >= n_mag:
            break
        if t_cmp(levels[idx], mants[idx], th_levels[k], th_mants[k], tol) < 0:
            return 0
        count += 1
    return 1 if count > 0 else -1


def classify(levels, mants, n_mag, th_levels, th_mants, th_len, ell_max,
             r_level, r_mant, tol):
    """Strongest (sequence, ell) satisfied; sequence -2 means not escaped by
    the horizon, -1 escaping but unclassified."""
    last = n_mag - 1
    if t_cmp(levels[last], mants[last], r_level, r_mant, tol) <= 0:
        return -2, 0
    for s in range(len(th_len)):
        for ell in range(ell_max + 1):
            if holds(levels, mants, n_mag, th_levels[s], th_mants[s],
                     th_len[s], ell, tol) == 1:
                return s, ell
    return -1, 0


def render_rows(kind, lam, coeffs, tower_ok, xs, ys, row_start, row_stop,
                horizon, ceiling, ang_tol, th_levels, th_mants, th_len,
                ell_max, r_level, r_mant, tol, out_seq, out_ell):
    coeffs = [float(c) for c in coeffs]
    xs = [float(x) for x in xs]
    th_levels = [[int(v) for v in row] for row in th_levels]
    th_mants = [[float(v) for v in row] for row in th_mants]
    th_len = [int(v) for v in th_len]
    for i in range(row_start, row_stop):
        y = float(ys[i])
        for jx in range(len(xs)):
            try:
                levels, mants, _, _ = orbit(kind, lam, coeffs, tower_ok, xs[jx], y,
                                            horizon, ceiling, ang_tol)
            except DomainError:
                s, ell = -1, 0
            else:
                s, ell = classify(levels, mants, len(levels), th_levels, th_mants,
                                  th_len, ell_max, r_level, r_mant, tol)
            out_seq[i, jx] = s
            out_ell[i, jx] = ell
