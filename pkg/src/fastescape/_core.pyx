# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Operation-for-operation twin of ``_core_py``; any change
here must be mirrored there so the two backends stay bit-identical."""
from libc.math cimport atan2, cos, cosh, exp, fabs, log, log1p, sin, sinh, sqrt, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np

from .errors import DomainError

E = 2.718281828459045
LN2 = 0.6931471805599453
LOG_FLOAT_MAX = 709.782712893384

LAMBDA_EXP = 0
COSH = 1
EXP_SQUARE = 2
POLY = 3

BACKEND = "cython"

cdef double _E = 2.718281828459045
cdef double _LN2 = 0.6931471805599453
cdef double _LOGMAX = 709.782712893384


cdef struct TR:
    int l
    double m


cdef inline TR mk(int l, double m) noexcept nogil:
    cdef TR r
    r.l = l
    r.m = m
    return r


cdef inline TR bad() noexcept nogil:
    return mk(-1, 0.0)


cdef inline bint isbad(double m) noexcept nogil:
    return m != m or m == INFINITY or m == -INFINITY


cdef TR c_norm(int level, double m) noexcept nogil:
    if level < 0 or isbad(m):
        return bad()
    while True:
        if m >= _E:
            m = log(m)
            level += 1
            if m < 1.0:
                m = 1.0
        elif level > 0 and m < 1.0:
            m = exp(m)
            level -= 1
        else:
            return mk(level, m)


cdef TR c_log(TR v) noexcept nogil:
    if v.l < 0:
        return v
    if v.l > 0:
        return mk(v.l - 1, v.m)
    if v.m <= 0.0:
        return bad()
    return c_norm(0, log(v.m))


cdef TR c_exp(TR v) noexcept nogil:
    if v.l < 0:
        return v
    if v.l > 0:
        return mk(v.l + 1, v.m)
    if v.m < 1.0:
        return c_norm(0, exp(v.m))
    return c_norm(1, v.m)


cdef double c_float(int level, double m) noexcept nogil:
    cdef double x = m
    cdef int i
    for i in range(level):
        if x > _LOGMAX:
            return INFINITY
        x = exp(x)
    return x


cdef TR c_add_scalar(TR v, double c) noexcept nogil:
    cdef double w, lw, ratio
    if v.l < 0:
        return v
    if c == 0.0:
        return v
    if v.l == 0:
        return c_norm(0, v.m + c)
    w = c_float(v.l, v.m)
    if w != INFINITY:
        if fabs(c) < w * 1e-17:
            return v
        return c_norm(0, w + c)
    lw = c_float(v.l - 1, v.m)
    if lw == INFINITY:
        return v
    ratio = exp(log(fabs(c)) - lw)
    if ratio < 1e-17:
        return v
    if c < 0.0:
        ratio = -ratio
    return c_exp(c_norm(0, lw + log1p(ratio)))


cdef TR c_scale(TR v, double a) noexcept nogil:
    cdef double w, y
    if v.l < 0 or not a > 0.0:
        return bad()
    if a == 1.0:
        return v
    if v.l == 0:
        return c_norm(0, v.m * a)
    w = c_float(v.l, v.m)
    if w != INFINITY:
        y = w * a
        if y != INFINITY:
            return c_norm(0, y)
    return c_exp(c_add_scalar(c_log(v), log(a)))


cdef TR c_pow(TR v, double k) noexcept nogil:
    if v.l < 0 or not k > 0.0:
        return bad()
    if v.l == 0 and v.m <= 0.0:
        return bad()
    if k == 1.0:
        return v
    return c_exp(c_scale(c_log(v), k))


cdef int c_cmp(int l1, double m1, int l2, double m2, double tol) noexcept nogil:
    cdef double a, b, d, big
    if l1 - l2 >= 2:
        return 1
    if l2 - l1 >= 2:
        return -1
    while True:
        a = c_float(l1, m1)
        b = c_float(l2, m2)
        if a != INFINITY and b != INFINITY:
            d = a - b
            big = fabs(a)
            if fabs(b) > big:
                big = fabs(b)
            if fabs(d) <= tol * big:
                return 0
            return 1 if d > 0.0 else -1
        l1 -= 1
        l2 -= 1


cdef TR c_sub(TR x, TR y) noexcept nogil:
    cdef double wx, d, df, ratio
    cdef int c
    cdef TR dd
    if x.l < 0 or y.l < 0:
        return bad()
    if y.l == 0:
        return c_add_scalar(x, -y.m)
    if x.l == 0:
        return bad()
    wx = c_float(x.l, x.m)
    if wx != INFINITY:
        d = wx - c_float(y.l, y.m)
        if d < 0.0:
            if d < -1e-12 * wx:
                return bad()
            d = 0.0
        return c_norm(0, d)
    c = c_cmp(x.l - 1, x.m, y.l - 1, y.m, 0.0)
    if c <= 0:
        if c < 0 and c_cmp(x.l - 1, x.m, y.l - 1, y.m, 1e-12) != 0:
            return bad()
        return mk(0, 0.0)
    dd = c_sub(mk(x.l - 1, x.m), mk(y.l - 1, y.m))
    if dd.l < 0:
        return dd
    df = c_float(dd.l, dd.m)
    if df > 745.0:
        return x
    ratio = exp(-df)
    if ratio >= 1.0:
        return mk(0, 0.0)
    return c_exp(c_add_scalar(mk(x.l - 1, x.m), log1p(-ratio)))


cdef TR c_add(TR x, TR y) noexcept nogil:
    cdef TR t, dd
    cdef double wx, s, df
    if x.l < 0 or y.l < 0:
        return bad()
    if c_cmp(x.l, x.m, y.l, y.m, 0.0) < 0:
        t = x
        x = y
        y = t
    if y.l == 0:
        return c_add_scalar(x, y.m)
    wx = c_float(x.l, x.m)
    if wx != INFINITY:
        s = wx + c_float(y.l, y.m)
        if s != INFINITY:
            return c_norm(0, s)
    dd = c_sub(mk(x.l - 1, x.m), mk(y.l - 1, y.m))
    if dd.l < 0:
        return dd
    df = c_float(dd.l, dd.m)
    if df > 745.0:
        return x
    return c_exp(c_add_scalar(mk(x.l - 1, x.m), log1p(exp(-df))))


# --- growth of the catalog maps on the positive ray -------------------------

cdef double c_horner(const double* coeffs, int n, double x) noexcept nogil:
    cdef double p = 0.0
    cdef int j
    for j in range(n - 1, -1, -1):
        p = p * x + coeffs[j]
    return p


cdef int c_degree(const double* coeffs, int n) noexcept nogil:
    cdef int d = n - 1
    while d > 0 and coeffs[d] == 0.0:
        d -= 1
    return d


cdef TR c_logm_step(int kind, double lam, const double* coeffs, int n, TR v) noexcept nogil:
    cdef double x, p, ad, s
    cdef int d, j
    if v.l < 0:
        return v
    if kind == 0:
        return c_add_scalar(v, log(lam))
    if kind == 1:
        x = c_float(v.l, v.m)
        if x <= 20.0:
            return c_norm(0, log(cosh(x)))
        return c_add_scalar(v, -_LN2)
    if kind == 2:
        return c_pow(v, 2.0)
    if kind == 3:
        x = c_float(v.l, v.m)
        if x != INFINITY:
            p = c_horner(coeffs, n, x)
            if p != INFINITY and p > 0.0:
                return c_norm(0, log(p))
        d = c_degree(coeffs, n)
        ad = coeffs[d]
        s = 0.0
        if x != INFINITY:
            for j in range(d):
                s += (coeffs[j] / ad) * exp((j - d) * log(x))
        return c_add_scalar(c_scale(c_log(v), <double>d), log(ad) + log1p(s))
    return bad()


cdef void c_eval(int kind, double lam, const double* coeffs, int n,
                 double zr, double zi, double* wr, double* wi) noexcept nogil:
    cdef double ex, ur, ui, pr, pi, tr
    cdef int j
    if kind == 0:
        ex = lam * exp(zr)
        wr[0] = ex * cos(zi)
        wi[0] = ex * sin(zi)
        return
    if kind == 1:
        wr[0] = cosh(zr) * cos(zi)
        wi[0] = sinh(zr) * sin(zi)
        return
    if kind == 2:
        ur = zr * zr - zi * zi
        ui = 2.0 * zr * zi
        ex = exp(ur)
        wr[0] = ex * cos(ui)
        wi[0] = ex * sin(ui)
        return
    pr = 0.0
    pi = 0.0
    for j in range(n - 1, -1, -1):
        tr = pr * zr - pi * zi + coeffs[j]
        pi = pr * zi + pi * zr
        pr = tr
    wr[0] = pr
    wi[0] = pi


cdef double c_log_modulus(double wr, double wi) noexcept nogil:
    cdef double a = fabs(wr)
    cdef double b = fabs(wi)
    cdef double t, q
    if a < b:
        t = a
        a = b
        b = t
    if a == 0.0:
        return -INFINITY
    q = b / a
    return log(a) + 0.5 * log1p(q * q)


cdef void c_log_abs_arg(int kind, double lam, const double* coeffs, int n,
                        double zr, double zi, double* L, double* th) noexcept nogil:
    cdef double wr, wi, ui, t
    cdef int d
    if kind == 0:
        L[0] = zr + log(lam)
        th[0] = atan2(sin(zi), cos(zi))
        return
    if kind == 1:
        if zr > 20.0:
            L[0] = zr - _LN2
            th[0] = atan2(sin(zi), cos(zi))
            return
        if zr < -20.0:
            L[0] = -zr - _LN2
            th[0] = atan2(-sin(zi), cos(zi))
            return
        c_eval(kind, lam, coeffs, n, zr, zi, &wr, &wi)
        L[0] = c_log_modulus(wr, wi)
        th[0] = atan2(wi, wr)
        return
    if kind == 2:
        ui = 2.0 * zr * zi
        L[0] = zr * zr - zi * zi
        th[0] = atan2(sin(ui), cos(ui))
        return
    c_eval(kind, lam, coeffs, n, zr, zi, &wr, &wi)
    if fabs(wr) != INFINITY and fabs(wi) != INFINITY and wr == wr and wi == wi:
        L[0] = c_log_modulus(wr, wi)
        th[0] = atan2(wi, wr)
        return
    d = c_degree(coeffs, n)
    t = d * atan2(zi, zr)
    L[0] = log(fabs(coeffs[d])) + d * c_log_modulus(zr, zi)
    th[0] = atan2(sin(t), cos(t))


cdef int c_orbit(int kind, double lam, const double* coeffs, int n, bint tower_ok,
                 double zr, double zi, int horizon, double ceiling, double ang_tol,
                 int* levels, double* mants, int* switch, bint* escaped) noexcept nogil:
    """Fills levels/mants (capacity horizon+1); returns the count, -1 on a bad start."""
    cdef TR v, g
    cdef double L, th, log_ceiling, wr, wi
    cdef int j = 0
    cdef int cnt = 0
    v = c_norm(0, sqrt(zr * zr + zi * zi))
    if v.l < 0:
        return -1
    levels[0] = v.l
    mants[0] = v.m
    cnt = 1
    log_ceiling = log(ceiling)
    switch[0] = -1
    escaped[0] = False
    while j < horizon:
        c_log_abs_arg(kind, lam, coeffs, n, zr, zi, &L, &th)
        if L <= log_ceiling:
            c_eval(kind, lam, coeffs, n, zr, zi, &wr, &wi)
            zr = wr
            zi = wi
            v = c_norm(0, sqrt(zr * zr + zi * zi))
            if v.l < 0:
                escaped[0] = True
                break
            levels[cnt] = v.l
            mants[cnt] = v.m
            cnt += 1
            j += 1
            continue
        v = c_exp(c_norm(0, L))
        if v.l < 0:
            escaped[0] = True
            break
        levels[cnt] = v.l
        mants[cnt] = v.m
        cnt += 1
        j += 1
        if tower_ok and fabs(th) <= ang_tol:
            switch[0] = j
            while j < horizon:
                g = c_exp(c_logm_step(kind, lam, coeffs, n, v))
                if g.l < 0:
                    escaped[0] = True
                    break
                v = g
                levels[cnt] = v.l
                mants[cnt] = v.m
                cnt += 1
                j += 1
        else:
            escaped[0] = True
        break
    return cnt


cdef int c_holds(const int* levels, const double* mants, int n_mag,
                 const int* thl, const double* thm, int th_len, int ell,
                 double tol) noexcept nogil:
    cdef int k, idx
    cdef int count = 0
    for k in range(1, th_len + 1):
        idx = k + ell
        if idx >= n_mag:
            break
        if c_cmp(levels[idx], mants[idx], thl[k], thm[k], tol) < 0:
            return 0
        count += 1
    return 1 if count > 0 else -1


cdef void c_classify(const int* levels, const double* mants, int n_mag,
                     const int* thl, const double* thm, const int* th_len,
                     int n_seq, int stride, int ell_max, int r_level,
                     double r_mant, double tol, int* seq, int* ell_out) noexcept nogil:
    cdef int s, ell
    cdef int last = n_mag - 1
    if c_cmp(levels[last], mants[last], r_level, r_mant, tol) <= 0:
        seq[0] = -2
        ell_out[0] = 0
        return
    for s in range(n_seq):
        for ell in range(ell_max + 1):
            if c_holds(levels, mants, n_mag, thl + s * stride, thm + s * stride,
                       th_len[s], ell, tol) == 1:
                seq[0] = s
                ell_out[0] = ell
                return
    seq[0] = -1
    ell_out[0] = 0


# --- Python-facing wrappers ---------------------------------------------------

cdef tuple _out(TR v, str what):
    if v.l < 0:
        raise DomainError("%s outside its domain" % what)
    return (v.l, v.m)


def t_norm(level, m):
    if level < 0:
        raise DomainError("cannot normalize tower (%r, %r)" % (level, m))
    return _out(c_norm(level, m), "normalize (%r, %r)" % (level, m))


def t_log(int level, double m):
    if level == 0 and m <= 0.0:
        raise DomainError("log of non-positive value %r" % m)
    return _out(c_log(mk(level, m)), "log")


def t_exp(int level, double m):
    return _out(c_exp(mk(level, m)), "exp")


def t_to_float(int level, double m):
    return c_float(level, m)


def t_add_scalar(int level, double m, double c):
    return _out(c_add_scalar(mk(level, m), c), "shift")


def t_scale(int level, double m, double a):
    if not a > 0.0:
        raise DomainError("scale factor must be positive, got %r" % a)
    return _out(c_scale(mk(level, m), a), "scale")


def t_pow(int level, double m, double k):
    if not k > 0.0:
        raise DomainError("power must be positive, got %r" % k)
    if level == 0 and m <= 0.0:
        raise DomainError("power of non-positive value %r" % m)
    return _out(c_pow(mk(level, m), k), "power")


def t_cmp(int l1, double m1, int l2, double m2, double tol):
    return c_cmp(l1, m1, l2, m2, tol)


def t_sub(int l1, double m1, int l2, double m2):
    cdef TR r = c_sub(mk(l1, m1), mk(l2, m2))
    if r.l < 0:
        raise DomainError("subtraction would be negative")
    return (r.l, r.m)


def t_add(int l1, double m1, int l2, double m2):
    return _out(c_add(mk(l1, m1), mk(l2, m2)), "addition")


def _coeff_array(coeffs):
    a = np.ascontiguousarray(coeffs if len(coeffs) else [0.0], dtype=np.float64)
    return a


def logm_step(int kind, double lam, coeffs, int level, double m):
    cdef double[::1] c = _coeff_array(coeffs)
    if kind < 0 or kind > 3:
        raise DomainError("unknown kind %r" % kind)
    return _out(c_logm_step(kind, lam, &c[0], len(coeffs), mk(level, m)), "log M")


def c_eval_py(int kind, double lam, coeffs, double zr, double zi):
    cdef double[::1] c = _coeff_array(coeffs)
    cdef double wr, wi
    c_eval(kind, lam, &c[0], len(coeffs), zr, zi, &wr, &wi)
    return wr, wi


def log_abs_arg(int kind, double lam, coeffs, double zr, double zi):
    cdef double[::1] c = _coeff_array(coeffs)
    cdef double L, th
    c_log_abs_arg(kind, lam, &c[0], len(coeffs), zr, zi, &L, &th)
    return L, th


def orbit(int kind, double lam, coeffs, bint tower_ok, double zr, double zi,
          int horizon, double ceiling, double ang_tol):
    cdef double[::1] c = _coeff_array(coeffs)
    cdef int[::1] lv = np.zeros(horizon + 1, dtype=np.intc)
    cdef double[::1] mv = np.zeros(horizon + 1, dtype=np.float64)
    cdef int sw
    cdef bint esc
    cdef int cnt = c_orbit(kind, lam, &c[0], len(coeffs), tower_ok, zr, zi, horizon,
                           ceiling, ang_tol, &lv[0], &mv[0], &sw, &esc)
    if cnt < 0:
        raise DomainError("cannot take modulus of start point")
    return ([lv[i] for i in range(cnt)], [mv[i] for i in range(cnt)], sw, bool(esc))


def _pack(th_levels, th_mants, th_len):
    n_seq = len(th_len)
    stride = 1
    for s in range(n_seq):
        stride = max(stride, th_len[s] + 1)
    L = np.zeros((max(n_seq, 1), stride), dtype=np.intc)
    M = np.zeros((max(n_seq, 1), stride), dtype=np.float64)
    for s in range(n_seq):
        for k in range(th_len[s] + 1):
            L[s, k] = th_levels[s][k]
            M[s, k] = th_mants[s][k]
    T = np.zeros(max(n_seq, 1), dtype=np.intc)
    for s in range(n_seq):
        T[s] = th_len[s]
    return L, M, T, n_seq, stride


def holds(levels, mants, int n_mag, th_levels, th_mants, int th_len, int ell, double tol):
    cdef int[::1] lv = np.ascontiguousarray(list(levels) + [0], dtype=np.intc)
    cdef double[::1] mv = np.ascontiguousarray(list(mants) + [0.0], dtype=np.float64)
    cdef int[::1] tl = np.ascontiguousarray(list(th_levels[:th_len + 1]) + [0], dtype=np.intc)
    cdef double[::1] tm = np.ascontiguousarray(list(th_mants[:th_len + 1]) + [0.0], dtype=np.float64)
    return c_holds(&lv[0], &mv[0], n_mag, &tl[0], &tm[0], th_len, ell, tol)


def classify(levels, mants, int n_mag, th_levels, th_mants, th_len, int ell_max,
             int r_level, double r_mant, double tol):
    cdef int[::1] lv = np.ascontiguousarray(levels, dtype=np.intc)
    cdef double[::1] mv = np.ascontiguousarray(mants, dtype=np.float64)
    L, M, T, n_seq, stride = _pack(th_levels, th_mants, th_len)
    cdef int[:, ::1] tl = L
    cdef double[:, ::1] tm = M
    cdef int[::1] tt = T
    cdef int s, e
    c_classify(&lv[0], &mv[0], n_mag, &tl[0, 0], &tm[0, 0], &tt[0], n_seq, stride,
               ell_max, r_level, r_mant, tol, &s, &e)
    return s, e


def render_rows(int kind, double lam, coeffs, bint tower_ok, xs, ys, int row_start,
                int row_stop, int horizon, double ceiling, double ang_tol, th_levels,
                th_mants, th_len, int ell_max, int r_level, double r_mant, double tol,
                out_seq, out_ell):
    cdef double[::1] c = _coeff_array(coeffs)
    cdef int nc = len(coeffs)
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    L, M, T, n_seq_py, stride_py = _pack(th_levels, th_mants, th_len)
    cdef int[:, ::1] tl = L
    cdef double[:, ::1] tm = M
    cdef int[::1] tt = T
    cdef int n_seq = n_seq_py
    cdef int stride = stride_py
    cdef int[:, ::1] os = out_seq
    cdef int[:, ::1] oe = out_ell
    cdef int nx = xv.shape[0]
    cdef int i, jx, cnt, sw, s, e
    cdef bint esc
    cdef int* lv
    cdef double* mv
    with nogil:
        lv = <int*> malloc((horizon + 1) * sizeof(int))
        mv = <double*> malloc((horizon + 1) * sizeof(double))
        for i in range(row_start, row_stop):
            for jx in range(nx):
                cnt = c_orbit(kind, lam, &c[0], nc, tower_ok, xv[jx], yv[i], horizon,
                              ceiling, ang_tol, lv, mv, &sw, &esc)
                if cnt < 0:
                    s = -1
                    e = 0
                else:
                    c_classify(lv, mv, cnt, &tl[0, 0], &tm[0, 0], &tt[0], n_seq, stride,
                               ell_max, r_level, r_mant, tol, &s, &e)
                os[i, jx] = s
                oe[i, jx] = e
        free(lv)
        free(mv)
