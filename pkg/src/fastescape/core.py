"""Backend selection for the numeric kernels.

The compiled extension is used when it imports; setting ``FASTESCAPE_PURE=1``
forces the pure-Python kernels. Both expose the same functions.
"""
import importlib
import os

if os.environ.get("FASTESCAPE_PURE") == "1":
    from . import _core_py as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:
        from . import _core_py as _impl

BACKEND = _impl.BACKEND

t_norm = _impl.t_norm
t_log = _impl.t_log
t_exp = _impl.t_exp
t_to_float = _impl.t_to_float
t_add_scalar = _impl.t_add_scalar
t_scale = _impl.t_scale
t_pow = _impl.t_pow
t_cmp = _impl.t_cmp
t_sub = _impl.t_sub
t_add = _impl.t_add
logm_step = _impl.logm_step
c_eval = _impl.c_eval_py
log_abs_arg = _impl.log_abs_arg
orbit = _impl.orbit
holds = _impl.holds
classify = _impl.classify
render_rows = _impl.render_rows

LAMBDA_EXP = _impl.LAMBDA_EXP
COSH = _impl.COSH
EXP_SQUARE = _impl.EXP_SQUARE
POLY = _impl.POLY
E = _impl.E


def load_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return importlib.import_module("fastescape._core_py")
    if name == "cython":
        return importlib.import_module("fastescape._core")
    raise ValueError("unknown backend %r" % name)
