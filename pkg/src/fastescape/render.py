"""Plane renderings of the escape classification.

Rows are split into chunks and classified concurrently; every pixel depends
only on its own seed, so the image does not depend on the thread count.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from .errors import ParameterError
from .growthfn import GrowthModel, get_model
from .orbit import (ANGLE_TOL, CEILING, ELL_MAX, EPS_LIST, M_LIST, EscapeVerdict,
                    escape_class_from_index, packed_thresholds)
from .tower import TAU, as_tower

WHITE = (255, 255, 255)
YELLOW = (255, 255, 0)
BLUE = (0, 0, 255)
BLACK = (0, 0, 0)


def orange(m: int) -> tuple:
    """Orange ramp, darker as m grows."""
    g = max(165 - 45 * (m - 2), 40)
    r = max(255 - 25 * (m - 2), 120)
    return (r, g, 0)


DEFAULT_PALETTE = {
    "FAST": WHITE,
    "QUITE_FAST": YELLOW,
    "ESCAPING_UNCLASSIFIED": BLUE,
    "NOT_ESCAPED_BY_HORIZON": BLACK,
}


@dataclass(frozen=True)
class RenderJob:
    fn_name: str
    center: complex = 0j
    width: float = 4.0
    height: float = 4.0
    pixels_x: int = 64
    pixels_y: int = 64
    R: float = 2.0
    m_list: tuple = M_LIST
    eps_list: tuple = EPS_LIST
    ell_max: int = ELL_MAX
    horizon: int = 30
    palette: dict = field(default_factory=dict, compare=False, hash=False)
    shade_by_ell: bool = False
    ceiling: float = CEILING
    ang_tol: float = ANGLE_TOL

    def validate(self):
        if self.pixels_x < 1 or self.pixels_y < 1:
            raise ParameterError("resolution must be at least 1x1")
        if not (self.width > 0 and self.height > 0):
            raise ParameterError("rectangle must be nondegenerate")
        if self.horizon < 1 or self.ell_max < 0:
            raise ParameterError("need horizon >= 1 and ell_max >= 0")
        return self

    def axes(self):
        """Plane coordinates of pixel columns and rows; row pixels_y/2 sits on
        Im z = Im center."""
        cx, cy = self.center.real, self.center.imag
        xs = [cx + (i - self.pixels_x / 2) * self.width / self.pixels_x
              for i in range(self.pixels_x)]
        ys = [cy + (self.pixels_y / 2 - j) * self.height / self.pixels_y
              for j in range(self.pixels_y)]
        return xs, ys


@dataclass
class RenderResult:
    image: np.ndarray
    seq: np.ndarray
    ell: np.ndarray
    histogram: dict
    labels: list


def thread_count(requested: Optional[int] = None) -> int:
    n = requested if requested else (os.cpu_count() or 1)
    cap = os.environ.get("ESCAPE_SPEC_THREADS")
    if cap:
        try:
            n = min(n, max(int(cap), 1))
        except ValueError:
            pass
    return max(n, 1)


def _color(label, ell, palette, shade):
    kind, m = label
    if kind == "QM":
        key = "QUITE_FAST" if m == 1 else "QM%d" % m
        rgb = palette.get(key) or (YELLOW if m == 1 else orange(m))
    else:
        rgb = palette[kind]
    if shade and ell > 0:
        f = max(1.0 - 0.06 * ell, 0.4)
        rgb = tuple(int(c * f) for c in rgb)
    return rgb


def render(job: RenderJob, threads: Optional[int] = None, catalog: Optional[dict] = None,
           backend: Optional[str] = None) -> RenderResult:
    job.validate()
    f: GrowthModel = get_model(job.fn_name, catalog)
    if not f.has_complex_evaluator:
        raise ParameterError("%s has no complex evaluator" % f.name)
    R = as_tower(job.R)
    labels, tl, tm, tn = packed_thresholds(f, R, job.horizon, job.m_list, job.eps_list)
    xs, ys = job.axes()
    H, W = job.pixels_y, job.pixels_x
    seq = np.zeros((H, W), dtype=np.intc)
    ell = np.zeros((H, W), dtype=np.intc)
    k = core if backend is None else core.load_backend(backend)
    coeffs = list(f.coefficients)
    n = min(thread_count(threads), H)
    chunk = max(1, -(-H // (4 * n)))
    bounds = [(a, min(a + chunk, H)) for a in range(0, H, chunk)]

    def work(b):
        k.render_rows(f.code, f.lam, coeffs, f.tower_ok, xs, ys, b[0], b[1], job.horizon,
                      job.ceiling, job.ang_tol, tl, tm, tn, job.ell_max, R.level,
                      R.mantissa, TAU, seq, ell)

    if n == 1:
        for b in bounds:
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(work, bounds))

    palette = dict(DEFAULT_PALETTE)
    palette.update(job.palette)
    image = np.zeros((H, W, 3), dtype=np.uint8)
    hist = {}
    cache = {}
    for j in range(H):
        for i in range(W):
            s, e = int(seq[j, i]), int(ell[j, i])
            key = (s, e)
            if key not in cache:
                ec = escape_class_from_index(labels, s, e, job.horizon, R)
                if ec.verdict in (EscapeVerdict.QM, EscapeVerdict.QUITE_FAST):
                    lab = ("QM", ec.m)
                else:
                    lab = (ec.verdict.value, None)
                cache[key] = (ec.label, _color(lab, e, palette, job.shade_by_ell))
            name, rgb = cache[key]
            image[j, i] = rgb
            hist[name] = hist.get(name, 0) + 1
    return RenderResult(image, seq, ell, hist, labels)


def ppm_bytes(image: np.ndarray) -> bytes:
    h, w = image.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def write_ppm(path, image: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(image))


def write_histogram(path, hist: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["verdict", "count"])
        for key in sorted(hist):
            w.writerow([key, hist[key]])


__all__ = ["RenderJob", "RenderResult", "render", "write_ppm", "write_histogram",
           "ppm_bytes", "thread_count", "DEFAULT_PALETTE", "orange"]
