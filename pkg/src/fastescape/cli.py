"""Command line entry point: catalog, eval, check, classify, render, suite."""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import growthfn as gf
from . import regularity as rg
from .errors import CatalogError, DomainError, ParameterError
from .orbit import classify_escape, iterate, parse_complex
from .render import RenderJob, render, write_histogram, write_ppm
from .tower import TowerReal, as_tower

CLASS_FIELDS = ["fn", "re", "im", "verdict", "m", "eps", "ell", "horizon"]


@dataclass
class RunConfig:
    catalog_path: Optional[str] = None
    output_dir: str = "suite_out"
    eps_menu: tuple = rg.EPS_MENU
    k_menu: tuple = rg.K_MENU
    m_list: tuple = (1, 2, 3)
    horizon: int = 30
    ell_max: int = 8
    seed: int = 12345
    random_seeds: int = 16
    defaults: dict = field(default_factory=dict)

    def validate(self):
        if not self.eps_menu or not self.k_menu or not self.m_list:
            raise ParameterError("menus must be nonempty")
        if self.horizon < 1:
            raise ParameterError("horizon must be at least 1")
        return self


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise CatalogError("cannot read config %s: %s" % (path, exc)) from None
    cfg = RunConfig()
    if parser.has_section("run"):
        sec = parser["run"]
        if "catalog_path" in sec:
            cfg.catalog_path = sec["catalog_path"]
        if "output_dir" in sec:
            cfg.output_dir = sec["output_dir"]
        if "eps_menu" in sec:
            cfg.eps_menu = _floats(sec["eps_menu"])
        if "k_menu" in sec:
            cfg.k_menu = _floats(sec["k_menu"])
        if "m_list" in sec:
            cfg.m_list = _ints(sec["m_list"])
        for key in ("horizon", "ell_max", "seed", "random_seeds"):
            if key in sec:
                setattr(cfg, key, int(sec[key]))
    if parser.has_section("defaults"):
        cfg.defaults = dict(parser["defaults"])
    return cfg.validate()


def _tower_arg(text: str) -> TowerReal:
    text = text.strip()
    if text.startswith("T("):
        return TowerReal.parse(text)
    return as_tower(float(text))


def _catalog(args):
    return gf.load_catalog(args.catalog)


# --- subcommands --------------------------------------------------------------

def cmd_catalog(args, out):
    cat = _catalog(args)
    for name, f in cat.items():
        r0 = str(f.r0) if f.r0 is not None else "-"
        print("%-12s %-14s %-11s R_min=%g r0=%s" % (name, f.kind.value, f.formula, f.R_min, r0),
              file=out)
    return 0


def cmd_eval(args, out):
    op = args.op
    if op == "psi":
        if args.t is None or args.m is None or args.n is None or args.p is None:
            raise ParameterError("psi needs --m, --n, --p and --t")
        print(gf.psi_m(args.n, args.m, args.p, _tower_arg(args.t)), file=out)
        return 0
    if args.fn is None:
        raise ParameterError("--fn is required")
    f = gf.get_model(args.fn, _catalog(args))
    need_r = op in ("logM", "M", "mu", "iterate_mu", "iterate_M")
    arg = args.r if need_r else args.t
    if arg is None and op != "order":
        raise ParameterError("--%s is required" % ("r" if need_r else "t"))
    if op == "logM":
        v = gf.max_modulus_log(f, _tower_arg(arg))
    elif op == "M":
        v = f.M(_tower_arg(arg))
    elif op == "mu":
        v = gf.mu(f, args.m or 1, args.eps, _tower_arg(arg))
    elif op == "iterate_mu":
        v = gf.iterate_mu(f, args.m or 1, args.eps, _tower_arg(arg), args.n or 0)
    elif op == "iterate_M":
        v = gf.iterate_M(f, _tower_arg(arg), args.n or 0)
    elif op == "phi":
        v = gf.phi_m(f, args.m or 2, _tower_arg(arg))
    elif op == "phi_eps":
        v = gf.phi_m_eps(f, args.m or 2, args.eps, _tower_arg(arg))
    else:
        grid = [10.0 ** (j / 2.0) for j in range(2, 22)]
        hi, lo = gf.estimate_order(f, grid)
        print("order_estimate=%r lower_order_estimate=%r (sampled, not limits)" % (hi, lo),
              file=out)
        return 0
    print(v, file=out)
    return 0


def _k_grid(args):
    if args.k is None:
        return rg.K_MENU
    return tuple(k for group in args.k for k in _floats(group))


def run_check(cid, args, catalog) -> rg.ConditionReport:
    f = gf.get_model(args.fn, catalog) if args.fn else None

    def need(*names):
        for n in names:
            if getattr(args, n) is None:
                raise ParameterError("%s needs --%s" % (cid, n.replace("_", "-")))

    if cid in ("theorem22", "m_log", "m_weak", "strong_log", "growth", "psi_phi") and f is None:
        raise ParameterError("%s needs --fn" % cid)
    if cid == "theorem22":
        need("eps")
        return rg.check_theorem22(f, args.m or 2, args.eps, args.c or 2.0, args.q or 0.5,
                                  args.n or 0)
    if cid == "lemma23":
        need("n", "a", "b")
        return rg.check_lemma23(args.n, args.p or 1.0, _floats(args.a), _floats(args.b))
    if cid == "m_log":
        need("m", "eps")
        return rg.check_m_log_regular(f, args.m, args.eps, _k_grid(args))
    if cid == "m_weak":
        need("m", "eps")
        R = _tower_arg(args.R) if args.R else as_tower(f.R_min)
        return rg.check_m_weak_regular(f, args.m, args.eps, R, args.horizon or 20)
    if cid == "strong_log":
        need("eps")
        return rg.check_strong_log_regular(f, args.eps, _k_grid(args))
    if cid == "growth":
        need("m", "n", "q", "q_tilde")
        return rg.check_growth_condition(f, args.m, args.n, args.q, args.q_tilde)
    if cid == "psi_phi":
        need("m", "n")
        return rg.check_psi_phi(f, args.m, args.n, args.q or 0.9, args.q_tilde or 1.1,
                                args.p or 2.0, args.d or 2.0)
    if cid == "lemma34":
        need("n", "d", "q")
        return rg.check_lemma34(args.n, args.d, args.q)
    if cid == "lemma52":
        need("eps")
        k = _k_grid(args)[0] if args.k else 2.0
        phi = f if f is not None else gf.sqrt_exp_phi
        return rg.check_lemma52_transfer(phi, args.eps, k)
    raise ParameterError("unknown condition %r" % cid)


def _csv_text(fields, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def cmd_check(args, out):
    rep = run_check(args.condition_id, args, _catalog(args))
    print(rep.summary(), file=out)
    for note in rep.notes:
        print("note: %s" % note, file=out)
    out.write(_csv_text(rg.REPORT_FIELDS, [rep.to_row()]))
    return 0


def class_row(fn, z, ec) -> dict:
    return {
        "fn": fn,
        "re": repr(z.real),
        "im": repr(z.imag),
        "verdict": ec.label,
        "m": "" if ec.m is None else str(ec.m),
        "eps": "" if ec.witness_eps is None else repr(ec.witness_eps),
        "ell": str(ec.witness_ell),
        "horizon": str(ec.horizon),
    }


def cmd_classify(args, out):
    f = gf.get_model(args.fn, _catalog(args))
    z = parse_complex(args.z)
    rec = iterate(f, z, args.horizon)
    R = _tower_arg(args.R) if args.R else as_tower(f.R_min)
    ec = classify_escape(f, rec, R, _ints(args.m_list), _floats(args.eps_list), args.ell_max)
    bits = [ec.label, "ell=%d" % ec.witness_ell, "horizon=%d" % ec.horizon, "R=%s" % R]
    if ec.witness_eps is not None:
        bits.insert(1, "eps=%r" % ec.witness_eps)
    if rec.backend_switch_index is not None:
        bits.append("tower_from_step=%d" % rec.backend_switch_index)
    if rec.escaped_level0:
        bits.append("left_positive_ray")
    print(" ".join(bits), file=out)
    out.write(_csv_text(CLASS_FIELDS, [class_row(f.name, z, ec)]))
    if args.dump:
        with open(args.dump, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "magnitude"])
            w.writerows(rec.rows())
    return 0


def cmd_render(args, out):
    cat = _catalog(args)
    job = RenderJob(args.fn, parse_complex(args.center), args.width, args.height, args.px,
                    args.py, R=float(args.R), m_list=_ints(args.m_list),
                    eps_list=_floats(args.eps_list), ell_max=args.ell_max,
                    horizon=args.horizon, shade_by_ell=args.shade)
    res = render(job, threads=args.threads, catalog=cat)
    write_ppm(args.out, res.image)
    if args.hist:
        write_histogram(args.hist, res.histogram)
    for key in sorted(res.histogram):
        print("%s %d" % (key, res.histogram[key]), file=out)
    return 0


# --- suite --------------------------------------------------------------------

def _mismatch(expected, got) -> bool:
    sat, vio = rg.Verdict.SATISFIED_ON_RANGE.value, rg.Verdict.VIOLATED.value
    return (expected == sat and got == vio) or (expected == vio and got == sat)


def run_suite(cfg: RunConfig, catalog_path=None):
    """Returns (report rows, classification rows, mismatches)."""
    cat = gf.load_catalog(catalog_path or cfg.catalog_path)
    reports = []
    mismatches = []

    def record(rep, f=None, m=None):
        reports.append(rep.to_row())
        if f is not None:
            exp = f.expected(rep.condition_id, m)
            if exp is not None and _mismatch(exp, rep.verdict.value):
                mismatches.append((f.name, rep.condition_id, m, exp, rep.verdict.value))

    for name, f in cat.items():
        for eps in cfg.eps_menu:
            record(rg.check_strong_log_regular(f, eps, cfg.k_menu), f)
            for m in cfg.m_list:
                rep = rg.check_m_log_regular(f, m, eps, cfg.k_menu)
                record(rep, f, m)
                if rep.verdict is rg.Verdict.SATISFIED_ON_RANGE and f.tower_ok:
                    record(rg.check_m_weak_from_m_log(f, rep, cfg.horizon), f, m)
        record(rg.check_theorem22(f, 2, 0.5, 2.0, 0.5, 0), f)
        if f.kind is not gf.GrowthKind.POWER_SERIES:
            record(rg.check_psi_phi(f, 2, 0), f)
        if f.kind is gf.GrowthKind.PIECEWISE_PHI:
            for eps in cfg.eps_menu:
                record(rg.check_lemma52_transfer(f, eps, 2.0), f)
    record(rg.check_lemma23(1, 2.0, (1.0,), (1.0,)))
    record(rg.check_lemma34(1, 2.0, 0.5))
    record(rg.check_lemma34(1, 0.4, 0.5))

    rng = random.Random(cfg.seed)
    classes = []
    fixed = [0j, 10 + 0j, 3.141592653589793j, 1 + 1j, -2 + 0j]
    for name, f in cat.items():
        if not f.has_complex_evaluator:
            continue
        seeds = fixed + [complex(round(rng.uniform(-10, 10), 6), round(rng.uniform(-10, 10), 6))
                         for _ in range(cfg.random_seeds)]
        R = as_tower(f.R_min)
        for z in seeds:
            rec = iterate(f, z, cfg.horizon)
            ec = classify_escape(f, rec, R, cfg.m_list, cfg.eps_menu, cfg.ell_max)
            classes.append(class_row(name, z, ec))
    return reports, classes, mismatches


def cmd_suite(args, out):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.random_seeds is not None:
        cfg.random_seeds = args.random_seeds
    reports, classes, mismatches = run_suite(cfg, args.catalog)
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "reports.csv"), "w", newline="") as fh:
        fh.write(_csv_text(rg.REPORT_FIELDS, reports))
    with open(os.path.join(cfg.output_dir, "classifications.csv"), "w", newline="") as fh:
        fh.write(_csv_text(CLASS_FIELDS, classes))
    counts = {}
    for r in reports:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    print("reports: %d (%s)" % (len(reports), ", ".join("%s=%d" % kv for kv in sorted(counts.items()))),
          file=out)
    print("classifications: %d" % len(classes), file=out)
    for fn, cid, m, exp, got in mismatches:
        print("MISMATCH %s %s%s expected %s got %s" % (fn, cid, "" if m is None else " m=%d" % m,
                                                     exp, got), file=out)
    print("suite %s" % ("passed" if not mismatches else "FAILED"), file=out)
    return 0 if not mismatches else 1


# --- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="fastescape", description=__doc__)
    p.add_argument("--catalog", help="catalog file (default: bundled catalog)")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list catalog entries")

    e = sub.add_parser("eval", help="evaluate a growth map")
    e.add_argument("--fn")
    e.add_argument("--op", required=True,
                   choices=["logM", "M", "mu", "iterate_mu", "iterate_M", "phi", "psi",
                            "phi_eps", "order"])
    e.add_argument("--m", type=int)
    e.add_argument("--eps", type=float, default=0.5)
    e.add_argument("--r")
    e.add_argument("--t")
    e.add_argument("--n", type=int)
    e.add_argument("--p", type=float)

    c = sub.add_parser("check", help="run one condition checker")
    c.add_argument("condition_id", choices=sorted(rg.CHECKERS))
    c.add_argument("--fn")
    c.add_argument("--m", type=int)
    c.add_argument("--eps", type=float)
    c.add_argument("--k", action="append", help="k value(s); repeat or comma-separate")
    c.add_argument("--q", type=float)
    c.add_argument("--q-tilde", dest="q_tilde", type=float)
    c.add_argument("--n", type=int)
    c.add_argument("--c", type=float)
    c.add_argument("--d", type=float)
    c.add_argument("--p", type=float)
    c.add_argument("--a", help="comma-separated a_1..a_n")
    c.add_argument("--b", help="comma-separated b_1..b_n")
    c.add_argument("--R")
    c.add_argument("--horizon", type=int)

    k = sub.add_parser("classify", help="classify the orbit of one point")
    k.add_argument("--fn", required=True)
    k.add_argument("--z", required=True)
    k.add_argument("--R")
    k.add_argument("--horizon", type=int, default=40)
    k.add_argument("--ell-max", dest="ell_max", type=int, default=8)
    k.add_argument("--m-list", dest="m_list", default="1,2,3")
    k.add_argument("--eps-list", dest="eps_list", default="0.25,0.5,0.75")
    k.add_argument("--dump", help="write the orbit magnitudes as CSV")

    r = sub.add_parser("render", help="render the classification of a rectangle")
    r.add_argument("--fn", required=True)
    r.add_argument("--center", default="0")
    r.add_argument("--width", type=float, default=4.0)
    r.add_argument("--height", type=float, default=4.0)
    r.add_argument("--px", type=int, default=128)
    r.add_argument("--py", type=int, default=128)
    r.add_argument("--R", default="2")
    r.add_argument("--horizon", type=int, default=30)
    r.add_argument("--ell-max", dest="ell_max", type=int, default=8)
    r.add_argument("--m-list", dest="m_list", default="1,2,3")
    r.add_argument("--eps-list", dest="eps_list", default="0.25,0.5,0.75")
    r.add_argument("--threads", type=int)
    r.add_argument("--shade", action="store_true", help="darken by witness ell")
    r.add_argument("--out", required=True)
    r.add_argument("--hist", help="write the verdict histogram as CSV")

    s = sub.add_parser("suite", help="run the acceptance battery over the catalog")
    s.add_argument("--config")
    s.add_argument("--output-dir", dest="output_dir")
    s.add_argument("--random-seeds", dest="random_seeds", type=int)
    return p


COMMANDS = {
    "catalog": cmd_catalog,
    "eval": cmd_eval,
    "check": cmd_check,
    "classify": cmd_classify,
    "render": cmd_render,
    "suite": cmd_suite,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except CatalogError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ParameterError, DomainError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
