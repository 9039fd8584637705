"""Command-line front end.

    liouville cr 0 1 2 3
    liouville verify decay --config power.cfg --out results
    liouville eval --config eval.cfg --out results

Exit codes: 0 pass, 1 failed assertion, 2 bad input or config,
3 evaluation left the branch-admissible neighbourhood.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import os
import sys

import numpy as np

from . import verify as V
from .config import ExperimentSpec, load_config
from .engine import DistributionHandle, GammaSampler, evaluate_samples
from .errors import BranchViolation, LiouvilleError, OutsideNeighborhood, ToleranceNotReached
from .projective import as_point, cross_ratio

VERIFY_NAMES = ("decay", "derivative", "rate", "holomorphy", "punctured-disk", "partition", "invariance")


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_json_safe(v.real), _json_safe(v.imag)]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else None
    return v


def write_json(path, obj):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(_json_safe(obj), fh, sort_keys=True)
        fh.write("\n")


def write_jsonl(path, records):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(_json_safe(r), sort_keys=True) + "\n")


# ------------------------------------------------------------------ cr

def cmd_cr(args):
    pts = [as_point(p) for p in args.points]
    cr = cross_ratio(*pts)
    lc = cmath.log(cr)
    print(f"{_num(cr)} {_num(lc)}")
    return 0


def _num(z):
    z = complex(z)
    if z.imag == 0:
        return format(z.real, ".15g")
    return f"{z.real:.15g}{z.imag:+.15g}j"


# ------------------------------------------------------------------ verify

def _merge(reports, name):
    out = V.Report(name, reports[0].columns)
    for r in reports:
        out.rows += r.rows
        out.passed &= r.passed
    out.info = {str(i): r.info for i, r in enumerate(reports)} if len(reports) > 1 else reports[0].info
    return out


def run_verify(name, spec: ExperimentSpec, seed=None):
    p = spec.params
    seed = V.SEED if seed is None else seed
    if name == "decay":
        return V.verify_decay(spec.family("power"), spec.t_values((0.25, 0.5, 1.0)),
                              n=spec.get("samples", 10 ** 4), eps=spec.eps, seed=seed)
    if name == "derivative":
        return V.verify_derivative_bound(spec.family("power"), r=spec.get("radius", 0.5),
                                         n=spec.get("samples", 10 ** 4), eps=spec.eps, seed=seed)
    if name == "rate":
        fam = spec.family("identity")
        return V.verify_rate(spec.xi("bump"), fam, spec.t_values([0.0])[0], p,
                             n_hi=spec.get("levels", 8))
    if name == "holomorphy":
        return V.verify_holomorphy(spec.xi("step"), spec.family("power"), spec.t_values([0.0])[0],
                                   spec.get("radius", 0.2), spec.get("m_points", 16), p)
    if name == "punctured-disk":
        return V.verify_punctured_disk(per_beta=spec.get("per_beta", 200), seed=seed)
    if name == "partition":
        return V.verify_partition(spec.get("n_boxes", 100), spec.get("levels", 6), seed=seed)
    if name == "invariance":
        fam, group, xi = spec.family("power"), spec.group(2.0), spec.xi("bump")
        reps = []
        for t in spec.t_values((0.3, 0.1j)):
            r = V.verify_group_invariance(xi, group, fam, t, p)
            for row in r.rows:
                row.update(t_re=complex(t).real, t_im=complex(t).imag)
            reps.append(r)
        rep = _merge(reps, "invariance")
        rep.columns = ["t_re", "t_im"] + rep.columns
        return rep
    raise ValueError(f"unknown verification {name!r}")


def cmd_verify(args):
    spec = _spec(args)
    rep = run_verify(args.name, spec, args.seed)
    base = os.path.join(args.out, f"verify-{args.name}")
    write_csv(base + ".csv", rep.columns, rep.rows)
    summary = {"pass": rep.passed, "worst_margin": rep.worst_margin, "samples": len(rep.rows), "info": rep.info}
    write_json(base + ".json", summary)
    print(json.dumps(_json_safe({k: summary[k] for k in ("pass", "worst_margin", "samples")})))
    return 0 if rep.passed else 1


# ------------------------------------------------------------------ eval

EVAL_COLUMNS = ["t_re", "t_im", "gamma_index", "p", "q", "r", "value_re", "value_im",
                "levels", "delta_last", "status"]


def _status(err):
    if err is None:
        return "ok"
    if isinstance(err, ToleranceNotReached):
        return "tolerance"
    if isinstance(err, BranchViolation):
        return "branch"
    return "degenerate"


def cmd_eval(args):
    spec = _spec(args)
    fam, group, xi = spec.family("identity"), spec.group(None), spec.xi("bump")
    sampler = GammaSampler(spec.m, args.seed)
    rows, traces, seminorms = [], [], {}
    code = 0
    for t in spec.t_values([0.0]):
        handle = DistributionHandle(fam, t, group, spec.params)
        best = None
        for idx, v, tr, err in evaluate_samples(handle, xi, sampler, spec.params.threads):
            p, q, r = sampler.triple(idx)
            st = _status(err)
            if isinstance(err, OutsideNeighborhood):
                code = 3
            elif err is not None and code == 0:
                code = 1
            rows.append({"t_re": handle.t.real, "t_im": handle.t.imag, "gamma_index": idx,
                         "p": p, "q": q, "r": r,
                         "value_re": None if v is None else v.real, "value_im": None if v is None else v.imag,
                         "levels": None if tr is None else tr.n_levels,
                         "delta_last": None if tr is None else tr.delta_last, "status": st})
            if tr is not None:
                for rec in tr.records(idx):
                    traces.append({"t_re": handle.t.real, "t_im": handle.t.imag, **rec})
            if st == "ok" and (best is None or abs(v) > best[0]):
                best = (abs(v), idx)
        semi = math.nan if best is None else best[0]
        seminorms[str(handle.t)] = {"seminorm": semi, "argmax": None if best is None else best[1]}
        rows.append({"t_re": handle.t.real, "t_im": handle.t.imag, "gamma_index": "max",
                     "value_re": semi, "status": "seminorm"})
    base = os.path.join(args.out, "eval")
    write_csv(base + ".csv", EVAL_COLUMNS, rows)
    write_jsonl(base + ".trace.jsonl", traces)
    summary = {"pass": code == 0, "worst_margin": None, "samples": len(rows) - len(seminorms),
               "seminorms": seminorms}
    write_json(base + ".json", summary)
    print(json.dumps(_json_safe({k: summary[k] for k in ("pass", "samples")})))
    return code


# ------------------------------------------------------------------ main

def _spec(args) -> ExperimentSpec:
    spec = load_config(args.config) if args.config else ExperimentSpec()
    kw = {}
    if args.threads is not None:
        kw["threads"] = max(1, args.threads)
    if args.tolerance is not None:
        kw["tolerance"] = args.tolerance
    if kw:
        spec.params = spec.params.with_(**kw)
    os.makedirs(args.out, exist_ok=True)
    return spec


def build_parser():
    ap = argparse.ArgumentParser(prog="liouville", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cr", help="cross-ratio and its principal logarithm")
    p.add_argument("points", nargs=4)
    p.set_defaults(func=cmd_cr)

    def common(p):
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--threads", type=int)
        p.add_argument("--seed", type=int, help="random seed for sampled verifications and eval order")
        p.add_argument("--tolerance", type=float)

    p = sub.add_parser("verify", help="run a verification and write per-sample margins")
    p.add_argument("name", choices=VERIFY_NAMES)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate the functional over sampled transforms")
    common(p)
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutsideNeighborhood as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LiouvilleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
