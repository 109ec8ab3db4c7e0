"""Command-line front end.

Subcommands: ``sample``, ``hull-stats``, ``rescale``, ``verify``,
``experiment``, ``report``.  Configuration comes from a JSON file plus
repeatable ``--set key=value`` overrides; results land in the output
directory as ``raw.csv`` (per-replicate table), ``summary.json`` and
``plot.gp`` (a gnuplot script reproducing the experiment's figure).

Exit codes:
  0  success; all requested checks passed their tolerances
  1  one or more checks failed
  2  missing input file
  3  configuration violates the schema
  4  unknown configuration key
  5  parameter outside its admissible domain
  6  I/O failure while writing results
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import cumulants as _cumulants
from . import harness as _harness
from . import hull as _hull
from . import rescale as _rescale
from . import sampler as _sampler
from .errors import (
    BelowThresholdError,
    ConfigError,
    GausspolyError,
    InvalidParameterError,
    SchemaError,
    UnknownKeyError,
)

__all__ = ["main", "parse_config", "emit_report"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_MISSING_FILE = 2
EXIT_SCHEMA = 3
EXIT_UNKNOWN_KEY = 4
EXIT_INADMISSIBLE = 5
EXIT_IO = 6

_CONFIG_FIELDS = {f.name for f in
                  dataclasses.fields(_harness.ExperimentConfig)}


def _parse_override(text: str):
    if "=" not in text:
        raise SchemaError(f"override {text!r} is not of the form key=value")
    key, _, value = text.partition("=")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def parse_config(path: str | None, overrides=()) -> _harness.ExperimentConfig:
    """Load, override and validate an experiment configuration."""
    doc = {}
    if path is not None:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError("config must be a JSON object")
    for item in overrides:
        key, value = item if isinstance(item, tuple) else _parse_override(item)
        doc[key] = value
    unknown = sorted(set(doc) - _CONFIG_FIELDS)
    if unknown:
        raise UnknownKeyError(f"unknown config keys: {', '.join(unknown)}")
    if "kind" not in doc or "d" not in doc:
        raise SchemaError("config must specify at least 'kind' and 'd'")
    try:
        return _harness.ExperimentConfig(**doc)
    except BelowThresholdError:
        raise
    except TypeError as exc:
        raise SchemaError(str(exc)) from exc


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _raw_csv_text(report: _harness.ExperimentReport) -> str:
    lines = [",".join(report.columns)]
    for row in report.raw:
        lines.append(",".join(_format_cell(row.get(c, "")) for c in
                              report.columns))
    return "\n".join(lines) + "\n"


def _plot_script(report: _harness.ExperimentReport) -> str:
    kind = report.config.kind
    s = report.summary
    col = report.columns.index("statistic_value") + 1
    head = ("set datafile separator ','\n"
            "set terminal svg size 800,600\n"
            "set output 'figure.svg'\n")
    if kind == "clt":
        return (head
                + f"mu = {s['mean']!r}\nsd = {s['sd']!r}\n"
                + "Phi(x) = 0.5*(1.0 + erf(x/sqrt(2.0)))\n"
                + "set key left\nset xlabel 'z'\nset ylabel 'CDF'\n"
                + f"plot 'raw.csv' skip 1 using ((${col}-mu)/sd):(1.0) "
                + "smooth cnorm title 'empirical CDF', Phi(x) title 'Phi'\n")
    if kind == "variance-exponent":
        rows = "\n".join(f"{v['lam']!r} {v['var']!r}"
                         for v in s["variances"])
        return (head
                + f"fit_slope = {s['slope']!r}\n"
                + f"fit_icept = {s['intercept']!r}\n"
                + "f(x) = fit_slope*x + fit_icept\n"
                + "set xlabel 'log log lambda'\nset ylabel 'log var'\n"
                + "# per-lambda variances recomputable from raw.csv\n"
                + "plot '-' using (log(log($1))):(log($2)) "
                + "title 'empirical', f(x) title 'fit'\n"
                + rows + "\ne\n")
    if kind == "concentration":
        rows = "\n".join(f"{p['y']!r} {p['empirical']!r} {p['bound_c1']!r}"
                         for p in s["tail"])
        return (head
                + "set logscale y\nset xlabel 'y'\nset ylabel 'tail'\n"
                + "# empirical tail frequencies recomputable from raw.csv\n"
                + "plot '-' using 1:2 with linespoints title 'empirical', "
                + "'-' using 1:3 with lines title 'bound (c=1)'\n"
                + rows + "\ne\n" + rows + "\ne\n")
    if kind == "slln-path":
        rows = "\n".join(f"{t['lam']!r} {t['mean']!r} {t['centered_mean']!r}"
                         for t in s["trajectory"])
        return (head
                + "set logscale x\nset xlabel 'lambda'\n"
                + "set ylabel 'vol / (kappa_d R^d)'\n"
                + "# trajectory recomputable from raw.csv\n"
                + "plot '-' using 1:2 with linespoints title 'mean', "
                + "1.0 title 'limit'\n" + rows + "\ne\n")
    if kind == "mdp-curve":
        blocks, plots = [], []
        for curve in s["curves"]:
            pts = [(p["y"], p["empirical"]) for p in curve["points"]
                   if p["empirical"] is not None]
            if pts:
                blocks.append("\n".join(f"{y!r} {v!r}" for y, v in pts)
                              + "\ne")
                plots.append("'-' using 1:2 with linespoints "
                             f"title 'lam={curve['lam']:g}'")
        plots.append("-x*x/2.0 title 'rate -y^2/2'")
        return (head + "set xlabel 'y'\nset ylabel 'a^-2 log tail'\n"
                + "plot " + ", ".join(plots) + "\n"
                + "\n".join(blocks) + "\n")
    if kind == "agreement-audit":
        rows = "\n".join(f"{a['lam']!r} {a['agreement_rate']!r}"
                         for a in s["audit"])
        return (head + "set logscale x\nset xlabel 'lambda'\n"
                + "set ylabel 'agreement rate'\nset yrange [0:1.05]\n"
                + "plot '-' using 1:2 with linespoints title 'rate'\n"
                + rows + "\ne\n")
    if kind == "moments":
        rows = "\n".join(
            f"{m['k']} {m['moment']!r} {m['envelope'][0]!r} "
            f"{m['envelope'][1]!r}" for m in s["moments"])
        return (head + "set logscale y\nset xlabel 'k'\n"
                + "plot '-' using 1:2 with points title 'moment', "
                + "'-' using 1:3 with lines title 'lower', "
                + "'-' using 1:4 with lines title 'upper'\n"
                + (rows + "\ne\n") * 3)
    # identities
    return (head + "set logscale y\nset xlabel 'replicate'\n"
            + "set ylabel 'defect residual'\n"
            + f"plot 'raw.csv' skip 1 using 1:{col} with points "
            + "title 'residual'\n")


def _atomic_writes(outdir: str, files: dict) -> None:
    """Write every file via a temp-then-rename; on failure remove anything
    this call created."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    try:
        for name, text in files.items():
            path = os.path.join(outdir, name)
            tmp = path + ".tmp"
            with open(tmp, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
            written.append(path)
    except OSError:
        for name in files:
            tmp = os.path.join(outdir, name) + ".tmp"
            if os.path.exists(tmp):
                os.remove(tmp)
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise


def emit_report(report: _harness.ExperimentReport, outdir: str) -> list:
    """Write raw.csv, summary.json and plot.gp; returns the file names."""
    summary_doc = {
        "kind": report.config.kind,
        "config": report.config.to_dict(),
        "config_hash": report.config_hash,
        "master_seed": report.master_seed,
        "summary": report.summary,
    }
    files = {
        "raw.csv": _raw_csv_text(report),
        "summary.json": json.dumps(summary_doc, indent=2, sort_keys=True)
        + "\n",
        "plot.gp": _plot_script(report),
    }
    _atomic_writes(outdir, files)
    return sorted(files)


def _simple_params(args, allowed=("d", "lam", "seed")) -> dict:
    doc = {}
    if args.config:
        with open(args.config) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"config is not valid JSON: {exc}") from exc
    for item in args.set or ():
        key, value = _parse_override(item)
        doc[key] = value
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise UnknownKeyError(f"unknown config keys: {', '.join(unknown)}")
    if "d" not in doc or "lam" not in doc:
        raise SchemaError("need 'd' and 'lam' (config file or --set)")
    doc.setdefault("seed", args.seed)
    return doc


def _cmd_sample(args) -> int:
    p = _simple_params(args)
    sample = _sampler.sample_poisson_gaussian(p["lam"], p["d"], p["seed"])
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sample.txt"), "w") as fh:
        _sampler.write_sample(sample, fh)
    print(f"wrote {sample.count} points to {args.out}/sample.txt")
    return EXIT_OK


def _cmd_hull_stats(args) -> int:
    p = _simple_params(args)
    sample = _sampler.sample_poisson_gaussian(p["lam"], p["d"], p["seed"])
    poly = _hull.convex_hull(sample.points)
    _atomic_writes(args.out, {"polytope.json": _hull.dump_polytope(poly)
                              + "\n"})
    fv = _hull.f_vector(poly)
    print(f"f-vector {fv}, volume {_hull.polytope_volume(poly):.6g}; "
          f"wrote {args.out}/polytope.json")
    return EXIT_OK


def _cmd_rescale(args) -> int:
    p = _simple_params(args)
    sample = _sampler.sample_poisson_gaussian(p["lam"], p["d"], p["seed"])
    d = sample.d
    lines = [",".join([f"v_{k + 1}" for k in range(d - 1)]
                      + ["h", "density_rescaled", "density_limit"])]
    for x in sample.points:
        w = _rescale.scale_point(x, sample.lam, d)
        cells = [repr(float(c)) for c in w.v] + [
            repr(float(w.h)),
            repr(_rescale.intensity_density(w, sample.lam, "rescaled")),
            repr(_rescale.intensity_density(w, sample.lam, "limit")),
        ]
        lines.append(",".join(cells))
    _atomic_writes(args.out, {"rescaled.csv": "\n".join(lines) + "\n"})
    print(f"wrote {sample.count} rescaled points to {args.out}/rescaled.csv")
    return EXIT_OK


def _verify_checks(seed: int) -> dict:
    """The batched identity suite behind the ``verify`` subcommand."""
    checks = {}
    rng = _sampler.substream((seed, 0x5EED))

    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 6))
        lo = max(5.0, math.log(_rescale.minimal_admissible_lambda(d)) + 1e-6)
        lam = math.exp(rng.uniform(lo, 20.0))
        r = _rescale.critical_radius(lam, d)
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        h = float(rng.uniform(-5.0, r * r))
        left, right = _rescale.radius_identity_sides(u, h, lam, d)
        worst = max(worst, abs(left - right) / max(abs(left), abs(right)))
    checks["radius_identity"] = {"pass": worst <= 1e-12, "residual": worst}

    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        lo = max(5.0, math.log(_rescale.minimal_admissible_lambda(d)) + 1e-6)
        lam = math.exp(rng.uniform(lo, 15.0))
        x = rng.standard_normal(d) * rng.uniform(0.1, 3.0)
        back = _rescale.unscale_point(_rescale.scale_point(x, lam))
        worst = max(worst, float(np.linalg.norm(back - x)
                                 / max(np.linalg.norm(x), 1.0)))
    checks["round_trip"] = {"pass": worst <= 1e-9, "residual": worst}

    cfg = _harness.ExperimentConfig(kind="identities", d=2, lam=1000.0,
                                    replicates=20, master_seed=seed)
    s = _harness.run_experiment(cfg).summary
    checks["defect_identity"] = {
        "pass": s["max_defect_residual"] <= 1e-9,
        "residual": s["max_defect_residual"]}
    checks["face_sum"] = {"pass": bool(s["face_sum_all_exact"]),
                          "residual": 0.0}
    checks["euler"] = {"pass": bool(s["euler_all_exact"]), "residual": 0.0}

    ok = True
    for k in range(1, 11):
        for alpha in (Fraction(1, 2), 1, 2):
            cums = [alpha] * k
            ok = ok and (_cumulants.touchard_moment(alpha, k)
                         == _cumulants.complete_bell(k, cums))
    ok = ok and all(_cumulants.bell_number(k) <= math.factorial(k)
                    for k in range(1, 21))
    checks["touchard_bell"] = {"pass": ok, "residual": 0.0}

    ok = all(all(_cumulants.factorial_inequalities(p, d, j))
             for p in range(1, 5) for d in range(1, 5) for j in range(1, 5))
    checks["factorial_inequalities"] = {"pass": ok, "residual": 0.0}

    worst = 0.0
    for _ in range(100):
        c = rng.uniform(-1.0, 1.0, size=8)
        c[1] = abs(c[1]) + 0.5
        back = _cumulants.cumulants_from_moments(
            _cumulants.moments_from_cumulants(list(c))).values
        worst = max(worst, float(np.max(np.abs(np.array(back) - c)
                                        / np.maximum(np.abs(c), 1.0))))
    checks["moment_cumulant_round_trip"] = {"pass": worst <= 1e-10,
                                            "residual": worst}
    return checks


def _cmd_verify(args) -> int:
    checks = _verify_checks(args.seed)
    doc = {"checks": checks, "all_pass": all(c["pass"]
                                             for c in checks.values())}
    _atomic_writes(args.out, {"summary.json":
                              json.dumps(doc, indent=2, sort_keys=True)
                              + "\n"})
    for name, c in sorted(checks.items()):
        status = "PASS" if c["pass"] else "FAIL"
        print(f"{status} {name} (residual {c['residual']:.3g})")
    return EXIT_OK if doc["all_pass"] else EXIT_CHECK_FAILED


def _check_tolerances(report: _harness.ExperimentReport) -> bool:
    """Default and configured pass criteria per experiment kind."""
    s = report.summary
    tol = report.config.tolerances
    kind = report.config.kind
    ok = True
    if kind == "identities":
        ok &= s["max_defect_residual"] <= tol.get("defect_residual", 1e-9)
        ok &= bool(s["face_sum_all_exact"]) and bool(s["euler_all_exact"])
    elif kind == "agreement-audit":
        ok &= all(a["violations"] <= tol.get("violations", 0)
                  for a in s["audit"])
    elif kind == "clt" and "ks" in tol:
        ok &= s["ks_statistic"] <= tol["ks"]
    elif kind == "variance-exponent":
        if "slope_min" in tol:
            ok &= tol["slope_min"] <= s["slope"]
        if "slope_max" in tol:
            ok &= s["slope"] <= tol["slope_max"]
    elif kind == "concentration":
        # empirical tail must stay below the bound at the solved constant
        ok &= s["tight_constant"] is None or s["tight_constant"] > 0
    return bool(ok)


def _cmd_experiment(args) -> int:
    overrides = list(args.set or ())
    if args.seed is not None:
        overrides.append(("master_seed", int(args.seed)))
    config = parse_config(args.config, overrides)
    report = _harness.run_experiment(config, workers=args.threads)
    emit_report(report, args.out)
    passed = _check_tolerances(report)
    print(f"{report.config.kind}: wrote raw.csv, summary.json, plot.gp "
          f"to {args.out} ({'pass' if passed else 'FAIL'})")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _cmd_report(args) -> int:
    path = os.path.join(args.out, "summary.json")
    with open(path) as fh:
        doc = json.load(fh)
    config = _harness.ExperimentConfig(**doc["config"])
    with open(os.path.join(args.out, "raw.csv")) as fh:
        header = fh.readline().strip().split(",")
    report = _harness.ExperimentReport(
        config=config, columns=header, raw=[], summary=doc["summary"],
        config_hash=doc["config_hash"], master_seed=doc["master_seed"])
    _atomic_writes(args.out, {"plot.gp": _plot_script(report)})
    print(f"regenerated {args.out}/plot.gp")
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "hull-stats": _cmd_hull_stats,
    "rescale": _cmd_rescale,
    "verify": _cmd_verify,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausspoly",
        description="Simulation and verification toolkit for convex hulls "
                    "of Gaussian point clouds.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="master seed override")
        sp.add_argument("--threads", type=int,
                        default=int(os.environ.get("GAUSSPOLY_THREADS", "1")),
                        help="worker process count")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="config override, repeatable")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.seed is None and args.subcommand in ("sample", "hull-stats",
                                                 "rescale", "verify"):
        args.seed = 0
    try:
        return _COMMANDS[args.subcommand](args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except UnknownKeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_KEY
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except BelowThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GausspolyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
