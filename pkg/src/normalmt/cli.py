"""Command-line front end.

Subcommands::

    normalmt decompose   --curve C --init I --p P [--normals N] [--combined T]
                         --levels J [--window W] --out FILE
    normalmt reconstruct FILE [--truncate K] [--out CSV]
    normalmt table1      [--levels J] [--out CSV]
    normalmt orders      --kind detail|omega|diff:<n>|normal-accuracy  (+ decompose flags)

Scheme specs are ``lr:<p>`` (Lane-Riesenfeld degree p) and ``dd:<2n>``
(2n-point Deslauriers-Dubuc).  Combined transforms centre both schemes
internally.  Exit codes: 0 success, 2 well-posedness failure, 3 I/O or
file-format error, 4 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis
from .curve import (curve_from_spec, initial_sample_parameter,
                    initial_sample_quadratic, initial_sample_uniform)
from .errors import (ConfigError, CurveError, NormalMTError, SchemeError,
                     WellPosednessError)
from .transform import Decomposition, TransformConfig, decompose, reconstruct

EXIT_OK, EXIT_ILLPOSED, EXIT_IO, EXIT_CONFIG = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code, payload):
        super().__init__(payload.get("message", ""))
        self.code = code
        self.payload = payload


def _fail(code, reason, message, **extra):
    raise CliError(code, dict(error=reason, message=message, **extra))


def _write_atomic(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- run configuration ----------------------------------------------------------

def parse_curve(text):
    """``circle``, ``ellipse``, inline JSON or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{"):
        spec = json.loads(text)
    elif os.path.exists(text):
        with open(text) as fh:
            spec = json.load(fh)
    else:
        spec = {"kind": text}
    return curve_from_spec(spec)


def read_points(path):
    """Points from a CSV (``x,y`` per row, optional header) or a JSON list."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return np.asarray(json.loads(text), dtype=float)
    rows = []
    for row in csv.reader(text.splitlines()):
        if not row or row[0].strip().startswith("#"):
            continue
        try:
            rows.append([float(row[-2]), float(row[-1])])
        except ValueError:
            if rows:
                raise
    if not rows:
        raise ValueError("no points")
    return np.asarray(rows, dtype=float)


def initial_sample(curve, text):
    kind, _, arg = text.partition(":")
    if kind == "quad":
        return initial_sample_quadratic(curve, float(arg))
    if kind == "quadclosed":
        return initial_sample_quadratic(curve, float(arg), closed=True)
    if kind == "uniform":
        return initial_sample_uniform(curve, int(arg))
    if kind == "param":
        return initial_sample_parameter(curve, int(arg))
    if not os.path.exists(text):
        raise ConfigError("unknown --init %r" % text)
    try:
        pts = read_points(text)
    except (OSError, ValueError) as e:
        _fail(EXIT_IO, "io", "cannot read points from %s: %s" % (text, e))
    s = curve.locate(pts)
    # unwrap so arc lengths increase from the first point
    s = s[0] + np.mod(s - s[0], curve.total_length)
    return pts, s


def build_run(args):
    try:
        curve = parse_curve(args.curve)
        coincident = "chord" if args.init.startswith("quadclosed") else "raise"
        cfg = TransformConfig(args.p, args.normals, args.combined, levels=args.levels,
                              window=args.window, coincident=coincident)
        v0, s0 = initial_sample(curve, args.init)
    except json.JSONDecodeError as e:
        _fail(EXIT_IO, "io", "bad curve JSON: %s" % e)
    except (ConfigError, SchemeError, CurveError, ValueError) as e:
        _fail(EXIT_CONFIG, "config", str(e))
    return curve, v0, s0, cfg


def run_decomposition(args):
    curve, v0, s0, cfg = build_run(args)
    try:
        dec = decompose(curve, v0, s0, cfg)
    except ConfigError as e:
        _fail(EXIT_CONFIG, "config", str(e))
    except WellPosednessError as e:
        _fail(EXIT_ILLPOSED, **_illposed(e.as_dict()))
    return curve, dec


def _illposed(failure):
    d = dict(failure)
    return {"reason": d.pop("reason"), "message": d.pop("message"), **d}


# -- subcommands ----------------------------------------------------------------

def cmd_decompose(args):
    curve, dec = run_decomposition(args)
    out = args.out or "decomposition.json"
    try:
        _write_atomic(out, json.dumps(dec.to_dict()) + "\n")
        stem = out[:-5] if out.endswith(".json") else out
        diag = stem + ".diag.csv"
        folder = os.path.dirname(os.path.abspath(diag))
        fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
        os.close(fd)
        dec.write_diagnostics_csv(tmp)
        os.replace(tmp, diag)
    except OSError as e:
        _fail(EXIT_IO, "io", str(e))
    norms = [float(np.max(np.abs(d))) for d in dec.details]
    print(json.dumps({"levels_completed": dec.levels, "out": out, "diagnostics": diag,
                      "final_norm": norms[-1] if norms else None}))
    if dec.failure is not None:
        f = dec.failure
        _fail(EXIT_ILLPOSED, f["reason"], f["message"], level=f["level"], index=f["index"])
    return EXIT_OK


def cmd_reconstruct(args):
    try:
        dec = Decomposition.load(args.file)
    except OSError as e:
        _fail(EXIT_IO, "io", str(e))
    except (ValueError, KeyError, TypeError, NormalMTError) as e:
        _fail(EXIT_IO, "format", "malformed decomposition file: %s" % e)
    if args.truncate is not None:
        dec = dec.truncated(args.truncate)
    try:
        pts = reconstruct(dec)
    except WellPosednessError as e:
        _fail(EXIT_ILLPOSED, **_illposed(e.as_dict()))
    lines = ["index,x,y"] + ["%d,%r,%r" % (k, float(x), float(y))
                             for k, (x, y) in enumerate(pts)]
    _write_atomic(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_table1(args):
    tables = analysis.table1(levels=args.levels)
    _write_atomic(args.out, analysis.table1_csv(tables))
    return EXIT_OK


def cmd_orders(args):
    curve, dec = run_decomposition(args)
    kind = args.kind
    try:
        if kind == "detail":
            table = analysis.detail_decay(dec)
        elif kind == "omega":
            table = analysis.omega_decay(dec)
        elif kind.startswith("diff:"):
            table = analysis.difference_norms(dec.level_s()[1:], int(kind[5:]),
                                              curve.total_length, start=1)
        elif kind == "normal-accuracy":
            table = analysis.normal_accuracy(dec, curve).table
        else:
            raise ValueError("unknown --kind %r" % kind)
    except ValueError as e:
        _fail(EXIT_CONFIG, "config", str(e))
    _write_atomic(args.out, table.to_csv())
    if dec.failure is not None:
        f = dec.failure
        _fail(EXIT_ILLPOSED, f["reason"], f["message"], level=f["level"], index=f["index"])
    return EXIT_OK


def _run_flags(p):
    p.add_argument("--curve", default="circle",
                   help="circle | ellipse | inline JSON | JSON file "
                        '(e.g. \'{"kind":"ellipse","a":2,"b":1}\')')
    p.add_argument("--init", default="quad:0.1",
                   help="quad:<h> | quadclosed:<h> | uniform:<N> | param:<N> | points file")
    p.add_argument("--p", type=int, default=3, help="degree of the B-spline predictor")
    p.add_argument("--normals", default=None, help="normal scheme (default lr:<p-2>)")
    p.add_argument("--combined", default=None, metavar="SCHEME",
                   help="tangential scheme for a combined transform, e.g. dd:4")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--window", type=int, default=None,
                   help="intersection search half-width in coarse gaps (default p+1)")
    p.add_argument("--out", default=None)


def make_parser():
    parser = argparse.ArgumentParser(
        prog="normalmt", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a sampled curve")
    _run_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="rebuild the finest points from a file")
    p.add_argument("file")
    p.add_argument("--truncate", type=int, default=None,
                   help="zero all details above this level first")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("table1", help="detail-decay orders of the six circle runs")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("orders", help="decay table of one run")
    _run_flags(p)
    p.add_argument("--kind", default="detail",
                   help="detail | omega | diff:<n> | normal-accuracy")
    p.set_defaults(func=cmd_orders)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as e:
        sys.stderr.write(json.dumps(e.payload) + "\n")
        return e.code


if __name__ == "__main__":
    sys.exit(main())
