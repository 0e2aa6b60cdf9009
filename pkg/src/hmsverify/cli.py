"""Command-line entry point: hmsverify {theta,homs,product,verify,polytope}.

Exit status is 0 when every verdict passes, 1 when some comparison fails,
2 on usage errors and 3 on numeric errors (a JSON error record is printed
to stderr).
"""

import argparse
import csv
import enum
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, a_side, b_side, mirror_check, tropical
from .config import AUTO, OUTPUT_DIR_ENV, Config, make_config, parse_overrides, read_config_file
from .errors import ConfigError, HMSError
from .lattice_theta import make_modular_param, mult_structure_constants, theta_eval

SIG_DIGITS = 12

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _float(x):
    x = float(x)
    if not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{SIG_DIGITS}g}")


def canonical(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def _pair(text, cast=float, n=2):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != n:
        raise UsageError(f"expected {n} comma-separated values, got {text!r}")
    return tuple(cast(p) for p in parts)


def _object(text):
    try:
        return a_side.parse_object(text)
    except ValueError:
        pass
    try:
        b = b_side.parse_object(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    fam = a_side.Family.F1 if b.factor is b_side.Factor.EXC else a_side.Family.F2
    return a_side.AObject(fam, b.index, b.shift)


def _scalar(text):
    return complex(text.replace(" ", "").replace("i", "j"))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="key=value file overriding the defaults")
    g.add_argument("--t", type=float, help="modular parameter in (0, 1)")
    g.add_argument("--R", type=int, help="lattice truncation radius")
    g.add_argument("--trunc", type=int, dest="N", help="wrapping / polynomial truncation N")
    g.add_argument("--gap", type=int, dest="G", help="largest index gap")
    g.add_argument("--tol", type=float, help="verdict tolerance")
    g.add_argument("--rank-tol", type=float, dest="rank_tol", help="numerical rank cutoff")
    g.add_argument("--seed", type=int)
    g.add_argument("--calibration", dest="fiber_calibration",
                   help="fiber calibration constant or AUTO")
    g.add_argument("--C", dest="C", type=_scalar, help="differential scalar, e.g. 2 or -0.5+1i")
    g.add_argument("--output", dest="output_path", help="output file (verify) or prefix (polytope)")

    ap = argparse.ArgumentParser(prog="hmsverify", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command")
    sub.required = True

    th = sub.add_parser("theta", parents=[common], help="theta values or structure constants")
    th.add_argument("--level", type=int, default=1)
    th.add_argument("--char", default="0,0", help="characteristic a,b")
    th.add_argument("--x", default="1,1", help="point x1,x2 (complex allowed)")
    th.add_argument("--structure", metavar="K1,K2", help="print the level K1 x K2 structure tensor")

    hm = sub.add_parser("homs", parents=[common], help="hom tables for a pair of objects")
    hm.add_argument("source")
    hm.add_argument("target")
    hm.add_argument("--side", choices=["a", "b", "both"], default="both")

    pr = sub.add_parser("product", parents=[common], help="product tensors and their comparison")
    pr.add_argument("objects", nargs=3)

    sub.add_parser("verify", parents=[common], help="run the full verification")

    po = sub.add_parser("polytope", parents=[common], help="tropical face complex")
    po.add_argument("--s", default="1", help="tropical scale (rational like 1 or 3/2 is exact)")
    po.add_argument("--window", default="-5/2,5/2,-5/2,5/2", help="x0,x1,y0,y1")
    po.add_argument("--eps", default=None, help="also emit the fundamental domain cut at eps")
    return ap


def _number(text):
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _config(args):
    base = Config()
    overrides = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    for f in ("t", "R", "N", "G", "tol", "rank_tol", "seed", "C", "output_path"):
        v = getattr(args, f, None)
        if v is not None:
            overrides[f] = v
    if args.fiber_calibration is not None:
        overrides.update(parse_overrides({"fiber_calibration": args.fiber_calibration}))
    return make_config(base, **overrides)


def _envelope(cfg, body):
    return {"version": __version__, "config": cfg.snapshot(), **body}


def _hom_table(h):
    return {"dims": h.cohomology_dims, "chain_dims": h.dims(),
            "generators": [[g.label, g.degree] for g in h.generators]}


def cmd_theta(args, cfg):
    p = make_modular_param(cfg.t)
    if args.structure:
        k1, k2 = _pair(args.structure, int)
        T = mult_structure_constants(p, k1, k2, cfg.R, cfg.rank_tol, cfg.seed)
        body = {"levels": [k1, k2], "tensor": T.data, "fit_residual": T.residual,
                "tail_bound": T.tail_bound}
    else:
        c = _pair(args.char, int)
        x = _pair(args.x, _scalar)
        v = theta_eval(p, args.level, c, x, cfg.R)
        body = {"level": args.level, "char": list(c), "x": list(x), "value": v.value,
                "abs_error_bound": v.abs_error_bound}
    return _envelope(cfg, body), EXIT_OK


def cmd_homs(args, cfg):
    A1, A2 = _object(args.source), _object(args.target)
    p = make_modular_param(cfg.t)
    body = {"source": str(A1), "target": str(A2)}
    rep = mirror_check.compare_homs(A1, A2, cfg.N, cfg.tol, p, cfg.R, cfg.rank_tol, cfg.C)
    if rep.verdict is not mirror_check.Verdict.OUT_OF_RANGE:
        if args.side in ("a", "both"):
            body["a_side"] = _hom_table(a_side.hom_complex(A1, A2, cfg.N, p, cfg.R, cfg.rank_tol, cfg.C))
        if args.side in ("b", "both"):
            B1, B2 = mirror_check.mirror_object(A1), mirror_check.mirror_object(A2)
            e = b_side.hom_b(B1, B2, cfg.N, p, cfg.R, cfg.rank_tol)
            body["b_side"] = {"objects": [str(B1), str(B2)], "dims": mirror_check._nonzero(e.dims),
                              "basis": e.basis_labels}
    body["report"] = _with_meta(rep.as_dict(), cfg)
    return _envelope(cfg, body), _status([rep])


def cmd_product(args, cfg):
    triple = tuple(_object(o) for o in args.objects)
    p = make_modular_param(cfg.t)
    rep = mirror_check.compare_products(triple, cfg.N, cfg.tol, p, cfg.R, cfg.rank_tol,
                                        cfg.fiber_calibration, cfg.C)
    body = {"objects": [str(o) for o in triple], "report": _with_meta(rep.as_dict(), cfg)}
    if rep.verdict is not mirror_check.Verdict.OUT_OF_RANGE:
        kappa = rep.rescaling.get("calibration")
        ta = a_side.product(*triple, cfg.N, p, cfg.R, cfg.rank_tol, kappa, cfg.C)
        tb = b_side.compose_b(tuple(map(mirror_check.mirror_object, triple)), cfg.N, p, cfg.R,
                              cfg.rank_tol)
        body["a_tensor"] = ta.data
        body["b_tensor"] = tb.data
        body["labels"] = ta.meta["labels"]
    return _envelope(cfg, body), _status([rep])


def _with_meta(record, cfg):
    record["config"] = cfg.snapshot()
    record["version"] = __version__
    return record


def _status(reports):
    bad = any(r.verdict is mirror_check.Verdict.FAIL for r in reports)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_verify(args, cfg):
    reports, summary = mirror_check.full_verification(cfg)
    body = {"reports": [_with_meta(r.as_dict(), cfg) for r in reports], "summary": summary}
    return _envelope(cfg, body), _status(reports)


def _output_path(cfg, default_name):
    if cfg.output_path:
        return Path(cfg.output_path)
    d = os.environ.get(OUTPUT_DIR_ENV)
    return Path(d) / default_name if d else None


def cmd_polytope(args, cfg):
    s = _number(args.s)
    p = tropical.make_trop_param(s)
    x0, x1, y0, y1 = _pair(args.window, _number, 4)
    fc = tropical.face_complex(p, ((x0, x1), (y0, y1)))
    body = {"s": s, "complex": tropical.to_record(fc), "euler_characteristic": fc.euler_characteristic()}
    if args.eps is not None:
        body["fundamental_domain"] = tropical.to_record(tropical.fundamental_domain(p, _number(args.eps)))
    return _envelope(cfg, body), EXIT_OK, tropical.to_csv_rows(fc)


COMMANDS = {"theta": cmd_theta, "homs": cmd_homs, "product": cmd_product,
            "verify": cmd_verify, "polytope": cmd_polytope}


def _csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([canonical(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        out = COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(stderr)
        stderr.write(f"hmsverify: error: {exc}\n")
        return EXIT_USAGE
    except HMSError as exc:
        stderr.write(dumps(exc.record()))
        return EXIT_NUMERIC
    payload, status = out[0], out[1]
    text = dumps(payload)
    default = {"verify": "verify.json", "polytope": "polytope.json"}.get(args.command)
    path = _output_path(cfg, default) if default else None
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.with_suffix(".json").write_text(text)
        if args.command == "polytope":
            path.with_suffix(".csv").write_text(_csv_text(out[2]))
    else:
        stdout.write(text)
    return status


def main():
    sys.exit(run())
