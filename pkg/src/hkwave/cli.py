"""
Command-line interface.

Usage::

    hkwave space describe --preset s5
    hkwave specfunc eval --preset s3 --mu 1 --theta 1.0471975512
    hkwave wave huygens --preset su3 --epsilon 0.2
    hkwave selftest --only PW-TYPE

Exit codes: 0 success, 1 contract violation (a check that is asserted
failed), 2 usage or input error.  Tabular output is CSV with a header row,
other output is a single JSON object or list; floats carry 17 significant
digits.  With ``--out`` a ``<out>.manifest.json`` run manifest is written
next to the output.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .rootsys import ConfigError, build_space, load_config, preset, torus_grid
from .specfunc import (SpectralSingularity, WallError, build_shift_operator, c_function,
                       c_function_gamma, dimension, spherical_function, spherical_oracle)
from .fourier import (AliasingError, DomainError, SphericalCoefficients,
                      exponential_type_estimate, forward_transform, inverse_transform,
                      measure_constant, pw_extend, pw_extend_adjoint, standard_bump,
                      synthesize_from_pw)
from .rootsys import dominant_weights
from .wave import (CauchyProblem, RangeError, exponential_estimate_check, huygens_report,
                   trajectory)

__all__ = ["main", "cmd_dispatch", "cmd_selftest", "RunManifest"]

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE = 0, 1, 2
INPUT_ERRORS = (ConfigError, AliasingError, RangeError, WallError, SpectralSingularity,
                DomainError)


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt_number(x):
    """Round-trip-safe text for a number (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_json(obj):
    """Serialize with 17-digit floats; numpy scalars and arrays are accepted."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return fmt_number(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt_number(v) for v in row) + "\n")
    return buf.getvalue()


@dataclasses.dataclass
class RunManifest:
    """Record of one CLI run, written next to file outputs."""
    command: str
    preset: str | None
    config_hash: str | None
    version: str
    parameters: dict
    wall_clock: float = 0.0
    outputs: list = dataclasses.field(default_factory=list)

    def to_json(self):
        return to_json(dataclasses.asdict(self))


class Output:
    def __init__(self, args):
        self.path = args.out
        self.fmt = args.format
        self.written = []

    def emit(self, text):
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            self.written.append(self.path)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()

    def table(self, header, rows, records_key=None):
        """CSV by default; JSON as a list of row objects with ``--format json``."""
        if self.fmt == "json":
            self.emit(to_json([dict(zip(header, r)) for r in rows]) + "\n")
        else:
            self.emit(csv_text(header, rows))

    def obj(self, obj):
        self.emit(to_json(obj) + "\n")


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _parse_complex(text):
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a complex number (use e.g. 1.5-0.5j)") from None


def _parse_vector(text, n, what):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise UsageError(f"{what}: expected {n} comma-separated components, got {len(parts)}")
    return np.array([_parse_complex(p) for p in parts])


def _parse_points(text, n, what):
    return np.array([_parse_vector(p, n, what) for p in text.split(";") if p.strip()])


def _parse_floats(text, what):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _space(args):
    if args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from None
        name = None
    elif args.preset:
        cfg = preset(args.preset)
        name = args.preset
    else:
        raise UsageError("choose a space with --preset NAME or --config FILE")
    if args.grid is not None:
        if args.grid < 4:
            raise UsageError("--grid must be at least 4")
        cfg = dataclasses.replace(cfg, grid_size=int(args.grid))
    return build_space(cfg), name, cfg


def _grid_columns(data, grid):
    """Coordinate columns for grid nodes: theta in rank one, period coordinates otherwise."""
    if data.rank == 1:
        return ["theta"], grid.X.reshape(-1, data.ambient_dim)[:, :1]
    names = [f"tau_{j + 1}" for j in range(data.rank)]
    return names, grid.t.reshape(-1, data.rank)


def _threads(args):
    if args.threads is not None:
        return max(1, int(args.threads))
    env = os.environ.get("HK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"HK_THREADS must be an integer, got {env!r}") from None
    return 1


def _is_lattice(mu):
    return np.all(np.abs(mu.imag) == 0) and np.all(np.abs(mu.real - np.round(mu.real)) == 0) \
        and np.all(mu.real >= 0)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_space_describe(args, out):
    data, name, _ = _space(args)
    d = data.describe()
    d["preset"] = name
    d["grid_size"] = data.config.grid_size
    out.obj(d)
    return EXIT_OK


def cmd_specfunc_eval(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    mu = _parse_vector(args.mu, data.rank, "--mu")
    if data.rank == 1:
        if args.theta is not None:
            theta = np.array(_parse_floats(args.theta, "--theta"))
        else:
            M = args.theta_grid or 512
            theta = (np.arange(M) + 0.5) * np.pi / M
        X = theta[:, None] * np.ones((1, data.ambient_dim))
        names, coords = ["theta"], theta[:, None]
    else:
        grid = torus_grid(data, args.theta_grid or data.config.grid_size)
        X = grid.X.reshape(-1, data.ambient_dim)
        names, coords = _grid_columns(data, grid)
    psi = np.asarray(spherical_function(data, D, mu, X)).reshape(-1)
    if _is_lattice(mu):
        orc = np.asarray(spherical_oracle(data, mu.real.astype(int), X)).reshape(-1)
    else:
        orc = np.full_like(psi, np.nan)
    rows = [list(c) + [p.real, p.imag, o.real, o.imag, abs(p - o)]
            for c, p, o in zip(coords, psi, orc)]
    out.table(names + ["psi_re", "psi_im", "oracle_re", "oracle_im", "abs_err"], rows)
    return EXIT_OK


def cmd_specfunc_dim(args, out):
    data, _, _ = _space(args)
    cutoff = args.cutoff if args.cutoff is not None else 8.0
    mus = dominant_weights(data, cutoff)
    d = np.real(dimension(data, mus))
    names = [f"mu_{j + 1}" for j in range(data.rank)]
    rows = [[int(v) for v in m] + [float(x)] for m, x in zip(mus, d)]
    out.table(names + ["d"], rows)
    return EXIT_OK


def cmd_specfunc_cfun(args, out):
    data, _, _ = _space(args)
    pts = _parse_points(args.lam, data.rank, "--lambda")
    rows = []
    for lam in pts:
        c = c_function(data, lam)
        pole = not isinstance(c, complex)
        try:
            cg = c_function_gamma(data, lam)
        except (ValueError, ZeroDivisionError, OverflowError):
            cg = complex(math.nan, math.nan)
        cv = complex(math.nan, math.nan) if pole else c
        rows.append(list(lam.real) + list(lam.imag) + [cv.real, cv.imag, cg.real, cg.imag, pole])
    n = data.rank
    header = ([f"lambda_re_{j + 1}" for j in range(n)] + [f"lambda_im_{j + 1}" for j in range(n)]
              + ["c_re", "c_im", "c_gamma_re", "c_gamma_im", "pole"])
    out.table(header, rows)
    return EXIT_OK


def _bump(args, data):
    eps = args.epsilon
    if not 0 < eps < data.R_small:
        raise UsageError(f"--epsilon must lie in (0, {data.R_small:.6g}) for this space")
    return standard_bump(data, eps)


def cmd_fourier_forward(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    f = _bump(args, data)
    co = forward_transform(f, data, D, args.cutoff)
    if out.fmt == "csv":
        names = [f"mu_{j + 1}" for j in range(data.rank)]
        out.table(names + ["re", "im"],
                  [[int(v) for v in m] + [c.real, c.imag] for m, c in zip(co.mus, co.values)])
    else:
        out.obj([{"mu": [int(v) for v in m], "re": c.real, "im": c.imag}
                 for m, c in zip(co.mus, co.values)])
    return EXIT_OK


def _read_coefficients(path, data):
    try:
        with open(path, encoding="utf-8") as fh:
            recs = json.load(fh)
    except OSError as exc:
        raise UsageError(f"--coeffs: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--coeffs: malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from None
    try:
        mus = np.array([r["mu"] for r in recs], dtype=int).reshape(-1, data.rank)
        vals = np.array([complex(r["re"], r.get("im", 0.0)) for r in recs])
    except (KeyError, TypeError, ValueError):
        raise UsageError('--coeffs: expected a list of {"mu": [ints], "re": x, "im": y}') from None
    return mus, vals


def cmd_fourier_inverse(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    grid = torus_grid(data)
    if args.coeffs:
        mus, vals = _read_coefficients(args.coeffs, data)
        cut = float(np.max(data.norm(mus))) if len(mus) else 0.0
        co = SphericalCoefficients(data, mus, vals, cut, measure_constant(grid), {"grid": grid.N})
    else:
        co = forward_transform(_bump(args, data), data, D, args.cutoff)
    f = inverse_transform(co, data, D, grid.N)
    names, coords = _grid_columns(data, grid)
    vals = f.values.reshape(-1)
    out.table(names + ["f_re", "f_im"], [list(c) + [v.real, v.imag] for c, v in zip(coords, vals)])
    if f.meta.get("truncation_warning"):
        print(f"hkwave: warning: coefficient tail estimate {f.meta['tail_estimate']:.2e} "
              "exceeds 1e-10", file=sys.stderr)
    return EXIT_OK


def cmd_fourier_extend(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    f = _bump(args, data)
    lam = _parse_points(args.lam, data.rank, "--lambda")
    fn = pw_extend_adjoint if args.route == "adjoint" else pw_extend
    vals = np.atleast_1d(fn(f, data, D, lam))
    n = data.rank
    header = ([f"lambda_re_{j + 1}" for j in range(n)] + [f"lambda_im_{j + 1}" for j in range(n)]
              + ["fhat_re", "fhat_im"])
    out.table(header, [list(l.real) + list(l.imag) + [v.real, v.imag] for l, v in zip(lam, vals)])
    return EXIT_OK


def cmd_fourier_type(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    f = _bump(args, data)
    radii = _parse_floats(args.radii, "--radii") if args.radii else None
    r = exponential_type_estimate(f, data, D, args.rays, radii)
    out.obj({"epsilon": args.epsilon, "ok": r.ok, "R_est": r.R_est, "radii": r.radii,
             "log_growth": r.log_growth, "message": r.message})
    return EXIT_OK


def cmd_fourier_synth(args, out):
    data, _, _ = _space(args)
    D = build_shift_operator(data)
    f = _bump(args, data)
    cutoff = args.cutoff
    if cutoff is None:
        from .fourier import max_cutoff
        cutoff = max_cutoff(data, f.grid.N)
    F = lambda lam: pw_extend(f, data, D, lam)
    g = synthesize_from_pw(F, data, D, cutoff, N=f.grid.N, R=args.epsilon)
    names, coords = _grid_columns(data, g.grid)
    vals = g.values.reshape(-1)
    out.table(names + ["f_re", "f_im"], [list(c) + [v.real, v.imag] for c, v in zip(coords, vals)])
    print(to_json({"support_radius": g.meta["support_radius"], "support_ok": g.meta["support_ok"],
                   "R": args.epsilon, "cutoff": cutoff}), file=sys.stderr)
    return EXIT_OK if g.meta["support_ok"] else EXIT_CONTRACT


def _problem(args, data):
    eps = args.epsilon
    if not 0 < eps < data.R_small:
        raise UsageError(f"--epsilon must lie in (0, {data.R_small:.6g}) for this space")
    steps = args.t_steps if args.t_steps is not None else (24 if data.rank == 1 else 8)
    t_max = args.t_max if args.t_max is not None else data.R_small - eps
    if not 0 <= t_max <= data.R_small - eps + 1e-12:
        raise UsageError(f"--t-max must lie in [0, {data.R_small - eps:.6g}] (R_small - epsilon)")
    return CauchyProblem.standard(data, eps, t_max, steps)


def cmd_wave_run(args, out):
    data, _, _ = _space(args)
    pr = _problem(args, data)
    tr = trajectory(pr, args.method, args.gamma, _threads(args))
    grid = pr.grid
    names, coords = _grid_columns(data, grid)
    dist = grid.dist.reshape(-1)
    rows = []
    for t, fld in zip(tr.times, tr.fields):
        v = np.real(fld.values).reshape(-1)
        rows.extend([t] + list(c) + [d, x] for c, d, x in zip(coords, dist, v))
    out.table(["t"] + names + ["dist", "u"], rows)
    return EXIT_OK


def cmd_wave_huygens(args, out):
    data, _, _ = _space(args)
    pr = _problem(args, data)
    tr = trajectory(pr, args.method, args.gamma, _threads(args))
    rep = huygens_report(tr, args.tol, args.normalization)
    out.obj(rep)
    if rep["asserted"] and not rep["pass"]:
        print("hkwave: strong Huygens check failed on an odd-dimensional space", file=sys.stderr)
        return EXIT_CONTRACT
    if not rep["finite_speed_pass"]:
        print("hkwave: finite propagation speed check failed", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_wave_expcheck(args, out):
    data, _, _ = _space(args)
    pr = _problem(args, data)
    ts = _parse_floats(args.t, "--t") if args.t else [float(pr.time_grid[-1])]
    gammas = _parse_floats(args.gammas, "--gammas")
    rep = exponential_estimate_check(pr, ts, gammas)
    out.obj(rep)
    return EXIT_OK if rep["pass"] else EXIT_CONTRACT


def cmd_selftest(args=None, out=None):
    """Run the acceptance suite and print a pass/fail table."""
    from .acceptance import IDS, run_all
    only = []
    for item in (getattr(args, "only", None) or []):
        only.extend(p.strip() for p in item.split(",") if p.strip())
    unknown = [i for i in only if i not in IDS]
    if unknown:
        raise UsageError(f"--only: unknown identifier {unknown[0]!r} (known: {', '.join(IDS)})")
    scale = getattr(args, "scale", "reduced")
    stream = sys.stdout
    print(f"{'ID':<15} RESULT", file=stream)
    results = run_all(only or None, scale, stream)
    failed = [r.id for r in results if not r.passed]
    if out is not None and out.path:
        out.obj({"results": [dataclasses.asdict(r) for r in results], "failed": failed})
    if failed:
        print(f"selftest: FAILED {', '.join(failed)}", file=sys.stderr)
        for r in results:
            if not r.passed and "error" in r.detail:
                print(f"  {r.id}: {r.detail['error']}", file=sys.stderr)
        return EXIT_CONTRACT
    print(f"selftest: all {len(results)} identifiers passed", file=stream)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _global_flags(p, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--preset", help="preset space: s3, s5, s7, su2, su3", **kw)
    p.add_argument("--config", metavar="FILE", help="JSON space configuration", **kw)
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)", **kw)
    p.add_argument("--format", choices=("csv", "json"), help="output format", **kw)
    p.add_argument("--grid", type=int, help="grid nodes per torus direction", **kw)
    p.add_argument("--cutoff", type=float, help="spectral norm cutoff", **kw)
    p.add_argument("--threads", type=int, help="worker threads (default: $HK_THREADS or 1)", **kw)
    p.add_argument("--manifest", metavar="PATH", help="write the run manifest here", **kw)
    p.add_argument("--inject-fault", help=argparse.SUPPRESS, **kw)


def build_parser():
    root = argparse.ArgumentParser(prog="hkwave", description=__doc__.split("\n\n")[0].strip())
    root.add_argument("--version", action="version", version=f"hkwave {__version__}")
    _global_flags(root, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    groups = root.add_subparsers(dest="group", metavar="COMMAND")
    groups.required = True

    def leaf(sub, name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func, command_name=name)
        return p

    sp = groups.add_parser("space", help="root-system data").add_subparsers(dest="cmd", metavar="CMD")
    sp.required = True
    leaf(sp, "describe", cmd_space_describe, "JSON summary of the space")

    sf = groups.add_parser("specfunc", help="spherical functions").add_subparsers(dest="cmd", metavar="CMD")
    sf.required = True
    p = leaf(sf, "eval", cmd_specfunc_eval, "spherical function and oracle")
    p.add_argument("--mu", required=True, help="spectral parameter, comma-separated coordinates")
    p.add_argument("--theta", help="angle(s) in rank one, comma-separated")
    p.add_argument("--theta-grid", type=int, help="number of grid angles (rank one) or nodes per direction")
    leaf(sf, "dim", cmd_specfunc_dim, "dimension polynomial on dominant weights")
    p = leaf(sf, "cfun", cmd_specfunc_cfun, "c-function")
    p.add_argument("--lambda", dest="lam", required=True,
                   help="points separated by ';', coordinates by ','")

    fo = groups.add_parser("fourier", help="spherical Fourier transform").add_subparsers(dest="cmd", metavar="CMD")
    fo.required = True
    eps_help = "support radius of the standard bump"
    p = leaf(fo, "forward", cmd_fourier_forward, "coefficients of the standard bump")
    p.add_argument("--epsilon", type=float, default=0.2, help=eps_help)
    p = leaf(fo, "inverse", cmd_fourier_inverse, "synthesize grid samples from coefficients")
    p.add_argument("--coeffs", metavar="FILE", help="coefficient JSON as written by 'forward'")
    p.add_argument("--epsilon", type=float, default=0.2, help=eps_help + " (without --coeffs)")
    p = leaf(fo, "extend", cmd_fourier_extend, "holomorphic extension at complex points")
    p.add_argument("--epsilon", type=float, default=0.2, help=eps_help)
    p.add_argument("--lambda", dest="lam", required=True,
                   help="points separated by ';', coordinates by ','")
    p.add_argument("--route", choices=("direct", "adjoint"), default="direct")
    p = leaf(fo, "type", cmd_fourier_type, "exponential type estimate")
    p.add_argument("--epsilon", type=float, default=0.2, help=eps_help)
    p.add_argument("--rays", type=int, default=8)
    p.add_argument("--radii", help="comma-separated ray radii")
    p = leaf(fo, "synth", cmd_fourier_synth, "synthesis from the extension of the bump")
    p.add_argument("--epsilon", type=float, default=0.2, help=eps_help)

    wv = groups.add_parser("wave", help="wave equation").add_subparsers(dest="cmd", metavar="CMD")
    wv.required = True
    for name, func, help_ in (("run", cmd_wave_run, "solution samples per (node, t)"),
                              ("huygens", cmd_wave_huygens, "leakage report"),
                              ("expcheck", cmd_wave_expcheck, "exponential estimate table")):
        p = leaf(wv, name, func, help_)
        p.add_argument("--epsilon", type=float, default=0.2, help=eps_help)
        p.add_argument("--t-max", type=float, help="final time (default R_small - epsilon)")
        p.add_argument("--t-steps", type=int, help="time steps (default 24 in rank one, 8 otherwise)")
        if name != "expcheck":
            p.add_argument("--method", choices=("series", "reduction", "contour"), default="series")
            p.add_argument("--gamma", type=float, default=0.0, help="contour shift")
        if name == "huygens":
            p.add_argument("--tol", type=float, default=1e-6)
            p.add_argument("--normalization", choices=("matched", "global"), default="matched")
        if name == "expcheck":
            p.add_argument("--t", help="comma-separated times (default: final time)")
            p.add_argument("--gammas", default="0,1,2,5")

    p = groups.add_parser("selftest", parents=[common], help="run the acceptance suite")
    p.set_defaults(func=cmd_selftest, command_name="selftest", cmd=None)
    p.add_argument("--only", action="append", metavar="ID", help="run only these identifiers")
    p.add_argument("--scale", choices=("reduced", "full"), default="reduced",
                   help="reduced thins time samples; grids are unchanged")
    return root


def _manifest(args, argv, seconds, outputs, cfg):
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "inject_fault", "manifest") and not callable(v)}
    h = hashlib.sha256(cfg.key().encode()).hexdigest()[:16] if cfg is not None else None
    cmd = " ".join(x for x in (args.group, args.cmd) if x)
    return RunManifest(cmd, getattr(args, "preset", None), h, __version__, params,
                       round(seconds, 6), outputs)


def cmd_dispatch(argv=None):
    """Parse ``argv`` and run the command; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.format = args.format or "csv"
    if args.command_name in ("describe", "huygens", "expcheck", "type") and "--format" not in argv:
        args.format = "json"
    saved = os.environ.get("HK_FAULT_INJECT")
    if args.inject_fault:
        os.environ["HK_FAULT_INJECT"] = args.inject_fault
    out = Output(args)
    t0 = time.perf_counter()
    try:
        code = args.func(args, out)
    except UsageError as exc:
        print(f"hkwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except INPUT_ERRORS as exc:
        print(f"hkwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK
    finally:
        if args.inject_fault:
            if saved is None:
                os.environ.pop("HK_FAULT_INJECT", None)
            else:
                os.environ["HK_FAULT_INJECT"] = saved
    cfg = None
    if args.group != "selftest":
        try:
            cfg = _space(args)[2]
        except Exception:
            cfg = None
    mpath = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if mpath:
        man = _manifest(args, argv, time.perf_counter() - t0, out.written, cfg)
        with open(mpath, "w", encoding="utf-8") as fh:
            fh.write(man.to_json() + "\n")
    return code


def main(argv=None):
    return cmd_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
