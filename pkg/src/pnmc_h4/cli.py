"""Command-line entry point: generate, verify, sweep, classify-curve.

Exit codes: 0 success, 2 invalid or inadmissible parameters, 3 integrator
failure, 4 I/O failure, 5 a verifier check failed. Settings come from
built-in defaults, then an optional ``--config`` key=value file, then
flags. The only environment variable read is ``PNMC_H4_WORKERS`` (sweep
worker count).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__, export
from .errors import (
    DriftExceeded,
    Inadmissible,
    InvalidParameters,
    NegativeRadicand,
    NonPositiveF,
    NotOnHyperboloid,
    PNMCError,
    StepFailure,
    TooFewSamples,
)
from .frame_flow import integrate_directrix
from .profile import ModuliParams, f0_at_fraction, integrate_profile
from .surface import MARGIN, SurfaceParams, evaluate, generate_grid
from .verifier import FD_STEP, REACH, classify_e2_curve, verify_grid

EXIT_OK, EXIT_INVALID, EXIT_INTEGRATOR, EXIT_IO, EXIT_CHECK = 0, 2, 3, 4, 5
WORKERS_ENV = "PNMC_H4_WORKERS"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    c: float = 1.0
    C: float = 0.0
    f0: float = 0.2
    u_min: float = -0.5
    u_max: float = 0.5
    t_min: float = 0.0
    t_max: float = 1.0
    nu: int = 64
    nt: int = 64
    tol: float = 1e-10
    fd_step: float = FD_STEP
    format: str = "csv"
    projection: str = "none"
    out: str = "-"

    def validate(self):
        if self.format not in ("csv", "json", "obj"):
            raise InvalidParameters(f"unknown format {self.format!r}")
        if self.projection not in ("none", "poincare"):
            raise InvalidParameters(f"unknown projection {self.projection!r}")
        if self.format == "obj" and self.projection != "poincare":
            raise InvalidParameters("obj output needs --projection poincare")
        if not self.fd_step > 0:
            raise InvalidParameters("fd_step must be positive")
        self.surface_params().validate()
        return self

    def surface_params(self):
        return SurfaceParams(
            moduli=ModuliParams(self.c, self.C, self.f0),
            u_span=(self.u_min, self.u_max),
            t_span=(self.t_min, self.t_max),
            nu=self.nu,
            nt=self.nt,
            tol=self.tol,
        )


@dataclass(frozen=True)
class SweepConfig:
    c_values: tuple = (0.5, 1.0, 1.5, 2.0, 2.5)
    C_values: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    f0_fraction: float = 0.4
    template: RunConfig = RunConfig(nu=32, nt=32)


_FIELD_TYPES = {k: type(v) for k, v in asdict(RunConfig()).items()}


def read_config(path):
    """Parse a key=value file; blank lines and '#' comments are ignored."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise InvalidParameters(f"{path}:{n}: expected key=value")
        values[key] = value.strip()
    return values


def _coerce(key, value):
    kind = _FIELD_TYPES.get(key, str)
    try:
        return kind(value)
    except ValueError as exc:
        raise InvalidParameters(f"bad value for {key}: {value!r}") from exc


def explicit_settings(args, keys=tuple(_FIELD_TYPES)):
    """Settings named in the --config file, overridden by flags actually given."""
    merged = {}
    if getattr(args, "config", None):
        for k, v in read_config(args.config).items():
            if k in keys:
                merged[k] = _coerce(k, v)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = _coerce(k, v)
    return merged


def build_config(args):
    return RunConfig(**explicit_settings(args))


def _metadata(cfg, grid=None):
    meta = {
        "c": repr(cfg.c), "C": repr(cfg.C), "f0": repr(cfg.f0),
        "u_span": f"{cfg.u_min!r},{cfg.u_max!r}", "t_span": f"{cfg.t_min!r},{cfg.t_max!r}",
        "nu": cfg.nu, "nt": cfg.nt, "tol": repr(cfg.tol), "tool": f"pnmc_h4 {__version__}",
    }
    if grid is not None:
        meta["case"] = grid.case.name.lower()
    return meta


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


def run_generate(cfg):
    cfg.validate()
    grid = generate_grid(cfg.surface_params())
    text = export.render(cfg.format, grid.points, grid.u_values, grid.t_values, _metadata(cfg, grid), cfg.projection)
    _emit(text, cfg.out)
    return EXIT_OK


def verify_config(cfg):
    """Generate in memory and verify; returns ``(grid, report)``."""
    cfg.validate()
    # the directrix has to extend past the grid by the verifier's stencil reach
    params = replace(cfg.surface_params(), margin=max(MARGIN, 1.01 * REACH * cfg.fd_step))
    grid = generate_grid(params)
    profile = integrate_profile(params.moduli, grid.directrix.span, tol=cfg.tol)
    return grid, verify_grid(grid, profile, h=cfg.fd_step)


def run_verify(cfg):
    grid, report = verify_config(cfg)
    head = "".join(f"# {k} = {v}\n" for k, v in sorted(_metadata(cfg, grid).items()))
    _emit(head + report.to_text(), cfg.out)
    if not report.passed:
        sys.stderr.write("failed checks: " + ", ".join(report.failures()) + "\n")
        return EXIT_CHECK
    return EXIT_OK


def _sweep_point(job):
    c, C, fraction, template = job
    row = {"c": c, "C": C}
    try:
        f0 = f0_at_fraction(c, C, fraction)
        row["f0"] = f0
        _, report = verify_config(replace(template, c=c, C=C, f0=f0))
        row["status"] = "pass" if report.passed else "fail"
        row["failed"] = report.failures()
        row["residuals"] = {k.name: k.residual for k in report.checks}
    except (PNMCError, ValueError, ArithmeticError, RuntimeError) as exc:
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(sweep, workers=1):
    """Verify every (c, C) point; failures are recorded, never fatal."""
    jobs = [(float(c), float(C), sweep.f0_fraction, sweep.template)
            for c in sweep.c_values for C in sweep.C_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return sorted(rows, key=lambda r: (r["c"], r["C"]))


def run_classify(cfg, u0=0.0, samples_path=None):
    if samples_path:
        try:
            with open(samples_path) as fh:
                # skip '#' metadata and a column-name header such as the one write_csv emits
                rows = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
            if rows and any(ch.isalpha() for ch in rows[0].replace("e", "").replace("E", "")):
                rows = rows[1:]
            X = np.loadtxt(rows, delimiter=",", ndmin=2)
        except OSError as exc:
            raise OSError(f"cannot read {samples_path}: {exc.strerror or exc}") from exc
        except ValueError as exc:
            raise InvalidParameters(f"{samples_path}: expected rows of 5 comma-separated numbers") from exc
        X = X[:, -5:]
    else:
        cfg.validate()
        d = integrate_directrix(cfg.surface_params().moduli, (min(u0, 0.0), max(u0, 0.0)), tol=cfg.tol)
        t = np.linspace(cfg.t_min, cfg.t_max, cfg.nt)
        X = evaluate(d, np.full_like(t, u0), t)
    cl = classify_e2_curve(X)
    text = (f"conic_class = {cl.case.value}\naccel_type = {cl.accel_type.value}\n"
            f"planarity_residual = {cl.planarity_residual:.6e}\nkappa_hat = {cl.kappa_hat:.12g}\n")
    _emit(text, cfg.out)
    return EXIT_OK


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_run_flags(p, with_output=True):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--f0", type=float)
    p.add_argument("--u-min", dest="u_min", type=float)
    p.add_argument("--u-max", dest="u_max", type=float)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--nu", type=int)
    p.add_argument("--nt", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--fd-step", dest="fd_step", type=float)
    if with_output:
        p.add_argument("--format", choices=["csv", "json", "obj"])
        p.add_argument("--projection", choices=["none", "poincare"])
    p.add_argument("--out", help="output path, '-' for stdout")


def make_parser():
    parser = argparse.ArgumentParser(prog="pnmc-h4", description="PNMC biconservative surfaces in H^4")
    parser.add_argument("--version", action="version", version=f"pnmc_h4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("generate", "tabulate a surface grid"), ("verify", "generate and run every check"),
                           ("classify-curve", "classify one E2-curve")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--c", type=float)
        p.add_argument("--C", type=float)
        _add_run_flags(p, with_output=name == "generate")
        if name == "classify-curve":
            p.add_argument("--u0", type=float, default=0.0)
            p.add_argument("--samples", help="CSV of points (last five columns are x1..x5)")
    p = sub.add_parser("sweep", help="verify a lattice of (c, C) values")
    p.add_argument("--c", type=_float_list, help="comma-separated c values")
    p.add_argument("--C", type=_float_list, help="comma-separated C values")
    p.add_argument("--f0-fraction", dest="f0_fraction", type=float)
    _add_run_flags(p, with_output=False)
    return parser


def _workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidParameters(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def _dispatch(args):
    if args.command == "sweep":
        run_keys = [k for k in _FIELD_TYPES if k not in ("c", "C", "f0", "format", "projection")]
        template = replace(SweepConfig().template, **explicit_settings(args, run_keys))
        sweep = SweepConfig(template=template)
        if args.c is not None:
            sweep = replace(sweep, c_values=args.c)
        if args.C is not None:
            sweep = replace(sweep, C_values=args.C)
        if args.f0_fraction is not None:
            sweep = replace(sweep, f0_fraction=args.f0_fraction)
        rows = run_sweep(sweep, _workers())
        _emit(json.dumps({"f0_fraction": sweep.f0_fraction, "points": rows}, indent=1, sort_keys=True) + "\n",
              template.out)
        return EXIT_OK
    cfg = build_config(args)
    if args.command == "generate":
        return run_generate(cfg)
    if args.command == "verify":
        return run_verify(cfg)
    return run_classify(cfg, args.u0, args.samples)


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (StepFailure, DriftExceeded, NotOnHyperboloid) as exc:
        code, msg = EXIT_INTEGRATOR, f"integrator failure: {exc}"
    except (InvalidParameters, Inadmissible, NonPositiveF, NegativeRadicand, TooFewSamples, UsageError) as exc:
        code, msg = EXIT_INVALID, str(exc)
    except OSError as exc:
        code, msg = EXIT_IO, f"I/O failure: {exc}"
    except PNMCError as exc:
        code, msg = EXIT_CHECK, f"check failed ({type(exc).__name__}): {exc}"
    sys.stderr.write(f"pnmc-h4: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
