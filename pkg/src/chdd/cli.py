"""Command-line front end.

``chdd <method> [options]`` runs a single experiment and writes its report
CSV; ``chdd --preset NAME`` runs a bundled experiment family.  Options
override config-file values, which override defaults.  Exit codes: 0 on
success, 1 when an iteration fails to converge, 2 for an invalid spec.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .harness import ExperimentSpec, SpecError


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise SpecError(f"bad numeric list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chdd",
        description="Substructured solvers for the linearized phase-field step",
    )
    p.add_argument("method", nargs="?", choices=("dn", "nn", "monodomain"),
                   help="solver to run (omit when using --preset)")
    p.add_argument("--dim", type=int, choices=(1, 2), default=None)
    p.add_argument("--domain", type=str, default=None,
                   help="a,b for 1D or a,b,c,d for 2D")
    p.add_argument("--split", type=str, default=None,
                   help="comma-separated interior interface positions")
    p.add_argument("--sd", type=int, default=None,
                   help="number of equal-width subdomains")
    p.add_argument("--unequal", action="store_true",
                   help="alternate 2:1 subdomain widths instead of equal")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--h", type=float, default=None, help="mesh size")
    p.add_argument("--hx", type=float, default=None)
    p.add_argument("--hy", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--c", type=float, default=None,
                   help="frozen linearization value")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--amplitude", type=float, default=None,
                   help="initial interface-guess size (default: calibrated)")
    p.add_argument("--steps", type=int, default=None,
                   help="time steps for monodomain runs")
    p.add_argument("--state", choices=("zero", "tanh", "random-smooth"),
                   default=None, help="previous-step field profile")
    p.add_argument("--config", type=str, default=None,
                   help="flat key = value spec file; CLI flags override it")
    p.add_argument("--preset", type=str, default=None,
                   choices=harness.PRESET_NAMES)
    p.add_argument("--out", type=str, default="out")
    return p


def spec_from_args(args) -> ExperimentSpec:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = harness.parse_config(fh.read())
    overrides = {
        "method": args.method,
        "dimension": args.dim,
        "domain": _parse_floats(args.domain) if args.domain else None,
        "breakpoints": _parse_floats(args.split) if args.split else None,
        "n_subdomains": args.sd,
        "unequal": True if args.unequal else None,
        "epsilon": args.eps,
        "delta_t": args.dt,
        "c": args.c,
        "theta": args.theta,
        "h": args.hx if args.hx is not None else args.h,
        "h_y": args.hy,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "amplitude": args.amplitude,
        "initial_state": args.state,
        "steps": args.steps,
    }
    base = harness.spec_from_config(cfg) if cfg else ExperimentSpec()
    kw = {k: getattr(base, k) for k in ExperimentSpec.__dataclass_fields__}
    for k, v in overrides.items():
        if v is not None:
            kw[k] = v
    if args.dim == 2 and kw.get("h_y") is None:
        kw["h_y"] = kw["h"]
    return ExperimentSpec(**kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.preset:
            code, paths = harness.run_preset(args.preset, args.out)
            for p in paths:
                print(p)
            return code
        if args.method is None:
            raise SpecError("need a method or --preset")
        spec = spec_from_args(args)
        report = harness.run(spec)
        os.makedirs(args.out, exist_ok=True)
        name = os.path.join(args.out, f"{spec.method}-run.csv")
        text = (harness.series_csv(report) if spec.method == "monodomain"
                else harness.curve_csv(report))
        harness.write_text(name, text)
        print(name)
        if spec.method != "monodomain":
            tail = "converged" if report.converged else "did not converge"
            print(f"{report.iterations} iterations ({tail})")
        return report.status
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
