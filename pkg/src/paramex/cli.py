"""Command-line front end.

    paramex fixed|certify|sweep|regions-at PROBLEM.json [options]
    paramex validate REPORT.json

Exit status: 0 on success, 1 on input errors, 2 when a certification
condition fails (the report is still written and names the condition).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .continuation import SweepPolicy, sweep, sweep_csv
from .errors import CertificationFailed, ParamexError
from .expr import Problem, load_problem, parse_constant, parse_constant_interval
from .interval import Box, Interval
from .parametric import certify_parameter_box, make_approx, regions_at_s
from .regions import certify_fixed
from .report import (
    FORMAT,
    at_s_to_dict,
    clean,
    dumps,
    fixed_to_dict,
    lambda_curve_csv,
    param_to_dict,
    sweep_to_dict,
    validate_report,
)

COMMANDS = ("fixed", "certify", "sweep", "regions-at")


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: Path
    v: tuple[float, ...] | None = None
    y: tuple[float, ...] | None = None
    s: tuple[float, ...] | None = None
    approx: str | None = None
    enclosure: str = "both"
    newton_tol: float = 1e-12
    tol_eta: float = 1e-9
    tol_sigma: float = 1e-9
    mu_floor: float | None = None
    max_segments: int = 200
    report: Path | None = None
    plot: Path | None = None

    def __post_init__(self):
        for name in ("newton_tol", "tol_eta", "tol_sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mu_floor is not None and not self.mu_floor > 0:
            raise ValueError("mu_floor must be positive")
        if self.max_segments < 1:
            raise ValueError("max_segments must be at least 1")


class InputError(ParamexError):
    pass


def _floats(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(parse_constant(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise InputError(f"cannot read number list {text!r}: {exc}") from None


def _approx(prob: Problem, cfg: RunConfig, z, p):
    ap_data = dict(prob.approx)
    kind = cfg.approx or ap_data.get("kind", "tangent")
    sysm = prob.system
    if kind == "secant":
        if "x1" not in ap_data or "s1" not in ap_data:
            raise InputError("secant approximation needs approx.x1 and approx.s1 in the problem file")
        x1 = [parse_constant_interval(t) for t in ap_data["x1"]]
        s1 = ap_data["s1"][0] if isinstance(ap_data["s1"], list) else ap_data["s1"]
        return make_approx(sysm, z, p, "secant", x1=x1, s1=parse_constant_interval(s1))
    if kind == "linear":
        if "theta" not in ap_data:
            raise InputError("linear approximation needs approx.theta in the problem file")
        theta = [[parse_constant(t) for t in (r if isinstance(r, list) else [r])] for r in ap_data["theta"]]
        return make_approx(sysm, z, p, "linear", theta=theta)
    return make_approx(sysm, z, p, kind)


def _problem_dict(prob: Problem) -> dict:
    s = prob.system
    return {
        "n": s.n,
        "p": s.p,
        "equations": s.to_text(),
        "X": s.X.to_json(),
        "S": s.S.to_json(),
        "center_p": [[c, c] for c in prob.center_p],
    }


def _config_dict(cfg: RunConfig) -> dict:
    return {
        "approx": cfg.approx,
        "enclosure": cfg.enclosure,
        "newton_tol": cfg.newton_tol,
        "tol_eta": cfg.tol_eta,
        "tol_sigma": cfg.tol_sigma,
        "mu_floor": cfg.mu_floor,
        "max_segments": cfg.max_segments,
        "v": cfg.v,
        "y": cfg.y,
        "s": cfg.s,
    }


def _fmt(iv: Interval) -> str:
    return f"[{iv.lo:.10g}, {iv.hi:.10g}]"


def _fmt_box(b: Box) -> str:
    return " x ".join(_fmt(c) for c in b)


def execute(cfg: RunConfig, out=sys.stdout) -> tuple[int, dict]:
    """Run one command; returns (exit status, report dict)."""
    prob = load_problem(cfg.problem)
    sysm = prob.system
    v = cfg.v or prob.v
    y = cfg.y or prob.y
    xref = prob.xref or sysm.X
    sref = prob.sref or sysm.S
    guess = prob.guess_z or tuple(sysm.X.mid())
    report = {
        "format": FORMAT,
        "command": cfg.command,
        "problem": _problem_dict(prob),
        "config": _config_dict(cfg),
        "status": "certified",
    }
    plot_text = None
    try:
        if cfg.command == "sweep":
            plot_text = _run_sweep(cfg, prob, v, y, xref, guess, report, out)
        else:
            fixed = certify_fixed(sysm, prob.center_p, guess, v=v, xbox=xref, newton_tol=cfg.newton_tol)
            report["fixed"] = fixed_to_dict(fixed)
            print(f"fixed: z = {list(fixed.z)}", file=out)
            print(f"  lambda_e = {fixed.lambda_e!r}, lambda_i = {fixed.lambda_i!r}", file=out)
            print(f"  R_i = {_fmt_box(fixed.R_i)}", file=out)
            print(f"  R_e = {_fmt_box(fixed.R_e)}", file=out)
            if cfg.command in ("certify", "regions-at"):
                approx = _approx(prob, cfg, fixed.z, fixed.p)
                cert = certify_parameter_box(
                    sysm, fixed, approx, sref, xref, y, tol_eta=cfg.tol_eta, tol_sigma=cfg.tol_sigma
                )
                report["parametric"] = param_to_dict(cert, cfg.enclosure)
                plot_text = lambda_curve_csv(cert)
                print(f"parametric ({approx.kind}): mu = {cert.mu!r} (eta = {cert.eta!r}, sigma = {cert.sigma!r})", file=out)
                print(f"  s_tilde = {_fmt_box(cert.s_tilde)}", file=out)
                if cfg.enclosure in ("s_mu", "both"):
                    print(f"  enclosure over s_tilde = {_fmt_box(cert.enclosure_s_mu)}", file=out)
                if cfg.enclosure in ("s_ref", "both"):
                    print(f"  enclosure over s_ref   = {_fmt_box(cert.enclosure_s_ref)}", file=out)
                if cfg.command == "regions-at":
                    if cfg.s is None:
                        raise InputError("regions-at needs --s")
                    if len(cfg.s) != sysm.p or not cert.bounds.sref.contains(Box.point(cfg.s)):
                        raise InputError(f"--s must be a point of the parameter reference box {_fmt_box(cert.bounds.sref)}")
                    at = regions_at_s(sysm, fixed, approx, cfg.s, cert.bounds)
                    report["regions_at"] = at_s_to_dict(at, cert.s_certified)
                    print(f"at s = {list(cfg.s)}: R_i = {_fmt_box(at.R_i_s)}", file=out)
                    print(f"  R_e = {_fmt_box(at.R_e_s)}", file=out)
            elif cfg.plot is not None:
                print("note: --plot has no data for the fixed command", file=out)
        status = 0
    except CertificationFailed as exc:
        report["status"] = "failed"
        report["failure"] = {"condition": exc.condition, "message": str(exc), "details": clean(exc.details)}
        print(f"certification failed [{exc.condition}]: {exc}", file=out)
        status = 2
    if report.get("status") == "certified" and cfg.command == "sweep" and report["sweep"]["gaps"]:
        # every segment is certified but the range is not covered
        report["status"] = "incomplete"
        status = 2
    if cfg.report is not None:
        cfg.report.write_text(dumps(report))
    if cfg.plot is not None and plot_text is not None:
        cfg.plot.write_text(plot_text)
    return status, report


def _run_sweep(cfg, prob: Problem, v, y, xref, guess, report, out) -> str:
    sysm = prob.system
    if prob.sweep_range is None:
        raise InputError("sweep needs sweep_range in the problem file")
    kind = cfg.approx or prob.approx.get("kind", "tangent")
    if kind == "linear":
        raise InputError("sweep supports tangent and secant approximations")
    secant_start = None
    if kind == "secant":
        ap_data = prob.approx
        if "x1" not in ap_data or "s1" not in ap_data:
            raise InputError("secant approximation needs approx.x1 and approx.s1 in the problem file")
        s1 = ap_data["s1"][0] if isinstance(ap_data["s1"], list) else ap_data["s1"]
        secant_start = ([parse_constant(t) for t in ap_data["x1"]], parse_constant(s1))
    policy = SweepPolicy(
        approx=kind,
        mu_floor=cfg.mu_floor,
        max_segments=cfg.max_segments,
        newton_tol=cfg.newton_tol,
        tol_eta=cfg.tol_eta,
        tol_sigma=cfg.tol_sigma,
        v=v,
        y=y,
        xref=xref,
    )
    res = sweep(sysm, prob.sweep_range, prob.center_p[0], guess, policy, secant_start=secant_start)
    report["sweep"] = sweep_to_dict(res, cfg.enclosure)
    print(f"sweep over {_fmt_box(res.s_range)}: {len(res.segments)} segments, stop reason {res.stop_reason}", file=out)
    for seg in sorted(res.segments, key=lambda s: s.s_box[0].lo):
        print(f"  segment {seg.index}: center {seg.center!r}, mu {seg.mu:.6g}, s {_fmt_box(seg.s_box)}", file=out)
    for gap in res.gaps:
        print(f"  gap {_fmt(gap)}", file=out)
    for f in res.failures:
        print(f"  failure at {f['center']!r} [{f['condition']}]: {f['message']}", file=out)
    return sweep_csv(res)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="paramex", description="Verified solution enclosures for H(x, s) = 0.")
    ap.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "fixed": "certify inclusion/exclusion regions at the center parameter",
        "certify": "certify a parameter box around the center parameter",
        "sweep": "chain parameter-box certificates over the sweep range",
        "regions-at": "regions at one parameter value inside a certified box",
    }
    for name in COMMANDS:
        c = sub.add_parser(name, help=helps[name])
        c.add_argument("problem", type=Path)
        c.add_argument("--v", help="scaling vector, e.g. '1 1'")
        c.add_argument("--y", help="parameter direction vector")
        c.add_argument("--report", type=Path, help="write the JSON certificate here")
        c.add_argument("--plot", type=Path, help="write CSV plot data here")
        c.add_argument("--approx", choices=["tangent", "secant", "linear"])
        c.add_argument("--enclosure", choices=["s_mu", "s_ref", "both"], default="both")
        c.add_argument("--newton-tol", type=float, default=1e-12)
        c.add_argument("--tol-eta", type=float, default=1e-9)
        c.add_argument("--tol-sigma", type=float, default=1e-9)
        c.add_argument("--mu-floor", type=float)
        c.add_argument("--max-segments", type=int, default=200)
        c.add_argument("--s", help="parameter value for regions-at")
    val = sub.add_parser("validate", help="re-check the invariants of a saved report")
    val.add_argument("report_file", type=Path)
    return ap


def _validate(path: Path, out) -> int:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    errs = validate_report(data)
    for e in errs:
        print(e, file=out)
    print("report valid" if not errs else f"{len(errs)} violations", file=out)
    return 0 if not errs else 2


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "validate":
        return _validate(args.report_file, out)
    try:
        cfg = RunConfig(
            command=args.command,
            problem=args.problem,
            v=_floats(args.v),
            y=_floats(args.y),
            s=_floats(args.s),
            approx=args.approx,
            enclosure=args.enclosure,
            newton_tol=args.newton_tol,
            tol_eta=args.tol_eta,
            tol_sigma=args.tol_sigma,
            mu_floor=args.mu_floor,
            max_segments=args.max_segments,
            report=args.report,
            plot=args.plot,
        )
        status, _ = execute(cfg, out)
    except (ParamexError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    raise SystemExit(main())
