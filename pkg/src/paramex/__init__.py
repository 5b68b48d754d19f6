"""Verified enclosures for solutions of parameter-dependent nonlinear systems."""

from .continuation import SweepPolicy, SweepResult, sweep
from .errors import CertificationFailed, ParamexError, ParseError, ProblemError
from .expr import System, load_problem, parse_system, problem_from_dict
from .interval import Box, Interval, IntervalMatrix, IntervalTensor3
from .parametric import ApproxFn, ParamCertificate, certify_parameter_box, make_approx, regions_at_s
from .regions import FixedCertificate, certify_fixed, fixed_regions
from .verify import KahanResult, kahan_test, krawczyk, newton_refine

__all__ = [
    "ApproxFn",
    "Box",
    "CertificationFailed",
    "FixedCertificate",
    "Interval",
    "IntervalMatrix",
    "IntervalTensor3",
    "KahanResult",
    "ParamCertificate",
    "ParamexError",
    "ParseError",
    "ProblemError",
    "SweepPolicy",
    "SweepResult",
    "System",
    "certify_fixed",
    "certify_parameter_box",
    "fixed_regions",
    "kahan_test",
    "krawczyk",
    "load_problem",
    "make_approx",
    "newton_refine",
    "parse_system",
    "problem_from_dict",
    "regions_at_s",
    "sweep",
]
