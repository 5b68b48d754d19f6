import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from paramex.expr import load_problem, parse_constant_interval  # noqa: E402
from paramex.parametric import certify_parameter_box, make_approx  # noqa: E402
from paramex.regions import certify_fixed  # noqa: E402

from oracles import TANGENT  # noqa: E402


def example_certificate(kind: str):
    prob = load_problem(TANGENT)
    sysm = prob.system
    fixed = certify_fixed(sysm, prob.center_p, prob.guess_z, v=prob.v, xbox=sysm.X)
    if kind == "secant":
        r13 = parse_constant_interval("sqrt(13)")
        approx = make_approx(sysm, fixed.z, fixed.p, "secant", x1=[r13, r13], s1=0.0)
    else:
        approx = make_approx(sysm, fixed.z, fixed.p, "tangent")
    return certify_parameter_box(sysm, fixed, approx, sysm.S, sysm.X, prob.y)


@pytest.fixture(scope="session")
def tangent_cert():
    return example_certificate("tangent")


@pytest.fixture(scope="session")
def secant_cert():
    return example_certificate("secant")


# one line per acceptance criterion, printed after the run
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[k])
