from __future__ import annotations

import csv
import io

import pytest

from paramex.continuation import SweepPolicy, _coverage, sweep, sweep_csv
from paramex.errors import ProblemError
from paramex.expr import parse_system
from paramex.interval import Box, Interval

from oracles import branch_zero, example_system


def _contains_oracle(res, samples=100):
    for seg in res.segments:
        c = seg.cert
        s = c.s_certified[0]
        for k in range(1, samples + 1):
            t = s.lo + (s.hi - s.lo) * k / (samples + 1)
            z = branch_zero(t)
            if not c.enclosure_s_mu.contains(Box.point([float(z[0]), float(z[1])])):
                return False
    return True


def test_short_range_single_box():
    res = sweep(example_system(), [[0.66, 1.34]], 1.0, [3.0, 4.0])
    assert res.stop_reason == "covered"
    assert 1 <= len(res.segments) <= 3
    assert _contains_oracle(res)


def test_grid_covered_by_some_segment():
    res = sweep(example_system(), [[0.66, 1.34]], 1.0, [3.0, 4.0])
    for k in range(100):
        t = 0.66 + 0.68 * k / 99
        z = branch_zero(t)
        hits = [
            seg
            for seg in res.segments
            if seg.s_box[0].interior_contains(t) and seg.cert.enclosure_s_mu.contains(Box.point([float(z[0]), float(z[1])]))
        ]
        assert hits, t


def test_secant_sweep_reuses_previous_center():
    res = sweep(
        example_system(),
        [[0.7, 1.3]],
        1.0,
        [3.0, 4.0],
        SweepPolicy(approx="secant"),
        secant_start=([13**0.5, 13**0.5], 0.0),
    )
    assert res.stop_reason == "covered"
    assert len(res.segments) <= 5
    for seg in res.segments[1:]:
        assert seg.cert.approx.kind == "secant"
        assert seg.cert.approx.second_point[1][0] != seg.center
    assert _contains_oracle(res, 30)


def test_cluster_effect_near_branch_point():
    res = sweep(example_system(), [[1.0, 2.0]], 1.0, [3.0, 4.0], SweepPolicy(mu_floor=1e-4))
    assert res.stop_reason == "mu_below_floor"
    ups = [m for i, p, m in res.mu_log if res.segments[i].direction > 0]
    assert len(ups) > 5
    assert all(b < a for a, b in zip(ups, ups[1:]))
    assert res.gaps and res.gaps[-1].hi == 2.0


def test_steps_share_endpoints():
    res = sweep(example_system(), [[0.3, 1.7]], 1.0, [3.0, 4.0])
    assert res.stop_reason == "covered"
    for seg in res.segments:
        if seg.direction == 0:
            continue
        prev = res.segments[seg.index - 1] if seg.index > 1 and res.segments[seg.index - 1].direction == seg.direction else res.segments[0]
        edge = prev.s_box[0].hi if seg.direction > 0 else prev.s_box[0].lo
        assert seg.center == edge
        assert seg.s_box[0].interior_contains(edge)


def test_coverage_partitions_range():
    rng = Interval(0.0, 1.0)
    covered, gaps = _coverage(rng, [Interval(0.1, 0.3), Interval(0.3, 0.5), Interval(0.7, 1.2)])
    assert covered == [Interval(0.1, 0.5), Interval(0.7, 1.0)]
    assert gaps == [Interval(0.0, 0.1), Interval(0.5, 0.7)]
    total = sum(c.width() for c in covered) + sum(g.width() for g in gaps)
    assert total == pytest.approx(1.0, abs=0)


def test_sweep_csv_columns():
    res = sweep(example_system(), [[0.7, 1.3]], 1.0, [3.0, 4.0])
    rows = list(csv.reader(io.StringIO(sweep_csv(res))))
    head = rows[0]
    assert head[:3] == ["segment", "s_lo", "s_hi"]
    for j in (1, 2):
        for part in ("xhat", "incl", "excl"):
            assert f"{part}_{j}_lo" in head and f"{part}_{j}_hi" in head
    assert len(rows) == 1 + len(res.segments)


def test_rejects_multiple_parameters():
    sys2 = parse_system("x1 - s1*s2", 1, 2, X=[[-5, 5]], S=[[0, 1], [0, 1]])
    with pytest.raises(ProblemError):
        sweep(sys2, [[0, 1], [0, 1]], 0.5, [0.25])


def test_start_outside_range():
    with pytest.raises(ProblemError):
        sweep(example_system(), [[0.7, 1.3]], 1.5, [3.0, 4.0])


def test_newton_failure_recorded():
    # start guess converges nowhere for this system: recorded, not raised
    sysm = parse_system("x1^2 + 1 + s ; x2 - s", 2, 1, X=[[-5, 5], [-5, 5]], S=[[0, 1]])
    res = sweep(sysm, [[0, 1]], 0.5, [0.1, 0.5])
    assert res.stop_reason == "newton_failed"
    assert res.failures and res.failures[0]["condition"] == "newton_convergence"
    assert res.gaps == [Interval(0.0, 1.0)]
