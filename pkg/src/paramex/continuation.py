"""Chaining parameter-box certificates along a scalar parameter range.

Each segment refines a zero at its center p_k, certifies a parameter box
around it and hands the box boundary to the next segment as its center.
Certificates only cover the open box, so consecutive segments share an
endpoint that lies in the interior of the later one.

Restarting at the boundary is a policy of this package; each certificate
on its own only speaks about its open parameter box.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ApproxLeavesDomain, CertificationFailed, NewtonFailed, ProblemError
from .expr import System
from .interval import Box, Interval, IntervalMatrix
from .parametric import ParamCertificate, certify_parameter_box, make_approx
from .regions import fixed_regions
from .verify import newton_refine, point_inverse

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepPolicy:
    approx: str = "tangent"
    mu_floor: float | None = None  # default: 1e-6 * width of the range
    max_segments: int = 200
    newton_tol: float = 1e-12
    tol_eta: float = 1e-9
    tol_sigma: float = 1e-9
    sref_radius: float | None = None  # default: width of the range
    sref_rounds: int = 4
    v: tuple[float, ...] | None = None
    y: tuple[float, ...] | None = None
    xref: Box | None = None


@dataclass(frozen=True)
class Segment:
    index: int
    direction: int  # +1 upward, -1 downward, 0 for the starting segment
    center: float
    sref: Box
    cert: ParamCertificate

    @property
    def mu(self) -> float:
        return self.cert.mu

    @property
    def s_box(self) -> Box:
        return self.cert.s_certified


@dataclass
class SweepResult:
    s_range: Box
    segments: list[Segment] = field(default_factory=list)
    covered: list[Interval] = field(default_factory=list)
    gaps: list[Interval] = field(default_factory=list)
    stop_reason: str = "covered"
    failures: list[dict] = field(default_factory=list)

    @property
    def mu_log(self) -> list[tuple[int, float, float]]:
        """(segment index, center, mu) for every certified segment."""
        return [(s.index, s.center, s.mu) for s in self.segments]


def certify_segment(
    sys: System,
    p: float,
    guess: Sequence[float],
    sref: Box,
    policy: SweepPolicy,
    *,
    secant_point: tuple[Sequence[float], float] | None = None,
) -> ParamCertificate:
    """Newton at p, fixed certificate, approximation and parameter certificate."""
    xref = policy.xref or sys.X
    z = newton_refine(sys, [p], guess, tol=policy.newton_tol).z
    C = IntervalMatrix.from_floats(point_inverse(sys, z, [p]).tolist())
    fixed = fixed_regions(sys, z, [p], C, xref, policy.v)
    if policy.approx == "secant" and secant_point is not None:
        approx = make_approx(sys, z, [p], "secant", x1=secant_point[0], s1=secant_point[1])
    else:
        approx = make_approx(sys, z, [p], "tangent")
    return certify_parameter_box(
        sys, fixed, approx, sref, xref, policy.y, tol_eta=policy.tol_eta, tol_sigma=policy.tol_sigma
    )


def _reach(cert: ParamCertificate, direction: int) -> float:
    box = cert.s_certified[0]
    if direction > 0:
        return box.hi - cert.fixed.p[0]
    if direction < 0:
        return cert.fixed.p[0] - box.lo
    return box.width()


def _adaptive(sys, p, guess, S: Interval, radius: float, policy, direction, secant_point):
    """Certify at p, shrinking the reference box toward the certified radius."""
    best, last_exc, r, rounds = None, None, radius, 0
    for _ in range(40):
        sref = Box([Interval(max(p - r, S.lo), min(p + r, S.hi))])
        try:
            cert = certify_segment(sys, p, guess, sref, policy, secant_point=secant_point)
        except ApproxLeavesDomain as exc:
            # the predictor leaves the state box: retry with a smaller parameter box
            last_exc = exc
            r *= 0.5
            continue
        if best is None or _reach(cert, direction) > _reach(best[1], direction):
            best = (sref, cert)
        rounds += 1
        # a reference box slightly wider than the certified radius keeps the
        # bounds tight without clipping the certified box
        new_r = 1.1 * cert.mu * (policy.y[0] if policy.y else 1.0)
        if rounds >= policy.sref_rounds or abs(new_r - r) < 0.05 * r:
            break
        r = new_r
    if best is None:
        raise last_exc or CertificationFailed("no reference box could be certified")
    return best


def sweep(
    sys: System,
    s_range,
    start_p: float,
    start_guess: Sequence[float],
    policy: SweepPolicy | None = None,
    *,
    secant_start: tuple[Sequence[float], float] | None = None,
) -> SweepResult:
    """Cover ``s_range`` by certified parameter boxes, starting at ``start_p``."""
    if sys.p != 1:
        raise ProblemError("chained sweeping needs a single parameter")
    policy = policy or SweepPolicy()
    if isinstance(s_range, Interval):
        rng = s_range
    else:
        rng = (s_range if isinstance(s_range, Box) else Box.from_pairs(s_range))[0]
    if not rng.contains(start_p):
        raise ProblemError("start parameter must lie in the sweep range")
    S = sys.S[0]
    width = rng.width()
    mu_floor = policy.mu_floor if policy.mu_floor is not None else 1e-6 * width
    radius = policy.sref_radius or max(width, mu_floor)
    result = SweepResult(Box([rng]))
    reasons = []

    def run(p, guess, direction, secant_point):
        while len(result.segments) < policy.max_segments:
            try:
                sref, cert = _adaptive(sys, p, guess, S, radius, policy, direction, secant_point)
            except NewtonFailed as exc:
                result.failures.append({"center": p, "direction": direction, "condition": exc.condition, "message": str(exc)})
                reasons.append("newton_failed")
                return None
            except CertificationFailed as exc:
                result.failures.append({"center": p, "direction": direction, "condition": exc.condition, "message": str(exc)})
                reasons.append("certification_failed")
                return None
            seg = Segment(len(result.segments), direction, p, sref, cert)
            result.segments.append(seg)
            log.info("segment %d at p=%.17g: mu=%.6g", seg.index, p, cert.mu)
            if cert.mu < mu_floor:
                reasons.append("mu_below_floor")
                return seg
            box = cert.s_certified[0]
            if direction == 0:
                return seg
            nxt = box.hi if direction > 0 else box.lo
            if (direction > 0 and nxt > rng.hi) or (direction < 0 and nxt < rng.lo):
                return seg
            if nxt == p:
                reasons.append("mu_below_floor")
                return seg
            guess = cert.approx([nxt]).mid()
            secant_point = (cert.fixed.z, p)
            p = nxt
        reasons.append("max_segments")
        return None

    first = run(start_p, start_guess, 0, secant_start)
    if first is not None and first.mu >= mu_floor:
        box = first.cert.s_certified[0]
        seed = (first.cert.fixed.z, start_p)
        if box.hi <= rng.hi:
            run(box.hi, first.cert.approx([box.hi]).mid(), +1, seed)
        if box.lo >= rng.lo:
            run(box.lo, first.cert.approx([box.lo]).mid(), -1, seed)

    result.covered, result.gaps = _coverage(rng, [s.s_box[0] for s in result.segments])
    if not result.gaps:
        result.stop_reason = "covered"
    else:
        result.stop_reason = reasons[0] if reasons else "max_segments"
    return result


def _coverage(rng: Interval, boxes: list[Interval]) -> tuple[list[Interval], list[Interval]]:
    """Merged union of ``boxes`` inside ``rng`` and the complementary gaps.

    Shared endpoints count as covered (the later segment's interior holds
    them). An endpoint of the range is covered only when a box extends
    strictly beyond it, or when the range itself ends there and the box's
    interior reaches it.
    """
    parts = sorted((b.intersect(rng) for b in boxes if not b.intersect(rng).is_empty), key=lambda b: b.lo)
    merged: list[Interval] = []
    for b in parts:
        if merged and b.lo <= merged[-1].hi:
            merged[-1] = merged[-1].hull(b)
        else:
            merged.append(b)
    gaps, cursor = [], rng.lo
    for b in merged:
        if b.lo > cursor:
            gaps.append(Interval(cursor, b.lo))
        cursor = max(cursor, b.hi)
    if cursor < rng.hi:
        gaps.append(Interval(cursor, rng.hi))
    return merged, gaps


def sweep_csv(result: SweepResult) -> str:
    """One row per segment with the boxes needed to redraw the enclosure plot."""
    n = len(result.segments[0].cert.fixed.z) if result.segments else 0
    head = ["segment", "s_lo", "s_hi"]
    for j in range(1, n + 1):
        head += [f"xhat_{j}_lo", f"xhat_{j}_hi", f"incl_{j}_lo", f"incl_{j}_hi", f"excl_{j}_lo", f"excl_{j}_hi"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(head)
    for seg in sorted(result.segments, key=lambda s: s.s_box[0].lo):
        c = seg.cert
        sb = c.s_certified[0]
        xs = c.approx(c.s_certified)
        row = [seg.index, repr(sb.lo), repr(sb.hi)]
        for j in range(n):
            row += [
                repr(xs[j].lo),
                repr(xs[j].hi),
                repr(c.enclosure_s_mu[j].lo),
                repr(c.enclosure_s_mu[j].hi),
                repr(c.exclusion_hull[j].lo),
                repr(c.exclusion_hull[j].hi),
            ]
        wr.writerow(row)
    return buf.getvalue()
