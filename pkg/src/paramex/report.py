"""JSON certificate reports, their re-validation, and CSV plot data.

Every number that carries a guarantee is written as a ``[lo, hi]`` pair;
a one-sided bound b is written as ``[b, b]``. Infinite endpoints become
the strings ``"inf"`` / ``"-inf"`` and an empty interval becomes ``null``.
Tensors are nested as ``T[i][j][k]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

from .continuation import SweepResult
from .errors import NonpositiveDiscriminant
from .interval import Box, Interval, IntervalMatrix, IntervalTensor3, quad_form
from .parametric import EnclosureAtS, LambdaAt, ParamBounds, ParamCertificate, lambda_at
from .regions import FixedCertificate, box_around, lambda_roots

FORMAT = "paramex-certificate/1"


def _num(x: float):
    if isinstance(x, float) and not math.isfinite(x):
        if math.isnan(x):
            return None
        return "inf" if x > 0 else "-inf"
    return x


def pair(x) -> list | None:
    """[lo, hi] for an interval or a float (thin pair)."""
    iv = x if isinstance(x, Interval) else Interval(x, x)
    return iv.to_json()


def pairs(xs) -> list:
    return [pair(x) for x in xs]


def _unpair(data) -> Interval:
    return Interval.from_json(data)


def clean(obj: Any):
    """Make exception details JSON-safe."""
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (Interval, Box, IntervalMatrix, IntervalTensor3)):
        return obj.to_json()
    return obj


# --------------------------------------------------------------------------
# serialisation


def fixed_to_dict(c: FixedCertificate) -> dict:
    lam = c.lambdas
    return {
        "z": pairs(c.z),
        "p": pairs(c.p),
        "C": c.C.to_json(),
        "v": pairs(c.v),
        "xbox": c.xbox.to_json(),
        "b_bar": c.bounds.b_bar.to_json(),
        "B0": c.bounds.B0.to_json(),
        "B_bar": c.bounds.B_bar.to_json(),
        "w": pairs(lam.w),
        "a": pairs(lam.a),
        "D": pairs(lam.D),
        "lambda_e_j": pairs(lam.lambda_e_j),
        "lambda_i_j": pairs(lam.lambda_i_j),
        "lambda_e": pair(lam.lambda_e),
        "lambda_i": pair(lam.lambda_i),
        "R_i": c.R_i.to_json(),
        "R_e": c.R_e.to_json(),
    }


def lambda_to_dict(lam: LambdaAt) -> dict:
    return {
        "nu": pair(lam.nu),
        "b": pairs(lam.b),
        "w": pairs(lam.w),
        "D": pairs(lam.D),
        "lambda_e_j": pairs(lam.lambda_e_j),
        "lambda_i_j": pairs(lam.lambda_i_j),
        "lambda_e": pair(lam.lambda_e),
        "lambda_i": pair(lam.lambda_i),
    }


def bounds_to_dict(b: ParamBounds) -> dict:
    return {
        "sref": b.sref.to_json(),
        "xref": b.xref.to_json(),
        "y": pairs(b.y),
        "G0_bar": b.G0_bar.to_json(),
        "A_bar": b.A_bar.to_json(),
        "Bfrak_bar": b.Bfrak_bar.to_json(),
        "afrak": pairs(b.afrak),
        "G0y": pairs(b.G0y),
        "alpha": pairs(b.alpha),
        "beta": pairs(b.beta),
        "gamma": pairs(b.gamma),
    }


def param_to_dict(c: ParamCertificate, enclosure: str = "both") -> dict:
    ap = c.approx
    out = {
        "approx": {
            "kind": ap.kind,
            "z": pairs(ap.z),
            "p": pairs(ap.p),
            "theta": ap.theta.to_json(),
            "second_point": None
            if ap.second_point is None
            else {"x1": pairs(ap.second_point[0]), "s1": pairs(ap.second_point[1])},
        },
        "bounds": bounds_to_dict(c.bounds),
        "mu_lower_j": pairs(c.roots.mu_lower_j),
        "mu_upper_j": pairs(c.roots.mu_upper_j),
        "mu_bar": pair(c.mu_bar),
        "eta": pair(c.eta),
        "sigma": pair(c.sigma),
        "mu": pair(c.mu),
        "binding": c.binding,
        "lambda_eta": lambda_to_dict(c.lambda_eta),
        "lambda_mu": lambda_to_dict(c.lambda_mu),
        "s_tilde": c.s_tilde.to_json(),
        "s_certified": c.s_certified.to_json(),
        "enclosure": {},
        "exclusion_hull": c.exclusion_hull.to_json(),
        "notes": [
            "for every s in the interior of s_certified, x_hat(s) + [-1,1] lambda_i_mu v contains a zero of H(., s)",
            "no other zero lies in the interior of x_hat(s) + [-1,1] lambda_e_mu v intersected with xref",
            "enclosure.s_mu evaluates x_hat over s_certified; enclosure.s_ref evaluates it over the whole reference box",
        ],
    }
    if enclosure in ("s_mu", "both"):
        out["enclosure"]["s_mu"] = c.enclosure_s_mu.to_json()
    if enclosure in ("s_ref", "both"):
        out["enclosure"]["s_ref"] = c.enclosure_s_ref.to_json()
    return out


def at_s_to_dict(r: EnclosureAtS, certified: Box | None = None) -> dict:
    out = {
        "s": pairs(r.s),
        "x_hat": r.x_hat.to_json(),
        "b": pairs(r.b),
        "w": pairs(r.w),
        "D": pairs(r.D),
        "lambda_e_j": pairs(r.lambda_e_j),
        "lambda_i_j": pairs(r.lambda_i_j),
        "lambda_e_s": pair(r.lambda_e_s),
        "lambda_i_s": pair(r.lambda_i_s),
        "R_i_s": r.R_i_s.to_json(),
        "R_e_s": r.R_e_s.to_json(),
    }
    if certified is not None:
        out["s_in_certified_interior"] = certified.interior_contains(Box.point(r.s))
    return out


def sweep_to_dict(res: SweepResult, enclosure: str = "both") -> dict:
    return {
        "s_range": res.s_range.to_json(),
        "stop_reason": res.stop_reason,
        "covered": [iv.to_json() for iv in res.covered],
        "gaps": [iv.to_json() for iv in res.gaps],
        "failures": clean(res.failures),
        "mu_log": [{"segment": i, "center": pair(p), "mu": pair(m)} for i, p, m in res.mu_log],
        "policy_note": "restarting each segment at the boundary of the previous certified box is a heuristic of this package; every guarantee covers only its own open s_certified box",
        "segments": [
            {
                "index": s.index,
                "direction": s.direction,
                "center": pair(s.center),
                "sref": s.sref.to_json(),
                "fixed": fixed_to_dict(s.cert.fixed),
                "parametric": param_to_dict(s.cert, enclosure),
            }
            for s in res.segments
        ],
    }


def dumps(report: dict) -> str:
    """Deterministic JSON text (sorted keys, shortest float repr, no timestamps)."""
    return json.dumps(clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# validation


def _lo(x) -> float:
    return _unpair(x).lo


def _hi(x) -> float:
    return _unpair(x).hi


def _box(data) -> Box:
    return Box.from_json(data)


def validate_fixed(d: dict) -> list[str]:
    errs = []
    z = [_lo(t) for t in d["z"]]
    v = [_lo(t) for t in d["v"]]
    xbox = _box(d["xbox"])
    n = len(z)
    B0 = IntervalMatrix.from_json(d["B0"])
    Bb = IntervalTensor3.from_json(d["B_bar"])
    vb = Box.point(v)
    w = vb - IntervalMatrix([[a.hi for a in r] for r in B0.entries]) @ vb
    a = quad_form(vb, IntervalTensor3([[[t.hi for t in f] for f in s] for s in Bb.entries]))
    b = [_hi(t) for t in d["b_bar"]]
    for j in range(n):
        if _lo(d["w"][j]) != w[j].lo or _hi(d["a"][j]) != a[j].hi:
            errs.append(f"fixed: w or a of component {j + 1} does not match B0, B_bar and v")
        try:
            D, le, li = lambda_roots(w[j].lo, a[j].hi, b[j], j)
        except NonpositiveDiscriminant:
            errs.append(f"fixed: D_{j + 1} is not positive")
            continue
        if _lo(d["lambda_e_j"][j]) != le or _hi(d["lambda_i_j"][j]) != li:
            errs.append(f"fixed: lambda pair of component {j + 1} does not match")
    le = min(_lo(t) for t in d["lambda_e_j"])
    li = max(_hi(t) for t in d["lambda_i_j"])
    if _lo(d["lambda_e"]) != le or _hi(d["lambda_i"]) != li:
        errs.append("fixed: lambda_e / lambda_i are not the min / max over components")
    if not le > li:
        errs.append("fixed: lambda_e does not exceed lambda_i")
    R_i = _box(d["R_i"])
    if not R_i.contains(box_around(z, li, v, outward=True)):
        errs.append("fixed: R_i does not contain z +- lambda_i v")
    if not xbox.contains(R_i):
        errs.append("fixed: R_i leaves xbox")
    R_e = _box(d["R_e"])
    if not xbox.contains(R_e) or not R_e.contains(R_i):
        errs.append("fixed: R_e is not between R_i and xbox")
    return errs


def _bounds_from_dict(fixed: dict, par: dict) -> ParamBounds:
    bd = par["bounds"]
    return ParamBounds(
        G0_bar=IntervalMatrix.from_json(bd["G0_bar"]),
        A_bar=IntervalTensor3.from_json(bd["A_bar"]),
        Bfrak_bar=IntervalTensor3.from_json(bd["Bfrak_bar"]),
        y=tuple(_lo(t) for t in bd["y"]),
        v=tuple(_lo(t) for t in fixed["v"]),
        w=tuple(_lo(t) for t in fixed["w"]),
        b=tuple(_hi(t) for t in fixed["b_bar"]),
        afrak=tuple(_unpair(t) for t in bd["afrak"]),
        alpha=tuple(_unpair(t) for t in bd["alpha"]),
        beta=tuple(_unpair(t) for t in bd["beta"]),
        gamma=tuple(_unpair(t) for t in bd["gamma"]),
        G0y=tuple(_unpair(t) for t in bd["G0y"]),
        sref=_box(bd["sref"]),
        xref=_box(bd["xref"]),
    )


def validate_param(fixed: dict, par: dict) -> list[str]:
    errs = []
    bounds = _bounds_from_dict(fixed, par)
    eta, sigma, mu = _lo(par["eta"]), _lo(par["sigma"]), _lo(par["mu"])
    if mu != min(eta, sigma) or not mu > 0:
        errs.append("param: mu must equal min(eta, sigma) and be positive")
    if min(eta, sigma) < 0:
        errs.append("param: negative eta or sigma")
    try:
        lam = lambda_at(mu, bounds)
    except NonpositiveDiscriminant:
        return errs + ["param: discriminant not positive at mu"]
    if not lam.lambda_e > lam.lambda_i:
        errs.append("param: lambda_e does not exceed lambda_i at mu")
    if _lo(par["lambda_mu"]["lambda_e"]) != lam.lambda_e or _hi(par["lambda_mu"]["lambda_i"]) != lam.lambda_i:
        errs.append("param: reported lambda pair at mu does not match a recomputation")
    p = [_lo(t) for t in fixed["p"]]
    s_tilde = _box(par["s_tilde"])
    if not box_around(p, mu, bounds.y, outward=True).contains(s_tilde):
        errs.append("param: s_tilde exceeds [p - mu y, p + mu y]")
    s_cert = _box(par["s_certified"])
    if not s_tilde.contains(s_cert) or not bounds.sref.contains(s_cert):
        errs.append("param: s_certified is not inside s_tilde and sref")
    theta = IntervalMatrix.from_json(par["approx"]["theta"])
    z = Box.point([_lo(t) for t in par["approx"]["z"]])
    xs = z + theta @ (s_cert - Box.point(p))
    v = bounds.v
    grown = Box(
        Interval(c.lo - 2 * lam.lambda_i * vj, c.hi + 2 * lam.lambda_i * vj) for c, vj in zip(xs, v)
    )
    inc = par["enclosure"].get("s_mu")
    if inc is not None:
        enc = _box(inc)
        if not enc.contains(Box(Interval(c.lo, c.hi) for c in xs)):
            errs.append("param: s_mu enclosure misses x_hat(s_certified)")
        if not grown.contains(enc):
            errs.append("param: s_mu enclosure is wider than x_hat(s_certified) + lambda_i v")
        if not bounds.xref.contains(enc):
            errs.append("param: s_mu enclosure leaves xref")
    return errs


def validate_report(report: dict) -> list[str]:
    """Re-check certificate invariants from a loaded report; returns violations."""
    errs = []
    if report.get("format") != FORMAT:
        errs.append("unknown report format")
    if report.get("status") not in ("certified", "incomplete"):
        return errs
    if "fixed" in report:
        errs += validate_fixed(report["fixed"])
        if "parametric" in report:
            errs += validate_param(report["fixed"], report["parametric"])
    for seg in report.get("sweep", {}).get("segments", []):
        errs += [f"segment {seg['index']}: {e}" for e in validate_fixed(seg["fixed"])]
        errs += [f"segment {seg['index']}: {e}" for e in validate_param(seg["fixed"], seg["parametric"])]
    return errs


# --------------------------------------------------------------------------
# CSV


def lambda_curve_csv(cert: ParamCertificate, samples: int = 201) -> str:
    """lambda_e(nu), lambda_i(nu) and per-component values for nu in [0, mu_bar]."""
    n = cert.bounds.n
    top = cert.mu_bar if math.isfinite(cert.mu_bar) else cert.mu
    head = ["nu", "lambda_e", "lambda_i"]
    head += [f"lambda_e_{j}" for j in range(1, n + 1)] + [f"lambda_i_{j}" for j in range(1, n + 1)]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(head)
    for k in range(samples):
        nu = top * k / (samples - 1)
        try:
            lam = lambda_at(nu, cert.bounds)
        except NonpositiveDiscriminant:
            wr.writerow([repr(nu)] + ["nan"] * (len(head) - 1))
            continue
        vals = [lam.lambda_e, lam.lambda_i, *lam.lambda_e_j, *lam.lambda_i_j]
        wr.writerow([repr(nu)] + [repr(x) for x in vals])
    return buf.getvalue()
