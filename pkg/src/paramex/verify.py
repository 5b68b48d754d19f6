"""Point Newton refinement, preconditioning and the Krawczyk existence test."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NewtonFailed, SingularJacobianError
from .expr import System
from .interval import Box, Interval, IntervalMatrix, coerce
from .slope import slope_first

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class NewtonResult:
    z: tuple[float, ...]
    residual_norm: float
    iterations: int
    converged: bool


def _residual(sys: System, x, s) -> np.ndarray:
    return np.array(sys.eval_float(x, s), dtype=float)


def _jac_x(sys: System, x, s) -> np.ndarray:
    J = np.array(sys.jacobian_float(list(x) + list(s)), dtype=float)
    return J[:, : sys.n]


def _check_regular(J: np.ndarray, where: str):
    if not np.all(np.isfinite(J)):
        raise SingularJacobianError(f"non-finite Jacobian {where}")
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_MIN:
        raise SingularJacobianError(
            f"Jacobian {where} is numerically singular (reciprocal condition {1.0 / cond:.3g})",
            details={"reciprocal_condition": float(1.0 / cond)},
        )


def newton_refine(sys: System, s, x0, tol: float = 1e-12, max_iter: int = 50) -> NewtonResult:
    """Damped Newton iteration in floating point for H(., s) = 0.

    The step is halved (at most 30 times) until the residual norm decreases.
    Raises NewtonFailed, carrying the last iterate, when ``tol`` is not met.
    """
    s = [float(v) for v in s]
    x = np.array([float(v) for v in x0], dtype=float)
    r = _residual(sys, x, s)
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    it = 0
    while norm > tol and it < max_iter:
        J = _jac_x(sys, x, s)
        _check_regular(J, f"at x={x.tolist()}")
        step = np.linalg.solve(J, r)
        t = 1.0
        for _ in range(31):
            cand = x - t * step
            rc = _residual(sys, cand, s)
            nc = float(np.max(np.abs(rc)))
            if np.isfinite(nc) and nc < norm:
                break
            t *= 0.5
        else:
            break
        x, r, norm = cand, rc, nc
        it += 1
    if norm <= tol:
        # a couple of polishing steps, kept only while the residual drops
        for _ in range(2):
            J = _jac_x(sys, x, s)
            try:
                cand = x - np.linalg.solve(J, r)
            except np.linalg.LinAlgError:
                break
            rc = _residual(sys, cand, s)
            nc = float(np.max(np.abs(rc)))
            if not nc < norm:
                break
            x, r, norm = cand, rc, nc
    result = NewtonResult(tuple(float(v) for v in x), norm, it, norm <= tol)
    if not result.converged:
        raise NewtonFailed(f"Newton stopped at residual {norm:.3g} after {it} iterations", result=result)
    return result


def point_inverse(sys: System, z, p) -> np.ndarray:
    """Floating-point inverse of H'_x(z, p) with a regularity check."""
    J = _jac_x(sys, z, p)
    _check_regular(J, f"at z={list(z)}, p={list(p)}")
    return np.linalg.inv(J)


def preconditioner(sys: System, z, p) -> IntervalMatrix:
    return IntervalMatrix.from_floats(point_inverse(sys, z, p).tolist())


def _as_box(x) -> Box:
    if isinstance(x, Box):
        return x
    return Box(Interval(*v) if isinstance(v, (tuple, list)) else coerce(v) for v in x)


def krawczyk(sys: System, s, zbox, xbox, C: IntervalMatrix) -> Box:
    """K(zbox, xbox) = z - C F(z) - (C F[zbox, xbox] - I)(xbox - z) with z = mid(zbox).

    A thin ``zbox`` gives the usual operator; ``zbox = xbox`` gives K(x, x).
    """
    zbox, xbox = _as_box(zbox), _as_box(xbox)
    n = sys.n
    sb = [coerce(v) for v in s]
    z = Box.point(zbox.mid())
    S = slope_first(sys, list(zbox) + sb, list(xbox) + sb).slope.select_cols(range(n))
    Fz = sys.eval_point(list(z), sb)
    M = C @ S - IntervalMatrix.identity(n)
    return z - C @ Fz - M @ (xbox - z)


class KahanResult(enum.Enum):
    EXISTS_UNIQUE = "exists_unique"
    EXISTS = "exists"
    INCONCLUSIVE = "inconclusive"
    NO_ZERO = "no_zero"


def kahan_test(sys: System, s, zbox, xbox, C: IntervalMatrix) -> KahanResult:
    """Existence (and uniqueness) of a zero of H(., s) in ``xbox``.

    NO_ZERO is reported when K(z, x) misses ``xbox``: every zero in ``xbox``
    is a fixed point of the operator, so none can exist there.
    """
    xbox = _as_box(xbox)
    K = krawczyk(sys, s, zbox, xbox, C)
    if K.intersect(xbox).is_empty:
        return KahanResult.NO_ZERO
    if not xbox.contains(K):
        return KahanResult.INCONCLUSIVE
    Kxx = krawczyk(sys, s, xbox, xbox, C)
    if xbox.interior_contains(Kxx):
        return KahanResult.EXISTS_UNIQUE
    return KahanResult.EXISTS
