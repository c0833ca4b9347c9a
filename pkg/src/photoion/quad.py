"""Numerical-integration primitives.

Adaptive panel quadrature, Cauchy principal values by singularity
subtraction, product rules on the unit sphere, and decaying time integrals
with an empirical tail bound.  Everything here is a pure function; the
heavier physics modules compose these.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PVProblem",
    "QuadratureError",
    "NonIntegrableTailError",
    "adaptive_quad",
    "pv_integral",
    "sphere_nodes",
    "sphere_integral",
    "damped_time_integral",
]


class QuadratureError(RuntimeError):
    """Adaptive subdivision exhausted without reaching the requested tol."""


class NonIntegrableTailError(RuntimeError):
    """Empirical decay fit of a time integrand has slope > -1."""


@lru_cache(maxsize=64)
def _gauss_rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_estimate(f, a, b, n):
    x, w = _gauss_rule(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.asarray(f(mid + half * x))
    if vals.shape[0] != n:
        raise ValueError("integrand must return one value per abscissa")
    return half * np.tensordot(w, vals, axes=(0, 0))


def adaptive_quad(f, a, b, tol, rule_order=12, max_panels=4096):
    """Integrate a vectorized integrand over [a, b] to absolute tolerance.

    f maps an array of abscissae to an array of values whose leading axis
    matches the input; values may be complex and may carry trailing axes
    (vector-valued integrands).

    Parameters
    ----------
    f : callable
    a, b : floats, a < b
    tol : absolute tolerance, distributed over sub-panels by length
    rule_order : points of the embedded Gauss rule per panel
    max_panels : subdivision budget

    Returns
    -------
    (value, err_estimate) where err_estimate sums the accepted panel errors.
    """
    if not b > a:
        raise ValueError("need a < b")
    total_len = b - a
    stack = [(a, b, _panel_estimate(f, a, b, rule_order))]
    acc = None
    err_acc = 0.0
    panels = 0
    while stack:
        lo, hi, coarse = stack.pop()
        panels += 1
        if panels > max_panels:
            raise QuadratureError(
                f"adaptive quadrature needs more than {max_panels} panels for tol={tol}"
            )
        mid = 0.5 * (lo + hi)
        left = _panel_estimate(f, lo, mid, rule_order)
        right = _panel_estimate(f, mid, hi, rule_order)
        fine = left + right
        err = np.linalg.norm(np.ravel(fine - coarse))
        budget = tol * (hi - lo) / total_len
        if err <= budget or (hi - lo) < 1e-14 * total_len:
            acc = fine if acc is None else acc + fine
            err_acc += err
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    return acc, err_acc


@dataclass
class PVProblem:
    """Cauchy-principal-value integrand f(x)/(x - s) on [a, b].

    The integrand callable is f alone (without the singular kernel), must be
    vectorized over x, and is assumed smooth on [a, b].  subtraction_order 1
    additionally removes the linear term, which helps when f has a steep
    slope at the singularity.
    """

    integrand: callable
    a: float
    b: float
    s: float
    subtraction_order: int = 0

    def __post_init__(self):
        if not (self.a < self.s < self.b):
            raise ValueError("singularity must lie strictly inside the interval")
        if self.subtraction_order not in (0, 1):
            raise ValueError("subtraction_order must be 0 or 1")


def _fd_slope(f, s, scale):
    h = max(abs(scale), 1.0) * 1e-6
    xs = np.array([s - 2 * h, s - h, s + h, s + 2 * h])
    v = np.asarray(f(xs))
    return (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h)


def pv_integral(p, tol=1e-10):
    """PV integral of f(x)/(x-s) over [a, b] by singularity subtraction.

    Returns f(s)*ln|(b-s)/(a-s)| plus the adaptive integral of the
    subtracted (removable-singularity) part.
    """
    f, a, b, s = p.integrand, p.a, p.b, p.s
    fs = np.asarray(f(np.array([s])))[0]
    slope = _fd_slope(f, s, b - a)
    if p.subtraction_order == 0:

        def g(x):
            dx = x - s
            num = np.asarray(f(x)) - fs
            out = np.where(np.abs(dx) < 1e-14 * (b - a), slope, _safe_div(num, dx))
            return out

        correction = 0.0
    else:

        def g(x):
            dx = x - s
            num = np.asarray(f(x)) - fs - slope * dx
            out = np.where(np.abs(dx) < 1e-14 * (b - a), 0.0, _safe_div(num, dx))
            return out

        correction = slope * (b - a)
    smooth, _ = adaptive_quad(g, a, b, tol)
    return smooth + correction + fs * np.log(abs((b - s) / (a - s)))


def _safe_div(num, den):
    den = np.where(den == 0.0, 1.0, den)
    return num / den


@lru_cache(maxsize=32)
def sphere_nodes(order, d=3):
    """Unit directions and weights of the product rule on the sphere.

    d=3: Gauss-Legendre in cos(theta) x uniform trapezoid in phi (2*order
    points, exact for the periodic direction).  d=1: the two-point 'sphere'
    {+1, -1} with unit weights.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d != 3:
        raise ValueError("only d in {1, 3} is supported")
    u, wu = _gauss_rule(order)
    n_phi = 2 * order
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - u**2)
    dirs = np.empty((order * n_phi, 3))
    dirs[:, 0] = np.outer(st, np.cos(phi)).ravel()
    dirs[:, 1] = np.outer(st, np.sin(phi)).ravel()
    dirs[:, 2] = np.repeat(u, n_phi)
    w = np.repeat(wu, n_phi) * (2.0 * np.pi / n_phi)
    return dirs, w


def sphere_integral(f, order=16, d=3, with_error=False):
    """Integral of f over the unit sphere (d=3) or over {+1,-1} (d=1).

    f takes an (n, d) array of unit directions and returns values with
    leading axis n.  The returned value uses the order-doubled rule; the
    optional error estimate is the difference between the two orders.
    """
    dirs, w = sphere_nodes(order, d)
    coarse = np.tensordot(w, np.asarray(f(dirs)), axes=(0, 0))
    if d == 1:
        return (coarse, 0.0) if with_error else coarse
    dirs2, w2 = sphere_nodes(2 * order, d)
    fine = np.tensordot(w2, np.asarray(f(dirs2)), axes=(0, 0))
    if with_error:
        return fine, float(np.linalg.norm(np.ravel(fine - coarse)))
    return fine


def damped_time_integral(F, K_decay, T_h, tol, two_sided=False, n_fit=16):
    """Integrate a decaying vector-valued integrand and bound its tail.

    F maps a scalar time to a vector; the integral runs over [0, T_h]
    (or [-T_h, T_h]).  The tail beyond the horizon is estimated by fitting
    ||F|| ~ C*s^(-K_decay) over the last decade of samples and integrating
    the fit; a free-slope fit shallower than -1 aborts, since then the tail
    does not converge.

    Returns (integral, tail_bound).
    """
    if K_decay <= 1:
        raise ValueError("K_decay must exceed 1")

    def fvec(xs):
        return np.stack([np.asarray(F(x)) for x in np.atleast_1d(xs)])

    value, _ = adaptive_quad(fvec, 0.0, T_h, tol if not two_sided else tol / 2)
    if two_sided:
        neg, _ = adaptive_quad(fvec, -T_h, 0.0, tol / 2)
        value = value + neg

    tail = 0.0
    for sign in (1.0, -1.0) if two_sided else (1.0,):
        s_fit = sign * np.geomspace(T_h / 10.0, T_h, n_fit)
        norms = np.array([np.linalg.norm(np.ravel(F(s))) for s in s_fit])
        if norms.max() < 1e-250:
            continue
        norms = np.maximum(norms, 1e-300)
        logs = np.log(np.abs(s_fit))
        free_slope = np.polyfit(logs, np.log(norms), 1)[0]
        if free_slope > -1.0:
            raise NonIntegrableTailError(
                f"decay fit slope {free_slope:.3f} > -1; tail does not converge "
                "(mode grid too coarse or horizon past the recurrence time)"
            )
        log_c = float(np.mean(np.log(norms) + K_decay * logs))
        tail += np.exp(log_c) * T_h ** (1.0 - K_decay) / (K_decay - 1.0)
    return value, float(tail)
