"""Quadrature primitives: PV goldens, sphere rules, damped time integrals."""
import numpy as np
import pytest

from photoion import quad


# ---------------------------------------------------------------- adaptive


def test_adaptive_polynomial_exact():
    val, err = quad.adaptive_quad(lambda x: x**2, 0.0, 1.0, 1e-12)
    assert abs(val - 1.0 / 3.0) < 1e-13
    assert err < 1e-12


def test_adaptive_vector_valued():
    def f(x):
        return np.stack([np.sin(x), np.cos(x)], axis=-1)

    val, _ = quad.adaptive_quad(f, 0.0, np.pi, 1e-12)
    assert np.allclose(val, [2.0, 0.0], atol=1e-12)


def test_adaptive_budget_exhaustion_raises():
    def spike(x):
        return np.abs(x - 0.3123) ** (-0.9)

    with pytest.raises(quad.QuadratureError):
        quad.adaptive_quad(spike, 0.0, 1.0, 1e-12, max_panels=8)


# ---------------------------------------------------------------- principal value


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def test_pv_constant_centered_vanishes():
    p = quad.PVProblem(one, -1.0, 1.0, 0.0)
    assert abs(quad.pv_integral(p, tol=1e-12)) < 1e-12


def test_pv_constant_symmetric_interval_vanishes():
    p = quad.PVProblem(one, 0.0, 2.0, 1.0)
    assert abs(quad.pv_integral(p, tol=1e-12)) < 1e-12


def test_pv_constant_offcenter_golden():
    # closed form: PV of 1/(x-s) on [-1,1] at s=0.5 is ln(0.5/1.5) = -ln 3
    p = quad.PVProblem(one, -1.0, 1.0, 0.5)
    assert abs(quad.pv_integral(p, tol=1e-12) - (-np.log(3.0))) < 1e-10


def _random_smooth(seed, n_coeff=8):
    rng = np.random.default_rng(seed)
    coeff = rng.normal(size=n_coeff) / (1.0 + np.arange(n_coeff)) ** 2

    def f(x):
        return np.polynomial.chebyshev.chebval(np.asarray(x), coeff)

    return f


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_pv_reflection_antisymmetry(seed):
    # reflecting the integrand about the singularity flips the PV sign on a
    # symmetric interval; equivalently the even-about-s part contributes 0
    f = _random_smooth(seed)
    s, L = 0.1, 0.8
    refl = lambda x: f(2 * s - np.asarray(x))
    direct = quad.pv_integral(quad.PVProblem(f, s - L, s + L, s), tol=1e-11)
    mirrored = quad.pv_integral(quad.PVProblem(refl, s - L, s + L, s), tol=1e-11)
    assert abs(direct + mirrored) < 5e-11
    even = lambda x: 0.5 * (f(x) + refl(x))
    pv_even = quad.pv_integral(quad.PVProblem(even, s - L, s + L, s), tol=1e-11)
    assert abs(pv_even) < 5e-11


def test_pv_subtraction_orders_agree():
    f = _random_smooth(3)
    p0 = quad.PVProblem(f, -0.5, 1.5, 0.25, subtraction_order=0)
    p1 = quad.PVProblem(f, -0.5, 1.5, 0.25, subtraction_order=1)
    v0 = quad.pv_integral(p0, tol=1e-11)
    v1 = quad.pv_integral(p1, tol=1e-11)
    assert abs(v0 - v1) < 1e-9


def test_pv_complex_integrand():
    f = lambda x: np.exp(1j * np.asarray(x))
    val = quad.pv_integral(quad.PVProblem(f, -1.0, 1.0, 0.0), tol=1e-11)
    # odd kernel kills the real (even) part; imaginary part is 2*Si(1)
    from scipy.special import sici

    si1 = sici(1.0)[0]
    assert abs(val.real) < 1e-10
    assert abs(val.imag - 2 * si1) < 1e-9


def test_pv_requires_interior_singularity():
    with pytest.raises(ValueError):
        quad.PVProblem(one, 0.0, 1.0, 1.5)


# ---------------------------------------------------------------- sphere rule


def sphere_monomial_moment(a, b, c):
    """Exact uniform-sphere integral of sigma_x^a sigma_y^b sigma_z^c.

    Vanishes unless all exponents are even; otherwise
    4*pi * (a-1)!!(b-1)!!(c-1)!! / (a+b+c+1)!!.
    """
    if a % 2 or b % 2 or c % 2:
        return 0.0

    def dfact(n):
        out = 1
        while n > 1:
            out *= n
            n -= 2
        return out

    num = dfact(a - 1) * dfact(b - 1) * dfact(c - 1)
    return 4.0 * np.pi * num / dfact(a + b + c + 1)


def test_sphere_constant():
    val = quad.sphere_integral(lambda d: np.ones(d.shape[0]), order=8)
    assert abs(val - 4 * np.pi) < 1e-12


def test_sphere_z_squared():
    val = quad.sphere_integral(lambda d: d[:, 2] ** 2, order=8)
    assert abs(val - 4 * np.pi / 3) < 1e-12


def test_sphere_degree_six_polynomial_matches_moment_oracle():
    terms = [
        (3.0, (6, 0, 0)),
        (2.0, (2, 2, 2)),
        (-1.0, (0, 4, 2)),
        (0.5, (0, 0, 6)),
        (1.7, (1, 2, 3)),  # odd in x: zero by parity
        (-2.2, (3, 1, 0)),
    ]

    def f(d):
        x, y, z = d[:, 0], d[:, 1], d[:, 2]
        out = np.zeros(d.shape[0])
        for coef, (a, b, c) in terms:
            out += coef * x**a * y**b * z**c
        return out

    exact = sum(coef * sphere_monomial_moment(*abc) for coef, abc in terms)
    val = quad.sphere_integral(f, order=8)
    assert abs(val - exact) < 1e-12


def test_sphere_odd_function_vanishes():
    val = quad.sphere_integral(lambda d: d[:, 0] * d[:, 2] ** 2 + d[:, 1], order=10)
    assert abs(val) < 1e-13


def test_sphere_d1_is_two_point_sum():
    f = lambda d: 3.0 * d[:, 0] + 5.0
    assert abs(quad.sphere_integral(f, d=1) - 10.0) < 1e-15


def test_sphere_error_estimate():
    val, err = quad.sphere_integral(
        lambda d: np.exp(d[:, 2]), order=6, with_error=True
    )
    exact = 4 * np.pi * np.sinh(1.0)
    assert abs(val - exact) < 1e-10
    assert err < 1e-6


# ---------------------------------------------------------------- damped time integral


def test_damped_exponential_closed_form():
    v = np.array([1.0, -2.0])
    T = 6.0
    val, tail = quad.damped_time_integral(lambda s: np.exp(-s) * v, 4.0, T, 1e-10)
    assert np.allclose(val, (1 - np.exp(-T)) * v, atol=1e-9)
    true_tail = np.exp(-T) * np.linalg.norm(v)
    assert tail < 10 * true_tail
    assert tail > 0.1 * true_tail


def test_damped_power_law_closed_form():
    v = np.array([2.0])
    T = 20.0
    val, tail = quad.damped_time_integral(lambda s: (1 + s) ** (-2.0) * v, 2.0, T, 1e-10)
    assert np.allclose(val, (1 - 1 / (1 + T)) * v, atol=1e-9)
    true_tail = np.linalg.norm(v) / (1 + T)
    assert 0.3 * true_tail < tail < 3 * true_tail


def test_damped_oscillatory_matches_fine_grid_oracle():
    v = np.array([1.0, 0.5])
    T = 1e3

    def F(s):
        return np.exp(1j * s) * (1 + s) ** (-2.0) * v

    s_fine = np.linspace(0.0, T, 400_001)
    oracle = np.trapezoid(
        np.exp(1j * s_fine)[:, None] * (1 + s_fine[:, None]) ** (-2.0) * v,
        s_fine,
        axis=0,
    )
    val, _ = quad.damped_time_integral(F, 2.0, T, 1e-7)
    assert np.linalg.norm(val - oracle) < 1e-5


@pytest.mark.parametrize(
    "F,K",
    [
        (lambda s: np.exp(-s) * np.ones(2), 4.0),
        (lambda s: (1 + s) ** (-2.0) * np.ones(1), 2.0),
        (lambda s: np.exp(1j * s) * (1 + s) ** (-2.0) * np.ones(2), 2.0),
    ],
)
def test_damped_tail_brackets_doubled_horizon(F, K):
    T = 12.0
    val1, tail1 = quad.damped_time_integral(F, K, T, 1e-10)
    val2, _ = quad.damped_time_integral(F, K, 2 * T, 1e-10)
    assert np.linalg.norm(val2 - val1) <= 1.5 * tail1


def test_damped_shallow_decay_aborts():
    with pytest.raises(quad.NonIntegrableTailError):
        quad.damped_time_integral(
            lambda s: (1 + s) ** (-0.5) * np.ones(1), 2.0, 50.0, 1e-8
        )


def test_damped_zero_integrand():
    val, tail = quad.damped_time_integral(lambda s: np.zeros(3), 3.0, 10.0, 1e-10)
    assert np.all(val == 0)
    assert tail == 0.0


def test_damped_two_sided():
    # even integrand: two-sided integral doubles the one-sided one
    F = lambda s: np.array([(1 + abs(s)) ** (-3.0)])
    one_sided, _ = quad.damped_time_integral(F, 3.0, 15.0, 1e-11)
    two_sided, _ = quad.damped_time_integral(F, 3.0, 15.0, 1e-11, two_sided=True)
    assert np.allclose(two_sided, 2 * one_sided, atol=1e-9)
