"""Inner-product identities for L+ at the base wave, checked numerically.

Half-period integrals use composite Gauss-Legendre quadrature; periodic
integrals use the grid trapezoid rule.
"""

from dataclasses import dataclass

import numpy as np

from .cnoidal import base_wave_derivatives, base_wave_params
from .elliptic import complete_integrals, jacobi_sn_cn_dn
from .errors import DegenerateIntegrandError, NumericalError
from .perturbation import base_data

GL_NODES = 64
GL_PANELS = 8
DENOMINATOR_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class IdentityReport:
    """Numeric and closed-form values of the L+ identities at one modulus."""

    kappa: float
    ant1_numeric: float
    ant1_closed: float
    ant2_numeric: float
    ant3_numeric: float
    ant4_numeric: float
    ant4_closed: float
    psi_second_solution: np.ndarray
    rofe_beketov_g: np.ndarray
    ant4_u_integral: float = float("nan")
    ant1_green: float = float("nan")
    wronskian: float = float("nan")

    def csv_row(self):
        return {"kappa": self.kappa, "ant1_closed": self.ant1_closed, "ant4_closed": self.ant4_closed,
                "ant1_numeric": self.ant1_numeric, "ant4_numeric": self.ant4_numeric}


def gauss_legendre(a, b, nodes=GL_NODES, panels=GL_PANELS):
    """Composite Gauss-Legendre points and weights on [a, b]."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


def closed_form_ant1(kappa):
    """``(E^2 - (1-k^2) K^2) / (2 [2 (1-k^2) K - (2-k^2) E])``."""
    K, E = complete_integrals(kappa)
    k2 = kappa * kappa
    den = 2.0 * (2.0 * (1.0 - k2) * K - (2.0 - k2) * E)
    if abs(den) < 1e-14:
        raise NumericalError(f"closed form denominator vanishes at kappa={kappa}")
    return (E * E - (1.0 - k2) * K * K) / den


def closed_form_ant4(kappa):
    """``2K - (2 - k^2) / (1 - k^2) E``."""
    K, E = complete_integrals(kappa)
    k2 = kappa * kappa
    return 2.0 * K - (2.0 - k2) / (1.0 - k2) * E


def inner_products_via_inverse(kappa, n_grid=256):
    """``<L+^{-1} phi0, phi0>``, ``<L+^{-1}[1], phi0>``, ``<L+^{-1}[1], phi0 phi0'^2>``.

    Inverses come from the constrained dense solve on the grid.
    """
    bd = base_data(kappa, n_grid)
    g = bd.grid
    ant1 = g.inner(bd.lplus_inv_phi0, bd.phi0)
    ant2 = g.inner(bd.w, bd.phi0)
    ant3 = g.inner(bd.w, bd.phi0 * bd.dphi0 ** 2)
    return ant1, ant2, ant3


def rofe_beketov_integrand(kappa, x):
    """Integrand ``(2 - 6 phi0^2)(phi0'^2 - phi0''^2) / (phi0'^2 + phi0''^2)^2`` and its denominator."""
    phi, d1, d2 = base_wave_derivatives(kappa, x)
    den = d1 * d1 + d2 * d2
    return (2.0 - 6.0 * phi * phi) * (d1 * d1 - d2 * d2) / (den * den), den


def _check_denominator(kappa, n_grid):
    p = base_wave_params(kappa)
    x = np.linspace(0.0, p.half_period, n_grid // 2 + 1)
    _, den = rofe_beketov_integrand(kappa, x)
    if np.min(den) <= DENOMINATOR_FLOOR:
        raise DegenerateIntegrandError(
            f"phi0'^2 + phi0''^2 drops to {np.min(den):.3e} at kappa={kappa}; wave is nearly constant")


def rofe_beketov_integral(kappa, n_grid=256):
    """Half-period integral of :func:`rofe_beketov_integrand` in x, with the closed form.

    Returns
    -------
    numeric, closed : float

    Raises
    ------
    DegenerateIntegrandError
        When the denominator falls below 1e-10 on the grid.
    """
    _check_denominator(kappa, n_grid)
    p = base_wave_params(kappa)
    x, wt = gauss_legendre(0.0, p.half_period)
    f, _ = rofe_beketov_integrand(kappa, x)
    return float(np.dot(wt, f)), closed_form_ant4(kappa)


def rofe_beketov_integral_u(kappa):
    """The same integral written in ``u = amp x`` with the factors ``amp^5 kappa^4`` removed.

    Equals ``amp**5 * kappa**4`` times the x-integral.
    """
    p = base_wave_params(kappa)
    a, k = p.amp, kappa
    u, wt = gauss_legendre(0.0, p.kappa.k_complete)
    s, c, d = jacobi_sn_cn_dn(u, k)
    q = c * c - s * s
    num = (2.0 - 6.0 * a * a * d * d) * (s * s * c * c - a * a * d * d * q * q)
    den = (s * s * c * c + a * a * d * d * q * q) ** 2
    return float(np.dot(wt, num / den))


def _cumulative_psi_integral(kappa, amp, x):
    """``int_0^x (1 - 2 sn^2(amp s)) / dn^2(amp s) ds`` for each entry of ``x``."""
    x = np.asarray(x, dtype=float)
    t, w = np.polynomial.legendre.leggauss(48)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    s = x[..., None] * t
    sn, _, dn = jacobi_sn_cn_dn(amp * s, kappa)
    return x * np.sum(w * (1.0 - 2.0 * sn * sn) / (dn * dn), axis=-1)


def psi_and_derivative(kappa, x):
    """The explicit second solution of ``L+ psi = 0`` and its analytic derivative."""
    p = base_wave_params(kappa)
    a, k = p.amp, kappa
    x = np.asarray(x, dtype=float)
    s, c, d = jacobi_sn_cn_dn(a * x, k)
    big_i = _cumulative_psi_integral(k, a, x)
    di = (1.0 - 2.0 * s * s) / (d * d)
    A = (1.0 - 2.0 * s * s) / d
    S = s * c
    psi = A / (a * a * k * k) - S * big_i / a
    A_u = (-4.0 * s * c * d * d + k * k * (1.0 - 2.0 * s * s) * s * c) / (d * d)
    S_u = d * (c * c - s * s)
    dpsi = A_u / (a * k * k) - S_u * big_i - S * di / a
    return psi, dpsi


def second_solution_psi(kappa, n_grid=256):
    """The explicit second solution sampled on the base-wave grid."""
    bd = base_data(kappa, n_grid)
    psi, _ = psi_and_derivative(kappa, bd.grid.nodes)
    return psi


def wronskian(kappa, x):
    """``phi0' psi' - phi0'' psi`` at points ``x``."""
    _, d1, d2 = base_wave_derivatives(kappa, x)
    psi, dpsi = psi_and_derivative(kappa, x)
    return d1 * dpsi - d2 * psi


def psi_operator_residual(kappa, x, step=1e-3):
    """``L+ psi`` at points ``x`` with psi'' from a 6th-order central difference."""
    x = np.asarray(x, dtype=float)
    coef = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
    shifts = np.arange(-3, 4) * step
    vals = np.stack([psi_and_derivative(kappa, x + sft)[0] for sft in shifts])
    d2 = np.tensordot(coef, vals, axes=1) / step ** 2
    phi, _, _ = base_wave_derivatives(kappa, x)
    return -d2 + (1.0 - 6.0 * phi * phi) * vals[3]


def half_period_quadrature(kappa, func):
    """``int_{-T}^{T} func dx`` for an even integrand, via Gauss-Legendre on [0, T]."""
    p = base_wave_params(kappa)
    x, wt = gauss_legendre(0.0, p.half_period)
    return 2.0 * float(np.dot(wt, func(x)))


def psi_inner_products(kappa):
    """``<phi0, psi>`` and ``<phi0^3, psi>`` with their closed forms.

    Returns
    -------
    dict
        Keys ``phi0_psi``, ``phi0_psi_closed``, ``phi03_psi``, ``phi03_psi_closed``.
    """
    p = base_wave_params(kappa)
    K, E = complete_integrals(kappa)
    k2 = kappa * kappa

    def f1(x):
        return base_wave_derivatives(kappa, x)[0] * psi_and_derivative(kappa, x)[0]

    def f3(x):
        return base_wave_derivatives(kappa, x)[0] ** 3 * psi_and_derivative(kappa, x)[0]

    return {
        "phi0_psi": half_period_quadrature(kappa, f1),
        "phi0_psi_closed": (E - K) / (p.amp ** 2 * k2),
        "phi03_psi": half_period_quadrature(kappa, f3),
        "phi03_psi_closed": ((2.0 - k2) * E - 2.0 * (1.0 - k2) * K) / (2.0 * k2),
    }


def c1_plus_phi0_at_zero(kappa):
    """``phi0(T) - phi0''(T) / psi'(T) * int_0^T psi``, which vanishes."""
    p = base_wave_params(kappa)
    T = p.half_period
    phi_t, _, d2_t = base_wave_derivatives(kappa, np.array([T]))
    _, dpsi_t = psi_and_derivative(kappa, np.array([T]))
    x, wt = gauss_legendre(0.0, T)
    int_psi = float(np.dot(wt, psi_and_derivative(kappa, x)[0]))
    return float(phi_t[0] - d2_t[0] / dpsi_t[0] * int_psi)


def green_inverse_inner(kappa, f, g):
    """``<L+^{-1} f, g>`` for even ``f``, ``g`` through the variation-of-parameters formula.

    Uses ``phi0'`` and the explicit ``psi`` as the fundamental pair,
    divides by their Wronskian, and fixes the free multiple of ``psi`` by
    periodicity of the derivative at ``T``. Independent of the dense solve.
    """
    p = base_wave_params(kappa)
    T = p.half_period
    x, wt = gauss_legendre(0.0, T, nodes=32, panels=8)
    t, tw = np.polynomial.legendre.leggauss(32)
    t = 0.5 * (t + 1.0)
    tw = 0.5 * tw
    inner_x = x[:, None] * t[None, :]
    psi_in, _ = psi_and_derivative(kappa, inner_x)
    _, d1_in, _ = base_wave_derivatives(kappa, inner_x)
    f_in = f(inner_x)
    a_int = x * np.sum(tw * psi_in * f_in, axis=1)
    b_int = x * np.sum(tw * d1_in * f_in, axis=1)
    w0 = float(wronskian(kappa, np.array([0.37 * T]))[0])
    _, d1, d2 = base_wave_derivatives(kappa, x)
    psi, dpsi = psi_and_derivative(kappa, x)
    u_p = (d1 * a_int - psi * b_int) / w0

    # derivative of the particular solution at T
    xt = np.array([T])
    tt = T * t
    psi_t_in, _ = psi_and_derivative(kappa, tt)
    _, d1_t_in, _ = base_wave_derivatives(kappa, tt)
    a_t = T * np.dot(tw, psi_t_in * f(tt))
    b_t = T * np.dot(tw, d1_t_in * f(tt))
    _, _, d2_t = base_wave_derivatives(kappa, xt)
    _, dpsi_t = psi_and_derivative(kappa, xt)
    du_t = (d2_t[0] * a_t - dpsi_t[0] * b_t) / w0
    coef = -du_t / dpsi_t[0]
    u = u_p + coef * psi
    return 2.0 * float(np.dot(wt, u * g(x)))


def rofe_beketov_solution(kappa, x):
    """``g = phi0' int_0^x J - phi0'' / (phi0'^2 + phi0''^2)`` with J the ant4 integrand."""
    x = np.asarray(x, dtype=float)
    t, tw = np.polynomial.legendre.leggauss(64)
    t = 0.5 * (t + 1.0)
    tw = 0.5 * tw
    jv, _ = rofe_beketov_integrand(kappa, x[..., None] * t)
    cum = x * np.sum(tw * jv, axis=-1)
    _, d1, d2 = base_wave_derivatives(kappa, x)
    return d1 * cum - d2 / (d1 * d1 + d2 * d2)


def rofe_beketov_jump(kappa, step=1e-4):
    """``g'(T) - g'(-T)`` by central differences, and ``2 phi0''(T)`` times the x-integral."""
    p = base_wave_params(kappa)
    T = p.half_period

    def dg(x0):
        return float((rofe_beketov_solution(kappa, np.array([x0 + step]))[0]
                      - rofe_beketov_solution(kappa, np.array([x0 - step]))[0]) / (2 * step))

    numeric, _ = rofe_beketov_integral(kappa)
    _, _, d2_t = base_wave_derivatives(kappa, np.array([T]))
    return dg(T) - dg(-T), 2.0 * float(d2_t[0]) * numeric


def identity_report(kappa, n_grid=256):
    """Collect every identity at one modulus."""
    ant1, ant2, ant3 = inner_products_via_inverse(kappa, n_grid)
    bd = base_data(kappa, n_grid)
    x = bd.grid.nodes
    num4, closed4 = rofe_beketov_integral(kappa, n_grid)

    def phi0(y):
        return base_wave_derivatives(kappa, y)[0]

    return IdentityReport(
        kappa=float(kappa), ant1_numeric=ant1, ant1_closed=closed_form_ant1(kappa),
        ant2_numeric=ant2, ant3_numeric=ant3, ant4_numeric=num4, ant4_closed=closed4,
        psi_second_solution=psi_and_derivative(kappa, x)[0],
        rofe_beketov_g=rofe_beketov_solution(kappa, x),
        ant4_u_integral=rofe_beketov_integral_u(kappa),
        ant1_green=green_inverse_inner(kappa, phi0, phi0),
        wronskian=float(np.median(wronskian(kappa, x))),
    )
