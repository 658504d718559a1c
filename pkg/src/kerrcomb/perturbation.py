"""Small-pump expansion of the comb branches and the predicted eigenvalue motions.

Notation: ``phi0`` is the base wave, ``w = L+^{-1}[1]`` and
``v = L-^{-1}[b0 - alpha0 phi0]``, both taken on the complement of the
respective kernels (``phi0'`` for L+, ``phi0`` for L-).
"""

from dataclasses import dataclass
from functools import lru_cache
import cmath
import math

import numpy as np

from .cnoidal import base_wave, base_wave_derivatives
from .errors import AdmissibilityError, ValidationError
from .grid_ops import assemble_scalar_operator, solve_on_complement
from .profile_solver import WaveProfile


@dataclass(frozen=True, eq=False)
class BaseData:
    """Base wave and the operator data every expansion needs."""

    kappa: float
    grid: object
    phi0: np.ndarray
    dphi0: np.ndarray
    lplus: object
    lminus: object
    w: np.ndarray
    lplus_inv_phi0: np.ndarray
    mass: float
    norm2: float

    @property
    def bound(self):
        return self.mass / self.norm2

    def lplus_solve(self, rhs):
        return solve_on_complement(self.lplus, rhs, [self.dphi0])

    def lminus_solve(self, rhs):
        return solve_on_complement(self.lminus, rhs, [self.phi0])


@lru_cache(maxsize=32)
def base_data(kappa, n_grid=256):
    """Operators and inverses at the base wave, cached per ``(kappa, n_grid)``."""
    wave = base_wave(kappa, n_grid)
    g = wave.grid
    phi0 = wave.phi1
    _, dphi0, _ = base_wave_derivatives(kappa, g.nodes)
    lp = assemble_scalar_operator(g, phi0, "Lplus")
    lm = assemble_scalar_operator(g, phi0, "Lminus")
    w = solve_on_complement(lp, np.ones(g.n), [dphi0])
    lpi = solve_on_complement(lp, phi0, [dphi0])
    for a in (phi0, dphi0, w, lpi):
        a.flags.writeable = False
    return BaseData(float(kappa), g, phi0, dphi0, lp, lm, w, lpi,
                    g.integrate(phi0), g.inner(phi0, phi0))


@dataclass(frozen=True, eq=False)
class ExpansionReport:
    """Coefficients of the first-order expansion of one comb branch.

    Attributes
    ----------
    kappa, alpha0 : float
    branch_sign : int
        Sign of ``sigma0``; -1 is the stable branch.
    sigma0, a0, b0 : float
    c0 : complex
        ``(a0 - b0) + i (a0 + b0)``.
    D1_0, D2_0 : float
    Psi0 : ndarray (complex)
    Psi1_0, Psi2_0 : ndarray
        First-order corrections of the two components.
    lambda_minus_slope : float
        Slope of the lowest eigenvalue of L-,h in h.
    mu0 : complex
        Coefficient of the modulational eigenvalue ``mu ~ mu0 sqrt(h)``.
    lambda_h_coeff : float
        Unstable-eigenvalue coefficient of the undamped problem.
    sigma_trans_slope : float
        First-order slope of the translational eigenvalue (zero).
    """

    kappa: float
    alpha0: float
    branch_sign: int
    sigma0: float
    a0: float
    b0: float
    c0: complex
    D1_0: float
    D2_0: float
    Psi0: np.ndarray
    Psi1_0: np.ndarray
    Psi2_0: np.ndarray
    lambda_minus_slope: float
    mu0: complex
    lambda_h_coeff: float
    sigma_trans_slope: float
    w: np.ndarray
    v: np.ndarray
    base: BaseData

    @property
    def grid(self):
        return self.base.grid

    @property
    def phi0(self):
        return self.base.phi0


def _check_branch(branch_sign):
    if branch_sign not in (-1, 1):
        raise ValidationError(f"branch_sign must be +1 or -1, got {branch_sign}")
    return int(branch_sign)


def _leading(bd, alpha0, branch_sign):
    branch_sign = _check_branch(branch_sign)
    bound = bd.bound
    if not 0.0 <= alpha0 < bound:
        raise AdmissibilityError(
            f"alpha0={alpha0} outside admissible range [0, {bound:.6f}) at kappa={bd.kappa}")
    sigma0 = branch_sign * math.sqrt(bound * bound - alpha0 * alpha0)
    a0 = sigma0 * bd.norm2 / bd.mass
    b0 = alpha0 * bd.norm2 / bd.mass
    return a0, b0, sigma0, complex(a0 - b0, a0 + b0)


def leading_coefficients(kappa, alpha0, branch_sign, n_grid=256):
    """Leading amplitudes of the branch, ``phi ~ (a0 + i b0) phi0``.

    Returns
    -------
    a0, b0, sigma0 : float
    c0 : complex
    """
    return _leading(base_data(kappa, n_grid), alpha0, branch_sign)


def first_order_correction(kappa, alpha0, branch_sign, n_grid=256):
    """All first-order expansion coefficients of one branch.

    Returns
    -------
    ExpansionReport
    """
    bd = base_data(kappa, n_grid)
    a0, b0, sigma0, c = _leading(bd, alpha0, branch_sign)
    g = bd.grid
    phi0, w = bd.phi0, bd.w
    v = bd.lminus_solve(b0 - alpha0 * phi0)
    psi0 = c * a0 * w - 1j * c * v
    d2 = 8.0 * g.inner(phi0 ** 2 * w, v) / bd.mass
    psi1 = a0 * a0 * w + b0 * v
    psi2 = a0 * b0 * w - a0 * v
    pred = _predictions(bd, a0)
    return ExpansionReport(
        kappa=float(kappa), alpha0=float(alpha0), branch_sign=int(branch_sign),
        sigma0=sigma0, a0=a0, b0=b0, c0=c, D1_0=0.0, D2_0=d2,
        Psi0=psi0, Psi1_0=psi1, Psi2_0=psi2,
        lambda_minus_slope=pred[2], mu0=pred[1], lambda_h_coeff=pred[3],
        sigma_trans_slope=pred[4], w=w, v=v, base=bd,
    )


def first_order_profile(report, h, grid=None):
    """First-order branch profile at pump ``h`` as a WaveProfile seed."""
    a0, b0, d2 = report.a0, report.b0, report.D2_0
    phi0 = report.phi0
    phi1 = (a0 + 0.5 * h * b0 * d2) * phi0 + h * report.Psi1_0
    phi2 = (b0 - 0.5 * h * a0 * d2) * phi0 + h * report.Psi2_0
    branch = "stable" if report.branch_sign < 0 else "unstable"
    return WaveProfile(grid or report.grid, phi1, phi2, float(h), report.alpha0 * h, branch,
                       kappa=report.kappa, info={"seed": "first_order"})


def _predictions(bd, a0):
    g = bd.grid
    ant1 = g.inner(bd.lplus_inv_phi0, bd.phi0)
    ant3 = g.inner(bd.w, bd.phi0 * bd.dphi0 ** 2)
    sigma_m = a0 * bd.mass / bd.norm2
    mu0 = cmath.sqrt(complex(-a0 * bd.mass / ant1))
    if mu0.real < 0 or (mu0.real == 0 and mu0.imag < 0):
        mu0 = -mu0
    slope = bd.mass / bd.norm2
    coeff = math.sqrt(bd.mass / (-ant1))
    trans = -12.0 * a0 * ant3 / g.inner(bd.dphi0, bd.dphi0)
    return sigma_m, mu0, slope, coeff, trans


def predicted_eigenvalues(kappa, alpha0, branch_sign, n_grid=256):
    """Predicted small-pump eigenvalue coefficients.

    Returns
    -------
    sigma0_M : float
        Slope of the modulational eigenvalue of L_h, ``a0 <1,phi0>/||phi0||^2``.
    mu0 : complex
        ``mu0**2 = -a0 <phi0, 1> / <L+^{-1} phi0, phi0>``; real positive when
        ``a0 > 0``, positive imaginary otherwise.
    lambda_minus_slope : float
        ``<1, phi0> / ||phi0||^2``.
    lambda_h_coeff : float
        ``sqrt(<1, phi0> / -<L+^{-1} phi0, phi0>)``.
    sigma_trans_slope : float
        ``-12 a0 <L+^{-1}[1], phi0 phi0'^2> / ||phi0'||^2``.
    """
    bd = base_data(kappa, n_grid)
    a0 = _leading(bd, alpha0, branch_sign)[0]
    return _predictions(bd, a0)


def lemma_expansions(kappa, h, n_grid=256):
    """First-order data of the undamped (alpha = 0) real branch.

    Returns
    -------
    phi_h : ndarray
        ``phi0 + h L+^{-1}[1]``.
    lambda0_Lminus : float
        ``h <1, phi0> / ||phi0||^2``, lowest eigenvalue of L-,h.
    ground_state : ndarray
        ``phi0 + h z`` with ``z = L-^{-1}[4 phi0^2 L+^{-1}[1] + slope * phi0]``.
    """
    bd = base_data(kappa, n_grid)
    slope = bd.mass / bd.norm2
    rhs = ground_state_rhs(bd)
    z = bd.lminus_solve(rhs)
    return bd.phi0 + h * bd.w, h * slope, bd.phi0 + h * z


def ground_state_rhs(bd):
    """Source term of the first-order ground-state correction; orthogonal to phi0."""
    return 4.0 * bd.phi0 ** 2 * bd.w + (bd.mass / bd.norm2) * bd.phi0


def implicit_residuals(report):
    """Limits as h -> 0 of the two fixed-point residuals at the computed coefficients.

    Returns
    -------
    q1 : complex
        ``2i <D2 V phi0 + V Im[c conj(Psi)] - alpha0 phi0 D1, phi0>`` with
        ``V = 2 D1 phi0^2 + 2 phi0 Re[c conj(Psi)]``.
    q2 : float
        Max norm of ``2 conj(c) Psi - (4 a0 w - 2 D1 phi0) + 4 i v``.
    """
    g = report.grid
    phi0 = report.phi0
    c = report.c0
    cpsi = c * np.conj(report.Psi0)
    d1 = report.D1_0
    vpot = 2.0 * d1 * phi0 ** 2 + 2.0 * phi0 * cpsi.real
    integrand = report.D2_0 * vpot * phi0 + vpot * cpsi.imag - report.alpha0 * phi0 * d1
    q1 = 2j * g.inner(integrand, phi0)
    q2 = 2.0 * np.conj(c) * report.Psi0 - (4.0 * report.a0 * report.w - 2.0 * d1 * phi0) + 4j * report.v
    return q1, float(np.max(np.abs(q2)))
