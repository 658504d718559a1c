"""Exact cnoidal waves of the undriven problem and the quartic-root parametrization."""

from dataclasses import dataclass
import math

import numpy as np

from .elliptic import EllipticModulus, complete_integrals, jacobi_sn_cn_dn, landen_ascend
from .errors import DomainError, RegimeError, ValidationError
from .grid_ops import PeriodicGrid
from .profile_solver import WaveProfile

TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BaseWaveParams:
    """Scales of the wave ``amp * dn(amp * x, kappa)``.

    Attributes
    ----------
    kappa : EllipticModulus
    amp : float
        Amplitude, ``1 / sqrt(2 - kappa**2)``; also the maximum of the wave.
    half_period : float
        ``K(kappa) / amp``, half the fundamental period.
    m_min : float
        Minimum of the wave, ``amp * sqrt(1 - kappa**2)``.
    """

    kappa: EllipticModulus
    amp: float
    half_period: float
    m_min: float


@dataclass(frozen=True)
class QuarticRoots:
    """Ordered real roots of ``z**4 - z**2 + 2 h z + c``."""

    zeta: tuple
    h: float
    c: float

    def vieta_residuals(self):
        z1, z2, z3, z4 = self.zeta
        return (
            z1 + z2 + z3 + z4,
            z1 * z2 + z1 * z3 + z1 * z4 + z2 * z3 + z2 * z4 + z3 * z4 + 1.0,
            z1 * z2 * z3 + z1 * z2 * z4 + z2 * z3 * z4 + z1 * z3 * z4 + 2.0 * self.h,
            z1 * z2 * z3 * z4 - self.c,
        )


def _check_grid_size(n_grid):
    n = int(n_grid)
    if n < 32 or n & (n - 1):
        raise ValidationError(f"n_grid must be a power of two >= 32, got {n_grid}")
    return n


def base_wave_params(kappa):
    """Amplitude, half period and minimum of the base wave for modulus ``kappa``."""
    kappa = float(kappa)
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"base wave needs modulus kappa in (0, 1), got {kappa}")
    mod = EllipticModulus.from_kappa(kappa)
    amp = 1.0 / math.sqrt(2.0 - kappa * kappa)
    return BaseWaveParams(mod, amp, mod.k_complete / amp, amp * mod.complementary)


def fourier_tail(values):
    """Largest normalized Fourier coefficient magnitude in the upper half of the band."""
    c = np.abs(np.fft.fft(values)) / len(values)
    n = len(values)
    return float(np.max(c[n // 4: n - n // 4 + 1]))


def base_wave(kappa, n_grid=256):
    """The exact undriven wave ``phi0 = amp * dn(amp * x, kappa)`` on [-T, T).

    Parameters
    ----------
    kappa : float
        Modulus in (0, 1).
    n_grid : int
        Power of two, at least 32.

    Returns
    -------
    WaveProfile
        Branch ``"base"``, ``h = alpha = 0``. ``info["resolved"]`` is False when
        the Fourier tail exceeds 1e-12.
    """
    p = base_wave_params(kappa)
    n = _check_grid_size(n_grid)
    grid = PeriodicGrid(n, p.half_period)
    _, _, dn = jacobi_sn_cn_dn(p.amp * grid.nodes, p.kappa.kappa)
    phi = p.amp * dn
    tail = fourier_tail(phi)
    info = {"params": p, "fourier_tail": tail, "resolved": tail <= TAIL_TOLERANCE}
    return WaveProfile(grid, phi, np.zeros(n), 0.0, 0.0, "base", kappa=p.kappa.kappa, info=info)


def base_wave_derivatives(kappa, x):
    """Analytic phi0, phi0', phi0'' at points ``x``."""
    p = base_wave_params(kappa)
    k = p.kappa.kappa
    sn, cn, dn = jacobi_sn_cn_dn(p.amp * np.asarray(x, dtype=float), k)
    phi = p.amp * dn
    d1 = -p.amp ** 2 * k * k * sn * cn
    d2 = phi - 2.0 * phi ** 3
    return phi, d1, d2


def _discriminant_report(h, c):
    p, q, r = -1.0, 2.0 * h, c
    disc = (256 * r ** 3 - 128 * p ** 2 * r ** 2 + 144 * p * q ** 2 * r - 27 * q ** 4
            + 16 * p ** 4 * r - 4 * p ** 3 * q ** 2)
    d_cond = 64 * r - 16 * p ** 2
    failed = []
    if disc <= 0:
        failed.append(f"discriminant {disc:.3e} <= 0")
    if d_cond >= 0:
        failed.append(f"64c - 16 = {d_cond:.3e} >= 0 (need c < 1/4)")
    return failed


def quartic_roots(h, c):
    """Four ordered real roots of ``z**4 - z**2 + 2 h z + c``.

    Roots come from companion-matrix eigenvalues and are polished by two
    Newton steps.

    Raises
    ------
    RegimeError
        If fewer than four real roots exist; the message names the failed
        discriminant condition.
    """
    h, c = float(h), float(c)
    coeffs = [1.0, 0.0, -1.0, 2.0 * h, c]
    raw = np.roots(coeffs)
    if np.max(np.abs(raw.imag)) > 1e-9:
        failed = _discriminant_report(h, c) or ["complex roots"]
        raise RegimeError(f"z^4 - z^2 + 2hz + c lacks four real roots at h={h}, c={c}: "
                          + "; ".join(failed))
    z = np.sort(raw.real)
    for _ in range(2):
        f = np.polyval(coeffs, z)
        df = np.polyval(np.polyder(coeffs), z)
        step = np.where(np.abs(df) > 1e-300, f / np.where(df == 0, 1.0, df), 0.0)
        z = z - step
    if np.any(np.diff(z) <= 0):
        raise RegimeError(f"roots at h={h}, c={c} are not distinct after polishing")
    return QuarticRoots(tuple(float(v) for v in z), h, c)


def roots_from_minimum(m, h=0.0):
    """Roots for the wave with minimum ``m``, using ``c = m**2 - m**4 - 2 h m``."""
    return quartic_roots(h, m * m - m ** 4 - 2.0 * h * m)


def wave_from_roots(roots, n_grid=256):
    """Wave built from the ordered roots via the sn-squared rational formula.

    The argument of sn is ``x / g`` with ``g = 2 / sqrt((z4 - z2)(z3 - z1))``,
    and the half period is ``g K(k_r)`` for the root modulus ``k_r``.

    Returns
    -------
    WaveProfile
        ``info`` carries ``k_root``, ``g`` and the first-integral residual.
    """
    n = _check_grid_size(n_grid)
    z1, z2, z3, z4 = roots.zeta
    k2 = (z4 - z3) * (z2 - z1) / ((z4 - z2) * (z3 - z1))
    k_root = math.sqrt(max(k2, 0.0))
    g = 2.0 / math.sqrt((z4 - z2) * (z3 - z1))
    K, _ = complete_integrals(k_root)
    T = g * K
    grid = PeriodicGrid(n, T)
    sn, _, _ = jacobi_sn_cn_dn(grid.nodes / g, k_root)
    s2 = sn * sn
    phi = (z4 * (z3 - z1) + z1 * (z4 - z3) * s2) / ((z3 - z1) + (z4 - z3) * s2)
    dphi = grid.derivative(phi)
    first_integral = dphi ** 2 + phi ** 4 - phi ** 2 + 2.0 * roots.h * phi + roots.c
    info = {"k_root": k_root, "g": g, "roots": roots,
            "first_integral_residual": float(np.max(np.abs(first_integral)))}
    kappa = landen_ascend(k_root) if k_root > 0 else 0.0
    return WaveProfile(grid, phi, np.zeros(n), roots.h, 0.0, "base", kappa=kappa, info=info)
