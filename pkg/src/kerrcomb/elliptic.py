"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here is parametrized by the modulus ``kappa`` (not the parameter
``m = kappa**2``).
"""

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import DomainError

LANDEN_THRESHOLD = 1e-10


def _check_modulus(kappa):
    kappa = float(kappa)
    if not (0.0 <= kappa < 1.0) or math.isnan(kappa):
        raise DomainError(f"modulus kappa must satisfy 0 <= kappa < 1, got {kappa!r}")
    return kappa


def complete_integrals(kappa):
    """Complete elliptic integrals of the first and second kind.

    Uses the arithmetic-geometric mean; E follows from the ``c_n`` sequence
    of the same iteration.

    Parameters
    ----------
    kappa : float
        Modulus in ``[0, 1)``.

    Returns
    -------
    K, E : float
    """
    kappa = _check_modulus(kappa)
    a = 1.0
    b = math.sqrt((1.0 - kappa) * (1.0 + kappa))
    c = kappa
    weight = 0.5
    acc = weight * c * c
    for _ in range(64):
        if abs(c) <= 1e-17 * a:
            break
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - b) / 2
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), c * c / (2.0 * (a + b))
        weight *= 2.0
        acc += weight * c * c
    K = math.pi / (2.0 * a)
    E = K * (1.0 - acc)
    return K, E


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus with its complete integrals attached."""

    kappa: float
    k_complete: float
    e_complete: float

    @classmethod
    def from_kappa(cls, kappa):
        K, E = complete_integrals(kappa)
        return cls(float(kappa), K, E)

    @property
    def complementary(self):
        """Complementary modulus sqrt(1 - kappa**2)."""
        return math.sqrt((1.0 - self.kappa) * (1.0 + self.kappa))


def jacobi_sn_cn_dn(u, kappa):
    """Jacobi elliptic functions sn, cn, dn.

    Evaluated by the descending Landen transformation, with circular or
    hyperbolic limits when ``kappa`` or its complement drops below 1e-10.

    Parameters
    ----------
    u : float or array_like
        Argument(s).
    kappa : float
        Modulus in ``[0, 1)``.

    Returns
    -------
    sn, cn, dn : float or ndarray
        Same shape as ``u``.
    """
    kappa = _check_modulus(kappa)
    arr = np.asarray(u, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    sn, cn, dn = kernels.sncndn(flat, kappa, LANDEN_THRESHOLD)
    if arr.ndim == 0:
        return float(sn[0]), float(cn[0]), float(dn[0])
    shape = arr.shape
    return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)


def landen_descend(kappa):
    """Modulus after one descending Landen step, (1 - kappa') / (1 + kappa')."""
    kappa = _check_modulus(kappa)
    kp = math.sqrt((1.0 - kappa) * (1.0 + kappa))
    return kappa * kappa / (1.0 + kp) ** 2


def landen_ascend(k):
    """Inverse of :func:`landen_descend`: 2 sqrt(k) / (1 + k)."""
    k = _check_modulus(k)
    return 2.0 * math.sqrt(k) / (1.0 + k)
