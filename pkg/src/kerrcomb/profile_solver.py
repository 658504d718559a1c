"""Steady states of the driven, damped problem by even-subspace Newton iteration.

The stationary system for ``phi = phi1 + i phi2`` is::

    phi1'' - phi1 + 2 (phi1^2 + phi2^2) phi1 = alpha phi2 - h
    phi2'' - phi2 + 2 (phi1^2 + phi2^2) phi2 = -alpha phi1
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .elliptic import complete_integrals
from .errors import AdmissibilityError, ContinuationError, ConvergenceError, ValidationError
from .grid_ops import assemble_scalar_operator

BRANCHES = ("stable", "unstable", "small", "base")
RESIDUAL_TOL = 1e-10
MAX_ITER = 25
CONTINUATION_MAX_STEPS = 8
CONTINUATION_MIN_SINGULAR = 1e-6


@dataclass(eq=False)
class WaveProfile:
    """Grid samples of a steady state ``phi1 + i phi2``.

    Attributes
    ----------
    grid : PeriodicGrid
    phi1, phi2 : ndarray
    h, alpha : float
        Pump strength and detuning.
    branch : str
        One of ``stable``, ``unstable``, ``small``, ``base``.
    kappa : float or None
        Modulus of the base wave the profile descends from.
    info : dict
        Solver diagnostics (residual history, iterations, ...).
    """

    grid: object
    phi1: np.ndarray
    phi2: np.ndarray
    h: float
    alpha: float
    branch: str
    kappa: float = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValidationError(f"unknown branch tag {self.branch!r}")
        self.phi1 = np.asarray(self.phi1, dtype=np.float64)
        self.phi2 = np.asarray(self.phi2, dtype=np.float64)
        if self.phi1.shape != (self.grid.n,) or self.phi2.shape != (self.grid.n,):
            raise ValidationError("profile components must match the grid size")

    @property
    def as_complex(self):
        """Complex samples ``phi1 + i phi2``."""
        return self.phi1 + 1j * self.phi2

    @property
    def alpha0(self):
        return self.alpha / self.h if self.h else 0.0

    def residual(self):
        return stationary_residual(self.grid, self.phi1, self.phi2, self.h, self.alpha)

    def residual_norm(self):
        return float(np.max(np.abs(self.residual())))

    def odd_part_max(self):
        g = self.grid
        return float(max(np.max(np.abs(g.odd_part(self.phi1))), np.max(np.abs(g.odd_part(self.phi2)))))


def stationary_residual(grid, phi1, phi2, h, alpha):
    """Both components of the stationary system stacked into one vector."""
    r = phi1 * phi1 + phi2 * phi2
    d2 = grid.d2
    f1 = d2 @ phi1 - phi1 + 2.0 * r * phi1 - alpha * phi2 + h
    f2 = d2 @ phi2 - phi2 + 2.0 * r * phi2 + alpha * phi1
    return np.concatenate([f1, f2])


def stationary_jacobian(grid, phi1, phi2, alpha):
    """Analytic Jacobian ``-(L_h + alpha J)`` of :func:`stationary_residual`."""
    n = grid.n
    base = grid.d2 - np.eye(n)
    j11 = base + np.diag(6.0 * phi1 ** 2 + 2.0 * phi2 ** 2)
    j22 = base + np.diag(2.0 * phi1 ** 2 + 6.0 * phi2 ** 2)
    c = np.diag(4.0 * phi1 * phi2)
    return np.block([[j11, c - alpha * np.eye(n)], [c + alpha * np.eye(n), j22]])


def admissibility_bound(kappa):
    """Upper limit of the detuning ratio, ``<1, phi0> / ||phi0||^2 = pi / (2 amp E)``."""
    _, E = complete_integrals(kappa)
    amp = 1.0 / math.sqrt(2.0 - kappa * kappa)
    return math.pi / (2.0 * amp * E)


def solve_profile(grid, phi1, phi2, h, alpha, branch="stable", kappa=None,
                  max_iter=MAX_ITER, tol=RESIDUAL_TOL):
    """Newton iteration for the stationary system restricted to even functions.

    Returns
    -------
    WaveProfile
        ``info`` records ``iterations``, ``residual_history`` and
        ``min_singular_value`` of the last even-subspace Jacobian.

    Raises
    ------
    ConvergenceError
        No convergence within ``max_iter`` iterations, or a singular
        even-subspace Jacobian.
    """
    basis = grid.block_basis("even")
    y = basis.T @ np.concatenate([phi1, phi2])
    history = []
    odd_history = []
    smin = float("nan")
    stalls = 0
    for it in range(max_iter + 1):
        x = basis @ y
        p1, p2 = x[: grid.n], x[grid.n:]
        odd_history.append(float(np.max(np.abs(grid.odd_part(p1))) + np.max(np.abs(grid.odd_part(p2)))))
        f = stationary_residual(grid, p1, p2, h, alpha)
        r = float(np.max(np.abs(f)))
        history.append(r)
        if not np.isfinite(r):
            raise ConvergenceError(f"Newton diverged (non-finite residual) at iteration {it}")
        if r < tol:
            break
        # roundoff floor: residual no longer decreasing and already tiny
        if it > 0 and r > 0.5 * history[-2] and r < 1e3 * tol:
            stalls += 1
            if stalls >= 2:
                break
        if it == max_iter:
            raise ConvergenceError(
                f"Newton did not converge in {max_iter} iterations (residual {r:.3e})")
        a = basis.T @ stationary_jacobian(grid, p1, p2, alpha) @ basis
        sv = np.linalg.svd(a, compute_uv=False)
        smin = float(sv[-1])
        if smin < 1e-13 * sv[0]:
            raise ConvergenceError(f"singular even-subspace Jacobian (sigma_min={smin:.3e})")
        y = y + np.linalg.solve(a, -(basis.T @ f))
    if len(history) == 1:
        # already converged: return the input rather than its basis round trip
        x = np.concatenate([np.asarray(phi1, float), np.asarray(phi2, float)])
    else:
        x = basis @ y
    info = {"iterations": len(history) - 1, "residual_history": history,
            "odd_history": odd_history, "min_singular_value": smin, "residual": history[-1]}
    return WaveProfile(grid, x[: grid.n], x[grid.n:], float(h), float(alpha), branch,
                       kappa=kappa, info=info)


def newton_solve(grid, initial, h, alpha0, max_iter=MAX_ITER):
    """Converge a profile of the driven system at ``alpha = alpha0 * h``.

    Parameters
    ----------
    grid : PeriodicGrid
    initial : WaveProfile
        Starting guess; its ``kappa`` fixes the admissibility bound.
    h : float
        Pump strength.
    alpha0 : float
        Detuning ratio, ``0 <= alpha0 < <1, phi0>/||phi0||^2``.

    Raises
    ------
    AdmissibilityError
        Before iterating, if ``alpha0`` is outside the admissible range.
    """
    if initial.kappa is None:
        raise ValidationError("initial profile must carry its base modulus kappa")
    bound = admissibility_bound(initial.kappa)
    if not 0.0 <= alpha0 < bound:
        raise AdmissibilityError(
            f"alpha0={alpha0} outside admissible range [0, {bound:.6f}) at kappa={initial.kappa}")
    return solve_profile(grid, initial.phi1, initial.phi2, h, alpha0 * h, branch=initial.branch,
                         kappa=initial.kappa, max_iter=max_iter)


def continue_branch(grid, kappa, alpha0, branch_sign, h_targets):
    """Follow one comb branch through increasing pump strengths.

    The first profile is seeded from the first-order expansion, later ones
    from the previous converged profile. Breakdown is declared when Newton
    needs more than 8 steps or the even Jacobian's smallest singular value
    drops below 1e-6.

    Raises
    ------
    ContinuationError
        Carries ``last_h`` and the profiles converged so far.
    """
    from .perturbation import first_order_correction, first_order_profile

    hs = [float(h) for h in h_targets]
    if not hs:
        return []
    if any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValidationError("h_targets must be strictly increasing")
    report = first_order_correction(kappa, alpha0, branch_sign, n_grid=grid.n)
    seed = first_order_profile(report, hs[0])
    out = []
    for h in hs:
        last = out[-1].h if out else None
        try:
            prof = newton_solve(grid, seed, h, alpha0)
        except ConvergenceError as exc:
            raise ContinuationError(f"continuation failed at h={h}: {exc}", last, out) from exc
        if (prof.info["iterations"] > CONTINUATION_MAX_STEPS
                or prof.info["min_singular_value"] < CONTINUATION_MIN_SINGULAR):
            raise ContinuationError(
                f"continuation ceiling reached at h={h} (iterations={prof.info['iterations']}, "
                f"sigma_min={prof.info['min_singular_value']:.3e})", last, out)
        out.append(prof)
        seed = prof
    return out


def small_branch(grid, h, alpha):
    """The small steady state near ``phi1 = h, phi2 = alpha h``, Newton-polished."""
    n = grid.n
    if h == 0:
        return WaveProfile(grid, np.zeros(n), np.zeros(n), 0.0, float(alpha), "small",
                           info={"iterations": 0, "residual": 0.0})
    return solve_profile(grid, np.full(n, h), np.full(n, alpha * h), h, alpha, branch="small")


def nonexistence_certificate(profile):
    """``||Lt phi1||^2 + alpha^2 ||phi1||^2`` with ``Lt = -d^2 + 1 - 2|phi|^2``.

    For an undriven solution with ``alpha > 0`` this quantity equals zero,
    which forces ``phi1 = 0`` and then ``phi = 0``.
    """
    g = profile.grid
    lt = assemble_scalar_operator(g, profile.phi1 ** 2 + profile.phi2 ** 2, "Ltilde")
    v = lt @ profile.phi1
    return g.norm(v) ** 2 + profile.alpha ** 2 * g.norm(profile.phi1) ** 2


def with_branch(profile, branch):
    return replace(profile, branch=branch)
