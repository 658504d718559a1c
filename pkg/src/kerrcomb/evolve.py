"""Strang split-step integration of the driven, damped Kerr equation.

``i u_t + u_xx - u + 2|u|^2 u = -i alpha u - h`` on the periodic grid. The
linear substep (dispersion, detuning, damping and the constant pump) is
solved exactly in Fourier space; the Kerr substep is an exact pointwise
phase rotation.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import BlowUpError, InsufficientRangeError, ValidationError


@dataclass(frozen=True, eq=False)
class EvolutionRun:
    """State of one time integration.

    Attributes
    ----------
    grid : PeriodicGrid
    state : ndarray (complex)
    h, alpha, dt, t : float
    history : ndarray
        Rows ``(t, ||u - reference||_2)``.
    reference : ndarray (complex) or None
        Comparison state for the history.
    reference_evolves : bool
        When True the reference is integrated alongside ``state``; this
        removes the fixed-point offset of the discrete scheme.
    """

    grid: object
    state: np.ndarray
    h: float
    alpha: float
    dt: float
    t: float = 0.0
    history: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    reference: np.ndarray = None
    reference_evolves: bool = False

    def distance(self):
        if self.reference is None:
            return float("nan")
        return self.grid.norm(np.abs(self.state - self.reference))


def retained_modes(grid, dt):
    """Boolean mask of Fourier modes with ``dt (k^2 + 1) < 1``."""
    return dt * (grid.wavenumbers ** 2 + 1.0) < 1.0


def start_run(grid, u0, h, alpha, dt, reference=None, twin=False):
    """Create a run; with ``twin=True`` the reference is co-evolved."""
    if not 0.0 < dt < 1.0:
        raise ValidationError(f"time step must lie in (0, 1), got {dt}")
    u0 = np.array(u0, dtype=np.complex128)
    if u0.shape != (grid.n,):
        raise ValidationError("initial state does not match the grid")
    ref = None if reference is None else np.array(reference, dtype=np.complex128)
    run = EvolutionRun(grid, u0, float(h), float(alpha), float(dt), 0.0,
                       np.zeros((0, 2)), ref, bool(twin and ref is not None))
    if ref is not None:
        run = replace(run, history=np.array([[0.0, run.distance()]]))
    return run


def _multipliers(grid, h, alpha, dt):
    n = grid.n
    lam = -1j * (grid.wavenumbers ** 2 + 1.0) - alpha
    keep = retained_modes(grid, dt)
    half = np.where(keep, np.exp(0.5 * dt * lam), 0.0) / n
    full = np.where(keep, np.exp(dt * lam), 0.0) / n
    l0 = lam[0]
    shift_half = 1j * h * (np.exp(0.5 * dt * l0) - 1.0) / l0
    shift_full = 1j * h * (np.exp(dt * l0) - 1.0) / l0
    return (np.ascontiguousarray(half, dtype=np.complex128),
            np.ascontiguousarray(full, dtype=np.complex128), complex(shift_half), complex(shift_full))


def step(run, n_steps, record_every=None):
    """Advance ``run`` by ``n_steps`` Strang steps.

    Modes violating ``dt (k^2 + 1) < 1`` are removed by the linear substep.

    Parameters
    ----------
    run : EvolutionRun
    n_steps : int
    record_every : int, optional
        History sampling interval in steps; defaults to about 200 samples.

    Returns
    -------
    EvolutionRun
        A new run; the input is not modified.

    Raises
    ------
    BlowUpError
        If the state becomes non-finite; carries the last finite time.
    """
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValidationError("n_steps must be non-negative")
    if n_steps == 0:
        return run
    if record_every is None:
        record_every = max(1, n_steps // 200)
    half, full, sh, sf = _multipliers(run.grid, run.h, run.alpha, run.dt)
    rows = [run.state]
    if run.reference is not None:
        rows.append(run.reference)
    u = np.ascontiguousarray(np.vstack(rows), dtype=np.complex128)
    n_evolve = 2 if run.reference_evolves else 1
    dists, done = kernels.strang_run(u, half, full, sh, sf, run.dt, n_steps,
                                     int(record_every), n_evolve, run.grid.dx)
    if done < n_steps:
        raise BlowUpError(f"non-finite state after t={run.t + done * run.dt:.6g}",
                          t_last=run.t + done * run.dt)
    times = run.t + run.dt * record_every * np.arange(1, len(dists) + 1)
    hist = run.history
    if run.reference is not None:
        hist = np.vstack([hist, np.column_stack([times, dists])])
    return replace(run, state=u[0].copy(),
                   reference=None if run.reference is None else u[1].copy(),
                   t=run.t + n_steps * run.dt, history=hist)


def measure_growth_rate(history, expected=None):
    """Least-squares slope of ``log ||u - phi||`` over the middle 60% of the record.

    Parameters
    ----------
    history : array_like
        Rows ``(t, distance)``.
    expected : float, optional
        Anticipated rate, used only for the dynamic-range requirement.

    Raises
    ------
    InsufficientRangeError
        If the record spans less than two decades between its largest and
        smallest distance and less than ``5 / |rate|`` in time.
    """
    hist = np.asarray(history, dtype=float)
    if hist.ndim != 2 or hist.shape[0] < 5:
        raise InsufficientRangeError("history too short to fit a rate")
    t, d = hist[:, 0], hist[:, 1]
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise InsufficientRangeError("history contains non-positive or non-finite distances")
    n = len(t)
    lo, hi = int(round(0.2 * n)), int(round(0.8 * n))
    if hi - lo < 3:
        raise InsufficientRangeError("middle of the record has fewer than 3 samples")
    rate = float(np.polyfit(t[lo:hi], np.log(d[lo:hi]), 1)[0])
    decades = float(np.log10(np.max(d) / np.min(d)))
    ref = abs(expected) if expected is not None else abs(rate)
    if decades < 2.0 and (t[-1] - t[0]) * ref < 5.0 * (1.0 - 1e-9):
        raise InsufficientRangeError(
            f"record spans {decades:.2f} decades over t={t[-1] - t[0]:.3g}; need 2 decades "
            f"or t >= 5/|rate| = {5.0 / max(ref, 1e-300):.3g}")
    return rate


def noise_perturbation(grid, amplitude, seed, max_mode=8):
    """Band-limited white noise, even in x, scaled to L2 norm ``amplitude``."""
    rng = np.random.default_rng(seed)
    j = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    coeffs = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * (np.abs(j) <= max_mode)
    v = np.fft.ifft(coeffs)
    v = grid.even_part(v)
    return amplitude * v / grid.norm(np.abs(v))


def eigenvector_perturbation(grid, vec, amplitude):
    """Turn a 2n eigenvector ``(z1, z2)`` into the field perturbation ``Re z1 + i Re z2``."""
    vec = np.asarray(vec)
    z = vec[: grid.n] + 1j * vec[grid.n:]
    if np.iscomplexobj(vec):
        zz = np.dot(vec, vec)
        vr = np.real(np.exp(-0.5j * np.angle(zz)) * vec)
        z = vr[: grid.n] + 1j * vr[grid.n:]
    return amplitude * z / grid.norm(np.abs(z))


def mass(grid, u):
    return grid.integrate(np.abs(u) ** 2)


def hamiltonian(grid, u):
    """``int |u_x|^2 + |u|^2 - |u|^4 dx``, conserved when ``h = alpha = 0``."""
    ux = grid.derivative(u.real) + 1j * grid.derivative(u.imag)
    a2 = np.abs(u) ** 2
    return grid.integrate(np.abs(ux) ** 2 + a2 - a2 * a2)


def evolve_to(grid, u0, h, alpha, dt, t_end):
    """Final state after integrating from 0 to ``t_end``."""
    run = start_run(grid, u0, h, alpha, dt)
    return step(run, int(round(t_end / dt))).state


def splitting_order_ratio(grid, u0, h, alpha, dt, t_end):
    """``err(dt) / err(dt/2)`` against a ``dt/8`` reference solution."""
    ref = evolve_to(grid, u0, h, alpha, dt / 8, t_end)
    e1 = grid.norm(np.abs(evolve_to(grid, u0, h, alpha, dt, t_end) - ref))
    e2 = grid.norm(np.abs(evolve_to(grid, u0, h, alpha, dt / 2, t_end) - ref))
    return e1 / e2, e1, e2


def history_rows(run):
    """History as ``(t, residual)`` tuples for CSV output."""
    return [(float(t), float(d)) for t, d in run.history]
