"""Pure numpy versions of the compiled kernels, same signatures and algorithms."""

import numpy as np

_MAX_LEVELS = 40


def sncndn(u, kappa, threshold=1e-10):
    """Jacobi sn, cn, dn of an array by descending Landen transformation."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    kp = np.sqrt((1.0 - kappa) * (1.0 + kappa))
    if kappa < threshold:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if kp < threshold:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech.copy()

    moduli = []
    scale = 1.0
    kk = kappa
    while kk >= threshold and len(moduli) < _MAX_LEVELS:
        kk = kk * kk / ((1.0 + kp) * (1.0 + kp))
        moduli.append(kk)
        scale *= 1.0 + kk
        kp = np.sqrt((1.0 - kk) * (1.0 + kk))

    v = u / scale
    s, c, d = np.sin(v), np.cos(v), np.ones_like(v)
    for kk in reversed(moduli):
        s2 = s * s
        den = 1.0 + kk * s2
        c = c * d / den
        d = (1.0 - kk * s2) / den
        s = (1.0 + kk) * s / den
    return s, c, d


def nonlinear_rotate(u, dt):
    """In-place exact Kerr rotation u <- u exp(2i|u|^2 dt)."""
    u *= np.exp(2j * dt * (u.real ** 2 + u.imag ** 2))


def strang_run(u, half, full, shift_half, shift_full, dt, nsteps,
               record_every, n_evolve, weight):
    """Advance rows of ``u`` by ``nsteps`` Strang steps in place.

    Multipliers carry the inverse-FFT normalization, so unnormalized
    transforms are used to mirror the compiled kernel.
    """
    n = u.shape[1]
    nrec = nsteps // record_every if record_every > 0 else 0
    hist = np.zeros(nrec)
    if nsteps <= 0:
        return hist[:0], 0
    rows = u.shape[0]
    w = u[:n_evolve]
    fft, ifft = np.fft.fft, np.fft.ifft

    def linear(v, mult, shift):
        vh = fft(v, axis=-1) * mult
        vh[:, 0] += shift
        return ifft(vh, axis=-1) * n

    w = linear(w, half, shift_half)
    irec = 0
    done = 0
    for s in range(1, nsteps + 1):
        at_record = (record_every > 0 and s % record_every == 0) or s == nsteps
        w = w * np.exp(2j * dt * (w.real ** 2 + w.imag ** 2))
        w = linear(w, half if at_record else full, shift_half if at_record else shift_full)
        if at_record:
            if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > 1e150:
                break
            done = s
            u[:n_evolve] = w
            if record_every > 0 and s % record_every == 0 and irec < nrec:
                if rows > 1:
                    hist[irec] = np.sqrt(weight * np.sum(np.abs(u[0] - u[1]) ** 2))
                irec += 1
            if s < nsteps:
                w = linear(w, half, shift_half)
    return hist[:irec], done
