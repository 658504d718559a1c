# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Jacobi elliptic evaluation and the split-step loop."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, tanh, cosh

cnp.import_array()


cdef extern from "fftw3.h":
    ctypedef double fftw_complex[2]
    ctypedef void* fftw_plan
    fftw_plan fftw_plan_dft_1d(int n, fftw_complex* inp, fftw_complex* out,
                               int sign, unsigned flags)
    void fftw_execute_dft(const fftw_plan p, fftw_complex* inp, fftw_complex* out) nogil
    void fftw_destroy_plan(fftw_plan p)
    int FFTW_FORWARD
    int FFTW_BACKWARD
    unsigned FFTW_ESTIMATE
    unsigned FFTW_UNALIGNED


DEF MAX_LEVELS = 40


def sncndn(double[::1] u, double kappa, double threshold=1e-10):
    """Jacobi sn, cn, dn of an array by descending Landen transformation."""
    cdef Py_ssize_t n = u.shape[0], i
    cdef int levels = 0, lev
    cdef double k[MAX_LEVELS]
    cdef double scale = 1.0, kp, kk, s, c, d, v, den, s2
    out_sn = np.empty(n)
    out_cn = np.empty(n)
    out_dn = np.empty(n)
    cdef double[::1] sn = out_sn, cn = out_cn, dn = out_dn

    kp = sqrt((1.0 - kappa) * (1.0 + kappa))
    if kappa < threshold:
        for i in range(n):
            sn[i] = sin(u[i]); cn[i] = cos(u[i]); dn[i] = 1.0
        return out_sn, out_cn, out_dn
    if kp < threshold:
        for i in range(n):
            sn[i] = tanh(u[i]); cn[i] = 1.0 / cosh(u[i]); dn[i] = cn[i]
        return out_sn, out_cn, out_dn

    # descending moduli k_{j+1} = (1 - k'_j) / (1 + k'_j)
    kk = kappa
    while kk >= threshold and levels < MAX_LEVELS:
        kk = kk * kk / ((1.0 + kp) * (1.0 + kp))
        k[levels] = kk
        scale *= 1.0 + kk
        kp = sqrt((1.0 - kk) * (1.0 + kk))
        levels += 1

    for i in range(n):
        v = u[i] / scale
        s = sin(v); c = cos(v); d = 1.0
        for lev in range(levels - 1, -1, -1):
            kk = k[lev]
            s2 = s * s
            den = 1.0 + kk * s2
            c = c * d / den
            d = (1.0 - kk * s2) / den
            s = (1.0 + kk) * s / den
        sn[i] = s; cn[i] = c; dn[i] = d
    return out_sn, out_cn, out_dn


cdef inline void rotate(double complex* u, Py_ssize_t n, double dt) nogil:
    cdef Py_ssize_t j
    cdef double a
    for j in range(n):
        a = 2.0 * dt * (u[j].real * u[j].real + u[j].imag * u[j].imag)
        u[j] = u[j] * (cos(a) + 1j * sin(a))


def nonlinear_rotate(double complex[::1] u, double dt):
    """In-place exact Kerr rotation u <- u exp(2i|u|^2 dt)."""
    with nogil:
        rotate(&u[0], u.shape[0], dt)


cdef inline void affine(double complex* v, const double complex* mult,
                        double complex shift, Py_ssize_t n) nogil:
    cdef Py_ssize_t j
    for j in range(n):
        v[j] = v[j] * mult[j]
    v[0] = v[0] + shift


def strang_run(double complex[:, ::1] u, double complex[::1] half,
               double complex[::1] full, double complex shift_half,
               double complex shift_full, double dt, long nsteps,
               long record_every, int n_evolve, double weight):
    """Advance rows of ``u`` by ``nsteps`` Strang steps in place.

    ``half`` and ``full`` are the Fourier multipliers of the half and full
    linear substeps with the inverse-transform normalization folded in, and
    ``shift_*`` the matching k=0 forcing increments. Only the first
    ``n_evolve`` rows are advanced. Every ``record_every`` steps the weighted
    distance between rows 0 and 1 is recorded.

    Returns the recorded distances and the number of completed steps; the
    count is short of ``nsteps`` if a non-finite value appeared.
    """
    cdef Py_ssize_t rows = u.shape[0], n = u.shape[1], r, j
    cdef long s, nrec = nsteps // record_every if record_every > 0 else 0
    cdef long irec = 0, done = 0
    cdef bint at_record, finite = True
    cdef double acc, dre, dim
    work_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] work = work_arr
    hist_arr = np.zeros(nrec, dtype=np.float64)
    cdef double[::1] hist = hist_arr
    if nsteps <= 0:
        return hist_arr[:0], 0
    cdef fftw_plan fwd = fftw_plan_dft_1d(<int>n, <fftw_complex*>&work[0],
                                          <fftw_complex*>&work[0], FFTW_FORWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED)
    cdef fftw_plan bwd = fftw_plan_dft_1d(<int>n, <fftw_complex*>&work[0],
                                          <fftw_complex*>&work[0], FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED)
    try:
        with nogil:
            # leading half linear substep
            for r in range(n_evolve):
                fftw_execute_dft(fwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
                affine(&u[r, 0], &half[0], shift_half, n)
                fftw_execute_dft(bwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
            for s in range(1, nsteps + 1):
                at_record = (record_every > 0 and s % record_every == 0) or s == nsteps
                for r in range(n_evolve):
                    rotate(&u[r, 0], n, dt)
                    fftw_execute_dft(fwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
                    if at_record:
                        affine(&u[r, 0], &half[0], shift_half, n)
                    else:
                        affine(&u[r, 0], &full[0], shift_full, n)
                    fftw_execute_dft(bwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
                if at_record:
                    for r in range(n_evolve):
                        for j in range(n):
                            if not (u[r, j].real == u[r, j].real and u[r, j].imag == u[r, j].imag) \
                                    or u[r, j].real > 1e150 or u[r, j].real < -1e150 \
                                    or u[r, j].imag > 1e150 or u[r, j].imag < -1e150:
                                finite = False
                                break
                    if not finite:
                        break
                    done = s
                    if record_every > 0 and s % record_every == 0 and irec < nrec:
                        if rows > 1:
                            acc = 0.0
                            for j in range(n):
                                dre = u[0, j].real - u[1, j].real
                                dim = u[0, j].imag - u[1, j].imag
                                acc = acc + dre * dre + dim * dim
                            hist[irec] = sqrt(weight * acc)
                        irec += 1
                    if s < nsteps:
                        # open the next step with its leading half substep
                        for r in range(n_evolve):
                            fftw_execute_dft(fwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
                            affine(&u[r, 0], &half[0], shift_half, n)
                            fftw_execute_dft(bwd, <fftw_complex*>&u[r, 0], <fftw_complex*>&u[r, 0])
    finally:
        fftw_destroy_plan(fwd)
        fftw_destroy_plan(bwd)
    return hist_arr[:irec], done
