# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 8(5,3) integrator for harmonic linear generators.

Integrates ``dY/dt = sum_k exp(1j * w_k * t) A_k @ Y`` where every ``A_k`` is
a CSR matrix and ``Y`` is an ``(n, m)`` block of column vectors. Step control
and the 7th-order dense output follow ``_integrate._dop853_python`` line for
line, so the two backends are interchangeable.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, sin, pow
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

ctypedef double complex cplx
ctypedef cnp.int64_t i64

cdef extern from "complex.h" nogil:
    double cabs(double complex z)

cdef enum:
    NS = 12       # stages of the main method
    NK = 13       # plus the FSAL evaluation
    NKX = 16      # plus the dense-output extras
    NF = 7        # interpolant coefficients

cdef struct Gen:
    Py_ssize_t n
    Py_ssize_t m
    Py_ssize_t ncomp
    const double* freqs
    const cplx* data
    const i64* indices
    const i64* indptr
    cplx* coef


cdef inline void _apply(Gen* g, double t, const cplx* y, cplx* out) noexcept nogil:
    # real/imag split keeps the inner loop free of complex-multiply calls
    cdef Py_ssize_t n = g.n, m = g.m, k, i, p, col
    cdef const i64* ptr
    cdef cplx a
    cdef double ar, ai, yr, yi
    cdef double* orow
    cdef const double* yrow
    cdef const double* yd = <const double*> y
    cdef double* od = <double*> out
    for k in range(g.ncomp):
        g.coef[k] = cos(g.freqs[k] * t) + 1j * sin(g.freqs[k] * t)
    for i in range(2 * n * m):
        od[i] = 0.0
    for k in range(g.ncomp):
        ptr = g.indptr + k * (n + 1)
        for i in range(n):
            orow = od + 2 * i * m
            for p in range(ptr[i], ptr[i + 1]):
                a = g.data[p] * g.coef[k]
                ar = a.real
                ai = a.imag
                yrow = yd + 2 * g.indices[p] * m
                for col in range(m):
                    yr = yrow[2 * col]
                    yi = yrow[2 * col + 1]
                    orow[2 * col] += ar * yr - ai * yi
                    orow[2 * col + 1] += ar * yi + ai * yr


cdef inline void _combine(const cplx* y, const cplx* K, const double* coef,
                          Py_ssize_t nst, double h, Py_ssize_t size,
                          cplx* out) noexcept nogil:
    # out = y + h * sum_q coef[q] K[q]
    cdef Py_ssize_t i, q
    cdef double* od = <double*> out
    cdef const double* yd = <const double*> y
    cdef const double* kd
    cdef double c
    for i in range(2 * size):
        od[i] = 0.0
    for q in range(nst):
        c = coef[q]
        if c != 0.0:
            kd = <const double*> (K + q * size)
            for i in range(2 * size):
                od[i] += c * kd[i]
    for i in range(2 * size):
        od[i] = yd[i] + h * od[i]


def dop853(cplx[:, ::1] y0, double[::1] freqs, cplx[::1] data, i64[::1] indices,
           i64[:, ::1] indptr, double t0, double[::1] t_eval, double h0,
           double rtol, double atol, double max_step, long max_steps,
           double[:, ::1] A, double[::1] B, double[::1] C, double[::1] E3,
           double[::1] E5, double[:, ::1] D, double[:, ::1] AX, double[::1] CX,
           bint land=False):
    """Return ``(out, status, stats)``; ``status`` 0 ok, 1 underflow, 2 step cap.

    With ``land`` every step is clipped to end on the next output time, so the
    samples carry the full step accuracy instead of the interpolant's.
    """
    cdef Py_ssize_t n = y0.shape[0], m = y0.shape[1], size = n * m
    cdef Py_ssize_t nt = t_eval.shape[0]
    out_arr = np.zeros((nt, n, m), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    if nt == 0:
        return out_arr, 0, {"nsteps": 0, "nfev": 0, "nrejected": 0, "t": t0, "h": h0}

    cdef Gen g
    g.n = n
    g.m = m
    g.ncomp = freqs.shape[0]
    g.freqs = &freqs[0]
    g.data = &data[0] if data.shape[0] > 0 else NULL
    g.indices = &indices[0] if indices.shape[0] > 0 else NULL
    g.indptr = &indptr[0, 0]
    g.coef = <cplx*> malloc(max(g.ncomp, 1) * sizeof(cplx))

    cdef cplx* K = <cplx*> malloc(NKX * size * sizeof(cplx))
    cdef cplx* F = <cplx*> malloc(NF * size * sizeof(cplx))
    cdef cplx* y = <cplx*> malloc(size * sizeof(cplx))
    cdef cplx* ynew = <cplx*> malloc(size * sizeof(cplx))
    cdef cplx* tmp = <cplx*> malloc(size * sizeof(cplx))
    cdef double arow[NKX]
    cdef Py_ssize_t i, s, q, r, idx = 0
    cdef double t = t0, h = h0, t_end = t_eval[nt - 1], factor = 1.0, x, an, bn, sc
    cdef double target, h_try
    cdef double e5n, e3n, denom, err
    cdef long nsteps = 0, nfev = 0, nrej = 0
    cdef int status = 0, rejected, last = 0, have_dense
    cdef cplx e5, e3, acc, dy
    cdef cplx* op

    memcpy(y, &y0[0, 0], size * sizeof(cplx))

    with nogil:
        while idx < nt and t_eval[idx] <= t0:
            memcpy(&out[idx, 0, 0], y, size * sizeof(cplx))
            idx += 1
        if idx < nt:
            _apply(&g, t, y, K)
            nfev += 1
        while idx < nt:
            if nsteps >= max_steps:
                status = 2
                break
            rejected = 0
            target = t_eval[idx] if land else t_end
            while True:
                if h > max_step:
                    h = max_step
                h_try = h
                last = 0
                if t + h >= target:
                    h = target - t
                    last = 1
                if h <= 10.0 * 2.220446049250313e-16 * fabs(t) or h <= 1e-300:
                    status = 1
                    break
                for s in range(1, NS):
                    for q in range(s):
                        arow[q] = A[s, q]
                    _combine(y, K, arow, s, h, size, tmp)
                    _apply(&g, t + C[s] * h, tmp, K + s * size)
                for q in range(NS):
                    arow[q] = B[q]
                _combine(y, K, arow, NS, h, size, ynew)
                _apply(&g, t + h, ynew, K + NS * size)
                nfev += NS
                e5n = 0.0
                e3n = 0.0
                for i in range(size):
                    e5 = 0
                    e3 = 0
                    for q in range(NK):
                        e5 = e5 + E5[q] * K[q * size + i]
                        e3 = e3 + E3[q] * K[q * size + i]
                    an = cabs(y[i])
                    bn = cabs(ynew[i])
                    sc = atol + rtol * (an if an > bn else bn)
                    an = cabs(e5) / sc
                    bn = cabs(e3) / sc
                    e5n += an * an
                    e3n += bn * bn
                if e5n == 0.0 and e3n == 0.0:
                    err = 0.0
                else:
                    denom = e5n + 0.01 * e3n
                    err = fabs(h) * e5n / sqrt(denom * size)
                if err < 1.0:
                    if err == 0.0:
                        factor = 10.0
                    else:
                        factor = 0.9 * pow(err, -0.125)
                        if factor > 10.0:
                            factor = 10.0
                    if rejected and factor > 1.0:
                        factor = 1.0
                    break
                factor = 0.9 * pow(err, -0.125)
                if factor < 0.2:
                    factor = 0.2
                h = h * factor
                rejected = 1
                nrej += 1
            if status != 0:
                break

            have_dense = 0
            while idx < nt and t_eval[idx] <= t + h:
                if last and t_eval[idx] >= target:
                    memcpy(&out[idx, 0, 0], ynew, size * sizeof(cplx))
                    idx += 1
                    continue
                if not have_dense:
                    for r in range(3):
                        s = NK + r
                        for q in range(s):
                            arow[q] = AX[r, q]
                        _combine(y, K, arow, s, h, size, tmp)
                        _apply(&g, t + CX[r] * h, tmp, K + s * size)
                    nfev += 3
                    for i in range(size):
                        dy = ynew[i] - y[i]
                        F[i] = dy
                        F[size + i] = h * K[i] - dy
                        F[2 * size + i] = 2.0 * dy - h * (K[NS * size + i] + K[i])
                        for r in range(4):
                            acc = 0
                            for q in range(NKX):
                                if D[r, q] != 0.0:
                                    acc = acc + D[r, q] * K[q * size + i]
                            F[(3 + r) * size + i] = h * acc
                    have_dense = 1
                x = (t_eval[idx] - t) / h
                op = &out[idx, 0, 0]
                for i in range(size):
                    acc = 0
                    for r in range(NF):
                        acc = acc + F[(NF - 1 - r) * size + i]
                        if r % 2 == 0:
                            acc = acc * x
                        else:
                            acc = acc * (1.0 - x)
                    op[i] = acc + y[i]
                idx += 1
            t = target if last else t + h
            memcpy(y, ynew, size * sizeof(cplx))
            memcpy(K, K + NS * size, size * sizeof(cplx))
            nsteps += 1
            if last and not rejected and h_try > h:
                # a clipped step should not throttle the next one
                h = h_try
            else:
                h = h * factor
            while last and idx < nt and t_eval[idx] <= t:
                memcpy(&out[idx, 0, 0], y, size * sizeof(cplx))
                idx += 1

    free(K)
    free(F)
    free(y)
    free(ynew)
    free(tmp)
    free(g.coef)
    stats = {"nsteps": nsteps, "nfev": nfev, "nrejected": nrej, "t": t, "h": h}
    return out_arr, status, stats
