# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM recurrence. Same contract as _lstm_numpy; the recurrent
matrix-vector products go through BLAS, the gate math through tight C loops."""

import numpy as np

cimport cython
from libc.math cimport exp, expf, tanh, tanhf
from scipy.linalg.cython_blas cimport dgemv, sgemv

BACKEND = "cython"

ctypedef fused floating:
    float
    double


cdef inline floating _sig(floating x) noexcept nogil:
    if floating is float:
        if x >= 0:
            return <float>(1.0 / (1.0 + expf(-x)))
        else:
            return <float>(expf(x) / (1.0 + expf(x)))
    else:
        if x >= 0:
            return 1.0 / (1.0 + exp(-x))
        else:
            return exp(x) / (1.0 + exp(x))


cdef inline floating _tanh(floating x) noexcept nogil:
    if floating is float:
        return tanhf(x)
    else:
        return tanh(x)


cdef void _gemv_rowmajor(bint transpose_w, int rows, int cols,
                         floating* w, floating* x, floating alpha,
                         floating beta, floating* y) noexcept nogil:
    # w is a C-order (rows, cols) matrix; BLAS sees its transpose.
    # transpose_w False: y = alpha * (x @ w) + beta*y      (x: rows, y: cols)
    # transpose_w True:  y = alpha * (w @ x) + beta*y      (x: cols, y: rows)
    cdef int m = cols, n = rows, inc = 1
    cdef char tn = b'N', tt = b'T'
    if floating is float:
        if transpose_w:
            sgemv(&tt, &m, &n, &alpha, w, &m, x, &inc, &beta, y, &inc)
        else:
            sgemv(&tn, &m, &n, &alpha, w, &m, x, &inc, &beta, y, &inc)
    else:
        if transpose_w:
            dgemv(&tt, &m, &n, &alpha, w, &m, x, &inc, &beta, y, &inc)
        else:
            dgemv(&tn, &m, &n, &alpha, w, &m, x, &inc, &beta, y, &inc)


def recurrent_forward(floating[:, ::1] xw, floating[:, ::1] w_hh,
                      floating[::1] b, bint reverse=False):
    cdef Py_ssize_t T = xw.shape[0]
    cdef int four_h = <int>xw.shape[1]
    cdef int H = four_h // 4
    dtype = np.float32 if floating is float else np.float64

    h_arr = np.zeros((T, H), dtype=dtype)
    acts_arr = np.empty((T, four_h), dtype=dtype)
    cells_arr = np.empty((T, H), dtype=dtype)
    tanhc_arr = np.empty((T, H), dtype=dtype)
    z_arr = np.empty(four_h, dtype=dtype)

    cdef floating[:, ::1] h = h_arr
    cdef floating[:, ::1] acts = acts_arr
    cdef floating[:, ::1] cells = cells_arr
    cdef floating[:, ::1] tanhc = tanhc_arr
    cdef floating[::1] z = z_arr

    cdef Py_ssize_t k, t, tprev
    cdef int j
    cdef bint first
    cdef floating iv, fv, gv, ov, cv

    with nogil:
        for k in range(T):
            t = T - 1 - k if reverse else k
            first = (k == 0)
            tprev = (t + 1) if reverse else (t - 1)
            for j in range(four_h):
                z[j] = xw[t, j] + b[j]
            if not first:
                _gemv_rowmajor(False, H, four_h, &w_hh[0, 0], &h[tprev, 0],
                               <floating>1.0, <floating>1.0, &z[0])
            for j in range(H):
                iv = _sig(z[j])
                fv = _sig(z[H + j])
                gv = _tanh(z[2 * H + j])
                ov = _sig(z[3 * H + j])
                if first:
                    cv = iv * gv
                else:
                    cv = fv * cells[tprev, j] + iv * gv
                acts[t, j] = iv
                acts[t, H + j] = fv
                acts[t, 2 * H + j] = gv
                acts[t, 3 * H + j] = ov
                cells[t, j] = cv
                tanhc[t, j] = _tanh(cv)
                h[t, j] = ov * tanhc[t, j]
    return h_arr, acts_arr, cells_arr, tanhc_arr


def recurrent_backward(floating[:, ::1] acts, floating[:, ::1] cells,
                       floating[:, ::1] tanhc, floating[:, ::1] w_hh,
                       floating[:, ::1] dh_out, bint reverse=False):
    cdef Py_ssize_t T = acts.shape[0]
    cdef int four_h = <int>acts.shape[1]
    cdef int H = four_h // 4
    dtype = np.float32 if floating is float else np.float64

    dz_arr = np.zeros((T, four_h), dtype=dtype)
    dh_rec_arr = np.zeros(H, dtype=dtype)
    dc_rec_arr = np.zeros(H, dtype=dtype)

    cdef floating[:, ::1] dz = dz_arr
    cdef floating[::1] dh_rec = dh_rec_arr
    cdef floating[::1] dc_rec = dc_rec_arr

    cdef Py_ssize_t k, t, tprev
    cdef int j
    cdef bint first
    cdef floating iv, fv, gv, ov, tcv, dhv, dov, dcv, cprev

    with nogil:
        for k in range(T - 1, -1, -1):
            t = T - 1 - k if reverse else k
            first = (k == 0)
            tprev = (t + 1) if reverse else (t - 1)
            for j in range(H):
                iv = acts[t, j]
                fv = acts[t, H + j]
                gv = acts[t, 2 * H + j]
                ov = acts[t, 3 * H + j]
                tcv = tanhc[t, j]
                dhv = dh_out[t, j] + dh_rec[j]
                dov = dhv * tcv
                dcv = dhv * ov * (1.0 - tcv * tcv) + dc_rec[j]
                cprev = <floating>0.0 if first else cells[tprev, j]
                dz[t, j] = (dcv * gv) * iv * (1.0 - iv)
                dz[t, H + j] = (dcv * cprev) * fv * (1.0 - fv)
                dz[t, 2 * H + j] = (dcv * iv) * (1.0 - gv * gv)
                dz[t, 3 * H + j] = dov * ov * (1.0 - ov)
                dc_rec[j] = dcv * fv
            if not first:
                _gemv_rowmajor(True, H, four_h, &w_hh[0, 0], &dz[t, 0],
                               <floating>1.0, <floating>0.0, &dh_rec[0])
    return dz_arr
