# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: packed quadratic features, batch boundary values,
fused smoothed-risk/scale terms, and the shadow-point hinge penalty.

Semantics match ``_kernels_py`` (the NumPy fallback); see its module
docstring for the shared conventions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cosh, tanh

cnp.import_array()

DEF TANH_CUTOFF = 30.0


def design_matrix(R):
    cdef double[:, ::1] r = np.ascontiguousarray(R, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t m = r.shape[1]
    cdef Py_ssize_t d = m + 1
    cdef Py_ssize_t P = d * (d + 1) // 2
    out_arr = np.empty((n, P), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, i, j, t
    cdef double ci
    for k in range(n):
        t = 0
        for i in range(d):
            ci = r[k, i] if i < m else 1.0
            out[k, t] = ci * ci
            t += 1
            for j in range(i + 1, d):
                out[k, t] = 2.0 * ci * (r[k, j] if j < m else 1.0)
                t += 1
    return out_arr


def eval_batch(Z, phi):
    cdef double[:, ::1] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t P = z.shape[1]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, t
    cdef double acc
    for k in range(n):
        acc = 0.0
        for t in range(P):
            acc += z[k, t] * p[t]
        out[k] = acc
    return out_arr


cdef inline double _h(double x) nogil:
    if x > TANH_CUTOFF:
        return 1.0
    if x < -TANH_CUTOFF:
        return 0.0
    return 0.5 * (1.0 + tanh(x))


cdef inline double _hprime(double x) nogil:
    cdef double c
    if x > TANH_CUTOFF or x < -TANH_CUTOFF:
        return 0.0
    c = cosh(x)
    return 0.5 / (c * c)


def risk_terms(Zp, Zn, phi, double q, double sigma2):
    cdef double[:, ::1] zp = np.ascontiguousarray(Zp, dtype=np.float64)
    cdef double[:, ::1] zn = np.ascontiguousarray(Zn, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n_p = zp.shape[0]
    cdef Py_ssize_t n_n = zn.shape[0]
    cdef Py_ssize_t P = p.shape[0]
    risk_grad_arr = np.zeros(P, dtype=np.float64)
    msq_grad_arr = np.zeros(P, dtype=np.float64)
    cdef double[::1] rg = risk_grad_arr
    cdef double[::1] mg = msq_grad_arr
    cdef double risk_pos = 0.0, risk_neg = 0.0, msq_pos = 0.0, msq_neg = 0.0
    cdef double wp = q / n_p
    cdef double wn = (1.0 - q) / n_n
    cdef double b, der, cr, cm
    cdef Py_ssize_t k, t
    for k in range(n_p):
        b = 0.0
        for t in range(P):
            b += zp[k, t] * p[t]
        risk_pos += 1.0 - _h(b / sigma2)
        msq_pos += b * b
        der = _hprime(b / sigma2)
        cr = -wp * der / sigma2
        cm = 2.0 * b / n_p
        if der != 0.0:
            for t in range(P):
                rg[t] += cr * zp[k, t]
        for t in range(P):
            mg[t] += cm * zp[k, t]
    for k in range(n_n):
        b = 0.0
        for t in range(P):
            b += zn[k, t] * p[t]
        risk_neg += _h(b / sigma2)
        msq_neg += b * b
        der = _hprime(b / sigma2)
        cr = wn * der / sigma2
        cm = 2.0 * b / n_n
        if der != 0.0:
            for t in range(P):
                rg[t] += cr * zn[k, t]
        for t in range(P):
            mg[t] += cm * zn[k, t]
    cdef double risk = wp * risk_pos + wn * risk_neg
    cdef double msq = msq_pos / n_p + msq_neg / n_n
    return risk, risk_grad_arr, msq, msq_grad_arr


def hinge_penalty(Zs, Phi):
    cdef double[:, ::1] zs = np.ascontiguousarray(Zs, dtype=np.float64)
    cdef double[:, ::1] ph = np.ascontiguousarray(Phi, dtype=np.float64)
    cdef Py_ssize_t ns = zs.shape[0]
    cdef Py_ssize_t theta = ph.shape[0]
    cdef Py_ssize_t P = ph.shape[1]
    grad_arr = np.zeros((theta, P), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef double penalty = 0.0
    cdef double max_violation = 0.0
    if theta < 2 or ns == 0:
        return 0.0, grad_arr, 0.0
    b_arr = np.empty(theta, dtype=np.float64)
    cdef double[::1] b = b_arr
    cdef Py_ssize_t i, j, t
    cdef double v, g
    for i in range(ns):
        for j in range(theta):
            v = 0.0
            for t in range(P):
                v += zs[i, t] * ph[j, t]
            b[j] = v
        for j in range(theta - 1):
            v = b[j] - b[j + 1]
            if v > 0.0:
                penalty += v * v
                if v > max_violation:
                    max_violation = v
                g = 2.0 * v
                for t in range(P):
                    grad[j, t] += g * zs[i, t]
                    grad[j + 1, t] -= g * zs[i, t]
    return penalty, grad_arr, max_violation
