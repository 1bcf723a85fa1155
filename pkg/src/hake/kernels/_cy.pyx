# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend. Same surface and semantics as numpy_backend;
plain C loops instead of vectorized numpy, which also removes the
temporary (N,k) arrays the numpy path allocates."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt

cnp.import_array()

cdef double BIAS_EPS = 1e-6
cdef int V_FULL = 0
cdef int V_MODULUS_ONLY = 1
cdef int V_PHASE_ONLY = 2
cdef int V_MODE = 3

# fail fast if the python-side codes ever drift from the constants above
from .._common import VARIANT_CODES as _codes
assert _codes == {"full": 0, "modulus_only": 1, "phase_only": 2, "mode": 3}


cdef inline double clamp_bias(double x) nogil:
    if x < BIAS_EPS:
        return BIAS_EPS
    if x > 1.0 - BIAS_EPS:
        return 1.0 - BIAS_EPS
    return x


cdef inline double sign(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline int has_mod(int variant) nogil:
    return variant == V_FULL or variant == V_MODULUS_ONLY or variant == V_MODE


cdef inline int has_phase(int variant) nogil:
    return variant == V_FULL or variant == V_PHASE_ONLY


def triple_distances(double[:, ::1] ent_mod, double[:, ::1] ent_phase,
                     double[:, ::1] rel_mod, double[:, ::1] rel_bias,
                     double[:, ::1] rel_phase,
                     cnp.int64_t[::1] h, cnp.int64_t[::1] r, cnp.int64_t[::1] t,
                     int variant, int bias_on):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t k = ent_mod.shape[1]
    d_mod_arr = np.zeros(n)
    d_phase_arr = np.zeros(n)
    cdef double[::1] d_mod = d_mod_arr
    cdef double[::1] d_phase = d_phase_arr
    cdef Py_ssize_t i, j, hi, ri, ti
    cdef double acc, u, rr, bb, delta
    with nogil:
        for i in range(n):
            hi = h[i]
            ri = r[i]
            ti = t[i]
            if has_mod(variant):
                acc = 0.0
                for j in range(k):
                    if variant == V_MODE:
                        u = ent_mod[hi, j] * rel_mod[ri, j] - ent_mod[ti, j]
                    elif bias_on:
                        rr = fabs(rel_mod[ri, j])
                        bb = clamp_bias(rel_bias[ri, j])
                        u = ent_mod[hi, j] * (rr + bb) + ent_mod[ti, j] * (bb - 1.0)
                    else:
                        u = ent_mod[hi, j] * fabs(rel_mod[ri, j]) - ent_mod[ti, j]
                    acc += u * u
                d_mod[i] = sqrt(acc)
            if has_phase(variant):
                acc = 0.0
                for j in range(k):
                    delta = (ent_phase[hi, j] + rel_phase[ri, j] - ent_phase[ti, j]) / 2.0
                    acc += fabs(sin(delta))
                d_phase[i] = acc
    return d_mod_arr, d_phase_arr


def candidate_scores(double[:, ::1] ent_mod, double[:, ::1] ent_phase,
                     double[:, ::1] rel_mod, double[:, ::1] rel_bias,
                     double[:, ::1] rel_phase,
                     Py_ssize_t h, Py_ssize_t r, Py_ssize_t t, int replace_tail,
                     int variant, int bias_on, double lam1, double lam2):
    cdef Py_ssize_t n_ent = ent_mod.shape[0]
    cdef Py_ssize_t k = ent_mod.shape[1]
    scores_arr = np.zeros(n_ent)
    cdef double[::1] scores = scores_arr
    cdef Py_ssize_t e, j
    cdef double acc_m, acc_p, u, rr, bb, delta, fixed
    with nogil:
        for e in range(n_ent):
            acc_m = 0.0
            acc_p = 0.0
            if has_mod(variant):
                for j in range(k):
                    if variant == V_MODE:
                        rr = rel_mod[r, j]
                        if replace_tail:
                            u = ent_mod[h, j] * rr - ent_mod[e, j]
                        else:
                            u = ent_mod[e, j] * rr - ent_mod[t, j]
                    elif bias_on:
                        rr = fabs(rel_mod[r, j])
                        bb = clamp_bias(rel_bias[r, j])
                        if replace_tail:
                            u = ent_mod[h, j] * (rr + bb) + ent_mod[e, j] * (bb - 1.0)
                        else:
                            u = ent_mod[e, j] * (rr + bb) + ent_mod[t, j] * (bb - 1.0)
                    else:
                        rr = fabs(rel_mod[r, j])
                        if replace_tail:
                            u = ent_mod[h, j] * rr - ent_mod[e, j]
                        else:
                            u = ent_mod[e, j] * rr - ent_mod[t, j]
                    acc_m += u * u
                acc_m = sqrt(acc_m)
            if has_phase(variant):
                for j in range(k):
                    if replace_tail:
                        delta = (ent_phase[h, j] + rel_phase[r, j] - ent_phase[e, j]) / 2.0
                    else:
                        delta = (ent_phase[e, j] + rel_phase[r, j] - ent_phase[t, j]) / 2.0
                    acc_p += fabs(sin(delta))
            scores[e] = -(lam1 * acc_m + lam2 * acc_p)
    return scores_arr


def triple_grad_rows(double[:, ::1] ent_mod, double[:, ::1] ent_phase,
                     double[:, ::1] rel_mod, double[:, ::1] rel_bias,
                     double[:, ::1] rel_phase,
                     cnp.int64_t[::1] h, cnp.int64_t[::1] r, cnp.int64_t[::1] t,
                     double[::1] coeff, double lam1, double lam2,
                     int variant, int bias_on):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t k = ent_mod.shape[1]
    gh_mod_arr = np.zeros((n, k))
    gh_phase_arr = np.zeros((n, k))
    gt_mod_arr = np.zeros((n, k))
    gt_phase_arr = np.zeros((n, k))
    gr_mod_arr = np.zeros((n, k))
    gr_bias_arr = np.zeros((n, k))
    gr_phase_arr = np.zeros((n, k))
    cdef double[:, ::1] gh_mod = gh_mod_arr
    cdef double[:, ::1] gh_phase = gh_phase_arr
    cdef double[:, ::1] gt_mod = gt_mod_arr
    cdef double[:, ::1] gt_phase = gt_phase_arr
    cdef double[:, ::1] gr_mod = gr_mod_arr
    cdef double[:, ::1] gr_bias = gr_bias_arr
    cdef double[:, ::1] gr_phase = gr_phase_arr
    cdef Py_ssize_t i, j, hi, ri, ti
    cdef double acc, u, rr, bb, raw, braw, d, cv, v, delta, gp, cm, cp
    with nogil:
        for i in range(n):
            hi = h[i]
            ri = r[i]
            ti = t[i]
            cm = coeff[i] * lam1
            cp = coeff[i] * lam2
            if has_mod(variant) and cm != 0.0:
                acc = 0.0
                for j in range(k):
                    raw = rel_mod[ri, j]
                    if variant == V_MODE:
                        u = ent_mod[hi, j] * raw - ent_mod[ti, j]
                    elif bias_on:
                        bb = clamp_bias(rel_bias[ri, j])
                        u = ent_mod[hi, j] * (fabs(raw) + bb) + ent_mod[ti, j] * (bb - 1.0)
                    else:
                        u = ent_mod[hi, j] * fabs(raw) - ent_mod[ti, j]
                    acc += u * u
                d = sqrt(acc)
                if d > 0.0:
                    cv = cm / d
                    for j in range(k):
                        raw = rel_mod[ri, j]
                        if variant == V_MODE:
                            u = ent_mod[hi, j] * raw - ent_mod[ti, j]
                            v = cv * u
                            gh_mod[i, j] = v * raw
                            gt_mod[i, j] = -v
                            gr_mod[i, j] = v * ent_mod[hi, j]
                        elif bias_on:
                            rr = fabs(raw)
                            braw = rel_bias[ri, j]
                            bb = clamp_bias(braw)
                            u = ent_mod[hi, j] * (rr + bb) + ent_mod[ti, j] * (bb - 1.0)
                            v = cv * u
                            gh_mod[i, j] = v * (rr + bb)
                            gt_mod[i, j] = v * (bb - 1.0)
                            gr_mod[i, j] = v * ent_mod[hi, j] * sign(raw)
                            if BIAS_EPS < braw < 1.0 - BIAS_EPS:
                                gr_bias[i, j] = v * (ent_mod[hi, j] + ent_mod[ti, j])
                        else:
                            rr = fabs(raw)
                            u = ent_mod[hi, j] * rr - ent_mod[ti, j]
                            v = cv * u
                            gh_mod[i, j] = v * rr
                            gt_mod[i, j] = -v
                            gr_mod[i, j] = v * ent_mod[hi, j] * sign(raw)
            if has_phase(variant) and cp != 0.0:
                for j in range(k):
                    delta = (ent_phase[hi, j] + rel_phase[ri, j] - ent_phase[ti, j]) / 2.0
                    gp = cp * 0.5 * sign(sin(delta)) * cos(delta)
                    gh_phase[i, j] = gp
                    gr_phase[i, j] = gp
                    gt_phase[i, j] = -gp
    return (gh_mod_arr, gh_phase_arr, gt_mod_arr, gt_phase_arr,
            gr_mod_arr, gr_bias_arr, gr_phase_arr)


def scatter_add_rows(double[:, ::1] out, cnp.int64_t[::1] idx, double[:, ::1] contrib):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t k = out.shape[1]
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(k):
                out[idx[i], j] += contrib[i, j]
