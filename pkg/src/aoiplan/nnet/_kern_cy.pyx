# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the small dense and recurrent nets.

Mirrors _kern_py.py function for function. The pure python module is the
reference; keep semantics identical.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

ACT_IDENTITY = 0
ACT_RELU = 1
ACT_SIGMOID = 2
ACT_TANH = 3


cdef inline double _sig(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def act_forward(int kind, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(zz)
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(zz.shape[0]):
        for j in range(zz.shape[1]):
            v = zz[i, j]
            if kind == 0:
                out[i, j] = v
            elif kind == 1:
                out[i, j] = v if v > 0.0 else 0.0
            elif kind == 2:
                out[i, j] = _sig(v)
            elif kind == 3:
                out[i, j] = tanh(v)
            else:
                raise ValueError(f"unknown activation kind {kind}")
    return out


def act_backward(int kind, a, da):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dd = np.ascontiguousarray(da, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(aa)
    cdef Py_ssize_t i, j
    cdef double av
    for i in range(aa.shape[0]):
        for j in range(aa.shape[1]):
            av = aa[i, j]
            if kind == 0:
                out[i, j] = dd[i, j]
            elif kind == 1:
                out[i, j] = dd[i, j] if av > 0.0 else 0.0
            elif kind == 2:
                out[i, j] = dd[i, j] * av * (1.0 - av)
            elif kind == 3:
                out[i, j] = dd[i, j] * (1.0 - av * av)
            else:
                raise ValueError(f"unknown activation kind {kind}")
    return out


def dense_forward(x, list ws, list bs, list kinds):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w, z
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b
    cdef Py_ssize_t layer, i, j, p, rows, din, dout
    cdef int kind
    cdef double s
    acts = [a]
    for layer in range(len(ws)):
        w = np.ascontiguousarray(ws[layer], dtype=np.float64)
        b = np.ascontiguousarray(bs[layer], dtype=np.float64)
        rows = a.shape[0]
        din = a.shape[1]
        dout = w.shape[0]
        z = np.empty((rows, dout), dtype=np.float64)
        for i in range(rows):
            for j in range(dout):
                s = b[j]
                for p in range(din):
                    s += a[i, p] * w[j, p]
                z[i, j] = s
        kind = kinds[layer]
        a = act_forward(kind, z)
        acts.append(a)
    return a, acts


def dense_backward(list ws, list kinds, list acts, dy):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] da = np.ascontiguousarray(dy, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dz, w, a_prev, dw, da_next
    cdef cnp.ndarray[cnp.float64_t, ndim=1] db
    cdef Py_ssize_t layer, i, j, p, rows, din, dout
    cdef double s
    cdef Py_ssize_t num_layers = len(ws)
    dws = [None] * num_layers
    dbs = [None] * num_layers
    for layer in range(num_layers - 1, -1, -1):
        dz = act_backward(kinds[layer], acts[layer + 1], da)
        a_prev = np.ascontiguousarray(acts[layer], dtype=np.float64)
        w = np.ascontiguousarray(ws[layer], dtype=np.float64)
        rows = dz.shape[0]
        dout = dz.shape[1]
        din = a_prev.shape[1]
        dw = np.zeros((dout, din), dtype=np.float64)
        db = np.zeros(dout, dtype=np.float64)
        for i in range(rows):
            for j in range(dout):
                s = dz[i, j]
                db[j] += s
                for p in range(din):
                    dw[j, p] += s * a_prev[i, p]
        da_next = np.zeros((rows, din), dtype=np.float64)
        for i in range(rows):
            for j in range(dout):
                s = dz[i, j]
                for p in range(din):
                    da_next[i, p] += s * w[j, p]
        dws[layer] = dw
        dbs[layer] = db
        da = da_next
    return dws, dbs, da


def lstm_seq_forward(wg, bg, xs, h0, c0):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.ascontiguousarray(wg, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(bg, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hinit = np.ascontiguousarray(h0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cinit = np.ascontiguousarray(c0, dtype=np.float64)
    cdef Py_ssize_t t_len = x.shape[0]
    cdef Py_ssize_t d_in = x.shape[1]
    cdef Py_ssize_t k = hinit.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hs = np.empty((t_len + 1, k), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cs = np.empty((t_len + 1, k), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gates = np.empty((t_len, 4 * k), dtype=np.float64)
    cdef Py_ssize_t t, j, p
    cdef double s, fv, rv, cbv, ov, cnew
    hs[0, :] = hinit
    cs[0, :] = cinit
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pre = np.empty(4 * k, dtype=np.float64)
    for t in range(t_len):
        for j in range(4 * k):
            s = b[j]
            for p in range(k):
                s += w[j, p] * hs[t, p]
            for p in range(d_in):
                s += w[j, k + p] * x[t, p]
            pre[j] = s
        for j in range(k):
            fv = _sig(pre[j])
            rv = _sig(pre[k + j])
            cbv = tanh(pre[2 * k + j])
            ov = _sig(pre[3 * k + j])
            cnew = fv * cs[t, j] + rv * cbv
            cs[t + 1, j] = cnew
            hs[t + 1, j] = ov * tanh(cnew)
            gates[t, j] = fv
            gates[t, k + j] = rv
            gates[t, 2 * k + j] = cbv
            gates[t, 3 * k + j] = ov
    return hs, cs, gates


def lstm_seq_backward(wg, xs, hs, cs, gates, dhs, dh_last, dc_last):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.ascontiguousarray(wg, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] h_arr = np.ascontiguousarray(hs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c_arr = np.ascontiguousarray(cs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_arr = np.ascontiguousarray(gates, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dh_steps
    cdef bint have_dhs = dhs is not None
    if have_dhs:
        dh_steps = np.ascontiguousarray(dhs, dtype=np.float64)
    cdef Py_ssize_t t_len = x.shape[0]
    cdef Py_ssize_t d_in = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dh = np.array(dh_last, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dc = np.array(dc_last, dtype=np.float64, copy=True)
    cdef Py_ssize_t k = dh.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dwg = np.zeros_like(w)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dbg = np.zeros(4 * k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dxs = np.zeros((t_len, d_in), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] da = np.empty(4 * k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dh_new = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t t, j, p
    cdef double fv, rv, cbv, ov, tc, dov, dcv, dfv, drv, dcbv, s
    for t in range(t_len - 1, -1, -1):
        if have_dhs:
            for j in range(k):
                dh[j] += dh_steps[t, j]
        for j in range(k):
            fv = g_arr[t, j]
            rv = g_arr[t, k + j]
            cbv = g_arr[t, 2 * k + j]
            ov = g_arr[t, 3 * k + j]
            tc = tanh(c_arr[t + 1, j])
            dov = dh[j] * tc
            dcv = dc[j] + dh[j] * ov * (1.0 - tc * tc)
            dfv = dcv * c_arr[t, j]
            drv = dcv * cbv
            dcbv = dcv * rv
            dc[j] = dcv * fv
            da[j] = dfv * fv * (1.0 - fv)
            da[k + j] = drv * rv * (1.0 - rv)
            da[2 * k + j] = dcbv * (1.0 - cbv * cbv)
            da[3 * k + j] = dov * ov * (1.0 - ov)
        for j in range(4 * k):
            s = da[j]
            dbg[j] += s
            for p in range(k):
                dwg[j, p] += s * h_arr[t, p]
            for p in range(d_in):
                dwg[j, k + p] += s * x[t, p]
        for p in range(k):
            s = 0.0
            for j in range(4 * k):
                s += w[j, p] * da[j]
            dh_new[p] = s
        for p in range(d_in):
            s = 0.0
            for j in range(4 * k):
                s += w[j, k + p] * da[j]
            dxs[t, p] = s
        for j in range(k):
            dh[j] = dh_new[j]
    return dwg, dbg, dh, dc, dxs
