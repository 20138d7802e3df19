# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 Lindblad kernel.

Drift products go through BLAS zgemm; the jump sandwiches L rho L^dag exploit
the extreme sparsity of ladder operators via hand-rolled CSR loops. Semantics
match the numpy fallback in _kernels_py.py exactly.
"""

import numpy as np
import scipy.sparse as _sp

from libc.math cimport fabs, isfinite
from scipy.linalg.cython_blas cimport zgemm

ctypedef double complex cplx


cdef void _matmul(cplx* a, cplx* b, cplx* c, int d, cplx beta) noexcept nogil:
    """c (row-major) := a @ b + beta * c via the transposed column-major product."""
    cdef cplx alpha = 1.0
    zgemm("N", "N", &d, &d, &d, &alpha, b, &d, a, &d, &beta, c, &d)


cdef class Generator:
    cdef Py_ssize_t d
    cdef Py_ssize_t n_jumps
    cdef cplx[:, ::1] drift
    cdef cplx[:, ::1] drift_dag
    cdef int[:, ::1] jp          # (n_jumps, d+1) row pointers into jcol/jval
    cdef int[::1] jcol
    cdef cplx[::1] jval
    cdef cplx[:, ::1] xbuf
    cdef cplx[:, ::1] kbuf
    cdef cplx[:, ::1] accbuf
    cdef cplx[:, ::1] tmpbuf

    def __init__(self, drift, jumps):
        drift = np.ascontiguousarray(drift, dtype=np.complex128)
        d = drift.shape[0]
        self.d = d
        self.drift = drift
        self.drift_dag = np.ascontiguousarray(drift.conj().T)
        mats = [_sp.csr_matrix(j, dtype=np.complex128) for j in jumps]
        for m in mats:
            m.sort_indices()
        self.n_jumps = len(mats)
        jp = np.zeros((max(len(mats), 1), d + 1), dtype=np.int32)
        cols = [np.zeros(0, dtype=np.int32)]
        vals = [np.zeros(0, dtype=np.complex128)]
        off = 0
        for k, m in enumerate(mats):
            jp[k, :] = (m.indptr.astype(np.int64) + off).astype(np.int32)
            cols.append(m.indices.astype(np.int32))
            vals.append(m.data.astype(np.complex128))
            off += m.nnz
        self.jp = jp
        self.jcol = np.concatenate(cols)
        self.jval = np.concatenate(vals)
        self.xbuf = np.zeros((d, d), dtype=np.complex128)
        self.kbuf = np.zeros((d, d), dtype=np.complex128)
        self.accbuf = np.zeros((d, d), dtype=np.complex128)
        self.tmpbuf = np.zeros((d, d), dtype=np.complex128)

    cdef void _apply(self, cplx[:, ::1] src, cplx[:, ::1] out) noexcept nogil:
        cdef Py_ssize_t d = self.d
        cdef Py_ssize_t k, i, c, r, ptr, j, m
        cdef cplx v
        _matmul(&self.drift[0, 0], &src[0, 0], &out[0, 0], <int>d, 0)
        _matmul(&src[0, 0], &self.drift_dag[0, 0], &out[0, 0], <int>d, 1)
        for k in range(self.n_jumps):
            for i in range(d):
                for c in range(d):
                    self.xbuf[i, c] = 0
                for ptr in range(self.jp[k, i], self.jp[k, i + 1]):
                    j = self.jcol[ptr]
                    v = self.jval[ptr]
                    for c in range(d):
                        self.xbuf[i, c] = self.xbuf[i, c] + v * src[j, c]
            for i in range(d):
                for ptr in range(self.jp[k, i], self.jp[k, i + 1]):
                    m = self.jcol[ptr]
                    v = self.jval[ptr].conjugate()
                    for r in range(d):
                        out[r, i] = out[r, i] + self.xbuf[r, m] * v

    def apply(self, src, out=None):
        """RHS of the master equation (python-visible wrapper)."""
        src = np.ascontiguousarray(src, dtype=np.complex128)
        if out is None:
            out = np.empty_like(src)
        cdef cplx[:, ::1] sv = src
        cdef cplx[:, ::1] ov = out
        self._apply(sv, ov)
        return out

    def rk4(self, rho_arr, double dt, long n_steps, double trace_tol):
        """Advance rho_arr in place; returns steps taken (< n_steps on abort)."""
        cdef cplx[:, ::1] rho = rho_arr
        cdef cplx[:, ::1] k = self.kbuf
        cdef cplx[:, ::1] acc = self.accbuf
        cdef cplx[:, ::1] tmp = self.tmpbuf
        cdef Py_ssize_t d = self.d, i, j
        cdef long step
        cdef double tr
        cdef double half = 0.5 * dt
        cdef double sixth = dt / 6.0
        with nogil:
            for step in range(n_steps):
                self._apply(rho, k)
                for i in range(d):
                    for j in range(d):
                        acc[i, j] = k[i, j]
                        tmp[i, j] = rho[i, j] + half * k[i, j]
                self._apply(tmp, k)
                for i in range(d):
                    for j in range(d):
                        acc[i, j] = acc[i, j] + 2.0 * k[i, j]
                        tmp[i, j] = rho[i, j] + half * k[i, j]
                self._apply(tmp, k)
                for i in range(d):
                    for j in range(d):
                        acc[i, j] = acc[i, j] + 2.0 * k[i, j]
                        tmp[i, j] = rho[i, j] + dt * k[i, j]
                self._apply(tmp, k)
                tr = 0.0
                for i in range(d):
                    for j in range(d):
                        rho[i, j] = rho[i, j] + sixth * (acc[i, j] + k[i, j])
                    tr += rho[i, i].real
                if not (isfinite(tr) and fabs(tr - 1.0) <= trace_tol):
                    return step + 1
        return n_steps
