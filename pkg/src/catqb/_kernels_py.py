"""Pure-numpy RK4 stepping kernel (fallback when the compiled extension is absent).

Same contract as the Cython backend in _kernels.pyx: a Generator holds the
precomputed drift matrix A and sqrt(rate)-scaled jump operators L_k, and
applies  drho/dt = A rho + rho A^dag + sum_k L_k rho L_k^dag.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class Generator:
    def __init__(self, drift, jumps):
        drift = np.ascontiguousarray(drift, dtype=np.complex128)
        self.d = drift.shape[0]
        self.drift = drift
        self.drift_dag = np.ascontiguousarray(drift.conj().T)
        self.jumps = [sp.csr_matrix(j, dtype=np.complex128) for j in jumps]

    def apply(self, rho, out=None):
        """RHS of the master equation; ``out`` may alias a preallocated buffer."""
        if out is None:
            out = np.empty_like(rho)
        np.matmul(self.drift, rho, out=out)
        out += rho @ self.drift_dag
        for L in self.jumps:
            x = L @ rho
            # x L^dag computed as (L x^dag)^dag to keep csr on the left
            out += (L @ x.conj().T).conj().T
        return out

    def rk4(self, rho, dt, n_steps, trace_tol):
        """Advance ``rho`` in place by n_steps of classical RK4.

        Returns the number of steps taken; fewer than n_steps means the trace
        left the [1 - trace_tol, 1 + trace_tol] window or went non-finite.
        """
        k = np.empty_like(rho)
        acc = np.empty_like(rho)
        tmp = np.empty_like(rho)
        half = 0.5 * dt
        sixth = dt / 6.0
        for step in range(n_steps):
            self.apply(rho, out=k)
            np.copyto(acc, k)
            np.multiply(k, half, out=tmp)
            tmp += rho
            self.apply(tmp, out=k)
            acc += k
            acc += k
            np.multiply(k, half, out=tmp)
            tmp += rho
            self.apply(tmp, out=k)
            acc += k
            acc += k
            np.multiply(k, dt, out=tmp)
            tmp += rho
            self.apply(tmp, out=k)
            acc += k
            acc *= sixth
            rho += acc
            tr = rho.trace().real
            if not (np.isfinite(tr) and abs(tr - 1.0) <= trace_tol):
                return step + 1
        return n_steps
