"""Time propagation of the density matrix and steady-state extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import (
    DegenerateSteadyStateError,
    PhysicsAbortError,
    SolverError,
    ValidationError,
)
from .hilbert import DensityMatrix, HilbertSignature, validate_density_matrix
from .lindblad import (
    build_liouvillian_sparse,
    generator_parts,
    thermal_occupation,
    unvec,
    vec,
)
from .model import ModelParams, _w_state_amplitudes

#: propagation aborts when |Tr rho - 1| exceeds this (standard mode)
TRACE_ABORT_TOL = 1e-6

INTEGRATOR_METHODS = ("rk4_fixed", "expm_krylov_reference")


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    rk4_fixed is the production path; expm_krylov_reference propagates the
    vectorized state by the exact exponential of the superoperator over each
    snapshot interval and serves as the accuracy oracle at small cutoffs.
    """

    method: str = "rk4_fixed"
    dt: float = 0.005
    snapshot_stride: int = 100
    renormalize: bool = False

    def __post_init__(self):
        if self.method not in INTEGRATOR_METHODS:
            raise ValidationError(
                f"unknown integrator method {self.method!r}; choose from {INTEGRATOR_METHODS}"
            )
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if int(self.snapshot_stride) < 1:
            raise ValidationError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        object.__setattr__(self, "snapshot_stride", int(self.snapshot_stride))


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of the evolving state plus per-snapshot sanity diagnostics."""

    times: np.ndarray
    states: tuple[DensityMatrix, ...]
    trace_errors: np.ndarray
    herm_errors: np.ndarray
    min_eigs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        n = len(self.states)
        if not (
            t.size == n
            and len(self.trace_errors) == n
            and len(self.herm_errors) == n
            and len(self.min_eigs) == n
        ):
            raise ValidationError("trajectory arrays must have equal lengths")
        if n == 0 or t[0] != 0.0:
            raise ValidationError("trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")
        for name in ("times", "trace_errors", "herm_errors", "min_eigs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


class _Recorder:
    def __init__(self, sig: HilbertSignature):
        self.sig = sig
        self.times: list[float] = []
        self.states: list[DensityMatrix] = []
        self.trace_errors: list[float] = []
        self.herm_errors: list[float] = []
        self.min_eigs: list[float] = []

    def record(self, t: float, rho: np.ndarray):
        tr = rho.trace()
        herm = float(np.abs(rho - rho.conj().T).max())
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        self.times.append(t)
        self.states.append(DensityMatrix(rho.copy(), self.sig))
        self.trace_errors.append(abs(tr - 1.0))
        self.herm_errors.append(herm)
        self.min_eigs.append(min_eig)

    def trajectory(self) -> Trajectory:
        return Trajectory(
            times=np.array(self.times),
            states=tuple(self.states),
            trace_errors=np.array(self.trace_errors),
            herm_errors=np.array(self.herm_errors),
            min_eigs=np.array(self.min_eigs),
        )


def _snapshot_blocks(n_steps: int, stride: int):
    done = 0
    while done < n_steps:
        block = min(stride, n_steps - done)
        done += block
        yield done, block


def propagate(
    rho0: DensityMatrix,
    p: ModelParams,
    cfg: IntegratorConfig,
    t_end: float,
    dissipator_mode: str = "standard",
) -> Trajectory:
    """Evolve rho0 under the master equation up to t_end.

    Snapshots are stored every cfg.snapshot_stride steps (plus the initial and
    final states). In standard mode the run aborts with PhysicsAbortError as
    soon as |Tr rho - 1| > 1e-6 or the state goes non-finite; the partial
    trajectory is attached to the exception. paper_literal mode is expected
    to drift in trace, so only non-finite entries abort there.
    """
    if rho0.signature.dims != p.signature().dims:
        raise ValidationError(
            f"initial state signature {rho0.signature.dims} does not match "
            f"model signature {p.signature().dims}"
        )
    validate_density_matrix(rho0, tol=1e-10)
    if not (t_end > 0 and np.isfinite(t_end)):
        raise ValidationError(f"t_end must be positive, got {t_end}")
    n_steps = max(1, round(t_end / cfg.dt))
    standard = dissipator_mode == "standard"
    trace_tol = TRACE_ABORT_TOL if standard else math.inf
    rec = _Recorder(rho0.signature)
    rho = rho0.matrix.copy()
    rec.record(0.0, rho)

    if cfg.method == "rk4_fixed":
        gen = kernels.make_generator(generator_parts(p, dissipator_mode))
        for done, block in _snapshot_blocks(n_steps, cfg.snapshot_stride):
            taken = gen.rk4(rho, cfg.dt, block, trace_tol)
            if taken < block:
                t_bad = (done - block + taken) * cfg.dt
                err = PhysicsAbortError(
                    f"trace left the window at t={t_bad:g} "
                    f"(Tr rho = {rho.trace():.6g})",
                    t=t_bad,
                )
                err.partial = rec.trajectory()
                raise err
            if cfg.renormalize:
                rho /= rho.trace().real
            rec.record(done * cfg.dt, rho)
        return rec.trajectory()

    # expm_krylov_reference: exact exponential over each snapshot interval
    L = build_liouvillian_sparse(p, dissipator_mode)
    v = vec(rho).astype(np.complex128)
    d = rho.shape[0]
    cached: dict[int, sp.csr_matrix] = {}
    for done, block in _snapshot_blocks(n_steps, cfg.snapshot_stride):
        if block not in cached:
            cached[block] = (L * (block * cfg.dt)).tocsr()
        v = spla.expm_multiply(cached[block], v)
        rho = unvec(v, d)
        t = done * cfg.dt
        tr = rho.trace()
        if not np.all(np.isfinite(v.view(float))) or (
            standard and abs(tr - 1.0) > TRACE_ABORT_TOL
        ):
            err = PhysicsAbortError(f"state invalid at t={t:g} (Tr rho = {tr:.6g})", t=t)
            err.partial = rec.trajectory()
            raise err
        if cfg.renormalize:
            rho = rho / tr.real
            v = vec(rho)
        rec.record(t, rho)
    return rec.trajectory()


def initial_state(
    p: ModelParams,
    battery="all_up",
    cavity="vacuum",
    catalyst="plus",
) -> DensityMatrix:
    """Product initial state from per-factor specs.

    battery: "all_up" (default, a charged battery), "all_down", "w", or an
    explicit 0/1 occupation list; cavity: "vacuum", "thermal", or a Fock
    level; catalyst: "plus" (default, the coherent catalyst), "ground",
    "excited", or a Bloch vector [bx, by, bz] with z=+1 the excited pole.
    """
    nc = p.photon_cutoff + 1
    if cavity == "vacuum":
        rho_cav = np.zeros((nc, nc), dtype=np.complex128)
        rho_cav[0, 0] = 1.0
    elif cavity == "thermal":
        if p.T == 0.0:
            probs = np.zeros(nc)
            probs[0] = 1.0
        else:
            n = thermal_occupation(p.omega_c, p.T, p.k_B)
            ratio = n / (n + 1.0)
            probs = ratio ** np.arange(nc)
            probs /= probs.sum()
        rho_cav = np.diag(probs).astype(np.complex128)
    elif isinstance(cavity, (int, np.integer)) and not isinstance(cavity, bool):
        if not 0 <= int(cavity) <= p.photon_cutoff:
            raise ValidationError(
                f"Fock level {cavity} outside the cutoff {p.photon_cutoff}"
            )
        rho_cav = np.zeros((nc, nc), dtype=np.complex128)
        rho_cav[int(cavity), int(cavity)] = 1.0
    else:
        raise ValidationError(f"unknown cavity state spec {cavity!r}")

    spin_dim = 2**p.N
    if battery == "all_up":
        psi = np.zeros(spin_dim, dtype=np.complex128)
        psi[-1] = 1.0
    elif battery == "all_down":
        psi = np.zeros(spin_dim, dtype=np.complex128)
        psi[0] = 1.0
    elif battery == "w":
        psi = _w_state_amplitudes(p.N)
    elif isinstance(battery, (list, tuple)):
        bits = [int(b) for b in battery]
        if len(bits) != p.N or any(b not in (0, 1) for b in bits):
            raise ValidationError(
                f"battery pattern must be {p.N} entries of 0/1, got {battery!r}"
            )
        idx = 0
        for b in bits:
            idx = idx * 2 + b
        psi = np.zeros(spin_dim, dtype=np.complex128)
        psi[idx] = 1.0
    else:
        raise ValidationError(f"unknown battery state spec {battery!r}")
    rho_spins = np.outer(psi, psi.conj())

    if catalyst == "plus":
        bloch = (1.0, 0.0, 0.0)
    elif catalyst == "ground":
        bloch = (0.0, 0.0, -1.0)
    elif catalyst == "excited":
        bloch = (0.0, 0.0, 1.0)
    elif isinstance(catalyst, (list, tuple)) and len(catalyst) == 3:
        bloch = tuple(float(b) for b in catalyst)
        if math.hypot(*bloch) > 1.0 + 1e-12:
            raise ValidationError(f"Bloch vector {catalyst!r} has norm > 1")
    else:
        raise ValidationError(f"unknown catalyst state spec {catalyst!r}")
    bx, by, bz = bloch
    # ground-first basis: sigma_z = diag(-1, +1)
    rho_cat = 0.5 * np.array(
        [[1.0 - bz, bx + 1j * by], [bx - 1j * by, 1.0 + bz]], dtype=np.complex128
    )

    rho = np.kron(rho_cav, np.kron(rho_spins, rho_cat))
    dm = DensityMatrix(rho, p.signature())
    validate_density_matrix(dm, tol=1e-10)
    return dm


def _solve_with_row_replaced(L: sp.csr_matrix, d: int, row: int) -> np.ndarray:
    n = d * d
    mask = np.ones(n, dtype=bool)
    mask[row] = False
    keep = sp.diags(mask.astype(np.complex128)) @ L
    repl = sp.csr_matrix(
        (np.ones(d, dtype=np.complex128), (np.full(d, row), np.arange(d) * (d + 1))),
        shape=(n, n),
    )
    M = (keep + repl).tocsc()
    b = np.zeros(n, dtype=np.complex128)
    b[row] = 1.0
    return spla.splu(M).solve(b)


def _null_basis(L: sp.csr_matrix, tol: float = 1e-10) -> list[np.ndarray]:
    n = L.shape[0]
    if n <= 4096:
        ns = scipy.linalg.null_space(L.toarray(), rcond=tol)
        return [ns[:, i] for i in range(ns.shape[1])]
    vals, vecs = spla.eigs(L.tocsc(), k=min(8, n - 2), sigma=1e-6, which="LM")
    cols = [vecs[:, i] for i in range(len(vals)) if abs(vals[i]) < tol]
    if not cols:
        return []
    q, _ = np.linalg.qr(np.column_stack(cols))
    return [q[:, i] for i in range(q.shape[1])]


def steady_state_from_liouvillian(L, signature: HilbertSignature) -> DensityMatrix:
    """Unique null state of a trace-preserving generator.

    Direct sparse solve with one row of L vec(rho) = 0 replaced by the trace
    constraint; a second solve with a different replaced row probes for a
    degenerate steady manifold, in which case the manifold basis is attached
    to DegenerateSteadyStateError.
    """
    d = signature.dim
    Lc = sp.csr_matrix(L.matrix if hasattr(L, "matrix") else L, dtype=np.complex128)
    if Lc.shape != (d * d, d * d):
        raise ValidationError(
            f"generator shape {Lc.shape} does not match signature dimension {d}^2"
        )

    def finish(x: np.ndarray) -> DensityMatrix:
        rho = unvec(x, d)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / rho.trace().real
        return rho

    try:
        rho1 = finish(_solve_with_row_replaced(Lc, d, 0))
        rho2 = finish(_solve_with_row_replaced(Lc, d, d * d - 1))
        solved = True
    except RuntimeError:
        solved = False
    if solved:
        dist = 0.5 * np.abs(np.linalg.eigvalsh(rho1 - rho2)).sum()
        resid = np.linalg.norm(Lc @ vec(rho1))
        if dist <= 1e-8 and resid < 1e-9:
            min_eig = float(np.linalg.eigvalsh(rho1).min())
            if min_eig < -1e-9:
                raise SolverError(
                    f"steady-state candidate not PSD (min eigenvalue {min_eig:.3e})"
                )
            return DensityMatrix(rho1, signature)
    basis = _null_basis(Lc)
    if len(basis) > 1:
        raise DegenerateSteadyStateError(
            f"steady manifold has dimension {len(basis)}; returning its basis",
            basis=basis,
        )
    raise SolverError(
        "steady-state solve failed: row-replaced systems disagree or residual too large"
    )


def steady_state(p: ModelParams, dissipator_mode: str = "standard") -> DensityMatrix:
    """Steady state of the full model (standard mode only)."""
    if dissipator_mode != "standard":
        raise ValidationError("steady states are only meaningful for the standard mode")
    L = build_liouvillian_sparse(p, dissipator_mode)
    return steady_state_from_liouvillian(L, p.signature())
