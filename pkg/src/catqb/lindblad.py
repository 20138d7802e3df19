"""Dissipative generator, vectorized Liouvillian and spectral diagnostics.

The master equation evolved here is

    drho/dt = -i[H, rho] + kappa (n+1) D[a] rho + kappa n D[a^dag] rho
              + sum_i gamma_i D[s_i] rho,          D[L]r = L r L^dag - {L^dag L, r}/2

with n the Bose-Einstein occupation of the cavity mode. This is the standard
detailed-balance thermal form. A ``paper_literal`` mode replaces the cavity
term by kappa [(n+1) a rho a^dag - (n/2){a^dag a, rho}]; that map is NOT
trace preserving (its trace derivative is kappa <a^dag a>) and exists only to
audit the consequences of using it. Spin baths are zero temperature: pure
decay at rate gamma_i.

Vectorization is column-stacking throughout: vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError, ValidationError
from .hilbert import HilbertSignature, Operator
from .model import (
    ModelParams,
    build_hamiltonian,
    cavity_lowering,
    spin_lowering,
)


def thermal_occupation(omega_c: float, T: float, k_B: float) -> float:
    """Bose-Einstein occupation 1/(exp(omega_c/(k_B T)) - 1); exactly 0 at T=0."""
    if omega_c <= 0:
        raise ValidationError(f"thermal occupation undefined for omega_c={omega_c} <= 0")
    if k_B <= 0:
        raise ValidationError(f"k_B must be positive, got {k_B}")
    if T < 0:
        raise ValidationError(f"temperature must be >= 0, got {T}")
    if T == 0.0:
        return 0.0
    return 1.0 / math.expm1(omega_c / (k_B * T))


@dataclass(frozen=True)
class DissipatorSpec:
    """One Lindblad channel: jump operator plus nonnegative rate."""

    jump_operator: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0 or not np.isfinite(self.rate):
            raise ValidationError(f"dissipator rate must be finite and >= 0, got {self.rate}")


@dataclass(frozen=True)
class SuperOperator:
    """Dense d^2 x d^2 matrix acting on column-stacked density matrices."""

    matrix: np.ndarray
    signature: HilbertSignature

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d2 = self.signature.dim ** 2
        if m.shape != (d2, d2):
            raise ValidationError(
                f"superoperator must be {d2}x{d2} for signature {self.signature.dims}, "
                f"got {m.shape}"
            )
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class SpectrumResult:
    """Liouvillian eigenvalues sorted by descending real part."""

    eigenvalues: np.ndarray
    steady_index: int
    gap: float


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def _as_matrix(rho) -> np.ndarray:
    if hasattr(rho, "matrix"):
        return rho.matrix
    return np.asarray(rho, dtype=np.complex128)


def standard_dissipator(L: Operator, rho) -> Operator:
    """D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L)/2 (rate not included)."""
    r = _as_matrix(rho)
    if hasattr(rho, "signature") and rho.signature.dims != L.signature.dims:
        raise ValidationError(
            f"signature mismatch: jump {L.signature.dims}, state {rho.signature.dims}"
        )
    if r.shape != L.matrix.shape:
        raise ValidationError(f"shape mismatch: jump {L.matrix.shape}, state {r.shape}")
    Lm = L.matrix
    LdL = Lm.conj().T @ Lm
    out = Lm @ r @ Lm.conj().T - 0.5 * (LdL @ r + r @ LdL)
    return Operator(out, L.signature)


def cavity_thermal_dissipator(
    a: Operator, kappa: float, n: float, rho, mode: str = "standard"
) -> Operator:
    """Cavity loss + thermal fluctuations, rate included.

    standard:      kappa (n+1) D[a] rho + kappa n D[a^dag] rho  (traceless)
    paper_literal: kappa [(n+1) a rho a^dag - (n/2){a^dag a, rho}] -- not trace
                   preserving; kept for auditing only.
    """
    if kappa < 0:
        raise ValidationError(f"kappa must be >= 0, got {kappa}")
    if n < 0:
        raise ValidationError(f"thermal occupation must be >= 0, got {n}")
    r = _as_matrix(rho)
    am = a.matrix
    if mode == "standard":
        out = kappa * (n + 1.0) * standard_dissipator(a, r).matrix
        if n > 0:
            out = out + kappa * n * standard_dissipator(a.dagger(), r).matrix
        return Operator(out, a.signature)
    if mode == "paper_literal":
        num = am.conj().T @ am
        out = kappa * (n + 1.0) * (am @ r @ am.conj().T)
        out = out - 0.5 * kappa * n * (num @ r + r @ num)
        return Operator(out, a.signature)
    raise ValidationError(f"unknown dissipator mode {mode!r}")


def dissipator_specs(p: ModelParams, mode: str = "standard") -> tuple[DissipatorSpec, ...]:
    """Jump/rate pairs of the standard-mode generator (zero rates dropped)."""
    if mode != "standard":
        raise ValidationError("jump/rate decomposition exists only for the standard mode")
    n = _occupation(p)
    specs = []
    a = cavity_lowering(p)
    if p.kappa > 0:
        specs.append(DissipatorSpec(a, p.kappa * (n + 1.0)))
        if n > 0:
            specs.append(DissipatorSpec(a.dagger(), p.kappa * n))
    for i, rate in enumerate(p.spin_rates()):
        if rate > 0:
            specs.append(DissipatorSpec(spin_lowering(p, i), rate))
    return tuple(specs)


def _occupation(p: ModelParams) -> float:
    if p.T == 0.0 or p.kappa == 0.0:
        return 0.0
    return thermal_occupation(p.omega_c, p.T, p.k_B)


def apply_generator(p: ModelParams, rho, mode: str = "standard") -> Operator:
    """Matrix-form right-hand side of the master equation (reference path).

    Deliberately naive (dense operator products); the optimized kernels in
    catqb.kernels and the vectorized superoperator are both checked against
    this implementation.
    """
    if mode not in ("standard", "paper_literal"):
        raise ValidationError(f"unknown dissipator mode {mode!r}")
    r = _as_matrix(rho)
    sig = p.signature()
    H = build_hamiltonian(p).matrix
    out = -1j * (H @ r - r @ H)
    n = _occupation(p)
    if p.kappa > 0:
        out = out + cavity_thermal_dissipator(cavity_lowering(p), p.kappa, n, r, mode).matrix
    for i, rate in enumerate(p.spin_rates()):
        if rate > 0:
            out = out + rate * standard_dissipator(spin_lowering(p, i), r).matrix
    return Operator(out, sig)


@dataclass(frozen=True)
class GeneratorParts:
    """Precomputed pieces for fast application: drho/dt = A rho + rho A^dag + sum_k L_k rho L_k^dag.

    ``drift`` is A = -iH - (anticommutator half); ``jumps`` are sqrt(rate)-scaled
    sandwich operators stored sparse.
    """

    drift: np.ndarray
    jumps: tuple[sp.csr_matrix, ...]
    signature: HilbertSignature


def generator_parts(p: ModelParams, mode: str = "standard") -> GeneratorParts:
    sig = p.signature()
    H = build_hamiltonian(p).matrix
    n = _occupation(p)
    a = cavity_lowering(p).matrix
    sandwiches: list[tuple[float, np.ndarray]] = []
    anticomm: list[tuple[float, np.ndarray]] = []
    if p.kappa > 0:
        if mode == "standard":
            sandwiches.append((p.kappa * (n + 1.0), a))
            anticomm.append((p.kappa * (n + 1.0), a.conj().T @ a))
            if n > 0:
                sandwiches.append((p.kappa * n, a.conj().T))
                anticomm.append((p.kappa * n, a @ a.conj().T))
        elif mode == "paper_literal":
            sandwiches.append((p.kappa * (n + 1.0), a))
            anticomm.append((p.kappa * n, a.conj().T @ a))
        else:
            raise ValidationError(f"unknown dissipator mode {mode!r}")
    elif mode not in ("standard", "paper_literal"):
        raise ValidationError(f"unknown dissipator mode {mode!r}")
    for i, rate in enumerate(p.spin_rates()):
        if rate > 0:
            s = spin_lowering(p, i).matrix
            sandwiches.append((rate, s))
            anticomm.append((rate, s.conj().T @ s))
    drift = -1j * H
    for rate, LdL in anticomm:
        drift = drift - 0.5 * rate * LdL
    jumps = tuple(sp.csr_matrix(math.sqrt(rate) * L) for rate, L in sandwiches)
    return GeneratorParts(drift=drift, jumps=jumps, signature=sig)


def parts_from_ops(H: Operator | None, specs) -> GeneratorParts:
    """Standard-form generator parts from an explicit jump list (test harnesses)."""
    if H is None and not specs:
        raise ValidationError("need a Hamiltonian or at least one dissipator")
    sig = H.signature if H is not None else specs[0].jump_operator.signature
    d = sig.dim
    drift = np.zeros((d, d), dtype=np.complex128)
    if H is not None:
        drift = drift - 1j * H.matrix
    jumps = []
    for spec in specs:
        L = spec.jump_operator.matrix
        if spec.jump_operator.signature.dims != sig.dims:
            raise ValidationError("all jump operators must share one signature")
        drift = drift - 0.5 * spec.rate * (L.conj().T @ L)
        if spec.rate > 0:
            jumps.append(sp.csr_matrix(math.sqrt(spec.rate) * L))
    return GeneratorParts(drift=drift, jumps=tuple(jumps), signature=sig)


def liouvillian_from_parts(parts: GeneratorParts, sparse: bool = False):
    """Column-stacked superoperator L = I(x)A + conj(A)(x)I + sum conj(L_k)(x)L_k."""
    d = parts.signature.dim
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    drift = sp.csr_matrix(parts.drift)
    L = sp.kron(eye, drift, format="csr") + sp.kron(drift.conj(), eye, format="csr")
    for jump in parts.jumps:
        L = L + sp.kron(jump.conj(), jump, format="csr")
    if sparse:
        return L.tocsr()
    return SuperOperator(L.toarray(), parts.signature)


def _suggest_cutoff(p: ModelParams) -> int:
    spin_dim = 2 ** (p.N + 1)
    return max(1, math.isqrt(p.dim_cap) // spin_dim - 1)


def build_liouvillian(p: ModelParams, mode: str = "standard") -> SuperOperator:
    """Dense vectorized generator; d^2 must stay within the safety cap."""
    d = p.signature().dim
    if d * d > p.dim_cap:
        raise ValidationError(
            f"superoperator dimension {d * d} exceeds the cap {p.dim_cap}; "
            f"reduce photon_cutoff to <= {_suggest_cutoff(p)} (currently {p.photon_cutoff})"
        )
    return liouvillian_from_parts(generator_parts(p, mode), sparse=False)


def build_liouvillian_sparse(p: ModelParams, mode: str = "standard") -> sp.csr_matrix:
    """Sparse vectorized generator (no cap: used by iterative solvers)."""
    return liouvillian_from_parts(generator_parts(p, mode), sparse=True)


def _spectrum_from_eigenvalues(vals: np.ndarray) -> SpectrumResult:
    order = np.argsort(-vals.real, kind="stable")
    vals = vals[order]
    steady = int(np.argmin(np.abs(vals)))
    rest = np.delete(vals, steady)
    gap = max(0.0, float(-rest.real.max())) if rest.size else 0.0
    vals.flags.writeable = False
    return SpectrumResult(eigenvalues=vals, steady_index=steady, gap=gap)


def liouvillian_spectrum(sup, k: int = 20) -> SpectrumResult:
    """Eigenvalues of the generator, slowest (largest real part) first.

    A dense SuperOperator gets a full eigendecomposition. A sparse matrix gets
    the k eigenvalues nearest zero via shift-invert Arnoldi, which captures
    the slowly decaying metastable modes.
    """
    if isinstance(sup, SuperOperator):
        vals = np.linalg.eigvals(sup.matrix)
        return _spectrum_from_eigenvalues(vals)
    if sp.issparse(sup):
        n = sup.shape[0]
        k = min(k, n - 2)
        if k < 1:
            raise ValidationError(f"matrix of size {n} too small for iterative spectrum")
        # small positive real shift: never an eigenvalue (spectrum has Re <= 0)
        sigma = 1e-3
        try:
            vals = spla.eigs(sup.tocsc(), k=k, sigma=sigma, which="LM", return_eigenvectors=False)
        except spla.ArpackNoConvergence as exc:
            got = 0 if exc.eigenvalues is None else len(exc.eigenvalues)
            raise SolverError(
                f"shift-invert Arnoldi converged only {got}/{k} eigenvalues"
            ) from exc
        return _spectrum_from_eigenvalues(np.asarray(vals))
    raise ValidationError(f"expected SuperOperator or sparse matrix, got {type(sup)!r}")


def spectral_gap(s: SpectrumResult) -> float:
    """-Re of the slowest eigenvalue excluding the steady one."""
    if len(s.eigenvalues) < 2:
        raise ValidationError("spectral gap needs at least two eigenvalues")
    rest = np.delete(s.eigenvalues, s.steady_index)
    return max(0.0, float(-rest.real.max()))
