"""Tensor-product operator algebra for the composite cavity/spins/catalyst space.

Conventions used everywhere in the package:

* subsystem order is [cavity, spin_1 ... spin_N, catalyst];
* two-level bases are ordered ground-first, so sigma^dag sigma = diag(0, 1);
* all matrices are dense complex128.

Types are immutable after construction (arrays are marked read-only) and all
operations are pure functions, so everything here is safe to share between
threads or worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: default cap on the total Hilbert-space dimension
DEFAULT_DIM_CAP = 4096


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HilbertSignature:
    """Ordered list of subsystem dimensions identifying a tensor-product space."""

    dims: tuple[int, ...]
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValidationError("signature needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValidationError(f"every subsystem dimension must be >= 2, got {dims}")
        if self.dim > self.dim_cap:
            raise ValidationError(
                f"total dimension {self.dim} exceeds the safety cap {self.dim_cap}"
            )

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix tagged with the space it acts on.

    Hermiticity is not an invariant (lowering operators are not Hermitian);
    use :func:`is_hermitian` where it matters.
    """

    matrix: np.ndarray
    signature: HilbertSignature

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.signature.dim:
            raise ValidationError(
                f"matrix dimension {m.shape[0]} does not match signature dimension "
                f"{self.signature.dim}"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.signature)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_compatible(other)
        return Operator(self.matrix @ other.matrix, self.signature)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_compatible(other)
        return Operator(self.matrix + other.matrix, self.signature)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_compatible(other)
        return Operator(self.matrix - other.matrix, self.signature)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.signature)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.signature)

    def _check_compatible(self, other: "Operator"):
        if self.signature.dims != other.signature.dims:
            raise ValidationError(
                f"incompatible signatures {self.signature.dims} vs {other.signature.dims}"
            )


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on a tensor-product space."""

    amplitudes: np.ndarray
    signature: HilbertSignature

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if v.size != self.signature.dim:
            raise ValidationError(
                f"state length {v.size} does not match signature dimension "
                f"{self.signature.dim}"
            )
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValidationError("cannot normalize a zero or non-finite state vector")
        object.__setattr__(self, "amplitudes", _frozen(v / norm))

    def density_matrix(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.signature)


@dataclass(frozen=True)
class DensityMatrix:
    """Full-system state: Hermitian, unit trace, positive semidefinite.

    Construction checks shape only; use :func:`validate_density_matrix` to
    enforce the physical invariants at a tolerance (propagation snapshots
    carry small integrator-induced deviations that are tracked separately
    as diagnostics).
    """

    matrix: np.ndarray
    signature: HilbertSignature

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.signature.dim:
            raise ValidationError(
                f"matrix dimension {m.shape[0]} does not match signature dimension "
                f"{self.signature.dim}"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def validate_density_matrix(rho: DensityMatrix, tol: float = 1e-10):
    """Raise unless rho is Hermitian, unit-trace and PSD within tol."""
    m = rho.matrix
    herm = np.abs(m - m.conj().T).max()
    if herm > tol:
        raise ValidationError(f"density matrix not Hermitian: max|rho-rho^dag| = {herm:.3e}")
    tr = m.trace()
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix trace {tr:.12g} differs from 1 beyond {tol:g}")
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
    if min_eig < -tol:
        raise ValidationError(f"density matrix not PSD: min eigenvalue {min_eig:.3e}")


def is_hermitian(op: Operator, tol: float = 1e-12) -> bool:
    m = op.matrix
    return bool(np.abs(m - m.conj().T).max() <= tol)


def annihilation(cutoff: int) -> Operator:
    """Bosonic annihilation operator truncated at Fock level ``cutoff``.

    <m|a|m'> = sqrt(m') delta_{m,m'-1}; the matrix is (cutoff+1) x (cutoff+1).
    """
    cutoff = int(cutoff)
    if cutoff < 1:
        raise ValidationError("photon cutoff must be >= 1, no dynamics in a 1-level cavity")
    a = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
    for m in range(cutoff):
        a[m, m + 1] = math.sqrt(m + 1)
    return Operator(a, HilbertSignature((cutoff + 1,)))


def creation(cutoff: int) -> Operator:
    return annihilation(cutoff).dagger()


def sigma_lowering() -> Operator:
    """Two-level lowering operator [[0,1],[0,0]] in the (ground, excited) basis."""
    return Operator(np.array([[0, 1], [0, 0]], dtype=np.complex128), HilbertSignature((2,)))


def sigma_raising() -> Operator:
    return sigma_lowering().dagger()


def sigma_z() -> Operator:
    """diag(-1, +1): ground-first ordering puts the excited state at +1."""
    return Operator(np.diag([-1.0, 1.0]).astype(np.complex128), HilbertSignature((2,)))


def identity(sig: HilbertSignature) -> Operator:
    return Operator(np.eye(sig.dim, dtype=np.complex128), sig)


def embed(op: Operator, index: int, sig: HilbertSignature) -> Operator:
    """I (x) ... (x) op (x) ... (x) I with ``op`` at subsystem ``index``."""
    if not 0 <= index < len(sig):
        raise ValidationError(f"subsystem index {index} out of range for {sig.dims}")
    if op.dim != sig.dims[index]:
        raise ValidationError(
            f"operator dimension {op.dim} does not match subsystem dimension "
            f"{sig.dims[index]} at index {index}"
        )
    left = math.prod(sig.dims[:index])
    right = math.prod(sig.dims[index + 1 :])
    m = np.kron(np.eye(left), np.kron(op.matrix, np.eye(right)))
    return Operator(m, sig)


def tensor(ops: list[Operator]) -> Operator:
    """Kronecker product in list order; signatures concatenate."""
    if not ops:
        raise ValidationError("tensor() needs at least one operator")
    m = ops[0].matrix
    dims = list(ops[0].signature.dims)
    cap = ops[0].signature.dim_cap
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
        dims.extend(op.signature.dims)
        cap = max(cap, op.signature.dim_cap)
    return Operator(m, HilbertSignature(tuple(dims), cap))


def basis_state(sig: HilbertSignature, occupations) -> StateVector:
    """Computational product basis state; occupations[i] indexes subsystem i."""
    occ = tuple(int(k) for k in occupations)
    if len(occ) != len(sig):
        raise ValidationError(f"need {len(sig)} occupation numbers, got {len(occ)}")
    for k, d in zip(occ, sig.dims):
        if not 0 <= k < d:
            raise ValidationError(f"occupation {k} out of range for local dimension {d}")
    idx = 0
    for k, d in zip(occ, sig.dims):
        idx = idx * d + k
    v = np.zeros(sig.dim, dtype=np.complex128)
    v[idx] = 1.0
    return StateVector(v, sig)
