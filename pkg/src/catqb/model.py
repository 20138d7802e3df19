"""Physical model: Hamiltonians, collective operators and the quasi-dark state.

The system is an N-spin chain (the battery) inside a single lossy cavity mode,
with one auxiliary catalyst qubit coupled to every spin:

    H0   = omega_c a^dag a + omega_a sum_i s_i^dag s_i + (omega_cat/2) sz_cat
    Hint = J sum_{i<N} (s_i^dag s_{i+1} + h.c.)
         + g sum_i (a^dag s_i + h.c.)
         + lam sum_i (cat_+ s_i + h.c.)

The chain is open (no N<->1 term) and all interactions are excitation
conserving (rotating-wave form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hilbert import (
    DEFAULT_DIM_CAP,
    HilbertSignature,
    Operator,
    StateVector,
    annihilation,
    embed,
    identity,
    sigma_lowering,
    sigma_raising,
    sigma_z,
)


@dataclass(frozen=True)
class ModelParams:
    """All physical parameters, hbar = 1.

    Defaults are the catalyst-assisted baseline: g=0.3, J=1.6, kappa=0.15,
    T=0.8, lam=1.5 with N=3 spins, omega_c=0.5, omega_a=2.0, omega_cat=0.06.
    ``lam`` is the catalyst-spin coupling (signed; the sign relative to g
    carries the interference phase). ``gamma_spins`` optionally overrides the
    uniform per-spin relaxation rate.
    """

    N: int = 3
    omega_c: float = 0.5
    omega_a: float = 2.0
    omega_cat: float = 0.06
    J: float = 1.6
    g: float = 0.3
    lam: float = 1.5
    kappa: float = 0.15
    gamma: float = 0.01
    T: float = 0.8
    k_B: float = 1.0
    photon_cutoff: int = 5
    gamma_spins: tuple[float, ...] | None = None
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValidationError(f"need at least one spin, got N={self.N}")
        if int(self.photon_cutoff) < 1:
            raise ValidationError(f"photon cutoff must be >= 1, got {self.photon_cutoff}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "photon_cutoff", int(self.photon_cutoff))
        for name in ("omega_c", "omega_a", "omega_cat", "kappa", "gamma", "T", "k_B"):
            val = float(getattr(self, name))
            if val < 0 or not np.isfinite(val):
                raise ValidationError(f"{name} must be finite and >= 0, got {val}")
            object.__setattr__(self, name, val)
        for name in ("J", "g", "lam"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValidationError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if self.gamma_spins is not None:
            rates = tuple(float(r) for r in self.gamma_spins)
            if len(rates) != self.N:
                raise ValidationError(
                    f"gamma_spins needs {self.N} entries, got {len(rates)}"
                )
            if any(r < 0 or not np.isfinite(r) for r in rates):
                raise ValidationError(f"per-spin rates must be finite and >= 0, got {rates}")
            object.__setattr__(self, "gamma_spins", rates)
        # fail fast if the composite space is over the cap
        self.signature()

    def signature(self) -> HilbertSignature:
        """Composite space, ordered [cavity, spin_1..spin_N, catalyst]."""
        return HilbertSignature(
            (self.photon_cutoff + 1,) + (2,) * self.N + (2,), self.dim_cap
        )

    @property
    def cavity_index(self) -> int:
        return 0

    def spin_index(self, i: int) -> int:
        """Composite index of spin i, i = 0..N-1."""
        if not 0 <= i < self.N:
            raise ValidationError(f"spin index {i} out of range for N={self.N}")
        return 1 + i

    @property
    def catalyst_index(self) -> int:
        return 1 + self.N

    def spin_rates(self) -> tuple[float, ...]:
        return self.gamma_spins if self.gamma_spins is not None else (self.gamma,) * self.N


def cavity_lowering(p: ModelParams) -> Operator:
    return embed(annihilation(p.photon_cutoff), p.cavity_index, p.signature())


def spin_lowering(p: ModelParams, i: int) -> Operator:
    return embed(sigma_lowering(), p.spin_index(i), p.signature())


def catalyst_lowering(p: ModelParams) -> Operator:
    return embed(sigma_lowering(), p.catalyst_index, p.signature())


def build_h0(p: ModelParams) -> Operator:
    """Free Hamiltonian of cavity, spins and catalyst."""
    sig = p.signature()
    a = cavity_lowering(p)
    h = p.omega_c * (a.dagger() @ a)
    for i in range(p.N):
        s = spin_lowering(p, i)
        h = h + p.omega_a * (s.dagger() @ s)
    h = h + 0.5 * p.omega_cat * embed(sigma_z(), p.catalyst_index, sig)
    return h


def battery_exchange(p: ModelParams) -> Operator:
    """Nearest-neighbor exchange term J sum_{i=1}^{N-1} (s_i^dag s_{i+1} + h.c.)."""
    sig = p.signature()
    h = Operator(np.zeros((sig.dim, sig.dim)), sig)
    for i in range(p.N - 1):
        si = spin_lowering(p, i)
        sj = spin_lowering(p, i + 1)
        hop = si.dagger() @ sj
        h = h + p.J * (hop + hop.dagger())
    return h


def build_hint(p: ModelParams) -> Operator:
    """Interaction Hamiltonian: exchange + cavity-spin + catalyst-spin couplings."""
    h = battery_exchange(p)
    a = cavity_lowering(p)
    cat_plus = catalyst_lowering(p).dagger()
    for i in range(p.N):
        s = spin_lowering(p, i)
        cav = a.dagger() @ s
        h = h + p.g * (cav + cav.dagger())
        cat = cat_plus @ s
        h = h + p.lam * (cat + cat.dagger())
    return h


def build_hamiltonian(p: ModelParams) -> Operator:
    return build_h0(p) + build_hint(p)


def collective_lowering(p: ModelParams) -> Operator:
    """S^- = (1/sqrt(N)) sum_i s_i^- on the composite space."""
    sig = p.signature()
    m = np.zeros((sig.dim, sig.dim), dtype=np.complex128)
    for i in range(p.N):
        m = m + spin_lowering(p, i).matrix
    return Operator(m / math.sqrt(p.N), sig)


def collective_hint(p: ModelParams) -> Operator:
    """Cavity and catalyst couplings in collective form.

    sqrt(N) g (a^dag S^- + a S^+) + sqrt(N) lam (cat_+ S^- + cat_- S^+);
    identical to build_hint minus the exchange term, because the uniform
    couplings only address the symmetric collective mode.
    """
    rt = math.sqrt(p.N)
    s_minus = collective_lowering(p)
    s_plus = s_minus.dagger()
    a = cavity_lowering(p)
    cat_minus = catalyst_lowering(p)
    h = rt * p.g * (a.dagger() @ s_minus + a @ s_plus)
    h = h + rt * p.lam * (cat_minus.dagger() @ s_minus + cat_minus @ s_plus)
    return h


def interference_lambda(g: float, N: int) -> float:
    """Catalyst coupling that amplitude-matches the cavity channel: -g/sqrt(N)."""
    if int(N) < 1:
        raise ValidationError(f"need at least one spin, got N={N}")
    return -float(g) / math.sqrt(int(N))


def _w_state_amplitudes(N: int) -> np.ndarray:
    """Symmetric single-excitation state over N spins (ground-first basis)."""
    v = np.zeros(2**N, dtype=np.complex128)
    for i in range(N):
        v[1 << (N - 1 - i)] = 1.0
    return v / math.sqrt(N)


def quasi_dark_state(p: ModelParams) -> StateVector:
    """Dressed state sharing one excitation between the W mode and the catalyst.

    (sqrt(N) lam |W_spin, cat down> - g |0_spin, cat up>) (x) |0_cav>,
    normalized by sqrt(N lam^2 + g^2). The single spin excitation is the
    symmetric W state, the only mode the uniform couplings address.
    """
    weight = p.N * p.lam**2 + p.g**2
    if weight == 0.0:
        raise ValidationError("quasi-dark state undefined at g = lam = 0")
    sig = p.signature()
    w = _w_state_amplitudes(p.N)
    spin_dim = 2**p.N
    rest = np.zeros(spin_dim * 2, dtype=np.complex128)
    # spin-catalyst factor: catalyst is the last (fastest) index
    rest[0::2] += math.sqrt(p.N) * p.lam * w  # |W> (x) |cat down>
    rest[1] += -p.g  # |0_spin> (x) |cat up>
    full = np.zeros(sig.dim, dtype=np.complex128)
    full[: spin_dim * 2] = rest  # photon-number-0 block only
    return StateVector(full / math.sqrt(weight), sig)


def quasi_dark_residual(p: ModelParams) -> float:
    """Norm of the cavity-exciting component of Hint |psi_QD>.

    Measures how "quasi" the dark state is: exactly 0 only in the single
    branch limits (g = 0 or lam = 0), and N|g lam|/sqrt(N lam^2 + g^2)
    otherwise, including at the interference point lam = -g/sqrt(N).
    """
    psi = quasi_dark_state(p)
    out = build_hint(p).matrix @ psi.amplitudes
    nc = p.photon_cutoff + 1
    rest = psi.amplitudes.size // nc
    blocks = out.reshape(nc, rest)
    return float(np.linalg.norm(blocks[1:]))


def total_excitation(p: ModelParams) -> Operator:
    """a^dag a + sum_i s_i^dag s_i + cat_+ cat_-; conserved by H."""
    a = cavity_lowering(p)
    n = a.dagger() @ a
    for i in range(p.N):
        s = spin_lowering(p, i)
        n = n + s.dagger() @ s
    cat = catalyst_lowering(p)
    n = n + cat.dagger() @ cat
    return n
