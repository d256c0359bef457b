"""Truncated Fock-space linear algebra for the two-mode cavity-mirror system.

Single-mode operators are tagged with the subsystem they act on and combined
with an explicit Kronecker product in the fixed cavity (x) mirror ordering.
Everything downstream consumes operators built here, never raw indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import CutoffError, FockCutoffs, TAIL_THRESHOLD

CAVITY = "cavity"
MIRROR = "mirror"
COMPOSITE = "composite"


@dataclass(frozen=True)
class ModeOperator:
    """Dense operator together with the subsystem it acts on."""

    mat: np.ndarray
    subsystem: str

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "ModeOperator":
        return ModeOperator(self.mat.conj().T, self.subsystem)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def annihilation_matrix(cutoff: int, subsystem: str = CAVITY) -> ModeOperator:
    """Annihilation operator on the space {|0>, ..., |cutoff>}.

    <n-1|a|n> = sqrt(n); a|cutoff> still maps down, the truncation only
    removes the raising path out of the top level.
    """
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    dim = cutoff + 1
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(1, dim):
        mat[n - 1, n] = math.sqrt(n)
    return ModeOperator(mat, subsystem)


def number_matrix(cutoff: int, subsystem: str = CAVITY) -> ModeOperator:
    """Number operator, built directly as diag(0..cutoff) so it is exact."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    mat = np.diag(np.arange(cutoff + 1, dtype=np.complex128))
    return ModeOperator(mat, subsystem)


def identity_matrix(cutoff: int, subsystem: str = CAVITY) -> ModeOperator:
    return ModeOperator(np.eye(cutoff + 1, dtype=np.complex128), subsystem)


def coherent_tail(beta: complex, cutoff: int) -> float:
    """Probability weight of the Poisson photon distribution above cutoff."""
    nbar = abs(beta) ** 2
    if nbar == 0.0:
        return 0.0
    # log-space recursion, p_n = e^{-nbar} nbar^n / n!
    log_p = -nbar
    total = math.exp(log_p)
    for n in range(1, cutoff + 1):
        log_p += math.log(nbar) - math.log(n)
        total += math.exp(log_p)
    return max(0.0, 1.0 - total)


def coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    """Unnormalized truncated coherent amplitudes c_n = e^{-|b|^2/2} b^n/sqrt(n!)."""
    amps = np.empty(cutoff + 1, dtype=np.complex128)
    amps[0] = math.exp(-abs(beta) ** 2 / 2.0)
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * beta / math.sqrt(n)
    return amps


def coherent_state(beta: complex, cutoff: int) -> PureState:
    """Coherent state renormalized on the truncated space.

    Raises CutoffError when the discarded Poisson tail is above the
    truncation threshold, i.e. the cutoff is too small for this amplitude.
    """
    tail = coherent_tail(beta, cutoff)
    if tail >= TAIL_THRESHOLD:
        raise CutoffError(
            f"coherent amplitude |beta|={abs(beta):.4g} needs a larger cutoff: "
            f"tail above n={cutoff} is {tail:.3e} >= {TAIL_THRESHOLD:.0e}"
        )
    amps = coherent_amplitudes(beta, cutoff)
    amps /= np.linalg.norm(amps)
    return PureState(amps)


def tensor_product(op_cavity: ModeOperator, op_mirror: ModeOperator) -> ModeOperator:
    """Kronecker composite in the fixed cavity (x) mirror ordering."""
    if op_cavity.subsystem != CAVITY or op_mirror.subsystem != MIRROR:
        raise ValueError(
            "tensor_product expects (cavity, mirror) operands, got "
            f"({op_cavity.subsystem}, {op_mirror.subsystem})"
        )
    return ModeOperator(np.kron(op_cavity.mat, op_mirror.mat), COMPOSITE)


def partial_trace_mirror(rho: np.ndarray, cutoffs: FockCutoffs) -> np.ndarray:
    """Reduced mirror density matrix (the cavity is traced out)."""
    d = cutoffs.dim
    if rho.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} composite matrix, got {rho.shape}")
    four = rho.reshape(
        cutoffs.dim_cavity, cutoffs.dim_mirror, cutoffs.dim_cavity, cutoffs.dim_mirror
    )
    return np.trace(four, axis1=0, axis2=2)


class CompositeOps:
    """Cached bundle of the dense composite operators for one cutoff pair."""

    def __init__(self, cutoffs: FockCutoffs):
        self.cutoffs = cutoffs
        a = annihilation_matrix(cutoffs.n_max_cavity, CAVITY)
        b = annihilation_matrix(cutoffs.n_max_mirror, MIRROR)
        eye_c = identity_matrix(cutoffs.n_max_cavity, CAVITY)
        eye_m = identity_matrix(cutoffs.n_max_mirror, MIRROR)
        self.a = tensor_product(a, eye_m)
        self.b = tensor_product(eye_c, b)
        self.n_a = tensor_product(number_matrix(cutoffs.n_max_cavity, CAVITY), eye_m)
        self.n_b = tensor_product(eye_c, number_matrix(cutoffs.n_max_mirror, MIRROR))
        self.a2 = ModeOperator(self.a.mat @ self.a.mat, COMPOSITE)
        # a^2 b^dagger + h.c., the coupling without its prefactor
        pair = self.a2.mat @ self.b.dag().mat
        self.pair_exchange = ModeOperator(pair + pair.conj().T, COMPOSITE)


@lru_cache(maxsize=8)
def composite_ops(cutoffs: FockCutoffs) -> CompositeOps:
    return CompositeOps(cutoffs)


def vacuum_coherent_density(b0: complex, cutoffs: FockCutoffs) -> np.ndarray:
    """Density matrix for cavity vacuum (x) mirror coherent state |b0>."""
    psi_c = np.zeros(cutoffs.dim_cavity, dtype=np.complex128)
    psi_c[0] = 1.0
    psi_m = coherent_state(b0, cutoffs.n_max_mirror).amplitudes
    psi = np.kron(psi_c, psi_m)
    return np.outer(psi, psi.conj())


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(rho op) without forming the product matrix."""
    return complex(np.sum(rho * op.T))
