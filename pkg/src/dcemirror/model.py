"""Shared model parameters, Hilbert-space cutoffs and error types.

All rates are expressed in units of the cavity decay rate gamma_a, which is
1.0 by convention everywhere in this package.  Times are in units of
1/gamma_a.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

# Largest composite dimension we allow for a dense density matrix.  Above
# this the RK work per step and the eigenvalue checks stop being desk-scale.
MAX_DENSE_DIM = 2048

# Truncation-tail threshold used both when building coherent states and by
# the runtime cutoff monitors (two orders below the tightest tolerance the
# observables are checked at).
TAIL_THRESHOLD = 1e-8

# Runtime monitor: combined population of the top two Fock levels of either
# mode must stay below this during a master-equation run.
TAIL_POPULATION_MAX = 1e-6


class ConfigError(ValueError):
    """Invalid scenario/configuration input (CLI exit code 2)."""


class CutoffError(RuntimeError):
    """Fock-space truncation is insufficient for the requested state or run
    (CLI exit code 3)."""


class BOBreakdownError(RuntimeError):
    """The adiabatic steady-state photon number does not exist: the mirror
    amplitude is above the runaway-stimulation threshold (CLI exit code 4)."""

    def __init__(self, abs_b: float, ratio: float):
        self.abs_b = abs_b
        self.ratio = ratio
        super().__init__(
            f"adiabatic reduction breaks down: 4*(gamma_b_eff/gamma_a)*|b|^2 = "
            f"{4.0 * ratio * abs_b ** 2:.6g} >= 1 (|b| = {abs_b:.6g}, "
            f"ratio = {ratio:.6g}); runaway stimulated regime"
        )


class TWADivergenceError(RuntimeError):
    """Too many Wigner trajectories diverged (CLI exit code 5)."""


class IntegrationError(RuntimeError):
    """Adaptive step-size control failed (step-size underflow)."""


class WeakCouplingWarning(UserWarning):
    """Raised when omega_c/gamma_a is outside the weak-coupling regime the
    model is meant for.  The run proceeds."""


@dataclass(frozen=True)
class FockCutoffs:
    """Inclusive maximum occupation retained for each mode.

    The composite space is cavity (x) mirror with dimension
    (n_max_cavity+1)*(n_max_mirror+1); the cavity index is always the first
    tensor factor.
    """

    n_max_cavity: int
    n_max_mirror: int

    def __post_init__(self):
        if self.n_max_cavity < 1 or self.n_max_mirror < 1:
            raise ConfigError(
                f"cutoffs must be >= 1, got cavity={self.n_max_cavity}, "
                f"mirror={self.n_max_mirror}"
            )
        if self.dim > MAX_DENSE_DIM:
            raise ConfigError(
                f"composite dimension {self.dim} exceeds the dense-matrix "
                f"budget {MAX_DENSE_DIM}"
            )

    @property
    def dim_cavity(self) -> int:
        return self.n_max_cavity + 1

    @property
    def dim_mirror(self) -> int:
        return self.n_max_mirror + 1

    @property
    def dim(self) -> int:
        return self.dim_cavity * self.dim_mirror


def default_mirror_cutoff(b0: complex) -> int:
    """Poisson mean + 6 sigma margin for an initial coherent amplitude."""
    r = abs(b0)
    return max(4, math.ceil(r * r + 6.0 * r + 4.0))


@dataclass(frozen=True)
class ModelParams:
    """Physical rates of the cavity-mirror model, in units of gamma_a.

    delta is the detuning of the mirror frequency from twice the cavity
    frequency; omega_c the photon-pair/phonon exchange coupling.  All solvers
    work in the frame rotating at half the mirror frequency for the cavity
    and at the mirror frequency for the mirror, where the coupling is
    time-independent and the only cavity term left is -delta/2 per photon.
    """

    delta: float
    omega_c: float
    cutoffs: FockCutoffs = field(default=FockCutoffs(15, 15))
    gamma_a: float = 1.0

    def __post_init__(self):
        if self.gamma_a <= 0:
            raise ConfigError(f"gamma_a must be > 0, got {self.gamma_a}")
        if self.omega_c < 0:
            raise ConfigError(f"omega_c must be >= 0, got {self.omega_c}")
        if self.omega_c / self.gamma_a > 0.5:
            warnings.warn(
                f"omega_c/gamma_a = {self.omega_c / self.gamma_a:.3g} > 1/2: "
                "outside the weak-coupling regime, results may only be "
                "qualitative",
                WeakCouplingWarning,
                stacklevel=2,
            )
