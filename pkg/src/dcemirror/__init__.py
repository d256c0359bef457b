"""Open-system simulations of a single cavity mode damped by photon-pair
emission from a harmonically bound mirror, at four levels of theory: the
exact Lindblad master equation, the factorized mean-field equations, an
adiabatic (fast-cavity) reduction, and truncated-Wigner stochastic
trajectories."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BOBreakdownError,
    ConfigError,
    CutoffError,
    FockCutoffs,
    IntegrationError,
    ModelParams,
    TWADivergenceError,
    WeakCouplingWarning,
)
