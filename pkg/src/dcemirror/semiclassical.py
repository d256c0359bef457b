"""Mean-field backreaction dynamics for the factorized moments (b, n_a, q).

The closure replaces <a^2 b+> by q b* and <a+a b> by n_a b, turning the
exact moment hierarchy into the closed nonlinear system

    db/dt  = -i omega_c q
    dn/dt  = -gamma_a n - 2i omega_c q* b + 2i omega_c q b*
    dq/dt  = i (delta + i gamma_a) q - 4i omega_c n b - 2i omega_c b

in the same rotating frame as the master-equation solver.  The factorization
is the definition of this approximation and is hard-coded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ode
from .model import ModelParams


@dataclass
class MeanFieldState:
    time: float
    b: complex
    n_a: float
    q: complex

    @property
    def physical(self) -> bool:
        """Gaussian-like physicality: |q| <= n_a + 1/2 (with numeric slack)."""
        return self.n_a >= -1e-9 and abs(self.q) <= self.n_a + 0.5 + 1e-6


def mean_field_rhs(state: MeanFieldState, params: ModelParams) -> tuple[complex, complex, complex]:
    """Time derivatives (db, dn, dq); dn is returned as a complex number
    whose imaginary part is exactly the rounding of the conjugate pair."""
    wc = params.omega_c
    b, n, q = state.b, state.n_a, state.q
    db = -1j * wc * q
    dn = -params.gamma_a * n - 2j * wc * q.conjugate() * b + 2j * wc * q * b.conjugate()
    dq = 1j * (params.delta + 1j * params.gamma_a) * q - 4j * wc * n * b - 2j * wc * b
    return db, dn, dq


@dataclass
class MeanFieldResult:
    states: list[MeanFieldState]
    warnings: list[str]


def integrate_mean_field(
    initial: MeanFieldState,
    params: ModelParams,
    sample_times: np.ndarray,
    atol: float = ode.ATOL,
    rtol: float = ode.RTOL,
) -> MeanFieldResult:
    """Adaptive trajectory of the factorized moments at the sample times.

    Physicality-bound breaches do not stop the run; they are reported in the
    result's warning list (the breakdown regime is expected to produce them).
    """

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        st = MeanFieldState(t, y[0], y[1].real, y[2])
        db, dn, dq = mean_field_rhs(st, params)
        return np.array([db, dn, dq], dtype=np.complex128)

    states: list[MeanFieldState] = []
    warnings: list[str] = []

    def on_sample(t: float, y: np.ndarray) -> None:
        st = MeanFieldState(t, complex(y[0]), float(y[1].real), complex(y[2]))
        states.append(st)
        if not st.physical:
            warnings.append(
                f"t={t:.6g}: |q|={abs(st.q):.4g} exceeds n_a + 1/2 = {st.n_a + 0.5:.4g}"
            )

    y0 = np.array([initial.b, initial.n_a, initial.q], dtype=np.complex128)
    ode.integrate_adaptive(rhs, y0, np.asarray(sample_times, float), on_sample,
                           atol=atol, rtol=rtol)
    return MeanFieldResult(states=states, warnings=warnings)
