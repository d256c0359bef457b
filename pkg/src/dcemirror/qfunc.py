"""Coherent-state quasi-probability of the mirror's reduced state, plus the
ring statistic used to quantify phase diffusion.

Q(beta) = <beta| rho_b |beta> on a rectangular grid of amplitudes.  The
convention carries no 1/pi factor; pass normalized=True to divide it out.
Grid overlaps are evaluated with the exact projector onto the truncated
space (unnormalized truncated coherent amplitudes), which is exact whenever
the state itself lives inside the cutoff, so large-|beta| grid corners are
well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import coherent_amplitudes


@dataclass(frozen=True)
class QGrid:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if self.re_max <= self.re_min or self.im_max <= self.im_min:
            raise ValueError("grid ranges must be non-degenerate")

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_points)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_points)

    def points(self) -> np.ndarray:
        """Complex grid, shape (n_points, n_points); rows run along Im."""
        return self.re_axis[None, :] + 1j * self.im_axis[:, None]


def q_function(rho_mirror: np.ndarray, grid: QGrid, normalized: bool = False) -> np.ndarray:
    """Q values on the grid; Q[i, j] belongs to im_axis[i], re_axis[j]."""
    dim = rho_mirror.shape[0]
    if rho_mirror.shape != (dim, dim):
        raise ValueError("rho_mirror must be square")
    pts = grid.points().ravel()
    overlaps = np.empty((pts.size, dim), dtype=np.complex128)
    for k, beta in enumerate(pts):
        overlaps[k] = coherent_amplitudes(beta, dim - 1)
    q = np.einsum("kd,de,ke->k", overlaps.conj(), rho_mirror, overlaps).real
    q = np.clip(q, 0.0, None)
    if normalized:
        q = q / math.pi
    return q.reshape(grid.n_points, grid.n_points)


def ring_statistic(q_values: np.ndarray, grid: QGrid, r_min: float = 0.5) -> float:
    """Circular variance of the phase of beta under the Q weight, restricted
    to |beta| > r_min.

    0 for a phase-localized (coherent-like) state, approaching 1 for a fully
    phase-diffused ring.
    """
    pts = grid.points()
    if q_values.shape != pts.shape:
        raise ValueError("q_values shape does not match the grid")
    mask = np.abs(pts) > r_min
    w = np.where(mask, q_values, 0.0)
    total = float(w.sum())
    if total <= 0.0:
        return 0.0
    phases = np.where(mask, pts / np.maximum(np.abs(pts), 1e-300), 0.0)
    mean_phase = complex((w * phases).sum()) / total
    return 1.0 - abs(mean_phase)
