import numpy as np
import pytest

from dcemirror.fock import coherent_state
from dcemirror.qfunc import QGrid, q_function, ring_statistic

GRID = QGrid(-3.0, 3.0, -3.0, 3.0, 61)


def test_vacuum_q_values():
    rho = np.zeros((12, 12), dtype=complex)
    rho[0, 0] = 1.0
    q = q_function(rho, GRID)
    # Q(beta) = e^{-|beta|^2}: center 1, |beta|=1 gives 1/e
    i0 = 30  # beta = 0 at the grid center
    assert q[i0, i0] == pytest.approx(1.0, abs=1e-12)
    j1 = np.argmin(np.abs(GRID.re_axis - 1.0))
    assert q[i0, j1] == pytest.approx(np.exp(-1.0), abs=1e-10)
    pts = GRID.points()
    assert np.allclose(q, np.exp(-np.abs(pts) ** 2), atol=1e-8)


def test_coherent_self_overlap_peak():
    amps = coherent_state(2.0, 25).amplitudes
    rho = np.outer(amps, amps.conj())
    q = q_function(rho, GRID)
    i0 = 30
    j2 = np.argmin(np.abs(GRID.re_axis - 2.0))
    assert q[i0, j2] == pytest.approx(1.0, abs=1e-6)
    assert q.max() == pytest.approx(1.0, abs=1e-6)
    assert q.min() >= 0.0


def test_q_values_bounded():
    rng = np.random.default_rng(2)
    m = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    q = q_function(rho, QGrid(-4, 4, -4, 4, 31))
    assert q.min() >= 0.0
    assert q.max() <= 1.0 + 1e-12


def test_normalized_variant():
    rho = np.zeros((6, 6), dtype=complex)
    rho[0, 0] = 1.0
    q = q_function(rho, GRID)
    qn = q_function(rho, GRID, normalized=True)
    assert np.allclose(qn, q / np.pi)


def test_ring_statistic_discriminates():
    # coherent state: phase concentrated, R small
    amps = coherent_state(2.0, 25).amplitudes
    rho_coh = np.outer(amps, amps.conj())
    r_coh = ring_statistic(q_function(rho_coh, GRID), GRID)
    # phase-diffused ring: the same amplitude distribution with dead phases
    rho_ring = np.diag(np.abs(amps) ** 2).astype(complex)
    r_ring = ring_statistic(q_function(rho_ring, GRID), GRID)
    assert r_coh < 0.2
    assert r_ring > 0.95
    assert r_ring > 3 * r_coh


def test_ring_statistic_excludes_origin():
    # weight inside |beta| <= r_min must not contribute
    rho = np.zeros((8, 8), dtype=complex)
    rho[0, 0] = 1.0
    q = q_function(rho, GRID)
    r = ring_statistic(q, GRID, r_min=0.52)
    # vacuum has most weight near the origin; what remains is isotropic up
    # to grid-boundary rounding
    assert r > 0.98


def test_grid_validation():
    with pytest.raises(ValueError):
        QGrid(1.0, -1.0, -1.0, 1.0, 11)
    with pytest.raises(ValueError):
        QGrid(-1.0, 1.0, -1.0, 1.0, 1)
    with pytest.raises(ValueError):
        q_function(np.eye(4, dtype=complex) / 4, QGrid(-1, 1, -1, 1, 5))[0]
        ring_statistic(np.zeros((3, 3)), QGrid(-1, 1, -1, 1, 5))
