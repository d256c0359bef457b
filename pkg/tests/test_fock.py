import math

import numpy as np
import pytest

from dcemirror.fock import (
    CAVITY,
    MIRROR,
    annihilation_matrix,
    coherent_state,
    coherent_tail,
    identity_matrix,
    number_matrix,
    partial_trace_mirror,
    tensor_product,
    vacuum_coherent_density,
)
from dcemirror.model import CutoffError, FockCutoffs


def coherent_series_oracle(beta, n_terms=120):
    # log-space evaluation of the coherent-state series, independent of the
    # implementation's recursion
    r, phi = abs(beta), np.angle(complex(beta))
    amps = [
        math.exp(-r * r / 2 + n * math.log(r) - 0.5 * math.lgamma(n + 1)) * np.exp(1j * n * phi)
        if r > 0 else (1.0 + 0j if n == 0 else 0.0j)
        for n in range(n_terms)
    ]
    return np.array(amps)


def test_annihilation_cutoff1():
    a = annihilation_matrix(1).mat
    expected = np.zeros((2, 2))
    expected[0, 1] = 1.0
    assert np.array_equal(a, expected)


def test_annihilation_cutoff2_sqrt2():
    a = annihilation_matrix(2).mat
    assert a[1, 2] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert np.count_nonzero(a) == 2


def test_number_operator_from_ladder():
    a = annihilation_matrix(2).mat
    n = a.conj().T @ a
    assert np.allclose(np.diag(n), [0, 1, 2], atol=1e-14)
    assert np.allclose(n - np.diag(np.diag(n)), 0.0)


def test_annihilation_rejects_degenerate_space():
    with pytest.raises(ValueError):
        annihilation_matrix(0)


def test_commutator_identity_except_top_level():
    for cutoff in (1, 3, 10):
        a = annihilation_matrix(cutoff).mat
        comm = a @ a.conj().T - a.conj().T @ a
        off = comm - np.diag(np.diag(comm))
        assert np.max(np.abs(off)) == 0.0
        diag = np.diag(comm).real
        assert np.allclose(diag[:-1], 1.0, atol=4e-15)
        assert diag[-1] == pytest.approx(-cutoff, abs=4e-15)


def test_coherent_vacuum():
    st = coherent_state(0.0, 5)
    assert st.amplitudes[0] == 1.0
    assert np.all(st.amplitudes[1:] == 0.0)


def test_coherent_beta1_against_series():
    st = coherent_state(1.0, 20)
    oracle = coherent_series_oracle(1.0)[:21]
    oracle /= np.linalg.norm(oracle)
    assert st.amplitudes[0] == pytest.approx(0.60653066, abs=1e-7)
    assert np.allclose(st.amplitudes, oracle, atol=1e-12)


def test_coherent_beta2_poisson_mean():
    st = coherent_state(2.0, 20)
    n = np.arange(21)
    mean = float(np.sum(n * np.abs(st.amplitudes) ** 2))
    # summation oracle: Poisson mean |beta|^2
    oracle = coherent_series_oracle(2.0)
    oracle_mean = float(np.sum(np.arange(oracle.size) * np.abs(oracle) ** 2))
    assert oracle_mean == pytest.approx(4.0, abs=1e-10)
    assert mean == pytest.approx(4.0, abs=1e-6)


def test_coherent_norm_after_truncation():
    st = coherent_state(1.5 + 0.5j, 25)
    assert abs(np.linalg.norm(st.amplitudes) ** 2 - 1.0) <= 1e-10


def test_coherent_insufficient_cutoff():
    with pytest.raises(CutoffError):
        coherent_state(4.0, 10)
    assert coherent_tail(4.0, 10) > 1e-8


def test_coherent_approximate_eigenstate():
    beta = 1.2 - 0.7j
    cutoff = 30
    assert coherent_tail(beta, cutoff) < 1e-8
    st = coherent_state(beta, cutoff)
    a = annihilation_matrix(cutoff).mat
    residual = a @ st.amplitudes - beta * st.amplitudes
    assert np.linalg.norm(residual) < 1e-4


def test_tensor_identity():
    eye = tensor_product(identity_matrix(2, CAVITY), identity_matrix(3, MIRROR))
    assert np.array_equal(eye.mat, np.eye(12))


def test_tensor_number_on_fock_state():
    n_c = number_matrix(3, CAVITY)
    op = tensor_product(n_c, identity_matrix(2, MIRROR))
    # |2>_cavity (x) |0>_mirror lives at flat index 2*3+0
    vec = np.zeros(12)
    vec[6] = 1.0
    assert np.allclose(op.mat @ vec, 2.0 * vec)


def test_tensor_ordering_mismatch():
    with pytest.raises(ValueError):
        tensor_product(identity_matrix(2, MIRROR), identity_matrix(2, MIRROR))


def test_tensor_bilinearity():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    from dcemirror.fock import ModeOperator

    lhs = tensor_product(ModeOperator(x + y, CAVITY), ModeOperator(z, MIRROR)).mat
    rhs = (
        tensor_product(ModeOperator(x, CAVITY), ModeOperator(z, MIRROR)).mat
        + tensor_product(ModeOperator(y, CAVITY), ModeOperator(z, MIRROR)).mat
    )
    assert np.allclose(lhs, rhs, atol=1e-14)


def _random_density(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def test_partial_trace_product_state():
    rng = np.random.default_rng(11)
    cut = FockCutoffs(3, 4)
    rho_c = _random_density(rng, cut.dim_cavity)
    rho_m = _random_density(rng, cut.dim_mirror)
    rho = np.kron(rho_c, rho_m)
    assert np.allclose(partial_trace_mirror(rho, cut), rho_m, atol=1e-12)


def test_partial_trace_maximally_mixed():
    cut = FockCutoffs(2, 3)
    rho = np.eye(cut.dim) / cut.dim
    red = partial_trace_mirror(rho, cut)
    assert np.allclose(red, np.eye(cut.dim_mirror) / cut.dim_mirror, atol=1e-14)


def test_partial_trace_preserves_trace_random():
    rng = np.random.default_rng(5)
    cut = FockCutoffs(4, 5)
    for _ in range(10):
        rho = _random_density(rng, cut.dim)
        red = partial_trace_mirror(rho, cut)
        assert abs(np.trace(red) - np.trace(rho)) <= 1e-10


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace_mirror(np.eye(7), FockCutoffs(2, 3))


def test_partial_trace_inverts_embedding():
    rng = np.random.default_rng(9)
    cut = FockCutoffs(3, 6)
    rho_m = _random_density(rng, cut.dim_mirror)
    rho_c = _random_density(rng, cut.dim_cavity)
    embedded = np.kron(rho_c, rho_m)
    assert np.allclose(partial_trace_mirror(embedded, cut), rho_m, atol=1e-13)


def test_vacuum_coherent_density_is_pure_and_normalized():
    cut = FockCutoffs(3, 25)
    rho = vacuum_coherent_density(2.0, cut)
    assert abs(np.trace(rho) - 1.0) <= 1e-12
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-10)
