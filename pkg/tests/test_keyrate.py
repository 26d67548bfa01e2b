import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ipa_cvqkd.channel import SystemParams, transmissivity
from ipa_cvqkd.errors import DomainError, NonphysicalParameterError
from ipa_cvqkd.keyrate import (
    covariance_matrix,
    finite_size_penalty,
    g_function,
    holevo_bound,
    mutual_information,
    noise_decomposition,
    secret_key_rate,
    symplectic_spectrum,
)

import oracles


def test_noise_decomposition_examples():
    n = noise_decomposition(1.0, 0.0, 1.0, 0.0)
    assert (n.chi_line, n.chi_hom, n.chi_tot) == (0.0, 0.0, 0.0)
    n = noise_decomposition(0.5, 0.1, 0.5, 0.01)
    assert n.chi_line == pytest.approx(1.1)
    assert n.chi_hom == pytest.approx(1.02)
    assert n.chi_tot == pytest.approx(3.14)
    n = noise_decomposition(1.0, 0.0, 0.5, 0.0)
    assert (n.chi_hom, n.chi_tot) == pytest.approx((1.0, 1.0))


@pytest.mark.parametrize("t, eta", [(0.0, 0.5), (0.5, 0.0)])
def test_noise_decomposition_domain(t, eta):
    with pytest.raises(DomainError):
        noise_decomposition(t, 0.0, eta, 0.0)


def test_mutual_information_examples():
    assert mutual_information(4, 1, 0, 1, 0) == pytest.approx(math.log2(5), rel=1e-15)
    assert mutual_information(0, 0.3, 0.1, 0.5, 0.01) == 0.0
    assert mutual_information(4, 0.5, 0.1, 0.5, 0.01) == pytest.approx(math.log2(8.14 / 4.14), rel=1e-14)
    assert mutual_information(4, 0.5, 0.1, 0.5, 0.01) == pytest.approx(0.9754, abs=5e-5)


def test_g_function_examples():
    assert g_function(0.0) == 0.0
    assert g_function(1.0) == pytest.approx(2.0, rel=1e-15)
    assert g_function(0.5) == pytest.approx(1.37744375108173, rel=1e-13)
    with pytest.raises(DomainError):
        g_function(-1e-3)


def test_g_function_against_arbitrary_precision():
    xs = np.concatenate([[0.0, 1e-12, 1e-9, 3e-7, 4.99e-7, 5e-7, 1e-6, 1e-3],
                         np.linspace(0.01, 100, 400)])
    got = g_function(xs)
    for x, g in zip(xs, got):
        ref = float(oracles.g_entropy(x))
        assert g == pytest.approx(ref, rel=1e-12, abs=1e-15), x


@given(st.floats(0, 1e3), st.floats(1e-9, 10))
def test_g_function_increasing(x, dx):
    assert g_function(x + dx) >= g_function(x)


def test_spectrum_perfect_system():
    s = symplectic_spectrum(5.0, 1.0, 0.0, 0.0)
    assert (s.a_term, s.b_term, s.c_term, s.d_term) == pytest.approx((2.0, 1.0, 2.0, 1.0), abs=1e-14)
    assert s.lambdas == pytest.approx((1, 1, 1, 1, 1), abs=1e-12)
    assert s.lambdas[4] == 1.0


def test_spectrum_noisy_point_against_mpmath():
    s = symplectic_spectrum(5.0, 0.5, 1.1, 1.02)
    a, b, c, d, lam = oracles.spectrum(5.0, 0.5, 1.1, 1.02)
    assert (s.a_term, s.b_term, s.c_term, s.d_term) == pytest.approx(
        tuple(float(v) for v in (a, b, c, d)), rel=1e-13)
    assert s.lambdas == pytest.approx(tuple(float(l) for l in lam), rel=1e-12)
    assert all(l >= 1 for l in s.lambdas)


def _williamson(gamma):
    omega = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.abs(np.linalg.eigvals(1j * omega @ gamma))
    return np.sort(ev)[::2][::-1]


@pytest.mark.parametrize("v, t, eps", [(5.0, 0.5, 0.1), (11.0, 0.1, 0.2), (2.0, 0.9, 0.0), (5.0, 1.0, 0.0)])
def test_ab_eigenvalues_match_matrix_route(v, t, eps):
    cl = 1 / t - 1 + eps
    s = symplectic_spectrum(v, t, cl, 1.0)
    np.testing.assert_allclose(sorted(s.lambdas[:2], reverse=True),
                               _williamson(covariance_matrix(v, t, cl)), rtol=1e-9)


def test_a_b_discriminants_nonnegative_on_grid():
    for t, eps, eta, vel, va in itertools.product(
        [0.1, 0.5, 1.0], [0.0, 0.1, 0.2], [0.3, 1.0], [0.0, 0.05], [1.0, 10.0]
    ):
        n = noise_decomposition(t, eps, eta, vel)
        s = symplectic_spectrum(va + 1, t, n.chi_line, n.chi_hom)
        assert s.a_term**2 >= 4 * s.b_term * (1 - 1e-12)
        assert s.c_term**2 >= 4 * s.d_term * (1 - 1e-12)


def test_spectrum_rejects_superunit_transmissivity():
    with pytest.raises(NonphysicalParameterError):
        symplectic_spectrum(5.0, 1.2, -0.1, 1.0)


def test_holevo_examples():
    assert holevo_bound(4, 1.0, 0.0, 1.0, 0.0) == pytest.approx(0.0, abs=1e-9)
    grid = itertools.product([0.1, 0.4, 0.7, 1.0], [0.0, 0.05, 0.2], [0.3, 0.6, 1.0], [0.0, 0.05], [1.0, 4.0, 10.0])
    for t, eps, eta, vel, va in grid:
        assert holevo_bound(va, t, eps, eta, vel) >= -1e-12


def test_holevo_increases_with_excess_noise():
    for t, eta in itertools.product([0.1, 0.5, 0.9], [0.5, 1.0]):
        values = [holevo_bound(4.0, t, e, eta, 0.01) for e in np.linspace(0, 0.3, 13)]
        assert np.all(np.diff(values) > 0)


def test_finite_size_penalty_examples():
    assert finite_size_penalty(10**12, 1e-10, 1e-10) < 1e-4
    assert finite_size_penalty(10**8, 1e-10, 1e-10) == pytest.approx(4.035196287209059e-3, rel=1e-12)
    assert finite_size_penalty(5 * 10**8, 1e-10, 1e-10) == pytest.approx(1.8044303949931782e-3, rel=1e-12)
    with pytest.raises(DomainError):
        finite_size_penalty(0, 1e-10, 1e-10)
    with pytest.raises(DomainError):
        finite_size_penalty(100, 1.0, 1e-10)


def test_key_rate_perfect_asymptotic():
    p = SystemParams(v_a=4, eta=1.0, v_el=0.0, beta=1.0, n_total=10**30, m_est=1,
                     eps_bar=0.5, eps_pa=0.5)
    r = secret_key_rate(p, 1.0, 0.0, 1.0, 0.0)
    assert r.delta_n < 1e-13
    assert r.k == pytest.approx(math.log2(5), abs=1e-9)


def test_key_rate_clamps():
    r = secret_key_rate(SystemParams(), 1e-3, 0.2, 1e-3, 0.3)
    assert r.k_raw < 0 and r.k == 0.0


def test_key_rate_positive_at_ten_km():
    t = transmissivity(10.0)
    r = secret_key_rate(SystemParams(), t, 0.05)
    ref = oracles.key_rate(4, t, 0.05, t, 0.05, 0.5, 0.01, 0.95, 10**9, 5 * 10**8, 1e-10, 1e-10)
    assert r.k > 0
    assert r.k_raw == pytest.approx(float(ref[3]), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0.05, 1.0), eps=st.floats(0.0, 0.2), step=st.floats(1e-3, 0.05))
def test_key_rate_non_increasing_in_eps_max(t, eps, step):
    p = SystemParams()
    k1 = secret_key_rate(p, t, eps, t, eps).k
    k2 = secret_key_rate(p, t, eps, t, eps + step).k
    assert k2 <= k1


def test_key_rate_non_increasing_in_distance():
    p = SystemParams()
    ks = [secret_key_rate(p, transmissivity(L), 0.05).k for L in np.linspace(0, 200, 101)]
    assert np.all(np.diff(ks) <= 0)


@pytest.mark.parametrize("v_a", [1.0, 4.0, 10.0, 40.0])
@pytest.mark.parametrize("eta,v_el", [(0.6, 0.0), (0.9, 0.05), (1.0, 0.0)])
def test_spectrum_degenerate_point_stays_physical(v_a, eta, v_el):
    noise = noise_decomposition(1.0, 0.0, eta, v_el)
    sym = symplectic_spectrum(v_a + 1, 1.0, noise.chi_line, noise.chi_hom)
    assert min(sym.lambdas) >= 1.0 - 1e-12
    assert sym.lambdas[1] == pytest.approx(1.0, abs=1e-12)
