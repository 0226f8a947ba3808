import numpy as np
import pytest
from scipy.integrate import quad

from mqcsim import averaging


def test_orientation_average_constant():
    assert abs(averaging.orientation_average(lambda n: 1.0) - 1.0) < 1e-14


def test_orientation_second_moments():
    for i in range(3):
        for j in range(3):
            val = averaging.orientation_average(lambda n, i=i, j=j: n[i] * n[j])
            target = (1.0 / 3.0) if i == j else 0.0
            assert abs(val - target) < 1e-12


def test_orientation_fourth_moments():
    eye = np.eye(3)
    for idx in ((0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (2, 2, 2, 2), (0, 1, 2, 0)):
        i, j, k, l = idx
        val = averaging.orientation_average(
            lambda n: n[i] * n[j] * n[k] * n[l])
        target = (eye[i, j] * eye[k, l] + eye[i, k] * eye[j, l]
                  + eye[i, l] * eye[j, k]) / 15.0
        assert abs(val - target) < 1e-12


def test_orientation_guard_fires_for_underresolved_integrand():
    quad_small = averaging.SphereQuadrature(2, 4)
    with pytest.raises(averaging.QuadratureError):
        averaging.orientation_average(lambda n: n[2] ** 40, quad=quad_small)


def test_sphere_weights_normalized():
    q = averaging.SphereQuadrature(5, 7)
    assert abs(q.weights.sum() - 1.0) < 1e-14
    assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0, atol=1e-14)


def test_maxwell_boltzmann_sigma_reference_value():
    val = averaging.maxwell_boltzmann_sigma(320.0, 1.443e-25, 790e-9)
    assert abs(val / (2 * np.pi) - 0.221e9) / 0.221e9 < 0.005


def test_maxwell_boltzmann_sigma_limits():
    tiny = averaging.maxwell_boltzmann_sigma(1e-12, 1.443e-25, 790e-9)
    assert tiny < 1e3
    a = averaging.maxwell_boltzmann_sigma(100.0, 1.443e-25, 790e-9)
    b = averaging.maxwell_boltzmann_sigma(400.0, 1.443e-25, 790e-9)
    assert abs(b / a - 2.0) < 1e-12
    with pytest.raises(ValueError):
        averaging.maxwell_boltzmann_sigma(-1.0, 1.0, 1.0)


def test_doppler_weights_sum_to_one():
    model = averaging.DopplerModel(dbar=2.0, order=48)
    _, w = model.nodes_weights
    assert abs(w.sum() - 1.0) < 1e-13


def test_voigt_convolve_constant():
    conv = averaging.voigt_convolve(lambda u: np.full_like(u, 2.5), 1, 3.0)
    assert np.allclose(conv(np.array([0.0, 1.0, -4.0])), 2.5, atol=1e-12)


def test_voigt_convolve_collapse_matches_explicit_double_integral():
    dbar = 1.7
    line = lambda u: 1.0 / (3.0 * dbar + 1j * u)
    conv = averaging.voigt_convolve(line, 2, dbar, order=48)
    x, w = np.polynomial.hermite.hermgauss(48)
    w = w / np.sqrt(np.pi)
    u = np.array([0.0, 0.8 * dbar, -2.2 * dbar])
    explicit = np.zeros(u.shape, dtype=complex)
    for xi_, wi in zip(x, w):
        for xj, wj in zip(x, w):
            explicit += wi * wj * line(u - np.sqrt(2) * dbar * (xi_ + xj))
    assert np.max(np.abs(conv(u) - explicit)) < 1e-10 * np.max(np.abs(explicit))


def test_voigt_convolve_lorentzian_peak_identity():
    """Peak of a Gaussian-smeared Lorentzian against the closed identity and
    an adaptive-quadrature reference."""
    from mqcsim.spectra import voigt_peak
    dbar = 1.0
    a = 3.0 * dbar
    line = lambda u: (a / np.pi) / (a ** 2 + u ** 2)
    conv = averaging.voigt_convolve(line, 1, dbar, order=64)
    peak = float(np.real(conv(np.array([0.0]))[0]))
    identity = voigt_peak(a / dbar) / (np.pi * a)
    assert abs(peak - identity) / identity < 1e-9
    ref, _ = quad(lambda s: np.exp(-s**2 / (2 * dbar**2)) / np.sqrt(2 * np.pi) / dbar
                  * (a / np.pi) / (a**2 + s**2), -np.inf, np.inf, epsabs=1e-14)
    assert abs(peak - ref) / ref < 1e-9


def test_voigt_convolve_guard_fires_for_narrow_core():
    line = lambda u: 1.0 / (1e-3 + 1j * u)
    with pytest.raises(averaging.QuadratureError):
        averaging.voigt_convolve(line, 1, 1.0, order=64)


def test_voigt_convolve_reduces_to_lineshape_at_zero_width():
    line = lambda u: np.exp(-0.5 * (u / 3.0) ** 2) + 0j
    u = np.linspace(-4, 4, 17)
    exact = line(u)
    for dbar in (0.0, 0.02, 0.01):
        conv = averaging.voigt_convolve(line, 1, dbar)
        diff = np.max(np.abs(conv(u) - exact))
        assert diff <= 0.2 * dbar + 1e-14


def test_gaussian_pole_average_against_quadrature(rng):
    for j in (1, 2, 3):
        a = rng.uniform(0.5, 2.0)
        sigma = rng.uniform(0.5, 3.0)
        u = rng.uniform(-3.0, 3.0)
        val = averaging.gaussian_pole_average(np.array([u]), a, j, sigma)[0]
        def integrand_re(s):
            return np.real(np.exp(-s**2 / (2 * sigma**2)) / (np.sqrt(2 * np.pi) * sigma)
                           / (a + 1j * (u - s)) ** j)
        def integrand_im(s):
            return np.imag(np.exp(-s**2 / (2 * sigma**2)) / (np.sqrt(2 * np.pi) * sigma)
                           / (a + 1j * (u - s)) ** j)
        ref_re, _ = quad(integrand_re, -np.inf, np.inf, epsabs=1e-13)
        ref_im, _ = quad(integrand_im, -np.inf, np.inf, epsabs=1e-13)
        assert abs(val - (ref_re + 1j * ref_im)) < 1e-10


def test_gaussian_pole_average_zero_width_and_errors():
    u = np.array([0.4])
    assert np.allclose(averaging.gaussian_pole_average(u, 1.5, 2, 0.0),
                       1.0 / (1.5 + 1j * 0.4) ** 2)
    with pytest.raises(ValueError):
        averaging.gaussian_pole_average(u, -1.0, 1, 1.0)
    with pytest.raises(ValueError):
        averaging.gaussian_pole_average(u, 1.0, 4, 1.0)


def test_quadratures_deterministic():
    q1 = averaging.SphereQuadrature(9, 11)
    q2 = averaging.SphereQuadrature(9, 11)
    assert q1.nodes.tobytes() == q2.nodes.tobytes()
    assert q1.weights.tobytes() == q2.weights.tobytes()
    m1 = averaging.DopplerModel(1.3, 32).nodes_weights
    m2 = averaging.DopplerModel(1.3, 32).nodes_weights
    assert m1[0].tobytes() == m2[0].tobytes() and m1[1].tobytes() == m2[1].tobytes()
