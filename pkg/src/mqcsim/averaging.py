"""Configuration averages: isotropic orientation quadrature, Maxwell-Boltzmann
Doppler statistics, and the Lorentzian-times-Gaussian convolution machinery.

Everything is deterministic: fixed node tables, fixed summation order, no
sampling.  Quadratures carry convergence guards that re-evaluate at doubled
order and fail loudly instead of returning silently wrong numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.constants as const
from scipy.special import wofz

_SQRT_PI = np.sqrt(np.pi)
_SQRT_HALF_PI = np.sqrt(0.5 * np.pi)


class QuadratureError(RuntimeError):
    """A convergence guard tripped: the requested order is insufficient."""


# ---------------------------------------------------------------------------
# orientation average
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on the unit sphere: Gauss-Legendre in cos(theta) times a
    uniform trapezoid in azimuth; weights are normalized to sum to one."""

    n_polar: int = 16
    n_azimuth: int = 32
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_polar < 1 or self.n_azimuth < 1:
            raise ValueError("quadrature orders must be positive")
        u, wu = np.polynomial.legendre.leggauss(self.n_polar)
        phi = 2.0 * np.pi * np.arange(self.n_azimuth) / self.n_azimuth
        st = np.sqrt(1.0 - u**2)
        nodes = np.empty((self.n_polar * self.n_azimuth, 3))
        weights = np.empty(self.n_polar * self.n_azimuth)
        k = 0
        for i in range(self.n_polar):
            for j in range(self.n_azimuth):
                nodes[k] = (st[i] * np.cos(phi[j]), st[i] * np.sin(phi[j]), u[i])
                weights[k] = wu[i] / (2.0 * self.n_azimuth)
                k += 1
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def doubled(self) -> "SphereQuadrature":
        return SphereQuadrature(2 * self.n_polar, 2 * self.n_azimuth)

    def average(self, fn) -> complex:
        """Plain quadrature sum of fn(nhat) in ascending node order."""
        acc = 0.0 + 0.0j
        for n, w in zip(self.nodes, self.weights):
            acc += w * fn(n)
        return acc


def orientation_average(fn, quad: SphereQuadrature | None = None,
                        check: bool = True, rtol: float = 1e-9) -> complex:
    """Isotropic average of fn over the unit sphere with a doubling guard.

    Convergence is judged against the integrand's own magnitude, so exact
    cancellations (averages that vanish) do not trip the guard.
    """
    quad = quad or SphereQuadrature()
    samples = np.array([fn(n) for n in quad.nodes])
    val = complex(np.dot(quad.weights, samples))
    if check:
        ref = quad.doubled().average(fn)
        floor = 1e-13 * float(np.max(np.abs(samples))) if len(samples) else 0.0
        if abs(ref - val) > rtol * max(abs(val), abs(ref)) + floor:
            raise QuadratureError(
                f"orientation average not converged: {val} vs doubled {ref}")
    return val


def exchange_moment_matrix(sym_component_fn, quad: SphereQuadrature | None = None,
                           check: bool = True) -> np.ndarray:
    """Isotropic second moments <t_s(nhat) conj(t_s'(nhat))> of a tensor field.

    sym_component_fn maps a unit vector to the 6 symmetric components of the
    stripped exchange amplitude; the returned 6x6 matrix contracts the pair
    of exchange insertions in a double-scattering term.
    """
    quad = quad or SphereQuadrature()

    def matrix_for(q: SphereQuadrature) -> np.ndarray:
        comps = np.stack([sym_component_fn(n) for n in q.nodes])
        return np.einsum("k,ks,kt->st", q.weights, comps, np.conj(comps))

    m = matrix_for(quad)
    if check:
        ref = matrix_for(quad.doubled())
        scale = max(np.max(np.abs(m)), np.max(np.abs(ref)))
        if scale > 0 and np.max(np.abs(ref - m)) > 1e-9 * scale:
            raise QuadratureError("exchange moment matrix not converged")
    return m


# ---------------------------------------------------------------------------
# Doppler statistics
# ---------------------------------------------------------------------------

def maxwell_boltzmann_sigma(temperature: float, mass: float, wavelength: float) -> float:
    """r.m.s. Doppler shift k_L sqrt(k_B T / M) in angular-frequency units."""
    if temperature <= 0 or mass <= 0 or wavelength <= 0:
        raise ValueError("temperature, mass, and wavelength must be positive")
    return (2.0 * np.pi / wavelength) * np.sqrt(const.k * temperature / mass)


@dataclass(frozen=True)
class DopplerModel:
    """Gaussian Doppler-shift distribution and its Gauss-Hermite node table."""

    dbar: float
    order: int = 64

    def __post_init__(self):
        if self.dbar < 0:
            raise ValueError("dbar must be nonnegative")
        if self.order < 1:
            raise ValueError("order must be positive")

    @property
    def nodes_weights(self):
        """Shift nodes and normalized weights; weights sum to one (1e-13)."""
        x, w = np.polynomial.hermite.hermgauss(self.order)
        w = w / _SQRT_PI
        if abs(w.sum() - 1.0) > 1e-13:
            raise QuadratureError("Hermite weights failed to normalize")
        return np.sqrt(2.0) * self.dbar * x, w


def voigt_convolve(lineshape, kappa: int, dbar: float, order: int = 64,
                   check: bool = True):
    """Gaussian average of a lineshape over the summed Doppler shift.

    For kappa = 1 this is a single width-dbar Gaussian; for kappa = 2 the
    two-atom integral collapses to one Gaussian of width sqrt(2) dbar because
    the integrand depends only on the shift sum.  Returns a callable of the
    detuning (scalar or array); the doubling guard raises QuadratureError for
    integrands the requested order cannot resolve.
    """
    if kappa not in (1, 2):
        raise ValueError("kappa must be 1 or 2")
    if dbar == 0:
        return lambda u: lineshape(np.asarray(u, dtype=float))
    sigma = np.sqrt(float(kappa)) * dbar

    def convolved(u, _order=order):
        u = np.asarray(u, dtype=float)
        x, w = np.polynomial.hermite.hermgauss(_order)
        shifts = np.sqrt(2.0) * sigma * x
        vals = np.stack([lineshape(u - s) for s in shifts])
        return np.einsum("k,k...->...", w / _SQRT_PI, vals)

    if check:
        probe = np.array([0.0])
        a, b = convolved(probe), convolved(probe, 2 * order)
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
        if scale > 0 and np.max(np.abs(a - b)) > 1e-8 * scale:
            raise QuadratureError(
                "Doppler quadrature not converged at this order; the lineshape "
                "varies faster than the node spacing resolves")
    return convolved


# ---------------------------------------------------------------------------
# exact Gaussian averages of resolvent pole terms
# ---------------------------------------------------------------------------

def gaussian_pole_average(u, a: float, j: int, sigma: float):
    """Exact Gaussian average of (a + i(u - s))^(-j) over s ~ N(0, sigma^2).

    These are the Voigt-type kernels the demodulated spectra are built from:
    j = 1 is the complex Voigt profile; j = 2, 3 are its derivatives with
    respect to the Lorentzian half-width a.  Evaluated with the scaled
    complementary error function (Faddeeva w), stable for all detunings.
    """
    u = np.asarray(u, dtype=float)
    if a <= 0:
        raise ValueError("the Lorentzian half-width a must be positive")
    if sigma == 0:
        return 1.0 / (a + 1j * u) ** j
    zeta = (-u + 1j * a) / (np.sqrt(2.0) * sigma)
    w = wofz(zeta)
    if j == 1:
        return _SQRT_HALF_PI / sigma * w
    wp = -2.0 * zeta * w + 2j / _SQRT_PI
    if j == 2:
        return -1j * _SQRT_HALF_PI / (np.sqrt(2.0) * sigma**2) * wp
    if j == 3:
        wpp = (4.0 * zeta**2 - 2.0) * w - 4j * zeta / _SQRT_PI
        return -_SQRT_HALF_PI / (4.0 * sigma**3) * wpp
    raise ValueError(f"pole order {j} not supported (composition needs at most 3)")
