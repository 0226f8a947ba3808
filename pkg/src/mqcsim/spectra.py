"""Demodulated fluorescence spectra of the coupled atom pair.

A demodulation order kappa selects the intensity terms oscillating at kappa
times the pulse-pair modulation frequency; after the position average the
kappa = 1 signal is carried by the (l1, l2) = (1, 0) harmonic (single
scattering plus a photon-exchange correction) and the kappa = 2 signal
purely by (1, 1), which exists only through photon exchange.  The spectrum
is the Gaussian Doppler average of the harmonic coefficient evaluated at the
interpulse Laplace point i(omega - kappa omega0 - shift); for kappa = 2 the
two shifts enter only as a sum, collapsing to one Gaussian of width
sqrt(2) dbar.

Spectra are returned in units f^2/gamma^2 with detunings in units of gamma;
peak amplitudes use f^2/(sqrt(2 pi) gamma^2).  The detection constant f is
never evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erfcx

from . import _rational as rational
from . import averaging, scattering
from .hilbert import PERMUTATION_PREFACTOR, build_dipole_operators
from .liouville import PhysicalParams, stripped_tensor
from .pulses import kick_unitary

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass
class SpectrumResult:
    """One demodulated spectrum on a detuning grid (units of gamma)."""

    detuning: np.ndarray
    values: np.ndarray
    kappa: int
    khat: str
    channel: str
    theta: float
    params: dict
    components: dict = field(default_factory=dict)


@dataclass
class PeakScan:
    """Peak amplitudes versus pulse area, plus their half-angle cosine series."""

    thetas: np.ndarray
    peaks: dict
    coefficients: dict = field(default_factory=dict)


SIGNAL_NAMES = ("P_1_x_par", "P_1_y_par", "P_2_x_par", "P_2_y_par", "P_2_perp")
_SIGNAL_SPECS = {
    "P_1_x_par": (1, "par", "x"),
    "P_1_y_par": (1, "par", "y"),
    "P_2_x_par": (2, "par", "x"),
    "P_2_y_par": (2, "par", "y"),
    "P_2_perp": (2, "perp", "x"),
}


def voigt_peak(x) -> np.ndarray | float:
    """Peak factor sqrt(pi/2) x exp(x^2/2) erfc(x/sqrt 2) of a Gaussian-smeared
    unit Lorentzian; evaluated through the scaled complementary error function,
    finite up to x ~ 1e6 and strictly increasing from 0 to 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("voigt_peak is defined for nonnegative arguments")
    out = np.sqrt(0.5 * np.pi) * x * erfcx(x / np.sqrt(2.0))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# harmonic-coefficient preparation shared by spectra, peaks, and scans
# ---------------------------------------------------------------------------

def _moment_batch(xibar: float, tensor_mode: str, sphere_quad) -> tuple:
    """Exchange-tensor pair batch contracted by isotropic second moments.

    The 6x6 moment matrix is a Gram matrix; its eigendecomposition turns the
    36 basis pairs into at most 6 weighted pairs exactly (the composition is
    bilinear in the two insertion tensors).
    """
    def comps(nhat):
        return scattering.sym_components(stripped_tensor(xibar, nhat, tensor_mode))
    moments = averaging.exchange_moment_matrix(comps, sphere_quad)
    mu, vec = np.linalg.eigh(moments)
    keep = np.abs(mu) > 1e-14 * np.abs(mu).max()
    mu, vec = mu[keep], vec[:, keep]
    tminus = np.einsum("sk,sij->kij", vec, scattering.SYM_BASIS).astype(complex)
    tplus = np.einsum("sk,sij->kij", np.conj(vec), scattering.SYM_BASIS).astype(complex)
    return tminus, tplus, mu.astype(complex)


def _kappa_plan(kappa: int, include_double: bool) -> tuple:
    """Surviving (l1, l2) harmonics and composition orders for one kappa.

    The kappa = 1 signal receives the exchange correction through both
    (1, 0) and (0, 1): either atom's kick phases can carry the demodulated
    harmonic while atom 1 emits.  Both average over a single width-dbar
    Gaussian, so they share the Doppler kernel.
    """
    if kappa == 1:
        return ((1, 0), (0, 1)), ((0, 2) if include_double else (0,))
    if kappa == 2:
        return ((1, 1),), (2,)
    raise ValueError("kappa must be 1 or 2")


def demodulated_stacks(thetas, kappa: int, channel: str, khat: str, params: PhysicalParams,
                       tensor_mode: str = "far_field", include_double: bool = True,
                       sphere_quad: averaging.SphereQuadrature | None = None) -> dict:
    """Orientation-averaged rational coefficient stacks per composition order.

    Returns {order m: {(s, j): array (len(thetas),)}} in units where
    gamma = 1, summed over the surviving (l1, l2) harmonics (their Doppler
    kernels coincide); normalization is applied by the assemblers below.
    """
    lpairs, orders = _kappa_plan(kappa, include_double)
    cfg = scattering.ChannelConfig.named(channel, khat, float(np.atleast_1d(thetas)[0]))
    tminus, tplus, weights = _moment_batch(params.xibar, tensor_mode,
                                           sphere_quad or averaging.SphereQuadrature())
    stacks = scattering.selected_harmonic_stacks(
        thetas, cfg.eps1, cfg.eps2, cfg.khat, list(lpairs), tminus, tplus, weights,
        include_orders=orders)
    merged: dict = {m: {} for m in orders}
    for lp in lpairs:
        for m, stack in stacks[lp].items():
            for key, val in stack.items():
                rational.add_into(merged[m], key, val)
    return merged


def _doppler_kernel(stack: dict, u: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian Doppler average of a rational stack on a detuning grid."""
    out = np.zeros(u.shape + np.shape(next(iter(stack.values()))), dtype=complex)
    for (s, j), coeff in stack.items():
        if sigma == 0:
            kern = 1.0 / (0.5 * s + 1j * u) ** j
        else:
            kern = averaging.gaussian_pole_average(u, 0.5 * s, j, sigma)
        out += kern.reshape(u.shape + (1,) * np.ndim(coeff)) * coeff
    return out


def spectrum(kappa: int, channel: str, khat: str, theta: float, params: PhysicalParams,
             detuning=None, tensor_mode: str = "far_field", include_double: bool = True,
             sphere_quad: averaging.SphereQuadrature | None = None,
             npoints: int = 801, span: float = 8.0) -> SpectrumResult:
    """Demodulated spectrum S(omega; kappa) in units f^2/gamma^2.

    detuning is (omega - kappa*omega0)/gamma; the default grid spans
    +-span*sqrt(kappa)*dbar.  For kappa = 1 the result is the sum of the
    single-scattering term and (optionally) the photon-exchange correction;
    kappa = 2 exists only through photon exchange.
    """
    dbg = params.dbar_over_gamma
    if detuning is None:
        half = span * np.sqrt(kappa) * (dbg if dbg > 0 else 10.0)
        detuning = np.linspace(-half, half, npoints)
    u = np.asarray(detuning, dtype=float)
    if u.size == 0:
        raise ValueError("empty detuning grid")
    stacks = demodulated_stacks([theta], kappa, channel, khat, params,
                                tensor_mode, include_double, sphere_quad)
    sigma = np.sqrt(kappa) * dbg
    pref = PERMUTATION_PREFACTOR / _SQRT_2PI
    components = {}
    total = np.zeros(u.shape, dtype=complex)
    for m, stack in stacks.items():
        if not stack:
            continue
        part = pref * _doppler_kernel(stack, u, sigma)[..., 0]
        components["single" if m == 0 else "double"] = part
        total = total + part
    return SpectrumResult(detuning=u, values=total, kappa=kappa, khat=khat,
                          channel=channel, theta=theta,
                          params={"dbar_over_gamma": dbg, "xibar": params.xibar,
                                  "tensor_mode": tensor_mode},
                          components=components)


def peak_amplitude(kappa: int, channel: str, khat: str, theta, params: PhysicalParams,
                   tensor_mode: str = "far_field", include_double: bool = True,
                   sphere_quad: averaging.SphereQuadrature | None = None) -> np.ndarray | float:
    """Re S at resonance, in units f^2/(sqrt(2 pi) gamma^2); theta may be an array."""
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    stacks = demodulated_stacks(thetas, kappa, channel, khat, params,
                                tensor_mode, include_double, sphere_quad)
    sigma = np.sqrt(kappa) * params.dbar_over_gamma
    total = np.zeros(len(thetas), dtype=complex)
    for stack in stacks.values():
        if stack:
            total = total + _doppler_kernel(stack, np.zeros(1), sigma)[0]
    out = PERMUTATION_PREFACTOR * np.real(total)
    return out if np.ndim(theta) else float(out[0])


def peak_scan(thetas, params: PhysicalParams, tensor_mode: str = "far_field",
              sphere_quad: averaging.SphereQuadrature | None = None) -> PeakScan:
    """All five named peak signals on a pulse-area grid."""
    thetas = np.asarray(thetas, dtype=float)
    peaks = {}
    for name, (kappa, channel, khat) in _SIGNAL_SPECS.items():
        peaks[name] = peak_amplitude(kappa, channel, khat, thetas, params,
                                     tensor_mode=tensor_mode, sphere_quad=sphere_quad)
    return PeakScan(thetas=thetas, peaks=peaks)


# ---------------------------------------------------------------------------
# closed-form leading-order peak amplitudes (analytic oracle)
# ---------------------------------------------------------------------------

def analytic_peak_amplitude(kappa: int, channel: str, khat: str, theta,
                            gamma: float, dbar: float, xibar: float) -> np.ndarray | float:
    """Leading-order closed forms of the six peak signals, units
    f^2/(sqrt(2 pi) gamma^2).

    The 1QC parallel x-detection row is the full photon-exchange composite;
    the 1QC parallel y-detection row is the single-scattering Voigt peak
    V(gamma/(2 dbar)) sin^2(theta) (leading order; the exchange correction is
    O(xibar^-2)); perpendicular 1QC vanishes identically.
    """
    th = np.asarray(theta, dtype=float)
    g = gamma / dbar
    v = voigt_peak
    c, s = np.cos(th / 2.0), np.sin(th / 2.0)
    sin2, cos1 = np.sin(th) ** 2, np.cos(th)
    if kappa == 1 and channel == "perp":
        out = np.zeros_like(th)
    elif kappa == 1 and khat == "y":
        out = v(g / 2.0) * sin2
    elif kappa == 1 and khat == "x":
        out = (sin2 / (80.0 * xibar**2)) * (
            3.0 * g**2 * c**3
            - 3.0 * v(g / 2.0) * c * (g**2 + 1.0 - 4.0 * c - cos1)
            + v(1.5 * g) * s**2 * (3.0 * g**2 * c + 2.0 * c - 4.0 * cos1))
    elif kappa == 2 and channel == "par" and khat == "x":
        out = -(3.0 / (320.0 * xibar**2)) * v(g / np.sqrt(2.0)) * sin2**2
    elif kappa == 2 and channel == "par" and khat == "y":
        out = -(51.0 / (640.0 * xibar**2)) * v(g / np.sqrt(2.0)) * sin2**2
    elif kappa == 2 and channel == "perp":
        out = -(3.0 / (320.0 * xibar**2)) * v(g / np.sqrt(2.0)) * s**2 * sin2
    else:
        raise ValueError(f"no closed form for kappa={kappa}, channel={channel}, khat={khat}")
    return out if np.ndim(theta) else float(out)


# ---------------------------------------------------------------------------
# pulse-area series fingerprints
# ---------------------------------------------------------------------------

def harmonic_coefficients(peak_fn, n_max: int = 12, samples: int | None = None,
                          residual_tol: float = 1e-8) -> dict:
    """Half-angle cosine series A_n of a 4-pi-periodic even peak function.

    Projects on cos(n theta / 2) with a trapezoid rule over one full period
    (at least 8 n_max samples, exact for the trigonometric polynomials the
    kick algebra produces) and reports the reconstruction residual.
    """
    n_samples = samples or max(8 * n_max, 64)
    th = 4.0 * np.pi * np.arange(n_samples) / n_samples
    p = np.asarray(peak_fn(th), dtype=float)
    coeffs = {}
    for n in range(n_max + 1):
        basis = np.cos(n * th / 2.0)
        scale = 1.0 / n_samples if n == 0 else 2.0 / n_samples
        coeffs[n] = scale * float(p @ basis)
    recon = sum(a * np.cos(n * th / 2.0) for n, a in coeffs.items())
    norm = max(np.max(np.abs(p)), 1e-300)
    residual = float(np.max(np.abs(p - recon)) / norm)
    if residual > residual_tol:
        raise averaging.QuadratureError(
            f"series truncation residual {residual:.2e} exceeds {residual_tol:.0e}; "
            "increase n_max")
    return {"coefficients": coeffs, "residual": residual}


# ---------------------------------------------------------------------------
# single-configuration (pre-average) spectra
# ---------------------------------------------------------------------------

def single_config_spectrum(delta1: float, delta2: float, xi: float, nhat,
                           kappa: int, channel: str, khat: str, theta: float,
                           detuning, tensor_mode: str = "far_field",
                           include_double: bool = True) -> SpectrumResult:
    """Spectrum for one fixed configuration: no orientation or Doppler average.

    The pulse-harmonic selection rules still apply (they stem from the
    position average, which is always performed); delta1, delta2 are the two
    Doppler shifts in units of gamma and xi the scaled interatomic distance.
    """
    cfg = scattering.ChannelConfig.named(channel, khat, theta)
    lpairs, orders = _kappa_plan(kappa, include_double)
    tm = stripped_tensor(xi, nhat, tensor_mode)[None]
    stacks = scattering.selected_harmonic_stacks(
        [theta], cfg.eps1, cfg.eps2, cfg.khat, list(lpairs), tm, np.conj(tm),
        np.ones(1), include_orders=orders)
    u = np.asarray(detuning, dtype=float)
    pref = PERMUTATION_PREFACTOR / _SQRT_2PI
    components = {}
    total = np.zeros(u.shape, dtype=complex)
    for lp in lpairs:
        shift = lp[0] * delta1 + lp[1] * delta2
        for m, stack in stacks[lp].items():
            if not stack:
                continue
            vals = pref * rational.eval_stack(stack, 1j * (u - shift))[..., 0]
            name = "single" if m == 0 else "double"
            components[name] = components.get(name, 0.0) + vals
            total = total + vals
    return SpectrumResult(detuning=u, values=total, kappa=kappa, khat=khat,
                          channel=channel, theta=theta,
                          params={"delta1": delta1, "delta2": delta2, "xi": xi,
                                  "tensor_mode": tensor_mode},
                          components=components)


# ---------------------------------------------------------------------------
# literal time-domain evolution (single-scattering check)
# ---------------------------------------------------------------------------

def _single_atom_lindblad(rho: np.ndarray) -> np.ndarray:
    """Textbook state-side dissipator of one atom, gamma = 1."""
    d = build_dipole_operators().stack
    pe = np.diag([0.0, 1.0, 1.0, 1.0])
    out = sum(di @ rho @ di.conj().T for di in d)
    return out - 0.5 * (pe @ rho + rho @ pe)


def time_domain_spectrum(channel: str, khat: str, theta: float, delta1: float,
                         detuning, horizon: float = 40.0, dtau: float = 0.004) -> SpectrumResult:
    """Single-scattering spectrum by literal time propagation (gamma = 1).

    Chronological narrative for one atom: kick, interpulse decay integrated
    as an initial-value problem, second kick, fluorescence integrated as a
    Heisenberg-picture quadrature of the detection operator, then the
    demodulation harmonic is extracted from five pulse-phase samples and the
    delay grid is Fourier transformed with the analytic carrier restored.
    Everything runs on ODE solutions, independent of the resolvent algebra.
    """
    cfg = scattering.ChannelConfig.named(channel, khat, theta)
    k = cfg.khat
    d = build_dipole_operators().stack
    proj = np.eye(3) - np.outer(k, k)
    qdet1 = sum(proj[i, j] * d[i].conj().T @ d[j] for i in range(3) for j in range(3))

    # observable side: W = integral of exp(L t) q over the fluorescence window
    pe = np.diag([0.0, 1.0, 1.0, 1.0])

    def heis(_, y):
        x = y[:16].reshape(4, 4)
        lx = sum(di.conj().T @ x @ di for di in d) - 0.5 * (pe @ x + x @ pe)
        return np.concatenate([lx.reshape(-1), x.reshape(-1)])
    y0 = np.concatenate([qdet1.reshape(-1), np.zeros(16, dtype=complex)])
    sol_w = solve_ivp(heis, (0.0, horizon), y0, rtol=1e-11, atol=1e-13)
    w_int = sol_w.y[16:, -1].reshape(4, 4)
    tail = np.max(np.abs(sol_w.y[:16, -1]))
    if tail > 1e-10 * max(np.max(np.abs(w_int)), 1e-300):
        raise RuntimeError("fluorescence horizon too short for the requested accuracy")

    # state side: kick 1 at phase 0, then free decay over the delay grid
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    u1 = kick_unitary(theta, cfg.eps1, 0.0)
    rho1 = u1 @ rho0 @ u1.conj().T
    def schro(_, y):
        return _single_atom_lindblad(y.reshape(4, 4)).reshape(-1)
    n_steps = int(round(horizon / dtau))
    if n_steps % 2:
        n_steps += 1                      # Simpson needs an even panel count
    taus = np.linspace(0.0, n_steps * dtau, n_steps + 1)
    sol_r = solve_ivp(schro, (0.0, taus[-1]), rho1.reshape(-1),
                      t_eval=taus, rtol=1e-11, atol=1e-13)
    rhos = sol_r.y.T.reshape(-1, 4, 4)

    # second kick at five phases; first demodulation harmonic of the yield
    phis = 2.0 * np.pi * np.arange(5) / 5.0
    yields = np.empty((5, len(taus)), dtype=complex)
    for kphi, phi in enumerate(phis):
        u2 = kick_unitary(theta, cfg.eps2, phi)
        after = np.einsum("ij,tjk,lk->til", u2, rhos, np.conj(u2))
        yields[kphi] = np.einsum("ij,tji->t", w_int, after)
    c1 = (np.exp(-1j * 1 * phis) / 5.0) @ yields

    # delay transform with the carrier restored analytically
    u = np.asarray(detuning, dtype=float)
    phase = np.exp(-1j * np.outer(u - delta1, taus))
    simpson_w = np.ones(len(taus))
    simpson_w[1:-1:2], simpson_w[2:-1:2] = 4.0, 2.0
    simpson_w *= dtau / 3.0
    vals = PERMUTATION_PREFACTOR / _SQRT_2PI * (phase * c1) @ simpson_w
    return SpectrumResult(detuning=u, values=vals, kappa=1, khat=khat,
                          channel=channel, theta=theta,
                          params={"delta1": delta1, "horizon": horizon, "dtau": dtau},
                          components={"single": vals})
