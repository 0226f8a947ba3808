"""Delta-pulse kicks and their decomposition into phase harmonics.

A short resonant pulse of area theta and polarization eps acts on one atom
as the instantaneous conjugation X -> U X U^dag with

    U = exp(-i theta M / 2),   M = S^dag e^{i phi} + S e^{-i phi},

where S^dag = D^dag . eps picks the polarization component of the raising
operator and phi is the pulse's phase tag.  M squares to the projector onto
the driven two-level subspace, so U has the closed Rabi form used below.

The phi-dependence of the conjugation is a trigonometric polynomial of
degree two, so sampling at five equally spaced phases and inverting the
discrete Fourier transform recovers the harmonic components exactly; nothing
is transcribed from closed-form expansions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.constants as const

from .hilbert import DIM, G, build_dipole_operators

_PHI_NODES = 2.0 * np.pi * np.arange(5) / 5.0


@dataclass(frozen=True)
class PulseSpec:
    """One pulse of the pair: area (rad), unit polarization, index 1 or 2."""

    area: float
    polarization: np.ndarray
    index: int = 1
    ground_restricted: bool = False

    def __post_init__(self):
        if self.area < 0:
            raise ValueError("pulse area must be nonnegative")
        _check_polarization(self.polarization)


def _check_polarization(eps) -> np.ndarray:
    e = np.asarray(eps, dtype=complex)
    if e.shape != (3,) or abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValueError("polarization must be a unit 3-vector")
    return e


def kick_unitary(theta: float, eps, phi: float) -> np.ndarray:
    """Single-atom kick unitary exp(-i theta M / 2) in closed form.

    M^2 is the projector P onto span{|g>, eps-excited state}, hence
    U = (1 - P) + P cos(theta/2) - i M sin(theta/2).
    """
    e = _check_polarization(eps)
    d = build_dipole_operators().stack
    s = np.einsum("i,ijk->jk", np.conj(e), d)      # D . eps*
    sd = s.conj().T
    m = sd * np.exp(1j * phi) + s * np.exp(-1j * phi)
    p = sd @ s + s @ sd
    return np.eye(DIM) - p + p * np.cos(theta / 2.0) - 1j * m * np.sin(theta / 2.0)


def _conjugation_tensor(u: np.ndarray) -> np.ndarray:
    """Kick superoperator as a dyad-to-dyad tensor R[a', b', a, b]."""
    return np.einsum("Aa,Bb->ABab", u, np.conj(u))


@dataclass(frozen=True)
class KickHarmonics:
    """Phase harmonics of one atom's kick.

    For the general (second-pulse) case, ``tensors`` maps the harmonic index
    l in -2..2 to the dyad tensor of the e^{i l phi} component of the
    conjugation; reassembling sum_l e^{i l phi} R^[l] gives back the kick at
    every phase.

    For the ground-restricted (first-pulse) case, ``ground_pairings`` maps
    m in -1..1 to the 4x4 matrix sigma^[m] such that Tr[sigma^[m] X] is the
    e^{i m phi} component of the kicked observable paired against the ground
    state; the |m| = 2 components vanish identically there.
    """

    theta: float
    polarization: np.ndarray
    ground_restricted: bool
    tensors: dict | None = None
    ground_pairings: dict | None = None

    def apply(self, l: int, x: np.ndarray) -> np.ndarray:
        """Apply the l-th harmonic to a single-atom operator."""
        if self.ground_restricted:
            raise ValueError("ground-restricted harmonics pair, they do not map")
        return np.einsum("ABab,...ab->...AB", self.tensors[l], x)

    def reassemble(self, phi: float) -> np.ndarray:
        """Dyad tensor of the kick at a specific phase (full case only)."""
        out = np.zeros((DIM, DIM, DIM, DIM), dtype=complex)
        for l, t in self.tensors.items():
            out += np.exp(1j * l * phi) * t
        return out


def kick_superop_harmonics(theta: float, eps, ground_restricted: bool = False) -> KickHarmonics:
    """Extract the kick's phase harmonics by exact five-point Fourier inversion."""
    e = _check_polarization(eps)
    if not ground_restricted:
        samples = np.stack([_conjugation_tensor(kick_unitary(theta, e, phi))
                            for phi in _PHI_NODES])
        tensors = {}
        for l in range(-2, 3):
            tensors[l] = np.einsum("k,kABab->ABab",
                                   np.exp(-1j * l * _PHI_NODES) / 5.0, samples)
        return KickHarmonics(theta=theta, polarization=e,
                             ground_restricted=False, tensors=tensors)

    gg = np.zeros((DIM, DIM), dtype=complex)
    gg[G, G] = 1.0
    samples = np.stack([kick_unitary(theta, e, phi).conj().T @ gg @ kick_unitary(theta, e, phi)
                        for phi in _PHI_NODES])
    pairings = {}
    for m in range(-2, 3):
        sig = np.einsum("k,kab->ab", np.exp(-1j * m * _PHI_NODES) / 5.0, samples)
        if abs(m) <= 1:
            pairings[m] = sig
        elif np.max(np.abs(sig)) > 1e-13:
            raise AssertionError("ground-state pairing grew a |m|=2 harmonic")
    return KickHarmonics(theta=theta, polarization=e,
                         ground_restricted=True, ground_pairings=pairings)


def area_from_gaussian(e0: float, sigma: float, d: float) -> float:
    """Pulse area of a Gaussian envelope e0 exp(-t^2/(2 sigma^2)) and dipole d."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * d * e0 * sigma * np.sqrt(2.0 * np.pi) / const.hbar


def gaussian_amplitude_for_area(theta: float, sigma: float, d: float) -> float:
    """Field amplitude producing a given area; inverse of area_from_gaussian."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return theta * const.hbar / (2.0 * d * sigma * np.sqrt(2.0 * np.pi))
