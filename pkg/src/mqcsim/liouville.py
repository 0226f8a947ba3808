"""Superoperator algebra on the two-atom operator space.

Generators act on observables (Heisenberg convention): the relaxation
generator obeys

    L_gamma Q = (gamma/2) sum_alpha ( D_alpha^dag . [Q, D_alpha]
                                      + [D_alpha^dag, Q] . D_alpha ),

which annihilates the identity and makes excited-state populations decay at
gamma.  In the dyad basis |A><B| this is a diagonal damping
-(gamma/2) (exc A + exc B) plus a nilpotent feed gamma sum D^dag Q D that
moves ground-projector weight onto excited projectors.  The feed shifts the
damping eigenvalue by exactly -gamma, so the closed-form dressing

    V = 1 + F/gamma + F^2 / (2 gamma^2)      (F^3 = 0)

diagonalizes L_gamma and resolvents stay entrywise divisions; no dense
solves anywhere.

The photon-exchange generator is split into the two parts proportional to
exp(-i xi) and exp(+i xi); the oscillating phase is stripped and tracked as
an integer power, while the stripped amplitudes keep the full direction- and
distance-dependence of the coupling tensor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
import scipy.constants as const

from . import hilbert

TensorMode = Literal["far_field", "full"]

#: dyad (A, B) damping sector: exc(A) + exc(B) in 0..4; eigenvalue -gamma*s/2
_EXC1 = np.array([0, 1, 1, 1])
_EXC2 = (_EXC1[:, None] + _EXC1[None, :]).reshape(-1)          # per two-atom state
SECTOR = (_EXC2[:, None] + _EXC2[None, :])                     # 16x16 int
SECTOR_MASKS = [(SECTOR == s) for s in range(5)]
EIGENVALUE_SECTORS = (0, 1, 2, 3, 4)                           # lambda_s = -gamma*s/2

_D = hilbert.lowering_stack().reshape(6, 16, 16)               # (atom, i) flattened
_DD = np.conj(np.swapaxes(_D, -1, -2))

_RESOLVENT_GUARD = 1e-9


class SingularResolventError(ValueError):
    """z collides with an eigenvalue of the relaxation generator."""


def feed_apply(x: np.ndarray) -> np.ndarray:
    """Population feed sum_{alpha,i} D^dag X D (one power of gamma factored out)."""
    # batched matmuls beat einsum by an order of magnitude here
    return (_DD @ x[..., None, :, :] @ _D).sum(axis=-3)


def dress(x: np.ndarray) -> np.ndarray:
    """Similarity transform V that diagonalizes the relaxation generator."""
    f1 = feed_apply(x)
    if not f1.any():
        return x
    return x + f1 + 0.5 * feed_apply(f1)


def undress(x: np.ndarray) -> np.ndarray:
    """Inverse of dress(); V^-1 = 1 - F + F^2/2 with F nilpotent of order 3."""
    f1 = feed_apply(x)
    if not f1.any():
        return x
    return x - f1 + 0.5 * feed_apply(f1)


def relaxation_eigenvalues(gamma: float = 1.0) -> np.ndarray:
    """The five distinct eigenvalues 0, -gamma/2, ..., -2 gamma."""
    return np.array([-0.5 * gamma * s for s in EIGENVALUE_SECTORS])


def resolvent_apply(z: complex, x: np.ndarray, gamma: float = 1.0,
                    drop_zero_sector: bool = False) -> np.ndarray:
    """Apply (z - L_gamma)^-1 to a two-atom operator (or a stack of them).

    With drop_zero_sector the non-decaying ground-ground dyad is removed
    before inversion, which is the finite part of the z -> 0 limit; the
    caller is responsible for that component being irrelevant (asserted to
    vanish where spectra are assembled).
    """
    lam = relaxation_eigenvalues(gamma)
    if drop_zero_sector:
        if np.min(np.abs(z - lam[1:])) < _RESOLVENT_GUARD * gamma:
            raise SingularResolventError(f"z={z} within guard of a decay eigenvalue")
        x = np.array(x, copy=True)
        x[..., 0, 0] = 0.0
    else:
        if np.min(np.abs(z - lam)) < _RESOLVENT_GUARD * gamma:
            raise SingularResolventError(f"z={z} within guard of a relaxation eigenvalue")
    denom = z + 0.5 * gamma * SECTOR
    if drop_zero_sector and z == 0:
        denom = denom.astype(complex).copy()
        denom[0, 0] = 1.0          # entry is zero anyway; avoid 0/0
    return dress(undress(x) / denom)


@dataclass(frozen=True)
class Superoperator:
    """Linear map on the 256-dimensional two-atom operator space.

    p_inc records the photon-exchange phase bookkeeping: +1 for the
    exp(-i xi) part, -1 for the exp(+i xi) part, 0 for phase-free maps.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    p_inc: int = 0

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.fn(x)

    def matrix(self) -> np.ndarray:
        """Dense 256x256 form, column k = image of the k-th dyad (row-major)."""
        out = np.zeros((256, 256), dtype=complex)
        for k in range(256):
            e = np.zeros((16, 16), dtype=complex)
            e[k // 16, k % 16] = 1.0
            out[:, k] = self.fn(e).reshape(256)
        return out


def _relaxation_apply(x: np.ndarray, gamma: float) -> np.ndarray:
    return gamma * feed_apply(x) - 0.5 * gamma * SECTOR * x


def relaxation_generator(gamma: float = 1.0) -> Superoperator:
    """Spontaneous-decay generator of both atoms, acting on observables."""
    return Superoperator("L_relax", lambda x: _relaxation_apply(x, gamma))


# ---------------------------------------------------------------------------
# photon-exchange coupling tensor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InteractionTensor:
    """Complex symmetric 3x3 coupling tensor T = Gamma + i Omega.

    The real part sets collective decay rates, the imaginary part collective
    level shifts.
    """

    tensor: np.ndarray
    xi: float
    nhat: np.ndarray
    mode: TensorMode

    @property
    def gamma_part(self) -> np.ndarray:
        return self.tensor.real.copy()

    @property
    def omega_part(self) -> np.ndarray:
        return self.tensor.imag.copy()


def _check_nhat(nhat) -> np.ndarray:
    n = np.asarray(nhat, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("nhat must be a real unit 3-vector")
    return n


def interaction_tensor(xi: float, nhat, mode: TensorMode = "far_field",
                       gamma: float = 1.0) -> InteractionTensor:
    """Dipole-dipole coupling tensor at scaled distance xi along nhat.

    far_field keeps only the 1/xi transverse-photon term; full carries the
    1/xi^2 and 1/xi^3 near-zone pieces as well.
    """
    n = _check_nhat(nhat)
    if xi <= 0:
        raise ValueError("xi must be positive")
    t = np.exp(-1j * xi) * stripped_tensor(xi, n, mode, gamma)
    return InteractionTensor(tensor=t, xi=float(xi), nhat=n, mode=mode)


def stripped_tensor(xi: float, nhat, mode: TensorMode = "far_field",
                    gamma: float = 1.0) -> np.ndarray:
    """Coupling tensor with the oscillating exp(-i xi) factor removed.

    This is the amplitude entering the phase ledger; its magnitude carries
    the 1/xi (far-field) or full rational distance dependence.
    """
    n = _check_nhat(nhat)
    if xi <= 0:
        raise ValueError("xi must be positive")
    transverse = np.eye(3) - np.outer(n, n)
    amp = 0.75 * gamma * (1j / xi) * transverse
    if mode == "full":
        amp = amp + 0.75 * gamma * (1.0 / xi**2 - 1j / xi**3) * (np.eye(3) - 3.0 * np.outer(n, n))
    elif mode != "far_field":
        raise ValueError(f"unknown tensor mode {mode!r}")
    return amp.astype(complex)


# ---------------------------------------------------------------------------
# photon-exchange generator, split by phase sign
# ---------------------------------------------------------------------------

_D1 = _D[:3]     # atom-1 lowering, Cartesian components
_D2 = _D[3:]
_DD1 = _DD[:3]
_DD2 = _DD[3:]


def apply_exchange_minus(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """exp(-i xi) part: sum over both atom orderings of D^dag_a . T . [X, D_b].

    t may carry leading batch axes (..., 3, 3) matching x (..., 16, 16).
    """
    out = 0.0
    for da_d, db in ((_DD1, _D2), (_DD2, _D1)):
        # contract the tensor into the raising side: DT_j = sum_i T_ij D^dag_i
        dt = np.einsum("...ij,ikl->...jkl", t, da_d)
        cross = np.einsum("...jkl,jlm->...km", dt, db)     # sum_j DT_j D_j
        out = out + (dt @ x[..., None, :, :] @ db).sum(axis=-3) - cross @ x
    return out


def apply_exchange_plus(x: np.ndarray, tconj: np.ndarray) -> np.ndarray:
    """exp(+i xi) part: sum over both orderings of [D^dag_b, X] . T* . D_a.

    tconj must already be the conjugated tensor amplitude.
    """
    out = 0.0
    for db_d, da in ((_DD1, _D2), (_DD2, _D1)):
        et = np.einsum("...ij,ikl->...jkl", tconj, db_d)   # E_j = sum_i T*_ij D^dag_i
        cross = np.einsum("...jkl,jlm->...km", et, da)     # sum_j E_j D_j
        out = out + (et @ x[..., None, :, :] @ da).sum(axis=-3) - x @ cross
    return out


def interaction_generator(nhat, phase_part: Literal["minus", "plus"],
                          mode: TensorMode = "far_field", xibar: float = 80.0,
                          gamma: float = 1.0) -> Superoperator:
    """One phase component of the photon-exchange generator L_12 + L_21.

    The minus part carries the stripped T amplitude and increments the net
    phase power by +1; the plus part carries conj(T) and decrements it.
    """
    n = _check_nhat(nhat)
    if xibar <= 0:
        raise ValueError("xibar must be positive")
    t = stripped_tensor(xibar, n, mode, gamma)
    if phase_part == "minus":
        return Superoperator("L_exch_minus", lambda x: apply_exchange_minus(x, t), p_inc=+1)
    if phase_part == "plus":
        tc = np.conj(t)
        return Superoperator("L_exch_plus", lambda x: apply_exchange_plus(x, tc), p_inc=-1)
    raise ValueError(f"phase_part must be 'minus' or 'plus', got {phase_part!r}")


# ---------------------------------------------------------------------------
# Schrodinger-picture duals (test oracles and the time-domain check)
# ---------------------------------------------------------------------------

def dual_relaxation_apply(rho: np.ndarray, gamma: float = 1.0) -> np.ndarray:
    """Textbook Lindblad dissipator for both atoms, acting on states."""
    out = gamma * np.einsum("nij,...jk,nkl->...il", _D, rho, _DD, optimize=True)
    return out - 0.5 * gamma * SECTOR * rho


def dual_exchange_apply(rho: np.ndarray, t: np.ndarray, tconj: np.ndarray) -> np.ndarray:
    """State-side dual of the full stripped exchange generator (both parts)."""
    out = np.zeros_like(rho)
    for da_d, db in ((_DD1, _D2), (_DD2, _D1)):
        # dual of D^dag_a T [X, D_b] : sum_ij T_ij (D_bj rho DD_ai - rho DD_ai D_bj)
        out += np.einsum("mn,njk,...kl,mli->...ji", t, db, rho, da_d, optimize=True)
        out -= np.einsum("...jk,mkl,mn,nli->...ji", rho, da_d, t, db, optimize=True)
    for db_d, da in ((_DD1, _D2), (_DD2, _D1)):
        # dual of [D^dag_b, X] T* D_a : sum_ij T*_ij (D_aj rho DD_bi - DD_bi D_aj rho)
        out += np.einsum("mn,njk,...kl,mli->...ji", tconj, da, rho, db_d, optimize=True)
        out -= np.einsum("mjk,mn,nkl,...li->...ji", db_d, tconj, da, rho, optimize=True)
    return out


# ---------------------------------------------------------------------------
# physical parameters
# ---------------------------------------------------------------------------

@dataclass
class PhysicalParams:
    """Dimensional inputs of a run; spectra are emitted in units of f^2/gamma^2.

    The detection constant f never enters numerically.  The r.m.s. Doppler
    shift is recomputed from (T, M, lambda0); if dbar is also given it must
    agree to 1e-10 relative.
    """

    gamma: float = 2 * np.pi * 6.067e6        # spontaneous rate, rad/s
    wavelength: float = 790e-9                # m
    temperature: float = 320.0                # K
    mass: float = 1.443e-25                   # kg
    rbar: float = 10e-6                       # mean interatomic distance, m
    dbar: float | None = None                 # r.m.s. Doppler shift, rad/s
    far_field_warning_xibar: float = 10.0

    k0: float = field(init=False)
    omega0: float = field(init=False)
    xibar: float = field(init=False)

    def __post_init__(self):
        for name in ("gamma", "wavelength", "temperature", "mass", "rbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        self.k0 = 2 * np.pi / self.wavelength
        self.omega0 = 2 * np.pi * const.c / self.wavelength
        self.xibar = self.k0 * self.rbar
        computed = self.k0 * np.sqrt(const.k * self.temperature / self.mass)
        if self.dbar is None:
            self.dbar = computed
        elif abs(self.dbar - computed) > 1e-10 * computed:
            raise ValueError(
                f"dbar={self.dbar} inconsistent with T, M, lambda (expected {computed})")
        if self.xibar < self.far_field_warning_xibar:
            warnings.warn(
                f"xibar={self.xibar:.2f} is below {self.far_field_warning_xibar}; "
                "the far-field coupling model is unreliable this close",
                stacklevel=2)

    @property
    def dbar_over_gamma(self) -> float:
        return self.dbar / self.gamma

    @classmethod
    def from_density(cls, density: float, **kwargs) -> "PhysicalParams":
        """Mean distance from number density via rbar = 0.554 n^(-1/3)."""
        if density <= 0:
            raise ValueError("density must be positive")
        return cls(rbar=0.554 * density ** (-1.0 / 3.0), **kwargs)
