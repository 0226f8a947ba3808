"""Exact rational-in-z bookkeeping for repeated resolvent applications.

Every quantity that passes through the interpulse resolvent is a rational
function of the Laplace variable z with poles only at the five relaxation
eigenvalues lambda_s = -gamma s/2, s = 0..4.  Rather than re-running the
whole composition for each of the tens of thousands of z values a spectrum
needs, intermediate operators are carried as pole stacks

    X(z) = C  +  sum_{s,j} M_{s,j} / (z - lambda_s)^j,

plain dicts mapping ('c', 0) or (s, j) to coefficient arrays.  Applying a
z-free superoperator maps the coefficients; applying a resolvent splits each
coefficient over the eigenvalue sectors (after the dressing transform that
diagonalizes the relaxation generator) and recombines the partial fractions
exactly.  Evaluation at any z array is then a cheap broadcast sum.
"""

from __future__ import annotations

import numpy as np

from .liouville import SECTOR_MASKS, dress, undress

CONST_KEY = ("c", 0)


def const_stack(x: np.ndarray) -> dict:
    return {CONST_KEY: np.asarray(x, dtype=complex)}


def map_stack(stack: dict, fn) -> dict:
    """Apply a z-independent linear map to every coefficient."""
    return {key: fn(m) for key, m in stack.items()}


def add_into(acc: dict, key, value) -> None:
    if key in acc:
        acc[key] = acc[key] + value
    else:
        acc[key] = value


def _pf_product(key, s_new: int, m: np.ndarray, gamma: float, out: dict) -> None:
    """Partial fractions of (existing pole term) / (z - lambda_{s_new})."""
    if key == CONST_KEY:
        add_into(out, (s_new, 1), m)
        return
    s_old, j = key
    if s_old == s_new:
        add_into(out, (s_old, j + 1), m)
        return
    delta = -0.5 * gamma * (s_new - s_old)     # lambda_new - lambda_old
    add_into(out, (s_new, 1), m / delta**j)
    for r in range(1, j + 1):
        add_into(out, (s_old, r), -m / delta ** (j - r + 1))


def resolvent_stack(stack: dict, gamma: float = 1.0) -> dict:
    """Apply (z - L_relax)^-1 symbolically in z.

    Each coefficient is undressed, split over the five damping sectors
    (each contributing a simple pole at its eigenvalue), redressed, and
    merged back with exact partial-fraction recombination.
    """
    out: dict = {}
    for key, m in stack.items():
        w = undress(m)
        for s, mask in enumerate(SECTOR_MASKS):
            ws = w * mask
            if not ws.any():
                continue
            _pf_product(key, s, dress(ws), gamma, out)
    return out


def eval_stack(stack: dict, z, gamma: float = 1.0):
    """Evaluate the stack at complex z (scalar or array).

    Guards against z colliding with a pole that is actually present; the
    spectra path removes the non-decaying s = 0 pole beforehand (see
    drop_zero_sector), so purely imaginary z is always safe there.
    """
    z = np.asarray(z, dtype=complex)
    if not stack:
        return np.zeros(z.shape, dtype=complex)
    zexp = z.reshape(z.shape + (1,) * np.ndim(next(iter(stack.values()))))
    out = None
    for key, m in stack.items():
        if key == CONST_KEY:
            term = np.broadcast_to(m, zexp.shape[: z.ndim] + np.shape(m)).copy()
        else:
            s, j = key
            if np.min(np.abs(z + 0.5 * gamma * s)) < 1e-9 * gamma:
                raise ValueError(f"z within guard of the pole at -{s}*gamma/2")
            term = m / (zexp + 0.5 * gamma * s) ** j
        out = term if out is None else out + term
    return out


def drop_zero_sector(stack: dict, rel_tol: float = 1e-10) -> dict:
    """Remove s = 0 pole terms, checking they are negligible.

    The selection rules guarantee the surviving harmonics carry no weight on
    the non-decaying sector; this enforces that to rounding accuracy.
    """
    scale = max((np.max(np.abs(m)) for key, m in stack.items()
                 if key == CONST_KEY or key[0] != 0), default=0.0)
    out = {}
    for key, m in stack.items():
        if key != CONST_KEY and key[0] == 0:
            weight = np.max(np.abs(m))
            if weight > max(rel_tol * scale, 1e-25):
                raise AssertionError(
                    "zero-sector pole carries weight after selection "
                    f"({weight:.3e} vs scale {scale:.3e})")
            continue
        out[key] = m
    return out
