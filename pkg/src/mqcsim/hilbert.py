"""Single-atom level structure and two-atom fluorescence detection operators.

One atom is a four-level system: a ground state and three excited Zeeman
sublevels of a J=0 <-> J=1 transition, kept in the Cartesian basis
(g, e_x, e_y, e_z) so that laser polarizations and detection directions act
as plain real/complex 3-vectors.  Two-atom states are indexed |a1 a2> with
atom 1 as the leftmost (slow) tensor factor.

All operators are dense complex numpy arrays: 4x4 for one atom, 16x16 for
the pair.  Everything here is immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIM = 4                      # one atom: g, e_x, e_y, e_z
DIM2 = DIM * DIM             # two atoms
G, EX, EY, EZ = 0, 1, 2, 3
BASIS_LABELS = ("g", "e_x", "e_y", "e_z")

#: Both atoms emit; the detected intensity keeps the atom-1 term only and the
#: permutation degeneracy enters as this overall factor.
PERMUTATION_PREFACTOR = 2.0


@dataclass(frozen=True)
class DipoleOperators:
    """Cartesian lowering components d_i = |g><e_i| of one atom's dipole."""

    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray

    @property
    def stack(self) -> np.ndarray:
        """Shape (3, 4, 4); index i is the Cartesian component."""
        return np.stack([self.dx, self.dy, self.dz])


def build_dipole_operators() -> DipoleOperators:
    """Lowering operators of the J=0 <-> J=1 transition in the Cartesian basis."""
    ops = []
    for e in (EX, EY, EZ):
        m = np.zeros((DIM, DIM), dtype=complex)
        m[G, e] = 1.0
        ops.append(m)
    return DipoleOperators(*ops)


def excited_projector() -> np.ndarray:
    """Projector onto the excited sublevels of one atom, diag(0, 1, 1, 1)."""
    return np.diag([0.0, 1.0, 1.0, 1.0]).astype(complex)


def embed(op: np.ndarray, atom_index: int) -> np.ndarray:
    """Embed a single-atom operator into the two-atom space.

    atom_index is 1 or 2; embeddings of different atoms commute.
    """
    if op.shape != (DIM, DIM):
        raise ValueError(f"expected a {DIM}x{DIM} single-atom operator, got {op.shape}")
    eye = np.eye(DIM, dtype=complex)
    if atom_index == 1:
        return np.kron(op, eye)
    if atom_index == 2:
        return np.kron(eye, op)
    raise ValueError(f"atom_index must be 1 or 2, got {atom_index!r}")


def lowering_stack() -> np.ndarray:
    """All six embedded lowering operators, shape (2, 3, 16, 16).

    First index is the atom (0 -> atom 1), second the Cartesian component.
    """
    d = build_dipole_operators().stack
    return np.stack(
        [np.stack([embed(d[i], a) for i in range(3)]) for a in (1, 2)]
    )


def ground_ket2() -> np.ndarray:
    """|gg> as a length-16 vector."""
    v = np.zeros(DIM2, dtype=complex)
    v[0] = 1.0
    return v


@dataclass(frozen=True)
class DetectionOperator:
    """Fluorescence-rate observable for emission along khat, in units f^2.

    The operator acts on atom 1 (tensored with the identity on atom 2); the
    two-atom permutation degeneracy is carried separately as
    permutation_prefactor and applied when spectra are assembled.
    """

    matrix: np.ndarray
    khat: np.ndarray
    permutation_prefactor: float = PERMUTATION_PREFACTOR


def detection_operator(khat, permutation_prefactor: float = PERMUTATION_PREFACTOR) -> DetectionOperator:
    """Transverse-projected dipole observable sum_ij d_i^dag (delta_ij - k_i k_j) d_j on atom 1."""
    k = np.asarray(khat, dtype=float)
    if k.shape != (3,) or abs(np.linalg.norm(k) - 1.0) > 1e-12:
        raise ValueError("khat must be a real unit 3-vector")
    proj = np.eye(3) - np.outer(k, k)
    d = build_dipole_operators().stack
    q1 = np.zeros((DIM, DIM), dtype=complex)
    for i in range(3):
        for j in range(3):
            if proj[i, j] != 0.0:
                q1 += proj[i, j] * (d[i].conj().T @ d[j])
    return DetectionOperator(matrix=embed(q1, 1), khat=k,
                             permutation_prefactor=permutation_prefactor)


def excited_rotation_unitary(rot: np.ndarray) -> np.ndarray:
    """Single-atom unitary implementing a spatial rotation on the excited triplet.

    |g> is invariant and |e_i> -> sum_j R_ji |e_j| for a real rotation matrix R.
    """
    u = np.zeros((DIM, DIM), dtype=complex)
    u[G, G] = 1.0
    u[1:, 1:] = np.asarray(rot, dtype=float)
    return u
