import numpy as np
import pytest

from mqcsim import hilbert


def test_dipole_matrix_elements():
    d = hilbert.build_dipole_operators()
    expected = np.zeros((4, 4), dtype=complex)
    expected[hilbert.G, hilbert.EX] = 1.0
    assert np.array_equal(d.dx, expected)
    assert np.max(np.abs(d.dx)) == 1.0


def test_excited_subspace_projector():
    d = hilbert.build_dipole_operators().stack
    total = sum(di.conj().T @ di for di in d)
    assert np.allclose(total, np.diag([0, 1, 1, 1]), atol=1e-15)


def test_double_lowering_vanishes():
    d = hilbert.build_dipole_operators()
    for a in (d.dx, d.dy, d.dz):
        for b in (d.dx, d.dy, d.dz):
            assert np.max(np.abs(a @ b)) == 0.0


def test_embed_identity_and_commutation():
    eye = np.eye(4, dtype=complex)
    assert np.array_equal(hilbert.embed(eye, 1), np.eye(16))
    d = hilbert.build_dipole_operators()
    a = hilbert.embed(d.dx, 1)
    b = hilbert.embed(d.dx.conj().T, 2)
    assert np.allclose(a @ b, b @ a, atol=1e-15)


def test_embed_trace_identity():
    d = hilbert.build_dipole_operators()
    op = d.dx.conj().T @ d.dx
    assert np.isclose(np.trace(hilbert.embed(op, 1)), np.trace(op) * 4)
    assert np.isclose(np.trace(hilbert.embed(op, 1)), 4.0)


def test_embed_rejects_bad_atom_index():
    with pytest.raises(ValueError):
        hilbert.embed(np.eye(4, dtype=complex), 3)


def test_detection_operator_x_direction():
    d = hilbert.build_dipole_operators()
    q = hilbert.detection_operator([1.0, 0.0, 0.0])
    expected = hilbert.embed(d.dy.conj().T @ d.dy + d.dz.conj().T @ d.dz, 1)
    assert np.allclose(q.matrix, expected, atol=1e-15)


def test_detection_expectations():
    q = hilbert.detection_operator([1.0, 0.0, 0.0]).matrix
    e_y_g = np.zeros(16)
    e_y_g[4 * hilbert.EY + hilbert.G] = 1.0
    assert np.isclose(e_y_g @ q @ e_y_g, 1.0)
    e_x_g = np.zeros(16)
    e_x_g[4 * hilbert.EX + hilbert.G] = 1.0
    assert np.isclose(e_x_g @ q @ e_x_g, 0.0)


def test_detection_operator_psd_and_ground_kernel():
    for khat in ([1, 0, 0], [0, 1, 0], [0.36, 0.48, 0.8]):
        q = hilbert.detection_operator(np.asarray(khat, dtype=float)).matrix
        assert np.allclose(q, q.conj().T, atol=1e-14)
        eig = np.linalg.eigvalsh(q)
        assert eig.min() > -1e-14 and eig.max() < 1.0 + 1e-14
        assert np.max(np.abs(q @ hilbert.ground_ket2())) < 1e-15


def test_detection_rejects_non_unit_direction():
    with pytest.raises(ValueError):
        hilbert.detection_operator([1.0, 1.0, 0.0])


def test_rotational_covariance(rng):
    for _ in range(5):
        a = rng.normal(size=(3, 3))
        qmat, _ = np.linalg.qr(a)
        if np.linalg.det(qmat) < 0:
            qmat[:, 0] *= -1
        k = rng.normal(size=3)
        k /= np.linalg.norm(k)
        u = hilbert.embed(hilbert.excited_rotation_unitary(qmat), 1)
        lhs = hilbert.detection_operator(qmat @ k).matrix
        rhs = u @ hilbert.detection_operator(k).matrix @ u.conj().T
        assert np.max(np.abs(lhs - rhs)) < 1e-12
