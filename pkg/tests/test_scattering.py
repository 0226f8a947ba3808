import numpy as np
import pytest

from mqcsim import _rational as rational
from mqcsim import liouville, scattering
from mqcsim.hilbert import detection_operator, embed
from mqcsim.pulses import kick_unitary

NZ = np.array([0.0, 0.0, 1.0])


def _ledger(m, theta=0.33 * np.pi, z1=0.5 + 0.2j, z2=0.17, **kw):
    cfg = scattering.ChannelConfig.named("par", "y", theta)
    return scattering.stroboscopic_compose(m, z1, z2, NZ, cfg, xi=40.0, **kw), cfg


def test_order_zero_has_no_exchange_phase():
    led, _ = _ledger(0)
    assert all(key[4] == 0 for key in led.entries)


def test_order_zero_single_scattering_coefficient():
    """The surviving single-scattering coefficient is the two-level Rabi
    result sin^2(theta)/4 decaying at half the spontaneous rate."""
    theta = 0.41 * np.pi
    cfg = scattering.ChannelConfig.named("par", "y", theta)
    tm = liouville.stripped_tensor(80.0, NZ)[None]
    stacks = scattering.selected_harmonic_stacks(
        [theta], cfg.eps1, cfg.eps2, cfg.khat, [(1, 0)], tm, np.conj(tm),
        np.ones(1), include_orders=(0,))
    stack = stacks[(1, 0)][0]
    assert set(stack) <= {(1, 1), (2, 1), (3, 1), (4, 1)}
    assert abs(stack[(1, 1)][0] - np.sin(theta) ** 2 / 4) < 1e-14
    for key in ((2, 1), (3, 1), (4, 1)):
        if key in stack:
            assert np.max(np.abs(stack[key])) < 1e-14


def test_order_one_vanishes_after_selection():
    led, _ = _ledger(1)
    selected = scattering.apply_selection_rules(led)
    pre_scale = max(abs(v) for v in led.entries.values())
    assert pre_scale > 1e-6          # the ledger itself is not trivial
    assert max((abs(v) for v in selected.values()), default=0.0) < 1e-13 * pre_scale


def test_reassembly_against_direct_composition(rng):
    """Summing the harmonic ledger against explicit pulse phases reproduces a
    dense composition with phase-carrying kicks."""
    theta, z1, z2 = 0.61 * np.pi, 0.8 + 0.35j, 0.29
    led, cfg = _ledger(0, theta=theta, z1=z1, z2=z2)
    qdet = detection_operator(cfg.khat).matrix
    gg = np.zeros((4, 4), dtype=complex)
    gg[0, 0] = 1.0
    for _ in range(3):
        ph = rng.uniform(0, 2 * np.pi, 4)       # phi1_atom1, phi1_atom2, phi2_atom1, phi2_atom2
        total = sum(val * np.exp(1j * (k[0] * ph[0] + k[1] * ph[1]
                                       + k[2] * ph[2] + k[3] * ph[3]))
                    for k, val in led.entries.items())
        u2 = np.kron(kick_unitary(theta, cfg.eps2, ph[2]),
                     kick_unitary(theta, cfg.eps2, ph[3]))
        x = liouville.resolvent_apply(z2, qdet)
        x = liouville.resolvent_apply(z1, u2 @ x @ u2.conj().T)
        sig = np.kron(kick_unitary(theta, cfg.eps1, ph[0]).conj().T @ gg
                      @ kick_unitary(theta, cfg.eps1, ph[0]),
                      kick_unitary(theta, cfg.eps1, ph[1]).conj().T @ gg
                      @ kick_unitary(theta, cfg.eps1, ph[1]))
        direct = np.trace(sig @ x)
        assert abs(total - direct) < 1e-10 * abs(direct)


def test_ledger_conjugation_symmetry():
    z1, z2 = 0.6 + 0.4j, 0.31 + 0.05j
    led, cfg = _ledger(1, z1=z1, z2=z2)
    led_c, _ = _ledger(1, z1=np.conj(z1), z2=np.conj(z2))
    for (m1, m2, l1, l2, p), val in led.entries.items():
        mirror = led_c.entries[(-m1, -m2, -l1, -l2, -p)]
        assert abs(np.conj(val) - mirror) < 1e-12 * max(abs(val), 1e-12)


def test_atom_exchange_symmetry():
    """Swapping atom labels (detection atom, harmonic indices, and the bond
    direction) leaves the selected coefficients invariant."""
    theta, z1 = 0.44 * np.pi, 0.7 + 0.3j
    cfg = scattering.ChannelConfig.named("par", "y", theta)
    n = np.array([0.36, 0.48, 0.8])
    pairs = [(1, 0), (0, 1), (1, 1)]
    led_1 = scattering.stroboscopic_compose(2, z1, 0.0, n, cfg, xi=30.0, lpairs=pairs)
    q1 = detection_operator(cfg.khat).matrix
    q2 = embed(q1.reshape(4, 4, 4, 4)[:, 0, :, 0], 2)   # same operator on atom 2
    led_2 = scattering.stroboscopic_compose(2, z1, 0.0, -n, cfg, xi=30.0,
                                            qdet_matrix=q2,
                                            lpairs=[(b, a) for a, b in pairs])
    sel_1 = scattering.apply_selection_rules(led_1)
    sel_2 = scattering.apply_selection_rules(led_2)
    for (l1, l2), val in sel_1.items():
        assert abs(val - sel_2[(l2, l1)]) < 1e-12 * max(abs(val), 1e-15)


def test_exchange_order_scaling():
    """Far-field double-scattering coefficients scale as 1/xi^2 exactly."""
    theta, z1 = 0.52 * np.pi, 0.45 + 0.6j
    n = np.array([0.36, 0.48, 0.8])       # generic bond direction
    cfg = scattering.ChannelConfig.named("par", "x", theta)
    led_a = scattering.stroboscopic_compose(2, z1, 0.0, n, cfg, xi=40.0,
                                            lpairs=[(1, 1)])
    led_b = scattering.stroboscopic_compose(2, z1, 0.0, n, cfg, xi=80.0,
                                            lpairs=[(1, 1)])
    val_a = scattering.apply_selection_rules(led_a)[(1, 1)]
    val_b = scattering.apply_selection_rules(led_b)[(1, 1)]
    assert abs(val_b / val_a - 0.25) < 1e-12


def test_two_pi_pulses_give_no_fluorescence_without_interpulse_decay():
    cfg = scattering.ChannelConfig.named("par", "y", np.pi)
    big = 1e12          # suppresses interpulse evolution as 1/z
    led = scattering.stroboscopic_compose(0, big, 0.0, NZ, cfg, lpairs=[(0, 0)])
    dc = big * led.entries[(0, 0, 0, 0, 0)]
    cfg_ref = scattering.ChannelConfig.named("par", "y", 0.5 * np.pi)
    led_ref = scattering.stroboscopic_compose(0, big, 0.0, NZ, cfg_ref, lpairs=[(0, 0)])
    scale = abs(big * led_ref.entries[(0, 0, 0, 0, 0)])
    assert abs(dc) < 1e-10 * scale


def test_paper_literal_ordering_fails_zero_sector_at_z2_zero():
    cfg = scattering.ChannelConfig.named("par", "y", 0.3 * np.pi)
    with pytest.raises(AssertionError, match="unphysical"):
        scattering.stroboscopic_compose(0, 0.5 + 0.1j, 0.0, NZ, cfg,
                                        ordering="paper_literal", lpairs=[(1, 0)])
    # away from the z2 -> 0 limit the literal ordering is computable
    led = scattering.stroboscopic_compose(0, 0.5 + 0.1j, 0.4, NZ, cfg,
                                          ordering="paper_literal", lpairs=[(1, 0)])
    assert len(led.entries) > 0


def test_selection_rule_bookkeeping():
    led = scattering.HarmonicLedger(order=2, z1=0.0, z2=0.0, entries={
        (-1, 0, 1, 0, 0): 2.0, (1, 0, 1, 0, 0): 5.0, (-1, 0, 1, 0, 1): 7.0,
        (0, -1, 0, 1, 0): 1.5})
    out = scattering.apply_selection_rules(led)
    assert out == {(1, 0): 2.0, (0, 1): 1.5}


def test_intensity_images_conjugation_and_scaling():
    cfg = scattering.ChannelConfig.named("par", "y", 0.37 * np.pi)
    z1 = 0.8 + 0.25j
    img = scattering.intensity_images(z1, cfg, xi=40.0)
    img_c = scattering.intensity_images(np.conj(z1), cfg, xi=40.0)
    assert abs(img["single"][-1] - np.conj(img_c["single"][1])) < 1e-13
    img_b = scattering.intensity_images(z1, cfg, xi=80.0)
    ratio = img_b["double"][(1, 1)] / img["double"][(1, 1)]
    assert abs(ratio - 0.25) < 1e-12


def test_moment_contraction_matches_fixed_direction_average():
    """Averaging single-direction compositions over the sphere equals the
    moment-contracted composition (the spectra fast path)."""
    from mqcsim import averaging, spectra
    theta = 0.3 * np.pi
    cfg = scattering.ChannelConfig.named("par", "x", theta)
    quad = averaging.SphereQuadrature(6, 8)
    tminus, tplus, weights = spectra._moment_batch(30.0, "far_field", quad)
    fast = scattering.selected_harmonic_stacks(
        [theta], cfg.eps1, cfg.eps2, cfg.khat, [(1, 1)], tminus, tplus, weights,
        include_orders=(2,))[(1, 1)][2]
    slow: dict = {}
    for node, w in zip(quad.nodes, quad.weights):
        tm = liouville.stripped_tensor(30.0, node)[None]
        st = scattering.selected_harmonic_stacks(
            [theta], cfg.eps1, cfg.eps2, cfg.khat, [(1, 1)], tm, np.conj(tm),
            np.ones(1), include_orders=(2,))[(1, 1)][2]
        for key, val in st.items():
            rational.add_into(slow, key, w * val)
    for key in fast:
        assert np.max(np.abs(fast[key] - slow.get(key, 0.0))) < 1e-13
