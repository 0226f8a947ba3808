import numpy as np
import pytest

from mqcsim import _rational as rational
from mqcsim import liouville


def test_symbolic_resolvent_matches_numeric(rng):
    """A chain with repeated resolvents and an exchange insertion, evaluated
    symbolically in z, must agree with direct numeric resolvent application
    (this exercises the double-pole partial fractions)."""
    x = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    n = np.array([0.6, 0.0, 0.8])
    minus = liouville.interaction_generator(n, "minus", xibar=20.0)

    stack = rational.const_stack(x)
    stack = rational.resolvent_stack(stack)
    stack = rational.map_stack(stack, minus.apply)
    stack = rational.resolvent_stack(stack)
    stack = rational.map_stack(stack, minus.apply)
    stack = rational.resolvent_stack(stack)

    for z in (0.9 + 0.1j, -0.23 + 0.77j, 2.5):
        sym = rational.eval_stack(stack, z)
        num = liouville.resolvent_apply(
            z, minus.apply(liouville.resolvent_apply(
                z, minus.apply(liouville.resolvent_apply(z, x)))))
        assert np.max(np.abs(sym - num)) < 1e-12 * np.max(np.abs(num))


def test_eval_guard_near_pole():
    stack = {(1, 1): np.ones((1, 1), dtype=complex)}
    with pytest.raises(ValueError):
        rational.eval_stack(stack, -0.5 + 1e-12)


def test_drop_zero_sector_raises_on_weight():
    stack = {(0, 1): np.array([1.0 + 0j]), (1, 1): np.array([1.0 + 0j])}
    with pytest.raises(AssertionError):
        rational.drop_zero_sector(stack)
    clean = rational.drop_zero_sector({(0, 1): np.array([1e-30 + 0j]),
                                       (1, 1): np.array([1.0 + 0j])})
    assert set(clean) == {(1, 1)}
