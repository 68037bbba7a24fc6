import numpy as np
import pytest

from conftest import NOMINAL_K
from tendonhand.errors import InvalidArgumentError
from tendonhand.geometry import forward_kinematics, scale_geometry
from tendonhand.hand import (
    HandLayout,
    aperture,
    assemble_hand,
    fingertips,
    solve_hand,
    solve_hand_displacement,
)


@pytest.fixture
def pair(nominal_finger):
    return assemble_hand(nominal_finger, NOMINAL_K, 2)


def test_needs_two_fingers(nominal_finger):
    for n in (0, 1):
        with pytest.raises(InvalidArgumentError):
            assemble_hand(nominal_finger, NOMINAL_K, n)


def test_four_fold_symmetry(nominal_finger):
    hand = assemble_hand(nominal_finger, NOMINAL_K, 4)
    base = hand.base_positions()
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(base @ rot.T, np.roll(base, -1, axis=0), atol=1e-15)
    state = solve_hand(hand, 60.0)
    tips = fingertips(hand, state.thetas)
    np.testing.assert_allclose(tips @ rot.T, np.roll(tips, -1, axis=0), atol=1e-15)


def test_zero_force_is_rest(pair, nominal_finger):
    state = solve_hand(pair, 0.0)
    np.testing.assert_array_equal(state.thetas, np.tile(nominal_finger.rest(), (2, 1)))
    assert state.pull_displacement == 0.0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_symmetric_fingers_identical(nominal_finger, n):
    state = solve_hand(assemble_hand(nominal_finger, NOMINAL_K, n), 50.0)
    assert np.max(np.abs(state.thetas - state.thetas[0])) <= 1e-12


@pytest.mark.parametrize("n,force", [(2, 40.0), (2, 37.3), (4, 80.0), (4, 13.1)])
def test_tension_conservation(nominal_finger, n, force):
    state = solve_hand(assemble_hand(nominal_finger, NOMINAL_K, n), force)
    assert state.tensions.sum() == force
    assert state.actuator_force == force


def test_rest_aperture_from_fk(pair, nominal_finger):
    # opposed bases: aperture = base separation - 2 * inward offset of the rest tip
    state = solve_hand(pair, 0.0)
    tip = forward_kinematics(nominal_finger, nominal_finger.rest()).tip
    c, s = np.cos(pair.layout.mount_angle), np.sin(pair.layout.mount_angle)
    inward = s * tip[0] + c * tip[1]
    expected = 2 * pair.layout.base_radius - 2 * inward
    assert aperture(pair, state) == pytest.approx(expected, rel=1e-13)


def test_aperture_non_increasing_along_ramp(pair):
    values = [aperture(pair, solve_hand(pair, f)) for f in np.arange(0.0, 81.0, 2.0)]
    assert np.all(np.diff(values) <= 0)


def test_aperture_scales(nominal_finger):
    a = assemble_hand(nominal_finger, NOMINAL_K, 3)
    b = assemble_hand(scale_geometry(nominal_finger, 1.75), NOMINAL_K, 3, a.layout.scaled(1.75))
    state = solve_hand(a, 30.0)
    assert aperture(b, state) == pytest.approx(1.75 * aperture(a, state), rel=1e-12)


def test_clamp_under_force_control_leaves_other_finger(pair, nominal_finger):
    free = solve_hand(pair, 40.0)
    held = solve_hand(pair, 40.0, {0: {0: nominal_finger.rest_angles[0]}})
    np.testing.assert_allclose(held.tensions, 20.0)
    np.testing.assert_allclose(held.thetas[1], free.thetas[1], atol=1e-12)
    assert held.excursions[0] < free.excursions[0]


@pytest.mark.parametrize("force", [10.0, 40.0, 70.0])
def test_displacement_control_compensation(pair, nominal_finger, force):
    free = solve_hand(pair, force)
    rest_clamp = {j: a for j, a in enumerate(nominal_finger.rest_angles)}
    held = solve_hand_displacement(pair, free.pull_displacement, {0: rest_clamp})
    assert held.pull_displacement == pytest.approx(free.pull_displacement, rel=1e-9)
    assert held.excursions[0] == 0.0
    assert held.excursions[1] > free.excursions[1]
    assert np.all(held.thetas[1] > free.thetas[1])
    assert held.tensions[0] > free.tensions[0]


def test_displacement_solve_matches_force_solve(pair):
    free = solve_hand(pair, 40.0)
    again = solve_hand_displacement(pair, free.pull_displacement)
    assert again.tensions[0] == pytest.approx(20.0, rel=1e-8)


def test_bad_clamp_finger(pair):
    with pytest.raises(InvalidArgumentError):
        solve_hand(pair, 10.0, {2: {0: 1.0}})


def test_layout_validation(nominal_finger):
    with pytest.raises(InvalidArgumentError):
        assemble_hand(nominal_finger, NOMINAL_K, 2, HandLayout(0.0))
    with pytest.raises(InvalidArgumentError):
        assemble_hand(nominal_finger, [1.0, 2.0], 2)
