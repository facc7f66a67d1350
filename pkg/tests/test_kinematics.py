"""Inverse kinematics, Jacobians and transmission factors of both machines."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dextrous.errors import InvalidGeometry, OutsideReachableDomain, SingularConfiguration
from dextrous.interval import Box
from dextrous.kinematics import (
    MachineKind,
    MachineModel,
    Pose,
    interval_char_poly_value,
    inverse_kinematics,
    jacobian_pair,
    joint_points,
    singularity_margins,
    transmission_factors,
    transmission_factors_batch,
)
from oracles import companion_sigmas, generalized_det, random_reachable, uranesx

ORTHO = MachineModel.orthoglide()


@pytest.fixture(params=["orthoglide", "uranesx"])
def machine(request):
    return ORTHO if request.param == "orthoglide" else uranesx(0.1)


# --- geometry ------------------------------------------------------------------------


def test_orthoglide_axes_and_defaults():
    np.testing.assert_array_equal(ORTHO.axes, np.eye(3))
    assert ORTHO.dim == 3
    assert ORTHO.branch_signs == (-1, -1, -1)


def test_uranesx_anchors_form_centred_triangle():
    m = uranesx()
    anchors = np.array(m.anchors)
    np.testing.assert_allclose(anchors.mean(axis=0), 0.0, atol=1e-15)
    np.testing.assert_allclose(np.hypot(*anchors.T), 7 / 13 - 3 / 26)
    np.testing.assert_array_equal(m.axes, np.tile([0.0, 0.0, 1.0], (3, 1)))
    assert m.dim == 2


def test_uranesx_lambda_enlarges_base():
    assert uranesx(0.2).R_eff == pytest.approx(7 / 13 + 0.2)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(R=0.5, r=0.6, lam=0.0, L=1.0),
        dict(R=7 / 13, r=3 / 26, lam=0.6, L=1.0),
        dict(R=7 / 13, r=0.0, lam=0.0, L=1.0),
    ],
)
def test_uranesx_invalid_geometry(kwargs):
    with pytest.raises(InvalidGeometry):
        MachineModel.uranesx(**kwargs)


def test_invalid_leg_and_signs():
    with pytest.raises(InvalidGeometry):
        MachineModel.orthoglide(L=0.0)
    with pytest.raises(InvalidGeometry):
        MachineModel.orthoglide(branch_signs=(1, 0, 1))


def test_pose_rejects_nonfinite():
    with pytest.raises(ValueError):
        Pose(math.inf, 0.0, 0.0)


# --- inverse kinematics -----------------------------------------------------------------


def test_orthoglide_isotropic_joint_values():
    m = MachineModel.orthoglide(branch_signs=(1, 1, 1))
    assert inverse_kinematics(m, Pose(0, 0, 0)).rho == (1.0, 1.0, 1.0)


def test_orthoglide_unreachable():
    with pytest.raises(OutsideReachableDomain):
        inverse_kinematics(ORTHO, Pose(0.0, 1.0 + 1e-9, 0.0))


def test_uranesx_centroid_joints_equal():
    m = uranesx()
    z = 0.3
    rho = inverse_kinematics(m, Pose(0.0, 0.0, z)).rho
    expected = z + math.sqrt(1 - (7 / 13 - 3 / 26) ** 2)
    np.testing.assert_allclose(rho, expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("signs", [(1, 1, 1), (-1, -1, -1), (1, -1, 1)])
def test_leg_lengths_round_trip(signs):
    rng = np.random.default_rng(11)
    for kind in MachineKind:
        if kind is MachineKind.ORTHOGLIDE:
            m = MachineModel.orthoglide(branch_signs=signs)
        else:
            m = MachineModel.uranesx(7 / 13, 3 / 26, 0.05, 1.0, branch_signs=signs)
        for p in random_reachable(m, rng, 200):
            a = joint_points(m, inverse_kinematics(m, p))
            lengths = np.linalg.norm(p - a, axis=1)
            assert np.all(np.abs(lengths - m.L) <= 1e-12)


# --- Jacobians ---------------------------------------------------------------------------


def test_orthoglide_jacobians_at_origin_plus_branch():
    m = MachineModel.orthoglide(branch_signs=(1, 1, 1))
    jp = jacobian_pair(m, Pose(0, 0, 0))
    np.testing.assert_array_equal(jp.A, -np.eye(3))
    assert jp.eta == (-1.0, -1.0, -1.0)
    assert singularity_margins(m, Pose(0, 0, 0)) == pytest.approx((-1.0, -1.0), abs=1e-15)


def test_orthoglide_jacobians_at_origin_default_branch():
    jp = jacobian_pair(ORTHO, Pose(0, 0, 0))
    np.testing.assert_array_equal(jp.A, np.eye(3))
    assert jp.eta == (1.0, 1.0, 1.0)


def test_uranesx_etas_equal_at_origin():
    m = uranesx()
    eta = jacobian_pair(m, Pose(0, 0, 0)).eta
    expected = -math.sqrt(1 - (7 / 13 - 3 / 26) ** 2)
    np.testing.assert_allclose(eta, expected, atol=1e-15)


def test_row_norms_and_eta_bounds(machine):
    rng = np.random.default_rng(2)
    for p in random_reachable(machine, rng, 1000):
        jp = jacobian_pair(machine, p)
        assert np.all(np.abs(np.linalg.norm(jp.A, axis=1) - machine.L) <= 1e-12)
        assert np.all(np.abs(jp.eta) <= machine.L + 1e-15)


def test_serial_singularity_at_reach_boundary():
    for y in (0.9, 0.99, 0.999999):
        _, det_b = singularity_margins(ORTHO, Pose(0.0, y, 0.0))
        assert abs(det_b) <= math.sqrt(1 - y * y) + 1e-15


def test_uranesx_no_parallel_singularity_on_grid():
    for lam in (0.0, 0.2):
        m = uranesx(lam)
        g = np.linspace(-0.4, 0.4, 41)
        seen = 0
        for x in g:
            for y in g:
                try:
                    det_a, _ = singularity_margins(m, (x, y))
                except OutsideReachableDomain:
                    continue
                seen += 1
                assert abs(det_a) > 1e-3
        assert seen > 1000


# --- transmission factors --------------------------------------------------------------


def test_isotropy_at_origin():
    tf = transmission_factors(ORTHO, Pose(0, 0, 0))
    assert max(abs(p - 1.0) for p in tf.psi) <= 1e-12


def test_reference_cube_centre_is_dextrous():
    tf = transmission_factors(ORTHO, Pose(0.086, 0.086, 0.086))
    assert tf.within(0.5, 2.0)


def test_companion_oracle_agreement(machine):
    rng = np.random.default_rng(9)
    for p in random_reachable(machine, rng, 300):
        sigma_ref, imag = companion_sigmas(machine, p)
        assert imag <= 1e-10 * max(1.0, sigma_ref.max())
        psi = np.array(transmission_factors(machine, p).psi)
        assert np.all(np.abs(psi - np.sqrt(np.maximum(sigma_ref, 0))) <= 1e-9 * max(1.0, psi.max()))


def test_eigenvalues_nonnegative_and_sorted(machine):
    rng = np.random.default_rng(4)
    psi = transmission_factors_batch(machine, random_reachable(machine, rng, 1000))
    assert np.all(psi >= 0)
    assert np.all(np.diff(psi, axis=1) >= 0)


def test_batch_matches_scalar(machine):
    rng = np.random.default_rng(8)
    P = random_reachable(machine, rng, 100)
    batch = transmission_factors_batch(machine, P)
    for p, row in zip(P, batch):
        ref = np.array(transmission_factors(machine, p).psi)
        assert np.all(np.abs(row - ref) <= 1e-10 * max(1.0, ref.max()))


def test_batch_marks_unreachable_nan():
    psi = transmission_factors_batch(ORTHO, [[0.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    assert np.all(np.isfinite(psi[0])) and np.all(np.isnan(psi[1]))


def test_singular_configuration_raises():
    # on the diagonal det(A) = (r - t)^2 (r + 2t) with r = sqrt(1 - 2t^2): zero at t = 1/sqrt(3)
    t = 1 / math.sqrt(3)
    with pytest.raises(SingularConfiguration):
        transmission_factors(ORTHO, Pose(t, t, t))
    assert np.all(np.isnan(transmission_factors_batch(ORTHO, [[t, t, t]])))


def test_determinant_identity(machine):
    rng = np.random.default_rng(12)
    for p in random_reachable(machine, rng, 300):
        sigma = rng.uniform(0, 5)
        jp = jacobian_pair(machine, p)
        J = np.linalg.solve(jp.A, jp.B)
        det_a = np.linalg.det(jp.A)
        lhs = np.linalg.det(J @ J.T - sigma * np.eye(3)) * det_a**2
        assert abs(lhs - generalized_det(machine, p, sigma)) <= 1e-9 * max(1.0, det_a**2)


def test_uranesx_z_invariance():
    m = uranesx(0.1)
    rng = np.random.default_rng(1)
    for x, y in rng.uniform(-0.3, 0.3, size=(100, 2)):
        ref = transmission_factors(m, Pose(x, y, 0.0)).psi
        for z in (-0.5, 0.5):
            assert max(abs(a - b) for a, b in zip(transmission_factors(m, Pose(x, y, z)).psi, ref)) <= 1e-12


# --- interval characteristic polynomial ---------------------------------------------------


def test_char_poly_zero_at_isotropic_point():
    enc = interval_char_poly_value(ORTHO, Box.from_bounds([(0, 0)] * 3), 1.0)
    assert enc.contains_zero()


def test_char_poly_value_at_origin_sigma_four():
    enc = interval_char_poly_value(ORTHO, Box.from_bounds([(0, 0)] * 3), 4.0)
    # B B^T - 4 A A^T = -3 I at the origin
    assert enc.contains(-27.0)
    assert not enc.contains_zero()


def test_char_poly_contains_point_values(machine):
    rng = np.random.default_rng(6)
    for c in random_reachable(machine, rng, 40, margin=0.2):
        c = c[: machine.dim]
        box = Box.cube(c, 0.02)
        for form in ("natural", "centered"):
            enc = interval_char_poly_value(machine, box, 2.5, form=form)
            for p in rng.uniform(c - 0.02, c + 0.02, size=(30, machine.dim)):
                v = generalized_det(machine, np.append(p, 0.0)[:3], 2.5)
                assert enc.lo - 1e-12 <= v <= enc.hi + 1e-12


def test_char_poly_inclusion_isotone():
    rng = np.random.default_rng(10)
    for c in random_reachable(ORTHO, rng, 30, margin=0.3):
        outer = Box.cube(c, 0.05)
        inner = Box.cube(c + rng.uniform(-0.02, 0.02, 3), 0.02)
        assert interval_char_poly_value(ORTHO, inner, 0.25).subset_of(interval_char_poly_value(ORTHO, outer, 0.25))


def test_char_poly_outside_reach():
    with pytest.raises(OutsideReachableDomain):
        interval_char_poly_value(ORTHO, Box.from_bounds([(1.5, 2), (1.5, 2), (0, 0)]), 1.0)
