import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbs import catalog
from gibbs import models as M
from gibbs.lie import GalileanAlgebraElement
from gibbs.mechanics import (
    FlowSpec,
    angular_momentum,
    conserved_drift,
    energy,
    flow_invariance_test,
    integrate_flow,
    linear_momentum,
    period,
    rotate_points,
    step_jacobian,
)


def _spring(steps, stiffness=1.0, mass=1.0):
    return FlowSpec("central_spring", dt=1e-3 * period(stiffness, mass), steps=steps, stiffness=stiffness)


def test_free_flow_straight_line():
    q0, p0, m = np.array([[0.1, 0.2, 0.3]]), np.array([[1.0, -2.0, 0.5]]), np.array([2.0])
    spec = FlowSpec("free", dt=0.01, steps=500)
    tr = integrate_flow(spec, q0, p0, m)
    assert np.all(tr.p == p0)
    assert np.allclose(tr.q[-1], q0 + 5.0 * p0 / 2.0, atol=1e-12)
    assert conserved_drift(tr, linear_momentum) == 0.0


def test_free_flow_periodic_wrap():
    spec = FlowSpec("free", dt=1.0, steps=3, box=1.0)
    tr = integrate_flow(spec, np.array([[0.5, 0.5, 0.5]]), np.array([[0.7, -0.3, 2.0]]), np.ones(1))
    assert np.all((tr.q >= 0) & (tr.q < 1.0))
    assert np.allclose(tr.q[-1], [[0.6, 0.6, 0.5]], atol=1e-12)


def test_gravity_flow_parabola():
    spec = FlowSpec("gravity", dt=1e-2, steps=100, gravity=9.81)
    tr = integrate_flow(spec, np.zeros((1, 3)), np.array([[0.0, 0.0, 3.0]]), np.array([1.5]))
    t = tr.times[-1]
    assert tr.q[-1, 0, 2] == pytest.approx(3.0 / 1.5 * t - 0.5 * 9.81 * t * t, rel=1e-12)
    assert tr.p[-1, 0, 2] == pytest.approx(3.0 - 1.5 * 9.81 * t, rel=1e-12)


def test_spring_follows_closed_form_solution():
    k, m = 2.0, 0.5
    spec = _spring(2000, k, m)
    tr = integrate_flow(spec, np.array([[1.0, 0.0, 0.0]]), np.zeros((1, 3)), np.array([m]))
    w = math.sqrt(k / m)
    assert np.allclose(tr.q[:, 0, 0], np.cos(w * tr.times), atol=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["free", "gravity", "central_spring"]))
def test_time_reversibility(seed, kind):
    rng = np.random.default_rng(seed)
    q0, p0 = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    m = rng.uniform(0.5, 2.0, 3)
    spec = FlowSpec(kind, dt=1e-2, steps=300, stiffness=rng.uniform(0.5, 2.0, 3))
    fwd = integrate_flow(spec, q0, p0, m, None)
    back = integrate_flow(spec, fwd.q[-1], -fwd.p[-1], m, None)
    assert np.allclose(back.q[-1], q0, atol=1e-10, rtol=0)
    assert np.allclose(-back.p[-1], p0, atol=1e-10, rtol=0)


def test_spring_secular_energy_drift():
    # sampled once per period so the bounded O(dt^2) oscillation of the
    # leapfrog energy cancels and only secular drift remains
    spec = _spring(10_000)
    tr = integrate_flow(spec, np.array([[1.0, 0.3, -0.2]]), np.array([[0.0, 0.8, 0.1]]), np.ones(1), 1000)
    e = energy(spec, tr.q, tr.p, np.ones(1))
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-8


@pytest.mark.xfail(strict=True, reason="leapfrog energy oscillates by O(dt^2) ~ 5e-6 within each period")
def test_spring_max_energy_deviation_every_step():
    spec = _spring(10_000)
    tr = integrate_flow(spec, np.array([[1.0, 0.3, -0.2]]), np.array([[0.0, 0.8, 0.1]]), np.ones(1))
    drift = conserved_drift(tr, lambda q, p: energy(spec, q, p, np.ones(1)))
    assert drift / float(energy(spec, tr.q[0], tr.p[0], np.ones(1))) < 1e-8


def test_energy_oscillation_is_bounded_and_second_order():
    devs = []
    for scale in (1e-3, 5e-4):
        spec = FlowSpec("central_spring", dt=scale * period(1.0), steps=int(2 / scale))
        tr = integrate_flow(spec, np.array([[1.0, 0, 0]]), np.zeros((1, 3)), np.ones(1))
        devs.append(conserved_drift(tr, lambda q, p, s=spec: energy(s, q, p, np.ones(1))) / 0.5)
    assert devs[0] < 1e-5
    assert devs[0] / devs[1] == pytest.approx(4.0, rel=0.05)


def test_angular_momentum_conserved_under_central_force():
    rng = np.random.default_rng(3)
    q0, p0 = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    spec = _spring(10_000, stiffness=1.3)
    tr = integrate_flow(spec, q0, p0, rng.uniform(0.5, 2, 4))
    assert conserved_drift(tr, angular_momentum) < 1e-9


def test_angular_momentum_not_conserved_under_gravity():
    spec = FlowSpec("gravity", dt=1e-2, steps=100)
    tr = integrate_flow(spec, np.array([[1.0, 0, 0]]), np.zeros((1, 3)), np.ones(1))
    assert conserved_drift(tr, angular_momentum) > 1e-3


def test_vertical_angular_momentum_conserved_under_gravity():
    rng = np.random.default_rng(4)
    spec = FlowSpec("gravity", dt=1e-2, steps=1000)
    tr = integrate_flow(spec, rng.normal(size=(2, 3)), rng.normal(size=(2, 3)), np.ones(2))
    assert conserved_drift(tr, lambda q, p: angular_momentum(q, p)[..., 2]) < 1e-12


@pytest.mark.parametrize("kind", ["free", "gravity", "central_spring"])
def test_step_preserves_phase_volume(kind):
    spec = FlowSpec(kind, dt=0.05, stiffness=1.7)
    jac = step_jacobian(spec, np.array([[0.3, -0.4]]), np.array([[0.9, 0.2]]), np.array([1.3]))
    assert jac.shape == (4, 4)
    assert abs(np.linalg.det(jac) - 1.0) < 1e-8


def test_centrifuge_frame_step_preserves_volume():
    frame = GalileanAlgebraElement([0, 0, 1.0], np.zeros(3), np.zeros(3), -1.0)
    spec = FlowSpec("centrifuge_frame", dt=0.02, frame=frame)
    jac = step_jacobian(spec, np.array([[0.3, -0.4, 0.2]]), np.array([[0.1, 0.2, 0.0]]), np.array([1.0]))
    assert abs(np.linalg.det(jac) - 1.0) < 1e-8


def test_flowspec_validation():
    with pytest.raises(ValueError, match="non-separable"):
        FlowSpec("relativistic")
    with pytest.raises(ValueError):
        FlowSpec("free", dt=0.0)
    with pytest.raises(ValueError):
        FlowSpec("free", steps=0)
    with pytest.raises(ValueError):
        FlowSpec("centrifuge_frame")


def test_integrate_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        integrate_flow(FlowSpec("free"), np.zeros((2, 3)), np.zeros((2, 3)), np.ones(3))


def test_trajectory_csv():
    tr = integrate_flow(FlowSpec("free", dt=0.5, steps=2), np.zeros((1, 3)), np.ones((1, 3)), np.ones(1))
    out = io.StringIO()
    tr.write_csv(out)
    lines = out.getvalue().splitlines()
    assert len(lines) == 1 + len(tr) and lines[0].startswith("t,")
    assert np.all(np.diff(tr.times) > 0)


def test_conserved_drift_rejects_empty():
    tr = integrate_flow(FlowSpec("free"), np.zeros((1, 3)), np.zeros((1, 3)), np.ones(1))
    tr.times, tr.q, tr.p = tr.times[:0], tr.q[:0], tr.p[:0]
    with pytest.raises(ValueError):
        conserved_drift(tr, linear_momentum)


# invariance of Gibbs states under the flow


def test_ideal_gas_invariant_under_free_flow():
    model = catalog.ideal_gas_model(M.IdealGasSpec(1.0, (1.0, 2.0)))
    assert flow_invariance_test(model, 1.0, horizon=10.0, n=20_000, seed=1) > 0.01


def test_solid_invariant_under_spring_flow():
    model = catalog.solid_model(M.SolidSpec((1.0, 1.5)))
    assert flow_invariance_test(model, 1.2, horizon=2.0, n=20_000, seed=2) > 0.01


def test_sphere_invariant_under_rotation_about_b():
    model = catalog.sphere_model(M.SphereSpec(1.0))
    b = np.array([0.0, 1.2, 0.9])
    assert flow_invariance_test(model, b, horizon=1.0 / np.linalg.norm(b), n=20_000, seed=3) > 0.01


def test_sphere_orthogonal_rotation_control_fails():
    model = catalog.sphere_model(M.SphereSpec(1.0))
    b = np.array([0.0, 0.0, 1.5])

    def tilt(points, bv, tau):
        return rotate_points(points, [1.0, 0.0, 0.0], 1.0)

    assert flow_invariance_test(model, b, n=20_000, seed=4, transport=tilt) < 1e-3


def test_invariance_detects_a_non_stationary_transport():
    model = catalog.ideal_gas_model(M.IdealGasSpec(1.0, (1.0,)))

    def squash(points, b, tau):
        out = points.copy()
        out[..., 0] = out[..., 0] ** 2
        return out

    assert flow_invariance_test(model, 1.0, n=20_000, seed=5, transport=squash) < 1e-3


def test_invariance_requires_flow():
    model = catalog.photon_gas_model(1.0, 1.0)
    with pytest.raises(ValueError):
        flow_invariance_test(model, 1.0)


def test_rotate_points_preserves_norm():
    pts = np.random.default_rng(0).normal(size=(100, 3))
    out = rotate_points(pts, [1, 1, 0], 0.7)
    assert np.allclose(np.linalg.norm(out, axis=-1), np.linalg.norm(pts, axis=-1))
    assert np.allclose(rotate_points(out, [1, 1, 0], -0.7), pts)
