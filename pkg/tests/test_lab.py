import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nekhlab.domain import ActionAngleState, DomainSpec, FrequencyMap, make_rng
from nekhlab.errors import HypothesisError, ParameterError
from nekhlab.fourier import FourierGenFunction
from nekhlab.genmap import symplectic_defect
from nekhlab.geometry import Schedule
from nekhlab.lab import (DriftRecord, checkpoints, confinement_diagnostic, drift_experiment,
                         max_jump, orbit, scaling_fit, small_twist_map, theorem1_bounds)
from nekhlab.problems import standard_map, standard_map_closed, system, twist_F0


@pytest.mark.parametrize("n,b", [(1, 8), (2, 16), (3, 28)])
def test_exponent_b(n, b):
    assert theorem1_bounds(n, 1.0, 1.0, 0.1, 1.0, 1e-20).b == b


def test_one_dim_constants():
    B = theorem1_bounds(1, 1.0, 1.0, 0.1, 1.0, 1e-20)
    assert B.c0 == pytest.approx(4 / 3, rel=1e-15)
    assert B.epsilon0 == pytest.approx(1e-4 / (np.pi ** 2 * 51 ** 2 * 16), rel=1e-14)
    assert B.epsilon0 == pytest.approx(2.4347e-10, rel=1e-4)
    assert B.T0 == pytest.approx(3.90625e-4, rel=1e-15)
    assert B.c1 == pytest.approx(1 / 24)
    assert B.Delta == pytest.approx(4 / 3 * 1e-20 ** (1 / 8))
    assert B.admissible


def test_bounds_errors():
    with pytest.raises(HypothesisError):
        theorem1_bounds(1, 1.0, 1.0, 0.3, 1.0, 1e-12)
    with pytest.raises(ParameterError):
        theorem1_bounds(1, 2.0, 1.0, 0.1, 1.0, 1e-12)
    assert not theorem1_bounds(1, 1.0, 1.0, 0.1, 1.0, 1e-3).admissible


def test_huge_time_reported_in_log():
    B = theorem1_bounds(2, 1.0, 1.0, 0.2, 1.0, 1e-300)
    assert B.T == math.inf and np.isfinite(B.log_T)


@given(st.floats(0.05, 1.0), st.floats(-3, 3), st.floats(0, 6.28))
def test_small_twist_standard_family(s, x, y):
    eps = 1e-3
    dom = DomainSpec(((-10.0, 10.0),), 0.1, 1.0)
    h = FourierGenFunction.trig(dom, 6, [((1,), eps, "cos")])
    m = small_twist_map(twist_F0(1.0, dom), h, s)
    xh, yh, _ = m.forward([[x]], [[y]])
    # s (x^2/2 + eps cos y): x' = x + s eps sin y, y' = y + s x'
    x1 = x + s * eps * np.sin(y)
    assert abs(xh[0, 0] - x1) < 1e-14 * max(1, abs(x1))
    assert abs(yh[0, 0] - (y + s * x1)) < 1e-13


def test_small_twist_unit_parameter_matches_map():
    dom = DomainSpec(((-10.0, 10.0),), 0.1, 1.0)
    h = FourierGenFunction.trig(dom, 6, [((1,), 1e-3, "cos")])
    a = small_twist_map(twist_F0(1.0, dom), h, 1.0).forward([[0.3]], [[1.1]])
    b = standard_map(1e-3).forward([[0.3]], [[1.1]])
    np.testing.assert_allclose(a[0], b[0], rtol=1e-15)
    with pytest.raises(ParameterError):
        small_twist_map(twist_F0(1.0, dom), h, 0.0)


def test_euler_harmonic_is_area_preserving_shear():
    S = system("harmonic1")
    h = 0.1
    q, p = S.step("symplectic-euler", h, np.array([0.0]), np.array([1.0]))
    # p' = p - h q, q' = q + h p'
    assert p[0] == pytest.approx(1.0) and q[0] == pytest.approx(h)
    J = np.column_stack([np.concatenate(S.step("symplectic-euler", h, *e))
                         for e in (([1.0], [0.0]), ([0.0], [1.0]))])
    assert np.linalg.det(J) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("method", ["symplectic-euler", "stormer-verlet", "yoshida4", "exact"])
@pytest.mark.parametrize("name", ["quartic1", "quartic2"])
def test_integrator_steps_symplectic(method, name):
    S = system(name)
    rng = make_rng(2)
    for _ in range(3):
        q, p = rng.uniform(0.5, 1.5, (2, S.n))
        d = symplectic_defect(lambda a, b: S.step(method, 0.05, a, b), q, p)
        assert d <= 1e-6


def test_verlet_reversible():
    S = system("quartic1")
    q, p = np.array([0.7]), np.array([-0.4])
    q1, p1 = S.step("stormer-verlet", 0.1, q, p)
    q2, p2 = S.step("stormer-verlet", -0.1, q1, p1)
    assert abs(q2[0] - q[0]) < 1e-12 and abs(p2[0] - p[0]) < 1e-12


@pytest.mark.parametrize("method,order", [("symplectic-euler", 1), ("stormer-verlet", 2), ("yoshida4", 4)])
def test_local_error_order(method, order):
    S = system("quartic1")
    I0, th = np.array([1.0]), np.array([0.3])
    q0, p0 = S.to_cartesian(I0, th)
    errs = []
    hs = [0.02, 0.01]
    for h in hs:
        q, p = S.step(method, h, q0, p0)
        qe, pe = S.step("exact", h, q0, p0)
        errs.append(np.hypot(q - qe, p - pe)[0])
    rate = math.log(errs[0] / errs[1], 2)
    assert abs(rate - (order + 1)) < 0.3
    q, p = S.step(method, 1e-8, q0, p0)
    assert np.hypot(q - q0, p - p0)[0] < 1e-7


def test_chart_roundtrip():
    S = system("quartic2")
    I, th = np.array([0.4, 1.3]), np.array([6.0, 0.2])
    I2, th2 = S.from_cartesian(*S.to_cartesian(I, th))
    np.testing.assert_allclose(I2, I, rtol=1e-15)
    np.testing.assert_allclose(th2, th, rtol=1e-14)


def test_checkpoints():
    assert checkpoints(0) == []
    assert checkpoints(1) == [1]
    assert checkpoints(10) == [1, 2, 4, 8, 10]


def test_drift_zero_steps():
    recs = drift_experiment(system("quartic1"), "stormer-verlet", 0.1, 0, ActionAngleState([1.0], [0.3]))
    assert len(recs) == 1 and recs[0].max_dev == 0.0


def test_drift_exact_flow():
    recs = drift_experiment(system("quartic2"), "exact", 0.1, 100_000, ActionAngleState([1.0, 0.5], [0.3, 1.0]))
    assert max(r.max_dev for r in recs) <= 1e-10


def test_drift_monotone_and_box_exit():
    S = system("quartic1")
    recs = drift_experiment(S, "symplectic-euler", 0.05, 20_000, ActionAngleState([1.0], [0.3]))
    devs = [r.max_dev for r in recs]
    assert devs == sorted(devs) and all(r.event == "" for r in recs)
    box = DomainSpec(((0.99, 1.01),))
    recs = drift_experiment(S, "symplectic-euler", 0.5, 1000, ActionAngleState([1.0], [0.3]), box)
    assert recs[-1].event == "domain-exit" and recs[-1].steps < 1000


def test_drift_refuses_chart_origin():
    with pytest.raises(ParameterError):
        drift_experiment(system("quartic1"), "stormer-verlet", 0.1, 10, ActionAngleState([0.01], [0.0]))
    with pytest.raises(ParameterError):
        drift_experiment(system("quartic1"), "leapfrog", 0.1, 10, ActionAngleState([1.0], [0.0]))


def _synthetic(f):
    return [DriftRecord("s", "m", 2, h, 10, f(h), 0.0, 0.0) for h in (0.2, 0.1, 0.05, 0.025)]


def test_scaling_fit_synthetic():
    fit = scaling_fit(_synthetic(lambda h: h * h))
    assert fit.slope == pytest.approx(2.0) and fit.residual < 1e-12
    fit = scaling_fit(_synthetic(lambda h: 3 * h))
    assert fit.slope == pytest.approx(1.0) and fit.intercept == pytest.approx(math.log(3))
    with pytest.raises(ParameterError):
        scaling_fit(_synthetic(lambda h: h)[:2])


def test_scaling_envelope():
    B = theorem1_bounds(1, 1.0, 1.0, 0.1, 1.0, 1e-20)
    assert scaling_fit(_synthetic(lambda h: h * h), B).envelope_ok
    assert not scaling_fit(_synthetic(lambda h: 10.0), B).envelope_ok


def test_confinement_frozen_actions():
    S = Schedule.from_alpha1(0.05, 1, 3, beta=1.0)
    traj = np.full((50, 1), 2.5)
    assert confinement_diagnostic(traj, FrequencyMap.affine([[1.0]]), S) == []


def test_confinement_single_crossing():
    S = Schedule.from_alpha1(0.05, 1, 3, beta=1.0)
    # 3 x = 2 pi at x = 2.0944; zone half-width 0.05/3
    traj = np.array([[2.0], [2.02], [2.04], [2.0944], [2.0944]])
    ev = confinement_diagnostic(traj, FrequencyMap.affine([[1.0]]), S)
    assert len(ev) == 1 and ev[0].step == 3
    assert ev[0].old.r == 0 and ev[0].new.r == 1


def test_standard_map_orbit_confined():
    eps = 1e-4
    xs, ys = orbit(standard_map(eps), [2.5], [0.4], 20_000)
    S = Schedule.from_alpha1(0.05, 1, 3, beta=1.0)
    assert confinement_diagnostic(xs, FrequencyMap.affine([[1.0]]), S) == []
    assert max_jump(xs) <= eps
    assert np.all((ys >= 0) & (ys < 2 * np.pi))
    x, y = 2.5, 0.4
    for _ in range(10):
        x, y = standard_map_closed(eps, x, y)
    assert abs(xs[10, 0] - x) < 1e-14
