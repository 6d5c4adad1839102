import numpy as np
import pytest
from hypothesis import given, strategies as st

from nekhlab.domain import ActionAngleState, DomainSpec, make_rng
from nekhlab.errors import DivergenceError, DomainError, HypothesisError, ParameterError
from nekhlab.fourier import FourierGenFunction, vectorfield_norm
from nekhlab.genmap import (ImplicitMap, NearIdentityTransform, apply_inverse, apply_map,
                            apply_transform, apply_transform_inverse, compose_check,
                            conjugate_genfun, symplectic_defect)
from nekhlab.poly import PolyCoeff
from nekhlab.problems import (nf_problem_1d, nf_problem_2d, shipped_maps, shipped_transforms,
                              standard_map, standard_map_closed, twist_F0)

angles = st.floats(0.0, 2 * np.pi, exclude_max=True)


def _pair(obj, inverse=False):
    f = obj.backward if inverse else obj.forward

    def g(x, y):
        a, b, _ = f(x[None, :], y[None, :])
        return a[0], b[0]
    return g


def _angle_err(a, b):
    return np.max(np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))))


def test_integrable_map():
    dom = DomainSpec(((0.5, 1.5), (0.5, 1.5)), 0.1, 1.0)
    m = ImplicitMap(FourierGenFunction.zero(dom, 4).replace(F0=twist_F0(0.7, dom, 4)))
    s = ActionAngleState([1.0, 1.2], [0.3, 6.0])
    out = apply_map(m, s)
    np.testing.assert_array_equal(out.actions, s.actions)
    assert _angle_err(out.angles, s.angles + 0.7 * s.actions) < 1e-15
    back = apply_inverse(m, s)
    assert _angle_err(back.angles, s.angles - 0.7 * s.actions) < 1e-15
    assert m.forward(s.actions, s.angles)[2] == 0


@given(st.floats(-5, 5), angles, st.floats(1e-4, 0.1))
def test_standard_map_closed_form(x, y, eps):
    m = standard_map(eps)
    xh, yh, it = m.forward([[x]], [[y]])
    xe, ye = standard_map_closed(eps, x, y)
    assert it <= 1
    assert abs(xh[0, 0] - xe) <= 1e-14 * max(1, abs(xe))
    assert abs(yh[0, 0] - ye) <= 1e-14 * max(1, abs(ye))


@given(st.floats(-5, 5), angles)
def test_standard_map_inverse(x, y):
    eps = 1e-2
    m = standard_map(eps)
    # algebraic inverse: y = y' - x', x = x' - eps sin y
    y0 = y - x
    x0 = x - eps * np.sin(y0)
    a, b, _ = m.backward([[x]], [[y]])
    assert abs(a[0, 0] - x0) < 1e-12 and abs(b[0, 0] - y0) < 1e-12


def test_round_trip_random_states():
    rng = make_rng(3)
    for name, m, box in shipped_maps():
        dom = DomainSpec(box)
        x = dom.sample(rng, 1000)
        y = rng.uniform(0, 2 * np.pi, x.shape)
        xh, yh, _ = m.forward(x, y)
        x2, y2, _ = m.backward(xh, yh)
        assert np.max(np.abs(x2 - x)) <= 10 * m.tol, name
        assert _angle_err(y2, y) <= 10 * m.tol, name


def test_shipped_maps_symplectic():
    rng = make_rng(5)
    for name, m, box in shipped_maps():
        dom = DomainSpec(box)
        for x in dom.sample(rng, 5):
            y = rng.uniform(0, 2 * np.pi, x.size)
            assert symplectic_defect(_pair(m), x, y) <= 1e-6, name
            assert symplectic_defect(_pair(m, True), x, y) <= 1e-6, name


def test_shipped_transforms_symplectic():
    rng = make_rng(6)
    for name, t, box in shipped_transforms():
        dom = DomainSpec(box)
        for x in dom.sample(rng, 5):
            y = rng.uniform(0, 2 * np.pi, x.size)
            assert symplectic_defect(_pair(t), x, y) <= 1e-6, name
            assert symplectic_defect(_pair(t, True), x, y) <= 1e-6, name


def test_nonsymplectic_map_detected():
    assert symplectic_defect(lambda x, y: (2 * x, y), np.array([1.0]), np.array([0.0])) > 0.5


def test_zero_transform_is_identity():
    dom = DomainSpec(((0.5, 1.5),), 0.1, 1.0)
    t = NearIdentityTransform.identity(dom)
    s = ActionAngleState([0.9], [2.0])
    out = apply_transform(t, s)
    np.testing.assert_array_equal(out.actions, s.actions)
    np.testing.assert_array_equal(out.angles, s.angles)
    np.testing.assert_array_equal(apply_transform_inverse(t, s).actions, s.actions)


@given(st.floats(0.6, 1.4), angles)
def test_sine_transform_explicit(a, phi):
    eps = 1e-3
    dom = DomainSpec(((0.5, 1.5),), 0.1, 1.0)
    t = NearIdentityTransform(FourierGenFunction.trig(dom, 3, [((1,), eps, "sin")]))
    x, y, _ = t.forward([[a]], [[phi]])
    assert abs(x[0, 0] - (a + eps * np.cos(phi))) < 1e-15
    assert y[0, 0] == phi


def test_transform_contraction_count():
    name, t, box = shipped_transforms()[1]
    norm = vectorfield_norm(t.chi, c=1.0)
    # hypothesis bound hat_delta/2 is twice the norm
    tt = NearIdentityTransform(t.chi, delta=(4 * norm, 4 * norm))
    rng = make_rng(9)
    x = DomainSpec(box).sample(rng, 200)
    y = rng.uniform(0, 2 * np.pi, x.shape)
    for f in (tt.forward, tt.backward):
        _, _, it = f(x, y)
        assert it <= 40


def test_contraction_hypothesis_refused():
    _, t, _ = shipped_transforms()[0]
    norm = vectorfield_norm(t.chi, c=1.0)
    with pytest.raises(HypothesisError) as e:
        NearIdentityTransform(t.chi, delta=(norm, norm))
    assert "<=" in str(e.value)


def test_map_guards():
    m = standard_map(1e-3, box=(-1.0, 1.0), delta=(0.05, 0.5))
    with pytest.raises(DomainError):
        m.forward([[0.99]], [[0.0]])
    with pytest.raises(ParameterError):
        m.forward([[0.0, 0.0]], [[0.0]])
    with pytest.raises(ParameterError):
        standard_map(1e-3, tol=0.0)


def test_divergence_reported():
    dom = DomainSpec(((-1.0, 1.0),), 0.1, 1.0)
    amp = PolyCoeff.from_terms({(1,): 5.0}, [0.0], 3)
    F = FourierGenFunction.trig(dom, 3, [((1,), amp, "cos")], F0=twist_F0(1.0, dom, 3))
    with pytest.raises(DivergenceError):
        ImplicitMap(F, check_domain=False, max_iter=20).forward([[0.5]], [[1.0]])


def _chi(dom, eps):
    c = dom.center
    n = dom.n
    amp = PolyCoeff.from_terms({(0,) * n: eps, (1,) + (0,) * (n - 1): eps}, c, 6)
    e1 = (1,) + (0,) * (n - 1)
    e2 = tuple(1 for _ in range(n))
    return FourierGenFunction.trig(dom, 6, [(e1, amp, "sin"), (e2, 0.5 * eps, "cos")], K_rep=6)


def _states(dom, count, seed):
    rng = make_rng(seed)
    x = dom.sample(rng, count)
    return x, rng.uniform(0, 2 * np.pi, x.shape)


def test_conjugation_by_identity():
    F = nf_problem_1d(eps=1e-4).F
    chi = FourierGenFunction.zero(F.dom, 6, 6)
    Ft = conjugate_genfun(F, chi)
    x, y = _states(F.dom, 100, 1)
    assert np.max(np.abs(Ft(x, y) - F(x, y))) < 1e-12


@pytest.mark.parametrize("make", [nf_problem_1d, nf_problem_2d])
def test_conjugated_twist_two_path(make):
    P = make(eps=1e-4)
    F = P.F.replace(keys=P.F.keys[:0], coef=P.F.coef[:0])
    chi = _chi(F.dom, 1e-5)
    Ft = conjugate_genfun(F, chi)
    x, y = _states(F.dom, 200, 2)
    assert compose_check(F, chi, Ft, x, y) <= 1e-8


@pytest.mark.parametrize("make", [nf_problem_1d, nf_problem_2d])
def test_conjugated_map_two_path(make):
    F = make(eps=1e-4).F
    chi = _chi(F.dom, 1e-5)
    Ft, rep = conjugate_genfun(F, chi, return_report=True)
    assert rep.fit_residual <= 1e-8
    assert Ft.is_real()
    x, y = _states(F.dom, 200, 3)
    assert compose_check(F, chi, Ft, x, y) <= 1e-7


def test_conjugation_needs_nodes():
    F = nf_problem_1d().F
    with pytest.raises(ParameterError):
        conjugate_genfun(F, _chi(F.dom, 1e-5), angle_nodes=4)
