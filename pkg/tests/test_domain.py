import numpy as np
import pytest
from hypothesis import given, strategies as st

from nekhlab.domain import (ActionAngleState, DomainSpec, FrequencyMap, lipschitz_probe, make_rng,
                            rescale, wrap)
from nekhlab.errors import ParameterError
from nekhlab.fourier import FourierGenFunction, weighted_norm
from nekhlab.problems import twist_F0

finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=4))
def test_state_angles_wrapped(th):
    s = ActionAngleState(np.zeros(len(th)), th)
    assert np.all(s.angles >= 0) and np.all(s.angles < 2 * np.pi)


@given(st.floats(-1e3, 1e3), st.integers(-50, 50))
def test_shift_by_full_turns_is_same_state(th, k):
    s = ActionAngleState([1.0], [th])
    d = s.shifted([k]).angles - s.angles
    assert abs(np.angle(np.exp(1j * d[0]))) < 1e-9


def test_wrap_tiny_negative():
    assert wrap(np.array([-1e-300]))[0] == 0.0


def test_state_rejects_bad_input():
    with pytest.raises(ParameterError):
        ActionAngleState([np.inf], [0.0])
    with pytest.raises(ParameterError):
        ActionAngleState([1.0, 2.0], [0.0])


def test_domain_validation():
    with pytest.raises(ParameterError):
        DomainSpec(((1.0, 0.0),))
    with pytest.raises(ParameterError):
        DomainSpec(((0.0, 1.0),), -0.1, 1.0)
    with pytest.raises(ParameterError):
        DomainSpec(())


def test_tube_samples_stay_within_rho1(rng):
    dom = DomainSpec(((0.0, 1.0), (2.0, 3.0)), 0.3, 1.0)
    z = dom.sample(rng, 500, complex_tube=True)
    assert np.all(dom.contains(z.real))
    assert np.all(np.linalg.norm(z.imag, axis=1) <= 0.3 + 1e-15)


@pytest.mark.parametrize("scale", [1.0, 2.0])
def test_lipschitz_probe_linear(scale):
    om = FrequencyMap.affine(scale * np.eye(2))
    m, M = lipschitz_probe(om, DomainSpec(((0, 1), (0, 1))), 200)
    assert abs(m - scale) < 1e-12 and abs(M - scale) < 1e-12


def test_lipschitz_probe_shear():
    A = np.array([[1.0, 0.1], [0.0, 1.0]])
    m, M = lipschitz_probe(FrequencyMap.affine(A), DomainSpec(((0, 1), (0, 1))), 300)
    # eigenvalues of A^T A from the characteristic polynomial
    tr, dt = 2.01, 1.0
    s = np.sqrt([(tr - np.sqrt(tr * tr - 4 * dt)) / 2, (tr + np.sqrt(tr * tr - 4 * dt)) / 2])
    assert abs(m - s[0]) < 1e-12 and abs(M - s[1]) < 1e-12
    assert round(m, 4) == 0.9512 and round(M, 4) == 1.0512


def test_lipschitz_probe_degenerate_box():
    with pytest.raises(ParameterError):
        lipschitz_probe(FrequencyMap.affine(np.eye(1)), DomainSpec(((1, 1),)), 10)


def test_bilipschitz_check(rng):
    dom = DomainSpec(((0, 1), (0, 1)), 0.1, 0.0)
    assert FrequencyMap.affine(np.diag([1.0, 2.0])).check_bilipschitz(dom, rng)
    wrong = FrequencyMap(lambda x: x @ np.diag([1.0, 2.0]), 1.5, 2.0)
    assert not wrong.check_bilipschitz(dom, rng)


def _quad(dom, eps=0.0):
    F0 = twist_F0(1.0, dom, 4)
    terms = [((1,), eps, "cos")] if eps else []
    return FourierGenFunction.trig(dom, 4, terms, F0=F0, K_rep=1)


def test_rescale_identity():
    dom = DomainSpec(((0.0, 2.0),), 0.1, 1.0)
    F = _quad(dom, 1e-3)
    G = rescale(F, 1.0)
    np.testing.assert_array_equal(G.coef, F.coef)
    np.testing.assert_array_equal(G.F0.coeffs, F.F0.coeffs)
    assert G.dom == F.dom


def test_rescale_doubles_quadratic():
    dom = DomainSpec(((0.0, 2.0),), 0.1, 1.0)
    G = rescale(_quad(dom), 2.0)
    x = np.linspace(0, 1, 11)[:, None]
    np.testing.assert_allclose(G(x, np.zeros_like(x)).real, x[:, 0] ** 2, atol=1e-13)
    assert G.dom.box == ((0.0, 1.0),)


@given(st.floats(0.1, 10.0), st.floats(-1.0, 3.0), st.floats(0.0, 6.3))
def test_rescale_pointwise(gamma, x, y):
    dom = DomainSpec(((0.0, 2.0),), 0.1, 1.0)
    F = _quad(dom, 1e-2)
    G = rescale(F, gamma)
    lhs = G(np.array([[x / gamma]]), np.array([[y]]))[0]
    rhs = F(np.array([[x]]), np.array([[y]]))[0] / gamma
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs))


def test_rescale_norm_scales():
    eps, gamma = 1e-3, 4.0
    F = _quad(DomainSpec(((0.0, 2.0),), 0.1, 1.0), eps)
    assert weighted_norm(rescale(F, gamma)) == pytest.approx(eps * np.e / gamma, rel=1e-14)


def test_rescale_rejects_gamma():
    F = _quad(DomainSpec(((0.0, 2.0),), 0.1, 1.0))
    for g in (0.0, -1.0):
        with pytest.raises(ParameterError):
            rescale(F, g)


def test_make_rng_reproducible():
    a = make_rng(7).uniform(size=5)
    b = make_rng(7).uniform(size=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, make_rng(8).uniform(size=5))
