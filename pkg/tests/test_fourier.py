import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_fourier
from nekhlab.domain import DomainSpec, make_rng
from nekhlab.errors import ParameterError
from nekhlab.fourier import (FourierGenFunction, cauchy_check, sampled_sup, tail_check,
                             vectorfield_norm, weighted_norm)
from nekhlab.lattice import Lattice
from nekhlab.poly import PolyCoeff

seeds = st.integers(0, 10_000)
DOM1 = DomainSpec(((0.5, 1.5),), 0.1, 1.0)


def cos_y(eps=1.0, dom=DOM1):
    return FourierGenFunction.trig(dom, 3, [((1,), eps, "cos")])


def test_weighted_norm_constant():
    f = FourierGenFunction.trig(DOM1, 3, [((0,), -2.5, "cos")])
    assert weighted_norm(f) == 2.5


def test_weighted_norm_cos():
    assert weighted_norm(cos_y()) == pytest.approx(np.e, rel=1e-15)


@given(seeds)
def test_sup_below_weighted_norm(seed):
    f = random_fourier(seed, n=2)
    assert sampled_sup(f, samples=1000, rng=make_rng(seed)) <= weighted_norm(f) * (1 + 1e-12)


def test_vectorfield_norm_cases():
    assert vectorfield_norm(FourierGenFunction.zero(DOM1, 3)) == 0.0
    eps = 1e-3
    assert vectorfield_norm(cos_y(eps), c=1.0) == pytest.approx(eps * np.e, rel=1e-14)
    with pytest.raises(ParameterError):
        vectorfield_norm(cos_y(), c=0.0)


@given(seeds, st.floats(0.01, 100.0))
def test_vectorfield_norm_homogeneous(seed, lam):
    f = random_fourier(seed, n=2)
    assert vectorfield_norm(lam * f, c=0.3) == pytest.approx(lam * vectorfield_norm(f, c=0.3), rel=1e-12)


def test_angle_derivative_of_cos():
    _, (dth,) = cos_y().partials()
    # -sin y = (i/2) e^{iy} - (i/2) e^{-iy}
    assert dth.mode((1,)).coeffs[0] == pytest.approx(0.5j)
    assert dth.mode((-1,)).coeffs[0] == pytest.approx(-0.5j)
    y = np.linspace(0, 6, 7)[:, None]
    np.testing.assert_allclose(dth(np.ones_like(y), y).real, -np.sin(y[:, 0]), atol=1e-15)


def test_action_derivative_of_square():
    dom = DomainSpec(((-1.0, 1.0),), 0.1, 1.0)
    amp = PolyCoeff.from_terms({(2,): 1.0}, [0.0], 3)
    f = FourierGenFunction.trig(dom, 3, [((1,), amp, "cos")])
    (dI,), _ = f.partials()
    two_x = PolyCoeff.from_terms({(1,): 1.0}, [0.0], 3)
    for k in [(1,), (-1,)]:
        np.testing.assert_allclose(dI.mode(k).coeffs, two_x.coeffs)


@given(seeds)
def test_mixed_partials_commute(seed):
    f = random_fourier(seed, n=2)
    for i in range(2):
        for j in range(2):
            a = f.d_action(i).d_angle(j)
            b = f.d_angle(j).d_action(i)
            np.testing.assert_allclose(a.coef, b.coef, atol=1e-15)


@given(seeds)
def test_partials_match_pointwise_gradients(seed):
    f = random_fourier(seed, n=2)
    rng = make_rng(seed)
    x = f.dom.sample(rng, 20)
    y = rng.uniform(0, 2 * np.pi, (20, 2))
    dI, dth = f.partials()
    gI = f.grad_action(x, y)
    gth = f.grad_angle(x, y)
    for j in range(2):
        np.testing.assert_allclose(dI[j](x, y), gI[:, j], atol=1e-14)
        np.testing.assert_allclose(dth[j](x, y), gth[:, j], atol=1e-14)


def test_projection_example():
    dom = DomainSpec(((0.5, 1.5), (0.5, 1.5)), 0.1, 1.0)
    f = FourierGenFunction.trig(dom, 2, [((1, 0), 1.0, "sin"), ((1, 1), 1.0, "sin")])
    M = Lattice([[1, 0]])
    res = f.project_resonant(M, 2)
    non = f.project_nonresonant(M, 2)
    assert sorted(map(tuple, res.keys)) == [(-1, 0), (1, 0)]
    assert sorted(map(tuple, non.keys)) == [(-1, -1), (1, 1)]
    assert f.project_tail(2).keys.shape[0] == 0
    assert f.project_nonresonant(Lattice.full(2), 2).keys.shape[0] == 0


@given(seeds, st.integers(0, 4))
def test_projections_partition(seed, K):
    f = random_fourier(seed, n=2).perturbation()
    M = Lattice([[1, -1]])
    parts = f.project_resonant(M, K) + f.project_nonresonant(M, K) + f.project_tail(K)
    assert (parts - f).dropzeros().keys.shape[0] == 0


def test_negative_K_rejected():
    with pytest.raises(ParameterError):
        cos_y().project_tail(-1)


@given(seeds)
def test_reality_preserved(seed):
    f = random_fourier(seed, n=2)
    assert f.is_real()
    assert (f + 2.0 * f).is_real()
    assert f.d_action(0).is_real() and f.d_angle(1).is_real()
    x = f.dom.sample(make_rng(seed), 10)
    assert np.max(np.abs(f(x, x).imag)) < 1e-15


def test_duplicate_keys_rejected():
    F0 = PolyCoeff.zero([1.0], 2)
    with pytest.raises(ParameterError):
        FourierGenFunction(F0, [[1], [1]], np.zeros((2, 3)), 1, DOM1)
    with pytest.raises(ParameterError):
        FourierGenFunction(F0, [[3]], np.zeros((1, 3)), 1, DOM1)


@given(seeds, seeds)
def test_product_pointwise(s1, s2):
    f = random_fourier(s1, n=1, modes=3, K=3, degree=4)
    g = random_fourier(s2, n=1, modes=3, K=3, degree=4)
    h, dropped = f.multiply(g)
    rng = make_rng(s1)
    x = f.dom.sample(rng, 20)
    y = rng.uniform(0, 2 * np.pi, (20, 1))
    err = np.abs(h(x, y) - f.eval_perturbation(x, y) * g.eval_perturbation(x, y))
    assert np.max(err) <= dropped + 1e-15


@given(seeds)
def test_text_roundtrip(seed):
    f = random_fourier(seed, n=2)
    g = FourierGenFunction.from_text(f.to_text())
    np.testing.assert_array_equal(g.keys, f.keys)
    np.testing.assert_array_equal(g.coef, f.coef)
    assert g.dom == f.dom and g.K_rep == f.K_rep


def test_cauchy_cos():
    eps = 1e-3
    r = cauchy_check(cos_y(eps), DOM1, (0.05, 0.5), 1.0)
    assert r.passed
    assert r.lhs == pytest.approx(eps * np.exp(0.5), rel=1e-14)
    assert r.rhs == pytest.approx(eps * np.e / 0.05, rel=1e-14)
    assert cauchy_check(FourierGenFunction.zero(DOM1), DOM1, (0.05, 0.5), 1.0).lhs == 0.0


@given(seeds, st.floats(0.01, 0.09), st.floats(0.05, 0.95), st.floats(0.05, 5.0))
def test_cauchy_random(seed, d1, d2, c):
    f = random_fourier(seed, n=2, modes=20, K=6)
    assert cauchy_check(f, f.dom, (d1, d2), c).passed


@given(seeds, st.floats(0.05, 0.95), st.integers(0, 5))
def test_tail_random(seed, d2, K):
    f = random_fourier(seed, n=2, modes=20, K=6)
    assert tail_check(f, f.dom, (0.05, d2), 0.5, K).passed


def test_cauchy_rejects_delta():
    with pytest.raises(ParameterError):
        cauchy_check(cos_y(), DOM1, (0.2, 0.5), 1.0)
