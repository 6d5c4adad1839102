"""Shipped test problems: the standard map, two normal-form problems on
completely nonresonant boxes, integrable systems for the drift lab, and a
small family of maps for symplecticity checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DomainSpec, FrequencyMap, make_rng
from .fourier import FourierGenFunction
from .genmap import ImplicitMap, NearIdentityTransform
from .lab import IntegrableSystem, small_twist_map
from .lattice import Lattice
from .normalform import NormalFormParams
from .poly import PolyCoeff

DEGREE = 6


def twist_F0(beta, dom: DomainSpec, degree=DEGREE) -> PolyCoeff:
    """F0(x) = beta |x|^2 / 2 expanded around the box center."""
    c = dom.center
    n = c.size
    terms = {(0,) * n: 0.5 * beta * float(c @ c)}
    for j in range(n):
        e = [0] * n
        e[j] = 1
        terms[tuple(e)] = beta * c[j]
        e[j] = 2
        terms[tuple(e)] = 0.5 * beta
    return PolyCoeff.from_terms(terms, c, degree)


def standard_map(eps, box=(-10.0, 10.0), degree=DEGREE, **kw) -> ImplicitMap:
    """F = x^2/2 + eps cos y: x' = x + eps sin y, y' = y + x'."""
    dom = DomainSpec((box,), 0.1, 1.0)
    F = FourierGenFunction.trig(dom, degree, [((1,), eps, "cos")], F0=twist_F0(1.0, dom, degree))
    return ImplicitMap(F, **kw)


def standard_map_closed(eps, x, y):
    x1 = x + eps * np.sin(y)
    return x1, y + x1


@dataclass(frozen=True)
class NFProblem:
    name: str
    F: FourierGenFunction
    params: NormalFormParams
    beta: float

    @property
    def omega(self) -> FrequencyMap:
        return FrequencyMap.from_poly(self.F.F0, self.beta, self.beta)

    def samples(self, seed=0, count=400):
        """Points of the complex rho1-tube around the box."""
        return self.F.dom.sample(make_rng(seed), count, complex_tube=True)


def nf_problem_1d(eps=5e-9) -> NFProblem:
    """n = 1: w = 0.1 x on [8.5, 9.5] (w in [0.85, 0.95]), f = eps (cos y + 0.5 cos 2y).

    K = 6, rho = (0.1, 4) so N = 2; alpha = 0.25 holds on the box and tube.
    """
    beta = 0.1
    dom = DomainSpec(((8.5, 9.5),), 0.1, 4.0)
    F = FourierGenFunction.trig(dom, DEGREE, [((1,), eps, "cos"), ((2,), 0.5 * eps, "cos")],
                                F0=twist_F0(beta, dom), K_rep=6)
    params = NormalFormParams.standard(Lattice.zero(1), 6, 0.25, beta, (0.1, 4.0))
    return NFProblem("nf1", F, params, beta)


def nf_problem_2d(eps=5e-9) -> NFProblem:
    """n = 2: w = 0.01 x around w0 = 2 pi (1, 7)/25.

    At w0 every k with 0 < |k|_1 <= 6 has k.w0 in 2 pi Z/25 minus 0, so
    |1 - exp(i k.w0)| >= 2 sin(pi/25) ~ 0.2507; alpha = 0.2 leaves room for
    the box (half-width 0.25) and the tube (rho1 = 0.25).
    """
    beta = 0.01
    w0 = 2 * np.pi * np.array([1.0, 7.0]) / 25
    x0 = w0 / beta
    h = 0.25
    dom = DomainSpec(tuple((v - h, v + h) for v in x0), 0.25, 4.0)
    amp = PolyCoeff.from_terms({(0, 0): eps, (1, 0): 0.1 * eps}, dom.center, DEGREE)
    F = FourierGenFunction.trig(dom, DEGREE, [((1, 0), eps, "cos"), ((1, 1), 0.5 * eps, "cos"),
                                              ((0, 1), amp, "cos")],
                                F0=twist_F0(beta, dom), K_rep=6)
    params = NormalFormParams.standard(Lattice.zero(2), 6, 0.2, beta, (0.25, 4.0))
    return NFProblem("nf2", F, params, beta)


def nf_problem(name) -> NFProblem:
    return {"nf1": nf_problem_1d, "nf2": nf_problem_2d}[name]()


SYSTEMS = {
    # H(I) = I^2/2 + I
    "quartic1": lambda: IntegrableSystem("quartic1", PolyCoeff.from_terms({(2,): 0.5, (1,): 1.0}, [0.0], 4)),
    # H(I) = I
    "harmonic1": lambda: IntegrableSystem("harmonic1", PolyCoeff.from_terms({(1,): 1.0}, [0.0], 4)),
    # H(I) = (I1^2 + I2^2)/2 + I1 + I2/2
    "quartic2": lambda: IntegrableSystem("quartic2", PolyCoeff.from_terms(
        {(2, 0): 0.5, (0, 2): 0.5, (1, 0): 1.0, (0, 1): 0.5}, [0.0, 0.0], 4)),
}


def system(name) -> IntegrableSystem:
    try:
        return SYSTEMS[name]()
    except KeyError:
        from .errors import ParameterError
        raise ParameterError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None


def shipped_maps():
    """(name, ImplicitMap, sample action box) for the symplecticity suite."""
    out = [("standard", standard_map(1e-3), ((-1.0, 1.0),))]
    for P in (nf_problem_1d(eps=1e-3), nf_problem_2d(eps=1e-3)):
        out.append((P.name, ImplicitMap(P.F, check_domain=False), P.F.dom.box))
    dom = DomainSpec(((0.5, 1.5), (0.5, 1.5)), 0.1, 1.0)
    amp = PolyCoeff.from_terms({(0, 0): 0.01, (1, 1): 0.02, (2, 0): 0.01}, dom.center, DEGREE)
    F = FourierGenFunction.trig(dom, DEGREE, [((1, 0), amp, "cos"), ((1, -1), 0.01, "sin")],
                                F0=twist_F0(1.0, dom))
    out.append(("coupled2", ImplicitMap(F, check_domain=False), dom.box))
    out.append(("small-twist", small_twist_map(F.F0, F, 0.5, check_domain=False), dom.box))
    return out


def shipped_transforms():
    """(name, NearIdentityTransform, action box) for the symplecticity suite."""
    dom = DomainSpec(((0.5, 1.5),), 0.1, 1.0)
    amp = PolyCoeff.from_terms({(0,): 0.01, (1,): 0.01}, dom.center, DEGREE)
    chi1 = FourierGenFunction.trig(dom, DEGREE, [((1,), amp, "sin"), ((2,), 0.005, "cos")])
    dom2 = DomainSpec(((0.5, 1.5), (0.5, 1.5)), 0.1, 1.0)
    amp2 = PolyCoeff.from_terms({(0, 0): 0.01, (0, 1): 0.01}, dom2.center, DEGREE)
    chi2 = FourierGenFunction.trig(dom2, DEGREE, [((1, 1), amp2, "sin"), ((0, 1), 0.005, "cos")])
    return [("chi1", NearIdentityTransform(chi1), dom.box), ("chi2", NearIdentityTransform(chi2), dom2.box)]
