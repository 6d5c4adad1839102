"""State, domain and frequency-map types, plus the action rescaling."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ParameterError

TWO_PI = 2.0 * np.pi


def wrap(theta):
    """Map angles into [0, 2*pi)."""
    t = np.mod(theta, TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    return np.where(t >= TWO_PI, 0.0, t)


@dataclass(frozen=True)
class ActionAngleState:
    actions: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        I = np.array(self.actions, dtype=float).ravel()
        th = np.array(self.angles, dtype=float).ravel()
        if I.shape != th.shape:
            raise ParameterError("actions and angles must have the same length")
        if not np.all(np.isfinite(I)):
            raise ParameterError("actions must be finite")
        th = wrap(th)
        I.setflags(write=False)
        th.setflags(write=False)
        object.__setattr__(self, "actions", I)
        object.__setattr__(self, "angles", th)

    @property
    def n(self) -> int:
        return self.actions.size

    def shifted(self, k) -> "ActionAngleState":
        """Same state with angles shifted by 2*pi*k (identical after wrapping)."""
        return ActionAngleState(self.actions, self.angles + TWO_PI * np.asarray(k, float))


@dataclass(frozen=True)
class DomainSpec:
    """Axis-aligned action box ``G`` with analyticity widths ``rho1`` (actions)
    and ``rho2`` (angles)."""

    box: tuple
    rho1: float = 0.0
    rho2: float = 0.0

    def __post_init__(self):
        box = tuple((float(a), float(b)) for a, b in self.box)
        if not box:
            raise ParameterError("empty box")
        for a, b in box:
            if not (np.isfinite(a) and np.isfinite(b)) or a > b:
                raise ParameterError(f"invalid interval [{a}, {b}]")
        if self.rho1 < 0 or self.rho2 < 0:
            raise ParameterError("rho1, rho2 must be >= 0")
        object.__setattr__(self, "box", box)

    @property
    def n(self) -> int:
        return len(self.box)

    @cached_property
    def lo(self) -> np.ndarray:
        return np.array([a for a, _ in self.box])

    @cached_property
    def hi(self) -> np.ndarray:
        return np.array([b for _, b in self.box])

    @cached_property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @cached_property
    def half_widths(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @cached_property
    def radii(self) -> np.ndarray:
        """Per-axis polydisc radii around the center enclosing V_rho1(G)."""
        return self.half_widths + self.rho1

    def with_rho(self, rho1=None, rho2=None) -> "DomainSpec":
        return DomainSpec(self.box,
                          self.rho1 if rho1 is None else rho1,
                          self.rho2 if rho2 is None else rho2)

    def shrink(self, d1, d2) -> "DomainSpec":
        return self.with_rho(self.rho1 - d1, self.rho2 - d2)

    def contains(self, x, margin=0.0) -> np.ndarray:
        x = np.atleast_2d(np.real(x))
        return ((x >= self.lo + margin) & (x <= self.hi - margin)).all(axis=-1)

    def sample(self, rng, count, complex_tube=False) -> np.ndarray:
        """Random points of G, or of the complex tube V_rho1(G) when requested.

        Imaginary offsets are bounded by rho1/sqrt(n) per axis so that the
        Euclidean distance to G stays <= rho1.
        """
        x = rng.uniform(self.lo, self.hi, size=(count, self.n))
        if not complex_tube:
            return x
        s = self.rho1 / np.sqrt(self.n)
        return x + 1j * rng.uniform(-s, s, size=(count, self.n))

    def grid(self, per_axis) -> np.ndarray:
        axes = [np.linspace(a, b, per_axis) for a, b in self.box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class FrequencyMap:
    """Frequency map ``omega`` with declared bi-Lipschitz constants.

    ``omega`` maps an (N, n) array (real or complex) to an (N, n) array.
    """

    omega: Callable
    m_lower: float
    M_upper: float
    jacobian: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.m_lower > 0 or self.M_upper < self.m_lower:
            raise ParameterError("need 0 < m_lower <= M_upper")

    def __call__(self, x):
        x = np.asarray(x)
        if x.ndim == 1:
            return self.omega(x[None, :])[0]
        return self.omega(x)

    @classmethod
    def from_poly(cls, F0, m_lower, M_upper):
        """Frequency map of an integrable generating function (its gradient)."""
        return cls(F0.gradient, m_lower, M_upper, jacobian=_poly_hessian(F0))

    @classmethod
    def affine(cls, A, b=None):
        """omega(x) = A x + b with constants read off the singular values."""
        A = np.atleast_2d(np.asarray(A, float))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, float)
        s = np.linalg.svd(A, compute_uv=False)
        return cls(lambda x: x @ A.T + b, float(s.min()), float(s.max()),
                   jacobian=lambda x: np.broadcast_to(A, (np.atleast_2d(x).shape[0],) + A.shape))

    def jac(self, x) -> np.ndarray:
        """Jacobian at the rows of x, (N, n, n); complex-step if none supplied."""
        x = np.atleast_2d(np.asarray(x, float))
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x)).real
        h = 1e-30
        n = x.shape[1]
        J = np.empty((x.shape[0], n, n))
        for j in range(n):
            dx = np.zeros(n, dtype=complex)
            dx[j] = 1j * h
            J[:, :, j] = self.omega(x + dx).imag / h
        return J

    def check_bilipschitz(self, dom: DomainSpec, rng, pairs=500) -> bool:
        """Sampled check of m|I1-I2| <= |w(I1)-w(I2)| <= M|I1-I2| in V_rho1(G)."""
        a = dom.sample(rng, pairs, complex_tube=dom.rho1 > 0)
        b = dom.sample(rng, pairs, complex_tube=dom.rho1 > 0)
        d = np.linalg.norm(a - b, axis=1)
        w = np.linalg.norm(self.omega(a) - self.omega(b), axis=1)
        ok = d > 0
        slack = 1e-12 * (1 + d[ok])
        return bool(np.all(w[ok] >= self.m_lower * d[ok] - slack)
                    and np.all(w[ok] <= self.M_upper * d[ok] + slack))


def _poly_hessian(F0):
    grads = [F0.derivative(j) for j in range(F0.n)]

    def hess(x):
        return np.stack([g.gradient(x) for g in grads], axis=1)

    return hess


def lipschitz_probe(omega: FrequencyMap, dom: DomainSpec, samples: int, rng=None):
    """Empirical extremes of |w(I1)-w(I2)|/|I1-I2| over the box.

    Combines difference quotients over random pairs with the singular values
    of the Jacobian at the sample points.  Diagnostic only.
    """
    if samples < 2:
        raise ParameterError("samples must be >= 2")
    if np.any(dom.hi - dom.lo <= 0):
        raise ParameterError("degenerate box (zero volume)")
    rng = np.random.default_rng(0) if rng is None else rng
    pts = dom.sample(rng, samples)
    other = dom.sample(rng, samples)
    d = np.linalg.norm(pts - other, axis=1)
    w = np.linalg.norm(omega.omega(pts) - omega.omega(other), axis=1)
    ratios = w[d > 0] / d[d > 0]
    sv = np.linalg.svd(omega.jac(pts), compute_uv=False)
    m_hat = float(min(ratios.min(initial=np.inf), sv.min()))
    M_hat = float(max(ratios.max(initial=0.0), sv.max()))
    return m_hat, M_hat


def rescale(F, gamma: float):
    """Partial stretching of actions: F'(x, y) = F(gamma*x, y) / gamma.

    The domain box and rho1 are divided by gamma; rho2 is unchanged.
    """
    from .fourier import FourierGenFunction

    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    F0 = F.F0
    exps = F0.exponents
    # (gamma x - c)^a = gamma^|a| (x - c/gamma)^a
    scale = gamma ** (exps.sum(axis=1) - 1.0)
    center = F0.center / gamma
    dom = DomainSpec(tuple((a / gamma, b / gamma) for a, b in F.dom.box),
                     F.dom.rho1 / gamma, F.dom.rho2)
    return FourierGenFunction(
        F0=type(F0)(F0.coeffs * scale, center, F0.degree),
        keys=F.keys,
        coef=F.coef * scale,
        K_rep=F.K_rep,
        dom=dom,
    )


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; all seeded sampling in the package goes through this."""
    return np.random.Generator(np.random.Philox(int(seed)))
