"""Maps and near-identity transformations defined implicitly by generating functions.

Conventions (x actions, y angles, F = F0 + f):

* map T:      x_hat = x - d_y f(x_hat, y),   y_hat = y + dF0(x_hat) + d_x f(x_hat, y)
* transform Phi: (a, phi) -> (x, y) with  x = a + d_y chi(a, y),  y = phi - d_x chi(a, y)

All implicit equations are solved by plain Picard iteration.  Internally the
angles are kept unwrapped; the state-level API wraps them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ActionAngleState, DomainSpec
from .errors import DivergenceError, DomainError, HypothesisError, ParameterError, RepresentationError
from .fourier import FourierGenFunction, l1, vectorfield_norm
from .poly import chebyshev_nodes, monomials

TOL = 1e-12
MAX_ITER = 100
FIT_TOL = 1e-8


def _solve(update, x0, tol, max_iter):
    """Plain Picard iteration ``x <- update(x)`` on a batch of rows.

    The stopping test is the equation residual ``|update(x) - x|`` checked
    before each update, so an explicit equation finishes after one update.
    Returns ``(x, updates, residual)``.
    """
    x = x0
    for it in range(0, max_iter + 1):
        new = update(x)
        if not np.all(np.isfinite(new)):
            raise DivergenceError(f"non-finite iterate after {it} updates")
        d = new - x
        res = float(np.sqrt((d * d).sum(axis=-1).max(initial=0.0)))
        if res <= tol:
            return x, it, res
        if it == max_iter:
            break
        x = new
    raise DivergenceError(f"fixed point not reached in {max_iter} updates (residual {res:.3e})")


def _hat_c(delta, c):
    return min(delta[0], c * delta[1])


def _rows(x, y):
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_2d(np.asarray(y, float))
    if x.shape != y.shape:
        raise ParameterError("actions and angles must have matching shapes")
    return x, y


@dataclass(frozen=True)
class ImplicitMap:
    """Symplectic map generated by ``F = F.F0 + f``.

    When ``delta`` is given the contraction hypothesis ``||Df|| <= hat_delta_c / 2``
    is checked at construction and inputs closer than ``delta[0]`` to the
    box boundary are refused.
    """

    F: FourierGenFunction
    tol: float = TOL
    max_iter: int = MAX_ITER
    delta: tuple | None = None
    c: float = 1.0
    check_domain: bool = True

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1:
            raise ParameterError("need tol > 0 and max_iter >= 1")
        if self.delta is not None:
            norm = vectorfield_norm(self.F, self.F.dom, self.c)
            bound = _hat_c(self.delta, self.c) / 2
            if norm > bound:
                raise HypothesisError("map contraction hypothesis fails",
                                      inequality=f"||Df|| = {norm:.3e} <= hat_delta_c/2 = {bound:.3e}")

    @property
    def margin(self) -> float:
        return 0.0 if self.delta is None else float(self.delta[0])

    def _guard(self, x):
        if self.check_domain and not np.all(self.F.dom.contains(x, self.margin)):
            raise DomainError("action outside the admissible box")

    def _guard_out(self, x):
        if self.check_domain and not np.all(self.F.dom.contains(x, -self.F.dom.rho1)):
            raise DomainError("iterate left the domain")

    def forward(self, x, y):
        """Unwrapped forward map on arrays; returns ``(x_hat, y_hat, iterations)``."""
        x, y = _rows(x, y)
        self._guard(x)
        F = self.F
        xh, it, _ = _solve(lambda z: x - F.grad_angle(z, y).real, x, self.tol, self.max_iter)
        self._guard_out(xh)
        yh = y + F.grad_action(xh, y).real
        return xh, yh, it

    def backward(self, xh, yh):
        """Unwrapped inverse map on arrays; returns ``(x, y, iterations)``."""
        xh, yh = _rows(xh, yh)
        self._guard(xh)
        F = self.F
        y, it, _ = _solve(lambda z: yh - F.grad_action(xh, z).real, yh, self.tol, self.max_iter)
        x = xh + F.grad_angle(xh, y).real
        self._guard_out(x)
        return x, y, it


@dataclass(frozen=True)
class NearIdentityTransform:
    """Canonical transformation Phi generated by ``chi`` (its F0 part is ignored)."""

    chi: FourierGenFunction
    tol: float = TOL
    max_iter: int = MAX_ITER
    delta: tuple | None = None
    c: float = 1.0

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1:
            raise ParameterError("need tol > 0 and max_iter >= 1")
        if self.delta is not None:
            norm = vectorfield_norm(self.chi, self.chi.dom, self.c)
            bound = _hat_c(self.delta, self.c) / 2
            if norm > bound:
                raise HypothesisError("transform contraction hypothesis fails",
                                      inequality=f"||Dchi|| = {norm:.3e} <= hat_delta_c/2 = {bound:.3e}")

    @classmethod
    def identity(cls, dom, degree=6):
        return cls(FourierGenFunction.zero(dom, degree))

    def forward(self, a, phi):
        """(a, phi) -> (x, y), unwrapped; returns ``(x, y, iterations)``."""
        a, phi = _rows(a, phi)
        chi = self.chi
        y, it, _ = _solve(lambda z: phi - chi.grad_action(a, z, include_F0=False).real,
                          phi, self.tol, self.max_iter)
        x = a + chi.grad_angle(a, y).real
        return x, y, it

    def backward(self, x, y):
        """(x, y) -> (a, phi), unwrapped; returns ``(a, phi, iterations)``."""
        x, y = _rows(x, y)
        chi = self.chi
        a, it, _ = _solve(lambda z: x - chi.grad_angle(z, y).real, x, self.tol, self.max_iter)
        phi = y + chi.grad_action(a, y, include_F0=False).real
        return a, phi, it


def _as_state(xs, ys, single):
    if single:
        return ActionAngleState(xs[0], ys[0])
    return [ActionAngleState(a, b) for a, b in zip(xs, ys)]


def _unpack(s):
    if isinstance(s, ActionAngleState):
        return s.actions[None, :], s.angles[None, :], True
    return (np.array([t.actions for t in s]), np.array([t.angles for t in s]), False)


def apply_map(m: ImplicitMap, s):
    """Forward map on one state or a list of states."""
    x, y, single = _unpack(s)
    xh, yh, _ = m.forward(x, y)
    return _as_state(xh, yh, single)


def apply_inverse(m: ImplicitMap, s):
    x, y, single = _unpack(s)
    a, b, _ = m.backward(x, y)
    return _as_state(a, b, single)


def apply_transform(t: NearIdentityTransform, s):
    x, y, single = _unpack(s)
    a, b, _ = t.forward(x, y)
    return _as_state(a, b, single)


def apply_transform_inverse(t: NearIdentityTransform, s):
    x, y, single = _unpack(s)
    a, b, _ = t.backward(x, y)
    return _as_state(a, b, single)


def symplectic_defect(func, x, y, h=1e-5) -> float:
    """max |J^T Omega J - Omega| for the central-difference Jacobian of
    ``func(x, y) -> (x', y')`` (arrays of shape (n,), unwrapped outputs)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    z = np.concatenate([x, y])
    J = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = h
        zp, zm = z + e, z - e
        p = np.concatenate(func(zp[:n], zp[n:]))
        q = np.concatenate(func(zm[:n], zm[n:]))
        J[:, j] = (p - q) / (2 * h)
    Om = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.max(np.abs(J.T @ Om @ J - Om)))


# ---------------------------------------------------------------------------------
# conjugated generating function

_GL_T, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class ConjugationReport:
    fit_residual: float
    tail_amplitude: float
    iterations: int
    nodes: tuple


def _conjugate_values(F, chi, ah, phi, tol, max_iter):
    """F_tilde(ah, phi) - F0(ah) at paired rows, in displacement unknowns.

    u = a - ah, w = y - phi, v = x_hat - ah.  Everything returned is O(|f| + |chi|),
    which keeps rounding error relative to the perturbation size.
    """
    F0 = F.F0
    f = F.perturbation()
    omega = F0.gradient
    N, n = ah.shape
    u = np.zeros((N, n))
    v = np.zeros((N, n))
    w = np.zeros((N, n))
    for it in range(1, max_iter + 1):
        w_new = -chi.grad_action(ah + u, phi + w, include_F0=False).real
        y = phi + w_new
        xh = ah + v
        yh = y + omega(xh).real + f.grad_action(xh, y, include_F0=False).real
        v_new = chi.grad_angle(ah, yh).real
        xh = ah + v_new
        p = chi.grad_angle(ah + u, y).real
        u_new = v_new - p + f.grad_angle(xh, y).real
        step = max(np.max(np.abs(u_new - u)), np.max(np.abs(v_new - v)), np.max(np.abs(w_new - w)))
        if not np.isfinite(step):
            raise DivergenceError("conjugation chain diverged")
        u, v, w = u_new, v_new, w_new
        if step <= tol:
            break
    else:
        raise DivergenceError(f"conjugation chain not converged in {max_iter} updates")
    y = phi + w
    xh = ah + v
    df = f.grad_action(xh, y, include_F0=False).real
    yh = y + omega(xh).real + df
    # F0(ah+v) - F0(ah) - v.omega(ah+v) = int_0^1 (omega(ah+tv) - omega(ah+v)).v dt
    om_end = omega(xh).real
    twist = np.zeros(N)
    for t, wt in zip(_GL_T, _GL_W):
        twist += wt * np.sum((omega(ah + t * v).real - om_end) * v, axis=1)
    val = (-np.sum(u * w, axis=1) - np.sum(v * df, axis=1) + twist
           + f.eval_perturbation(xh, y).real
           + chi.eval_perturbation(ah, yh).real - chi.eval_perturbation(ah + u, y).real)
    return val, it


def angle_grid(n, per_axis):
    t = 2 * np.pi * np.arange(per_axis) / per_axis
    mesh = np.meshgrid(*([t] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def fit_modes(values, action_nodes, angle_per_axis, center, degree, K_rep, n):
    """Angle FFT + per-mode least squares.

    ``values`` has shape (Na, per_axis**n), rows indexed by action node.
    Returns ``(keys, coef, fit_residual, tail_amplitude)``.
    """
    Na = action_nodes.shape[0]
    P = angle_per_axis
    grid = values.reshape((Na,) + (P,) * n)
    spec = np.fft.fftn(grid, axes=tuple(range(1, n + 1))) / P ** n
    freqs = np.fft.fftfreq(P, 1.0 / P).astype(int)
    mesh = np.meshgrid(*([freqs] * n), indexing="ij")
    allk = np.stack([m.ravel() for m in mesh], axis=-1)
    spec = spec.reshape(Na, -1)
    keep = l1(allk) <= K_rep
    # drop the Nyquist column to keep conjugate symmetry exact
    nyq = np.any(np.abs(allk) == P // 2, axis=1) if P % 2 == 0 else np.zeros(len(allk), bool)
    keep &= ~nyq
    tail = float(np.max(np.abs(spec[:, ~keep]), initial=0.0))
    V = monomials(action_nodes, center, degree)
    target = spec[:, keep]
    coef, *_ = np.linalg.lstsq(V, target, rcond=None)
    res = float(np.max(np.abs(V @ coef - target), initial=0.0))
    return allk[keep], coef.T, res, tail


def conjugate_genfun(F: FourierGenFunction, chi: FourierGenFunction, dom: DomainSpec | None = None,
                     K_rep: int | None = None, angle_nodes: int | None = None,
                     action_nodes: int | None = None, tol=TOL, max_iter=MAX_ITER,
                     fit_tol=FIT_TOL, return_report=False):
    """Generating function of Phi^{-1} o T o Phi, recovered on a grid.

    ``dom`` is the domain attached to the result (usually the shrunk one);
    the action nodes are Chebyshev points of its box.  Raises
    :class:`RepresentationError` when the per-mode polynomial fit misses
    the grid values by more than ``fit_tol``.
    """
    dom = F.dom if dom is None else dom
    K_rep = F.K_rep if K_rep is None else K_rep
    n, d = F.n, F.degree
    P = angle_nodes or max(4 * K_rep, 8)
    if P < 2 * K_rep + 1:
        raise ParameterError("too few angle nodes for the requested cutoff")
    A = chebyshev_nodes(dom.lo, dom.hi, action_nodes or d + 2)
    TH = angle_grid(n, P)
    ah = np.repeat(A, TH.shape[0], axis=0)
    phi = np.tile(TH, (A.shape[0], 1))
    vals, it = _conjugate_values(F, chi, ah, phi, tol, max_iter)
    keys, coef, res, tail = fit_modes(vals.reshape(A.shape[0], -1), A, P, F.center, d, K_rep, n)
    out = FourierGenFunction(F.F0, keys, coef, K_rep, dom).realify()
    if res > fit_tol:
        raise RepresentationError(f"mode fit residual {res:.3e} exceeds {fit_tol:.1e}; raise degree or cutoff")
    if return_report:
        return out, ConjugationReport(res, tail, it, (A.shape[0], P))
    return out


def compose_check(F, chi, F_tilde, states_x, states_y, tol=TOL):
    """Max distance between the map of ``F_tilde`` and Phi^{-1} o T o Phi on the given states.

    Angles are compared modulo 2 pi.
    """
    T = ImplicitMap(F, tol=tol, check_domain=False)
    Tt = ImplicitMap(F_tilde, tol=tol, check_domain=False)
    Phi = NearIdentityTransform(chi, tol=tol)
    x, y, _ = Phi.forward(states_x, states_y)
    xh, yh, _ = T.forward(x, y)
    a1, p1, _ = Phi.backward(xh, yh)
    a2, p2, _ = Tt.forward(states_x, states_y)
    dth = np.angle(np.exp(1j * (p1 - p2)))
    return float(max(np.max(np.abs(a1 - a2)), np.max(np.abs(dth))))
