"""Resonant normal form by repeated conjugation.

One step removes the nonresonant part of the remainder up to order K by a
near-identity transformation whose generating function solves the
homological equation; the resonant part is moved into Z.  The step is
iterated N = floor(K rho2 / 12) times on shrinking domains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, NonresonanceError, ParameterError, RepresentationError
from .fourier import FourierGenFunction, l1, vectorfield_norm, vectorfield_norms
from .genmap import FIT_TOL, NearIdentityTransform, conjugate_genfun
from .lattice import Lattice, l1_ball
from .poly import PolyCoeff, chebyshev_nodes, monomials


@dataclass(frozen=True)
class NormalFormParams:
    M: Lattice
    K: int
    alpha: float
    beta: float
    c: float
    rho: tuple
    N_steps: int = field(default=None)

    def __post_init__(self):
        rho = tuple(float(v) for v in self.rho)
        if not 0 < self.alpha <= 1:
            raise ParameterError("need 0 < alpha <= 1")
        if not 0 < self.beta <= self.alpha:
            raise ParameterError("need 0 < beta <= alpha")
        if len(rho) != 2 or min(rho) <= 0:
            raise ParameterError("rho must be two positive numbers")
        if self.K < 1 or not self.c > 0:
            raise ParameterError("need K >= 1 and c > 0")
        N = int(math.floor(self.K * rho[1] / 12))
        if self.N_steps is not None and self.N_steps != N:
            raise ParameterError(f"N_steps must equal floor(K rho2 / 12) = {N}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "N_steps", N)

    @classmethod
    def standard(cls, M, K, alpha, beta, rho):
        """c = rho1 / rho2."""
        return cls(M, K, alpha, beta, rho[0] / rho[1], rho)

    @property
    def n(self) -> int:
        return self.M.n

    @property
    def A(self) -> float:
        return 1 + self.beta * self.c / self.alpha * math.exp(self.K * self.beta * self.rho[0])

    @property
    def C_tilde(self) -> float:
        return 21 * self.n + 30

    @property
    def trivial(self) -> bool:
        """No step is taken when K rho2 <= 12."""
        return self.K * self.rho[1] <= 12

    @property
    def delta(self) -> tuple:
        N = max(self.N_steps, 1)
        return (self.rho[0] / (6 * N), self.rho[1] / (6 * N))

    def hat_delta(self, delta=None) -> float:
        d = self.delta if delta is None else delta
        return min(d[0], self.c * d[1])

    def f_bound(self) -> float:
        """alpha rho1 / (C_tilde A K rho2)."""
        return self.alpha * self.rho[0] / (self.C_tilde * self.A * self.K * self.rho[1])


def _nonres_keys(M, K, n):
    ball = np.array(l1_ball(n, K)).reshape(-1, n)
    return ball[~M.contains(ball)]


def check_nonresonance(omega, samples, M: Lattice, K: int, alpha: float) -> bool:
    """|1 - exp(i k.w(x))| >= alpha for all k in Z^n_K outside M at all samples.

    Samples may be complex (points of the complex tube).
    """
    X = np.atleast_2d(np.asarray(samples))
    if X.shape[0] == 0:
        raise ParameterError("no samples")
    keys = _nonres_keys(M, K, X.shape[1])
    if keys.shape[0] == 0:
        return True
    W = np.atleast_2d(omega(X))
    den = np.abs(1 - np.exp(1j * (W @ keys.T)))
    return bool(np.all(den >= alpha))


@dataclass(frozen=True)
class HomologicalReport:
    fit_residual: float
    min_denominator: float


def solve_homological(R: FourierGenFunction, omega, M: Lattice, K: int, alpha: float,
                      action_nodes=None, fit_tol=FIT_TOL, return_report=False):
    """chi_k = R_k / (1 - exp(i k.w)) off M, g_k = R_k on M, for |k|_1 <= K.

    The quotient is formed at Chebyshev action nodes and refitted per mode.
    """
    n, d = R.n, R.degree
    dom = R.dom
    A = chebyshev_nodes(dom.lo, dom.hi, action_nodes or d + 2)
    keys = R.keys
    low = l1(keys) <= K if keys.shape[0] else np.zeros(0, bool)
    inM = M.contains(keys) if keys.shape[0] else np.zeros(0, bool)
    g = R._select(low & inM)
    sel = low & ~inM
    zero = PolyCoeff.zero(R.center, d)
    if not np.any(sel):
        chi = FourierGenFunction(zero, np.zeros((0, n)), np.zeros((0, zero.coeffs.size)), R.K_rep, dom)
        out = (chi, g)
        return out + (HomologicalReport(0.0, np.inf),) if return_report else out
    ks = keys[sel]
    V = monomials(A, R.center, d)
    vals = V @ R.coef[sel].T  # (Na, m_sel)
    W = np.real(np.atleast_2d(omega(A)))
    den = 1 - np.exp(1j * (W @ ks.T))
    dmin = float(np.min(np.abs(den)))
    if dmin < alpha:
        raise NonresonanceError(f"denominator {dmin:.3e} below alpha = {alpha:.3e} at a fit node",
                                inequality="|1 - exp(i k.w)| >= alpha")
    target = vals / den
    coef, *_ = np.linalg.lstsq(V, target, rcond=None)
    res = float(np.max(np.abs(V @ coef - target)))
    if res > fit_tol:
        raise RepresentationError(f"homological fit residual {res:.3e} exceeds {fit_tol:.1e}")
    chi = FourierGenFunction(zero, ks, coef.T, R.K_rep, dom).realify()
    if return_report:
        return chi, g, HomologicalReport(res, dmin)
    return chi, g


def homological_residual(R, chi, g, omega, K, points_x, points_y) -> float:
    """max |R^{<=K}(a,y) + chi(a, y + w(a)) - chi(a, y) - g(a, y)| at the given points."""
    X = np.atleast_2d(points_x)
    Y = np.atleast_2d(points_y)
    W = np.real(np.atleast_2d(omega(X)))
    lhs = (R.truncate(K).eval_perturbation(X, Y) + chi.eval_perturbation(X, Y + W)
           - chi.eval_perturbation(X, Y) - g.eval_perturbation(X, Y))
    return float(np.max(np.abs(lhs)))


@dataclass(frozen=True)
class StepRecord:
    index: int
    norm_Z: float
    norm_R: float
    norm_Z_new: float
    norm_R_new: float
    bound_a: float
    bound_b: float
    bound_c: float
    displacement: float
    fit_residual: float

    @property
    def ratio(self) -> float:
        return self.norm_R_new / self.norm_R if self.norm_R > 0 else 0.0

    @property
    def passed(self) -> bool:
        return (self.norm_Z_new <= self.bound_a and self.norm_R_new <= self.bound_b
                and self.displacement <= self.bound_c)

    @property
    def contracts(self) -> bool:
        return self.norm_R_new <= self.norm_R / math.e


def _frequency(F0):
    return lambda X: F0.gradient(np.atleast_2d(X))


def step_bound_b(params: NormalFormParams, delta, nZ, nR) -> float:
    """Right-hand side of the remainder estimate of one step (C read as c)."""
    a, b, c, n, K = params.alpha, params.beta, params.c, params.n, params.K
    A = params.A
    d1, d2 = delta
    S = nZ + nR
    D1 = 2 * A / (a * d1) + 2 / d1 + A / (math.e * a * d2) * (b * A / a + b + 2 / c)
    D2 = ((n + 2) / d1) * (A / a) + (n + 1) / d1 + n * A / (math.e * a * d2) * (b * A / a + b + 1 / c)
    tail = math.exp(-K * d2)
    inner = (2 / d1) * (1 + A / a) * (D1 * S + tail) * nR + D2 * S + tail + 2 * b * A * c / a
    return inner * nR


def check_step_hypothesis(params, delta, nZ, nR, rho, index=None):
    d1, d2 = delta
    A, c = params.A, params.c
    hat = min(d1, c * d2)
    lim = params.alpha * hat / (4 * A)
    if nZ + nR > lim:
        raise HypothesisError("step hypothesis fails", step=index,
                              inequality=f"||DZ||+||DR|| = {nZ + nR:.3e} <= alpha hat_delta/(4A) = {lim:.3e}")
    if 3 * d1 > rho[0] * (1 + 1e-12) or 3 * d2 > rho[1] * (1 + 1e-12):
        raise HypothesisError("step hypothesis fails", step=index, inequality="3 delta <= rho")
    lim2 = min(d2 / (6 * params.beta), 1.0)
    if rho[0] > lim2 * (1 + 1e-12):
        raise HypothesisError("step hypothesis fails", step=index,
                              inequality=f"rho1 = {rho[0]:.3e} <= min(delta2/(6 beta), 1) = {lim2:.3e}")


def iterative_step(F0: PolyCoeff, Z: FourierGenFunction, R: FourierGenFunction,
                   params: NormalFormParams, delta=None, index=1, check=True, **conj_kw):
    """One conjugation step.

    ``Z`` and ``R`` carry the current domain (rho).  Returns
    ``(Z_new, R_new, transform, record)``; the new functions live on the
    domain shrunk by ``3 delta``.
    """
    delta = params.delta if delta is None else tuple(delta)
    dom = R.dom
    rho = (dom.rho1, dom.rho2)
    c = params.c
    nZ = vectorfield_norm(Z, dom, c)
    nR = vectorfield_norm(R, dom, c)
    if check:
        check_step_hypothesis(params, delta, nZ, nR, rho, index)
    new_dom = dom.shrink(3 * delta[0], 3 * delta[1])
    A, a = params.A, params.alpha
    if nR == 0:
        T = NearIdentityTransform(FourierGenFunction.zero(dom, F0.degree, R.K_rep))
        rec = StepRecord(index, nZ, 0.0, vectorfield_norm(Z, new_dom, c), 0.0, nZ, 0.0, 0.0, 0.0, 0.0)
        return Z.with_dom(new_dom), R.with_dom(new_dom), T, rec
    omega = _frequency(F0)
    chi, g = solve_homological(R, omega, params.M, params.K, a)
    F = Z + R
    F = F.replace(F0=F0)
    Ft, rep = conjugate_genfun(F, chi, dom=new_dom, return_report=True, **conj_kw)
    Z_new = (Z + g).with_dom(new_dom).replace(F0=PolyCoeff.zero(F0.center, F0.degree))
    R_new = (Ft.perturbation() - Z_new).dropzeros()
    nZn = vectorfield_norm(Z_new, new_dom, c)
    nRn = vectorfield_norm(R_new, new_dom, c)
    disp = vectorfield_norms(chi, new_dom)[0]
    rec = StepRecord(index, nZ, nR, nZn, nRn, nZ + nR, step_bound_b(params, delta, nZ, nR),
                     A / a * nR, disp, rep.fit_residual)
    return Z_new, R_new, NearIdentityTransform(chi.with_dom(dom)), rec


@dataclass(frozen=True)
class NormalFormResult:
    Z: FourierGenFunction
    R: FourierGenFunction
    transform_chain: list
    step_log: list
    displacement: float
    norm_f: float
    params: NormalFormParams

    @property
    def bound_Z(self) -> float:
        return 2 * self.norm_f

    @property
    def bound_R(self) -> float:
        p = self.params
        return 3 * math.exp(-p.K * p.rho[1] / 12) * self.norm_f

    @property
    def bound_displacement(self) -> float:
        return self.params.rho[0] / 2 ** 8

    @property
    def norm_Z(self) -> float:
        return vectorfield_norm(self.Z, self.Z.dom, self.params.c)

    @property
    def norm_R(self) -> float:
        return vectorfield_norm(self.R, self.R.dom, self.params.c)

    def conclusions(self) -> dict:
        return {
            "Z": self.norm_Z <= self.bound_Z,
            "R": self.norm_R <= self.bound_R,
            "displacement": self.displacement <= self.bound_displacement,
            "contraction": all(s.contracts for s in self.step_log),
            "steps": all(s.passed for s in self.step_log),
        }

    def step_table(self):
        """Rows (step, ||DZ||, ||DR||, bound, pass) with norms after the step."""
        return [(s.index, s.norm_Z_new, s.norm_R_new, s.bound_b, s.passed) for s in self.step_log]

    def apply(self, a, phi):
        """Full transformation Phi = Phi_1 o ... o Phi_N on arrays."""
        for T in reversed(self.transform_chain):
            a, phi, _ = T.forward(a, phi)
        return a, phi


def normal_form(F: FourierGenFunction, params: NormalFormParams, samples=None,
                check=True, **conj_kw) -> NormalFormResult:
    """N-step normal form of ``F = F0 + f`` on ``F.dom`` (rho taken from params)."""
    dom = F.dom.with_rho(*params.rho)
    F = F.with_dom(dom)
    f = F.perturbation()
    c = params.c
    nf = vectorfield_norm(f, dom, c)
    if check:
        lim = params.f_bound()
        if nf > lim:
            raise HypothesisError("normal form hypothesis fails", step=0,
                                  inequality=f"||Df|| = {nf:.3e} <= alpha rho1/(C A K rho2) = {lim:.3e}")
        lim1 = min(params.alpha / (4 * params.K * params.beta), 1.0)
        if params.rho[0] > lim1:
            raise HypothesisError("normal form hypothesis fails", step=0,
                                  inequality=f"rho1 <= min(alpha/(4 K beta), 1) = {lim1:.3e}")
        if not params.trivial:
            lim2 = min(params.delta[1] / (6 * params.beta), 1.0)
            if params.rho[0] > lim2:
                raise HypothesisError("normal form hypothesis fails", step=0,
                                      inequality=f"rho1 <= min(delta2/(6 beta), 1) = {lim2:.3e}")
        if samples is not None and not check_nonresonance(_frequency(F.F0), samples, params.M,
                                                          params.K, params.alpha):
            raise NonresonanceError("samples are not alpha,K-nonresonant modulo M", step=0)
    zero = FourierGenFunction.zero(dom, F.degree, F.K_rep)
    half = dom.with_rho(params.rho[0] / 2, params.rho[1] / 2)
    if params.trivial:
        return NormalFormResult(zero.with_dom(half), f.with_dom(half), [], [], 0.0, nf, params)
    Z, R = zero, f
    chain, log = [], []
    for i in range(1, params.N_steps + 1):
        try:
            Z, R, T, rec = iterative_step(F.F0, Z, R, params, index=i, check=check, **conj_kw)
        except HypothesisError as exc:
            exc.step = i
            raise
        chain.append(T)
        log.append(rec)
    disp = sum(s.bound_c for s in log)
    return NormalFormResult(Z, R, chain, log, disp, nf, params)
