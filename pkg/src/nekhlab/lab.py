"""Stability constants, small-twist maps, integrator drift experiments and
block-confinement diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .domain import ActionAngleState, DomainSpec
from .errors import DivergenceError, HypothesisError, ParameterError
from .fourier import FourierGenFunction
from .genmap import ImplicitMap
from .geometry import BlockLabel, Classifier, Schedule
from .poly import PolyCoeff, derivative_matrix

CHART_MARGIN = 0.05


# ---------------------------------------------------------------------------------
# constants

@dataclass(frozen=True)
class StabilityBounds:
    n: int
    m: float
    M: float
    sigma1: float
    sigma2: float
    epsilon: float
    epsilon0: float
    b: int
    c0: float
    Delta: float
    T0: float
    c1: float
    T: float
    log_T: float
    admissible: bool

    def drift_envelope(self, h, r):
        """c0 h^{r/b}: the integrator drift bound for a method of order r."""
        return self.c0 * np.asarray(h, float) ** (r / self.b)


def theorem1_bounds(n, m, M, sigma1, sigma2, epsilon) -> StabilityBounds:
    """Constants of the exponential stability estimate.

    b = 2(n^2+n+2), Delta = c0 eps^{1/b}, T = T0 eps^{-3/4} exp(c1 eps^{-1/b}).
    """
    if n < 1 or not 0 < m <= M:
        raise ParameterError("need n >= 1 and 0 < m <= M")
    if not (sigma1 > 0 and sigma2 > 0 and epsilon > 0):
        raise ParameterError("sigma1, sigma2, epsilon must be positive")
    if sigma1 >= 1 / (4 * M):
        raise HypothesisError("stability constants need sigma1 < 1/(4M)",
                              inequality=f"sigma1 = {sigma1} < 1/(4M) = {1 / (4 * M)}")
    b = 2 * (n * n + n + 2)
    nf = math.factorial(n)
    c0 = (8 * n * M / (3 * m)) * (3 * n + 2) * sigma1
    c1 = sigma2 / 24
    T0 = (m / (2 * M)) ** n * sigma1 * sigma2 / (2 ** 7 * nf)
    eps0 = M ** 2 * sigma1 ** 4 / (math.pi ** 2 * (21 * n + 30) ** 2 * ((2 * M / m) ** n * nf) ** 4)
    Delta = c0 * epsilon ** (1 / b)
    log_T = math.log(T0) - 0.75 * math.log(epsilon) + c1 * epsilon ** (-1 / b)
    T = math.exp(log_T) if log_T < 709 else math.inf
    adm = epsilon <= min(eps0, sigma2 ** b)
    return StabilityBounds(n, m, M, sigma1, sigma2, epsilon, eps0, b, c0, Delta, T0, c1, T, log_T, adm)


# ---------------------------------------------------------------------------------
# small twist maps

def small_twist_map(H0: PolyCoeff, h_pert: FourierGenFunction, s: float, **kw) -> ImplicitMap:
    """Map generated by s H0 + s h."""
    if not 0 < s <= 1:
        raise ParameterError("need 0 < s <= 1")
    F = h_pert.replace(F0=H0 * s, coef=h_pert.coef * s)
    return ImplicitMap(F, **kw)


# ---------------------------------------------------------------------------------
# integrable systems in polar charts

METHODS = {"symplectic-euler": (kern.SE, 1), "stormer-verlet": (kern.SV, 2),
           "yoshida4": (kern.Y4, 4), "exact": (kern.EXACT, 0)}


@dataclass(frozen=True, eq=False)
class IntegrableSystem:
    """H(q, p) = Hc(I) with per-axis polar actions I_i = (p_i^2 + q_i^2)/2."""

    name: str
    G_of_I: PolyCoeff

    @property
    def n(self) -> int:
        return self.G_of_I.n

    def _tables(self):
        G = self.G_of_I
        gcoef = np.stack([(derivative_matrix(G.n, G.degree, j) @ G.coeffs).real for j in range(G.n)])
        return G.center.astype(float), np.ascontiguousarray(G.exponents), gcoef

    def omega(self, I):
        return self.G_of_I.gradient(np.asarray(I, float)).real

    @staticmethod
    def to_cartesian(I, theta):
        I = np.asarray(I, float)
        th = np.asarray(theta, float)
        r = np.sqrt(2 * I)
        return r * np.sin(th), r * np.cos(th)  # (q, p)

    @staticmethod
    def from_cartesian(q, p):
        q = np.asarray(q, float)
        p = np.asarray(p, float)
        return 0.5 * (p * p + q * q), np.mod(np.arctan2(q, p), 2 * np.pi)

    def energy(self, q, p):
        I, _ = self.from_cartesian(q, p)
        return float(np.real(self.G_of_I(np.atleast_1d(I))))

    def step(self, method, h, q, p):
        """One step of the named method; returns (q, p)."""
        code, _ = _method(method)
        c, e, g = self._tables()
        qn, pn, ok = kern.step(code, np.asarray(q, float), np.asarray(p, float), float(h), c, e, g)
        if not ok:
            raise DivergenceError(f"implicit substep of {method} did not converge")
        return qn, pn


def _method(name):
    try:
        return METHODS[name]
    except KeyError:
        raise ParameterError(f"unknown method {name!r}; choose from {sorted(METHODS)}") from None


@dataclass(frozen=True)
class DriftRecord:
    system: str
    method: str
    r: int
    h: float
    steps: int
    max_dev: float
    dev_now: float
    energy_err: float
    event: str = ""


def checkpoints(total):
    """1, 2, 4, ... up to total, always ending at total (empty for 0)."""
    out, k = [], 1
    while k < total:
        out.append(k)
        k *= 2
    if total > 0:
        out.append(total)
    return out


def drift_experiment(system: IntegrableSystem, method: str, h: float, total_steps: int,
                     initial: ActionAngleState, box: DomainSpec | None = None):
    """Evolve in Cartesian variables and record the running max of |I(t) - I(0)|_2
    at geometrically spaced checkpoints."""
    code, r = _method(method)
    if not h > 0:
        raise ParameterError("need h > 0")
    if total_steps < 0:
        raise ParameterError("total_steps must be >= 0")
    if initial.n != system.n:
        raise ParameterError("initial state has the wrong dimension")
    I0 = np.array(initial.actions, float)
    if np.any(I0 < CHART_MARGIN):
        raise ParameterError(f"initial actions must be >= {CHART_MARGIN} (polar chart)")
    lo = np.full(system.n, -np.inf) if box is None else box.lo
    hi = np.full(system.n, np.inf) if box is None else box.hi
    c, e, g = system._tables()
    q, p = system.to_cartesian(I0, initial.angles)
    E0 = system.energy(q, p)
    maxdev, done = 0.0, 0
    if total_steps == 0:
        return [DriftRecord(system.name, method, r, h, 0, 0.0, 0.0, 0.0)]
    out = []
    for cp in checkpoints(total_steps):
        q, p, maxdev, k, status = kern.run(code, q, p, float(h), cp - done, I0, lo, hi, maxdev, c, e, g)
        done += k
        I, _ = system.from_cartesian(q, p)
        now = float(np.linalg.norm(I - I0))
        ev = {0: "", 1: "solver-failure", 2: "domain-exit"}[status]
        out.append(DriftRecord(system.name, method, r, h, done, float(maxdev), now,
                               system.energy(q, p) - E0, ev))
        if status == 1:
            raise DivergenceError(f"implicit substep failed at step {done}")
        if status:
            break
    return out


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual: float
    envelope_ok: bool | None


def scaling_fit(records, bounds: StabilityBounds | None = None, r=None) -> ScalingFit:
    """Least squares of log(max_dev) on log(h) over the last record of each h."""
    last = {}
    for rec in records:
        if rec.h not in last or rec.steps >= last[rec.h].steps:
            last[rec.h] = rec
    if len(last) < 3:
        raise ParameterError("need records for at least 3 distinct h")
    hs = np.array(sorted(last))
    dev = np.array([last[h].max_dev for h in hs])
    if np.any(dev <= 0):
        raise ParameterError("max_dev must be positive for a log-log fit")
    X = np.stack([np.log(hs), np.ones_like(hs)], axis=1)
    coef, *_ = np.linalg.lstsq(X, np.log(dev), rcond=None)
    res = float(np.linalg.norm(X @ coef - np.log(dev)))
    env = None
    if bounds is not None:
        order = r if r is not None else last[hs[0]].r
        env = bool(np.all(dev <= bounds.drift_envelope(hs, order)))
    return ScalingFit(float(coef[0]), float(coef[1]), res, env)


# ---------------------------------------------------------------------------------
# confinement

@dataclass(frozen=True)
class ConfinementEvent:
    step: int
    old: BlockLabel
    new: BlockLabel
    jump: float
    budget: float
    flagged: bool


def jump_budget(schedule: Schedule, r: int) -> float:
    """rho1^{(r)} / 4 with rho1^{(r)} = min(alpha_r / (4 K beta), 1)."""
    return min(schedule.a(r) / (4 * schedule.K * schedule.beta), 1.0) / 4


def confinement_diagnostic(trajectory, omega, schedule: Schedule, K=None):
    """Block-label change events along a trajectory of action snapshots.

    An event is flagged when the lattice dimension increases with a jump
    larger than the step budget of the block being left.
    """
    if not all(ok for *_, ok in schedule.nonoverlap()):
        raise HypothesisError("schedule violates the nonoverlap condition")
    X = np.atleast_2d(np.asarray(trajectory, float))
    labels = Classifier(schedule, K).classify(omega, X)
    events = []
    for t in range(1, len(labels)):
        a, b = labels[t - 1], labels[t]
        if a.lattice == b.lattice and a.l == b.l:
            continue
        jump = float(np.linalg.norm(X[t] - X[t - 1]))
        budget = jump_budget(schedule, max(a.r, 1))
        events.append(ConfinementEvent(t, a, b, jump, budget, b.r > a.r and jump > budget))
    return events


def max_jump(trajectory) -> float:
    X = np.atleast_2d(np.asarray(trajectory, float))
    if len(X) < 2:
        return 0.0
    return float(np.max(np.linalg.norm(np.diff(X, axis=0), axis=1)))


def orbit(m: ImplicitMap, x, y, steps):
    """Iterate a map from (x, y); angles are wrapped after every step.

    Returns action and angle arrays of shape (steps + 1, n).
    """
    x = np.atleast_2d(np.asarray(x, float))
    y = np.mod(np.atleast_2d(np.asarray(y, float)), 2 * np.pi)
    xs = np.empty((steps + 1, x.shape[1]))
    ys = np.empty_like(xs)
    xs[0], ys[0] = x[0], y[0]
    for t in range(steps):
        x, y, _ = m.forward(x, y)
        y = np.mod(y, 2 * np.pi)
        xs[t + 1], ys[t + 1] = x[0], y[0]
    return xs, ys
