"""Fourier series in angles with polynomial action coefficients.

``f(x, y) = F0(x) + sum_k f_k(x) exp(i k.y)`` where every ``f_k`` is a
:class:`~nekhlab.poly.PolyCoeff` on a shared basis.  Modes are held as a key
matrix (M, n) and a coefficient matrix (M, m) so evaluation is two matmuls.

Norms are the exponentially weighted Fourier norms with the action sup
replaced by the certified coefficient bound ``sum |c_a| R^a`` on the
polydisc of radii ``half_width + rho1``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .domain import DomainSpec
from .errors import ParameterError
from .poly import PolyCoeff, derivative_matrix, monomial_gradients, monomials, multi_indices


def l1(keys) -> np.ndarray:
    return np.abs(np.asarray(keys)).sum(axis=-1)


def _merge(keys_a, coef_a, keys_b, coef_b, sign=1.0):
    table = {}
    for k, c in zip(map(tuple, keys_a), coef_a):
        table[k] = c.copy()
    for k, c in zip(map(tuple, keys_b), coef_b):
        if k in table:
            table[k] = table[k] + sign * c
        else:
            table[k] = sign * c
    return table


@dataclass(frozen=True, eq=False)
class FourierGenFunction:
    F0: PolyCoeff
    keys: np.ndarray
    coef: np.ndarray
    K_rep: int
    dom: DomainSpec

    def __post_init__(self):
        n = self.F0.n
        keys = np.asarray(self.keys, dtype=np.int64).reshape(-1, n)
        m = multi_indices(n, self.F0.degree).shape[0]
        coef = np.asarray(self.coef, dtype=complex).reshape(keys.shape[0], m)
        if keys.shape[0] and l1(keys).max() > self.K_rep:
            raise ParameterError("mode key exceeds K_rep")
        if self.dom.n != n:
            raise ParameterError("domain dimension mismatch")
        order = np.lexsort(keys.T[::-1]) if keys.shape[0] else np.arange(0)
        keys, coef = keys[order], coef[order]
        if keys.shape[0] and np.any(np.all(keys[1:] == keys[:-1], axis=1)):
            raise ParameterError("duplicate mode keys")
        keys.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "coef", coef)

    # construction -----------------------------------------------------------
    @classmethod
    def from_modes(cls, F0, modes: dict, K_rep, dom):
        n = F0.n
        m = F0.coeffs.size
        ks, cs = [], []
        for k, p in modes.items():
            k = tuple(int(v) for v in k)
            if len(k) != n:
                raise ParameterError("mode key has wrong dimension")
            ks.append(k)
            cs.append(p.coeffs if isinstance(p, PolyCoeff) else np.asarray(p, complex))
        keys = np.array(ks, dtype=np.int64).reshape(-1, n)
        coef = np.array(cs, dtype=complex).reshape(-1, m)
        return cls(F0, keys, coef, K_rep, dom)

    @classmethod
    def zero(cls, dom: DomainSpec, degree: int = 6, K_rep: int = 0):
        F0 = PolyCoeff.zero(dom.center, degree)
        return cls(F0, np.zeros((0, dom.n)), np.zeros((0, F0.coeffs.size)), K_rep, dom)

    @classmethod
    def trig(cls, dom, degree, terms, F0=None, K_rep=None):
        """Real trigonometric sum.

        ``terms`` is an iterable of ``(k, amp, kind)`` with ``kind`` in
        {"cos", "sin"} and ``amp`` either a scalar or a PolyCoeff; the term
        is ``amp(x) * cos(k.y)`` or ``amp(x) * sin(k.y)``.
        """
        center = dom.center
        F0 = PolyCoeff.zero(center, degree) if F0 is None else F0
        table: dict = {}
        kmax = 0
        for k, amp, kind in terms:
            k = tuple(int(v) for v in k)
            mk = tuple(-v for v in k)
            kmax = max(kmax, sum(abs(v) for v in k))
            a = amp if isinstance(amp, PolyCoeff) else PolyCoeff.constant(amp, center, degree)
            if kind == "cos":
                cp, cm = 0.5 * a.coeffs, 0.5 * a.coeffs
            elif kind == "sin":
                cp, cm = -0.5j * a.coeffs, 0.5j * a.coeffs
            else:
                raise ParameterError(f"unknown kind {kind!r}")
            if k == mk:
                # k = 0: cos(0) = 1, sin(0) = 0
                cp = a.coeffs if kind == "cos" else 0 * a.coeffs
                table[k] = table.get(k, 0) + cp
                continue
            table[k] = table.get(k, 0) + cp
            table[mk] = table.get(mk, 0) + cm
        modes = {k: PolyCoeff(v, center, degree) for k, v in table.items()}
        return cls.from_modes(F0, modes, kmax if K_rep is None else K_rep, dom)

    def replace(self, **kw):
        args = dict(F0=self.F0, keys=self.keys, coef=self.coef, K_rep=self.K_rep, dom=self.dom)
        args.update(kw)
        return FourierGenFunction(**args)

    def perturbation(self):
        """Same modes with the integrable part removed."""
        return self.replace(F0=PolyCoeff.zero(self.center, self.degree))

    def with_dom(self, dom):
        return self.replace(dom=dom)

    # basic properties ---------------------------------------------------------
    @property
    def n(self) -> int:
        return self.F0.n

    @property
    def degree(self) -> int:
        return self.F0.degree

    @property
    def center(self) -> np.ndarray:
        return self.F0.center

    @cached_property
    def modes(self) -> dict:
        return {tuple(int(v) for v in k): PolyCoeff(c, self.center, self.degree)
                for k, c in zip(self.keys, self.coef)}

    @cached_property
    def _lookup(self) -> dict:
        return {tuple(int(v) for v in k): i for i, k in enumerate(self.keys)}

    def mode(self, k) -> PolyCoeff:
        i = self._lookup.get(tuple(int(v) for v in k))
        if i is None:
            return PolyCoeff.zero(self.center, self.degree)
        return PolyCoeff(self.coef[i], self.center, self.degree)

    def is_real(self, tol=1e-14) -> bool:
        """Reality invariant: f_{-k} = conj(f_k) and F0 real."""
        if not self.F0.is_real(tol):
            return False
        scale = max(1.0, float(np.abs(self.coef).max(initial=0.0)))
        for k, i in self._lookup.items():
            j = self._lookup.get(tuple(-v for v in k))
            other = np.zeros_like(self.coef[i]) if j is None else self.coef[j]
            if np.max(np.abs(self.coef[i] - np.conj(other))) > tol * scale:
                return False
        return True

    def realify(self):
        """Project onto real functions by symmetrising conjugate pairs."""
        table = {k: self.coef[i] for k, i in self._lookup.items()}
        out = {}
        for k, c in table.items():
            mk = tuple(-v for v in k)
            other = table.get(mk, np.zeros_like(c))
            out[k] = 0.5 * (c + np.conj(other))
            out.setdefault(mk, 0.5 * (other + np.conj(c)))
        F0 = PolyCoeff(self.F0.coeffs.real, self.center, self.degree)
        return self._from_table(out, F0=F0)

    def _from_table(self, table, F0=None, K_rep=None, dom=None):
        n, m = self.n, self.coef.shape[1]
        ks = sorted(table)
        keys = np.array(ks, dtype=np.int64).reshape(-1, n)
        coef = np.array([table[k] for k in ks], dtype=complex).reshape(-1, m)
        return FourierGenFunction(self.F0 if F0 is None else F0, keys, coef,
                                  self.K_rep if K_rep is None else K_rep,
                                  self.dom if dom is None else dom)

    def dropzeros(self):
        keep = np.any(self.coef != 0, axis=1)
        return self.replace(keys=self.keys[keep], coef=self.coef[keep])

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        self.F0._check(other.F0)
        table = _merge(self.keys, self.coef, other.keys, other.coef)
        return self._from_table(table, F0=self.F0 + other.F0, K_rep=max(self.K_rep, other.K_rep))

    def __sub__(self, other):
        self.F0._check(other.F0)
        table = _merge(self.keys, self.coef, other.keys, other.coef, sign=-1.0)
        return self._from_table(table, F0=self.F0 - other.F0, K_rep=max(self.K_rep, other.K_rep))

    def __neg__(self):
        return self.replace(F0=-self.F0, coef=-self.coef)

    def __mul__(self, scalar):
        if isinstance(scalar, FourierGenFunction):
            return self.multiply(scalar)[0]
        return self.replace(F0=self.F0 * scalar, coef=self.coef * scalar)

    __rmul__ = __mul__

    def multiply(self, other):
        """Truncated product of two perturbations (F0 parts are ignored).

        Returns ``(product, dropped)``; ``dropped`` is the weighted norm on
        ``self.dom`` of everything discarded by the degree bound and the
        mode cutoff ``max(K_rep)``.
        """
        self.F0._check(other.F0)
        K_rep = max(self.K_rep, other.K_rep)
        radii = self.dom.radii
        rho2 = self.dom.rho2
        table: dict = {}
        dropped = 0.0
        for ka, ca in zip(self.keys, self.coef):
            pa = PolyCoeff(ca, self.center, self.degree)
            for kb, cb in zip(other.keys, other.coef):
                k = tuple(int(v) for v in ka + kb)
                prod, lost = pa.multiply(PolyCoeff(cb, self.center, self.degree), radii)
                w = np.exp(sum(abs(v) for v in k) * rho2)
                if sum(abs(v) for v in k) > K_rep:
                    dropped += (prod.certified_sup(radii) + lost) * w
                    continue
                dropped += lost * w
                table[k] = table.get(k, 0) + prod.coeffs
        zero = PolyCoeff.zero(self.center, self.degree)
        return self._from_table(table, F0=zero, K_rep=K_rep), float(dropped)

    # evaluation ----------------------------------------------------------------
    def _prep(self, x, y):
        x = np.atleast_2d(np.asarray(x))
        y = np.atleast_2d(np.asarray(y))
        return x, y

    def mode_values(self, x) -> np.ndarray:
        """f_k(x) for every stored mode; (N, M)."""
        V = monomials(np.atleast_2d(x), self.center, self.degree)
        return V @ self.coef.T

    def _phases(self, y):
        return np.exp(1j * (y @ self.keys.T))

    def __call__(self, x, y):
        """Complex value of F0(x) + sum_k f_k(x) e^{ik.y} (real inputs give ~real output)."""
        x, y = self._prep(x, y)
        V = monomials(x, self.center, self.degree)
        out = V @ self.F0.coeffs
        if self.keys.shape[0]:
            out = out + np.sum((V @ self.coef.T) * self._phases(y), axis=1)
        return out

    def eval_perturbation(self, x, y):
        x, y = self._prep(x, y)
        if not self.keys.shape[0]:
            return np.zeros(x.shape[0], dtype=complex)
        V = monomials(x, self.center, self.degree)
        return np.sum((V @ self.coef.T) * self._phases(y), axis=1)

    def grad_angle(self, x, y):
        """Gradient in the angles, (N, n)."""
        x, y = self._prep(x, y)
        if not self.keys.shape[0]:
            return np.zeros(x.shape, dtype=complex)
        V = monomials(x, self.center, self.degree)
        P = (V @ self.coef.T) * self._phases(y)
        return 1j * (P @ self.keys)

    def grad_action(self, x, y, include_F0=True):
        """Gradient in the actions, (N, n)."""
        x, y = self._prep(x, y)
        dV = monomial_gradients(x, self.center, self.degree)
        out = np.zeros(x.shape, dtype=complex)
        if include_F0:
            out += (dV @ self.F0.coeffs).T
        if self.keys.shape[0]:
            E = self._phases(y)
            for j in range(self.n):
                out[:, j] += np.sum((dV[j] @ self.coef.T) * E, axis=1)
        return out

    def frequency(self, x):
        """Gradient of F0."""
        return self.F0.gradient(np.atleast_2d(x))

    # exact derivatives -----------------------------------------------------------
    def d_action(self, j):
        D = derivative_matrix(self.n, self.degree, j)
        F0 = PolyCoeff(D @ self.F0.coeffs, self.center, self.degree)
        return self.replace(F0=F0, coef=self.coef @ D.T)

    def d_angle(self, j):
        F0 = PolyCoeff.zero(self.center, self.degree)
        return self.replace(F0=F0, coef=self.coef * (1j * self.keys[:, j])[:, None])

    def partials(self):
        """``(df_dI, df_dtheta)``: lists of exact partial derivatives."""
        return ([self.d_action(j) for j in range(self.n)],
                [self.d_angle(j) for j in range(self.n)])

    # projections -------------------------------------------------------------------
    def _select(self, mask):
        return self.replace(F0=PolyCoeff.zero(self.center, self.degree),
                            keys=self.keys[mask], coef=self.coef[mask])

    def project_tail(self, K):
        """Modes with |k|_1 > K."""
        if K < 0:
            raise ParameterError("K must be >= 0")
        return self._select(l1(self.keys) > K)

    def truncate(self, K):
        """Modes with |k|_1 <= K."""
        if K < 0:
            raise ParameterError("K must be >= 0")
        return self._select(l1(self.keys) <= K)

    def project_resonant(self, lattice, K):
        """Modes k in the lattice with |k|_1 <= K."""
        if K < 0:
            raise ParameterError("K must be >= 0")
        inM = lattice.contains(self.keys) if self.keys.shape[0] else np.zeros(0, bool)
        return self._select(inM & (l1(self.keys) <= K))

    def project_nonresonant(self, lattice, K):
        """Modes k outside the lattice with |k|_1 <= K."""
        if K < 0:
            raise ParameterError("K must be >= 0")
        inM = lattice.contains(self.keys) if self.keys.shape[0] else np.zeros(0, bool)
        return self._select(~inM & (l1(self.keys) <= K))

    # serialisation --------------------------------------------------------------
    def to_text(self) -> str:
        buf = io.StringIO()
        g = "%.17g"
        buf.write("# nekhlab FourierGenFunction v1\n")
        buf.write(f"# n={self.n} degree={self.degree} K_rep={self.K_rep}\n")
        buf.write("# center=" + ",".join(g % v for v in self.center) + "\n")
        buf.write("# box=" + ";".join(f"{g % a},{g % b}" for a, b in self.dom.box) + "\n")
        buf.write(f"# rho={g % self.dom.rho1},{g % self.dom.rho2}\n")
        exps = self.F0.exponents

        def rec(k, c):
            for a, v in zip(exps, c):
                if v != 0:
                    buf.write(",".join(map(str, k)) + ";" + ",".join(map(str, a)) + ";"
                              + g % v.real + ";" + g % v.imag + "\n")

        buf.write("# section=F0\n")
        rec([0] * self.n, self.F0.coeffs)
        buf.write("# section=modes\n")
        for k, c in zip(self.keys, self.coef):
            rec(k, c)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str):
        meta = {}
        section = None
        f0_terms, mode_terms = {}, {}
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for part in body.split(" "):
                    if "=" in part:
                        key, val = part.split("=", 1)
                        if key == "section":
                            section = val
                        else:
                            meta[key] = val
                continue
            k, a, re_, im_ = line.split(";")
            k = tuple(int(v) for v in k.split(","))
            a = tuple(int(v) for v in a.split(","))
            val = complex(float(re_), float(im_))
            if section == "F0":
                f0_terms[a] = val
            else:
                mode_terms.setdefault(k, {})[a] = val
        degree = int(meta["degree"])
        center = np.array([float(v) for v in meta["center"].split(",")])
        box = tuple(tuple(float(v) for v in iv.split(",")) for iv in meta["box"].split(";"))
        rho1, rho2 = (float(v) for v in meta["rho"].split(","))
        dom = DomainSpec(box, rho1, rho2)
        F0 = PolyCoeff.from_terms(f0_terms, center, degree)
        modes = {k: PolyCoeff.from_terms(t, center, degree) for k, t in mode_terms.items()}
        return cls.from_modes(F0, modes, int(meta["K_rep"]), dom)


# norms -----------------------------------------------------------------------------

def _mode_sups(f, dom):
    r = dom.radii
    w = np.prod(r ** f.F0.exponents, axis=1)
    return np.abs(f.coef) @ w


def weighted_norm(f: FourierGenFunction, dom: DomainSpec | None = None) -> float:
    """sum_k sup|f_k| e^{|k| rho2} with the certified coefficient sup (F0 excluded)."""
    dom = f.dom if dom is None else dom
    if not f.keys.shape[0]:
        return 0.0
    return float(np.sum(_mode_sups(f, dom) * np.exp(l1(f.keys) * dom.rho2)))


def _action_grad_sups(f, dom):
    r = dom.radii
    w = np.prod(r ** f.F0.exponents, axis=1)
    sups = np.zeros((f.keys.shape[0], f.n))
    for j in range(f.n):
        D = derivative_matrix(f.n, f.degree, j)
        sups[:, j] = np.abs(f.coef @ D.T) @ w
    return sups


def vectorfield_norms(f: FourierGenFunction, dom: DomainSpec | None = None):
    """``(||df/dtheta||_{rho,1}, ||df/dI||_{rho,inf})``, certified, F0 excluded."""
    dom = f.dom if dom is None else dom
    if not f.keys.shape[0]:
        return 0.0, 0.0
    w = np.exp(l1(f.keys) * dom.rho2)
    ang = float(np.sum(l1(f.keys) * _mode_sups(f, dom) * w))
    act = float(np.sum(_action_grad_sups(f, dom).max(axis=1) * w))
    return ang, act


def vectorfield_norm(f: FourierGenFunction, dom: DomainSpec | None = None, c: float = 1.0) -> float:
    """||Df||_{G,rho,c} = max(||df/dtheta||_1, c ||df/dI||_inf)."""
    if not c > 0:
        raise ParameterError("c must be positive")
    ang, act = vectorfield_norms(f, dom)
    return max(ang, c * act)


def sampled_sup(f: FourierGenFunction, dom: DomainSpec | None = None, samples=1000, rng=None) -> float:
    """Lower estimate of sup |f - F0| over the complex domain D_rho(G)."""
    dom = f.dom if dom is None else dom
    rng = np.random.default_rng(0) if rng is None else rng
    x = dom.sample(rng, samples, complex_tube=dom.rho1 > 0)
    y = rng.uniform(0, 2 * np.pi, size=(samples, f.n)) + 1j * rng.uniform(-dom.rho2, dom.rho2, size=(samples, f.n))
    return float(np.max(np.abs(f.eval_perturbation(x, y))))


@dataclass(frozen=True)
class CauchyReport:
    lhs: float
    rhs: float
    status: str  # "pass" | "inconclusive"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def cauchy_check(f, dom, delta, c) -> CauchyReport:
    """Check ||Df||_{rho-delta,c} <= (c / min(delta1, c delta2)) ||f||_rho."""
    d1, d2 = (float(v) for v in delta)
    if not (0 < d1 < dom.rho1 and 0 < d2 < dom.rho2):
        raise ParameterError("need 0 < delta < rho componentwise")
    if not c > 0:
        raise ParameterError("c must be positive")
    lhs = vectorfield_norm(f, dom.shrink(d1, d2), c)
    rhs = c / min(d1, c * d2) * weighted_norm(f, dom)
    return CauchyReport(lhs, rhs, "pass" if lhs <= rhs * (1 + 1e-12) else "inconclusive")


def tail_check(f, dom, delta, c, K) -> CauchyReport:
    """Check ||D f^{>K}||_{rho-delta,c} <= e^{-K delta2} ||Df||_{rho,c}."""
    d1, d2 = (float(v) for v in delta)
    if not (0 < d1 < dom.rho1 and 0 < d2 < dom.rho2):
        raise ParameterError("need 0 < delta < rho componentwise")
    lhs = vectorfield_norm(f.project_tail(K), dom.shrink(d1, d2), c)
    rhs = np.exp(-K * d2) * vectorfield_norm(f, dom, c)
    return CauchyReport(lhs, float(rhs), "pass" if lhs <= rhs * (1 + 1e-12) else "inconclusive")
