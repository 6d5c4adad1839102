"""Truncated multivariate polynomials used as action coefficients.

A :class:`PolyCoeff` stores complex coefficients over all multi-indices of
total degree ``<= degree`` in graded-lexicographic order, expanded around a
fixed ``center``.  All polynomials sharing ``(n, degree, center)`` share one
monomial table, so Fourier modes can be stacked into dense matrices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError


@lru_cache(maxsize=None)
def multi_indices(n: int, degree: int) -> np.ndarray:
    """All exponent vectors of total degree <= ``degree``, graded-lex order."""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            alpha = [0] * n
            for j in combo:
                alpha[j] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement yields x0^2 before x0 x1; reverse-lex inside each degree
    out.sort(key=lambda a: (sum(a), tuple(-v for v in a)))
    arr = np.array(out, dtype=np.int64).reshape(len(out), n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _index_lookup(n: int, degree: int) -> dict:
    return {tuple(a): i for i, a in enumerate(multi_indices(n, degree))}


def monomials(x: np.ndarray, center: np.ndarray, degree: int) -> np.ndarray:
    """Values of every monomial ``(x - center)^alpha`` at the rows of ``x``.

    ``x`` has shape (N, n); returns (N, m).
    """
    x = np.asarray(x)
    n = x.shape[-1]
    exps = multi_indices(n, degree)
    dx = x - center
    # powers[j][:, p] = dx_j^p
    out = np.ones((x.shape[0], exps.shape[0]), dtype=np.result_type(dx, float))
    for j in range(n):
        pw = dx[:, j:j + 1] ** np.arange(degree + 1)
        out *= pw[:, exps[:, j]]
    return out


def monomial_gradients(x: np.ndarray, center: np.ndarray, degree: int) -> np.ndarray:
    """Partial derivatives of every monomial; shape (n, N, m)."""
    x = np.asarray(x)
    n = x.shape[-1]
    exps = multi_indices(n, degree)
    dx = x - center
    pw = [dx[:, j:j + 1] ** np.arange(degree + 1) for j in range(n)]
    out = np.empty((n, x.shape[0], exps.shape[0]), dtype=np.result_type(dx, float))
    for i in range(n):
        g = np.ones((x.shape[0], exps.shape[0]), dtype=out.dtype)
        for j in range(n):
            if j == i:
                e = np.maximum(exps[:, j] - 1, 0)
                g *= pw[j][:, e] * exps[:, j]
            else:
                g *= pw[j][:, exps[:, j]]
        out[i] = g
    return out


@lru_cache(maxsize=None)
def derivative_matrix(n: int, degree: int, j: int) -> np.ndarray:
    """Matrix D such that ``D @ c`` are the coefficients of d/dx_j."""
    exps = multi_indices(n, degree)
    look = _index_lookup(n, degree)
    D = np.zeros((exps.shape[0], exps.shape[0]))
    for col, alpha in enumerate(exps):
        if alpha[j] == 0:
            continue
        beta = list(alpha)
        beta[j] -= 1
        D[look[tuple(beta)], col] = alpha[j]
    D.setflags(write=False)
    return D


@lru_cache(maxsize=None)
def _product_table(n: int, degree: int):
    """Index pairs (i, j) -> k for monomial products within the degree bound,
    and pairs that overflow it."""
    exps = multi_indices(n, degree)
    look = _index_lookup(n, degree)
    keep_i, keep_j, keep_k, drop_i, drop_j, drop_deg = [], [], [], [], [], []
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            s = tuple(a + b)
            k = look.get(s)
            if k is None:
                drop_i.append(i)
                drop_j.append(j)
                drop_deg.append(s)
            else:
                keep_i.append(i)
                keep_j.append(j)
                keep_k.append(k)
    return (np.array(keep_i), np.array(keep_j), np.array(keep_k),
            np.array(drop_i, dtype=int), np.array(drop_j, dtype=int),
            np.array(drop_deg, dtype=int).reshape(-1, n))


def chebyshev_nodes(lo: np.ndarray, hi: np.ndarray, count: int) -> np.ndarray:
    """Tensor grid of Chebyshev points of the first kind on a box; (count^n, n)."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    t = np.cos((2 * np.arange(count) + 1) * np.pi / (2 * count))[::-1]
    axes = [0.5 * (lo[j] + hi[j]) + 0.5 * (hi[j] - lo[j]) * t for j in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True, eq=False)
class PolyCoeff:
    """Polynomial of total degree <= ``degree`` in ``n`` variables around ``center``."""

    coeffs: np.ndarray
    center: np.ndarray
    degree: int
    n: int = field(init=False)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "n", center.size)
        m = multi_indices(self.n, self.degree).shape[0]
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size != m:
            raise ParameterError(f"expected {m} coefficients for n={self.n}, d={self.degree}, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction ----------------------------------------------------------
    @classmethod
    def zero(cls, center, degree):
        center = np.asarray(center, float).ravel()
        return cls(np.zeros(multi_indices(center.size, degree).shape[0]), center, degree)

    @classmethod
    def constant(cls, value, center, degree):
        p = cls.zero(center, degree)
        c = p.coeffs.copy()
        c[0] = value
        return cls(c, center, degree)

    @classmethod
    def from_terms(cls, terms: dict, center, degree):
        """Build from ``{alpha: value}`` with alpha measured from ``center``."""
        center = np.asarray(center, float).ravel()
        look = _index_lookup(center.size, degree)
        c = np.zeros(len(look), dtype=complex)
        for alpha, v in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if alpha not in look:
                raise ParameterError(f"multi-index {alpha} exceeds degree {degree}")
            c[look[alpha]] += v
        return cls(c, center, degree)

    @classmethod
    def from_callable(cls, func, center, degree, lo, hi, nodes=None):
        """Least-squares fit on Chebyshev nodes of the box [lo, hi].

        Returns ``(poly, max_abs_residual)``.
        """
        center = np.asarray(center, float).ravel()
        nodes = nodes or degree + 2
        pts = chebyshev_nodes(lo, hi, nodes)
        V = monomials(pts, center, degree)
        vals = np.asarray(func(pts))
        c, *_ = np.linalg.lstsq(V, vals, rcond=None)
        res = float(np.max(np.abs(V @ c - vals))) if vals.size else 0.0
        return cls(c, center, degree), res

    # algebra ---------------------------------------------------------------
    @property
    def exponents(self) -> np.ndarray:
        return multi_indices(self.n, self.degree)

    def terms(self) -> dict:
        return {tuple(int(v) for v in a): c for a, c in zip(self.exponents, self.coeffs) if c != 0}

    def _check(self, other):
        if (other.degree != self.degree or other.n != self.n
                or not np.array_equal(other.center, self.center)):
            raise ParameterError("incompatible polynomial bases")

    def __add__(self, other):
        self._check(other)
        return PolyCoeff(self.coeffs + other.coeffs, self.center, self.degree)

    def __sub__(self, other):
        self._check(other)
        return PolyCoeff(self.coeffs - other.coeffs, self.center, self.degree)

    def __neg__(self):
        return PolyCoeff(-self.coeffs, self.center, self.degree)

    def __mul__(self, scalar):
        if isinstance(scalar, PolyCoeff):
            return self.multiply(scalar)[0]
        return PolyCoeff(self.coeffs * scalar, self.center, self.degree)

    __rmul__ = __mul__

    def conj(self):
        return PolyCoeff(np.conj(self.coeffs), self.center, self.degree)

    def derivative(self, j: int):
        D = derivative_matrix(self.n, self.degree, j)
        return PolyCoeff(D @ self.coeffs, self.center, self.degree)

    def multiply(self, other, radii=None):
        """Product truncated to ``degree``.

        Returns ``(product, dropped)`` where ``dropped`` is the certified
        sup bound of the discarded higher-degree terms at ``radii``
        (zero radii if omitted gives 0 unless constant overflow is impossible).
        """
        self._check(other)
        ki, kj, kk, di, dj, ddeg = _product_table(self.n, self.degree)
        out = np.zeros_like(self.coeffs)
        np.add.at(out, kk, self.coeffs[ki] * other.coeffs[kj])
        dropped = 0.0
        if di.size:
            r = np.ones(self.n) if radii is None else np.asarray(radii, float)
            w = np.prod(r ** ddeg, axis=1)
            dropped = float(np.sum(np.abs(self.coeffs[di] * other.coeffs[dj]) * w))
        return PolyCoeff(out, self.center, self.degree), dropped

    # evaluation --------------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        v = monomials(X, self.center, self.degree) @ self.coeffs
        return v[0] if single else v

    def gradient(self, x):
        x = np.asarray(x)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        g = (monomial_gradients(X, self.center, self.degree) @ self.coeffs).T
        return g[0] if single else g

    # norms -------------------------------------------------------------------
    def certified_sup(self, radii) -> float:
        """Upper bound for sup |p| over the polydisc |x_j - center_j| <= radii_j."""
        r = np.asarray(radii, float)
        return float(np.sum(np.abs(self.coeffs) * np.prod(r ** self.exponents, axis=1)))

    def is_real(self, tol=0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))
