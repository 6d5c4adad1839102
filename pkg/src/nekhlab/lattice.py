"""Saturated integer lattices and the enumeration of K-lattices.

Everything here is exact integer arithmetic on Python ints; the matrices are
tiny (n <= 3 in the enumerator) so clarity wins over speed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, reduce
from math import gcd

import numpy as np

from .errors import ParameterError


def _rows(M):
    return [[int(v) for v in row] for row in M]


def hnf(M):
    """Row Hermite normal form with the unimodular transform.

    Returns ``(H, U)`` with ``U @ M == H``; ``H`` is upper echelon with positive
    pivots and entries above each pivot reduced into ``[0, pivot)``.  Zero rows
    are kept at the bottom.
    """
    A = _rows(M)
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    row = 0
    pivots = []
    for col in range(n):
        if row >= m:
            break
        # Euclid on the column below `row`
        while True:
            nz = [i for i in range(row, m) if A[i][col] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i][col]))
            A[row], A[p] = A[p], A[row]
            U[row], U[p] = U[p], U[row]
            done = True
            for i in range(row + 1, m):
                q = A[i][col] // A[row][col]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[row])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[row])]
                if A[i][col] != 0:
                    done = False
            if done:
                break
        if A[row][col] == 0:
            continue
        if A[row][col] < 0:
            A[row] = [-a for a in A[row]]
            U[row] = [-a for a in U[row]]
        for i in range(row):
            q = A[i][col] // A[row][col]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[row])]
                U[i] = [a - q * b for a, b in zip(U[i], U[row])]
        pivots.append(col)
        row += 1
    return A, U


def integer_kernel(M, n=None):
    """Basis rows x of the full integer lattice {x in Z^n : M x = 0}."""
    M = _rows(M)
    if not M:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    n = len(M[0])
    T = [list(col) for col in zip(*M)]  # n x m
    H, U = hnf(T)
    return [U[i] for i in range(n) if not any(H[i])]


def det(M) -> int:
    """Exact determinant by Bareiss elimination."""
    A = _rows(M)
    k = len(A)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if A[i][i] == 0:
            sw = next((j for j in range(i + 1, k) if A[j][i] != 0), None)
            if sw is None:
                return 0
            A[i], A[sw] = A[sw], A[i]
            sign = -sign
        for j in range(i + 1, k):
            for l in range(i + 1, k):
                A[j][l] = (A[j][l] * A[i][i] - A[j][i] * A[i][l]) // prev
        prev = A[i][i]
    return sign * A[k - 1][k - 1]


def minors_gcd(B) -> int:
    """gcd of all maximal minors of an r x n integer matrix (0 if rank < r)."""
    B = _rows(B)
    r = len(B)
    if r == 0:
        return 1
    n = len(B[0])
    g = 0
    for cols in itertools.combinations(range(n), r):
        g = gcd(g, det([[row[c] for c in cols] for row in B]))
    return abs(g)


def rank(B) -> int:
    H, _ = hnf(B) if len(B) else ([], [])
    return sum(1 for row in H if any(row))


def primitive(k):
    g = reduce(gcd, (abs(int(v)) for v in k), 0)
    return tuple(int(v) // g for v in k) if g else tuple(int(v) for v in k)


def positive(k):
    """Representative of +-k whose first nonzero entry is positive."""
    k = tuple(int(v) for v in k)
    for v in k:
        if v:
            return k if v > 0 else tuple(-u for u in k)
    return k


def l1_ball(n, K, include_zero=False):
    """All integer vectors with 1 <= |k|_1 <= K, sorted by (|k|_1, tuple)."""
    out = [k for k in itertools.product(range(-K, K + 1), repeat=n)
           if sum(abs(v) for v in k) <= K and (include_zero or any(k))]
    return sorted(out, key=lambda k: (sum(abs(v) for v in k), k))


@dataclass(frozen=True, eq=False)
class Lattice:
    """Saturated sublattice of Z^n given by independent basis rows."""

    basis: np.ndarray
    n: int = field(default=None)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.int64)
        n = self.n if self.n is not None else (B.shape[-1] if B.size else None)
        if n is None:
            raise ParameterError("dimension needed for an empty basis")
        B = B.reshape(-1, n)
        if rank(B.tolist()) != B.shape[0]:
            raise ParameterError("basis vectors are not linearly independent")
        if minors_gcd(B.tolist()) != 1:
            raise ParameterError("lattice is not maximal (not saturated)")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "n", int(n))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((0, n), dtype=np.int64), n)

    @classmethod
    def full(cls, n):
        return cls(np.eye(n, dtype=np.int64), n)

    @classmethod
    def saturate(cls, vectors, n=None):
        """Smallest saturated lattice containing the given vectors (span intersect Z^n)."""
        V = [list(map(int, v)) for v in vectors if any(v)]
        if not V:
            return cls.zero(n if n is not None else len(vectors[0]))
        n = len(V[0])
        normals = integer_kernel(V)
        if not normals:
            return cls.full(n)
        return cls(np.array(integer_kernel(normals), dtype=np.int64).reshape(-1, n), n)

    @property
    def r(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def normals(self) -> np.ndarray:
        """Integer rows spanning the orthogonal complement."""
        if self.r == 0:
            return np.eye(self.n, dtype=np.int64)
        return np.array(integer_kernel(self.basis.tolist()), dtype=np.int64).reshape(-1, self.n)

    @cached_property
    def hnf(self) -> tuple:
        H, _ = hnf(self.basis.tolist()) if self.r else ([], None)
        return tuple(tuple(row) for row in H if any(row))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.n == other.n and self.hnf == other.hnf

    def __hash__(self):
        return hash((self.n, self.hnf))

    def __repr__(self):
        return f"Lattice(n={self.n}, basis={self.basis.tolist()})"

    def contains(self, keys) -> np.ndarray:
        """Membership of integer rows (exact; relies on saturation)."""
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, self.n)
        if self.normals.shape[0] == 0:
            return np.ones(keys.shape[0], dtype=bool)
        return np.all(keys @ self.normals.T == 0, axis=1)

    def members(self, K):
        """Nonzero lattice vectors with |k|_1 <= K, positive representatives, sorted."""
        ball = [k for k in l1_ball(self.n, K) if positive(k) == k]
        if not ball:
            return []
        mask = self.contains(ball)
        return [k for k, m in zip(ball, mask) if m]

    def k_basis(self, K):
        """Canonical K-basis: first generating r-subset of ``members(K)`` in
        (|k|_1, lexicographic) order; ``None`` if the lattice has no K-basis."""
        if self.r == 0:
            return np.zeros((0, self.n), dtype=np.int64)
        for combo in itertools.combinations(self.members(K), self.r):
            if minors_gcd(combo) == 1:
                return np.array(combo, dtype=np.int64)
        return None

    def canonical(self, K) -> "Lattice":
        B = self.k_basis(K)
        if B is None:
            raise ParameterError(f"lattice has no {K}-basis")
        return Lattice(B, self.n)

    def is_k_lattice(self, K) -> bool:
        return self.k_basis(K) is not None


def is_maximal(basis) -> bool:
    """Saturation test: gcd of maximal minors equals 1."""
    B = _rows(basis)
    return rank(B) == len(B) and minors_gcd(B) == 1


MAX_N, MAX_K = 3, 6


def enumerate_k_lattices(n: int, K: int, r: int):
    """All saturated r-dimensional lattices of Z^n possessing a K-basis.

    Each lattice is returned with its canonical K-basis; the list is ordered
    by that basis.
    """
    if not (1 <= n <= MAX_N and 0 <= K <= MAX_K):
        raise ParameterError(f"enumeration limited to n <= {MAX_N}, K <= {MAX_K}")
    if not 0 <= r <= n:
        raise ParameterError("need 0 <= r <= n")
    if r == 0:
        return [Lattice.zero(n)]
    cand = sorted({primitive(positive(k)) for k in l1_ball(n, K)},
                  key=lambda k: (sum(abs(v) for v in k), k))
    seen = {}
    for combo in itertools.combinations(cand, r):
        if rank(combo) < r:
            continue
        L = Lattice.saturate(combo, n)
        if L in seen:
            continue
        seen[L] = L.k_basis(K)
    out = [Lattice(B, n) for B in seen.values() if B is not None]
    return sorted(out, key=lambda L: [tuple(row) for row in L.basis.tolist()])
