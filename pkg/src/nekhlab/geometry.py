"""Resonant zones, blocks and cylinders in action space.

Zones are tested with a lattice's canonical K-basis.  Block classification
works from the set of near-resonant vectors

    R_a(x) = {k in Z^n_K : dist(k.w(x), 2 pi Z) <= a}

and assigns x to the largest r with rank R_{alpha_r}(x) >= r; the block
lattice is the saturation of span R_{alpha_r}(x).  This keeps the block
covering and the "no further resonance above alpha_{r+1}" property exact
even when a resonance is carried by a non-primitive vector (e.g. 2 w = 2 pi).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .domain import TWO_PI
from .errors import ParameterError
from .lattice import Lattice, l1_ball, positive, rank


def dist_2pi(phase):
    """Distance of real phases to 2 pi Z."""
    p = np.mod(np.asarray(phase, float), TWO_PI)
    return np.minimum(p, TWO_PI - p)


@dataclass(frozen=True)
class Schedule:
    alpha: np.ndarray
    delta: np.ndarray
    K: int
    beta: float
    mu: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.alpha, float).ravel()
        d = np.asarray(self.delta, float).ravel()
        if a.size != d.size or a.size == 0:
            raise ParameterError("alpha and delta need one entry per dimension")
        if np.any(np.diff(a) < 0) or a[0] <= 0:
            raise ParameterError("need 0 < alpha_1 <= ... <= alpha_n")
        if self.K < 1 or not self.beta > 0 or not self.mu > 0:
            raise ParameterError("need K >= 1, beta > 0, mu > 0")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "delta", d)

    @property
    def n(self) -> int:
        return self.alpha.size

    def a(self, r) -> float:
        """alpha_r with alpha_0 = alpha_1."""
        return float(self.alpha[max(r, 1) - 1])

    def d(self, r) -> float:
        return float(self.delta[max(r, 1) - 1])

    @staticmethod
    def alpha_ratio(r, K, mu):
        """alpha_r / alpha_1 for r >= 2, and 1 for r = 1."""
        if r <= 1:
            return 1.0
        return (2.0 / mu) ** r * math.factorial(r) * float(K) ** (r * (r - 1) // 2)

    @classmethod
    def from_alpha1(cls, alpha1, n, K, beta=None, mu=1.0):
        """alpha_r = (2/mu)^r r! K^{r(r-1)/2} alpha_1 (r >= 2), delta_r = alpha_r / (3 K beta).

        ``beta`` defaults to min alpha = alpha_1.
        """
        alpha = np.array([alpha1 * cls.alpha_ratio(r, K, mu) for r in range(1, n + 1)])
        beta = float(alpha.min()) if beta is None else beta
        return cls(alpha, alpha / (3 * K * beta), K, beta, mu)

    @classmethod
    def from_stability(cls, n, K, M, sigma1, mu=1.0):
        """Choice used for the stability estimate: alpha_n = 4 M K^{-n} sigma1, beta = min alpha."""
        alpha_n = 4 * M * float(K) ** (-n) * sigma1
        return cls.from_alpha1(alpha_n / cls.alpha_ratio(n, K, mu), n, K, None, mu)

    def nonoverlap(self):
        """Rows (r, lhs, alpha_r, ok) of
        alpha_{r+1} - K beta (delta_r + 4 delta_r/mu + 2 r K^{r-1} alpha_r/(beta mu)) >= alpha_r."""
        out = []
        K, b, mu = self.K, self.beta, self.mu
        for r in range(1, self.n):
            ar, dr = self.a(r), self.d(r)
            lhs = self.a(r + 1) - K * b * (dr + 4 * dr / mu + 2 * r * K ** (r - 1) * ar / (b * mu))
            out.append((r, lhs, ar, bool(lhs >= ar)))
        return out

    def cylinder_bound(self, r) -> float:
        """4 delta_r/mu + 2 r K^{r-1} alpha_r / (beta mu)."""
        return (4 * self.d(r) / self.mu
                + 2 * r * self.K ** (r - 1) * self.a(r) / (self.beta * self.mu))


@dataclass(frozen=True)
class BlockLabel:
    lattice: Lattice
    l: tuple

    @property
    def r(self) -> int:
        return self.lattice.r

    @property
    def basis(self):
        return [tuple(int(v) for v in row) for row in self.lattice.basis]


def l_bound(K, omega_sup) -> int:
    """Bound on |l_j| for zones that can meet the box."""
    return int(math.ceil((K * omega_sup + 1) / TWO_PI))


def _omega_rows(omega, X):
    X = np.atleast_2d(np.asarray(X, float))
    return np.atleast_2d(np.real(omega(X)))


def near_resonant(w, K, alpha):
    """Positive representatives k with |k|_1 <= K and dist(k.w, 2 pi Z) <= alpha."""
    ball = np.array([k for k in l1_ball(len(w), K) if positive(k) == k])
    mask = dist_2pi(ball @ np.asarray(w, float)) <= alpha
    return ball[mask]


def zone_label(lattice: Lattice, w) -> tuple:
    """l_j = -round(k_j . w / 2 pi) for the lattice basis."""
    if lattice.r == 0:
        return ()
    return tuple(int(-np.round(v / TWO_PI)) for v in lattice.basis @ np.asarray(w, float))


def zone_contains(lattice: Lattice, l, w, alpha) -> bool:
    """|k_j . w + 2 pi l_j| <= alpha for every basis vector (w = frequency at the point)."""
    if lattice.r == 0:
        return True
    v = lattice.basis @ np.asarray(w, float) + TWO_PI * np.asarray(l, float)
    return bool(np.all(np.abs(v) <= alpha))


class Classifier:
    """Block classification with a cache keyed by the near-resonant sets."""

    def __init__(self, schedule: Schedule, K: int | None = None):
        self.schedule = schedule
        self.K = schedule.K if K is None else K
        n = schedule.n
        self.ball = np.array([k for k in l1_ball(n, self.K) if positive(k) == k]).reshape(-1, n)
        self._cache: dict = {}

    def resonant_masks(self, W):
        """Boolean (N, r_max, nb): membership of each ball vector in R_{alpha_r}."""
        D = dist_2pi(W @ self.ball.T)
        alphas = np.array([self.schedule.a(r) for r in range(1, self.schedule.n + 1)])
        return D[:, None, :] <= alphas[None, :, None]

    def _lattice_for(self, mask_bytes, mask):
        hit = self._cache.get(mask_bytes)
        if hit is None:
            n = self.schedule.n
            vecs = self.ball[mask]
            L = Lattice.saturate(vecs.tolist(), n) if vecs.size else Lattice.zero(n)
            B = L.k_basis(self.K)
            hit = Lattice(B, n) if B is not None else L
            self._cache[mask_bytes] = hit
        return hit

    def rank_at(self, mask) -> int:
        key = ("rank", mask.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = rank(self.ball[mask].tolist()) if mask.any() else 0
            self._cache[key] = hit
        return hit

    def classify_w(self, w, masks=None) -> BlockLabel:
        n = self.schedule.n
        if masks is None:
            masks = self.resonant_masks(np.atleast_2d(w))[0]
        for r in range(n, 0, -1):
            m = masks[r - 1]
            if self.rank_at(m) >= r:
                L = self._lattice_for(m.tobytes(), m)
                return BlockLabel(L, zone_label(L, w))
        return BlockLabel(Lattice.zero(n), ())

    def classify(self, omega, X):
        W = _omega_rows(omega, X)
        masks = self.resonant_masks(W)
        return [self.classify_w(w, m) for w, m in zip(W, masks)]

    def star_rank(self, w, r) -> bool:
        """x in Z*_r: rank R_{alpha_r}(x) >= r."""
        if r == 0:
            return True
        if r > self.schedule.n:
            return False
        m = self.resonant_masks(np.atleast_2d(w))[0][r - 1]
        return self.rank_at(m) >= r


def classify_point(x, omega, schedule: Schedule, K: int | None = None) -> BlockLabel:
    """Resonant block containing the action point x."""
    x = np.atleast_2d(np.asarray(x, float))
    return Classifier(schedule, K).classify(omega, x)[0]


def prop_i_violations(X, omega, schedule, K=None, labels=None) -> int:
    """Count points whose block (dim r < n) admits k in Z^n_K outside the lattice
    with dist(k.w, 2 pi Z) <= alpha_{r+1}."""
    clf = Classifier(schedule, K)
    W = _omega_rows(omega, X)
    labels = clf.classify(omega, X) if labels is None else labels
    bad = 0
    for w, lab in zip(W, labels):
        r = lab.r
        if r >= schedule.n:
            continue
        out = ~lab.lattice.contains(clf.ball)
        if np.any(dist_2pi(clf.ball[out] @ w) <= schedule.a(r + 1)):
            bad += 1
    return bad


def covering_check(X, omega, schedule, K=None) -> bool:
    """Every node classifies, and the label dimension is exactly the Z*_r level:
    x in Z*_r minus Z*_{r+1} iff its block has dimension r."""
    if len(X) == 0:
        raise ParameterError("empty grid")
    clf = Classifier(schedule, K)
    W = _omega_rows(omega, X)
    labels = clf.classify(omega, X)
    n = schedule.n
    for w, lab in zip(W, labels):
        r = lab.r
        if not clf.star_rank(w, r) or clf.star_rank(w, r + 1):
            return False
        if r > n or lab.lattice.r != r:
            return False
    return True


def zones_disjoint(lattice, X, omega, alpha, lmax) -> bool:
    """No point of X lies in two zones of the same lattice with different l."""
    if lattice.r == 0:
        return True
    W = _omega_rows(omega, X)
    P = W @ lattice.basis.T  # (N, r)
    for p in P:
        hits = 0
        # per basis vector the admissible l_j form an interval; count full combinations
        counts = [sum(1 for l in range(-lmax, lmax + 1) if abs(v + TWO_PI * l) <= alpha) for v in p]
        hits = int(np.prod(counts))
        if hits > 1:
            return False
    return True


def small_denominator_bound(phi):
    """|1 - e^{i phi}|, asserting it is >= (2/pi) dist(phi, 2 pi Z)."""
    phi = np.asarray(phi, float)
    val = np.abs(1 - np.exp(1j * phi))
    lower = (2 / np.pi) * dist_2pi(phi)
    # rounding slack at the exact extremes
    if np.any(val < lower - 1e-12):
        raise AssertionError("small-denominator inequality violated")
    return val


@dataclass(frozen=True)
class ProjectedBoundReport:
    bound: float
    sampled_max: float
    exact_max: float
    passed: bool
    strict: bool


def projected_bound_check(basis, alpha, trials=1000, rng=None, K=None) -> ProjectedBoundReport:
    """|w|_2 <= r K^{r-1} alpha for w in span(basis) with |w . k_i| <= alpha.

    ``passed`` tests the non-strict bound; ``strict`` records whether the
    maximum stays strictly below it (it does not for r = 1 and a unit
    vector k, where w = alpha k attains it).  Writing w = B^T c, the constraints are s = G c in [-alpha, alpha]^r with
    G = B B^T, so |w|^2 = s^T G^{-1} s is maximised at a vertex of that cube.
    """
    B = np.atleast_2d(np.asarray(basis, float))
    r = B.shape[0]
    if rank(np.asarray(basis, dtype=np.int64).reshape(r, -1).tolist()) != r:
        raise ParameterError("basis vectors must be independent")
    K = int(np.abs(B).sum(axis=1).max()) if K is None else K
    bound = r * K ** (r - 1) * alpha
    if alpha == 0:
        return ProjectedBoundReport(0.0, 0.0, 0.0, True, True)
    rng = np.random.default_rng(0) if rng is None else rng
    Ginv = np.linalg.inv(B @ B.T)
    s = rng.uniform(-alpha, alpha, size=(trials, r))
    sampled = float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", s, Ginv, s))))
    verts = np.array(np.meshgrid(*([[-alpha, alpha]] * r), indexing="ij")).reshape(r, -1).T
    exact = float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", verts, Ginv, verts))))
    ok = exact <= bound * (1 + 1e-12) and sampled <= exact * (1 + 1e-12)
    return ProjectedBoundReport(bound, sampled, exact, bool(ok), bool(exact < bound))


def plane_distance(lattice, base, x):
    """Distance from x to the affine plane through ``base`` parallel to span(lattice)."""
    d = np.atleast_2d(np.asarray(x, float)) - np.asarray(base, float)
    if lattice.r == 0:
        return np.linalg.norm(d, axis=1)
    Q, _ = np.linalg.qr(lattice.basis.T.astype(float))
    return np.linalg.norm(d - (d @ Q) @ Q.T, axis=1)


def in_cylinder(base, label: BlockLabel, x, omega, schedule) -> np.ndarray:
    """Membership in the cylinder: delta_r-slab around the plane through ``base``
    parallel to the lattice, intersected with the zone of ``label``."""
    X = np.atleast_2d(np.asarray(x, float))
    r = label.r
    near = plane_distance(label.lattice, base, X) <= schedule.d(r)
    W = _omega_rows(omega, X)
    zone = np.array([zone_contains(label.lattice, label.l, w, schedule.a(r)) for w in W])
    return near & zone


@dataclass(frozen=True)
class CylinderReport:
    checked: int
    rejected: int
    max_distance: float
    bound: float
    passed: bool


def cylinder_diameter_check(pairs, base, label, omega, schedule) -> CylinderReport:
    """Pairwise distances of cylinder members against the diameter bound.

    Pairs with a point outside the cylinder are rejected, not counted.
    """
    r = label.r
    if r < 1:
        raise ParameterError("cylinders need r >= 1")
    bound = schedule.cylinder_bound(r)
    P = np.asarray(pairs, float)
    a, b = P[:, 0, :], P[:, 1, :]
    ok = in_cylinder(base, label, a, omega, schedule) & in_cylinder(base, label, b, omega, schedule)
    d = np.linalg.norm(a[ok] - b[ok], axis=1)
    dmax = float(d.max(initial=0.0))
    return CylinderReport(int(ok.sum()), int((~ok).sum()), dmax, bound, bool(dmax <= bound))


def atlas(X, omega, schedule, K=None):
    """Flat table of block labels, one row per node: coordinates, r, basis, l."""
    labels = Classifier(schedule, K).classify(omega, X)
    rows = []
    for x, lab in zip(np.atleast_2d(X), labels):
        rows.append({
            "x": [float(v) for v in x],
            "r": lab.r,
            "basis": ";".join(",".join(str(v) for v in row) for row in lab.basis),
            "l": ",".join(str(v) for v in lab.l),
        })
    return rows


def write_atlas(path, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        n = len(rows[0]["x"]) if rows else 0
        wr.writerow([f"x{j}" for j in range(n)] + ["r", "basis", "l"])
        for row in rows:
            wr.writerow(["%.17g" % v for v in row["x"]] + [row["r"], row["basis"], row["l"]])
