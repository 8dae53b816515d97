"""Group averaging for almost homomorphisms and almost representations.

Source groups are finite, given by a multiplication table, so Haar
integrals become plain means.  Targets are SO(n) or SU(n) with the
bi-invariant metric ``d(a, b) = scale * ||log(a^-1 b)||_F``.
"""
import json
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.linalg import expm, schur

from .errors import (BoundViolated, DefectTooLarge, DimensionMismatch, HypothesisViolated,
                     LogUndefined, NoConvergence, NotAGroup, ParseError, SpreadTooLarge)
from .parallel import pmap

# Grove-Karcher-Ruh constants
DEFECT_LIMIT = np.pi / 6
DISTANCE_FACTOR = 1.36

# de la Harpe-Karoubi constants
EPS_LIMIT = 2.0 ** -6

LOG_MARGIN = 1e-6
MEMBERSHIP_TOL = 1e-12


class FiniteGroup:
    """Finite group from its multiplication table ``table[g][h] = gh``."""

    def __init__(self, table, check=True):
        table = np.asarray(table, dtype=int)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise NotAGroup("multiplication table must be square and nonempty")
        self.size = table.shape[0]
        self.table = table
        if table.min() < 0 or table.max() >= self.size:
            raise NotAGroup("table entries out of range")
        idents = [e for e in range(self.size)
                  if np.array_equal(table[e], np.arange(self.size))
                  and np.array_equal(table[:, e], np.arange(self.size))]
        if not idents:
            raise NotAGroup("no identity element")
        self.identity = idents[0]
        inverse = []
        for g in range(self.size):
            hits = np.flatnonzero(table[g] == self.identity)
            if len(hits) != 1 or table[hits[0], g] != self.identity:
                raise NotAGroup(f"element {g} has no two-sided inverse")
            inverse.append(int(hits[0]))
        self.inverse = np.array(inverse)
        if check:
            t, idx = table, np.arange(self.size)
            # (gh)k == g(hk) for every triple
            if not np.array_equal(t[t[:, :, None], idx[None, None, :]],
                                  t[idx[:, None, None], t[None, :, :]]):
                raise NotAGroup("multiplication is not associative")

    def __len__(self):
        return self.size

    def mul(self, g, h):
        return int(self.table[g, h])

    @classmethod
    def cyclic(cls, n):
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n)

    @classmethod
    def trivial(cls):
        return cls([[0]])

    @classmethod
    def dihedral(cls, n):
        """Order 2n; element ``r^a s^b`` has index ``a + n*b``."""
        def mul(x, y):
            a1, b1 = x % n, x // n
            a2, b2 = y % n, y // n
            a = (a1 + (a2 if b1 == 0 else -a2)) % n
            return a + n * ((b1 + b2) % 2)
        return cls([[mul(x, y) for y in range(2 * n)] for x in range(2 * n)])

    @classmethod
    def quaternion(cls):
        """Q8 with elements ordered 1, i, j, k, -1, -i, -j, -k."""
        mats = quaternion_matrices()
        return cls(_table_from_matrices(mats))

    def to_json(self):
        return {"size": self.size, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            table = obj["table"]
            if int(obj["size"]) != len(table):
                raise ParseError("size does not match the table")
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed group: {exc}") from exc
        return cls(table)


def _table_from_matrices(mats):
    mats = list(mats)
    table = []
    for a in mats:
        row = []
        for b in mats:
            prod = a @ b
            hits = [k for k, c in enumerate(mats) if np.allclose(prod, c, atol=1e-12)]
            if len(hits) != 1:
                raise NotAGroup("matrices are not closed under multiplication")
            row.append(hits[0])
        table.append(row)
    return table


def quaternion_matrices():
    """Standard embedding of Q8 in SU(2), ordered 1, i, j, k, -1, -i, -j, -k."""
    one = np.eye(2, dtype=complex)
    qi = np.array([[1j, 0], [0, -1j]])
    qj = np.array([[0, 1], [-1, 0]], dtype=complex)
    qk = qi @ qj
    base = [one, qi, qj, qk]
    return base + [-m for m in base]


@dataclass(frozen=True)
class MatrixGroupTarget:
    """SO(n) or SU(n) with metric ``scale * Frobenius`` on the Lie algebra.

    The default scale makes ``||[v, w]|| <= ||v|| ||w||`` hold: 1/sqrt(2) for
    SO(2) and SO(3) (distance = rotation angle), sqrt(2) otherwise.
    """

    kind: str
    dim: int
    scale: float = None

    def __post_init__(self):
        if self.kind not in ("SO", "SU"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.scale is None:
            s = 2 ** -0.5 if self.kind == "SO" and self.dim <= 3 else 2 ** 0.5
            object.__setattr__(self, "scale", s)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def dtype(self):
        return float if self.kind == "SO" else complex

    def random_algebra(self, rng, size=1.0):
        """Random Lie algebra element with metric norm ``size``."""
        n = self.dim
        a = rng.standard_normal((n, n))
        if self.kind == "SO":
            v = a - a.T
        else:
            a = a + 1j * rng.standard_normal((n, n))
            v = a - a.conj().T
            v = v - np.trace(v) / n * np.eye(n)
        norm = self.scale * np.linalg.norm(v)
        return v * (size / norm) if norm else v

    def exp(self, v):
        return self.project(expm(v))

    def log(self, a):
        """Principal logarithm via the Schur form; rejects angles near pi."""
        T, Z = schur(np.asarray(a, dtype=complex), output="complex")
        theta = np.angle(np.diag(T))
        if np.max(np.abs(theta), initial=0.0) >= np.pi - LOG_MARGIN:
            raise LogUndefined("matrix has an eigenvalue too close to -1")
        L = (Z * (1j * theta)) @ Z.conj().T
        return L.real if self.kind == "SO" else L

    def project(self, a):
        """Nearest group element (polar factor, determinant fixed)."""
        U, _, Vh = np.linalg.svd(np.asarray(a))
        m = U @ Vh
        if self.kind == "SO":
            m = m.real
            if np.linalg.det(m) < 0:
                U[:, -1] = -U[:, -1]
                m = (U @ Vh).real
        else:
            m = m / np.linalg.det(m) ** (1.0 / self.dim)
        return m

    def membership_residual(self, a):
        a = np.asarray(a)
        n = self.dim
        res = np.linalg.norm(a.conj().T @ a - np.eye(n))
        return max(res, abs(np.linalg.det(a) - 1))

    def is_member(self, a, tol=MEMBERSHIP_TOL):
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            return False
        if self.kind == "SO" and np.iscomplexobj(a) and np.any(a.imag):
            return False
        return self.membership_residual(a) <= tol

    def bracket_condition_holds(self, rng, trials=200):
        """Check ``||[v, w]|| <= ||v|| ||w||`` on random pairs."""
        for _ in range(trials):
            v, w = self.random_algebra(rng), self.random_algebra(rng)
            lhs = self.scale * np.linalg.norm(v @ w - w @ v)
            if lhs > 1 + 1e-12:
                return False
        return True

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim, "scale": self.scale}


def target_distance(a, b, target):
    """``scale * ||log(a^-1 b)||_F``."""
    a, b = np.asarray(a), np.asarray(b)
    return target.scale * float(np.linalg.norm(target.log(a.conj().T @ b)))


class AlmostHomomorphism:
    """One target matrix per element of a finite source group."""

    def __init__(self, source, target, values, check=True):
        values = np.asarray(values, dtype=target.dtype)
        if values.shape != (source.size, target.dim, target.dim):
            raise DimensionMismatch(f"expected values of shape {(source.size, target.dim, target.dim)}")
        if check:
            for g, v in enumerate(values):
                if not target.is_member(v):
                    raise ValueError(f"value at element {g} is not in {target.kind}({target.dim})")
        self.source = source
        self.target = target
        self.values = values

    def __getitem__(self, g):
        return self.values[g]

    def conjugated(self, a):
        a = np.asarray(a)
        return AlmostHomomorphism(self.source, self.target,
                                  [a @ v @ a.conj().T for v in self.values])

    def to_json(self):
        vals = []
        for v in self.values:
            if self.target.kind == "SO":
                vals.append([float(x) for x in v.ravel()])
            else:
                vals.append([[float(x.real), float(x.imag)] for x in v.ravel()])
        return {"target": {"kind": self.target.kind, "dim": self.target.dim}, "values": vals}

    @classmethod
    def from_json(cls, obj, source):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            t = obj["target"]
            target = MatrixGroupTarget(t["kind"], int(t["dim"]), t.get("scale"))
            n = target.dim
            vals = []
            for flat in obj["values"]:
                if len(flat) != n * n:
                    raise ParseError("matrix entry count does not match the target dimension")
                entries = [complex(x[0], x[1]) if isinstance(x, list) else x for x in flat]
                vals.append(np.array(entries, dtype=target.dtype).reshape(n, n))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed almost homomorphism: {exc}") from exc
        return cls(source, target, vals)


def defect(sigma):
    """``max_{g,h} d(sigma(g) sigma(h), sigma(gh))``."""
    G, t, v = sigma.source, sigma.target, sigma.values
    worst = 0.0
    for g, h in product(range(G.size), repeat=2):
        worst = max(worst, target_distance(v[g] @ v[h], v[G.table[g, h]], t))
    return worst


def karcher_mean(points, target, tol=1e-14, max_iter=200):
    """Riemannian centre of mass: fixed point of ``m <- m exp(mean log(m^-1 p_i))``."""
    points = [np.asarray(p) for p in points]
    if not points:
        raise ValueError("need at least one point")
    m = points[0]
    for p in points[1:]:
        try:
            if target_distance(m, p, target) >= np.pi:
                raise SpreadTooLarge("points are too far apart for a unique centre of mass")
        except LogUndefined as exc:
            raise SpreadTooLarge("points are too far apart for a unique centre of mass") from exc
    for _ in range(max_iter):
        step = sum(target.log(m.conj().T @ p) for p in points) / len(points)
        if np.linalg.norm(step) < tol:
            return m
        m = target.project(m @ expm(step))
    raise NoConvergence(f"centre of mass did not converge in {max_iter} iterations")


def improve(sigma):
    """One averaging sweep: ``sigma'(g) = mean_h sigma(gh) sigma(h)^-1``."""
    G, t, v = sigma.source, sigma.target, sigma.values

    def mean_at(g):
        return karcher_mean([v[G.table[g, h]] @ v[h].conj().T for h in range(G.size)], t)

    new = pmap(mean_at, range(G.size))
    return AlmostHomomorphism(G, t, new)


def average_to_homomorphism(sigma0, tol=1e-12, max_iter=100, force=False):
    """Iterate :func:`improve` until the defect drops below ``tol``.

    Refuses inputs with defect ``q > pi/6`` unless ``force``; checks the
    conclusion ``max_g d(sigma0(g), sigma(g)) < 1.36 q`` on exit.
    """
    q = defect(sigma0)
    if q > DEFECT_LIMIT and not force:
        raise DefectTooLarge(f"defect {q:.6g} exceeds pi/6")
    sigma = sigma0
    current = q
    for _ in range(max_iter):
        if current < tol:
            break
        sigma = improve(sigma)
        current = defect(sigma)
    else:
        if current >= tol:
            raise NoConvergence(f"defect still {current:.3g} after {max_iter} sweeps")
    if q > 0 and q <= DEFECT_LIMIT:
        moved = max_displacement(sigma0, sigma)
        if not moved < DISTANCE_FACTOR * q:
            raise BoundViolated(f"moved {moved:.6g} >= 1.36 q = {DISTANCE_FACTOR * q:.6g}")
    return sigma


def max_displacement(sigma0, sigma):
    return max(target_distance(a, b, sigma0.target) for a, b in zip(sigma0.values, sigma.values))


# -- almost representations -------------------------------------------------


def operator_norm(a):
    return float(np.linalg.norm(a, 2))


def representation_defect(group, values):
    """``max_{g,h} ||T(gh) - T(g) T(h)||`` in operator norm."""
    values = np.asarray(values)
    return max(operator_norm(values[group.table[g, h]] - values[g] @ values[h])
               for g, h in product(range(group.size), repeat=2))


def representation_hypothesis(group, values, K, eps):
    """Return the list of violated hypotheses (empty when all hold)."""
    values = np.asarray(values)
    problems = []
    if K < 1:
        problems.append(f"K = {K} < 1")
    if eps > EPS_LIMIT:
        problems.append(f"eps = {eps} > 2^-6")
    d = representation_defect(group, values)
    if d > eps * (2 * K) ** -9:
        problems.append(f"defect {d:.6g} > eps (2K)^-9 = {eps * (2 * K) ** -9:.6g}")
    for g, v in enumerate(values):
        if operator_norm(v) > K:
            problems.append(f"||T0({g})|| > K")
        try:
            if operator_norm(np.linalg.inv(v)) > K:
                problems.append(f"||T0({g})^-1|| > K")
        except np.linalg.LinAlgError:
            problems.append(f"T0({g}) is singular")
    return problems


def average_to_representation(group, values, K, eps, tol=1e-12, max_iter=100, force=False):
    """Correct an almost representation by repeated averaging in operator space.

    ``T'(g) = mean_h T(gh) T(h)^-1``, iterated until the defect is below
    ``tol``.  The result is checked against ``max_g ||T0(g) - T(g)|| <= eps``.
    """
    T0 = np.asarray(values, dtype=complex)
    if T0.ndim != 3 or T0.shape[0] != group.size or T0.shape[1] != T0.shape[2]:
        raise DimensionMismatch("values must have shape (|G|, m, m)")
    problems = representation_hypothesis(group, T0, K, eps)
    if problems and not force:
        raise HypothesisViolated("; ".join(problems))
    T = T0
    current = representation_defect(group, T)
    for _ in range(max_iter):
        if current < tol:
            break
        inv = np.linalg.inv(T)
        T = np.stack([sum(T[group.table[g, h]] @ inv[h] for h in range(group.size)) / group.size
                      for g in range(group.size)])
        current = representation_defect(group, T)
    else:
        if current >= tol:
            raise NoConvergence(f"representation defect still {current:.3g} after {max_iter} sweeps")
    if np.any(~np.isfinite(T)) or min(abs(np.linalg.det(t)) for t in T) == 0:
        raise NoConvergence("averaging produced a singular operator")
    moved = max(operator_norm(a - b) for a, b in zip(T0, T))
    if not problems and moved > eps:
        raise BoundViolated(f"moved {moved:.6g} > eps = {eps:.6g}")
    return T
