"""Lie algebras, representations and the Chevalley-Eilenberg complex over QQ.

Exact matrices are numpy object arrays of :class:`fractions.Fraction`.
Cochains of degree p are stored by their values on strictly increasing
index tuples ``(i_0 < ... < i_{p-1})``.

The differential used throughout is

    (d phi)(x_0..x_p) = sum_a (-1)^a rho(x_a) phi(..^x_a..)
                      + sum_{a<b} (-1)^(a+b) phi([x_a, x_b], ..^x_a..^x_b..)
"""
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from . import linalg
from .errors import (AlgebraMismatch, DegreeTooHigh, NotACocycle, Obstructed, ParseError)
from .truncpoly import format_rational, monomial_index, monomials, parse_rational

MAX_COCHAIN_DEGREE = 3


def _zeros(*shape):
    return np.full(shape, Fraction(0), dtype=object)


def _identity(m):
    out = _zeros(m, m)
    for i in range(m):
        out[i, i] = Fraction(1)
    return out


def _exact(a):
    return np.vectorize(Fraction, otypes=[object])(np.asarray(a, dtype=object))


class LieAlgebra:
    """Structure constants ``c[i, j, k]``: ``[e_i, e_j] = sum_k c[i, j, k] e_k``."""

    def __init__(self, constants):
        c = _exact(constants)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError("structure constants must have shape (n, n, n)")
        if not np.array_equal(c, -c.transpose(1, 0, 2)):
            raise ValueError("structure constants are not antisymmetric in (i, j)")
        self.dim = c.shape[0]
        self.c = c

    @classmethod
    def from_upper(cls, dim, entries):
        """From ``{(i, j, k): value}`` with ``i < j``."""
        c = _zeros(dim, dim, dim)
        for (i, j, k), v in entries.items():
            v = Fraction(v)
            c[i, j, k] = v
            c[j, i, k] = -v
        return cls(c)

    @classmethod
    def abelian(cls, dim):
        return cls(_zeros(dim, dim, dim))

    @classmethod
    def so3(cls):
        """[e0,e1]=e2, [e1,e2]=e0, [e2,e0]=e1."""
        return cls.from_upper(3, {(0, 1, 2): 1, (1, 2, 0): 1, (0, 2, 1): -1})

    @classmethod
    def sl2(cls):
        """Basis (h, e, f): [h,e]=2e, [h,f]=-2f, [e,f]=h."""
        return cls.from_upper(3, {(0, 1, 1): 2, (0, 2, 2): -2, (1, 2, 0): 1})

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash(tuple(self.c.ravel()))

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim})"

    def bracket(self, x, y):
        x, y = _exact(x), _exact(y)
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def jacobi_residual(self):
        """Array ``J[i, j, k, l]``; identically zero for a Lie algebra."""
        c = self.c
        t = np.einsum("jkm,iml->ijkl", c, c)
        return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)

    def is_valid(self):
        return not np.any(self.jacobi_residual() != 0)

    def to_json(self):
        entries = []
        for i, j in combinations(range(self.dim), 2):
            for k in range(self.dim):
                if self.c[i, j, k]:
                    entries.append({"i": i, "j": j, "k": k, "val": format_rational(self.c[i, j, k])})
        return {"dim": self.dim, "c": entries}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            dim = int(obj["dim"])
            entries = {}
            for e in obj["c"]:
                i, j, k = int(e["i"]), int(e["j"]), int(e["k"])
                if not (0 <= i < j < dim and 0 <= k < dim):
                    raise ParseError(f"structure constant index out of range or not i<j: {e}")
                entries[i, j, k] = parse_rational(e["val"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed Lie algebra: {exc}") from exc
        return cls.from_upper(dim, entries)


def killing_form(g):
    """``B[i, j] = sum_{a,b} c[i,a,b] c[j,b,a]`` = trace(ad e_i ad e_j)."""
    return np.einsum("iab,jba->ij", g.c, g.c)


def is_semisimple(g):
    """Cartan's criterion: the Killing form is nondegenerate (exact determinant)."""
    return linalg.determinant(killing_form(g)) != 0


class Representation:
    """Matrices ``action[i]`` of size m x m with ``[rho_i, rho_j] = sum_k c_ij^k rho_k``."""

    def __init__(self, algebra, action):
        action = _exact(action)
        if action.ndim != 3 or action.shape[0] != algebra.dim or action.shape[1] != action.shape[2]:
            raise ValueError("action must have shape (dim, m, m)")
        self.algebra = algebra
        self.action = action
        self.module_dim = action.shape[1]

    @classmethod
    def trivial(cls, algebra, m=1):
        return cls(algebra, _zeros(algebra.dim, m, m))

    def __repr__(self):
        return f"Representation(dim={self.algebra.dim}, module_dim={self.module_dim})"

    def homomorphism_residual(self):
        r, c = self.action, self.algebra.c
        comm = np.einsum("iab,jbc->ijac", r, r)
        comm = comm - comm.transpose(1, 0, 2, 3)
        return comm - np.einsum("ijk,kab->ijab", c, r)

    def is_valid(self):
        return not np.any(self.homomorphism_residual() != 0)


def adjoint_rep(g):
    """``rho(e_i)[k, j] = c[i, j, k]``."""
    return Representation(g, g.c.transpose(0, 2, 1))


def symmetric_power_rep(r, k):
    """Action by derivation on degree-k monomials in ``r.module_dim`` variables.

    The basis is ``truncpoly.monomials(m, k)`` (graded lex), so a module vector
    is the coefficient vector of a homogeneous polynomial of degree k whose
    variables are the basis vectors of ``r``'s module.
    """
    if k < 1:
        raise ValueError("symmetric power degree must be >= 1")
    m = r.module_dim
    basis = monomials(m, k)
    index = monomial_index(m, k)
    out = _zeros(r.algebra.dim, len(basis), len(basis))
    for i in range(r.algebra.dim):
        rho = r.action[i]
        for col, alpha in enumerate(basis):
            for b in range(m):
                if not alpha[b]:
                    continue
                for a in range(m):
                    if rho[a, b]:
                        beta = list(alpha)
                        beta[b] -= 1
                        beta[a] += 1
                        out[i, index[tuple(beta)], col] += alpha[b] * rho[a, b]
    return Representation(r.algebra, out)


def tensor_rep(r1, r2):
    """``rho1 (x) I + I (x) rho2``; index ``(a, b) -> a * m2 + b``."""
    if r1.algebra != r2.algebra:
        raise AlgebraMismatch("tensor product needs representations of the same algebra")
    m1, m2 = r1.module_dim, r2.module_dim
    I1, I2 = _identity(m1), _identity(m2)
    action = np.stack([np.kron(r1.action[i], I2) + np.kron(I1, r2.action[i])
                       for i in range(r1.algebra.dim)]) if r1.algebra.dim else _zeros(0, m1 * m2, m1 * m2)
    return Representation(r1.algebra, action)


def representation_from_matrices(g, matrices):
    return Representation(g, matrices)


@dataclass(frozen=True)
class Cochain:
    """Alternating p-cochain with values in ``rep``'s module.

    ``values`` is a flat exact vector laid out as blocks of length
    ``module_dim``, one block per increasing index tuple in
    ``itertools.combinations`` order.
    """

    degree: int
    rep: Representation
    values: tuple

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_COCHAIN_DEGREE:
            raise DegreeTooHigh(f"cochain degree {self.degree} outside 0..{MAX_COCHAIN_DEGREE}")
        expected = comb(self.rep.algebra.dim, self.degree) * self.rep.module_dim
        vals = tuple(Fraction(v) for v in self.values)
        if len(vals) != expected:
            raise ValueError(f"expected {expected} values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, rep, degree):
        return cls(degree, rep, (0,) * (comb(rep.algebra.dim, degree) * rep.module_dim))

    @classmethod
    def from_function(cls, rep, degree, fn):
        """``fn(index_tuple) -> module vector`` evaluated on increasing tuples."""
        vals = []
        for idx in combinations(range(rep.algebra.dim), degree):
            v = list(fn(idx))
            if len(v) != rep.module_dim:
                raise ValueError("module vector has the wrong length")
            vals.extend(v)
        return cls(degree, rep, vals)

    def value(self, *idx):
        """Value on arbitrary basis indices, using alternation."""
        m = self.rep.module_dim
        if len(set(idx)) < len(idx):
            return (Fraction(0),) * m
        order = sorted(range(len(idx)), key=lambda a: idx[a])
        sign = _permutation_sign(order)
        key = tuple(idx[a] for a in order)
        pos = _tuple_position(self.rep.algebra.dim, len(idx))[key]
        block = self.values[pos * m:(pos + 1) * m]
        return tuple(sign * v for v in block) if sign < 0 else block

    def vector(self):
        return np.array(self.values, dtype=object)

    def is_zero(self):
        return not any(self.values)

    def __add__(self, other):
        return Cochain(self.degree, self.rep, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other):
        return Cochain(self.degree, self.rep, [a - b for a, b in zip(self.values, other.values)])

    def __neg__(self):
        return Cochain(self.degree, self.rep, [-a for a in self.values])

    def scaled(self, s):
        return Cochain(self.degree, self.rep, [s * a for a in self.values])


def _permutation_sign(order):
    sign, seen = 1, [False] * len(order)
    for start in range(len(order)):
        if seen[start]:
            continue
        j, length = start, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


_POSITIONS = {}


def _tuple_position(n, p):
    key = (n, p)
    if key not in _POSITIONS:
        _POSITIONS[key] = {t: i for i, t in enumerate(combinations(range(n), p))}
    return _POSITIONS[key]


_DIFFERENTIALS = {}


def differential_matrix(rep, p):
    """Exact matrix of ``d: C^p -> C^(p+1)`` in the flat cochain layout."""
    if p < 0 or p + 1 > MAX_COCHAIN_DEGREE:
        raise DegreeTooHigh(f"differential from degree {p} not available (cap {MAX_COCHAIN_DEGREE})")
    key = (id(rep), p)
    cached = _DIFFERENTIALS.get(key)
    if cached is not None and cached[0] is rep:
        return cached[1]
    n, m = rep.algebra.dim, rep.module_dim
    c, rho = rep.algebra.c, rep.action
    src = _tuple_position(n, p)
    tgt = list(combinations(range(n), p + 1))
    D = _zeros(len(tgt) * m, len(src) * m)
    for row_block, I in enumerate(tgt):
        r0 = row_block * m
        # sum_a (-1)^a rho(e_{I_a}) phi(I without I_a)
        for a, ia in enumerate(I):
            rest = I[:a] + I[a + 1:]
            c0 = src[rest] * m
            sign = 1 if a % 2 == 0 else -1
            D[r0:r0 + m, c0:c0 + m] += sign * rho[ia]
        # sum_{a<b} (-1)^(a+b) sum_k c[I_a, I_b, k] phi(e_k, I without I_a, I_b)
        for a in range(len(I)):
            for b in range(a + 1, len(I)):
                rest = I[:a] + I[a + 1:b] + I[b + 1:]
                sign = 1 if (a + b) % 2 == 0 else -1
                for k in range(n):
                    coef = c[I[a], I[b], k]
                    if not coef or k in rest:
                        continue
                    idx = (k,) + rest
                    order = sorted(range(len(idx)), key=lambda t: idx[t])
                    s2 = _permutation_sign(order)
                    key2 = tuple(idx[t] for t in order)
                    c0 = src[key2] * m
                    for u in range(m):
                        D[r0 + u, c0 + u] += sign * s2 * coef
    _DIFFERENTIALS[key] = (rep, D)
    return D


def ce_differential(phi):
    """Chevalley-Eilenberg differential of a cochain (degree p <= 2)."""
    if phi.degree + 1 > MAX_COCHAIN_DEGREE:
        raise DegreeTooHigh(f"cannot differentiate a {phi.degree}-cochain (cap {MAX_COCHAIN_DEGREE})")
    D = differential_matrix(phi.rep, phi.degree)
    return Cochain(phi.degree + 1, phi.rep, tuple(D.dot(phi.vector())) if D.size else
                   (0,) * D.shape[0])


def _rank(D):
    return linalg.rank(D) if D.size else 0


def cohomology_dim(g, rep, p):
    """``dim ker d_p - rank d_(p-1)`` by exact rank computation."""
    if rep.algebra != g:
        raise AlgebraMismatch("representation is over a different algebra")
    if p < 0 or p > 2:
        raise DegreeTooHigh("cohomology available for p = 0, 1, 2")
    n, m = g.dim, rep.module_dim
    dim_cp = comb(n, p) * m
    ker = dim_cp - _rank(differential_matrix(rep, p))
    im = _rank(differential_matrix(rep, p - 1)) if p > 0 else 0
    return ker - im


@dataclass(frozen=True)
class Obstruction:
    cocycle: Cochain
    residual: tuple
    cohomology_dim: int


def solve_coboundary(psi, check_cocycle=True):
    """Find ``phi`` with ``d phi = psi`` for a p-cocycle ``psi`` (p >= 1).

    The particular solution is the reduced-row-echelon one with free
    variables set to zero, so ``psi = 0`` gives ``phi = 0``.  Raises
    :class:`NotACocycle` if ``d psi != 0`` and :class:`Obstructed` if
    ``psi`` is not a coboundary.
    """
    p = psi.degree
    if p < 1:
        raise DegreeTooHigh("only cochains of degree >= 1 can be coboundaries")
    if check_cocycle and p + 1 <= MAX_COCHAIN_DEGREE:
        if not ce_differential(psi).is_zero():
            raise NotACocycle(f"the {p}-cochain is not closed")
    D = differential_matrix(psi.rep, p - 1)
    x, residual = linalg.solve_particular(D, psi.vector())
    if x is None:
        hdim = cohomology_dim(psi.rep.algebra, psi.rep, p) if p <= 2 else None
        raise Obstructed(f"{p}-cocycle is not a coboundary", cocycle=psi,
                         residual=residual, cohomology_dim=hdim)
    phi = Cochain(p - 1, psi.rep, tuple(x))
    # self-check of the postcondition
    if ce_differential(phi).values != psi.values:
        raise AssertionError("coboundary solve failed its own check")
    return phi
