"""Poisson structures vanishing at the origin, as bracket tables of truncated polynomials.

All brackets are computed at the full truncation order.  Since every entry
of the table vanishes at the origin, the degree lost by differentiating is
regained by the multiplication, so results are exact modulo degree > order.
"""
import json
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotPoisson, ParseError
from .truncpoly import TruncatedPolynomial, invert_change, substitute


class PoissonStructure:
    """Antisymmetric table ``pi[i][j] = {x_i, x_j}``.

    Validity of the Jacobi identity is *not* checked here; call
    :meth:`validate` or :func:`jacobi_witness` explicitly.
    """

    __slots__ = ("num_vars", "order", "pi")

    def __init__(self, table):
        table = [list(row) for row in table]
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise DimensionMismatch("bracket table must be square and nonempty")
        first = table[0][0]
        for row in table:
            for p in row:
                if p.num_vars != n or p.order != first.order:
                    raise DimensionMismatch("every entry must have num_vars = table size and a common order")
        for i in range(n):
            if table[i][i]:
                raise ValueError(f"pi[{i}][{i}] must vanish")
            for j in range(i + 1, n):
                if table[i][j] != -table[j][i]:
                    raise ValueError(f"table is not antisymmetric at ({i}, {j})")
                if table[i][j].constant_term():
                    raise ValueError(f"pi[{i}][{j}] does not vanish at the origin")
        self.num_vars = n
        self.order = first.order
        self.pi = tuple(tuple(row) for row in table)

    @classmethod
    def from_upper(cls, num_vars, order, entries):
        """Build from ``{(i, j): poly}`` with ``i < j``; the rest is completed."""
        zero = TruncatedPolynomial.zero(num_vars, order)
        table = [[zero] * num_vars for _ in range(num_vars)]
        for (i, j), p in entries.items():
            if not (0 <= i < num_vars and 0 <= j < num_vars) or i == j:
                raise IndexOutOfRange(f"bad bracket index pair ({i}, {j})")
            if i > j:
                i, j, p = j, i, -p
            table[i][j] = p
            table[j][i] = -p
        return cls(table)

    @classmethod
    def linear(cls, c, order):
        """Linear structure ``{x_i, x_j} = sum_k c[i][j][k] x_k``."""
        n = len(c)
        xs = [TruncatedPolynomial.variable(n, order, k) for k in range(n)]
        entries = {}
        for i, j in combinations(range(n), 2):
            entries[i, j] = sum((xs[k] * Fraction(c[i][j][k]) for k in range(n) if c[i][j][k]),
                                TruncatedPolynomial.zero(n, order))
        return cls.from_upper(n, order, entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.pi[i][j]

    def __eq__(self, other):
        if not isinstance(other, PoissonStructure):
            return NotImplemented
        return self.pi == other.pi

    def __hash__(self):
        return hash(self.pi)

    def __repr__(self):
        body = ", ".join(f"{{x{i},x{j}}} = {self.pi[i][j]!r}"
                         for i, j in combinations(range(self.num_vars), 2) if self.pi[i][j])
        return f"PoissonStructure(n={self.num_vars}, N={self.order}: {body or '0'})"

    def truncated(self, k):
        return PoissonStructure([[p.truncated(k) for p in row] for row in self.pi])

    def nonlinear_degrees(self):
        """Sorted degrees >= 2 that still carry a nonzero coefficient."""
        degs = set()
        for row in self.pi:
            for p in row:
                degs.update(sum(e) for e in p.terms if sum(e) >= 2)
        return sorted(degs)

    def validate(self):
        """Raise :class:`NotPoisson` with an ``(i, j, k)`` witness if Jacobi fails."""
        witness = jacobi_witness(self)
        if witness is not None:
            i, j, k = witness
            raise NotPoisson(f"Jacobi identity fails for ({i}, {j}, {k}): "
                             f"{jacobiator(self, i, j, k)!r}")

    def to_json(self):
        return {"n": self.num_vars, "order": self.order,
                "brackets": {f"{i},{j}": self.pi[i][j].terms_json()
                             for i, j in combinations(range(self.num_vars), 2)
                             if self.pi[i][j]}}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            n, N = int(obj["n"]), int(obj["order"])
            entries = {}
            for key, terms in obj["brackets"].items():
                i, j = (int(s) for s in key.split(","))
                entries[i, j] = TruncatedPolynomial.from_terms_json(n, N, terms)
        except (KeyError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed Poisson structure: {exc}") from exc
        return cls.from_upper(n, N, entries)


def _check(f, P):
    if f.num_vars != P.num_vars or f.order != P.order:
        raise DimensionMismatch("function and Poisson structure disagree on (n, order)")


def bracket(f, g, P):
    """``{f, g} = sum_{i<j} pi_ij (df/dx_i dg/dx_j - df/dx_j dg/dx_i)``."""
    _check(f, P)
    _check(g, P)
    n = P.num_vars
    df = [f.partial(i) for i in range(n)]
    dg = [g.partial(i) for i in range(n)]
    out = TruncatedPolynomial.zero(n, P.order)
    for i, j in combinations(range(n), 2):
        p = P.pi[i][j]
        if not p:
            continue
        w = df[i] * dg[j] - df[j] * dg[i]
        if w:
            out = out + p * w
    return out


def jacobiator(P, i, j, k):
    """``{{x_i,x_j},x_k} + {{x_j,x_k},x_i} + {{x_k,x_i},x_j}``."""
    n = P.num_vars
    for idx in (i, j, k):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"index {idx} out of range for n={n}")
    x = [TruncatedPolynomial.variable(n, P.order, m) for m in range(n)]
    return (bracket(P.pi[i][j], x[k], P) + bracket(P.pi[j][k], x[i], P)
            + bracket(P.pi[k][i], x[j], P))


def jacobi_witness(P):
    """First ``(i, j, k)`` with nonzero jacobiator, or None."""
    for i, j, k in combinations(range(P.num_vars), 3):
        if jacobiator(P, i, j, k):
            return (i, j, k)
    return None


def jacobi_residuals(P):
    return {(i, j, k): jacobiator(P, i, j, k) for i, j, k in combinations(range(P.num_vars), 3)}


def pushforward(P, change):
    """Bracket table of the new coordinates ``y = change(x)``, written in ``y``."""
    if change.num_vars != P.num_vars or change.order != P.order:
        raise DimensionMismatch("coordinate change and Poisson structure disagree on (n, order)")
    inv = invert_change(change)
    n = P.num_vars
    entries = {}
    for i, j in combinations(range(n), 2):
        entries[i, j] = substitute(bracket(change[i], change[j], P), inv)
    return PoissonStructure.from_upper(n, P.order, entries)


def linear_part(P):
    """Structure constants ``c[i][j][k]`` = coefficient of ``x_k`` in ``pi[i][j]``."""
    n = P.num_vars
    c = np.full((n, n, n), Fraction(0), dtype=object)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                e = [0] * n
                e[k] = 1
                c[i, j, k] = P.pi[i][j].coefficient(tuple(e))
    return c
