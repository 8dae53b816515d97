"""Truncated multivariate polynomials with exact rational coefficients.

A :class:`TruncatedPolynomial` stands for a germ modulo ``m^(order+1)``:
every term of total degree above ``order`` is dropped on construction.
Two values with the same ``num_vars``, ``order`` and terms compare equal.

Variables are indexed from 0.  Terms are kept in graded lexicographic order
(total degree first, then ``x0 > x1 > ...``), which is also the order used
for serialization and for the monomial bases of symmetric powers.
"""
import json
import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

from .errors import DimensionMismatch, IndexOutOfRange, ParseError, SingularLinearPart
from . import linalg

INFINITE = math.inf


def _grlex_key(exps):
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def monomials(num_vars, degree):
    """Exponent vectors of total degree ``degree`` in graded lex order."""
    out = []
    for combo in combinations_with_replacement(range(num_vars), degree):
        e = [0] * num_vars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return tuple(sorted(out, key=_grlex_key))


@lru_cache(maxsize=None)
def monomial_index(num_vars, degree):
    return {e: i for i, e in enumerate(monomials(num_vars, degree))}


def parse_rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"bad rational {text!r}") from exc


def format_rational(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class TruncatedPolynomial:
    """Polynomial in ``num_vars`` variables, truncated above total degree ``order``.

    Parameters
    ----------
    num_vars : int
    order : int
        Truncation degree N; terms of degree > N are discarded.
    terms : mapping, optional
        Exponent tuple -> coefficient (anything ``Fraction`` accepts).
    """

    __slots__ = ("num_vars", "order", "_terms", "_hash")

    def __init__(self, num_vars, order, terms=None):
        if num_vars < 1 or order < 0:
            raise ValueError("num_vars must be >= 1 and order >= 0")
        self.num_vars = num_vars
        self.order = order
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars or min(exps) < 0:
                raise DimensionMismatch(f"exponent vector {exps} for {num_vars} variables")
            if sum(exps) > order:
                continue
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        self._terms = {e: clean[e] for e in sorted(clean, key=_grlex_key) if clean[e]}
        self._hash = None

    @classmethod
    def _raw(cls, num_vars, order, terms):
        # terms already canonical apart from ordering
        p = cls.__new__(cls)
        p.num_vars = num_vars
        p.order = order
        p._terms = {e: terms[e] for e in sorted(terms, key=_grlex_key)}
        p._hash = None
        return p

    # constructors

    @classmethod
    def zero(cls, num_vars, order):
        return cls(num_vars, order)

    @classmethod
    def constant(cls, num_vars, order, value):
        return cls(num_vars, order, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars, order, i):
        if not 0 <= i < num_vars:
            raise IndexOutOfRange(f"variable index {i} out of range for {num_vars} variables")
        e = [0] * num_vars
        e[i] = 1
        return cls(num_vars, order, {tuple(e): 1})

    @classmethod
    def from_vector(cls, num_vars, order, degree, values):
        """Homogeneous polynomial from coefficients on ``monomials(num_vars, degree)``."""
        return cls(num_vars, order, dict(zip(monomials(num_vars, degree), values)))

    # accessors

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, exps):
        return self._terms.get(tuple(exps), Fraction(0))

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def constant_term(self):
        return self.coefficient((0,) * self.num_vars)

    def lowest_degree(self):
        """Smallest total degree among stored terms; ``math.inf`` for zero."""
        if not self._terms:
            return INFINITE
        return min(sum(e) for e in self._terms)

    def degree(self):
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def homogeneous_part(self, k):
        return TruncatedPolynomial._raw(
            self.num_vars, self.order, {e: c for e, c in self._terms.items() if sum(e) == k})

    def truncated(self, k):
        """Drop terms of degree > k, keeping the ``order`` field."""
        return TruncatedPolynomial._raw(
            self.num_vars, self.order, {e: c for e, c in self._terms.items() if sum(e) <= k})

    def with_order(self, order):
        return TruncatedPolynomial(self.num_vars, order, self._terms)

    def to_vector(self, degree):
        """Coefficients of the degree-``degree`` part on the graded-lex monomial basis."""
        return [self.coefficient(e) for e in monomials(self.num_vars, degree)]

    # arithmetic

    def _check(self, other):
        if not isinstance(other, TruncatedPolynomial):
            raise TypeError(f"expected TruncatedPolynomial, got {type(other).__name__}")
        if other.num_vars != self.num_vars or other.order != self.order:
            raise DimensionMismatch(
                f"(n={self.num_vars}, N={self.order}) vs (n={other.num_vars}, N={other.order})")

    def _coerce(self, other):
        if isinstance(other, TruncatedPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedPolynomial.constant(self.num_vars, self.order, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return TruncatedPolynomial._raw(self.num_vars, self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPolynomial._raw(
            self.num_vars, self.order, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return TruncatedPolynomial.zero(self.num_vars, self.order)
            return TruncatedPolynomial._raw(
                self.num_vars, self.order, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        N = self.order
        # other's terms are sorted by degree, so the inner loop can stop early
        rhs = [(sum(e), e, c) for e, c in other._terms.items()]
        out = {}
        for e1, c1 in self._terms.items():
            d1 = sum(e1)
            for d2, e2, c2 in rhs:
                if d1 + d2 > N:
                    break
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return TruncatedPolynomial._raw(self.num_vars, N, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = TruncatedPolynomial.constant(self.num_vars, self.order, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedPolynomial):
            return NotImplemented
        return (self.num_vars == other.num_vars and self.order == other.order
                and self._terms == other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, self.order, frozenset(self._terms.items())))
        return self._hash

    def partial(self, i):
        """Formal partial derivative with respect to variable ``i`` (0-based)."""
        if not 0 <= i < self.num_vars:
            raise IndexOutOfRange(f"variable index {i} out of range for {self.num_vars} variables")
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return TruncatedPolynomial._raw(self.num_vars, self.order, out)

    def substitute(self, change):
        """Compose with a coordinate change: ``p(phi_1(x), ..., phi_n(x))``."""
        return substitute(self, change)

    def __call__(self, *point):
        """Evaluate at a point (exact if the point is rational)."""
        if len(point) != self.num_vars:
            raise DimensionMismatch("wrong number of coordinates")
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                term *= x ** k
            total += term
        return total

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self._terms.items():
            mono = "*".join(f"x{i}" if k == 1 else f"x{i}^{k}" for i, k in enumerate(e) if k)
            if not mono:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # serialization

    def terms_json(self):
        return [{"exps": list(e), "coeff": format_rational(c)} for e, c in self._terms.items()]

    def to_json(self):
        return {"n": self.num_vars, "order": self.order, "terms": self.terms_json()}

    @classmethod
    def from_terms_json(cls, num_vars, order, items):
        try:
            terms = {}
            for item in items:
                e = tuple(item["exps"])
                terms[e] = terms.get(e, 0) + parse_rational(item["coeff"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed term list: {exc}") from exc
        return cls(num_vars, order, terms)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls.from_terms_json(int(obj["n"]), int(obj["order"]), obj["terms"])
        except KeyError as exc:
            raise ParseError(f"missing key {exc}") from exc


def poly_add(p, q):
    p._check(q)
    return p + q


def poly_mul(p, q):
    p._check(q)
    return p * q


def partial_derivative(p, i):
    return p.partial(i)


def lowest_degree(p):
    return p.lowest_degree()


class CoordinateChange:
    """New coordinates ``y_i = phi_i(x)`` given as truncated polynomials.

    Each component has zero constant term and the linear part must be an
    invertible matrix.
    """

    __slots__ = ("num_vars", "order", "components")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("a coordinate change needs at least one component")
        n, N = components[0].num_vars, components[0].order
        for c in components:
            if c.num_vars != n or c.order != N:
                raise DimensionMismatch("components must share num_vars and order")
        if len(components) != n:
            raise DimensionMismatch(f"{len(components)} components for {n} variables")
        if any(c.constant_term() for c in components):
            raise ValueError("coordinate change components must vanish at the origin")
        self.num_vars = n
        self.order = N
        self.components = components

    @classmethod
    def identity(cls, num_vars, order):
        return cls(TruncatedPolynomial.variable(num_vars, order, i) for i in range(num_vars))

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return self.num_vars

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        if not isinstance(other, CoordinateChange):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "CoordinateChange(" + ", ".join(repr(c) for c in self.components) + ")"

    def linear_matrix(self):
        """Matrix L with ``L[i][j]`` the coefficient of ``x_j`` in ``phi_i``."""
        n = self.num_vars
        unit = [tuple(int(i == j) for i in range(n)) for j in range(n)]
        return [[c.coefficient(unit[j]) for j in range(n)] for c in self.components]

    def is_identity(self):
        return self == CoordinateChange.identity(self.num_vars, self.order)

    def truncated(self, k):
        return CoordinateChange(c.truncated(k) for c in self.components)

    def compose(self, other):
        """Map composition ``self o other``: components ``phi_i(other(x))``."""
        return CoordinateChange(substitute(c, other) for c in self.components)

    def inverse(self):
        return invert_change(self)

    def to_json(self):
        return {"n": self.num_vars, "order": self.order,
                "components": [c.terms_json() for c in self.components]}

    @classmethod
    def from_json(cls, obj):
        try:
            n, N = int(obj["n"]), int(obj["order"])
            return cls(TruncatedPolynomial.from_terms_json(n, N, t) for t in obj["components"])
        except KeyError as exc:
            raise ParseError(f"missing key {exc}") from exc


def substitute(p, change):
    """``p(phi(x))`` truncated at ``p.order``."""
    if p.num_vars != change.num_vars or p.order != change.order:
        raise DimensionMismatch("polynomial and coordinate change disagree on (n, order)")
    n, N = p.num_vars, p.order
    one = TruncatedPolynomial.constant(n, N, 1)
    # monomial values built recursively: phi^e = phi^(e - unit_j) * phi_j
    cache = {(0,) * n: one}

    def power(e):
        if e in cache:
            return cache[e]
        j = next(i for i, k in enumerate(e) if k)
        f = list(e)
        f[j] -= 1
        val = power(tuple(f)) * change.components[j]
        cache[e] = val
        return val

    out = {}
    for e, c in p.items():
        for f, v in power(e).items():
            out[f] = out.get(f, 0) + c * v
    return TruncatedPolynomial._raw(n, N, {e: c for e, c in out.items() if c})


def apply_matrix(matrix, polys):
    """``sum_j matrix[i][j] * polys[j]`` for each row i."""
    out = []
    for row in matrix:
        acc = TruncatedPolynomial.zero(polys[0].num_vars, polys[0].order)
        for a, q in zip(row, polys):
            if a:
                acc = acc + q * Fraction(a)
        out.append(acc)
    return out


def invert_change(change):
    """Two-sided inverse of a coordinate change modulo degree > order.

    Writes ``phi = L + H`` with ``H`` of degree >= 2 and iterates
    ``x <- L^-1 (y - H(x))``; each pass fixes one more degree.
    """
    n, N = change.num_vars, change.order
    try:
        Linv = linalg.inverse(change.linear_matrix())
    except ZeroDivisionError as exc:
        raise SingularLinearPart("linear part of the coordinate change is singular") from exc
    nonlinear = [c - c.truncated(1) for c in change.components]
    ys = [TruncatedPolynomial.variable(n, N, i) for i in range(n)]
    psi = CoordinateChange(apply_matrix(Linv, ys))
    if all(h.is_zero() for h in nonlinear):
        return psi
    for _ in range(N):
        rhs = [y - substitute(h, psi) for y, h in zip(ys, nonlinear)]
        nxt = CoordinateChange(apply_matrix(Linv, rhs))
        if nxt == psi:
            break
        psi = nxt
    return psi
