"""Stepwise formal linearization of Poisson structures and Lie algebroids.

At each degree k the lowest surviving nonlinear part of the structure is
read as a Chevalley-Eilenberg cocycle, a primitive is found with
:func:`levi.liecoh.solve_coboundary`, and a degree-k change of coordinates
(or of frame) built from it removes that part.  The sign of the correction
is not derived from a convention: both signs are tried and the one that
kills the degree-k part is kept.
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .errors import (DimensionMismatch, IndexOutOfRange, InternalCocycleFailure, NotAnAlgebroid,
                     NotPoisson, Obstructed, ObstructedAtOrder, ParseError)
from .liecoh import (Cochain, LieAlgebra, Representation, adjoint_rep, ce_differential,
                     solve_coboundary, symmetric_power_rep, tensor_rep)
from .poisson import jacobi_witness, linear_part, pushforward
from .truncpoly import (CoordinateChange, TruncatedPolynomial, invert_change, monomials,
                        substitute)
from . import linalg


@dataclass
class OrderRecord:
    order: int
    status: str
    obstruction_dim: int = 0
    phase: int | None = None
    sign: int | None = None

    def to_json(self):
        out = {"order": self.order, "status": self.status, "obstruction_dim": self.obstruction_dim}
        if self.phase is not None:
            out["phase"] = self.phase
        if self.sign is not None:
            out["sign"] = self.sign
        return out


@dataclass
class LinearizationReport:
    success: bool
    achieved_order: int
    coordinate_change: CoordinateChange
    final: object
    records: list = field(default_factory=list)
    frame_change: tuple | None = None
    obstruction: ObstructedAtOrder | None = None

    @property
    def obstructions(self):
        return [r for r in self.records if r.status == "obstructed"]

    def raise_if_obstructed(self):
        if self.obstruction is not None:
            raise self.obstruction

    def signs(self):
        return [r.sign for r in self.records if r.sign is not None]

    def to_json(self):
        out = {"success": self.success, "achieved_order": self.achieved_order,
               "records": [r.to_json() for r in self.records],
               "coordinate_change": self.coordinate_change.to_json()}
        if self.frame_change is not None:
            out["frame_change"] = [[p.terms_json() for p in row] for row in self.frame_change]
        out["final"] = self.final.to_json()
        return out


# -- Poisson ---------------------------------------------------------------


def _poisson_module(g, k):
    return symmetric_power_rep(adjoint_rep(g), k)


def linearize_poisson(P, target_order=None, on_step=None):
    """Formal linearization of ``P`` through degree ``target_order``.

    Returns a :class:`LinearizationReport`; on success
    ``pushforward(P, report.coordinate_change)`` has no terms of degree
    2..target_order.  For a non-semisimple linear part the run stops at the
    first nonzero cohomology class and the report carries an
    :class:`ObstructedAtOrder` (see :meth:`LinearizationReport.raise_if_obstructed`).

    ``on_step(k, psi)``, if given, sees the 2-cochain extracted at every degree.
    """
    n, N = P.num_vars, P.order
    if target_order is None:
        target_order = N
    if not 1 <= target_order <= N:
        raise ValueError(f"target order {target_order} outside 1..{N}")
    witness = jacobi_witness(P)
    if witness is not None:
        raise NotPoisson(f"Jacobi identity fails for {witness}")
    g = LieAlgebra(linear_part(P))
    current = P
    total = CoordinateChange.identity(n, N)
    records = []
    achieved = 1
    for k in range(2, target_order + 1):
        rep = _poisson_module(g, k)
        psi = Cochain.from_function(rep, 2, lambda idx: current.pi[idx[0]][idx[1]].to_vector(k))
        if on_step is not None:
            on_step(k, psi)
        if psi.is_zero():
            records.append(OrderRecord(k, "solved"))
            achieved = k
            continue
        if not ce_differential(psi).is_zero():
            raise InternalCocycleFailure(f"degree-{k} part is not a 2-cocycle")
        try:
            phi = solve_coboundary(psi, check_cocycle=False)
        except Obstructed as exc:
            records.append(OrderRecord(k, "obstructed", exc.cohomology_dim))
            return LinearizationReport(False, achieved, total, current, records,
                                       obstruction=ObstructedAtOrder(k, None, exc.cohomology_dim))
        chosen = None
        for s in (-1, 1):
            step = CoordinateChange(
                TruncatedPolynomial.variable(n, N, i)
                + TruncatedPolynomial.from_vector(n, N, k, phi.value(i)) * s
                for i in range(n))
            candidate = pushforward(current, step)
            if all(not candidate.pi[i][j].homogeneous_part(k)
                   for i, j in combinations(range(n), 2)):
                if chosen is not None:
                    raise InternalCocycleFailure(f"both correction signs work at degree {k}")
                chosen = (s, step, candidate)
        if chosen is None:
            raise InternalCocycleFailure(f"no correction sign removes the degree-{k} part")
        s, step, current = chosen
        total = step.compose(total)
        records.append(OrderRecord(k, "solved", sign=s))
        achieved = k
    return LinearizationReport(True, achieved, total, current, records)


# -- Lie algebroids --------------------------------------------------------


class LieAlgebroid:
    """Local Lie algebroid in a frame ``e_0..e_{n-1}`` over coordinates ``x_0..x_{d-1}``.

    ``c[i][j][l]`` are the structure functions (``[e_i, e_j] = sum_l c_ij^l e_l``)
    and ``b[i][j]`` the anchor components (``rho(e_i) = sum_j b_ij d/dx_j``).
    """

    def __init__(self, c, b):
        c = [[list(row) for row in plane] for plane in c]
        b = [list(row) for row in b]
        n = len(c)
        if n == 0 or len(b) != n:
            raise DimensionMismatch("structure functions and anchor disagree on the rank")
        d = len(b[0])
        ref = c[0][0][0]
        self.rank, self.base_dim, self.order = n, d, ref.order
        for i in range(n):
            if len(c[i]) != n or len(b[i]) != d:
                raise DimensionMismatch("ragged structure data")
            for j in range(n):
                if len(c[i][j]) != n:
                    raise DimensionMismatch("ragged structure data")
                for l in range(n):
                    p = c[i][j][l]
                    if p.num_vars != d or p.order != self.order:
                        raise DimensionMismatch("structure function over the wrong base")
                    if c[j][i][l] != -p:
                        raise ValueError(f"c[{i}][{j}][{l}] is not antisymmetric")
            for j in range(d):
                p = b[i][j]
                if p.num_vars != d or p.order != self.order:
                    raise DimensionMismatch("anchor component over the wrong base")
                if p.constant_term():
                    raise ValueError("anchor must vanish at the origin")
        self.c = tuple(tuple(tuple(row) for row in plane) for plane in c)
        self.b = tuple(tuple(row) for row in b)

    @classmethod
    def action(cls, algebra, matrices, order):
        """Action algebroid ``g x R^d``: anchor ``rho(e_i) = sum_j (A_i x)_j d/dx_j``.

        ``matrices[i][j][k]`` is ``d b_ij / d x_k (0)``.
        """
        n = algebra.dim
        d = len(matrices[0])
        xs = [TruncatedPolynomial.variable(d, order, k) for k in range(d)]
        zero = TruncatedPolynomial.zero(d, order)
        c = [[[TruncatedPolynomial.constant(d, order, algebra.c[i, j, l]) for l in range(n)]
              for j in range(n)] for i in range(n)]
        b = [[sum((xs[k] * Fraction(matrices[i][j][k]) for k in range(d) if matrices[i][j][k]), zero)
              for j in range(d)] for i in range(n)]
        return cls(c, b)

    @classmethod
    def coadjoint_action(cls, algebra, order):
        """Action of ``g`` on ``g*`` by linear vector fields, anchor ``b_ij = sum_k c_ij^k x_k``."""
        n = algebra.dim
        return cls.action(algebra, [[[algebra.c[i, j, k] for k in range(n)] for j in range(n)]
                                    for i in range(n)], order)

    def __eq__(self, other):
        return isinstance(other, LieAlgebroid) and self.c == other.c and self.b == other.b

    def __hash__(self):
        return hash((self.c, self.b))

    def __repr__(self):
        return f"LieAlgebroid(rank={self.rank}, base_dim={self.base_dim}, order={self.order})"

    def fibre_algebra(self):
        n = self.rank
        return LieAlgebra([[[self.c[i][j][l].constant_term() for l in range(n)]
                            for j in range(n)] for i in range(n)])

    def linear_anchor(self):
        """``A[i][j][k] = d b_ij / d x_k (0)``."""
        d = self.base_dim
        unit = [tuple(int(a == k) for a in range(d)) for k in range(d)]
        return [[[self.b[i][j].coefficient(unit[k]) for k in range(d)] for j in range(d)]
                for i in range(self.rank)]

    def anchor_apply(self, i, f):
        """``rho(e_i) . f``."""
        out = TruncatedPolynomial.zero(self.base_dim, self.order)
        for m in range(self.base_dim):
            if self.b[i][m]:
                df = f.partial(m)
                if df:
                    out = out + self.b[i][m] * df
        return out

    def is_constant_and_linear(self, upto=None):
        """True when the structure functions are constant and the anchor linear through ``upto``."""
        k = self.order if upto is None else upto
        for plane in self.c:
            for row in plane:
                for p in row:
                    if any(1 <= sum(e) <= k for e in p.terms):
                        return False
        for row in self.b:
            for p in row:
                if any(2 <= sum(e) <= k for e in p.terms):
                    return False
        return True

    def validate(self):
        for (i, j, l), r in anchor_residuals(self).items():
            if r:
                raise NotAnAlgebroid(f"anchor is not a homomorphism at ({i}, {j}, {l}): {r!r}")
        for (i, j, k, l), r in jacobi_residuals(self).items():
            if r:
                raise NotAnAlgebroid(f"Jacobi identity fails at ({i}, {j}, {k}; {l}): {r!r}")

    def to_json(self):
        n, d = self.rank, self.base_dim
        return {"rank": n, "base_dim": d, "order": self.order,
                "c": {f"{i},{j},{l}": self.c[i][j][l].terms_json()
                      for i, j in combinations(range(n), 2) for l in range(n) if self.c[i][j][l]},
                "b": {f"{i},{j}": self.b[i][j].terms_json()
                      for i in range(n) for j in range(d) if self.b[i][j]}}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            n, d, N = int(obj["rank"]), int(obj["base_dim"]), int(obj["order"])
            zero = TruncatedPolynomial.zero(d, N)
            c = [[[zero] * n for _ in range(n)] for _ in range(n)]
            b = [[zero] * d for _ in range(n)]
            for key, terms in obj["c"].items():
                i, j, l = (int(s) for s in key.split(","))
                if not (0 <= i < n and 0 <= j < n and 0 <= l < n) or i == j:
                    raise ParseError(f"bad structure function index {key!r}")
                p = TruncatedPolynomial.from_terms_json(d, N, terms)
                if i > j:
                    i, j, p = j, i, -p
                c[i][j][l] = p
                c[j][i][l] = -p
            for key, terms in obj["b"].items():
                i, j = (int(s) for s in key.split(","))
                if not (0 <= i < n and 0 <= j < d):
                    raise ParseError(f"bad anchor index {key!r}")
                b[i][j] = TruncatedPolynomial.from_terms_json(d, N, terms)
        except (KeyError, ValueError, AttributeError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed Lie algebroid: {exc}") from exc
        return cls(c, b)


def anchor_homomorphism_residual(A, i, j, l):
    """``sum_k c_ij^k b_kl - (rho(e_i) b_jl - rho(e_j) b_il)``; zero for an algebroid."""
    n, d = A.rank, A.base_dim
    if not (0 <= i < n and 0 <= j < n and 0 <= l < d):
        raise IndexOutOfRange(f"index out of range: ({i}, {j}, {l})")
    out = TruncatedPolynomial.zero(d, A.order)
    for k in range(n):
        if A.c[i][j][k] and A.b[k][l]:
            out = out + A.c[i][j][k] * A.b[k][l]
    return out - A.anchor_apply(i, A.b[j][l]) + A.anchor_apply(j, A.b[i][l])


def algebroid_jacobiator(A, i, j, k, l):
    """e_l-component of ``sum_cyclic(i,j,k) [e_i, [e_j, e_k]]``."""
    n = A.rank
    for idx in (i, j, k, l):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"index {idx} out of range for rank {n}")
    out = TruncatedPolynomial.zero(A.base_dim, A.order)
    for a, b_, c_ in ((i, j, k), (j, k, i), (k, i, j)):
        for m in range(n):
            if A.c[b_][c_][m] and A.c[a][m][l]:
                out = out + A.c[b_][c_][m] * A.c[a][m][l]
        out = out + A.anchor_apply(a, A.c[b_][c_][l])
    return out


def anchor_residuals(A):
    return {(i, j, l): anchor_homomorphism_residual(A, i, j, l)
            for i, j in combinations(range(A.rank), 2) for l in range(A.base_dim)}


def jacobi_residuals(A):
    return {(i, j, k, l): algebroid_jacobiator(A, i, j, k, l)
            for i, j, k in combinations(range(A.rank), 3) for l in range(A.rank)}


def _poly_matrix_inverse(F):
    """Inverse of a square matrix of truncated polynomials with invertible value at 0."""
    n = len(F)
    d, N = F[0][0].num_vars, F[0][0].order
    F0 = [[F[i][j].constant_term() for j in range(n)] for i in range(n)]
    try:
        F0inv = linalg.inverse(F0)
    except ZeroDivisionError as exc:
        raise ValueError("frame change is singular at the origin") from exc
    zero = TruncatedPolynomial.zero(d, N)
    one = TruncatedPolynomial.constant(d, N, 1)

    def matmul(X, Y):
        return [[sum((X[i][k] * Y[k][j] for k in range(n) if X[i][k] and Y[k][j]), zero)
                 for j in range(n)] for i in range(n)]

    const = [[TruncatedPolynomial.constant(d, N, F0inv[i, j]) for j in range(n)] for i in range(n)]
    # F = F0 (I + R), R = F0^-1 (F - F0) has no constant term
    R = matmul(const, [[F[i][j] - F0[i][j] for j in range(n)] for i in range(n)])
    ident = [[one if i == j else zero for j in range(n)] for i in range(n)]
    acc, power = ident, ident
    for r in range(1, N + 1):
        power = matmul(power, R)
        if all(not p for row in power for p in row):
            break
        sign = -1 if r % 2 else 1
        acc = [[acc[i][j] + power[i][j] * sign for j in range(n)] for i in range(n)]
    return matmul(acc, const)


def change_frame(A, F):
    """Algebroid in the new frame ``e'_i = sum_l F[i][l] e_l``."""
    n, d, N = A.rank, A.base_dim, A.order
    if len(F) != n or any(len(row) != n for row in F):
        raise DimensionMismatch("frame change must be rank x rank")
    zero = TruncatedPolynomial.zero(d, N)
    Finv = _poly_matrix_inverse(F)
    b = [[sum((F[i][l] * A.b[l][j] for l in range(n) if F[i][l] and A.b[l][j]), zero)
          for j in range(d)] for i in range(n)]
    # rho(e_l) F[j][p], cached
    XF = [[[A.anchor_apply(l, F[j][p]) for p in range(n)] for j in range(n)] for l in range(n)]
    c = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for i, j in combinations(range(n), 2):
        C = []
        for p in range(n):
            acc = zero
            for l in range(n):
                if not F[i][l]:
                    continue
                for m in range(n):
                    if F[j][m] and A.c[l][m][p]:
                        acc = acc + F[i][l] * F[j][m] * A.c[l][m][p]
                if XF[l][j][p]:
                    acc = acc + F[i][l] * XF[l][j][p]
            for m in range(n):
                if F[j][m] and XF[m][i][p]:
                    acc = acc - F[j][m] * XF[m][i][p]
            C.append(acc)
        for q in range(n):
            val = sum((C[p] * Finv[p][q] for p in range(n) if C[p] and Finv[p][q]), zero)
            c[i][j][q] = val
            c[j][i][q] = -val
    return LieAlgebroid(c, b)


def change_coordinates(A, change):
    """Algebroid in base coordinates ``y = change(x)``, same frame."""
    if change.num_vars != A.base_dim or change.order != A.order:
        raise DimensionMismatch("coordinate change does not match the base")
    inv = invert_change(change)
    n, d = A.rank, A.base_dim
    c = [[[substitute(A.c[i][j][l], inv) for l in range(n)] for j in range(n)] for i in range(n)]
    b = [[substitute(A.anchor_apply(i, change[l]), inv) for l in range(d)] for i in range(n)]
    return LieAlgebroid(c, b)


def _function_rep(g, A_lin):
    """g acting on linear functions of the base by the linear anchor fields."""
    d = len(A_lin[0])
    # X_i(x_j) = sum_k A[i][j][k] x_k, so column j of the matrix has entries A[i][j][k] at row k
    return Representation(g, [[[A_lin[i][j][k] for j in range(d)] for k in range(d)]
                              for i in range(g.dim)])


def _vector_rep(g, A_lin):
    """g acting on R^d (vector field components) by ``-A_i``."""
    d = len(A_lin[0])
    return Representation(g, [[[-A_lin[i][l][j] for j in range(d)] for l in range(d)]
                              for i in range(g.dim)])


def _frame_module(g, A_lin, k):
    return tensor_rep(symmetric_power_rep(_function_rep(g, A_lin), k), adjoint_rep(g))


def _anchor_module(g, A_lin, k):
    return tensor_rep(symmetric_power_rep(_function_rep(g, A_lin), k), _vector_rep(g, A_lin))


def _split(vector, num_vars, order, k, width):
    """Module vector laid out as (monomial, slot) -> list of ``width`` polynomials."""
    basis = monomials(num_vars, k)
    out = []
    for slot in range(width):
        out.append(TruncatedPolynomial(
            num_vars, order, {alpha: vector[a * width + slot] for a, alpha in enumerate(basis)}))
    return out


def _join(polys, k):
    """Inverse of :func:`_split`."""
    vecs = [p.to_vector(k) for p in polys]
    return [vecs[slot][a] for a in range(len(vecs[0])) for slot in range(len(polys))]


def _mat_mul(X, Y, zero):
    n = len(X)
    return [[sum((X[i][k] * Y[k][j] for k in range(n) if X[i][k] and Y[k][j]), zero)
             for j in range(n)] for i in range(n)]


def linearize_algebroid(A, target_order=None):
    """Formal linearization of a Lie algebroid whose anchor vanishes at 0.

    Phase 1 changes the frame degree by degree until the structure functions
    are constant (an action algebroid through ``target_order``); phase 2
    changes base coordinates until the anchor is linear.  The report holds
    the accumulated frame change (in the original coordinates) and the
    coordinate change; applying the frame change first and then the
    coordinate change to ``A`` gives ``report.final``.
    """
    n, d, N = A.rank, A.base_dim, A.order
    if target_order is None:
        target_order = N
    if not 1 <= target_order <= N:
        raise ValueError(f"target order {target_order} outside 1..{N}")
    A.validate()
    g = A.fibre_algebra()
    A_lin = A.linear_anchor()
    zero = TruncatedPolynomial.zero(d, N)
    one = TruncatedPolynomial.constant(d, N, 1)
    frame = [[one if i == j else zero for j in range(n)] for i in range(n)]
    coords = CoordinateChange.identity(d, N)
    current = A
    records = []

    def obstructed(k, phase, exc, achieved):
        records.append(OrderRecord(k, "obstructed", exc.cohomology_dim, phase=phase))
        return LinearizationReport(False, achieved, coords, current, records,
                                   frame_change=tuple(tuple(r) for r in frame),
                                   obstruction=ObstructedAtOrder(k, phase, exc.cohomology_dim))

    for k in range(1, target_order + 1):
        rep = _frame_module(g, A_lin, k)
        psi = Cochain.from_function(rep, 2, lambda idx: _join(current.c[idx[0]][idx[1]], k))
        if psi.is_zero():
            records.append(OrderRecord(k, "solved", phase=1))
            continue
        if not ce_differential(psi).is_zero():
            raise InternalCocycleFailure(f"phase 1: degree-{k} structure functions are not a cocycle")
        try:
            phi = solve_coboundary(psi, check_cocycle=False)
        except Obstructed as exc:
            return obstructed(k, 1, exc, 0)
        sections = [_split(phi.value(i), d, N, k, n) for i in range(n)]
        chosen = None
        for s in (-1, 1):
            step = [[(one if i == l else zero) + sections[i][l] * s for l in range(n)]
                    for i in range(n)]
            cand = change_frame(current, step)
            if all(not cand.c[i][j][l].homogeneous_part(k)
                   for i, j in combinations(range(n), 2) for l in range(n)):
                if chosen is not None:
                    raise InternalCocycleFailure(f"phase 1: both signs work at degree {k}")
                chosen = (s, step, cand)
        if chosen is None:
            raise InternalCocycleFailure(f"phase 1: no sign removes the degree-{k} part")
        s, step, current = chosen
        frame = _mat_mul(step, frame, zero)
        records.append(OrderRecord(k, "solved", phase=1, sign=s))

    for k in range(2, target_order + 1):
        rep = _anchor_module(g, A_lin, k)
        beta = Cochain.from_function(rep, 1, lambda idx: _join(current.b[idx[0]], k))
        if beta.is_zero():
            records.append(OrderRecord(k, "solved", phase=2))
            continue
        if not ce_differential(beta).is_zero():
            raise InternalCocycleFailure(f"phase 2: degree-{k} anchor is not a cocycle")
        try:
            phi = solve_coboundary(beta, check_cocycle=False)
        except Obstructed as exc:
            return obstructed(k, 2, exc, k - 1)
        field_ = _split(phi.value(), d, N, k, d)
        chosen = None
        for s in (-1, 1):
            step = CoordinateChange(TruncatedPolynomial.variable(d, N, l) + field_[l] * s
                                    for l in range(d))
            cand = change_coordinates(current, step)
            if all(not cand.b[i][l].homogeneous_part(k) for i in range(n) for l in range(d)):
                if chosen is not None:
                    raise InternalCocycleFailure(f"phase 2: both signs work at degree {k}")
                chosen = (s, step, cand)
        if chosen is None:
            raise InternalCocycleFailure(f"phase 2: no sign removes the degree-{k} part")
        s, step, current = chosen
        coords = step.compose(coords)
        records.append(OrderRecord(k, "solved", phase=2, sign=s))

    return LinearizationReport(True, target_order, coords, current, records,
                               frame_change=tuple(tuple(r) for r in frame))


def apply_changes(A, frame, coords):
    """``change_coordinates(change_frame(A, frame), coords)``."""
    return change_coordinates(change_frame(A, frame), coords)
