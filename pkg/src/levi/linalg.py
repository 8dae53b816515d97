"""Exact linear algebra over the rationals.

Thin wrappers around sympy's ``DomainMatrix`` over ``QQ``.  Inputs and
outputs are sequences (or object arrays) of :class:`fractions.Fraction`.
"""
from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _to_qq(x):
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def _to_fraction(x):
    return Fraction(int(x.numerator), int(x.denominator))


def to_domain(rows, shape=None):
    rows = [list(r) for r in rows]
    if shape is None:
        shape = (len(rows), len(rows[0]) if rows else 0)
    return DomainMatrix([[_to_qq(v) for v in r] for r in rows], shape, QQ)


def from_domain(M):
    return np.array([[_to_fraction(v) for v in row] for row in M.to_list()],
                    dtype=object).reshape(M.shape)


def rank(rows):
    rows = np.asarray(rows, dtype=object)
    if rows.size == 0:
        return 0
    return to_domain(rows, rows.shape).rank()


def determinant(rows):
    rows = np.asarray(rows, dtype=object)
    return _to_fraction(to_domain(rows, rows.shape).det())


def inverse(rows):
    """Exact inverse; raises ``ZeroDivisionError`` when singular."""
    rows = np.asarray(rows, dtype=object)
    M = to_domain(rows, rows.shape)
    if M.det() == 0:
        raise ZeroDivisionError("matrix is singular")
    return from_domain(M.inv())


def solve_particular(A, b):
    """Solve ``A x = b`` exactly.

    Returns ``(x, residual)``.  When the system is consistent ``x`` is the
    reduced-row-echelon particular solution with all free variables set to
    zero and ``residual`` is empty.  Otherwise ``x`` is None and ``residual``
    lists the right-hand-side entries of the inconsistent rows of the reduced
    augmented matrix, i.e. coordinates of ``b`` in the cokernel.
    """
    A = np.asarray(A, dtype=object)
    b = np.asarray(b, dtype=object).reshape(-1)
    rows, cols = A.shape
    if rows == 0:
        return np.array([Fraction(0)] * cols, dtype=object), ()
    aug = np.empty((rows, cols + 1), dtype=object)
    aug[:, :cols] = A
    aug[:, cols] = b
    R, pivots = to_domain(aug, aug.shape).rref()
    R = from_domain(R)
    if cols in pivots:
        residual = tuple(R[r, cols] for r in range(rows)
                         if all(v == 0 for v in R[r, :cols]) and R[r, cols] != 0)
        return None, residual
    x = np.array([Fraction(0)] * cols, dtype=object)
    for r, p in enumerate(pivots):
        x[p] = R[r, cols]
    return x, ()
