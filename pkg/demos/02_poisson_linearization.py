"""
Formal linearization of a Poisson structure
===========================================

A perturbation of the Lie-Poisson structure of so(3) is brought back to its
linear part, one degree at a time, by solving coboundary equations in the
Chevalley-Eilenberg complex.
"""

from itertools import combinations

from levi.normalform import linearize_poisson
from levi.poisson import PoissonStructure, bracket, pushforward
from levi.truncpoly import TruncatedPolynomial

N = 6
x = [TruncatedPolynomial.variable(3, N, i) for i in range(3)]

# {x0, x1} = x2 + x2^2, {x1, x2} = x0, {x2, x0} = x1
P = PoissonStructure.from_upper(3, N, {(0, 1): x[2] + x[2] ** 2, (1, 2): x[0], (0, 2): -x[1]})
P.validate()
print("{x0^2, x1} =", bracket(x[0] ** 2, x[1], P))

###############################################################################
# The degree-k part of the bracket table is a 2-cocycle with values in the
# k-th symmetric power of so(3).  It is a coboundary, and the primitive
# gives the next coordinate change.

seen = []
report = linearize_poisson(P, N, on_step=lambda k, psi: seen.append((k, psi.rep.module_dim)))
print("success:", report.success, "through order", report.achieved_order)
print("modules visited (degree, dim S^k):", seen)
print("correction signs:", report.signs())

###############################################################################
# The emitted coordinates y = phi(x) have purely linear brackets.

Q = pushforward(P, report.coordinate_change)
for i, j in combinations(range(3), 2):
    print(f"{{y{i}, y{j}}} =", Q[i, j])
print("y0 =", report.coordinate_change[0])

###############################################################################
# With an abelian linear part there is nothing to solve against: the
# obstruction shows up at the first nonlinear degree.

y = [TruncatedPolynomial.variable(2, 4, i) for i in range(2)]
A = PoissonStructure.from_upper(2, 4, {(0, 1): y[0] ** 2})
bad = linearize_poisson(A)
print("abelian case:", bad.obstruction)
