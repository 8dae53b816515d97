"""
Truncated polynomials and formal coordinate changes
===================================================

Germs of functions at the origin are stood in for by polynomials with exact
rational coefficients, cut off above a fixed total degree.
"""

from fractions import Fraction

from levi.truncpoly import CoordinateChange, TruncatedPolynomial, invert_change

# three variables, everything above degree 4 is dropped
x0, x1, x2 = (TruncatedPolynomial.variable(3, 4, i) for i in range(3))

p = (1 + x0) ** 6
print("(1 + x0)^6 mod degree 5:", p)

###############################################################################
# Coefficients stay exact.

q = x1 * Fraction(1, 3) + x1 * Fraction(1, 6)
print("x1/3 + x1/6 =", q)
print("lowest degree of x0*x1 + x2^3:", (x0 * x1 + x2 ** 3).lowest_degree())

###############################################################################
# A coordinate change with identity linear part and its inverse.  The
# inverse is found by the fixed point iteration x <- y - H(x).

phi = CoordinateChange([x0 + x1 ** 2, x1 + x0 * x2, x2])
psi = invert_change(phi)
print("phi^-1 =", psi)
print("phi o phi^-1 is the identity:", phi.compose(psi).is_identity())

###############################################################################
# Serialization is canonical: graded lex order, coefficients as "p/q".

print(psi[0].to_json())
