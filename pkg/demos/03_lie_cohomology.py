"""
Lie algebra cohomology
======================

Semisimplicity by the Killing form, and exact cohomology dimensions of the
Chevalley-Eilenberg complex.
"""

from levi.liecoh import (LieAlgebra, Representation, adjoint_rep, cohomology_dim,
                         is_semisimple, killing_form, symmetric_power_rep, tensor_rep)

so3 = LieAlgebra.so3()
solvable = LieAlgebra.from_upper(2, {(0, 1, 1): 1})

print("Killing form of so(3):\n", killing_form(so3))
print("so(3) semisimple:", is_semisimple(so3), "| [e0,e1]=e1 semisimple:", is_semisimple(solvable))

###############################################################################
# Whitehead's lemmas in action: H^1 and H^2 vanish for so(3) with
# coefficients in every finite-dimensional module we try.

ad = adjoint_rep(so3)
for k in range(1, 5):
    Sk = symmetric_power_rep(ad, k)
    print(f"S^{k}(so3): dim {Sk.module_dim:2d}, H^1 = {cohomology_dim(so3, Sk, 1)}, "
          f"H^2 = {cohomology_dim(so3, Sk, 2)}")
    print(f"S^{k}(R3) (x) so3: H^2 = {cohomology_dim(so3, tensor_rep(Sk, ad), 2)}")

###############################################################################
# For an abelian algebra on a trivial module every differential vanishes.

ab = LieAlgebra.abelian(2)
triv = Representation.trivial(ab)
print("abelian 2-dim, trivial module: H^0, H^1, H^2 =",
      [cohomology_dim(ab, triv, p) for p in range(3)])
