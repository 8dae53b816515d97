"""
Averaging almost homomorphisms
==============================

A map from the cyclic group C4 into SO(3) that is a homomorphism up to a
small defect q is corrected by repeated Karcher averaging.  The result is an
exact homomorphism within 1.36 q of the input.
"""

import numpy as np

from levi.avg import (AlmostHomomorphism, FiniteGroup, MatrixGroupTarget, average_to_homomorphism,
                      defect, max_displacement, quaternion_matrices)

rng = np.random.default_rng(0)
SO3 = MatrixGroupTarget("SO", 3)
C4 = FiniteGroup.cyclic(4)


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


sigma0 = AlmostHomomorphism(C4, SO3, [SO3.exp(SO3.random_algebra(rng, 0.08)) @ rot_z(k * np.pi / 2)
                                      for k in range(4)])
q = defect(sigma0)
sigma = average_to_homomorphism(sigma0)
print(f"q = {q:.4f}, defect after averaging = {defect(sigma):.1e}")
print(f"moved {max_displacement(sigma0, sigma):.4f} < 1.36 q = {1.36 * q:.4f}")

###############################################################################
# The same for the quaternion group inside SU(2).

SU2 = MatrixGroupTarget("SU", 2)
Q8 = FiniteGroup.quaternion()
tau0 = AlmostHomomorphism(Q8, SU2, [SU2.exp(SU2.random_algebra(rng, 0.05)) @ m
                                    for m in quaternion_matrices()])
tau = average_to_homomorphism(tau0)
print(f"Q8: q = {defect(tau0):.4f}, moved {max_displacement(tau0, tau):.4f}, "
      f"defect now {defect(tau):.1e}")
