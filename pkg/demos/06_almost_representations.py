"""
Averaging almost representations
================================

Invertible operators T0(g) that multiply correctly up to eps (2K)^-9 are
moved by at most eps to an honest representation.  The hypothesis is very
tight: with eps = 2^-6 and K = 1.01 the allowed defect is about 2.8e-5.
"""

import numpy as np

from levi.avg import (FiniteGroup, average_to_representation, operator_norm,
                      representation_defect, representation_hypothesis)

rng = np.random.default_rng(1)
C3 = FiniteGroup.cyclic(3)
w = np.exp(2j * np.pi / 3)
R = np.array([np.diag([1, w ** k]) for k in range(3)])
K, eps = 1.01, 2 ** -6
print("allowed defect:", eps * (2 * K) ** -9)

for size in (1e-4, 3e-6):
    T0 = R + size * (rng.standard_normal(R.shape) + 1j * rng.standard_normal(R.shape)) / np.sqrt(2)
    problems = representation_hypothesis(C3, T0, K, eps)
    print(f"\nperturbation {size:g}: defect {representation_defect(C3, T0):.2e}")
    print("hypothesis violations:", problems or "none")
    T = average_to_representation(C3, T0, K, eps, force=bool(problems))
    print(f"corrected defect {representation_defect(C3, T):.1e}, "
          f"moved {max(operator_norm(a - b) for a, b in zip(T0, T)):.2e} <= eps = {eps}")
