"""Regenerate the input corpus in ``demos/data``.

Every file is produced from a fixed seed, so rerunning this script leaves
the corpus byte-identical.

    python3 demos/make_data.py
"""
import json
import random
from fractions import Fraction
from pathlib import Path

import numpy as np

from levi.avg import AlmostHomomorphism, FiniteGroup, MatrixGroupTarget, quaternion_matrices
from levi.liecoh import LieAlgebra
from levi.normalform import LieAlgebroid, apply_changes
from levi.poisson import PoissonStructure, pushforward
from levi.subavg import AmbientSpace, DiscretizedSubmanifold, cyclic_rotations
from levi.truncpoly import CoordinateChange, TruncatedPolynomial, monomials

DATA = Path(__file__).resolve().parent / "data"
T = TruncatedPolynomial


def dump(name, obj):
    (DATA / name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def random_poly(rng, n, order, lo, hi, density=0.3):
    terms = {}
    for k in range(lo, hi + 1):
        for e in monomials(n, k):
            if rng.random() < density:
                terms[e] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return T(n, order, terms)


def so3_poisson(order):
    x = [T.variable(3, order, i) for i in range(3)]
    return PoissonStructure.from_upper(3, order, {(0, 1): x[2] + x[2] * x[2], (1, 2): x[0],
                                                  (0, 2): -x[1]})


def poisson_files():
    dump("so3_perturbed.json", so3_poisson(6).to_json())
    # round trip of the linear so(3) structure through a cubic change
    rng = random.Random(7)
    lin = PoissonStructure.linear(LieAlgebra.so3().c, 6)
    phi = CoordinateChange([T.variable(3, 6, i) + random_poly(rng, 3, 6, 2, 3) for i in range(3)])
    dump("so3_roundtrip.json", pushforward(lin, phi).to_json())
    x = [T.variable(2, 4, i) for i in range(2)]
    dump("abelian_obstructed.json", PoissonStructure.from_upper(2, 4, {(0, 1): x[0] * x[0]}).to_json())
    # {x0,x1} = x2^2 and {x1,x2} = x0 fail Jacobi
    y = [T.variable(3, 3, i) for i in range(3)]
    broken = {"n": 3, "order": 3, "brackets": {
        "0,1": (y[2] * y[2]).terms_json(), "1,2": y[0].terms_json(), "0,2": y[0].terms_json()}}
    dump("broken_jacobi.json", broken)
    dump("so3_algebra.json", LieAlgebra.so3().to_json())


def algebroid_file():
    rng = random.Random(11)
    order = 4
    A = LieAlgebroid.coadjoint_action(LieAlgebra.so3(), order)
    F = [[T.constant(3, order, int(i == j)) + random_poly(rng, 3, order, 1, 2, 0.2)
          for j in range(3)] for i in range(3)]
    phi = CoordinateChange([T.variable(3, order, i) + random_poly(rng, 3, order, 2, 2, 0.2)
                            for i in range(3)])
    dump("algebroid_so3.json", apply_changes(A, F, phi).to_json())


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def group_files():
    rng = np.random.default_rng(3)
    c4 = FiniteGroup.cyclic(4)
    dump("c4.json", c4.to_json())
    dump("c3.json", FiniteGroup.cyclic(3).to_json())
    q8 = FiniteGroup.quaternion()
    dump("q8.json", q8.to_json())
    so3 = MatrixGroupTarget("SO", 3)
    vals = [so3.exp(so3.random_algebra(rng, 0.05)) @ rot_z(k * np.pi / 2) for k in range(4)]
    dump("hom_c4_so3.json", AlmostHomomorphism(c4, so3, vals).to_json())
    vals = [so3.exp(so3.random_algebra(rng, 0.6)) @ rot_z(k * np.pi / 2) for k in range(4)]
    dump("hom_c4_large_defect.json", AlmostHomomorphism(c4, so3, vals).to_json())
    su2 = MatrixGroupTarget("SU", 2)
    vals = [su2.exp(su2.random_algebra(rng, 0.05)) @ b for b in quaternion_matrices()]
    dump("hom_q8_su2.json", AlmostHomomorphism(q8, su2, vals).to_json())
    # C4 acting on C^3 by (1, i^k, (-1)^k), perturbed well inside eps (2K)^-9
    base = np.array([np.diag([1, 1j ** k, (-1) ** k]) for k in range(4)], dtype=complex)
    T0 = base + 3e-6 * (rng.standard_normal(base.shape) + 1j * rng.standard_normal(base.shape)) / 2
    dump("rep_c4.json", {"dim": 3, "K": 1.01, "eps": 2 ** -6,
                         "values": [[[float(z.real), float(z.imag)] for z in t.ravel()] for t in T0]})


def submanifold(name, ambient, fn, samples=64):
    N = DiscretizedSubmanifold.from_function(ambient, fn, samples)
    (DATA / f"{name}.csv").write_text(N.to_csv())
    dump(f"{name}.json", {**ambient.to_json(), "topology": "closed-curve"})


def submanifold_files():
    reflection = AmbientSpace("R", 2, [np.eye(2), np.diag([1.0, -1.0])])
    delta = 2e-5
    submanifold("circle_offcenter", reflection,
                lambda th: np.array([np.cos(th), delta + np.sin(th)]))
    c4 = AmbientSpace("R", 2, cyclic_rotations(4))
    a = 1e-5
    submanifold("circle_wobble_c4", c4,
                lambda th: (1 + a * np.cos(3 * th)) * np.array([np.cos(th), np.sin(th)]))


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    poisson_files()
    algebroid_file()
    group_files()
    submanifold_files()
    for p in sorted(DATA.iterdir()):
        print(p.name)
