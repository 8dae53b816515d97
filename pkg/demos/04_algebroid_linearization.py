"""
Linearizing a Lie algebroid
===========================

The coadjoint action algebroid of so(3) is disguised by a random change of
frame and of base coordinates.  Two phases undo the disguise: frame changes
make the structure functions constant, then coordinate changes make the
anchor linear.
"""

import json
from pathlib import Path

from levi.normalform import LieAlgebroid, linearize_algebroid

DATA = Path(__file__).resolve().parent / "data"
B = LieAlgebroid.from_json(json.loads((DATA / "algebroid_so3.json").read_text()))
B.validate()
print("c_01^2(x) =", B.c[0][1][2])
print("anchor b_00(x) =", B.b[0][0])

###############################################################################
# Phase 1 works in H^2(g, S^k(R^3) (x) g), phase 2 in H^1(g, S^k(R^3) (x) R^3).

report = linearize_algebroid(B)
for rec in report.records:
    print(rec.to_json())

final = report.final
print("constant structure functions and linear anchor:", final.is_constant_and_linear())
print("c_01^2 =", final.c[0][1][2], "| b_00 =", final.b[0][0], "| b_01 =", final.b[0][1])
