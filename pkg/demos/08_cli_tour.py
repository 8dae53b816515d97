"""
The levi command line
=====================

Each run prints a JSON report and exits with a status code: 0 ok, 1 error
or failed check, 2 obstructed, 3 hypothesis violated, 64 usage error.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

DATA = Path(__file__).resolve().parent / "data"
OUT = Path(tempfile.mkdtemp())


def levi(*args):
    proc = subprocess.run([sys.executable, "-m", "levi", *map(str, args), "--no-timestamp"],
                          capture_output=True, text=True)
    report = json.loads(proc.stdout) if proc.stdout.strip() else {}
    status = report.get("status") or proc.stderr.strip()
    print(f"$ levi {' '.join(map(str, args))}\n  exit {proc.returncode}: {status}")
    return proc.returncode, report


###############################################################################
# Checking inputs.  A broken Jacobi identity is reported with a witness.

levi("check", DATA / "so3_perturbed.json")
_, rep = levi("check", DATA / "broken_jacobi.json")
print("  witness:", rep["steps"][0]["witness"])

###############################################################################
# Linearization writes the full report and a companion file with the
# coordinate change.

levi("linearize", DATA / "so3_perturbed.json", "--output", OUT / "lin.json")
print("  wrote:", sorted(p.name for p in OUT.iterdir()))
levi("linearize", DATA / "abelian_obstructed.json")
levi("linearize", DATA / "so3_perturbed.json", "--order", 99)

###############################################################################
# Averaging.

_, rep = levi("average", "hom", DATA / "c4.json", DATA / "hom_c4_so3.json", "--output", OUT / "hom.json")
print("  achieved", rep["steps"][-1]["achieved"], "bound", rep["steps"][-1]["bound"])
levi("average", "hom", DATA / "c4.json", DATA / "hom_c4_large_defect.json")
levi("average", "rep", DATA / "c4.json", DATA / "rep_c4.json", "--output", OUT / "rep.json")
levi("average", "submanifold", DATA / "circle_offcenter.csv", "--output", OUT / "circle.csv")
levi("average", "submanifold", DATA / "circle_wobble_c4.csv", "--output", OUT / "wobble.csv")
levi("average", "submanifold", DATA / "circle_wobble_c4.csv", "--output", OUT / "wobble.csv", "--force")
