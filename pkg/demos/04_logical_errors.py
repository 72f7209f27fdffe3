"""Logical errors inside the code: the Xbar(pi/2) kick removes Ybar and
Zbar but leaves Xbar; adding the Zbar and Ybar kicks removes Xbar too."""
from encdd.recipes import run_recipe

out = run_recipe("logical-suppression", {"cycles": [8, 16, 32, 64]})
print("residual logical rotation angle at the finest spacing:")
for r in out.rows:
    if r["cycles"] == out.summary["finest_cycles"]:
        print(f"  error {r['error']:5s} pulses {r['pulses']:6s} angle {r['angle']:.4e}")
print("suppression ratios:", {k: round(v, 3) for k, v in out.summary["ratios"].items()})
