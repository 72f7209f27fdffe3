"""Leakage under g X1 (x) Z_b with a precessing bath spin, with and
without the parity-kick cycle. The kicked residual falls as T_c^2."""
from encdd.dynamics import loglog_slope
from encdd.recipes import leakage_sweep

rows = leakage_sweep(g=1.0, omega=1.0, total_time=1.0, cycles=[4, 8, 16, 32, 64, 128])
print(f"{'cycles':>6} {'T_c':>10} {'free':>12} {'kicked':>12} {'ratio':>10}")
for r in rows:
    print(f"{r['cycles']:6d} {r['T_c']:10.5f} {r['free_leakage']:12.4e} {r['leakage']:12.4e} "
          f"{r['free_leakage'] / r['leakage']:10.1f}")
slope = loglog_slope([r["T_c"] for r in rows], [r["leakage"] for r in rows])
print(f"log-log slope of kicked leakage vs T_c: {slope:.4f}")
