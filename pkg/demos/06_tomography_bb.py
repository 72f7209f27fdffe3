"""Process tomography of a dephasing device and the empirical bang-bang
loop that designs kicks from the measured generator."""
import numpy as np

from encdd.tomography import (HermitianBasis, RotationFamily, dephasing_device, empirical_bb_loop,
                              extract_generator, first_order_chi, solve_empirical_bb)

basis = HermitianBasis(1)
device = dephasing_device(g=1.0)
ident = [np.eye(2)]
chi = first_order_chi(lambda t: device(ident, t), 0.01, basis)
print("measured first-order generator:", extract_generator(chi))

sol = solve_empirical_bb([0, 0, 1.0], [0, 0, 0], 2, RotationFamily.about("X1"))
print(f"closed-form kick angle {sol.params[0]:.6f}, residual {sol.residual:.1e}")

loop = empirical_bb_loop(device, RotationFamily.about("X1"), iterations=5, tau=0.01)
print(f"generator norm {loop.initial_norm:.3e} -> {loop.residual:.3e} "
      f"after {loop.iterations} iteration(s)")
for row in loop.rows:
    print("  ", row)
print("fast-cycle condition indicated:", loop.timescale_condition_indicated())
