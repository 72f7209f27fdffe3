"""Leakage elimination with one pulse pair, and symmetrization over the
full logical pulse group."""
import numpy as np

from encdd import (DfsCode, leakage_basis, leakage_elimination_cycle, parity_kick_holds,
                   symmetrize, verify_decoupled)
from encdd.decoupling import full_logical_group
from encdd.pauli import global_phase, to_dense

code = DfsCode(2)
cycle = leakage_elimination_cycle(code, 1, dt=0.1)
kick = cycle.pulses[0].unitary
zz = np.diag([1, -1, -1, 1]).astype(complex)
print("U_Xbar(pi) equals Z1 Z2 times phase", global_phase(zz, kick))
for e in leakage_basis(code, 1):
    print(f"  {e.label():6s} anticommutes: {parity_kick_holds(kick, e)}")
print("pulses per cycle:", len(cycle.pulses), " closed:", cycle.is_closed())

group = full_logical_group(code)
print(f"\nlogical pulse group has {len(group)} elements")
rng = np.random.default_rng(0)
a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
h = a + a.conj().T
hs = symmetrize(h, group)
v = code.isometry
print("code block of the symmetrized Hamiltonian:\n", np.round(v.conj().T @ hs @ v, 10))
print("decoupled:", verify_decoupled(hs, code))
print("Zbar itself is not decoupled:", verify_decoupled(to_dense(code.z_bar(1)), code))
