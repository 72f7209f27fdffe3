"""Stabilizer generators of the bit-flip code reused as parity kicks
against single-qubit dephasing."""
import numpy as np

from encdd import PauliString, parity_kick_holds, stabilizer_kick_set, symmetrize

gens = [PauliString.parse("X1 X2", 3), PauliString.parse("X2 X3", 3)]
errs = [PauliString.parse(f"Z{k}", 3) for k in (1, 2, 3)]
rep = stabilizer_kick_set(gens, errs, dt=0.1)
print("group:", rep.group.labels)
for e in errs:
    print(f"  {e.label()} covered by {rep.coverage[e.label()]}, "
          f"symmetrized norm {np.linalg.norm(symmetrize(e, rep.group))}")
zbar = PauliString("XXX")
print("Zbar = X1X2X3 kicks every Z_k:", all(parity_kick_holds(zbar.to_dense(), e) for e in errs))

bad = stabilizer_kick_set([PauliString.parse("X1 X2", 3)], [PauliString.parse("Z3", 3)])
print("X1X2 alone leaves uncovered:", [e.label() for e in bad.uncovered])
