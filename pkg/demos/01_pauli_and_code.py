"""Pauli algebra and the two-qubit decoherence-free code.

Builds the logical operators from text, checks their action on the
codewords, and splits a few two-qubit errors into the four error classes.
"""
import numpy as np

from encdd import DfsCode, classify_error, encode, parse_operator, to_dense

code = DfsCode(2)
xbar, zbar = code.x_bar(1), code.z_bar(1)
print("Xbar =", xbar)
print("Zbar =", zbar)
print("Ybar = i Xbar Zbar =", code.y_bar(1))

zero_l, one_l = encode([1, 0], code), encode([0, 1], code)
print("Xbar |0_L> == |1_L>:", np.allclose(to_dense(xbar) @ zero_l, one_l))

# collective dephasing never touches the code space
sz = to_dense(code.collective_sz())
psi = encode(np.array([1, 1j]) / np.sqrt(2), code)
print("|S_z psi| =", np.linalg.norm(sz @ psi))

print("\nerror classes (Frobenius weights):")
for text in ["X1", "Z1", "Z1 + Z2", "X1 X2", "Z1 Z2"]:
    d = classify_error(parse_operator(text, 2), code)
    w = ", ".join(f"{k} {v:.3f}" for k, v in d.weights.items())
    print(f"  {text:8s} -> {d.dominant():9s} [{w}]")
