"""Block-of-two decoherence-free subspace code.

Logical qubit ``i`` (1-based) lives on the physical pair ``(2i-1, 2i)`` with
codewords ``|0_L> = |01>`` and ``|1_L> = |10>``. The code is annihilated by
collective dephasing ``S_z = sum_k Z_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .pauli import OperatorLike, OperatorSum, PauliString, to_dense

_ZERO_L = np.array([0, 1, 0, 0], dtype=complex)
_ONE_L = np.array([0, 0, 1, 0], dtype=complex)


@dataclass(frozen=True)
class DfsCode:
    n_physical: int = 2

    def __post_init__(self):
        if self.n_physical < 2 or self.n_physical % 2:
            raise ValueError(f"n_physical must be a positive even integer, got {self.n_physical}")

    @classmethod
    def with_logical(cls, n_logical: int) -> DfsCode:
        return cls(2 * n_logical)

    @property
    def n_logical(self) -> int:
        return self.n_physical // 2

    @property
    def dim(self) -> int:
        return 2 ** self.n_physical

    def block(self, i: int) -> tuple[int, int]:
        """Physical qubit pair (1-based) of logical qubit ``i``."""
        self._check_index(i)
        return 2 * i - 1, 2 * i

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.n_logical:
            raise IndexError(f"logical index {i} outside 1..{self.n_logical}")

    @cached_property
    def isometry(self) -> np.ndarray:
        """``2^N x 2^k`` matrix whose columns are the encoded logical basis states."""
        block = np.stack([_ZERO_L, _ONE_L], axis=1)
        return reduce(np.kron, [block] * self.n_logical)

    @cached_property
    def projector(self) -> np.ndarray:
        v = self.isometry
        return v @ v.conj().T

    def to_dict(self) -> dict:
        return {
            "n_physical": self.n_physical,
            "blocks": [list(self.block(i)) for i in range(1, self.n_logical + 1)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> DfsCode:
        code = cls(int(data["n_physical"]))
        blocks = data.get("blocks")
        if blocks is not None and [tuple(b) for b in blocks] != [
                code.block(i) for i in range(1, code.n_logical + 1)]:
            raise ValueError("blocks must be the adjacent pairs (2i-1, 2i)")
        return code

    # logical operators ---------------------------------------------------

    def _pair_op(self, i: int, text_terms: list[tuple[str, str, float]]) -> OperatorSum:
        a, b = self.block(i)
        out = OperatorSum.zero(self.n_physical)
        for la, lb, c in text_terms:
            sites = {}
            if la != "I":
                sites[a] = la
            if lb != "I":
                sites[b] = lb
            out = out + OperatorSum.from_pauli(PauliString.from_sites(self.n_physical, sites), c)
        return out

    def x_bar(self, i: int) -> OperatorSum:
        """``(X_{2i-1} X_{2i} + Y_{2i-1} Y_{2i}) / 2``."""
        return self._pair_op(i, [("X", "X", 0.5), ("Y", "Y", 0.5)])

    def z_bar(self, i: int) -> OperatorSum:
        """``(Z_{2i-1} - Z_{2i}) / 2``."""
        return self._pair_op(i, [("Z", "I", 0.5), ("I", "Z", -0.5)])

    def y_bar(self, i: int) -> OperatorSum:
        # i*Xbar*Zbar is already supported on the code space only
        return self.x_bar(i) * self.z_bar(i) * 1j

    def zz_bar(self, i: int) -> OperatorSum:
        """Inter-block coupling ``Z_{2i} Z_{2i+1}``.

        On the code ``Zbar_i = -Z_{2i}`` and ``Zbar_{i+1} = Z_{2i+1}``, so this
        coupling equals ``-Zbar_i Zbar_{i+1}`` there.
        """
        self._check_index(i)
        self._check_index(i + 1)
        return OperatorSum.from_pauli(
            PauliString.from_sites(self.n_physical, {2 * i: "Z", 2 * i + 1: "Z"}))

    def outside_ops(self, i: int) -> list[OperatorSum]:
        """Three operators acting only on span{|00>, |11>} of block ``i``.

        ``(XX - YY)/2`` and ``(XY + YX)/2`` swap the two non-code states;
        ``ZZ`` completes the set orthogonally to ``{I, Z+Z}``.
        """
        return [
            self._pair_op(i, [("X", "X", 0.5), ("Y", "Y", -0.5)]),
            self._pair_op(i, [("X", "Y", 0.5), ("Y", "X", 0.5)]),
            self._pair_op(i, [("Z", "Z", 1.0)]),
        ]

    def invariant_ops(self, i: int) -> list[OperatorSum]:
        """Identity and the block's collective dephasing ``Z_{2i-1} + Z_{2i}``."""
        return [OperatorSum.identity(self.n_physical),
                self._pair_op(i, [("Z", "I", 1.0), ("I", "Z", 1.0)])]

    def logical_ops(self, i: int) -> list[OperatorSum]:
        return [self.x_bar(i), self.y_bar(i), self.z_bar(i)]

    def collective_sz(self) -> OperatorSum:
        n = self.n_physical
        return OperatorSum.from_terms(n, [(PauliString.from_sites(n, {k: "Z"}), 1.0)
                                          for k in range(1, n + 1)])


def encode(logical_state, code: DfsCode) -> np.ndarray:
    """Map a normalized ``2^k`` logical vector into the physical code space."""
    psi = np.asarray(logical_state, dtype=complex).reshape(-1)
    if psi.shape[0] != 2 ** code.n_logical:
        raise ValueError(f"logical state must have dimension {2 ** code.n_logical}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("logical state is not normalized")
    return code.isometry @ psi


def dfs_projector(code: DfsCode) -> np.ndarray:
    return code.projector.copy()


def collective_dephasing_check(state, code: DfsCode) -> float:
    """``||S_z psi||``; zero for every code-space state."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    # S_z is diagonal: eigenvalue = (#zeros - #ones) of each basis index
    n = code.n_physical
    idx = np.arange(2 ** n)
    ones = np.array([bin(k).count("1") for k in idx])
    return float(np.linalg.norm((n - 2 * ones) * psi))


def leakage_basis(code: DfsCode, i: int) -> list[PauliString]:
    """The eight leakage Paulis of block ``i`` in the order
    ``X1, X2, Y1, Y2, X1 Z2, Z1 X2, Y1 Z2, Z1 Y2`` (relative to the block)."""
    a, b = code.block(i)
    n = code.n_physical
    pairs = [({a: "X"}), ({b: "X"}), ({a: "Y"}), ({b: "Y"}),
             ({a: "X", b: "Z"}), ({a: "Z", b: "X"}), ({a: "Y", b: "Z"}), ({a: "Z", b: "Y"})]
    return [PauliString.from_sites(n, s) for s in pairs]


@dataclass(frozen=True)
class ErrorDecomposition:
    """Frobenius-norm split of an operator relative to the code space.

    ``invariant``: component along ``span{I, S_z}`` (leaves the code alone).
    ``outside``: remaining action confined to the complement plus the
    code-space scalar not captured by ``I`` (no effect on encoded data).
    ``logical``: traceless part of ``P E P``.
    ``leakage``: ``P E Q + Q E P``.
    """

    invariant_weight: float
    outside_weight: float
    logical_weight: float
    leakage_weight: float
    logical_part: np.ndarray
    total_weight: float

    @property
    def weights(self) -> dict[str, float]:
        return {
            "invariant": self.invariant_weight,
            "outside": self.outside_weight,
            "logical": self.logical_weight,
            "leakage": self.leakage_weight,
        }

    def dominant(self) -> str:
        w = self.weights
        return max(w, key=w.get)

    def is_pure(self, kind: str, tol: float = 1e-10) -> bool:
        scale = max(self.total_weight, 1.0)
        return all(v <= tol * scale for k, v in self.weights.items() if k != kind)


def classify_error(e: OperatorLike, code: DfsCode) -> ErrorDecomposition:
    """Split ``e`` into the four DFS error classes.

    ``logical_part`` is the traceless code block expressed on the logical
    space, i.e. ``V^dag E V`` minus its trace part.
    """
    E = to_dense(e)
    if E.shape != (code.dim, code.dim):
        raise ValueError(f"operator shape {E.shape} does not match code dimension {code.dim}")
    P = code.projector
    Q = np.eye(code.dim) - P
    PEP, QEQ = P @ E @ P, Q @ E @ Q
    leak = P @ E @ Q + Q @ E @ P
    rank = 2 ** code.n_logical
    scalar_P = np.trace(PEP) / rank * P
    logical = PEP - scalar_P

    sz = to_dense(code.collective_sz())
    # I and S_z are orthogonal (S_z traceless) so project onto each separately
    ident = np.eye(code.dim)
    invariant = (np.trace(E) / code.dim) * ident
    nsz = np.vdot(sz, sz).real
    invariant = invariant + (np.vdot(sz, E) / nsz) * sz
    outside = scalar_P + QEQ - invariant

    V = code.isometry
    fro = np.linalg.norm
    return ErrorDecomposition(
        invariant_weight=float(fro(invariant)),
        outside_weight=float(fro(outside)),
        logical_weight=float(fro(logical)),
        leakage_weight=float(fro(leak)),
        logical_part=V.conj().T @ logical @ V,
        total_weight=float(fro(E)),
    )


def adapted_basis(code: DfsCode, i: int = 1) -> dict[str, list[OperatorSum]]:
    """The sixteen class-adapted operators of a single block."""
    return {
        "invariant": code.invariant_ops(i),
        "outside": code.outside_ops(i),
        "logical": code.logical_ops(i),
        "leakage": [OperatorSum.from_pauli(p) for p in leakage_basis(code, i)],
    }
