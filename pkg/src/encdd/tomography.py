"""Process tomography on simulated channels and tomography-driven pulse design.

The operator basis is ``K_a = P_a / sqrt(d)`` over Pauli strings ``P_a`` with
``K_0`` the identity, so ``tr(K_a^dag K_b) = delta_ab``. In this basis a
channel reads ``rho -> sum_ab chi_ab K_a rho K_b^dag``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import SpinBath, build_total_hamiltonian
from .pauli import LETTERS, OperatorSum, PauliString, exp_hermitian, is_unitary, to_dense


@dataclass(frozen=True)
class HermitianBasis:
    n_qubits: int = 1

    @cached_property
    def labels(self) -> list[str]:
        return ["".join(p) for p in itertools.product(LETTERS, repeat=self.n_qubits)]

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def normalization(self) -> str:
        return "K_a = P_a / sqrt(2^n), trace-orthonormal"

    def __len__(self) -> int:
        return 4 ** self.n_qubits

    @cached_property
    def matrices(self) -> np.ndarray:
        s = 1.0 / math.sqrt(self.dim)
        return np.array([PauliString(l).to_dense() * s for l in self.labels])

    def element(self, a: int) -> OperatorSum:
        return OperatorSum(self.n_qubits, {self.labels[a]: 1.0 / math.sqrt(self.dim)})

    def coefficients(self, op) -> np.ndarray:
        """Expansion coefficients ``tr(K_a op)`` of an operator."""
        m = to_dense(op)
        return np.einsum("aji,ji->a", self.matrices.conj(), m)


class Channel:
    """Linear map on system density operators, stored as a list of Kraus operators."""

    def __init__(self, kraus: Sequence[np.ndarray]):
        self.kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if not self.kraus:
            raise ValueError("channel needs at least one Kraus operator")
        self.dim = self.kraus[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def superoperator(self) -> np.ndarray:
        """Column-stacking superoperator: ``vec(E(rho)) = S vec(rho)``."""
        return sum(np.kron(k.conj(), k) for k in self.kraus)

    def trace_preservation_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.dim)))

    @classmethod
    def unitary(cls, u: np.ndarray) -> Channel:
        return cls([u])

    @classmethod
    def identity(cls, dim: int) -> Channel:
        return cls([np.eye(dim)])

    @classmethod
    def depolarizing(cls, p: float = 1.0) -> Channel:
        """Single-qubit ``rho -> (1-p) rho + p I/2``."""
        ks = [math.sqrt(1 - 3 * p / 4) * np.eye(2)]
        ks += [math.sqrt(p / 4) * PauliString(l).to_dense() for l in "XYZ"]
        return cls(ks)


def simulate_channel(h_total: np.ndarray, bath_state: np.ndarray, tau: float,
                     d_s: int | None = None) -> Channel:
    """Joint evolution for ``tau`` followed by the bath trace."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    u = exp_hermitian(np.asarray(h_total, dtype=complex), tau)
    return channel_from_joint_unitary(u, bath_state, d_s)


def channel_from_joint_unitary(u: np.ndarray, bath_state: np.ndarray,
                               d_s: int | None = None) -> Channel:
    rho_b = np.asarray(bath_state, dtype=complex)
    if rho_b.ndim == 1:
        rho_b = np.outer(rho_b, rho_b.conj())
    d_b = rho_b.shape[0]
    if d_s is None:
        d_s = u.shape[0] // d_b
    if d_s * d_b != u.shape[0]:
        raise ValueError("bath state dimension does not divide the joint dimension")
    w, v = np.linalg.eigh(rho_b)
    u4 = u.reshape(d_s, d_b, d_s, d_b)
    kraus = []
    for p, vec in zip(w, v.T):
        if p <= 1e-15:
            continue
        for a in range(d_b):
            kraus.append(math.sqrt(p) * np.einsum("ijb,b->ij", u4[:, a, :, :], vec))
    return Channel(kraus)


@dataclass
class ChiMatrix:
    basis: HermitianBasis
    entries: np.ndarray = field(repr=False)
    residual: float = 0.0
    # estimated size of the neglected tau^2 terms, set by first_order_chi
    second_order: float = 0.0

    def apply(self, rho: np.ndarray) -> np.ndarray:
        K = self.basis.matrices
        return np.einsum("ab,aij,jk,blk->il", self.entries, K, rho, K.conj())

    def hermiticity_error(self) -> float:
        return float(np.linalg.norm(self.entries - self.entries.conj().T))

    def trace_preservation_error(self) -> float:
        K = self.basis.matrices
        s = np.einsum("ab,bji,ajk->ik", self.entries, K.conj(), K)
        return float(np.linalg.norm(s - np.eye(self.basis.dim)))

    def to_channel(self) -> Channel:
        """Kraus form via the eigendecomposition of chi."""
        w, v = np.linalg.eigh(0.5 * (self.entries + self.entries.conj().T))
        K = self.basis.matrices
        kraus = [math.sqrt(x) * np.einsum("a,aij->ij", v[:, n], K)
                 for n, x in enumerate(w) if x > 1e-14]
        if not kraus:
            kraus = [np.zeros((self.basis.dim, self.basis.dim))]
        return Channel(kraus)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "n_qubits": self.basis.n_qubits,
            "basis": self.basis.labels,
            "normalization": self.basis.normalization,
            "entries": [[[z.real, z.imag] for z in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> ChiMatrix:
        basis = HermitianBasis(int(data["n_qubits"]))
        if data.get("basis", basis.labels) != basis.labels:
            raise ValueError("basis labels do not match the standard Pauli ordering")
        e = np.array([[complex(re, im) for re, im in row] for row in data["entries"]])
        return cls(basis, e)


def probe_states(n_qubits: int) -> list[np.ndarray]:
    """Tensor products of ``|0>, |1>, |+>, |+i>``: an informationally complete set."""
    single = [np.array([1, 0]), np.array([0, 1]),
              np.array([1, 1]) / math.sqrt(2), np.array([1, 1j]) / math.sqrt(2)]
    rhos = [np.outer(s, s.conj()) for s in single]
    return [reduce(np.kron, combo) for combo in itertools.product(rhos, repeat=n_qubits)]


def qpt(channel: Callable[[np.ndarray], np.ndarray], basis: HermitianBasis) -> ChiMatrix:
    """Linear-inversion process tomography from the standard probe set."""
    d = basis.dim
    probes = probe_states(basis.n_qubits)
    ins = np.array([p.reshape(-1, order="F") for p in probes]).T
    outs = np.array([np.asarray(channel(p)).reshape(-1, order="F") for p in probes]).T
    if np.linalg.matrix_rank(ins, tol=1e-10) < d * d:
        raise ValueError("probe set is not informationally complete")
    S = outs @ np.linalg.inv(ins)
    K = basis.matrices
    # S = sum_ab chi_ab conj(K_b) (x) K_a; the terms are trace-orthonormal.
    chi = np.einsum("bij,akl,ikjl->ab", K, K.conj(), S.reshape(d, d, d, d))
    out = ChiMatrix(basis, chi)
    recon = np.array([out.apply(p).reshape(-1, order="F") for p in probes]).T
    out.residual = float(np.linalg.norm(recon - outs))
    return out


def chi_from_superoperator_bruteforce(S: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    """Reference chi by least squares over all ``d^4`` unknowns."""
    K = basis.matrices
    cols = [np.kron(K[b].conj(), K[a]).reshape(-1) for a in range(len(basis))
            for b in range(len(basis))]
    sol = np.linalg.lstsq(np.array(cols).T, S.reshape(-1), rcond=None)[0]
    return sol.reshape(len(basis), len(basis))


def first_order_coefficients(chi: ChiMatrix) -> np.ndarray:
    """``Im chi_{a0}`` for ``a >= 1``."""
    return chi.entries[1:, 0].imag.copy()


def extract_generator(chi_at_tau: ChiMatrix, tau: float | None = None) -> OperatorSum:
    """First-order generator ``S(tau) = sum_{a>=1} Im(chi_a0) K_a / sqrt(d)``.

    The extra ``1/sqrt(d)`` undoes the basis normalization so that
    ``rho(tau) ~ rho(0) + i [S, rho(0)]``; for a channel generated by a
    Hamiltonian ``H`` this gives ``S = -tau H``. ``tau`` is accepted for
    symmetry with :func:`effective_hamiltonian`.
    """
    b = chi_at_tau.basis
    coeffs = first_order_coefficients(chi_at_tau) / b.dim
    return OperatorSum(b.n_qubits, {l: c for l, c in zip(b.labels[1:], coeffs)})


def effective_hamiltonian(chi_at_tau: ChiMatrix, tau: float) -> OperatorSum:
    """``-S(tau)/tau``: the Hamiltonian that would produce the first-order action."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return extract_generator(chi_at_tau) * (-1.0 / tau)


def first_order_chi(channel_at: Callable[[float], Callable], tau: float,
                    basis: HermitianBasis) -> ChiMatrix:
    """``tau * dchi/dt|_0`` by forward differences at ``tau`` and ``tau/2``
    with one Richardson step; adds back the zeroth-order identity term."""
    chi0 = np.zeros((len(basis), len(basis)), dtype=complex)
    chi0[0, 0] = basis.dim
    d_full = (qpt(channel_at(tau), basis).entries - chi0) / tau
    d_half = (qpt(channel_at(tau / 2), basis).entries - chi0) / (tau / 2)
    deriv = 2 * d_half - d_full
    return ChiMatrix(basis, chi0 + tau * deriv,
                     second_order=float(tau * np.linalg.norm(d_full - d_half)))


# -- adjoint representation ------------------------------------------------

@dataclass(frozen=True)
class AdjointMatrix:
    R: np.ndarray = field(repr=False)
    label: str = ""

    def orthogonality_error(self) -> float:
        return float(np.linalg.norm(self.R.T @ self.R - np.eye(self.R.shape[0])))


def adjoint_rep(u: np.ndarray, basis: HermitianBasis, label: str = "") -> AdjointMatrix:
    """``R_ab`` with ``U^dag K_a U = sum_b R_ab K_b`` over ``a, b >= 1``."""
    U = np.asarray(u, dtype=complex)
    if not is_unitary(U):
        raise ValueError("adjoint_rep needs a unitary")
    K = basis.matrices
    conj = np.einsum("ji,ajk,kl->ail", U.conj(), K, U)
    R = np.einsum("bji,aji->ab", K.conj(), conj).real
    return AdjointMatrix(R[1:, 1:], label)


def transform_chi(chi_bar, rotations: Sequence) -> np.ndarray:
    """``chi~_b = (1/N) sum_k sum_a chi_a R^(k)_ab``."""
    if not rotations:
        raise ValueError("need at least one rotation")
    v = np.asarray(chi_bar, dtype=float)
    mats = [r.R if isinstance(r, AdjointMatrix) else np.asarray(r) for r in rotations]
    for m in mats:
        if m.shape != (v.size, v.size):
            raise ValueError(f"rotation shape {m.shape} does not match vector length {v.size}")
    return sum(v @ m for m in mats) / len(mats)


# -- empirical bang-bang ---------------------------------------------------------

@dataclass(frozen=True)
class RotationFamily:
    """Controls ``exp(-i theta G / 2)`` about a fixed Pauli-sum axis ``G``."""

    axis: OperatorSum
    bounds: tuple = (-math.pi, math.pi)

    @classmethod
    def about(cls, text: str, n_qubits: int = 1) -> RotationFamily:
        return cls(OperatorSum.parse(text, n_qubits))

    @property
    def n_qubits(self) -> int:
        return self.axis.n_qubits

    def __call__(self, theta: float) -> np.ndarray:
        return exp_hermitian(self.axis, theta / 2)

    def axis_vector(self, basis: HermitianBasis) -> np.ndarray:
        return basis.coefficients(self.axis)[1:].real


@dataclass
class BBSolution:
    unitaries: list
    params: list
    residual: float
    achieved: np.ndarray
    closed_form: bool = False
    tolerance: float = 1e-8

    @property
    def feasible(self) -> bool:
        return self.residual <= self.tolerance


def _pick(grid: np.ndarray, values: np.ndarray, rtol: float = 1e-9) -> float:
    best = values.min()
    near = grid[values <= best + rtol * max(1.0, best) + 1e-14]
    return float(near[np.argmin(np.abs(near))])


def solve_empirical_bb(chi_bar, chi_tilde_target, n_pulses: int, controls: RotationFamily,
                       basis: HermitianBasis | None = None, grid: int = 73,
                       sweeps: int = 20, tol: float = 1e-8) -> BBSolution:
    """Choose ``n_pulses`` frames ``{I, U(theta_2), ..., U(theta_N)}`` so that
    averaging the error vector over their adjoint actions hits the target.

    Coordinate descent over the angles: each coordinate is scanned on a grid
    then refined by bounded Brent search; ties resolve toward the smallest
    rotation. The single-qubit N=2, zero-target case is solved in closed form.
    """
    if n_pulses < 1:
        raise ValueError("n_pulses must be at least 1")
    chi_bar = np.asarray(chi_bar, dtype=float)
    target = np.asarray(chi_tilde_target, dtype=float)
    basis = basis or HermitianBasis(controls.n_qubits)
    ident = np.eye(basis.dim, dtype=complex)

    def achieved(params):
        rots = [np.eye(chi_bar.size)] + [adjoint_rep(controls(t), basis).R for t in params]
        return transform_chi(chi_bar, rots)

    def cost(params):
        return float(np.linalg.norm(achieved(params) - target))

    n_free = n_pulses - 1
    if n_free == 0:
        return BBSolution([ident], [], cost([]), achieved([]), tolerance=tol)

    norm = np.linalg.norm(chi_bar)
    if norm <= 1e-15 and np.linalg.norm(target) <= 1e-15:
        params = [0.0] * n_free
        return BBSolution([ident] + [controls(0.0)] * n_free, params, cost(params),
                          achieved(params), closed_form=True, tolerance=tol)
    if (basis.n_qubits == 1 and n_free == 1 and np.linalg.norm(target) <= 1e-15):
        ax = controls.axis_vector(basis)
        if abs(ax @ chi_bar) <= 1e-12 * norm * np.linalg.norm(ax):
            params = [math.pi]
            return BBSolution([ident, controls(math.pi)], params, cost(params),
                              achieved(params), closed_form=True, tolerance=tol)

    lo, hi = controls.bounds
    thetas = np.linspace(lo, hi, grid)
    params = [0.0] * n_free
    current = cost(params)
    for _ in range(sweeps):
        before = current
        for j in range(n_free):
            def f(t, j=j):
                trial = list(params)
                trial[j] = t
                return cost(trial)
            vals = np.array([f(t) for t in thetas])
            t0 = _pick(thetas, vals)
            step = (hi - lo) / (grid - 1)
            res = minimize_scalar(f, bounds=(max(lo, t0 - step), min(hi, t0 + step)),
                                  method="bounded", options={"xatol": 1e-12})
            cand = float(res.x) if res.fun < f(t0) else t0
            if f(cand) <= current:
                params[j] = cand
                current = f(cand)
        if before - current <= 1e-14:
            break
    return BBSolution([ident] + [controls(t) for t in params], params, current,
                      achieved(params), tolerance=tol)


@dataclass
class LoopResult:
    best_frames: list
    residual_history: list
    initial_norm: float
    iterations: int
    rows: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else self.initial_norm

    @property
    def improvement(self) -> float:
        if self.initial_norm == 0:
            return math.inf
        return self.initial_norm / max(self.residual, 1e-300)

    def timescale_condition_indicated(self, factor: float = 10.0) -> bool:
        """Residual shrank by ``factor`` under decoupling, i.e. the cycle is
        fast compared with the bath correlation time."""
        return self.initial_norm == 0 or self.improvement >= factor


def empirical_bb_loop(device: Callable[[Sequence[np.ndarray], float], Channel],
                      controls: RotationFamily, iterations: int = 5, tau: float = 0.01,
                      n_pulses: int = 2, tol: float = 1e-12) -> LoopResult:
    """Measure, solve, apply; keep the best schedule seen so far.

    ``device(frames, tau)`` returns the channel of one cycle of total length
    ``tau`` in which each frame ``U_k`` gets ``tau/N`` of free evolution
    (``U_k^dag exp(-i H tau/N) U_k``). Each iteration treats the current
    cycle as the device, solves for kicks against its measured generator
    and nests them around it, so frames ``F`` and kicks ``G`` combine to
    ``{f g}``. The loop stops once a candidate fails to improve.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    basis = HermitianBasis(controls.n_qubits)

    second_order = []

    def measure(frames):
        chi1 = first_order_chi(lambda t: device(frames, t), tau, basis)
        second_order.append(chi1.second_order)
        return first_order_coefficients(chi1) / basis.dim

    frames = [np.eye(basis.dim, dtype=complex)]
    chi_bar = measure(frames)
    initial = best_r = float(np.linalg.norm(chi_bar))
    history, rows = [], []
    it = 0
    for it in range(1, iterations + 1):
        if best_r <= tol:
            history.append(best_r)
            rows.append({"iteration": it, "residual": best_r, "params": [],
                         "second_order": second_order[-1]})
            break
        sol = solve_empirical_bb(chi_bar, np.zeros_like(chi_bar), n_pulses, controls, basis)
        cand = [f @ g for g in sol.unitaries for f in frames]
        got = measure(cand)
        r = float(np.linalg.norm(got))
        improved = r < best_r
        if improved:
            frames, chi_bar, best_r = cand, got, r
        history.append(best_r)
        rows.append({"iteration": it, "residual": best_r, "params": [float(p) for p in sol.params],
                     "second_order": second_order[-1]})
        if not improved:
            break
    return LoopResult(frames, history, initial, it, rows)


def dephasing_device(g: float = 1.0, omega: float = 0.0, bath_state=None):
    """One qubit coupled as ``g Z (x) Z_b`` to a bath spin precessing at ``omega``.

    With the bath in ``|0>`` (the default) the first-order generator is ``g Z``.
    """
    bath = SpinBath(1, [(OperatorSum.parse("Z1", 1) * g, OperatorSum.parse("Z1", 1))],
                    h_bath=OperatorSum.parse("X1", 1) * omega if omega else None,
                    initial=np.array([1, 0]) if bath_state is None else bath_state)
    H = build_total_hamiltonian(OperatorSum.zero(1), bath)
    rho_b = bath.state()

    def device(unitaries, tau):
        N = len(unitaries)
        step = exp_hermitian(H, tau / N)
        total = np.eye(H.shape[0], dtype=complex)
        for u in unitaries:
            U = np.kron(u, np.eye(2))
            total = U.conj().T @ step @ U @ total
        return channel_from_joint_unitary(total, rho_b, 2)

    return device
