"""Desk-scale open-system simulation of encoded qubits coupled to a few bath spins.

Units are dimensionless (hbar = 1). The system occupies the leading tensor
factor and the bath the trailing one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decoupling import Free, Pulse, PulseSchedule
from .dfs import DfsCode
from .pauli import OperatorLike, OperatorSum, exp_hermitian, to_dense

MAX_DIM = 2 ** 12


@dataclass(frozen=True)
class SpinBath:
    """``m`` bath spins with Hamiltonian ``h_bath`` and couplings ``sum S_a (x) B_a``.

    ``initial`` is ``"mixed"`` (maximally mixed, the default) or a bath state
    vector / density matrix.
    """

    n_spins: int
    couplings: tuple = ()
    h_bath: OperatorSum | None = None
    initial: object = "mixed"

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if self.n_spins < 1:
            raise ValueError("a spin bath needs at least one spin")

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    def state(self) -> np.ndarray:
        if isinstance(self.initial, str):
            if self.initial != "mixed":
                raise ValueError(f"unknown bath state {self.initial!r}")
            return np.eye(self.dim, dtype=complex) / self.dim
        s = np.asarray(self.initial, dtype=complex)
        if s.ndim == 1:
            s = np.outer(s, s.conj())
        if s.shape != (self.dim, self.dim):
            raise ValueError("bath state has the wrong dimension")
        return s


def analytic_coherence(t, tau_c: float):
    """Ohmic zero-temperature spin-boson coherence ``1 / (1 + (t/tau_c)^2)``."""
    if tau_c <= 0:
        raise ValueError("tau_c must be positive")
    x = np.asarray(t, dtype=float) / tau_c
    out = 1.0 / (1.0 + x * x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AnalyticDephasing:
    """Closed-form collective dephasing.

    Coherences between ``S_z`` sectors differing by ``dm`` are multiplied by
    ``analytic_coherence(t, tau_c) ** ((dm/2)^2)``; for one qubit
    (``dm = 2``) this is exactly the single-qubit law. Code states share a
    sector and are untouched.
    """

    tau_c: float

    def __post_init__(self):
        if self.tau_c <= 0:
            raise ValueError("tau_c must be positive")

    def coherence(self, t):
        return analytic_coherence(t, self.tau_c)

    def dephase(self, rho: np.ndarray, t: float) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        n = int(round(math.log2(rho.shape[0])))
        m = np.array([n - 2 * bin(k).count("1") for k in range(2 ** n)])
        dm = m[:, None] - m[None, :]
        c = self.coherence(t)
        return rho * c ** ((dm / 2.0) ** 2)


def build_total_hamiltonian(system: OperatorLike, bath: SpinBath) -> np.ndarray:
    """``H_S (x) I + I (x) H_B + sum_a S_a (x) B_a``."""
    hs = to_dense(system)
    d_s, d_b = hs.shape[0], bath.dim
    if d_s * d_b > MAX_DIM:
        raise ValueError(f"total dimension {d_s * d_b} exceeds cap {MAX_DIM}")
    h = np.kron(hs, np.eye(d_b))
    if bath.h_bath is not None:
        h = h + np.kron(np.eye(d_s), to_dense(bath.h_bath))
    for s_op, b_op in bath.couplings:
        s_d, b_d = to_dense(s_op), to_dense(b_op)
        if s_d.shape[0] != d_s or b_d.shape[0] != d_b:
            raise ValueError("coupling operator dimensions do not match system/bath")
        h = h + np.kron(s_d, b_d)
    return 0.5 * (h + h.conj().T)


def evolve(state: np.ndarray, h: OperatorLike, t: float) -> np.ndarray:
    """``exp(-iHt) rho exp(+iHt)``."""
    rho = np.asarray(state, dtype=complex)
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("density operator must have unit trace")
    u = exp_hermitian(h, t)
    return u @ rho @ u.conj().T


def partial_trace_bath(rho: np.ndarray, d_s: int) -> np.ndarray:
    d_b = rho.shape[0] // d_s
    return np.einsum("iaja->ij", rho.reshape(d_s, d_b, d_s, d_b))


def leakage_population(state: np.ndarray, code: DfsCode) -> float:
    """``1 - tr(P rho_S)`` with the bath traced out."""
    rho = np.asarray(state, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    rho_s = partial_trace_bath(rho, code.dim)
    return float(1.0 - np.trace(code.projector @ rho_s).real)


def logical_coherence(rho_s: np.ndarray, code: DfsCode) -> float:
    """``2 |<0..0_L| rho |1..1_L>|``: the qubit coherence for one logical qubit."""
    v = code.isometry
    rl = v.conj().T @ rho_s @ v
    return float(2 * abs(rl[0, -1]))


def _fidelity(ideal: np.ndarray, rho: np.ndarray) -> float:
    if ideal.ndim == 1:
        return float(np.vdot(ideal, rho @ ideal).real)
    w, v = np.linalg.eigh(ideal)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    ev = np.linalg.eigvalsh(sq @ rho @ sq)
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


class _Propagators:
    """Caches segment propagators on a fixed Hilbert space."""

    def __init__(self, h: np.ndarray, d_s: int):
        self.h = h
        self.d_s = d_s
        self.d_b = h.shape[0] // d_s
        self._free: dict[float, np.ndarray] = {}
        self._pulse: dict[int, np.ndarray] = {}

    def segment(self, seg) -> np.ndarray:
        if isinstance(seg, Free):
            u = self._free.get(seg.duration)
            if u is None:
                u = exp_hermitian(self.h, seg.duration)
                self._free[seg.duration] = u
            return u
        key = id(seg)
        u = self._pulse.get(key)
        if u is None:
            u = self._pulse_unitary(seg)
            self._pulse[key] = u
        return u

    def _pulse_unitary(self, p: Pulse) -> np.ndarray:
        if p.unitary.shape[0] != self.d_s:
            raise ValueError(f"pulse {p.name} has dimension {p.unitary.shape[0]}, system is {self.d_s}")
        if p.width <= 0:
            return np.kron(p.unitary, np.eye(self.d_b))
        if p.generator is None:
            raise ValueError(f"finite-width pulse {p.name} needs a generator")
        drive = np.kron(to_dense(p.generator), np.eye(self.d_b)) * (p.angle / p.width)
        return exp_hermitian(self.h + drive, p.width)


def schedule_unitary(h_total: np.ndarray, schedule: PulseSchedule, d_s: int) -> np.ndarray:
    """Joint propagator of the whole schedule."""
    props = _Propagators(np.asarray(h_total, dtype=complex), d_s)
    cyc = np.eye(h_total.shape[0], dtype=complex)
    for seg in schedule.segments:
        cyc = props.segment(seg) @ cyc
    return np.linalg.matrix_power(cyc, schedule.cycle_count)


@dataclass
class SimulationResult:
    times: np.ndarray
    fidelity: np.ndarray
    leakage: np.ndarray
    coherence: np.ndarray
    trace_error: np.ndarray
    final_state: np.ndarray = field(repr=False)
    metadata: dict = field(default_factory=dict)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])

    @property
    def final_leakage(self) -> float:
        return float(self.leakage[-1])

    def rows(self) -> list[dict]:
        return [{"t": float(t), "fidelity": float(f), "leakage": float(l), "coherence": float(c)}
                for t, f, l, c in zip(self.times, self.fidelity, self.leakage, self.coherence)]


def run_schedule(initial, h_total: np.ndarray, schedule: PulseSchedule, code: DfsCode,
                 bath_state: np.ndarray | None = None, h_ideal: np.ndarray | None = None
                 ) -> SimulationResult:
    """Evolve ``initial (x) bath_state`` through the schedule, sampling at every
    segment boundary.

    Fidelity is measured against the same schedule run with the system-only
    Hamiltonian ``h_ideal``; by default that is the bath-averaged
    ``tr_B(H)/d_B``.
    """
    h_total = np.asarray(h_total, dtype=complex)
    d_s = code.dim
    if h_total.shape[0] % d_s:
        raise ValueError("Hamiltonian dimension is not a multiple of the code dimension")
    d_b = h_total.shape[0] // d_s
    if bath_state is None:
        bath_state = np.eye(d_b, dtype=complex) / d_b
    bath_state = np.asarray(bath_state, dtype=complex)
    if bath_state.ndim == 1:
        bath_state = np.outer(bath_state, bath_state.conj())
    if h_ideal is None:
        h_ideal = partial_trace_bath(h_total, d_s) / d_b

    psi0 = np.asarray(initial, dtype=complex)
    rho_s0 = np.outer(psi0, psi0.conj()) if psi0.ndim == 1 else psi0
    if rho_s0.shape != (d_s, d_s):
        raise ValueError("initial state does not match the code dimension")
    rho = np.kron(rho_s0, bath_state)
    ideal = psi0.copy()

    props = _Propagators(h_total, d_s)
    ideal_props = _Propagators(np.asarray(h_ideal, dtype=complex), d_s)

    times, fid, leak, coh, terr = [0.0], [], [], [], []

    def record(rho, ideal):
        rs = partial_trace_bath(rho, d_s)
        fid.append(_fidelity(ideal, rs))
        leak.append(float(1.0 - np.trace(code.projector @ rs).real))
        coh.append(logical_coherence(rs, code))
        terr.append(abs(np.trace(rho) - 1.0))

    record(rho, ideal)
    t = 0.0
    for _ in range(schedule.cycle_count):
        for seg in schedule.segments:
            u = props.segment(seg)
            rho = u @ rho @ u.conj().T
            ui = ideal_props.segment(seg)
            ideal = ui @ ideal if ideal.ndim == 1 else ui @ ideal @ ui.conj().T
            t += seg.duration
            if seg.duration > 0 or isinstance(seg, Pulse):
                times.append(t)
                record(rho, ideal)
    return SimulationResult(
        times=np.array(times), fidelity=np.array(fid), leakage=np.array(leak),
        coherence=np.array(coh), trace_error=np.array(terr), final_state=rho,
        metadata={"cycle_length": schedule.cycle_length, "cycle_count": schedule.cycle_count,
                  "total_time": schedule.total_time,
                  "n_pulses": len(schedule.pulses) * schedule.cycle_count},
    )


def reduced_channel_kraus(u_joint: np.ndarray, d_s: int, bath_state: np.ndarray) -> list[np.ndarray]:
    """Kraus operators of ``rho -> tr_B[U (rho (x) rho_B) U^dag]``."""
    d_b = u_joint.shape[0] // d_s
    w, v = np.linalg.eigh(bath_state)
    u4 = u_joint.reshape(d_s, d_b, d_s, d_b)
    ops = []
    for p, vec in zip(w, v.T):
        if p <= 1e-15:
            continue
        for a in range(d_b):
            ops.append(np.sqrt(p) * np.einsum("ijb,b->ij", u4[:, a, :, :], vec))
    return ops


def logical_entanglement_fidelity(kraus: Sequence[np.ndarray], code: DfsCode) -> float:
    """Entanglement fidelity of the code-space-restricted channel with the identity."""
    v = code.isometry
    k = v.shape[1]
    return float(sum(abs(np.trace(v.conj().T @ a @ v)) ** 2 for a in kraus) / k ** 2)


def residual_rotation_angle(kraus: Sequence[np.ndarray], code: DfsCode) -> float:
    """Equivalent logical rotation angle ``2 arccos(sqrt(F_e))``."""
    f = min(1.0, max(0.0, logical_entanglement_fidelity(kraus, code)))
    return float(2 * math.acos(math.sqrt(f)))


@dataclass(frozen=True)
class FeasibilityReport:
    T2: float
    c_range: tuple
    tau_c_range: tuple
    gate_time: float
    cycle_time: float
    n_pulses_range: tuple
    n_cycles_range: tuple
    correction_range: tuple

    @property
    def feasible(self) -> bool:
        return self.n_pulses_range[0] >= 2 and self.correction_range[1] < 1.0

    def to_dict(self) -> dict:
        return {
            "T2": self.T2, "c_range": list(self.c_range), "tau_c_range": list(self.tau_c_range),
            "gate_time": self.gate_time, "cycle_time": self.cycle_time,
            "n_pulses_range": list(self.n_pulses_range),
            "n_cycles_range": list(self.n_cycles_range),
            "correction_range": list(self.correction_range), "feasible": self.feasible,
        }


def _floor_ratio(a: float, b: float) -> int:
    r = a / b
    # guard against 19.999999999999996 from binary unit conversions
    nearest = round(r)
    return int(nearest) if abs(r - nearest) <= 1e-9 * max(1.0, abs(r)) else math.floor(r)


def feasibility(T2: float, c_of_T=(1.0, 100.0), gate_time: float = 0.05) -> FeasibilityReport:
    """Pulse budget for ``T2 = c tau_c``.

    ``c_of_T`` is a scalar or a ``(c_lo, c_hi)`` bracket. A cycle is one pulse
    pair, ``T_c = 2 * gate_time``; pulse count is ``floor(tau_c / gate_time)``
    and the first-order correction ``(T_c / tau_c)^2``.
    """
    c_lo, c_hi = (c_of_T, c_of_T) if np.isscalar(c_of_T) else tuple(c_of_T)
    if min(T2, c_lo, c_hi, gate_time) <= 0:
        raise ValueError("all feasibility inputs must be positive")
    if c_lo > c_hi:
        c_lo, c_hi = c_hi, c_lo
    tau_lo, tau_hi = T2 / c_hi, T2 / c_lo
    tc = 2 * gate_time
    return FeasibilityReport(
        T2=T2, c_range=(c_lo, c_hi), tau_c_range=(tau_lo, tau_hi), gate_time=gate_time,
        cycle_time=tc,
        n_pulses_range=(_floor_ratio(tau_lo, gate_time), _floor_ratio(tau_hi, gate_time)),
        n_cycles_range=(_floor_ratio(tau_lo, tc), _floor_ratio(tau_hi, tc)),
        correction_range=((tc / tau_hi) ** 2, (tc / tau_lo) ** 2),
    )


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
