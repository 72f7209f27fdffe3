"""Encoded dynamical decoupling: DFS encoding, bang-bang parity kicks,
open-system simulation and tomography-driven pulse design."""

from .pauli import (DimensionError, OperatorSum, PauliString, commutation_sign, equal_up_to_phase,
                    exp_hermitian, global_phase, multiply, parse_operator, to_dense)
from .dfs import (DfsCode, ErrorDecomposition, classify_error, collective_dephasing_check,
                  dfs_projector, encode, leakage_basis)
from .decoupling import (DecouplingGroup, Free, KickReport, Pulse, PulseSchedule,
                         leakage_elimination_cycle, logical_suppression_pulses, parity_kick_holds,
                         stabilizer_kick_set, symmetrize, verify_decoupled)
from .dynamics import (AnalyticDephasing, FeasibilityReport, SimulationResult, SpinBath,
                       analytic_coherence, build_total_hamiltonian, evolve, feasibility,
                       leakage_population, run_schedule)
from .tomography import (AdjointMatrix, Channel, ChiMatrix, HermitianBasis, RotationFamily,
                         adjoint_rep, empirical_bb_loop, extract_generator, qpt,
                         simulate_channel, solve_empirical_bb, transform_chi)

__version__ = "0.1.0"

__all__ = [
    "DimensionError", "OperatorSum", "PauliString", "commutation_sign", "equal_up_to_phase",
    "exp_hermitian", "global_phase", "multiply", "parse_operator", "to_dense",
    "DfsCode", "ErrorDecomposition", "classify_error", "collective_dephasing_check",
    "dfs_projector", "encode", "leakage_basis",
    "DecouplingGroup", "Free", "KickReport", "Pulse", "PulseSchedule",
    "leakage_elimination_cycle", "logical_suppression_pulses", "parity_kick_holds",
    "stabilizer_kick_set", "symmetrize", "verify_decoupled",
    "AnalyticDephasing", "FeasibilityReport", "SimulationResult", "SpinBath",
    "analytic_coherence", "build_total_hamiltonian", "evolve", "feasibility",
    "leakage_population", "run_schedule",
    "AdjointMatrix", "Channel", "ChiMatrix", "HermitianBasis", "RotationFamily",
    "adjoint_rep", "empirical_bb_loop", "extract_generator", "qpt",
    "simulate_channel", "solve_empirical_bb", "transform_chi",
]
