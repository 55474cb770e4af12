"""Quasi-Bell inequalities built from joint distributions of noncommuting spin observables."""
from .errors import *  # noqa: F401,F403
from .kernel import BACKEND
from .pauli import BlochState, SymmetrizedOperator, matrix_exp_i, singlet_pair_expectation
from .joint import (
    CorrelatorSpec,
    OutcomeTable,
    frechet_pair_check,
    frechet_triple_check,
    mixed_state_correlator,
    noncommuting_pair_table,
    noncommuting_triple_table,
    positivity_interval,
)
from .symmetrize import (
    moyal_product_operator,
    symmetrize_bruteforce,
    symmetrize_pairing,
    symmetrized_pair_joint_table,
)
from .quasi_bell import (
    QuasiBellInstance,
    chsh_settings,
    classical_bound_sample,
    classical_bound_verify,
    hexagonal_settings,
    quantum_value,
    werner_value,
)
from .optimizer import OptimizationResult, local_stationarity_check, maximize
from .werner import WernerSweep, sweep, violation_threshold

__version__ = "0.1.0"
