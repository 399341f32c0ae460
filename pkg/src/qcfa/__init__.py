"""Workbench for one-way finite automata with quantum and classical states (1QCFA)."""

from .analysis import distinguish, find_forbidden_construction, minimize_dfa
from .closure import ErrorBudget, combine_error, complement, extend_alphabet, intersect, union
from .compile import compile_dfa, compile_mm1qfa, compile_mo1qfa, compile_pfa, compile_qfacl
from .linalg import MeasurementFamily
from .models import (
    Alphabet,
    Dfa,
    Mm1qfa,
    Mo1qfa,
    Pfa,
    Qcfa,
    Qfacl,
    build_figure1_dfa,
    build_figure2_dfa,
    lm_member,
    validate,
)
from .semantics import (
    RunOutcome,
    mm1qfa_run,
    mo1qfa_accept_prob,
    pfa_accept_prob,
    qcfa_run,
    qcfa_run_branching_oracle,
    qfacl_accept_prob,
    recognizes_with_error,
)
from .succinct import build_l2_mo1qfa, build_lm_qcfa, run_lm_experiment, search_divisibility_params

__version__ = "0.1.0"
