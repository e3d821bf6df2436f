"""Minimum-cost design of potential-based flow networks.

Given a graph whose arcs carry potential-based flow (f = y * signed power of
the potential drop), choose which arcs to build and how much conductance y to
install so that the effective s-t resistance stays within a budget, at
minimum installation cost. Exact solvers cover the polynomial cases, FPTAS
routines cover the rest, and brute-force oracles back the tests.
"""

from .core import (
    FixedInstance,
    Instance,
    Solution,
    UNBOUNDED,
    VerificationReport,
    parse_instance,
    read_solution,
    verify,
    write_instance,
    write_solution,
)
from .errors import (
    AllVariableCostsZero,
    DimensionMismatch,
    Disconnected,
    Infeasible,
    NonConvergence,
    NotSeriesParallel,
    OddSum,
    SchemaError,
    TooLarge,
    UnsupportedCase,
    ValidationError,
)
from .pathdesign import (
    solve_fixed_cost_only,
    solve_path_fptas,
    solve_variable_cost_only,
)
from .resistance import effective_conductance, effective_resistance, min_energy_flow
from .rsp import RspInstance, rsp_exact, rsp_fptas
from .spdesign import (
    discretize_conductances,
    dp_exact,
    solve_fixed_conductance_fptas,
    solve_sp_fptas,
)
from .sptree import decompose, resistance_sp, sp_unit_flow

__version__ = "0.1.0"

__all__ = [
    "AllVariableCostsZero",
    "DimensionMismatch",
    "Disconnected",
    "FixedInstance",
    "Infeasible",
    "Instance",
    "NonConvergence",
    "NotSeriesParallel",
    "OddSum",
    "RspInstance",
    "SchemaError",
    "Solution",
    "TooLarge",
    "UNBOUNDED",
    "UnsupportedCase",
    "ValidationError",
    "VerificationReport",
    "decompose",
    "discretize_conductances",
    "dp_exact",
    "effective_conductance",
    "effective_resistance",
    "min_energy_flow",
    "parse_instance",
    "read_solution",
    "resistance_sp",
    "rsp_exact",
    "rsp_fptas",
    "solve_fixed_conductance_fptas",
    "solve_fixed_cost_only",
    "solve_path_fptas",
    "solve_sp_fptas",
    "solve_variable_cost_only",
    "sp_unit_flow",
    "verify",
    "write_instance",
    "write_solution",
]
