"""Exact reasoning and fair-coin sampling for probabilistic
guarded-command programs over finite state spaces."""

from .bits import RandomBitSource, ScriptedBitSource
from .checks import (
    Counterexample,
    ProbeFamily,
    Verdict,
    check_equal,
    check_refines,
    check_variant,
    dyadic_grid,
)
from .errors import (
    BitsExhaustedError,
    ChainAscentError,
    DistError,
    EvalError,
    LoopBudgetError,
    MachineAnalysisError,
    MachineFormatError,
    PgclError,
    PgclSyntaxError,
    ResolutionLimitError,
    SpaceError,
    UndefinedStateError,
    VariantError,
    WindowInvariantError,
    WpError,
)
from .expectations import Expectation, almost_equal, constant, from_expr, indicator
from .exprs import Expr, eval_expr, free_vars, pretty_expr, substitute
from .machine import (
    Machine,
    MachineAnalysis,
    MachineNode,
    analyze,
    build_machine,
    crosscheck,
    load_machine,
    machine_to_text,
    to_dot,
)
from .parser import parse_expression, parse_program, parse_rational, parse_source
from .programs import Program, VariantSpec, pretty_print
from .resolutions import (
    Dist,
    enumerate_resolutions,
    min_expected,
    resolutions_by_state,
)
from .sampler import (
    CumulativeDist,
    SampleTrace,
    TrialsResult,
    WeightedDist,
    read_trials_file,
    run_trials,
    sample_binary,
    sample_discrete,
)
from .states import State, StateSpace, VarDomain, space_of
from .wp import WpConfig, WpResult, wp

__version__ = "0.1.0"

__all__ = [
    "BitsExhaustedError", "ChainAscentError", "Counterexample",
    "CumulativeDist", "Dist", "DistError", "EvalError", "Expectation",
    "Expr", "LoopBudgetError", "Machine", "MachineAnalysis",
    "MachineAnalysisError", "MachineFormatError", "MachineNode", "PgclError",
    "PgclSyntaxError", "ProbeFamily", "Program", "RandomBitSource",
    "ResolutionLimitError", "SampleTrace", "ScriptedBitSource", "SpaceError",
    "State", "StateSpace", "TrialsResult", "UndefinedStateError",
    "VarDomain", "VariantError", "VariantSpec", "Verdict", "WeightedDist",
    "WindowInvariantError", "WpConfig", "WpError", "WpResult",
    "almost_equal", "analyze", "build_machine", "check_equal",
    "check_refines", "check_variant", "constant", "crosscheck",
    "dyadic_grid", "enumerate_resolutions", "eval_expr", "free_vars",
    "from_expr", "indicator", "load_machine", "machine_to_text",
    "min_expected", "parse_expression", "parse_program", "parse_rational",
    "parse_source", "pretty_expr", "pretty_print", "read_trials_file",
    "resolutions_by_state", "run_trials", "sample_binary", "sample_discrete",
    "space_of", "to_dot", "wp",
]
