"""northopt: period/priority co-design for fixed-priority real-time systems.

The schedulability constraint is treated as a black box: any deterministic
query from task set to verdict plugs in. The built-in oracle is the classical
response-time analysis; an independent discrete-event simulator backs it in
the test suite.
"""

from .analysis import (
    AnalysisVerdict,
    BooleanOracle,
    RtaOracle,
    SchedOracle,
    analyze,
    as_boolean_blackbox,
    hyperperiod,
    response_time,
    simulate_worst_response,
)
from .bench import (
    BenchReport,
    GenParams,
    SetRecord,
    generate_taskset,
    run_benchmark,
    summarize,
    write_csv,
    write_summary,
)
from .descent import (
    DescentConfig,
    DescentResult,
    OptState,
    StepProposal,
    feasibility_backtrack,
    numeric_gradient,
    propose_step,
    run_descent,
)
from .elimination import VeOutcome, eliminate_missing, reformulate, subspace_search
from .estimator import NorthOptimizer
from .model import (
    ObjectiveWeights,
    Task,
    TaskSet,
    VariableBounds,
    apply_assignment,
    load_problem,
    make_taskset,
    save_problem,
    utilization,
    validate_taskset,
)
from .objective import (
    InfeasiblePointError,
    ProblemSpec,
    control_objective,
    objective_gap,
)
from .orchestrator import (
    METHODS,
    RunConfig,
    Solution,
    TraceEntry,
    initial_solution,
    make_problem,
    optimize,
    run_north_baseline,
    save_solution,
    solution_to_dict,
)
from .priorities import (
    PriorityPolicy,
    assign_dkc,
    assign_rm,
    brute_force_priorities,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "Task", "TaskSet", "VariableBounds", "ObjectiveWeights", "make_taskset",
    "validate_taskset", "utilization", "apply_assignment",
    "load_problem", "save_problem",
    # analysis
    "AnalysisVerdict", "SchedOracle", "RtaOracle", "BooleanOracle",
    "analyze", "response_time", "simulate_worst_response", "hyperperiod",
    "as_boolean_blackbox",
    # objective
    "InfeasiblePointError", "ProblemSpec", "control_objective", "objective_gap",
    # descent
    "DescentConfig", "DescentResult", "OptState", "StepProposal",
    "numeric_gradient", "propose_step", "feasibility_backtrack", "run_descent",
    # elimination
    "VeOutcome", "subspace_search", "eliminate_missing", "reformulate",
    # priorities
    "PriorityPolicy", "assign_rm", "assign_dkc", "brute_force_priorities",
    # orchestrator
    "METHODS", "RunConfig", "Solution", "TraceEntry", "initial_solution",
    "make_problem", "optimize", "run_north_baseline",
    "solution_to_dict", "save_solution",
    # bench
    "GenParams", "SetRecord", "BenchReport", "generate_taskset",
    "run_benchmark", "summarize", "write_csv", "write_summary",
    # estimator
    "NorthOptimizer",
]
