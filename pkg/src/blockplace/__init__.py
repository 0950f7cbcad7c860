"""Energy-driven placement of basic blocks in flash or RAM."""

from .analysis import (
    BlockParams,
    PlacementProblem,
    Profile,
    Static,
    estimate_frequencies,
    extract_problem,
    loop_depths,
    problem_from_json,
    problem_to_json,
)
from .casestudy import (
    CaseStudyParams,
    battery_extension,
    energy_saved,
    period_energy,
    sweep_period,
)
from .errors import BlockPlaceError
from .hwmodel import HardwareModel, default_hw, load_hw_config, validate_dominance
from .ilpmodel import (
    LinearModel,
    ModelMetrics,
    SolveConstraints,
    build_ilp,
    evaluate_assignment,
    export_lp,
    instrumented_set,
)
from .ir import Program, parse_program, print_program, validate
from .sim import SimConfig, SimResult, profile_frequencies, simulate
from .solver import PlacementSolution, solve, solve_bnb, solve_exhaustive
from .tradeoff import enumerate_space, pareto_front, sweep_constraint
from .transform import TransformReport, apply_placement, measure_image

__version__ = "0.1.0"
