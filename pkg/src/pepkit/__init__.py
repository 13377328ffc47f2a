"""Worst-case bounds for fixed-step first-order methods via performance estimation."""

from .bounds import (
    BoundReport,
    analytic_gm_bound,
    conjecture_explorer,
    gm_certificate,
    numeric_bound,
    verify_certificate,
    write_table,
)
from .pep import DualCertificate, build_constraint_matrices, build_dual_sdp
from .schedule import (
    StepSchedule,
    fgm_schedule,
    gm_schedule,
    hbm_schedule,
    load_schedule,
    save_schedule,
)
from .sdp import SdpProblem, SdpSolution, SolverConfig, solve
from .stepopt import crosscheck, recover_steps, render_schedule, solve_lin

__version__ = "0.1.0"
