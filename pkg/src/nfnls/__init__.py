"""Normal form reduction toolkit for the periodic cubic Schrodinger equation.

Layers, bottom up:

* :mod:`nfnls.modes`        dense coefficient vectors, Fourier-Lebesgue norms,
                            gauge and interaction-picture transforms;
* :mod:`nfnls.dynamics`     truncated profile dynamics and RK4 reference
                            integration;
* :mod:`nfnls.trees`        ordered interaction trees, chronicles, index
                            assignments, signed phases;
* :mod:`nfnls.normal_form`  generation operators N0/N1/N2/R/R2 with modulation
                            cutoffs;
* :mod:`nfnls.solver`       Picard iteration for the truncated normal form
                            equation;
* :mod:`nfnls.verify`       telescoping, decay, and cross-validation audits;
* :mod:`nfnls.cli`          deterministic command line front end.
"""

__version__ = "0.1.0"

from .modes import (
    FLParams,
    ModeVector,
    fl_norm,
    gauge_transform,
    interaction_representation,
    mass,
)
from .dynamics import (
    BlowupError,
    ModelSpec,
    Trajectory,
    eval_N1_first,
    eval_R1,
    eval_R2,
    integrate_reference,
    phase_phi,
    rhs,
)
from .trees import (
    IndexAssignment,
    OrderedTree,
    enumerate_indices,
    enumerate_trees,
    grow,
    one_generation_tree,
    signed_phase,
)
from .normal_form import (
    ModulationConfig,
    OperatorResult,
    cutoff,
    eval_generation,
    operator_bound_ratio,
)
from .solver import (
    SolveReport,
    SolverConfig,
    SolverError,
    choose_K,
    gamma_map,
    lipschitz_probe,
    solve_normal_form,
)

__all__ = [
    "__version__",
    "FLParams",
    "ModeVector",
    "fl_norm",
    "mass",
    "gauge_transform",
    "interaction_representation",
    "ModelSpec",
    "Trajectory",
    "BlowupError",
    "phase_phi",
    "eval_N1_first",
    "eval_R1",
    "eval_R2",
    "rhs",
    "integrate_reference",
    "OrderedTree",
    "IndexAssignment",
    "one_generation_tree",
    "grow",
    "enumerate_trees",
    "enumerate_indices",
    "signed_phase",
    "ModulationConfig",
    "OperatorResult",
    "cutoff",
    "eval_generation",
    "operator_bound_ratio",
    "SolverConfig",
    "SolveReport",
    "SolverError",
    "choose_K",
    "gamma_map",
    "solve_normal_form",
    "lipschitz_probe",
]
