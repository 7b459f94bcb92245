"""Simulator and verification suite for the nonlocal bistable flow

    u_t = u^2 (1 - u) - lambda(t) u (1 - u),
    lambda(t) = (int u^2(1-u) dx) / (int u(1-u) dx),

acting on measure-represented initial data: states are finite weighted
atom ensembles, evolved exactly along their characteristics by adaptive
embedded Runge-Kutta integration, with the qualitative theory (mass
conservation, invariant intervals, monotone functionals, closed-form
long-time limits) available as executable checks.
"""

from .analysis import (Bucket, LimitsEstimate, LyapunovSpec, MonotoneReport,
                       OmegaPrediction, PredictionKind, SandwichReport,
                       UniquenessReport, check_h2_uniqueness, check_monotone,
                       classify_terminal, default_catalog, estimate_limits,
                       lyapunov_spec, lyapunov_value, predict_omega_limit,
                       sandwich_check)
from .backend import backend_name
from .config import ScenarioConfig, parse_config
from .dynamics import (characteristic_residual, lambda_of, reaction_f,
                       reaction_g, rhs)
from .errors import (DegenerateSupport, DenominatorVanishes, EmptySpec,
                     NoHypothesis, NonlocalFlowError, NonpositiveWeight,
                     NoSettlingTime, SchemaError, StepSizeUnderflow)
from .integrator import (LambdaPath, ScalarTrajectory, StepControl,
                         Termination, TrajectoryRecord, evolve,
                         reference_evolve, solve_characteristic, step)
from .runner import (CheckOutcome, ScenarioResult, emit_csv, run_config,
                     run_scenario)
from .state import (Atom, AtomListSpec, Ensemble, HypothesisClass,
                    InitialDatumSpec, PiecewiseSpec, SamplerSpec,
                    build_ensemble, mass, validate_hypothesis)

__version__ = "0.1.0"

__all__ = [
    "Atom", "AtomListSpec", "Bucket", "CheckOutcome", "DegenerateSupport",
    "DenominatorVanishes", "EmptySpec", "Ensemble", "HypothesisClass",
    "InitialDatumSpec", "LambdaPath", "LimitsEstimate", "LyapunovSpec",
    "MonotoneReport", "NoHypothesis", "NonlocalFlowError",
    "NonpositiveWeight", "NoSettlingTime", "OmegaPrediction",
    "PiecewiseSpec", "PredictionKind", "SamplerSpec", "SandwichReport",
    "ScalarTrajectory", "ScenarioConfig", "ScenarioResult", "SchemaError",
    "StepControl", "StepSizeUnderflow", "Termination", "TrajectoryRecord",
    "UniquenessReport", "backend_name", "build_ensemble",
    "characteristic_residual", "check_h2_uniqueness", "check_monotone",
    "classify_terminal", "default_catalog", "emit_csv", "estimate_limits",
    "evolve", "lambda_of", "lyapunov_spec", "lyapunov_value", "mass",
    "parse_config", "predict_omega_limit", "reaction_f", "reaction_g",
    "reference_evolve", "rhs", "run_config", "run_scenario",
    "sandwich_check", "solve_characteristic", "step",
    "validate_hypothesis",
]
