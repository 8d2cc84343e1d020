"""Finite extended metric spaces, their Lipschitz function lattices, and
rough isometries lifted to (and recovered from) lattice maps."""

from .lipschitz import (LambdaFn, LipFn, NotLipschitz, SpaceMismatch, constant, is_finite_lambda,
                        is_k_eps_lipschitz, join, lambda_decompose, lambda_dist_closed,
                        lambda_irreducibility_witness, lambda_realize, lipschitzise, meet,
                        nearest_lambda, sup_dist)
from .metric import (INF, TOL, ComponentPartition, InvalidMetric, MetricSpace, components, cutoff,
                     ext_dist, scale, validate_metric)
from .mliso import (MlDefectReport, MlOracle, NotMlIsomorphism, check_ml_defect, identity_oracle,
                    lambda_exchange_defect, lambda_image, lift, perturbed_lift,
                    promote_surjective_homomorphism, reconstruct, verify_reconstruction)
from .rough import (BudgetExceeded, IsometryDefect, MapPair, RoughDistance, defect, nearness,
                    rough_distance_exact)
from .scaling import (ScalingExperiment, lipschitzized_scaling, rescale_function,
                      run_scaling_experiment)

__all__ = [
    "BudgetExceeded", "ComponentPartition", "INF", "InvalidMetric", "IsometryDefect",
    "LambdaFn", "LipFn", "MapPair", "MetricSpace", "MlDefectReport", "MlOracle", "NotLipschitz",
    "NotMlIsomorphism", "RoughDistance", "ScalingExperiment", "SpaceMismatch", "TOL",
    "check_ml_defect", "components", "constant", "cutoff", "defect", "ext_dist",
    "identity_oracle", "is_finite_lambda", "is_k_eps_lipschitz", "join", "lambda_decompose",
    "lambda_dist_closed", "lambda_exchange_defect", "lambda_image",
    "lambda_irreducibility_witness", "lambda_realize", "lift", "lipschitzise",
    "lipschitzized_scaling", "meet", "nearest_lambda", "nearness", "perturbed_lift",
    "promote_surjective_homomorphism", "reconstruct", "rescale_function",
    "rough_distance_exact", "run_scaling_experiment", "scale", "sup_dist", "validate_metric",
    "verify_reconstruction",
]
