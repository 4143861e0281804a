"""Physics-informed adversarial solver for data-driven elasticity."""

from ._ddgan import (
    ConfigError,
    DatasetError,
    DivergenceError,
    Generator,
    InvalidInput,
    IoError,
    MaterialDatabase,
    derive_constants,
    elasticity_matrix,
    evaluate,
    full,
    load_dataset,
    metric_sq_distance,
    sample_interior,
    sample_test,
    sobol_2d,
    stress_from_strain,
    synthesize,
    synthesize_dataset,
    traction,
    train,
    whiten,
)

__all__ = [
    "ConfigError",
    "DatasetError",
    "DivergenceError",
    "Generator",
    "InvalidInput",
    "IoError",
    "MaterialDatabase",
    "derive_constants",
    "elasticity_matrix",
    "evaluate",
    "full",
    "load_dataset",
    "metric_sq_distance",
    "sample_interior",
    "sample_test",
    "sobol_2d",
    "stress_from_strain",
    "synthesize",
    "synthesize_dataset",
    "traction",
    "train",
    "whiten",
]
