"""Python bindings for the vgan generator, renderer and evaluation tools."""

from ._vgan import (
    CheckpointError,
    ConfigError,
    Generator,
    NumericError,
    Trainer,
    VganError,
    accumulate,
    evaluate_expression,
    frechet_distance,
    marching_cubes,
    preset_text,
    presets,
    validate_config,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "Generator",
    "NumericError",
    "Trainer",
    "VganError",
    "accumulate",
    "evaluate_expression",
    "frechet_distance",
    "marching_cubes",
    "preset_text",
    "presets",
    "validate_config",
]
