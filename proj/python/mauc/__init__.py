"""Memory-assisted universal compression: CTW codec, MDL clustering and gain bounds."""

from ._core import (
    Error,
    FormatError,
    InvalidParameter,
    IoError,
    MemoryDesync,
    NoSolution,
    NumericalFailure,
    bounds,
    classify,
    cluster,
    compress,
    decompress,
    gain_quantile,
    generate,
    ideal_codelength,
    run_experiment,
)

__all__ = [
    "Error",
    "FormatError",
    "InvalidParameter",
    "IoError",
    "MemoryDesync",
    "NoSolution",
    "NumericalFailure",
    "bounds",
    "classify",
    "cluster",
    "compress",
    "decompress",
    "gain_quantile",
    "generate",
    "ideal_codelength",
    "run_experiment",
]
