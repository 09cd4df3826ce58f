"""Sparse SVD by fast iterative thresholding, with a simulation lab."""
from importlib import metadata

try:
    __version__ = metadata.version("artifact")
except metadata.PackageNotFoundError:  # pragma: no cover
    __version__ = "0+unknown"

from .core import SsvdConfig, SsvdFit, fit, vanilla_subspace_iteration  # noqa: E402
from .rank import RankEstimate, estimate_rank  # noqa: E402
from .thresholds import ThresholdKind  # noqa: E402

__all__ = ["SsvdConfig", "SsvdFit", "fit", "vanilla_subspace_iteration",
           "RankEstimate", "estimate_rank", "ThresholdKind", "__version__"]
