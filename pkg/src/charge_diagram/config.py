"""Global numerical configuration: tolerances and the dimension cap."""

import os

# Hermiticity / trace / positivity tolerances for validated matrix types.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12
PROJECTOR_TOL = 1e-10

# Eigenvalues below this threshold contribute 0 to -sum(p log p).
ENTROPY_CLIP = 1e-14

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "CHARGE_DIAGRAM_DIM_CAP"


def dim_cap() -> int:
    """Active dimension cap; the environment variable overrides the default."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{DIM_CAP_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be positive, got {value}")
    return value
