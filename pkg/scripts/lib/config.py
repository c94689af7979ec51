"""Numerical defaults, overridable from the environment."""

import logging
import os

logger = logging.getLogger(__name__)


def env_int(name: str, default: int, minimum: int = 1) -> int:
    """Read a positive integer setting from the environment, falling back to default."""
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer, using {default}")
        return default
    if value < minimum:
        logger.warning(f"Ignoring {name}={value}: must be >= {minimum}, using {default}")
        return default
    return value


# Midpoint steps per geodesic segment of a Wilson loop; THOMAS_WILSON_STEPS overrides
DEFAULT_WILSON_STEPS = env_int("THOMAS_WILSON_STEPS", 4096)

# Samples per element along simulated trajectories; THOMAS_TRACE_SAMPLES overrides
DEFAULT_TRACE_SAMPLES = env_int("THOMAS_TRACE_SAMPLES", 64, minimum=2)

# Closure tolerance on |L.u - u|
DEFAULT_TOLERANCE = 1e-8
