"""Success probability of a lane change attempted along a cell."""

import math


def success_prob(alpha: float, length: float) -> float:
    """Probability that a lane change attempted over ``length`` meters succeeds.

    Exponential CDF with rate ``alpha`` (successes per meter), which is the
    only model whose probability does not depend on how a lane is cut into
    cells.
    """
    if not alpha > 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be a positive finite rate, got {alpha!r}")
    if not length >= 0:
        raise ValueError(f"length must be >= 0, got {length!r}")
    return -math.expm1(-alpha * length)
