import math
from functools import wraps
from typing import Any, Iterable, Mapping, Type

from loguru import logger

from sefcsim.core.exceptions import SimulationError

# Absolute tolerance used for scalar comparisons across the simulator.
TOLERANCE = 1e-9


def handle_errors(
    error_message: str,
    error_type: Type[Exception] = SimulationError,
    default_return: Any = None,
):
    """Wrap errors with a consistent sefcsim exception and log message."""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as error:
                logger.error(
                    f"{error_message}: {str(error)}\nFunction: {func.__name__}"
                )
                if default_return is not None:
                    return default_return
                raise error_type(f"{error_message}: {str(error)}") from error

        return wrapper

    return decorator


def safe_ratio(numerator: float, denominator: float) -> float:
    """Divide, treating a zero denominator as 0/0 := 0."""
    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def clamp_unit(value: float) -> float:
    """Clamp a value into [0, 1]."""
    return min(1.0, max(0.0, value))


def argmax_lowest_id(scores: Mapping[int, float]) -> int | None:
    """Return the key with the highest score, ties broken by the lower id."""
    best: int | None = None
    for node_id in sorted(scores):
        if best is None or scores[node_id] > scores[best]:
            best = node_id
    return best


def mean_or_none(values: Iterable[float]) -> float | None:
    """Arithmetic mean, or ``None`` for an empty sequence."""
    collected = list(values)
    if not collected:
        return None
    return math.fsum(collected) / len(collected)


def ticks_for(duration: float, tick_dt: float) -> int:
    """Number of whole ticks covering ``duration`` (at least one for positive spans)."""
    if duration <= 0.0:
        return 0
    return max(1, int(round(duration / tick_dt)))
