"""Log-linear fits of survival series."""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from src.shared.error_handling import FitError
from src.shared.models import DecayProvenance, DecayRate, FitAxis, PowerLawFit, SurvivalSeries

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 20
ZERO_FLOOR = 1e-13
SURVIVAL_FLOOR = 1e-12


def default_fit_window(
    series: SurvivalSeries,
    floor: float = SURVIVAL_FLOOR,
    fraction: float = 0.5
) -> Tuple[int, int]:
    """
    Latter ``fraction`` of the steps whose survival exceeds ``floor``.

    Raises:
        FitError: If fewer than two steps are above the floor
    """
    above = np.flatnonzero(series.survival > floor)
    if above.size == 0 or above[-1] < 1:
        raise FitError(f"survival never exceeds {floor} after step 0")
    last = int(above[-1])
    first = max(1, last - int(fraction * last))
    return first, last


def fit_loglinear(
    series: SurvivalSeries,
    window: Optional[Tuple[int, int]] = None,
    x_axis: Union[FitAxis, str] = FitAxis.TIME,
    min_points: int = MIN_FIT_POINTS
) -> Union[DecayRate, PowerLawFit]:
    """
    Least-squares line through (x, ln P) over an inclusive step window.

    With x = t the slope gives the decay rate gamma = -slope; with
    x = ln t it gives the power-law exponent.

    Args:
        series: Survival series
        window: Inclusive (t1, t2); the default window when omitted
        x_axis: FitAxis.TIME or FitAxis.LOG_TIME (or "t" / "ln t")
        min_points: Minimum number of points in the window

    Returns:
        DecayRate for x = t, PowerLawFit for x = ln t

    Raises:
        FitError: If the window is too short, out of range, or contains zeros
    """
    axis = FitAxis(x_axis)
    if window is None:
        window = default_fit_window(series)
    first, last = int(window[0]), int(window[1])

    if not 0 <= first < last <= series.steps:
        raise FitError(f"window [{first}, {last}] outside steps 0..{series.steps}")
    if last - first + 1 < min_points:
        raise FitError(f"window [{first}, {last}] has fewer than {min_points} points")
    if axis is FitAxis.LOG_TIME and first < 1:
        raise FitError("a ln t fit needs t >= 1")

    steps = np.arange(first, last + 1, dtype=float)
    values = series.survival[first:last + 1]
    if np.any(values <= ZERO_FLOOR):
        raise FitError(f"window [{first}, {last}] contains survival values <= {ZERO_FLOOR}")

    x = steps if axis is FitAxis.TIME else np.log(steps)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)

    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    r_squared = float(np.clip(r_squared, 0.0, 1.0))

    logger.debug(
        f"Log-linear fit over [{first}, {last}] on {axis.value}: "
        f"slope={slope:.6e}, r2={r_squared:.6f}"
    )

    if axis is FitAxis.LOG_TIME:
        return PowerLawFit(
            exponent=float(slope),
            intercept=float(intercept),
            window=(first, last),
            r_squared=r_squared,
        )

    gamma = -float(slope)
    if gamma < 0.0:
        logger.warning(f"Survival grows over [{first}, {last}] (slope {slope:.3e}); reporting gamma=0")
        gamma = 0.0
    return DecayRate(
        gamma=gamma,
        provenance=DecayProvenance.FITTED,
        window=(first, last),
        r_squared=r_squared,
    )


def fit_decay_rate(
    series: SurvivalSeries,
    window: Optional[Tuple[int, int]] = None,
    floor: float = SURVIVAL_FLOOR
) -> DecayRate:
    """Exponential decay rate over the given window, or the default one above ``floor``."""
    if window is None:
        window = default_fit_window(series, floor)
    return fit_loglinear(series, window, FitAxis.TIME)
