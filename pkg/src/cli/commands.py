"""Command implementations: each builds its result, writes it and returns the path."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.shared.config import settings
from src.shared.error_handling import ErrorLogger, FitError, ParameterError, WalkError
from src.shared.models import DecayRate, SurvivalSeries, WalkKind
from src.cli.output import default_output, series_frame, write_json, write_result
from src.cli.specs import ExperimentSpec, SweepSpec
from src.cli.verification import VerificationSuite
from src.percolation.channel import PercolationChannel, channel_survival
from src.percolation.monte_carlo import averaged_survival
from src.spectral.analyzer import (
    channel_decay_rate,
    dense_spectrum,
    eigenvalue_multiplicity,
    leading_moduli,
    norm_growth_radius,
    predict_decay_rate,
)
from src.spectral.fitting import fit_decay_rate
from src.trapping.efficiency import (
    line_quotient,
    line_trapping_profile,
    simulated_efficiency,
    transport_efficiency,
    worst_case_coin_state,
)
from src.trapping.stationary import sink_free_basis
from src.walk.evolution import build_evolution, evolve_survival

logger = logging.getLogger(__name__)
error_logger = ErrorLogger(__name__)


def _workers(workers: Optional[int]) -> int:
    return max(1, workers if workers is not None else settings.workers)


def _exact_channel(spec: ExperimentSpec) -> PercolationChannel:
    return PercolationChannel.exact(
        spec.ring(), spec.coin(), spec.p, max_edges=settings.exact_enumeration_max_edges
    )


def _channel_rate(channel: PercolationChannel, deflate_trapped: bool = False) -> DecayRate:
    return channel_decay_rate(
        channel,
        tol=settings.norm_growth_tol,
        max_iterations=settings.channel_max_iterations,
        patience=settings.channel_patience,
        deflate_trapped=deflate_trapped,
    )


def _fit(series: SurvivalSeries) -> DecayRate:
    return fit_decay_rate(series, floor=settings.survival_floor)


def _stem(spec: ExperimentSpec) -> str:
    return f"{spec.kind.value}_N{spec.half_size}_seed{spec.seed}"


def _metadata(spec: ExperimentSpec, command: str) -> Dict[str, Any]:
    return {"command": command, "spec": spec.model_dump(mode="json")}


def _complex_pair(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def walk_series(spec: ExperimentSpec, workers: Optional[int] = None) -> SurvivalSeries:
    """Survival series of a spec; percolated walks are realization-averaged."""
    ring, coin = spec.ring(), spec.coin()
    psi_c = spec.coin_vector(coin)
    if spec.kind is WalkKind.PERCOLATED:
        return averaged_survival(
            ring, coin, psi_c, spec.p, spec.steps, spec.realizations, spec.seed,
            workers=_workers(workers),
        )
    return evolve_survival(ring, coin, psi_c, spec.steps)


def cmd_simulate(spec: ExperimentSpec, workers: Optional[int] = None) -> Path:
    """
    Simulate a walk and write its survival series.

    Args:
        spec: Experiment specification
        workers: Parallel realizations for percolated walks

    Returns:
        Path of the written table
    """
    series = walk_series(spec, workers)
    frame = series_frame(series)
    if series.standard_error is not None:
        frame["standard_error"] = series.standard_error

    metadata = _metadata(spec, "simulate")
    metadata["run"] = series.metadata
    path = default_output("simulate", _stem(spec), spec.format, spec.output)
    return write_result(frame, metadata, path, spec.format)


def _sweep_value(spec: ExperimentSpec, quantity: str) -> Tuple[float, Optional[float], Optional[int]]:
    """(value, r_squared, iterations) of one derived quantity."""
    ring, coin = spec.ring(), spec.coin()

    if quantity == "gamma_predicted":
        if spec.kind is WalkKind.PERCOLATED:
            rate = _channel_rate(_exact_channel(spec))
        else:
            rate = predict_decay_rate(ring, coin, spec.kind, trapped_tol=settings.degeneracy_tol)
        return rate.gamma, None, rate.spectral.iterations

    if quantity == "eta" and spec.kind is WalkKind.LAZY:
        basis = sink_free_basis(ring, coin, tol=settings.dependence_tol)
        return transport_efficiency(ring, coin, spec.coin_vector(coin), basis).eta, None, None

    series = walk_series(spec, workers=1)
    if quantity == "gamma_fit":
        fit = _fit(series)
        return fit.gamma, fit.r_squared, None
    if quantity == "eta":
        return simulated_efficiency(series).eta, None, None
    return float(series.survival[-1]), None, None


def _sweep_row(sweep: SweepSpec, value: float) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        sweep.axis: value,
        sweep.quantity: np.nan,
        "r_squared": np.nan,
        "iterations": np.nan,
        "error": "",
    }
    try:
        result, r_squared, iterations = _sweep_value(sweep.point(value), sweep.quantity)
    except (WalkError, ValidationError) as exc:
        error_logger.log_error(
            exc, {"axis": sweep.axis, "value": value, "quantity": sweep.quantity},
            level=logging.WARNING,
        )
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        return row

    row[sweep.quantity] = result
    if r_squared is not None:
        row["r_squared"] = r_squared
    if iterations is not None:
        row["iterations"] = iterations
    return row


def sweep_summary(frame: pd.DataFrame, sweep: SweepSpec) -> Dict[str, Any]:
    """Extremes of the derived quantity, plus the log-log slope along N."""
    valid = frame[frame["error"] == ""]
    values = valid[sweep.quantity].to_numpy(dtype=float)
    axis = valid[sweep.axis].to_numpy(dtype=float)
    summary: Dict[str, Any] = {"points": len(frame), "failed": len(frame) - len(valid)}
    if len(valid) == 0:
        return summary

    summary["argmax"] = float(axis[np.argmax(values)])
    summary["max"] = float(np.max(values))
    summary["argmin"] = float(axis[np.argmin(values)])
    summary["min"] = float(np.min(values))

    if sweep.axis == "N":
        positive = values > 0
        if np.count_nonzero(positive) >= 2:
            slope, _ = np.polyfit(np.log(axis[positive]), np.log(values[positive]), 1)
            summary["loglog_slope"] = float(slope)
    return summary


def cmd_sweep(sweep: SweepSpec, workers: Optional[int] = None) -> Path:
    """
    Evaluate a derived quantity at every grid point.

    Failing grid points are kept as rows with an error message.

    Raises:
        WalkError: If every grid point fails
    """
    logger.info(
        f"Sweeping {sweep.quantity} over {sweep.axis} with {len(sweep.grid)} points"
    )
    count = _workers(workers)
    if count > 1:
        with ThreadPoolExecutor(max_workers=count) as executor:
            rows = list(executor.map(lambda value: _sweep_row(sweep, value), sweep.grid))
    else:
        rows = [_sweep_row(sweep, value) for value in sweep.grid]

    frame = pd.DataFrame(rows)
    summary = sweep_summary(frame, sweep)
    if summary["failed"] == summary["points"]:
        raise WalkError(f"all {summary['points']} sweep points failed")

    base = sweep.base
    metadata = {
        "command": "sweep",
        "sweep": sweep.model_dump(mode="json"),
        "summary": summary,
    }
    stem = f"{base.kind.value}_{sweep.axis}_{sweep.quantity}"
    path = default_output("sweep", stem, base.format, base.output)
    return write_result(frame, metadata, path, base.format)


def efficiency_report(spec: ExperimentSpec) -> Dict[str, Any]:
    """Transport efficiency by every applicable method with its trapping breakdown."""
    if spec.kind is not WalkKind.LAZY:
        raise ParameterError(f"efficiency reports apply to lazy walks, got {spec.kind.value}")

    ring, coin = spec.ring(), spec.coin()
    basis = sink_free_basis(ring, coin, tol=settings.dependence_tol)
    report = transport_efficiency(ring, coin, spec.coin_vector(coin), basis)
    h_plus, h1, h2 = report.decomposition
    worst_state, worst_eta = worst_case_coin_state(ring, coin, basis)

    payload: Dict[str, Any] = {
        "eta": {report.method.value: report.eta, **report.estimates},
        "limiting_survival": report.limiting_survival,
        "decomposition": {
            "h_plus": _complex_pair(h_plus),
            "h1": _complex_pair(h1),
            "h2": _complex_pair(h2),
        },
        "trapping_profile": {str(m): p for m, p in report.trapping_probabilities.items()},
        "line_quotient": line_quotient(coin.rho),
        "worst_case": {"coin_state": worst_state, "eta": worst_eta},
    }
    if ring.source == 0:
        line = line_trapping_profile(ring.half_size, coin.rho, h_plus, h2)
        payload["line_trapping_profile"] = {str(m): p for m, p in line.items()}
    return payload


def cmd_efficiency(spec: ExperimentSpec) -> Path:
    """Write the efficiency report as JSON."""
    payload = {"metadata": _metadata(spec, "efficiency"), **efficiency_report(spec)}
    path = default_output("efficiency", _stem(spec), "json", spec.output)
    return write_json(payload, path)


def cmd_spectral(spec: ExperimentSpec) -> Path:
    """
    Spectrum of pi U with its moduli and predicted decay rate.

    Percolated specs report the channel's decay rate instead, with and
    without the ideal trapped subspace.
    """
    ring, coin = spec.ring(), spec.coin()
    metadata = _metadata(spec, "spectral")

    if spec.kind is WalkKind.PERCOLATED:
        channel = _exact_channel(spec)
        rate = _channel_rate(channel)
        deflated = _channel_rate(channel, deflate_trapped=True)
        payload = {
            "metadata": metadata,
            "gamma": rate.gamma,
            "leading_modulus": rate.spectral.leading_modulus,
            "iterations": rate.spectral.iterations,
            "gamma_deflated": deflated.gamma,
            "leading_modulus_deflated": deflated.spectral.leading_modulus,
            "channel": channel.statistics(),
        }
        path = default_output("spectral", _stem(spec), "json", spec.output)
        return write_json(payload, path)

    operator = build_evolution(ring, coin, spec.kind)
    eigenvalues = dense_spectrum(operator)
    cutoff = 1.0 - settings.degeneracy_tol
    leading, sub_leading = leading_moduli(eigenvalues, cutoff)
    predicted = predict_decay_rate(ring, coin, spec.kind, trapped_tol=settings.degeneracy_tol)
    growth = norm_growth_radius(operator, tol=settings.norm_growth_tol, seed=spec.seed)

    frame = pd.DataFrame({
        "index": np.arange(len(eigenvalues)),
        "re": eigenvalues.real,
        "im": eigenvalues.imag,
        "modulus": np.abs(eigenvalues),
    })
    metadata.update({
        "leading_modulus": leading,
        "sub_leading_modulus": sub_leading,
        "gamma_predicted": predicted.gamma,
        "norm_growth": {
            "leading_modulus": growth.leading_modulus,
            "converged": growth.converged,
            "effective_steps": growth.effective_steps,
        },
        "unit_multiplicity_projected": eigenvalue_multiplicity(eigenvalues, tol=settings.degeneracy_tol),
        "unit_multiplicity_unitary": eigenvalue_multiplicity(
            dense_spectrum(operator.unitary), tol=settings.degeneracy_tol
        ),
    })
    path = default_output("spectral", _stem(spec), spec.format, spec.output)
    return write_result(frame, metadata, path, spec.format)


def cmd_percolate(spec: ExperimentSpec, workers: Optional[int] = None) -> Path:
    """
    Realization-averaged survival of the percolated lazy walk.

    Rings with 2N <= 16 edges also get the exact channel trace as a column.
    """
    if spec.kind is WalkKind.TWO_STATE:
        raise ParameterError("percolation applies to lazy coins")

    ring, coin = spec.ring(), spec.coin()
    psi_c = spec.coin_vector(coin)
    series = averaged_survival(
        ring, coin, psi_c, spec.p, spec.steps, spec.realizations, spec.seed,
        workers=_workers(workers),
    )
    frame = series_frame(series)
    frame["standard_error"] = series.standard_error

    if ring.size <= settings.exact_enumeration_max_edges:
        exact = channel_survival(_exact_channel(spec), psi_c, spec.steps)
        frame["channel_survival"] = exact.survival

    metadata = _metadata(spec, "percolate")
    metadata["run"] = series.metadata
    try:
        fit = _fit(series)
        metadata["gamma_fit"] = {"gamma": fit.gamma, "window": fit.window, "r_squared": fit.r_squared}
    except FitError as exc:
        error_logger.log_warning(f"No decay fit for averaged survival: {exc}", {"p": spec.p})
        metadata["gamma_fit"] = None

    path = default_output("percolate", _stem(spec), spec.format, spec.output)
    return write_result(frame, metadata, path, spec.format)


def cmd_verify(
    level: str = "quick",
    output: Optional[str] = None,
    workers: Optional[int] = None
) -> Tuple[Dict[str, Any], Path]:
    """Run the verification suite and write its JSON report."""
    suite = VerificationSuite(level, seed=settings.default_seed, config=settings)
    report = suite.run(workers=_workers(workers))
    path = default_output("verify", level, "json", output)
    write_json(report, path)
    logger.info(
        f"Verification {level}: {'passed' if report['overall_passed'] else 'failed'} "
        f"({len(report['failures'])} failures)"
    )
    return report, path


