"""Invariant verification suite behind the ``verify`` command."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.shared.config import Settings, settings
from src.shared.error_handling import ErrorLogger, ParameterError
from src.shared.models import EdgeConfig, RingConfig, WalkKind
from src.percolation.channel import ENUMERATED, FACTORIZED, PercolationChannel, channel_survival
from src.percolation.configurations import percolated_step, realization_stream, sample_config
from src.percolation.monte_carlo import PercolatedWalk, averaged_survival, realization_survival
from src.spectral.analyzer import (
    channel_decay_rate,
    dense_spectrum,
    eigenvalue_multiplicity,
    norm_growth_radius,
    predict_decay_rate,
)
from src.spectral.fitting import fit_decay_rate
from src.trapping.common_eigenstates import common_eigenstate_check
from src.trapping.efficiency import (
    efficiency_closed_form,
    transport_efficiency,
    trapping_coin_block,
    worst_case_coin_state,
)
from src.trapping.stationary import sink_free_basis, stationary_states
from src.walk.coins import (
    build_coin2,
    build_coin3,
    coin_eigenbasis,
    compose_coin_state,
    decompose_coin_state,
    random_coin_state,
)
from src.walk.evolution import build_evolution, evolve_survival

logger = logging.getLogger(__name__)

LEVELS = ("quick", "full")
GROVER_RHO = 1.0 / np.sqrt(3.0)


@dataclass
class CheckResult:
    """Outcome of one invariant check."""
    name: str
    passed: bool
    residual: Optional[float]
    threshold: Optional[float]
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None


class VerificationSuite:
    """
    Runs the invariant checks of every module.

    The quick level keeps rings at N <= 5 and series at T <= 500; the
    full level adds the larger reproductions.
    """

    def __init__(self, level: str = "quick", seed: int = 0, config: Optional[Settings] = None):
        """
        Initialize verification suite.

        Args:
            level: 'quick' or 'full'
            seed: Seed for random coin states and sampled configurations
            config: Tolerances and limits; the global settings by default

        Raises:
            ParameterError: For an unknown level
        """
        if level not in LEVELS:
            raise ParameterError(f"verification level must be one of {LEVELS}, got {level!r}")
        self.level = level
        self.seed = seed
        self.config = config or settings
        self.workers = 1
        self.error_logger = ErrorLogger(__name__)

    @property
    def full(self) -> bool:
        return self.level == "full"

    def checks(self) -> List[Callable[[], CheckResult]]:
        checks = [
            self.check_coin_unitarity,
            self.check_eigenbasis_action,
            self.check_evolution_operators,
            self.check_probability_conservation,
            self.check_initial_state_independence,
            self.check_spectral_agreement,
            self.check_degeneracy,
            self.check_closed_form_efficiency,
            self.check_full_transport,
            self.check_trapping_plateau,
            self.check_efficiency_invariances,
            self.check_worst_case_state,
            self.check_reflection_involution,
            self.check_percolation_robustness,
            self.check_robust_realization,
            self.check_common_eigenstates,
            self.check_channel_forms,
        ]
        if self.full:
            checks += [
                self.check_two_state_decay,
                self.check_decay_scaling,
                self.check_full_transport_decay,
                self.check_fragile_decay,
                self.check_channel_ensemble,
            ]
        return checks

    def _run_one(self, check: Callable[[], CheckResult]) -> CheckResult:
        name = check.__name__.replace("check_", "")
        try:
            return check()
        except Exception as exc:
            self.error_logger.log_error(exc, {"check": name, "level": self.level})
            return CheckResult(name=name, passed=False, residual=None, threshold=None, error=str(exc))

    def run(self, workers: int = 1) -> Dict[str, Any]:
        """
        Run every check of the level.

        Returns:
            Report with per-check results and the overall verdict
        """
        checks = self.checks()
        self.workers = max(1, workers)
        logger.info(f"Running {len(checks)} verification checks at level {self.level}")

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(self._run_one, checks))
        else:
            results = [self._run_one(check) for check in checks]

        failures = [result.name for result in results if not result.passed]
        for name in failures:
            self.error_logger.log_warning(f"Verification check failed: {name}", {"level": self.level})

        return {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": self.level,
            "overall_passed": not failures,
            "checks": [asdict(result) for result in results],
            "failures": failures,
        }

    # walk-core

    def _lazy_grid(self):
        for rho in np.linspace(0.1, 0.9, 5):
            for alpha in np.linspace(0.0, 2.0 * np.pi, 5, endpoint=False):
                yield build_coin3(float(rho), float(alpha))

    def check_coin_unitarity(self) -> CheckResult:
        coins = [build_coin2(float(rho)) for rho in np.linspace(0.1, 1.0, 10)]
        coins += list(self._lazy_grid())
        residual = max(coin.unitarity_residual() for coin in coins)
        tol = self.config.unitarity_tol
        return CheckResult("coin_unitarity", residual <= tol, residual, tol, {"coins": len(coins)})

    def check_eigenbasis_action(self) -> CheckResult:
        residual = 0.0
        for coin in self._lazy_grid():
            basis = coin_eigenbasis(coin)
            matrix = basis.as_matrix()
            action = coin.matrix @ matrix - matrix * np.array([1.0, -1.0, -1.0])
            orthonormality = matrix.conj().T @ matrix - np.eye(3)
            residual = max(residual, float(np.max(np.abs(action))), float(np.max(np.abs(orthonormality))))
        tol = self.config.unitarity_tol
        return CheckResult("eigenbasis_action", residual <= tol, residual, tol, {"grid_points": 25})

    def check_evolution_operators(self) -> CheckResult:
        residual = 0.0
        for half_size in range(1, 6):
            ring = RingConfig(half_size)
            for coin in (build_coin2(1.0 / np.sqrt(2.0)), build_coin3(1.0 / np.sqrt(3.0), np.pi / 3)):
                operator = build_evolution(ring, coin)
                identity = np.eye(operator.dimension)
                unitary = operator.unitary
                residual = max(
                    residual,
                    float(np.max(np.abs(unitary.conj().T @ unitary - identity))),
                    float(np.max(np.abs(operator.projector @ operator.projector - operator.projector))),
                    max(0.0, float(np.linalg.norm(operator.projected, 2)) - 1.0),
                )
        tol = self.config.unitarity_tol
        return CheckResult("evolution_operators", residual <= tol, residual, tol)

    def check_probability_conservation(self) -> CheckResult:
        steps = 1000 if self.full else 500
        ring = RingConfig(5)
        cases = [
            (build_coin2(1.0 / np.sqrt(2.0)), [1.0, 0.0]),
            (build_coin3(1.0 / np.sqrt(3.0), 0.0), coin_eigenbasis(build_coin3(1.0 / np.sqrt(3.0), 0.0)).sigma_plus),
            (build_coin3(0.6, np.pi), [0.0, 1.0, 0.0]),
        ]
        residual = 0.0
        monotone = True
        for coin, psi_c in cases:
            series = evolve_survival(ring, coin, psi_c, steps)
            residual = max(residual, series.conservation_residual())
            monotone = monotone and series.is_monotone()
        tol = self.config.conservation_tol
        return CheckResult(
            "probability_conservation", residual <= tol and monotone, residual, tol,
            {"steps": steps, "monotone": monotone},
        )

    def check_initial_state_independence(self) -> CheckResult:
        rng = np.random.default_rng(self.seed)
        sizes = range(2, 7) if self.full else range(2, 6)
        n_states = 20 if self.full else 5
        survival_dev = 0.0
        flux_dev = 0.0
        for half_size in sizes:
            ring = RingConfig(half_size)
            for rho in (0.3, 1.0 / np.sqrt(2.0), 0.9):
                coin = build_coin2(rho)
                operator = build_evolution(ring, coin)
                runs = [
                    evolve_survival(ring, coin, random_coin_state(2, rng), 200, operator)
                    for _ in range(n_states)
                ]
                survival = np.array([run.survival for run in runs])
                absorbed = np.array([run.cumulative_absorbed for run in runs])
                survival_dev = max(survival_dev, float(np.max(survival.max(axis=0) - survival.min(axis=0))))
                flux_dev = max(flux_dev, float(np.max(absorbed.max(axis=0) - absorbed.min(axis=0))))
        residual = max(survival_dev, flux_dev)
        tol = self.config.conservation_tol
        return CheckResult(
            "initial_state_independence", residual < tol, residual, tol,
            {"survival_deviation": survival_dev, "flux_deviation": flux_dev, "states": n_states},
        )

    # spectral

    def check_spectral_agreement(self) -> CheckResult:
        residual = 0.0
        for half_size in (2, 5):
            operator = build_evolution(RingConfig(half_size), build_coin2(1.0 / np.sqrt(2.0)))
            dense = float(np.abs(dense_spectrum(operator)[0]))
            growth = norm_growth_radius(operator, tol=self.config.norm_growth_tol, seed=self.seed).leading_modulus
            residual = max(residual, abs(dense - growth))
        return CheckResult("spectral_agreement", residual <= 1e-6, residual, 1e-6)

    def check_degeneracy(self) -> CheckResult:
        sizes = range(2, 7) if self.full else range(2, 6)
        mismatches = {}
        coin = build_coin3(1.0 / np.sqrt(3.0), 0.0)
        for half_size in sizes:
            operator = build_evolution(RingConfig(half_size), coin)
            tol = self.config.degeneracy_tol
            free = eigenvalue_multiplicity(dense_spectrum(operator.unitary), tol=tol)
            with_sink = eigenvalue_multiplicity(dense_spectrum(operator.projected), tol=tol)
            if free != 2 * half_size or with_sink != 2 * half_size - 2:
                mismatches[half_size] = {"unitary": free, "projected": with_sink}
        return CheckResult(
            "degeneracy", not mismatches, float(len(mismatches)), 0.0, {"mismatches": mismatches}
        )

    def check_two_state_decay(self) -> CheckResult:
        ring = RingConfig(5)
        coin = build_coin2(1.0 / np.sqrt(2.0))
        fitted = fit_decay_rate(evolve_survival(ring, coin, [1.0, 0.0], 1000))
        predicted = predict_decay_rate(ring, coin, WalkKind.TWO_STATE)
        relative = abs(fitted.gamma - predicted.gamma) / predicted.gamma
        return CheckResult(
            "two_state_decay", relative <= 0.05 and fitted.r_squared > 0.999, relative, 0.05,
            {"fitted": fitted.gamma, "predicted": predicted.gamma, "r_squared": fitted.r_squared},
        )

    def check_decay_scaling(self) -> CheckResult:
        sizes = np.array([10, 20, 40, 80])
        slopes = {}
        for rho in (1.0 / np.sqrt(2.0), 0.8):
            gammas = [
                predict_decay_rate(RingConfig(int(n)), build_coin2(rho), WalkKind.TWO_STATE).gamma
                for n in sizes
            ]
            slopes[f"{rho:.6f}"] = float(np.polyfit(np.log(sizes), np.log(gammas), 1)[0])
        passed = all(-3.3 <= slope <= -2.7 for slope in slopes.values())
        worst = max(abs(slope + 3.0) for slope in slopes.values())
        return CheckResult("decay_scaling", passed, worst, 0.3, {"slopes": slopes})

    # trapping

    def check_closed_form_efficiency(self) -> CheckResult:
        rng = np.random.default_rng(self.seed + 1)
        n_states = 10 if self.full else 3
        residual = 0.0
        for half_size in (2, 3, 4, 5):
            ring = RingConfig(half_size)
            for rho in (0.2, 1.0 / np.sqrt(3.0), 0.6, 0.9):
                coin = build_coin3(rho, float(rng.uniform(0.0, 2.0 * np.pi)))
                basis = sink_free_basis(ring, coin, tol=self.config.dependence_tol)
                eigenbasis = coin_eigenbasis(coin)
                for _ in range(n_states):
                    psi_c = random_coin_state(3, rng)
                    h_plus, _, h2 = decompose_coin_state(psi_c, eigenbasis)
                    exact = transport_efficiency(ring, coin, psi_c, basis).eta
                    closed = efficiency_closed_form(half_size, rho, abs(h_plus) ** 2, abs(h2) ** 2)
                    residual = max(residual, abs(exact - closed))
        return CheckResult("closed_form_efficiency", residual < 1e-8, residual, 1e-8, {"states": n_states})

    def check_full_transport(self) -> CheckResult:
        residual = 0.0
        for half_size in (2, 5):
            for rho, alpha in ((1.0 / np.sqrt(3.0), 0.0), (0.4, 2.0), (0.85, np.pi)):
                coin = build_coin3(rho, alpha)
                eta = transport_efficiency(RingConfig(half_size), coin, coin_eigenbasis(coin).sigma1_minus).eta
                residual = max(residual, abs(1.0 - eta))
        return CheckResult("full_transport", residual <= 1e-10, residual, 1e-10)

    def check_trapping_plateau(self) -> CheckResult:
        cases = [(5, 2000)] if self.full else [(2, 500)]
        coin = build_coin3(1.0 / np.sqrt(3.0), 0.0)
        sigma_plus = coin_eigenbasis(coin).sigma_plus
        residual = 0.0
        details = {}
        for half_size, steps in cases:
            ring = RingConfig(half_size)
            plateau = transport_efficiency(ring, coin, sigma_plus).limiting_survival
            final = evolve_survival(ring, coin, sigma_plus, steps).survival[-1]
            residual = max(residual, abs(final - plateau))
            details[str(half_size)] = {"plateau": plateau, "survival": float(final), "steps": steps}
        return CheckResult("trapping_plateau", residual <= 1e-6, residual, 1e-6, details)

    def check_efficiency_invariances(self) -> CheckResult:
        rng = np.random.default_rng(self.seed + 3)
        ring = RingConfig(3)
        n_draws = 10 if self.full else 4
        spread = 0.0
        for rho in (0.3, GROVER_RHO, 0.8):
            for _ in range(n_draws):
                weights = rng.dirichlet(np.ones(3))
                phases = np.exp(2j * np.pi * rng.uniform(size=3))
                etas = []
                for alpha in (0.0, 1.3, np.pi):
                    coin = build_coin3(rho, alpha)
                    eigenbasis = coin_eigenbasis(coin)
                    basis = sink_free_basis(ring, coin, tol=self.config.dependence_tol)
                    for h1_phase in np.exp(2j * np.pi * rng.uniform(size=3)):
                        h = np.sqrt(weights) * phases
                        h[1] = abs(h[1]) * h1_phase
                        psi_c = compose_coin_state(tuple(h), eigenbasis)
                        etas.append(transport_efficiency(ring, coin, psi_c, basis).eta)
                spread = max(spread, float(np.ptp(etas)))
        return CheckResult(
            "efficiency_invariances", spread <= 1e-10, spread, 1e-10,
            {"alphas": [0.0, 1.3, float(np.pi)], "draws": n_draws},
        )

    def check_worst_case_state(self) -> CheckResult:
        rng = np.random.default_rng(self.seed + 4)
        n_samples = 10_000
        details = {}
        gap = -np.inf
        for half_size, alpha in ((3, 0.0), (5, 1.3)):
            ring = RingConfig(half_size)
            coin = build_coin3(GROVER_RHO, alpha)
            basis = sink_free_basis(ring, coin, tol=self.config.dependence_tol)
            block = trapping_coin_block(basis)
            samples = rng.normal(size=(n_samples, 3)) + 1j * rng.normal(size=(n_samples, 3))
            samples /= np.linalg.norm(samples, axis=1, keepdims=True)
            sampled = 1.0 - np.einsum("si,ij,sj->s", samples.conj(), block, samples).real
            sigma_plus = transport_efficiency(ring, coin, coin_eigenbasis(coin).sigma_plus, basis).eta
            _, worst = worst_case_coin_state(ring, coin, basis)
            gap = max(gap, sigma_plus - float(sampled.min()), abs(worst - sigma_plus))
            details[str(half_size)] = {"sigma_plus": sigma_plus, "sampled_min": float(sampled.min())}
        return CheckResult("worst_case_state", gap <= 1e-9, float(gap), 1e-9, details)

    # percolation

    def check_reflection_involution(self) -> CheckResult:
        residual = 0.0
        for half_size in range(1, 6):
            ring = RingConfig(half_size)
            step = percolated_step(ring, EdgeConfig.empty(ring.size))
            directional = np.array([i for i in range(ring.size * 3) if i % 3 != 1])
            squared = (step @ step)[np.ix_(directional, directional)]
            residual = max(residual, float(np.max(np.abs(squared - np.eye(directional.size)))))
        return CheckResult("reflection_involution", residual == 0.0, residual, 0.0)

    def check_percolation_robustness(self) -> CheckResult:
        ring = RingConfig(3)
        tol = self.config.eigenstate_tol
        rng = realization_stream(self.seed, 0)
        robust = build_coin3(GROVER_RHO, 0.0)
        walk = PercolatedWalk(ring, robust)
        raw = stationary_states(ring, robust)
        sink_free = [n for n in raw.raw_labels if n <= ring.half_size - 2]

        fixed_residual = 0.0
        for _ in range(20 if self.full else 8):
            unitary = walk.unitary(sample_config(0.5, rng, ring.size))
            for n in sink_free:
                state = raw.raw_state(n)
                fixed_residual = max(fixed_residual, float(np.linalg.norm(unitary @ state - state)))

        fragile = build_coin3(GROVER_RHO, np.pi)
        fragile_raw = stationary_states(ring, fragile)
        state = fragile_raw.raw_state(0)
        state = state / np.linalg.norm(state)
        broken = EdgeConfig(EdgeConfig.full(ring.size).mask & ~(1 << ring.index(0)), ring.size)
        unitary = PercolatedWalk(ring, fragile).unitary(broken)
        broken_deviation = float(np.linalg.norm(unitary @ state - state))

        passed = fixed_residual <= tol and broken_deviation > 0.1
        return CheckResult(
            "percolation_robustness", passed, fixed_residual, tol,
            {"alpha_pi_deviation": broken_deviation},
        )

    def check_robust_realization(self) -> CheckResult:
        ring = RingConfig(5)
        coin = build_coin3(GROVER_RHO, 0.0)
        sigma_plus = coin_eigenbasis(coin).sigma_plus
        plateau = transport_efficiency(ring, coin, sigma_plus).limiting_survival
        series = realization_survival(ring, coin, sigma_plus, 0.5, 500, self.seed)
        dip = float(plateau - series.survival.min())
        tol = self.config.eigenstate_tol
        return CheckResult(
            "robust_realization", dip <= tol, dip, tol,
            {"plateau": plateau, "final_survival": float(series.survival[-1]), "steps": 500},
        )

    def check_common_eigenstates(self) -> CheckResult:
        ring = RingConfig(4)
        tol = self.config.eigenstate_tol
        robust = build_coin3(GROVER_RHO, 0.0)
        fragile = build_coin3(GROVER_RHO, np.pi)
        robust_reports = [
            common_eigenstate_check(stationary_states(ring, robust).raw_state(n), robust, ring, tol)
            for n in range(-ring.half_size + 1, ring.half_size - 1)
        ]
        fragile_report = common_eigenstate_check(
            stationary_states(ring, fragile).raw_state(0), fragile, ring, tol
        )
        if all(report.passes for report in robust_reports):
            beta_error = max(abs(report.beta - 1.0) for report in robust_reports)
        else:
            beta_error = np.inf
        passed = beta_error <= tol and "shift" in fragile_report.failures
        return CheckResult(
            "common_eigenstates", passed, float(beta_error), tol,
            {"alpha_pi_failures": fragile_report.failures},
        )

    def check_channel_forms(self) -> CheckResult:
        ring = RingConfig(2)
        coin = build_coin3(GROVER_RHO, np.pi)
        rng = np.random.default_rng(self.seed + 2)
        channel = PercolationChannel.exact(ring, coin, 0.35, self.config.exact_enumeration_max_edges)
        residual = 0.0
        contraction = True
        for _ in range(10):
            factor = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
            density = factor @ factor.conj().T
            density /= np.trace(density).real
            fast = channel.apply(density, FACTORIZED)
            slow = channel.apply(density, ENUMERATED)
            residual = max(residual, float(np.max(np.abs(fast - slow))))
            contraction = contraction and np.trace(fast).real <= 1.0 + 1e-12
        return CheckResult(
            "channel_forms", residual <= 1e-12 and contraction, residual, 1e-12,
            {"trace_contraction": contraction},
        )

    def check_full_transport_decay(self) -> CheckResult:
        ring = RingConfig(5)
        coin = build_coin3(GROVER_RHO, 0.0)
        series = evolve_survival(ring, coin, coin_eigenbasis(coin).sigma1_minus, 1000)
        fitted = fit_decay_rate(series, floor=self.config.survival_floor)
        predicted = predict_decay_rate(ring, coin, WalkKind.LAZY, trapped_tol=self.config.degeneracy_tol)
        relative = abs(fitted.gamma - predicted.gamma) / predicted.gamma
        return CheckResult(
            "full_transport_decay", relative <= 0.05 and fitted.r_squared > 0.999, relative, 0.05,
            {"fitted": fitted.gamma, "predicted": predicted.gamma, "r_squared": fitted.r_squared},
        )

    def check_fragile_decay(self) -> CheckResult:
        ring = RingConfig(5)
        coin = build_coin3(GROVER_RHO, np.pi)
        channel = PercolationChannel.exact(ring, coin, 0.5, self.config.exact_enumeration_max_edges)
        predicted = channel_decay_rate(
            channel,
            tol=self.config.norm_growth_tol,
            max_iterations=self.config.channel_max_iterations,
            patience=self.config.channel_patience,
        ).gamma
        steps = int(3.0 / predicted)
        series = averaged_survival(
            ring, coin, coin_eigenbasis(coin).sigma_plus, 0.5, steps, 1000, self.seed,
            workers=self.workers,
        )
        fitted = fit_decay_rate(series, floor=self.config.survival_floor)
        relative = abs(fitted.gamma - predicted) / predicted
        return CheckResult(
            "fragile_decay", relative <= 0.10, relative, 0.10,
            {"fitted": fitted.gamma, "predicted": predicted, "steps": steps, "realizations": 1000},
        )

    def check_channel_ensemble(self) -> CheckResult:
        ring = RingConfig(3)
        coin = build_coin3(GROVER_RHO, np.pi)
        psi_c = coin_eigenbasis(coin).sigma_plus
        n_realizations = 10_000
        channel = PercolationChannel.exact(ring, coin, 0.5, self.config.exact_enumeration_max_edges)
        exact = channel_survival(channel, psi_c, 50).survival
        sampled = averaged_survival(
            ring, coin, psi_c, 0.5, 50, n_realizations, self.seed, workers=self.workers
        ).survival
        bound = 3.0 * np.sqrt(np.clip(exact * (1.0 - exact), 0.0, None) / n_realizations) + 1e-12
        excess = float(np.max(np.abs(exact - sampled) - bound))
        return CheckResult(
            "channel_ensemble", excess <= 0.0, excess, 0.0, {"realizations": n_realizations, "sigmas": 3}
        )
