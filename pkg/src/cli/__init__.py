"""Command-line front end: specs, commands, verification and output."""

from src.cli.commands import (
    cmd_efficiency,
    cmd_percolate,
    cmd_simulate,
    cmd_spectral,
    cmd_sweep,
    cmd_verify,
)
from src.cli.specs import ExperimentSpec, SweepSpec
from src.cli.verification import CheckResult, VerificationSuite

__all__ = [
    'cmd_efficiency',
    'cmd_percolate',
    'cmd_simulate',
    'cmd_spectral',
    'cmd_sweep',
    'cmd_verify',
    'ExperimentSpec',
    'SweepSpec',
    'CheckResult',
    'VerificationSuite',
]
