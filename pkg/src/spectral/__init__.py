"""Spectral analysis and decay-rate estimation."""

from src.spectral.analyzer import (
    channel_decay_rate,
    dense_spectrum,
    eigenvalue_multiplicity,
    leading_moduli,
    norm_growth_radius,
    predict_decay_rate,
    sub_leading_modulus,
)
from src.spectral.fitting import default_fit_window, fit_decay_rate, fit_loglinear

__all__ = [
    'channel_decay_rate',
    'dense_spectrum',
    'eigenvalue_multiplicity',
    'leading_moduli',
    'norm_growth_radius',
    'predict_decay_rate',
    'sub_leading_modulus',
    'default_fit_window',
    'fit_decay_rate',
    'fit_loglinear',
]
