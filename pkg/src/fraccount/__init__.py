"""Tempered space-fractional Poisson / negative binomial processes and a common-shock ruin model."""

__version__ = "0.1.0"
REPORT_SCHEMA = "frac-count/1"
