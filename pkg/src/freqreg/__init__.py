"""Regularization measures and iterated-learning dynamics for frequency-learning data."""

__version__ = "0.1.0"
