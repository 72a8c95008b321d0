"""Strategic test allocation with Gaussian attributes."""

__version__ = "0.1.0"
