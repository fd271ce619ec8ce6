"""CSP Refuter - random k-CSPs, t-wise independent values and spectral refutation."""

__version__ = "0.1.0"
