"""secrecy-region - Secrecy capacity regions of parallel and fading Gaussian BCCs."""

__version__ = "0.1.0"
