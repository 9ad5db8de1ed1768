"""Discrete Sturm-Liouville problems: marching, closed-form representations,
spectra and growth estimates."""

__version__ = "0.1.0"
