"""Graph powering and spectral community detection on sparse graphs."""

__version__ = "0.1.0"
