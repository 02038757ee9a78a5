"""Coverage-guided selection and prioritization of road-scenario regression tests."""

__version__ = "0.1.0"
