"""Strong-to-weak symmetry breaking in decohered states, their purifications,
and classical statistical-mechanics cross-checks."""

__version__ = "0.1.0"
