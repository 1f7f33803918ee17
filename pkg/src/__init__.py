"""Object fusion plausibility toolkit - collaborative fusion, plausibility checks and fault diagnosis."""

__version__ = "1.0.0"
__description__ = "Deterministic multi-sensor object fusion simulator with Dempster-Shafer plausibility checking"
