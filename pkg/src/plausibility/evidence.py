"""Dempster-Shafer combination and the pignistic transform on {exists, not exists, unknown}."""

from typing import Iterable, Tuple

from src.exceptions import TotalConflictError
from src.models.schema import BeliefMass

CONFLICT_TOLERANCE = 1e-12


def ds_combine(a: BeliefMass, b: BeliefMass) -> BeliefMass:
    """
    Dempster's rule of combination.

    Raises:
        TotalConflictError: The sources fully contradict each other
    """
    conflict = a.m_exists * b.m_not_exists + a.m_not_exists * b.m_exists
    normalizer = 1.0 - conflict
    if normalizer <= CONFLICT_TOLERANCE:
        raise TotalConflictError(f"total conflict between {a.to_array()} and {b.to_array()}")

    m_exists = a.m_exists * b.m_exists + a.m_exists * b.m_unknown + a.m_unknown * b.m_exists
    m_not_exists = (
        a.m_not_exists * b.m_not_exists + a.m_not_exists * b.m_unknown + a.m_unknown * b.m_not_exists
    )
    m_unknown = a.m_unknown * b.m_unknown
    return BeliefMass(
        m_exists=m_exists / normalizer,
        m_not_exists=m_not_exists / normalizer,
        m_unknown=m_unknown / normalizer,
    )


def combine_all(masses: Iterable[BeliefMass]) -> BeliefMass:
    """Left fold of ds_combine starting from the vacuous mass."""
    fused = BeliefMass.vacuous()
    for mass in masses:
        if mass.is_vacuous:
            continue
        fused = ds_combine(fused, mass)
    return fused


def pignistic(mass: BeliefMass) -> Tuple[float, float]:
    """Existence probability and its half-width: (m_exists + m_unknown/2, m_unknown/2)."""
    half_unknown = mass.m_unknown / 2.0
    return mass.m_exists + half_unknown, half_unknown
