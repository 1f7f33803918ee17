"""
Collaborative model-based corrections applied to fused belief masses.

Each check returns a mass-conserving delta; apply_corrections sums them into
the mass and brings the result back onto the simplex.
"""

from typing import NamedTuple, Sequence

from src.models.schema import BeliefMass, Dimensions
from src.plausibility.limits import ValueLimits


class MassDelta(NamedTuple):
    exists: float = 0.0
    not_exists: float = 0.0
    unknown: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.exists == 0.0 and self.not_exists == 0.0 and self.unknown == 0.0


ZERO_DELTA = MassDelta()


def history_correction(m_now: BeliefMass, m_prev_exists: float, coasting: bool) -> MassDelta:
    """Belief in existence may not rise while no sensor updates the object."""
    if not coasting:
        return ZERO_DELTA
    rise = max(0.0, m_now.m_exists - m_prev_exists)
    if rise == 0.0:
        return ZERO_DELTA
    return MassDelta(exists=-rise, not_exists=0.0, unknown=rise)


def dim_vel_correction(
    m: BeliefMass,
    dims: Dimensions,
    speed: float,
    limits: ValueLimits
) -> MassDelta:
    """Small and fast objects are implausible: their existence mass becomes ignorance."""
    small = dims.width < limits.vru_length and dims.length < limits.vru_length
    if small and speed > limits.vru_speed and m.m_exists > 0.0:
        return MassDelta(exists=-m.m_exists, not_exists=0.0, unknown=m.m_exists)
    return ZERO_DELTA


def apply_corrections(m: BeliefMass, deltas: Sequence[MassDelta]) -> BeliefMass:
    """Add deltas, shift up by the most negative component, then renormalize to unit sum."""
    active = [delta for delta in deltas if not delta.is_zero]
    if not active:
        return m
    values = [
        m.m_exists + sum(d.exists for d in active),
        m.m_not_exists + sum(d.not_exists for d in active),
        m.m_unknown + sum(d.unknown for d in active),
    ]
    shift = max(0.0, -min(values))
    values = [value + shift for value in values]
    total = sum(values)
    return BeliefMass(
        m_exists=values[0] / total,
        m_not_exists=values[1] / total,
        m_unknown=values[2] / total,
    )
