"""Plausibility calculus: BBA factors, Dempster-Shafer combination and model-based corrections."""

from src.plausibility.corrections import MassDelta, apply_corrections, dim_vel_correction, history_correction
from src.plausibility.evidence import combine_all, ds_combine, pignistic
from src.plausibility.factors import (
    BbaFactors,
    SigmoidCalib,
    calibrate_sigmoid,
    compute_bba,
    p_dm_factor,
    p_ex_factor,
    p_fov_factor,
    p_occ_factor,
    p_val_factor,
)
from src.plausibility.limits import ValueLimits
from src.plausibility.redundancy import Contribution, ContributionKind, classify_contribution

__all__ = [
    'BbaFactors',
    'Contribution',
    'ContributionKind',
    'MassDelta',
    'SigmoidCalib',
    'ValueLimits',
    'apply_corrections',
    'calibrate_sigmoid',
    'classify_contribution',
    'combine_all',
    'compute_bba',
    'dim_vel_correction',
    'ds_combine',
    'history_correction',
    'p_dm_factor',
    'p_ex_factor',
    'p_fov_factor',
    'p_occ_factor',
    'p_val_factor',
    'pignistic',
]
