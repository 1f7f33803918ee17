"""
Gated optimal assignment on a cost matrix.

The optimum is taken in three stages: the most matches inside the gate, then
the lowest total cost, then the lexicographically lowest (row, col) pairs.
Callers order rows and columns by track id and detection index, so the last
stage is the tie-break on (track_id, detection index).
"""

from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

# Relative tolerance under which two totals count as the same optimum
TIE_TOLERANCE = 1e-9


class AssignmentResult(NamedTuple):
    matches: List[Tuple[int, int]]
    unmatched_rows: List[int]
    unmatched_cols: List[int]


def _solve(cost: np.ndarray, allowed: np.ndarray, forbidden: float) -> Tuple[int, float, Dict[int, int]]:
    """One Hungarian solve restricted to `allowed`; returns (matches, total cost, row -> col)."""
    padded = np.where(allowed, cost, forbidden)
    row_idx, col_idx = linear_sum_assignment(padded)
    pairs = {int(r): int(c) for r, c in zip(row_idx, col_idx) if allowed[r, c]}
    return len(pairs), float(sum(cost[r, c] for r, c in pairs.items())), pairs


def _restricted(allowed: np.ndarray, fixed: Dict[int, Optional[int]]) -> np.ndarray:
    """Admissible mask with the decided rows pinned to their column, or emptied when left unmatched."""
    mask = allowed.copy()
    for row, col in fixed.items():
        mask[row, :] = False
        if col is not None:
            mask[:, col] = False
            mask[row, col] = True
    return mask


def gated_assignment(cost: np.ndarray, gate: float) -> AssignmentResult:
    """
    Minimum-cost one-to-one assignment restricted to entries within the gate.

    Entries above the gate (or non-finite) are never matched. Among feasible
    solutions the number of matches is maximized first, then the total cost
    is minimized; remaining ties go to the lowest row, then the lowest column.

    Args:
        cost: (rows, cols) cost matrix
        gate: Largest admissible cost

    Returns:
        Matched (row, col) pairs sorted by row, and the unmatched indices
    """
    cost = np.asarray(cost, dtype=float)
    rows, cols = cost.shape if cost.ndim == 2 else (0, 0)
    if rows == 0 or cols == 0:
        return AssignmentResult([], list(range(rows)), list(range(cols)))

    admissible = np.isfinite(cost) & (cost <= gate)
    if not admissible.any():
        return AssignmentResult([], list(range(rows)), list(range(cols)))

    cost = np.where(admissible, cost, 0.0)
    forbidden = (abs(gate) + float(np.abs(cost).max()) + 1.0) * max(rows, cols) * 10.0
    best_count, best_total, current = _solve(cost, admissible, forbidden)
    tolerance = TIE_TOLERANCE * (1.0 + abs(best_total))

    # Row by row, pin the lowest column that still admits an optimal solution.
    fixed: Dict[int, Optional[int]] = {}
    for row in range(rows):
        taken = {c for c in fixed.values() if c is not None}
        chosen: Optional[int] = None
        for col in np.flatnonzero(admissible[row]):
            col = int(col)
            if col in taken:
                continue
            if current.get(row) == col:
                chosen = col
                break
            count, total, pairs = _solve(cost, _restricted(admissible, {**fixed, row: col}), forbidden)
            if count == best_count and total <= best_total + tolerance:
                chosen, current = col, pairs
                break
        fixed[row] = chosen

    matches = sorted((r, c) for r, c in fixed.items() if c is not None)
    matched_cols = {c for _, c in matches}
    return AssignmentResult(
        matches=matches,
        unmatched_rows=[r for r in range(rows) if fixed[r] is None],
        unmatched_cols=[c for c in range(cols) if c not in matched_cols],
    )
