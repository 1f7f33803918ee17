"""
Extended Kalman filter building blocks for the constant-velocity model.

States are (x, y, z, vx, vy, vz) in the global frame. Measurements are taken in
the sensor frame: position, optionally followed by the range rate.
"""

from typing import NamedTuple, Tuple

import numpy as np

_MIN_RANGE = 1e-6


class Innovation(NamedTuple):
    residual: np.ndarray
    covariance: np.ndarray
    jacobian: np.ndarray
    distance: float


def transition_matrix(dt: float) -> np.ndarray:
    transition = np.eye(6)
    transition[0:3, 3:6] = dt * np.eye(3)
    return transition


def process_noise(dt: float, acceleration_std: float) -> np.ndarray:
    """Discrete white-noise acceleration covariance."""
    q = acceleration_std ** 2
    block = np.array([
        [dt ** 4 / 4.0, dt ** 3 / 2.0],
        [dt ** 3 / 2.0, dt ** 2],
    ]) * q
    noise = np.zeros((6, 6))
    for axis in range(3):
        idx = [axis, axis + 3]
        noise[np.ix_(idx, idx)] = block
    return noise


def predict_state(
    state: np.ndarray,
    covariance: np.ndarray,
    dt: float,
    acceleration_std: float
) -> Tuple[np.ndarray, np.ndarray]:
    if dt == 0.0:
        return state.copy(), covariance.copy()
    transition = transition_matrix(dt)
    predicted = transition @ state
    predicted_cov = transition @ covariance @ transition.T + process_noise(dt, acceleration_std)
    return predicted, symmetrize(predicted_cov)


def measurement_model(
    state: np.ndarray,
    mount: np.ndarray,
    rotation: np.ndarray,
    with_range_rate: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predicted measurement and its Jacobian.

    Args:
        state: Global state 6-vector
        mount: Sensor position
        rotation: Sensor-to-global rotation
        with_range_rate: Append the range-rate component

    Returns:
        (h(x), H)
    """
    offset = state[0:3] - mount
    position = rotation.T @ offset
    if not with_range_rate:
        jacobian = np.zeros((3, 6))
        jacobian[:, 0:3] = rotation.T
        return position, jacobian

    velocity = state[3:6]
    rng = max(float(np.linalg.norm(offset)), _MIN_RANGE)
    unit = offset / rng
    range_rate = float(unit @ velocity)
    jacobian = np.zeros((4, 6))
    jacobian[0:3, 0:3] = rotation.T
    jacobian[3, 0:3] = (velocity - range_rate * unit) / rng
    jacobian[3, 3:6] = unit
    return np.append(position, range_rate), jacobian


def innovation(
    state: np.ndarray,
    covariance: np.ndarray,
    measurement: np.ndarray,
    noise: np.ndarray,
    mount: np.ndarray,
    rotation: np.ndarray
) -> Innovation:
    with_range_rate = len(measurement) == 4
    predicted, jacobian = measurement_model(state, mount, rotation, with_range_rate)
    residual = measurement - predicted
    residual_cov = symmetrize(jacobian @ covariance @ jacobian.T + noise)
    distance = float(residual @ np.linalg.solve(residual_cov, residual))
    return Innovation(residual, residual_cov, jacobian, distance)


def update_state(
    state: np.ndarray,
    covariance: np.ndarray,
    noise: np.ndarray,
    innov: Innovation
) -> Tuple[np.ndarray, np.ndarray]:
    """Kalman update with the Joseph-form covariance."""
    gain = np.linalg.solve(innov.covariance, innov.jacobian @ covariance).T
    updated = state + gain @ innov.residual
    correction = np.eye(6) - gain @ innov.jacobian
    updated_cov = correction @ covariance @ correction.T + gain @ noise @ gain.T
    return updated, symmetrize(updated_cov)


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0
