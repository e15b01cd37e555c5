"""Independent reference computations used to pin expected values in tests.

Everything here deliberately avoids the closed-form element formulas in the
package: barycentric bases are recovered by solving small linear systems and
integrals use explicit Gauss rules, so agreement with the package is a real
cross-check rather than the same code evaluated twice.
"""

from __future__ import annotations

import numpy as np

# Midpoint rule on the three edges: exact for quadratics on a triangle.
_TRI_POINTS = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_TRI_WEIGHTS = np.array([1.0, 1.0, 1.0]) / 3.0

# Two-point Gauss on [0, 1]: exact for cubics.
_SEG_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_SEG_WEIGHTS = np.array([0.5, 0.5])


def barycentric_coefficients(coords: np.ndarray) -> np.ndarray:
    """Affine coefficients of the nodal basis on one cell.

    Row i holds (a_i, b_i[, c_i]) with basis_i(x) = a_i + b_i x (+ c_i y),
    found by solving basis_i(vertex_j) = delta_ij.
    """
    n = coords.shape[0]
    A = np.column_stack([np.ones(n), coords])
    return np.linalg.solve(A, np.eye(n)).T


def mass_oracle(coords: np.ndarray) -> np.ndarray:
    """Element mass matrix by Gauss quadrature of basis products."""
    coeff = barycentric_coefficients(coords)
    if coords.shape[1] == 1:
        a, b = coords[0, 0], coords[1, 0]
        pts = a + (b - a) * _SEG_POINTS
        weights = np.abs(b - a) * _SEG_WEIGHTS
        vals = coeff[:, 0][:, None] + coeff[:, 1][:, None] * pts[None, :]
    else:
        area = abs(_signed_area(coords))
        pts = _TRI_POINTS @ coords  # quadrature points in physical space
        weights = area * _TRI_WEIGHTS
        vals = (
            coeff[:, 0][:, None]
            + coeff[:, 1][:, None] * pts[:, 0][None, :]
            + coeff[:, 2][:, None] * pts[:, 1][None, :]
        )
    return (vals * weights[None, :]) @ vals.T


def stiffness_oracle(coords: np.ndarray) -> np.ndarray:
    """Element stiffness matrix from the basis gradients (constants)."""
    coeff = barycentric_coefficients(coords)
    grads = coeff[:, 1:]
    if coords.shape[1] == 1:
        measure = abs(coords[1, 0] - coords[0, 0])
    else:
        measure = abs(_signed_area(coords))
    return measure * (grads @ grads.T)


def _signed_area(coords: np.ndarray) -> float:
    d1 = coords[1] - coords[0]
    d2 = coords[2] - coords[0]
    return 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])


def random_triangle(rng: np.random.Generator, min_area: float = 0.05) -> np.ndarray:
    """Random triangle in [0, 1]^2 with area bounded away from zero."""
    while True:
        coords = rng.uniform(0.0, 1.0, size=(3, 2))
        area = _signed_area(coords)
        if abs(area) >= min_area:
            if area < 0:
                coords = coords[[0, 2, 1]]
            return coords


def random_segment(rng: np.random.Generator, min_length: float = 0.05) -> np.ndarray:
    """Random positively oriented segment in [0, 1]."""
    while True:
        a, b = np.sort(rng.uniform(0.0, 1.0, size=2))
        if b - a >= min_length:
            return np.array([[a], [b]])


def fd_time_derivative(fn, t: float, order: int, delta: float = 0.01) -> float:
    """6th-order central difference of a scalar function of time."""
    if order == 1:
        w = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
        scale = delta
    elif order == 2:
        w = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
        scale = delta * delta
    else:
        raise ValueError(order)
    offsets = np.arange(-3, 4)
    return sum(wi * fn(t + oi * delta) for wi, oi in zip(w, offsets)) / scale


def fd_laplacian(fn, point: np.ndarray, delta: float = 0.01) -> float:
    """6th-order central difference Laplacian of a scalar field."""
    w = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
    offsets = np.arange(-3, 4)
    total = 0.0
    for axis in range(point.size):
        for wi, oi in zip(w, offsets):
            shifted = point.copy()
            shifted[axis] += oi * delta
            total += wi * fn(shifted)
    return total / (delta * delta)
