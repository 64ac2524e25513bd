"""Spherical thin-plate pseudo-spline interpolation of band directivities.

The reproducing kernel is Wahba's pseudo-spline kernel built from

    q_k(z) = int_0^1 (1 - h)^k (1 - 2 h z + h^2)^(-1/2) dh,

with z the cosine of the angle between two directions.  Order 1 here is
the lowest-order member that is finite at zero distance, which uses the
closed form of q_2:

    q_2(z) = (A (12 W^2 - 4 W) - 6 C W + 6 W + 1) / 2,
    W = (1 - z) / 2,  A = ln(1 + 1/sqrt(W)),  C = 2 sqrt(W).

The kernel is (q_2(z) / 2! - 1 / 3!) / (2 pi).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import linalg

from .directivity import BandDirectivity
from .geometry import SphericalGrid

log = logging.getLogger(__name__)


def q2(z) -> np.ndarray:
    z = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
    w = (1.0 - z) / 2.0
    c = 2.0 * np.sqrt(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.log1p(1.0 / np.sqrt(w))
        aw = np.where(w > 0, a * (12.0 * w**2 - 4.0 * w), 0.0)
    return 0.5 * (aw - 6.0 * c * w + 6.0 * w + 1.0)


def spline_kernel(z, order: int = 1) -> np.ndarray:
    """Pseudo-spline reproducing kernel as a function of the cosine of the angle."""
    if order != 1:
        raise ValueError(f"spline order {order} not supported, only order 1")
    return (q2(z) / factorial(2) - 1.0 / factorial(3)) / (2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class SplineModel:
    """Fitted spline: ``coefficients[:Q]`` weight the kernels, ``coefficients[Q]`` is the constant.

    Several value sets may be fitted at once; coefficients then have shape
    (Q + 1, K).
    """

    nodes: SphericalGrid
    coefficients: np.ndarray
    smoothing: float = 0.0
    order: int = 1

    def kernel_weights(self) -> np.ndarray:
        return self.coefficients[:-1]

    def constant(self) -> np.ndarray:
        return self.coefficients[-1]


def _cosines(a: SphericalGrid, b: SphericalGrid) -> np.ndarray:
    return np.clip(a.unit_vectors() @ b.unit_vectors().T, -1.0, 1.0)


def fit_spline(values, grid: SphericalGrid, order: int = 1, smoothing: float = 0.0) -> SplineModel:
    """Solve the bordered kernel system for node values (Q or Q x K array).

    With ``smoothing`` zero the spline interpolates the nodes exactly; the
    kernel weights sum to zero.
    """
    values = np.asarray(values, dtype=float)
    q = len(grid)
    if q < 4:
        raise ValueError(f"need at least 4 nodes, got {q}")
    if values.shape[0] != q:
        raise ValueError(f"expected {q} node values, got {values.shape[0]}")
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    gram = spline_kernel(_cosines(grid, grid), order)
    system = np.zeros((q + 1, q + 1))
    system[:q, :q] = gram + smoothing * np.eye(q)
    system[:q, q] = 1.0
    system[q, :q] = 1.0
    rhs = np.zeros((q + 1,) + values.shape[1:])
    rhs[:q] = values
    try:
        lu = linalg.lu_factor(system, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise ValueError(f"spline system is singular: {exc}") from None
    if np.any(np.abs(np.diag(lu[0])) < 1e-14 * np.abs(system).max()):
        raise ValueError("spline system is singular (duplicate nodes?)")
    coef = linalg.lu_solve(lu, rhs)
    return SplineModel(grid, coef, float(smoothing), order)


def evaluate_spline(model: SplineModel, targets: SphericalGrid) -> np.ndarray:
    basis = spline_kernel(_cosines(targets, model.nodes), model.order)
    return basis @ model.kernel_weights() + model.constant()


@dataclass(frozen=True, eq=False)
class InterpolatedDirectivity:
    """Band pressures (R x bands) on a dense grid.

    ``state`` is inherited from the source directivity and updated by
    point/area equalization.
    """

    grid: SphericalGrid
    pressures: np.ndarray
    state: str
    band_centers: np.ndarray

    def __post_init__(self):
        if self.pressures.shape != (len(self.grid), self.band_centers.size):
            raise ValueError("pressure matrix does not match grid and bands")


def upsample(d: BandDirectivity, target: SphericalGrid, smoothing: float = 0.0, order: int = 1) -> InterpolatedDirectivity:
    """Interpolate every band's magnitudes onto ``target``; negative values clamp to zero."""
    if d.state not in ("diffuse", "calibrated"):
        raise ValueError(f"upsampling expects a diffuse or calibrated directivity, got {d.state!r}")
    model = fit_spline(d.pressures, d.grid, order, smoothing)
    values = evaluate_spline(model, target)
    negative = values < 0
    if negative.any():
        log.info("clamped %d negative interpolated values to zero", int(negative.sum()))
        values = np.where(negative, 0.0, values)
    # bands that were empty stay exactly empty
    values[:, ~d.effective_bands] = 0.0
    return InterpolatedDirectivity(target, values, d.state, d.band_centers.copy())
