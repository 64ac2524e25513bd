"""Spherical coordinates, sampling grids and quadrature weights.

Convention: azimuth is measured in degrees from the positive x-axis towards
the positive y-axis, colatitude in degrees from the positive z-axis, radius in
metres.  The musician faces the positive x-axis.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, SphericalVoronoi, cKDTree

WEIGHT_SUM_TOL = 1e-12
_SAME_DIRECTION_TOL = 1e-9


@dataclass(frozen=True)
class SphericalPoint:
    azimuth: float
    colatitude: float
    radius: float = 1.0

    def __post_init__(self):
        az = float(self.azimuth) % 360.0
        col = float(self.colatitude)
        if not 0.0 <= col <= 180.0:
            raise ValueError(f"colatitude {col} outside [0, 180]")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if col == 0.0 or col == 180.0:
            az = 0.0
        object.__setattr__(self, "azimuth", az)
        object.__setattr__(self, "colatitude", col)
        object.__setattr__(self, "radius", float(self.radius))

    def unit_vector(self) -> np.ndarray:
        return to_cartesian(self.azimuth, self.colatitude)


def to_cartesian(azimuth, colatitude, radius=1.0) -> np.ndarray:
    """Degrees to Cartesian coordinates, stacked on the last axis."""
    az = np.deg2rad(np.asarray(azimuth, dtype=float))
    col = np.deg2rad(np.asarray(colatitude, dtype=float))
    r = np.asarray(radius, dtype=float)
    return np.stack(
        [r * np.sin(col) * np.cos(az), r * np.sin(col) * np.sin(az), r * np.cos(col) * np.ones_like(az)],
        axis=-1,
    )


def to_spherical(xyz) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cartesian coordinates to (azimuth deg, colatitude deg, radius)."""
    xyz = np.asarray(xyz, dtype=float)
    r = np.linalg.norm(xyz, axis=-1)
    col = np.rad2deg(np.arccos(np.clip(xyz[..., 2] / r, -1.0, 1.0)))
    az = np.rad2deg(np.arctan2(xyz[..., 1], xyz[..., 0])) % 360.0
    az = np.where((col == 0.0) | (col == 180.0), 0.0, az)
    return az, col, r


def central_angle(a: SphericalPoint, b: SphericalPoint) -> float:
    """Great-circle angle between two directions in radians."""
    return float(central_angles(a.unit_vector()[None], b.unit_vector()[None])[0, 0])


def central_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pairwise great-circle angles between rows of two unit-vector arrays.

    Uses atan2 of cross and dot products, which stays accurate near 0 and pi.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dot = u @ v.T
    cross = np.linalg.norm(np.cross(u[:, None, :], v[None, :, :]), axis=-1)
    return np.arctan2(cross, dot)


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Directions on a sphere with normalized quadrature (area) weights.

    Arrays are stored column-wise; ``points`` gives the per-point view.
    """

    azimuth: np.ndarray
    colatitude: np.ndarray
    radius: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        az = np.asarray(self.azimuth, dtype=float) % 360.0
        col = np.asarray(self.colatitude, dtype=float)
        r = np.broadcast_to(np.asarray(self.radius, dtype=float), az.shape).copy()
        w = np.asarray(self.weights, dtype=float)
        if not (az.ndim == 1 and az.shape == col.shape == w.shape):
            raise ValueError("azimuth, colatitude and weights must be 1-D arrays of equal length")
        if az.size == 0:
            raise ValueError("empty grid")
        if np.any((col < 0) | (col > 180)):
            raise ValueError("colatitude outside [0, 180]")
        if np.any(r <= 0):
            raise ValueError("radius must be positive")
        if np.any(w <= 0):
            raise ValueError("all weights must be positive")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        az = np.where((col == 0.0) | (col == 180.0), 0.0, az)
        for name, arr in (("azimuth", az), ("colatitude", col), ("radius", r), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if _has_duplicates(self.unit_vectors()):
            raise ValueError("grid contains duplicate directions")

    @classmethod
    def from_points(cls, points: Sequence[SphericalPoint], weights=None) -> "SphericalGrid":
        az = np.array([p.azimuth for p in points])
        col = np.array([p.colatitude for p in points])
        r = np.array([p.radius for p in points])
        if weights is None:
            weights = area_weights(points)
        return cls(az, col, r, np.asarray(weights, dtype=float))

    def __len__(self) -> int:
        return self.azimuth.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SphericalGrid):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("azimuth", "colatitude", "radius", "weights")
        )

    @property
    def points(self) -> list[SphericalPoint]:
        return [
            SphericalPoint(a, c, r)
            for a, c, r in zip(self.azimuth.tolist(), self.colatitude.tolist(), self.radius.tolist())
        ]

    def unit_vectors(self) -> np.ndarray:
        return to_cartesian(self.azimuth, self.colatitude)

    def index_of(self, point: SphericalPoint, tol: float = _SAME_DIRECTION_TOL) -> int:
        """Index of the grid direction coinciding with ``point``.

        Raises ``KeyError`` if no grid point lies within ``tol`` radians.
        """
        ang = central_angles(point.unit_vector()[None], self.unit_vectors())[0]
        i = int(np.argmin(ang))
        if ang[i] > tol:
            raise KeyError(f"{point} is not a grid direction (nearest is {np.rad2deg(ang[i]):.4g} deg away)")
        return i

    def subset(self, mask) -> "SphericalGrid":
        """Grid restricted to ``mask`` (bool array or indices), weights renormalized."""
        idx = np.arange(len(self))[mask]
        if idx.size == 0:
            raise ValueError("empty subset")
        w = self.weights[idx]
        return SphericalGrid(self.azimuth[idx], self.colatitude[idx], self.radius[idx], w / w.sum())

    def to_table(self) -> str:
        """Plain-text table: one ``azimuth colatitude radius weight`` row per point."""
        buf = io.StringIO()
        buf.write("# azimuth_deg colatitude_deg radius_m weight\n")
        for row in zip(self.azimuth, self.colatitude, self.radius, self.weights):
            buf.write(" ".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_table(cls, text: str) -> "SphericalGrid":
        rows = [
            line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")
        ]
        data = np.array(rows, dtype=float).reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def _has_duplicates(xyz: np.ndarray) -> bool:
    return bool(cKDTree(xyz).query_pairs(_SAME_DIRECTION_TOL))


def area_weights(points: Iterable[SphericalPoint]) -> np.ndarray:
    """Normalized spherical Voronoi cell areas of a set of directions.

    At least four directions not all lying in one plane are required.
    """
    points = list(points)
    if len(points) < 4:
        raise ValueError(f"need at least 4 points, got {len(points)}")
    xyz = np.array([p.unit_vector() for p in points])
    centered = xyz - xyz.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[2] < 1e-9 * max(sv[0], 1.0):
        raise ValueError("degenerate point set: all directions lie in one plane (e.g. on a single circle)")
    if _has_duplicates(xyz):
        raise ValueError("duplicate directions in point set")
    areas = SphericalVoronoi(xyz, radius=1.0, center=np.zeros(3)).calculate_areas()
    return areas / areas.sum()


def make_equiangular_grid(step_deg: float, radius: float = 1.0) -> SphericalGrid:
    """Equiangular grid in azimuth and colatitude with collapsed poles.

    Rings are ordered from the north pole (colatitude 0) to the south pole;
    within a ring azimuth increases from 0.  Weights are exact ring-band
    areas split evenly over the ring.
    """
    step = float(step_deg)
    valid = [d for d in range(1, 181) if 180 % d == 0]
    n_az = 360.0 / step if step > 0 else 0.0
    n_col = 180.0 / step if step > 0 else 0.0
    if step <= 0 or not (n_az.is_integer() and n_col.is_integer()):
        raise ValueError(f"step {step_deg} deg must divide 360 and 180 evenly; integer choices: {valid}")
    n_az, n_col = int(n_az), int(n_col)

    ring_col = step * np.arange(1, n_col)
    ring_az = step * np.arange(n_az)
    half = np.deg2rad(step / 2)
    cap = (1.0 - np.cos(half)) / 2.0
    band = (np.cos(np.deg2rad(ring_col) - half) - np.cos(np.deg2rad(ring_col) + half)) / 2.0

    az = np.concatenate([[0.0], np.tile(ring_az, ring_col.size), [0.0]])
    col = np.concatenate([[0.0], np.repeat(ring_col, n_az), [180.0]])
    w = np.concatenate([[cap], np.repeat(band / n_az, n_az), [cap]])
    return SphericalGrid(az, col, np.full(az.shape, float(radius)), w / w.sum())


def equiangular_step(grid: SphericalGrid) -> float | None:
    """Step of an equiangular grid as produced by ``make_equiangular_grid``, else None."""
    n = len(grid)
    for step in (d for d in np.arange(1, 181) if 180 % d == 0):
        if (180 // step - 1) * (360 // step) + 2 == n:
            ref = make_equiangular_grid(float(step))
            if np.allclose(grid.azimuth, ref.azimuth) and np.allclose(grid.colatitude, ref.colatitude):
                return float(step)
            return None
    return None


def pentakis_dodecahedron(radius: float = 1.05) -> SphericalGrid:
    """32-point layout at the vertices of a pentakis dodecahedron.

    Twelve icosahedron vertices plus the twenty face centres (dodecahedron
    vertices).  The default radius matches a 2.1 m array diameter.
    """
    phi = (1 + 5**0.5) / 2
    ico = []
    for a in (-1, 1):
        for b in (-phi, phi):
            ico += [(0, a, b), (a, b, 0), (b, 0, a)]
    ico = np.array(ico, dtype=float)
    hull = ConvexHull(ico)
    centres = ico[hull.simplices].mean(axis=1)
    # stable ordering of the face centres
    centres = centres[np.lexsort(np.round(centres.T[::-1], 12))]
    xyz = np.vstack([ico, centres])
    xyz /= np.linalg.norm(xyz, axis=1, keepdims=True)
    az, col, _ = to_spherical(xyz)
    points = [SphericalPoint(a, c, radius) for a, c in zip(az, col)]
    return SphericalGrid.from_points(points)


def spherical_cap(grid: SphericalGrid, center: SphericalPoint, half_angle_deg: float) -> SphericalGrid:
    """Directions of ``grid`` within ``half_angle_deg`` of ``center``, weights renormalized."""
    ang = central_angles(center.unit_vector()[None], grid.unit_vectors())[0]
    return grid.subset(ang <= np.deg2rad(half_angle_deg) + 1e-12)


def rotation_matrix(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """Intrinsic z-y-x rotation, angles in radians."""
    cz, sz = np.cos(yaw), np.sin(yaw)
    cy, sy = np.cos(pitch), np.sin(pitch)
    cx, sx = np.cos(roll), np.sin(roll)
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    return rz @ ry @ rx


def rotate_points(points: Sequence[SphericalPoint], matrix: np.ndarray) -> list[SphericalPoint]:
    xyz = np.array([p.unit_vector() for p in points]) @ np.asarray(matrix).T
    az, col, _ = to_spherical(xyz)
    return [SphericalPoint(a, c, p.radius) for a, c, p in zip(az, col, points)]
