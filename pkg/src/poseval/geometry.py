"""Numeric kernels: rigid superposition, centroids and fixed-radius pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError
from .structio.types import Structure


@dataclass(frozen=True, eq=False)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform equivalent to applying ``other`` first, then ``self``."""
        return RigidTransform(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def to_dict(self) -> dict:
        return {"rotation": self.rotation.tolist(), "translation": self.translation.tolist()}


class NeighborPair(NamedTuple):
    i: int
    j: int
    dist: float


def _as_points(points) -> np.ndarray:
    if isinstance(points, Structure):
        return points.coords
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise GeometryError(f"expected an (n, 3) point array, got shape {arr.shape}")
    return arr


def centroid(points) -> np.ndarray:
    pts = _as_points(points)
    if len(pts) == 0:
        raise GeometryError("centroid of an empty point set")
    return pts.mean(axis=0)


def kabsch(P, Q) -> tuple[RigidTransform, float]:
    """Rigid transform minimising RMSD of ``R @ p + t`` against ``Q``.

    The reflection case is corrected so that det(R) = +1.

    Raises:
        GeometryError: size mismatch, fewer than 3 points, or collinear input.
    """
    P, Q = _as_points(P), _as_points(Q)
    if len(P) != len(Q):
        raise GeometryError(f"point sets differ in size: {len(P)} vs {len(Q)}")
    if len(P) < 3:
        raise GeometryError("superposition needs at least 3 points")
    cp, cq = P.mean(axis=0), Q.mean(axis=0)
    P0, Q0 = P - cp, Q - cq
    for pts in (P0, Q0):
        s = np.linalg.svd(pts, compute_uv=False)
        if s[0] == 0.0 or s[1] <= 1e-8 * max(1.0, s[0]):
            raise GeometryError("degenerate (collinear or coincident) point set")
    H = P0.T @ Q0
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    t = cq - R @ cp
    transform = RigidTransform(R, t)
    moved = transform.apply(P)
    rmsd = float(np.sqrt(np.mean(np.sum((moved - Q) ** 2, axis=1))))
    return transform, rmsd


def _pair_arrays(coords: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(coords) < 2:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0)
    # widen the tree query slightly, then filter with our own distances
    pairs = cKDTree(coords).query_pairs(radius * (1 + 1e-9) + 1e-12, output_type="ndarray")
    if len(pairs) == 0:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0)
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.sqrt(np.sum((coords[i] - coords[j]) ** 2, axis=1))
    keep = d <= radius
    i, j, d = i[keep], j[keep], d[keep]
    order = np.lexsort((j, i))
    return i[order], j[order], d[order]


def neighbor_pair_arrays(points, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised form of ``neighbor_pairs``: (i, j, dist) arrays, i < j, sorted."""
    if radius <= 0:
        raise GeometryError("radius must be positive")
    return _pair_arrays(_as_points(points), radius)


def neighbor_pairs(atoms, radius: float) -> list[NeighborPair]:
    """All pairs with distance <= ``radius``, ascending (i, j) with i < j."""
    i, j, d = neighbor_pair_arrays(atoms, radius)
    return [NeighborPair(int(a), int(b), float(c)) for a, b, c in zip(i, j, d)]


def cross_pairs(A, B, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pairs (a in A, b in B) with distance <= ``radius``, sorted by (a, b)."""
    A, B = _as_points(A), _as_points(B)
    if len(A) == 0 or len(B) == 0:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0)
    hits = cKDTree(B).query_ball_point(A, radius * (1 + 1e-9) + 1e-12)
    ia = np.array([a for a, js in enumerate(hits) for _ in js], dtype=int)
    ib = np.array([b for js in hits for b in js], dtype=int)
    if len(ia) == 0:
        return ia, ib, np.zeros(0)
    d = np.sqrt(np.sum((A[ia] - B[ib]) ** 2, axis=1))
    keep = d <= radius
    ia, ib, d = ia[keep], ib[keep], d[keep]
    order = np.lexsort((ib, ia))
    return ia[order], ib[order], d[order]


def min_cross_distance(A, B) -> float:
    A, B = _as_points(A), _as_points(B)
    if len(A) == 0 or len(B) == 0:
        return float("inf")
    d, _ = cKDTree(B).query(A)
    return float(np.min(d))
