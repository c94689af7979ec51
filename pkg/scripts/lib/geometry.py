"""Geodesics and signed areas on the Poincare sphere and on the hyperboloid H+."""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DomainError
from jones import PointLike, PoincarePoint, unit_vector
from lorentz import FourVelocity, VelocityLike, _velocity, minkowski_dot, rapidity_between

logger = logging.getLogger(__name__)

ANTIPODAL_TOLERANCE = 1e-12
FOUR_PI = 4.0 * math.pi


class SphericalPolyline(BaseModel):
    """Ordered vertices on S^2 joined by minor great-circle arcs."""

    model_config = ConfigDict(frozen=True)

    vertices: list[PoincarePoint] = Field(default_factory=list, description="Ordered vertices")
    closed: bool = Field(default=False, description="Whether the last vertex joins back to the first")

    @model_validator(mode="after")
    def check_edges(self) -> "SphericalPolyline":
        pts = [v.vector for v in self.vertices]
        pairs = list(zip(pts, pts[1:]))
        if self.closed and len(pts) > 1:
            pairs.append((pts[-1], pts[0]))
        for a, b in pairs:
            if np.linalg.norm(a + b) < ANTIPODAL_TOLERANCE:
                raise ValueError("Consecutive vertices are antipodal; the joining geodesic is not unique")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.array([v.s for v in self.vertices], dtype=float).reshape(-1, 3)

    def reversed(self) -> "SphericalPolyline":
        return SphericalPolyline(vertices=list(reversed(self.vertices)), closed=self.closed)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "vertices": [list(v.s) for v in self.vertices],
            "closed": self.closed,
        }


class HyperbolicPolyline(BaseModel):
    """Ordered four-velocities joined by hyperbolic geodesics."""

    model_config = ConfigDict(frozen=True)

    vertices: list[FourVelocity] = Field(default_factory=list, description="Ordered vertices on H+")
    closed: bool = Field(default=True, description="Whether the last vertex joins back to the first")

    @property
    def array(self) -> np.ndarray:
        return np.array([v.u for v in self.vertices], dtype=float).reshape(-1, 4)

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Consecutive vertex pairs in traversal order, including the closing edge."""
        pts = list(self.array)
        pairs = list(zip(pts, pts[1:]))
        if self.closed and len(pts) > 1:
            pairs.append((pts[-1], pts[0]))
        return pairs

    def rotated(self, start: int) -> "HyperbolicPolyline":
        """Same cyclic loop starting at another vertex."""
        k = start % len(self.vertices)
        return HyperbolicPolyline(vertices=self.vertices[k:] + self.vertices[:k], closed=self.closed)

    def reversed(self) -> "HyperbolicPolyline":
        """Same loop traversed backward from the same base vertex."""
        return HyperbolicPolyline(vertices=self.vertices[:1] + self.vertices[:0:-1], closed=self.closed)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "vertices": [list(v.u) for v in self.vertices],
            "closed": self.closed,
        }


def arc_angle(a: PointLike, b: PointLike) -> float:
    """Great-circle distance between two sphere points."""
    a, b = unit_vector(a), unit_vector(b)
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


def great_circle_point(a: PointLike, b: PointLike, t: float) -> PoincarePoint:
    """Spherical linear interpolation from a (t = 0) to b (t = 1)."""
    a, b = unit_vector(a), unit_vector(b)
    if np.linalg.norm(a + b) < ANTIPODAL_TOLERANCE:
        raise DomainError("Antipodal points have no unique great circle")
    omega = math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))
    if omega == 0.0:
        return PoincarePoint.from_vector(a)
    out = (math.sin((1.0 - t) * omega) * a + math.sin(t * omega) * b) / math.sin(omega)
    return PoincarePoint.from_vector(out)


def _triangle_solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    triple = float(np.dot(a, np.cross(b, c)))
    if triple == 0.0:
        return 0.0
    denom = 1.0 + float(np.dot(a, b) + np.dot(b, c) + np.dot(c, a))
    if denom <= 0.0 and abs(triple) < 1e-15:
        # Three points on one great circle spanning more than a half circle
        return 0.0
    return 2.0 * math.atan2(triple, denom)


def solid_angle_triangle(a: PointLike, b: PointLike, c: PointLike) -> float:
    """Signed solid angle of the geodesic triangle abc; counterclockwise seen from outside is positive."""
    return _triangle_solid_angle(unit_vector(a), unit_vector(b), unit_vector(c))


def interior_angle_excess(a: PointLike, b: PointLike, c: PointLike) -> float:
    """Spherical excess from interior angles, signed by orientation."""
    pts = [unit_vector(a), unit_vector(b), unit_vector(c)]
    total = 0.0
    for k in range(3):
        p, q, r = pts[k], pts[(k + 1) % 3], pts[(k + 2) % 3]
        tq = q - np.dot(q, p) * p
        tr = r - np.dot(r, p) * p
        total += math.atan2(float(np.linalg.norm(np.cross(tq, tr))), float(np.dot(tq, tr)))
    excess = total - math.pi
    return math.copysign(excess, float(np.dot(pts[0], np.cross(pts[1], pts[2]))))


def reduce_solid_angle(omega: float) -> float:
    """Map a solid angle into (-2 pi, 2 pi]."""
    y = math.fmod(omega, FOUR_PI)
    if y > 2.0 * math.pi:
        y -= FOUR_PI
    elif y <= -2.0 * math.pi:
        y += FOUR_PI
    return y


def _distinct(pts: np.ndarray) -> np.ndarray:
    keep = [pts[0]]
    for p in pts[1:]:
        if np.linalg.norm(p - keep[-1]) > 1e-14:
            keep.append(p)
    if len(keep) > 1 and np.linalg.norm(keep[-1] - keep[0]) <= 1e-14:
        keep.pop()
    return np.array(keep)


def solid_angle_polyline(p: SphericalPolyline, root: Optional[int] = None) -> float:
    """Signed solid angle enclosed by a closed geodesic polygon.

    With root given, fans from that vertex. Otherwise fans from the normalized
    Newell normal, which stays valid when some vertex is antipodal to another.
    """
    if not p.closed:
        raise DomainError("Solid angle needs a closed polyline")
    if not p.vertices:
        return 0.0
    pts = _distinct(p.array)
    n = len(pts)
    if n < 3:
        return 0.0

    if root is not None:
        apex = pts[root % n]
    else:
        newell = sum(np.cross(pts[i], pts[(i + 1) % n]) for i in range(n))
        norm = float(np.linalg.norm(newell))
        apex = newell / norm if norm > 1e-12 else pts[0]
    logger.debug(f"Solid angle fan apex {apex.tolist()} over {n} vertices")

    total = 0.0
    for i in range(n):
        total += _triangle_solid_angle(apex, pts[i], pts[(i + 1) % n])
    return reduce_solid_angle(total)


def reflect(p: PointLike, normal: PointLike) -> PoincarePoint:
    """Mirror image of p in the plane with the given unit normal."""
    v, n = unit_vector(p), unit_vector(normal)
    return PoincarePoint.from_vector(v - 2.0 * np.dot(v, n) * n)


def _geodesic_parts(u: np.ndarray, w: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Rapidity zeta, the tangent w - (u.w) u, and sinh(zeta)."""
    c = minkowski_dot(u, w)
    zeta = rapidity_between(u, w)
    d = w - c * u
    return zeta, d, math.sinh(zeta)


def geodesic_samples(u: VelocityLike, w: VelocityLike, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Points and d/dt tangents of the geodesic u -> w at parameters ts, shape (len(ts), 4)."""
    u, w = _velocity(u), _velocity(w)
    ts = np.asarray(ts, dtype=float)
    zeta, d, sh = _geodesic_parts(u, w)
    if zeta == 0.0 or sh == 0.0:
        return np.tile(u, (len(ts), 1)), np.zeros((len(ts), 4))
    ch_t = np.cosh(ts * zeta)[:, None]
    sh_t = np.sinh(ts * zeta)[:, None]
    points = ch_t * u + (sh_t / sh) * d
    tangents = zeta * sh_t * u + (zeta * ch_t / sh) * d
    return points, tangents


def hyperbolic_geodesic_point(u: VelocityLike, w: VelocityLike, t: float) -> FourVelocity:
    """Point at fraction t of the rapidity along the H+ geodesic from u to w."""
    points, _ = geodesic_samples(u, w, np.array([t]))
    return FourVelocity(u=tuple(float(c) for c in points[0]))


def hyperbolic_geodesic_tangent(u: VelocityLike, w: VelocityLike, t: float) -> np.ndarray:
    """Analytic d/dt of hyperbolic_geodesic_point."""
    _, tangents = geodesic_samples(u, w, np.array([t]))
    return tangents[0]


def is_coplanar_h(points: Sequence[VelocityLike], tol: float) -> bool:
    """True iff the four-velocities lie on one totally geodesic plane of H+.

    Equivalently their Gram matrix has numerical rank <= 3.
    """
    if len(points) < 3:
        raise DomainError("Coplanarity needs at least three points")
    M = np.array([_velocity(p) for p in points])
    if len(M) < 4:
        return True
    sv = np.linalg.svd(M, compute_uv=False)
    return bool(sv[3] <= tol * sv[0])
