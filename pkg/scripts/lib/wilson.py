"""Thomas-precession gauge field on H+ and its path-ordered Wilson loop.

The frame rotation carried along a path u(t) obeys R' = A R, so the ordered
product multiplies later steps on the left. Along a geodesic segment every
A(t) shares one rotation axis, which makes midpoint sampling second order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config import DEFAULT_WILSON_STEPS
from errors import ClosureError, DomainError
from geometry import HyperbolicPolyline, geodesic_samples
from lorentz import (
    REST,
    LorentzMatrix,
    RotationResult,
    VelocityLike,
    _velocity,
    minkowski_dot,
    polar_decompose,
    pure_boost_between,
    residual_rapidity,
    rotation_axis_angle,
)

logger = logging.getLogger(__name__)

TANGENT_TOLERANCE = 1e-9
CLOSURE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class GaugeValue:
    """so(3) value of the connection for a unit step in the path parameter."""

    a: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.a, dtype=float).reshape(3, 3)
        assert np.array_equal(arr, -arr.T), "gauge value must be antisymmetric"
        object.__setattr__(self, "a", arr)

    @property
    def vector(self) -> np.ndarray:
        """Angular velocity w with a = [w]x."""
        return np.array([self.a[2, 1], self.a[0, 2], self.a[1, 0]])


def _gauge_batch(points: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """A_ij = (u_i du_j - du_i u_j) / (1 + u0) for arrays of shape (N, 4)."""
    u, du = points[:, 1:], tangents[:, 1:]
    wedge = np.einsum("ni,nj->nij", u, du)
    return (wedge - np.transpose(wedge, (0, 2, 1))) / (1.0 + points[:, 0])[:, None, None]


def gauge_field(u: VelocityLike, du: Sequence[float]) -> GaugeValue:
    """Thomas-precession connection at u in the direction du."""
    u = _velocity(u)
    du = np.asarray(du, dtype=float).reshape(4)
    scale = max(1.0, float(np.linalg.norm(du)) * u[0])
    if abs(minkowski_dot(u, du)) > TANGENT_TOLERANCE * scale:
        raise DomainError(f"du is not tangent to H+ at u (u.du = {minkowski_dot(u, du):.3e})")
    return GaugeValue(_gauge_batch(u[None, :], du[None, :])[0])


def _rodrigues_batch(a: np.ndarray) -> np.ndarray:
    """exp of a stack of antisymmetric 3x3 matrices."""
    w = np.stack([a[:, 2, 1], a[:, 0, 2], a[:, 1, 0]], axis=1)
    theta = np.linalg.norm(w, axis=1)
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    c1 = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    c2 = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    a2 = a @ a
    return np.eye(3)[None] + c1[:, None, None] * a + c2[:, None, None] * a2


def wilson_segment(u_start: VelocityLike, u_end: VelocityLike, steps: int = DEFAULT_WILSON_STEPS) -> np.ndarray:
    """Path-ordered exponential of the connection along the geodesic u_start -> u_end."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    u, w = _velocity(u_start), _velocity(u_end)
    ts = (np.arange(steps) + 0.5) / steps
    points, tangents = geodesic_samples(u, w, ts)
    factors = _rodrigues_batch(_gauge_batch(points, tangents) / steps)
    R = np.eye(3)
    for step in factors:
        R = step @ R
    return R


def _require_closed(c: HyperbolicPolyline) -> None:
    if not c.closed:
        raise DomainError("Loop integrals need a closed polyline")


def loop_matrix(c: HyperbolicPolyline, steps_per_segment: int = DEFAULT_WILSON_STEPS) -> np.ndarray:
    """3x3 Wilson loop, segments composed in traversal order."""
    _require_closed(c)
    R = np.eye(3)
    for a, b in c.edges():
        R = wilson_segment(a, b, steps_per_segment) @ R
    return R


def wilson_loop(c: HyperbolicPolyline, steps_per_segment: int = DEFAULT_WILSON_STEPS) -> RotationResult:
    """Thomas rotation of a closed polyline from the path-ordered integral."""
    logger.debug(f"Wilson loop over {len(c.vertices)} vertices, {steps_per_segment} steps per segment")
    return rotation_axis_angle(loop_matrix(c, steps_per_segment))


def _boost_product(vertices: Sequence[np.ndarray]) -> LorentzMatrix:
    """pure_boost_between over consecutive pairs around the cyclic list, later on the left."""
    P = LorentzMatrix.identity()
    n = len(vertices)
    for k in range(n):
        P = pure_boost_between(vertices[k], vertices[(k + 1) % n]) @ P
    return P


def _in_base_frame(P: LorentzMatrix, base: np.ndarray) -> LorentzMatrix:
    """Express a transformation fixing base in the comoving frame of base."""
    B = pure_boost_between(REST, base)
    return B.inverse() @ P @ B


def exact_loop_matrix(c: HyperbolicPolyline) -> np.ndarray:
    """3x3 rotation of the closed boost product, in the frame of the first vertex."""
    _require_closed(c)
    if not c.vertices:
        return np.eye(3)
    pts = list(c.array)
    P = _boost_product(pts)
    drift = float(np.linalg.norm(P.L @ pts[0] - pts[0]))
    if drift > CLOSURE_TOLERANCE * P.size:
        residual = residual_rapidity(P, pts[0])
        raise ClosureError(f"Boost product around the loop does not fix its base vertex (drift {drift:.3e})", residual)
    _, rotation = polar_decompose(_in_base_frame(P, pts[0]))
    return rotation.spatial


def exact_loop_rotation(c: HyperbolicPolyline) -> RotationResult:
    """Thomas rotation of a closed polyline from the exact product of boosts."""
    return rotation_axis_angle(exact_loop_matrix(c))


def fan_triangle_rotations(c: HyperbolicPolyline) -> list[np.ndarray]:
    """Exact rotations of the fan triangles (v0, v_i, v_i+1), in traversal order."""
    _require_closed(c)
    pts = list(c.array)
    return [
        exact_loop_matrix(HyperbolicPolyline(vertices=[c.vertices[0], c.vertices[i], c.vertices[i + 1]]))
        for i in range(1, len(pts) - 1)
    ]


def compose_rotations(rotations: Sequence[np.ndarray], reverse: bool = False) -> np.ndarray:
    """Ordered product with later rotations on the left; reverse flips the order."""
    out = np.eye(3)
    for r in reversed(rotations) if reverse else rotations:
        out = np.asarray(r) @ out
    return out


def abelian_angle_estimate(c: HyperbolicPolyline) -> float:
    """Sum of fan-triangle angles, as if the rotations commuted."""
    total = np.zeros(3)
    for r in fan_triangle_rotations(c):
        res = rotation_axis_angle(r)
        total += res.angle * res.axis.vector
    return float(np.linalg.norm(total))


@dataclass(frozen=True)
class WilsonComparison:
    """Integrator against the exact boost-product oracle for one loop."""

    integrator: RotationResult
    oracle: RotationResult
    steps: int
    operator_error: float

    @property
    def angle_error(self) -> float:
        return abs(self.integrator.angle - self.oracle.angle)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "integrator": self.integrator.to_dict(),
            "oracle": self.oracle.to_dict(),
            "steps_per_segment": self.steps,
            "angle_difference_rad": self.angle_error,
            "angle_difference_deg": math.degrees(self.angle_error),
            "operator_error": self.operator_error,
        }


def compare_loop(c: HyperbolicPolyline, steps: Optional[int] = None) -> WilsonComparison:
    """Run both the Wilson integrator and the exact oracle on a loop."""
    steps = steps or DEFAULT_WILSON_STEPS
    integrated = loop_matrix(c, steps)
    exact = exact_loop_matrix(c)
    error = float(np.linalg.norm(integrated - exact, 2))
    logger.info(f"Wilson loop at {steps} steps: operator error {error:.3e}")
    return WilsonComparison(
        integrator=rotation_axis_angle(integrated),
        oracle=rotation_axis_angle(exact),
        steps=steps,
        operator_error=error,
    )
