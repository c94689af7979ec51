"""Closed absorber sequences, their fixed poles, and the Pancharatnam phases.

A closed sequence of dichroic elements acts on the Poincare sphere as a rigid
rotation (the optical Thomas rotation). This module computes that rotation from
the Lorentz product, from the solid angle swept by the fixed poles, and from the
geometric phase those poles acquire, and checks that the three agree.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import optimize

from config import DEFAULT_TOLERANCE, DEFAULT_TRACE_SAMPLES
from errors import ClosureError, ConsistencyError, DegenerateSequenceError, DomainError
from geometry import HyperbolicPolyline, SphericalPolyline, solid_angle_polyline
from jones import (
    AbsorberSpec,
    JonesMatrix,
    JonesVector,
    PointLike,
    PoincarePoint,
    element_matrix,
    induced_sphere_map,
    jones_of_poincare,
    poincare_of_jones,
    sequence_matrix,
    unit_vector,
)
from lorentz import (
    EPS,
    REST,
    ROUNDING_SLACK,
    FourVelocity,
    LorentzMatrix,
    RotationResult,
    jones_conditioning,
    lorentz_of_jones,
    polar_decompose,
    rapidity_between,
    residual_rapidity,
    rotation_axis_angle,
)

logger = logging.getLogger(__name__)

PARALLEL_TOLERANCE = 1e-9
FIXED_TOLERANCE = 1e-8
DEDUPE_TOLERANCE = 1e-12
ZERO_RAPIDITY = 1e-13
TWO_PI = 2.0 * math.pi


def closure_drift(L: np.ndarray) -> float:
    """|L e0 - e0| relative to the size of L."""
    return float(np.linalg.norm(L @ REST - REST)) / max(1.0, float(np.max(np.abs(L))))


def _sequence_lorentz(elements: Sequence[AbsorberSpec]) -> tuple[JonesMatrix, LorentzMatrix]:
    """Jones product and its Lorentz image, validated against the rounding of the product."""
    jones = sequence_matrix(elements)
    conditioning = jones_conditioning([element_matrix(e) for e in elements])
    return jones, lorentz_of_jones(jones, conditioning)


def _nontrivial_axes(elements: Sequence[AbsorberSpec]) -> list[np.ndarray]:
    return [a.axis.vector for a in elements if a.alpha > ZERO_RAPIDITY]


def _is_degenerate(elements: Sequence[AbsorberSpec]) -> bool:
    """True when every element with nonzero alpha lies on one axis line."""
    axes = _nontrivial_axes(elements)
    if not axes:
        return True
    return all(np.linalg.norm(np.cross(axes[0], n)) <= PARALLEL_TOLERANCE for n in axes[1:])


def _require_absorbers(elements: Sequence) -> None:
    for k, e in enumerate(elements):
        if not isinstance(e, AbsorberSpec):
            raise DomainError(f"Element {k} is a {type(e).__name__}; closure needs pure absorber sequences")


@dataclass(frozen=True)
class ClosedSequence:
    """Absorbers whose composite fixes the rest four-velocity."""

    elements: tuple[AbsorberSpec, ...]
    product_jones: JonesMatrix
    product_lorentz: LorentzMatrix
    degenerate: bool = False
    tolerance: float = field(default=DEFAULT_TOLERANCE, compare=False)

    def __post_init__(self):
        drift = closure_drift(self.product_lorentz.L)
        # strong absorbers leave a rounding floor of eps times the product conditioning
        if drift > max(self.tolerance, ROUNDING_SLACK * EPS * self.product_lorentz.conditioning):
            residual = residual_rapidity(self.product_lorentz)
            raise ClosureError(
                f"Sequence is not closed: residual boost rapidity {residual:.3e}",
                residual_rapidity=residual,
            )

    @classmethod
    def from_elements(cls, elements: Sequence[AbsorberSpec], tolerance: float = DEFAULT_TOLERANCE) -> "ClosedSequence":
        """Build and validate; raises ClosureError when the product is a boost."""
        _require_absorbers(elements)
        jones, lorentz = _sequence_lorentz(elements)
        return cls(
            elements=tuple(elements),
            product_jones=jones,
            product_lorentz=lorentz,
            degenerate=_is_degenerate(elements),
            tolerance=tolerance,
        )

    @property
    def axes(self) -> list[PoincarePoint]:
        return [a.axis for a in self.elements]

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "elements": [e.to_dict() for e in self.elements],
            "degenerate": self.degenerate,
            "residual_rapidity": residual_rapidity(self.product_lorentz),
        }


def complete_closure(
    elements: Sequence[AbsorberSpec], tolerance: float = DEFAULT_TOLERANCE
) -> tuple[AbsorberSpec, ClosedSequence]:
    """Append the unique absorber (alpha0 = 0) that turns the product into a pure rotation.

    Polar-decompose the partial product as B.R and choose the last element's
    boost to be B^-1.
    """
    _require_absorbers(elements)
    if not elements:
        raise DomainError("Closure needs at least one element")
    _, partial = _sequence_lorentz(elements)
    boost, _ = polar_decompose(partial)
    v = boost.L[:, 0]
    zeta = rapidity_between(REST, v)
    direction = v[1:]
    norm = float(np.linalg.norm(direction))
    if zeta <= ZERO_RAPIDITY or norm == 0.0:
        closing = AbsorberSpec(axis=elements[0].axis, alpha=0.0)
    else:
        closing = AbsorberSpec(axis=-direction / norm, alpha=zeta)
    logger.debug(f"Closing element: axis {list(closing.axis.s)}, rapidity {closing.alpha:.6g}")
    seq = ClosedSequence.from_elements(list(elements) + [closing], tolerance)
    if seq.degenerate:
        logger.warning("Closed sequence is degenerate: all element axes are parallel")
    return closing, seq


def close_sequence(
    a1: AbsorberSpec, a2: AbsorberSpec, tolerance: float = DEFAULT_TOLERANCE
) -> tuple[AbsorberSpec, ClosedSequence]:
    """Third absorber closing a1, a2; its axis is coplanar with theirs."""
    return complete_closure([a1, a2], tolerance)


def fixed_points(seq: ClosedSequence) -> tuple[PoincarePoint, PoincarePoint]:
    """The antipodal pair (n, s) orthogonal to every element axis.

    n is oriented along n1 x nj for the first element axis nj not parallel to n1.
    """
    if seq.degenerate:
        raise DegenerateSequenceError("All element axes are parallel; every point of a great circle is fixed")
    axes = _nontrivial_axes(seq.elements)
    stacked = np.array(axes)
    _, sv, vh = np.linalg.svd(stacked)
    if len(axes) >= 3 and sv[2] > PARALLEL_TOLERANCE * sv[0]:
        raise DomainError("Element axes do not share a great circle; the sequence has no fixed poles")
    n = vh[-1]
    for nj in axes[1:]:
        reference = np.cross(axes[0], nj)
        if np.linalg.norm(reference) > PARALLEL_TOLERANCE:
            if np.dot(n, reference) < 0:
                n = -n
            break
    north = PoincarePoint.from_vector(n)
    moved = float(np.linalg.norm(induced_sphere_map(seq.product_jones, north).vector - north.vector))
    if moved > FIXED_TOLERANCE:
        raise ConsistencyError(f"Computed pole is moved by the closed product ({moved:.3e})", moved)
    return north, -north


def trace_fixed_point_triangle(
    seq: ClosedSequence, p0: PointLike, samples_per_leg: int = DEFAULT_TRACE_SAMPLES
) -> SphericalPolyline:
    """Closed polyline swept by p0 as the elements are applied one fraction at a time."""
    if samples_per_leg < 2:
        raise DomainError(f"samples_per_leg must be >= 2, got {samples_per_leg}")
    start = PoincarePoint.from_vector(unit_vector(p0))
    moved = float(np.linalg.norm(induced_sphere_map(seq.product_jones, start).vector - start.vector))
    if moved > FIXED_TOLERANCE:
        raise DomainError(f"Starting point is not fixed by the sequence (moved {moved:.3e})")

    ts = np.linspace(0.0, 1.0, samples_per_leg)[1:]
    state = jones_of_poincare(start)
    points = [start.vector]
    for element in seq.elements:
        for t in ts:
            partial = element_matrix(element.scaled(float(t)))
            points.append(poincare_of_jones(partial.m @ state.c).vector)
        state = JonesVector(element_matrix(element).m @ state.c)

    vertices = [points[0]]
    for p in points[1:]:
        if np.linalg.norm(p - vertices[-1]) > DEDUPE_TOLERANCE:
            vertices.append(p)
    if len(vertices) > 1 and np.linalg.norm(vertices[-1] - vertices[0]) <= FIXED_TOLERANCE:
        vertices.pop()
    return SphericalPolyline(vertices=[PoincarePoint.from_vector(v) for v in vertices], closed=True)


def _wrap(angle: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    out = math.remainder(angle, TWO_PI)
    return math.pi if out == -math.pi else out


def bargmann_phase(vectors: Sequence[JonesVector]) -> float:
    """Argument of the cyclic overlap product <v2|v1><v3|v2>...<v1|vk>, in (-pi, pi]."""
    if len(vectors) < 3:
        raise DomainError("A geometric phase needs at least three states")
    product = complex(1.0)
    k = len(vectors)
    for i in range(k):
        a, b = vectors[i].c, vectors[(i + 1) % k].c
        overlap = complex(np.vdot(b, a))
        scale = math.sqrt(float(np.vdot(a, a).real) * float(np.vdot(b, b).real))
        if abs(overlap) <= 1e-12 * scale:
            raise DomainError(f"States {i} and {(i + 1) % k} are orthogonal; the overlap vanishes")
        product *= overlap / abs(overlap)
    return _wrap(math.atan2(product.imag, product.real))


def pancharatnam_phase(states: Sequence[PointLike]) -> float:
    """Geometric phase of a state carried around the geodesic polygon through states.

    Equals minus half the polygon's signed solid angle.
    """
    return bargmann_phase([jones_of_poincare(s) for s in states])


def fixed_point_phase(seq: ClosedSequence, p: PointLike) -> float:
    """Phase of the eigenvalue of the product Jones matrix on the fixed state p."""
    v = jones_of_poincare(p).c
    eigenvalue = complex(np.vdot(v, seq.product_jones.m @ v)) / float(np.vdot(v, v).real)
    return _wrap(math.atan2(eigenvalue.imag, eigenvalue.real))


def total_overall_absorption(elements: Sequence) -> float:
    """Sum of alpha0 over the absorbers in a sequence (nepers)."""
    return float(sum(e.alpha0 for e in elements if isinstance(e, AbsorberSpec)))


def insertion_loss_db(intensity_ratio: float) -> float:
    """10 log10 of an intensity ratio; negative for loss."""
    if intensity_ratio <= 0.0:
        return -math.inf
    return 10.0 * math.log10(intensity_ratio)


def overall_insertion_loss_db(elements: Sequence) -> float:
    """Polarization-independent part of the loss, from the summed alpha0."""
    return insertion_loss_db(math.exp(-2.0 * total_overall_absorption(elements)))


class PhaseReport(BaseModel):
    """Thomas rotation of a closed sequence and the phases of its fixed poles."""

    model_config = ConfigDict(frozen=True)

    rotation: RotationResult = Field(description="Rotation of the sphere from the Lorentz product")
    omega: float = Field(description="Signed solid angle of the n triangle (sr)")
    phase_n: float = Field(description="Pancharatnam phase of the n pole (rad)")
    phase_s: float = Field(description="Pancharatnam phase of the s pole (rad)")
    triangle_n: SphericalPolyline = Field(description="Path traced by the n pole")
    triangle_s: SphericalPolyline = Field(description="Path traced by the s pole")
    fixed_point: Optional[PoincarePoint] = Field(default=None, description="The n pole")
    degenerate: bool = Field(default=False, description="All axes parallel; rotation is trivially zero")
    total_overall_absorption: float = Field(default=0.0, description="Summed alpha0 (nepers)")
    insertion_loss_db: float = Field(default=0.0, description="Loss from the summed alpha0 (dB)")

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "rotation": self.rotation.to_dict(),
            "omega_sr": self.omega,
            "phase_n_deg": math.degrees(self.phase_n),
            "phase_s_deg": math.degrees(self.phase_s),
            "fixed_point": list(self.fixed_point.s) if self.fixed_point else None,
            "triangle_n": [list(v.s) for v in self.triangle_n.vertices],
            "triangle_s": [list(v.s) for v in self.triangle_s.vertices],
            "degenerate": self.degenerate,
            "total_overall_absorption": self.total_overall_absorption,
            "insertion_loss_db": self.insertion_loss_db,
        }


def _rotation_of(seq: ClosedSequence) -> RotationResult:
    _, rotation = polar_decompose(seq.product_lorentz)
    return rotation_axis_angle(rotation)


def _check_report(report: PhaseReport, tolerance: float) -> None:
    gap = abs(_wrap(report.phase_n + report.phase_s))
    if gap > tolerance:
        raise ConsistencyError(f"Pole phases are not opposite (gap {gap:.3e})", gap)
    angle, omega = report.rotation.angle, abs(report.omega)
    gap = min(abs(_wrap(angle - omega)), abs(_wrap(angle + omega)))
    if gap > tolerance:
        raise ConsistencyError(f"Rotation angle {angle:.12g} differs from |solid angle| {omega:.12g}", gap)
    if angle > 1e-6 and report.fixed_point is not None:
        off_axis = float(np.linalg.norm(np.cross(report.rotation.axis.vector, report.fixed_point.vector)))
        if off_axis > tolerance:
            raise ConsistencyError(f"Rotation axis is not the pole axis (off by {off_axis:.3e})", off_axis)


def thomas_report(
    seq: ClosedSequence,
    samples_per_leg: int = DEFAULT_TRACE_SAMPLES,
    tolerance: float = DEFAULT_TOLERANCE,
) -> PhaseReport:
    """Rotation, solid angle and pole phases of a closed sequence, cross-checked."""
    loss = {
        "total_overall_absorption": total_overall_absorption(seq.elements),
        "insertion_loss_db": overall_insertion_loss_db(seq.elements),
    }
    if seq.degenerate:
        logger.info("Degenerate sequence: reporting zero rotation")
        empty = SphericalPolyline(vertices=[], closed=True)
        return PhaseReport(
            rotation=RotationResult(axis=(0.0, 0.0, 1.0), angle=0.0),
            omega=0.0,
            phase_n=0.0,
            phase_s=0.0,
            triangle_n=empty,
            triangle_s=empty,
            degenerate=True,
            **loss,
        )

    rotation = _rotation_of(seq)
    north, south = fixed_points(seq)
    triangle_n = trace_fixed_point_triangle(seq, north, samples_per_leg)
    triangle_s = trace_fixed_point_triangle(seq, south, samples_per_leg)
    omega = solid_angle_polyline(triangle_n)
    report = PhaseReport(
        rotation=rotation,
        omega=omega,
        phase_n=pancharatnam_phase(triangle_n.vertices) if len(triangle_n.vertices) >= 3 else 0.0,
        phase_s=pancharatnam_phase(triangle_s.vertices) if len(triangle_s.vertices) >= 3 else 0.0,
        triangle_n=triangle_n,
        triangle_s=triangle_s,
        fixed_point=north,
        **loss,
    )
    _check_report(report, tolerance)
    logger.debug(f"Thomas rotation {rotation.angle_deg:.9f} deg, solid angle {omega:.12g} sr")
    return report


def sequence_loop(elements: Sequence[AbsorberSpec], tolerance: float = DEFAULT_TOLERANCE) -> HyperbolicPolyline:
    """H+ polyline whose Wilson loop is the sphere rotation of a closed sequence.

    Each boost acts in the current frame, so the visited four-velocities are
    L1...Lk e0. Listing them backward from e0 makes the holonomy equal
    L_M...L_1 rather than its inverse.
    """
    _require_absorbers(elements)
    running = LorentzMatrix.identity()
    visited = []
    for e in elements:
        running = running @ lorentz_of_jones(element_matrix(e))
        visited.append(running.L @ REST)
    drift = float(np.linalg.norm(visited[-1] - REST)) / running.size
    if drift > tolerance:
        residual = residual_rapidity(running)
        raise ClosureError(f"Sequence is not closed: residual boost rapidity {residual:.3e}", residual)
    vertices = [FourVelocity.rest()] + [FourVelocity.from_vector(w) for w in reversed(visited[:-1])]
    return HyperbolicPolyline(vertices=vertices, closed=True)


def m_element_rotation(elements: Sequence[AbsorberSpec], tolerance: float = DEFAULT_TOLERANCE) -> RotationResult:
    """Rotation of any closed absorber sequence, from the exact Lorentz product."""
    seq = ClosedSequence.from_elements(elements, tolerance)
    if seq.degenerate:
        return RotationResult(axis=(0.0, 0.0, 1.0), angle=0.0)
    return _rotation_of(seq)


def rotation_for_rapidity(alpha: float, axis1: PointLike, axis2: PointLike) -> RotationResult:
    """Thomas rotation of two equal absorbers on axis1 then axis2, auto-closed."""
    _, seq = close_sequence(AbsorberSpec(axis=axis1, alpha=alpha), AbsorberSpec(axis=axis2, alpha=alpha))
    return m_element_rotation(seq.elements)


def find_rapidity_for_angle(
    target_deg: float,
    axis1: PointLike = (0.0, 0.0, 1.0),
    axis2: PointLike = (1.0, 0.0, 0.0),
    upper: float = 8.0,
    xtol: float = 1e-13,
) -> float:
    """Equal rapidity of two absorbers giving a closed triple with the target rotation."""
    target = math.radians(target_deg)

    def mismatch(alpha: float) -> float:
        return rotation_for_rapidity(alpha, axis1, axis2).angle - target

    lo, hi = 1e-6, upper
    if mismatch(lo) * mismatch(hi) > 0:
        raise DomainError(f"No rapidity in [{lo}, {hi}] gives a {target_deg} degree rotation for these axes")
    alpha = optimize.bisect(mismatch, lo, hi, xtol=xtol)
    logger.info(f"Rapidity {alpha:.12g} gives a {target_deg} degree Thomas rotation")
    return float(alpha)
