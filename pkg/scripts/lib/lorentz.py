"""Proper orthochronous Lorentz group: boosts, the SL(2,C) covering map, polar decomposition."""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import DomainError
from jones import PAULI, JonesMatrix, PointLike, PoincarePoint, unit_vector

logger = logging.getLogger(__name__)

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
REST = np.array([1.0, 0.0, 0.0, 0.0])

# sigma_0 = identity followed by the Pauli matrices
SIGMA4 = np.concatenate([np.eye(2, dtype=complex)[None], PAULI])

METRIC_TOLERANCE = 1e-9
VELOCITY_TOLERANCE = 1e-10
EPS = float(np.finfo(float).eps)
ROUNDING_SLACK = 256.0
# Beyond this 2-norm condition number the smaller singular value of a Jones
# matrix is lost to rounding; a single absorber reaches it near alpha = 34.5.
SINGULAR_CONDITION = 1e15


def minkowski_dot(a: np.ndarray, b: np.ndarray) -> float:
    """a.b with signature (+, -, -, -)."""
    return float(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3])


class FourVelocity(BaseModel):
    """A point on the unit hyperboloid H+ (u.u = 1, u0 > 0)."""

    model_config = ConfigDict(frozen=True)

    u: tuple[float, float, float, float] = Field(description="Components (u0, u1, u2, u3), c = 1")

    @model_validator(mode="after")
    def check_hyperboloid(self) -> "FourVelocity":
        u = np.array(self.u)
        if not np.all(np.isfinite(u)) or u[0] <= 0:
            raise ValueError(f"Four-velocity must be future pointing, got {self.u}")
        norm = minkowski_dot(u, u)
        if abs(norm - 1.0) > VELOCITY_TOLERANCE * max(1.0, u[0] * u[0]):
            raise ValueError(f"Four-velocity must satisfy u.u = 1, got {norm}")
        return self

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "FourVelocity":
        """Project a future-timelike 4-vector onto H+."""
        arr = np.asarray(v, dtype=float).reshape(4)
        norm = minkowski_dot(arr, arr)
        if not norm > 0 or arr[0] <= 0:
            raise DomainError(f"{arr.tolist()} is not future timelike")
        # u.u cancels to about eps u0^2; rescaling by that noise would move the point
        if abs(norm - 1.0) > ROUNDING_SLACK * EPS * arr[0] * arr[0]:
            arr = arr / math.sqrt(norm)
        p = arr[1:]
        u0 = math.sqrt(1.0 + float(p @ p))
        return cls(u=(u0, float(p[0]), float(p[1]), float(p[2])))

    @classmethod
    def rest(cls) -> "FourVelocity":
        return cls(u=(1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_rapidity(cls, axis: PointLike, rapidity: float) -> "FourVelocity":
        n = unit_vector(axis)
        return cls.from_vector(np.concatenate([[math.cosh(rapidity)], math.sinh(rapidity) * n]))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.u, dtype=float)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {"u": list(self.u)}


VelocityLike = Union[FourVelocity, Sequence[float], np.ndarray]


def _velocity(u: VelocityLike) -> np.ndarray:
    if isinstance(u, FourVelocity):
        return u.vector
    return FourVelocity.from_vector(u).vector


@dataclass(frozen=True)
class LorentzMatrix:
    """4x4 real matrix preserving the Minkowski metric (proper, orthochronous).

    conditioning bounds how much rounding the entries carry relative to unit
    size, e.g. the product of the factor norms for a computed product. The
    metric check allows ROUNDING_SLACK * eps * conditioning on top of
    METRIC_TOLERANCE.
    """

    L: np.ndarray
    conditioning: float = field(default=1.0, compare=False, repr=False)

    def __post_init__(self):
        arr = np.asarray(self.L, dtype=float).reshape(4, 4)
        if not np.all(np.isfinite(arr)):
            raise DomainError("Lorentz matrix entries must be finite")
        tol = metric_tolerance(arr, self.conditioning)
        defect = float(np.max(np.abs(arr.T @ ETA @ arr - ETA)))
        if defect > tol:
            raise DomainError(f"Matrix does not preserve the Minkowski metric (defect {defect:.3e})")
        if arr[0, 0] < 1.0 - tol:
            raise DomainError("Lorentz matrix is not orthochronous")
        size = max(1.0, float(np.max(np.abs(arr))))
        # det is +1 or -1; cancellation blurs it by about eps size^4 at high rapidity
        if np.linalg.det(arr) < -ROUNDING_SLACK * EPS * size**4:
            raise DomainError("Lorentz matrix is not proper")
        object.__setattr__(self, "L", arr)

    @classmethod
    def identity(cls) -> "LorentzMatrix":
        return cls(np.eye(4))

    @property
    def spatial(self) -> np.ndarray:
        return self.L[1:, 1:]

    @property
    def size(self) -> float:
        return max(1.0, float(np.max(np.abs(self.L))))

    def inverse(self) -> "LorentzMatrix":
        return LorentzMatrix(ETA @ self.L.T @ ETA, self.conditioning)

    def __matmul__(self, other: "LorentzMatrix") -> "LorentzMatrix":
        conditioning = self.conditioning * other.conditioning * self.size * other.size
        return LorentzMatrix(self.L @ other.L, conditioning)


def metric_tolerance(arr: np.ndarray, conditioning: float = 1.0) -> float:
    """Allowed |L^T eta L - eta| for entries of this size and rounding history."""
    scale = max(1.0, float(np.max(np.abs(arr))) ** 2)
    return max(METRIC_TOLERANCE, ROUNDING_SLACK * EPS * max(1.0, conditioning)) * scale


class RotationResult(BaseModel):
    """Axis-angle form of a spatial rotation."""

    model_config = ConfigDict(frozen=True)

    axis: PoincarePoint = Field(description="Unit rotation axis")
    angle: float = Field(ge=0.0, le=math.pi, description="Rotation angle (radians)")

    @field_validator("axis", mode="before")
    @classmethod
    def normalize_axis(cls, value):
        if isinstance(value, (PoincarePoint, dict)):
            return value
        return PoincarePoint.from_vector(value)

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix."""
        return axis_angle_matrix(self.axis.vector, self.angle)

    def signed_angle_about(self, direction: PointLike) -> float:
        """Angle of rotation measured right-handedly about the given direction."""
        return self.angle * float(np.sign(np.dot(self.axis.vector, unit_vector(direction))) or 1.0)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "axis": list(self.axis.s),
            "angle_rad": self.angle,
            "angle_deg": self.angle_deg,
        }


def _cross_matrix(w: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues' formula for a right-handed rotation by angle about axis."""
    k = _cross_matrix(axis)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def so3_exp(a: np.ndarray) -> np.ndarray:
    """Exact exponential of a 3x3 antisymmetric matrix."""
    w = np.array([a[2, 1], a[0, 2], a[1, 0]])
    theta = float(np.linalg.norm(w))
    if theta < 1e-8:
        # Series through second order; the next term is O(theta^3)
        return np.eye(3) + a + 0.5 * (a @ a)
    return np.eye(3) + (math.sin(theta) / theta) * a + ((1.0 - math.cos(theta)) / theta**2) * (a @ a)


def embed_rotation(r: np.ndarray) -> np.ndarray:
    """Place a 3x3 rotation in the spatial block of a 4x4 matrix."""
    out = np.eye(4)
    out[1:, 1:] = r
    return out


def boost_matrix(axis: PointLike, rapidity: float) -> LorentzMatrix:
    """Pure boost with velocity tanh(rapidity) along axis."""
    n = unit_vector(axis)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    L = np.empty((4, 4))
    L[0, 0] = ch
    L[0, 1:] = sh * n
    L[1:, 0] = sh * n
    L[1:, 1:] = np.eye(3) + (ch - 1.0) * np.outer(n, n)
    return LorentzMatrix(L)


def rotation_matrix(axis: PointLike, angle: float) -> LorentzMatrix:
    """Spatial rotation by angle about axis, embedded in the Lorentz group."""
    return LorentzMatrix(embed_rotation(axis_angle_matrix(unit_vector(axis), angle)))


def lorentz_of_jones(m: JonesMatrix, conditioning: float = 1.0) -> LorentzMatrix:
    """Image of m/sqrt|det m| under the SL(2,C) -> SO+(3,1) covering map.

    Pass the product of the normalized factor norms as conditioning when m is
    a computed product; rounding in m grows with it.
    """
    singular = np.linalg.svd(m.m, compute_uv=False)
    if singular[-1] <= singular[0] / SINGULAR_CONDITION:
        raise DomainError(
            "Jones matrix is singular (projector limit has no Lorentz image; "
            f"condition number must stay below {SINGULAR_CONDITION:.0e})"
        )
    a = m.m / math.sqrt(float(singular[0] * singular[-1]))
    L = 0.5 * np.einsum("aij,jk,bkl,li->ab", SIGMA4, a, SIGMA4, a.conj().T).real
    return LorentzMatrix(L, conditioning)


def jones_conditioning(matrices: Sequence[JonesMatrix]) -> float:
    """Product of sqrt(s_max / s_min) over the factors, singular factors excluded."""
    total = 1.0
    for m in matrices:
        singular = np.linalg.svd(m.m, compute_uv=False)
        if singular[-1] > 0.0:
            total *= math.sqrt(float(singular[0] / singular[-1]))
    return total


def apply_to_velocity(L: LorentzMatrix, u: VelocityLike) -> FourVelocity:
    """L.u, re-projected onto H+ to absorb rounding."""
    return FourVelocity.from_vector(L.L @ _velocity(u))


def rapidity_between(u: VelocityLike, w: VelocityLike) -> float:
    """Hyperbolic distance arccosh(u.w) between two four-velocities."""
    u, w = _velocity(u), _velocity(w)
    c = minkowski_dot(u, w)
    if c >= 1.5:
        return math.acosh(c)
    d = w - c * u
    # arcsinh of the tangent length keeps precision for nearby velocities
    return math.asinh(math.sqrt(max(0.0, -minkowski_dot(d, d))))


def pure_boost_between(u: VelocityLike, w: VelocityLike) -> LorentzMatrix:
    """The boost in the (u, w) plane taking u to w, identity on the orthogonal complement.

    Closed form of exp(zeta (e u^T eta - u e^T eta)) with cosh(zeta) = u.w and
    e the unit tangent at u toward w; reduces to boost_matrix when u is the
    rest frame.
    """
    u, w = _velocity(u), _velocity(w)
    c = max(1.0, minkowski_dot(u, w))
    d = w - c * u
    u_low, d_low = ETA @ u, ETA @ d
    B = (
        np.eye(4)
        + (c - 1.0) * np.outer(u, u_low)
        - np.outer(d, d_low) / (1.0 + c)
        + np.outer(d, u_low)
        - np.outer(u, d_low)
    )
    return LorentzMatrix(B)


def nearest_rotation(block: np.ndarray) -> np.ndarray:
    """Closest proper orthogonal matrix to a 3x3 block (polar factor via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(block, dtype=float))
    if np.linalg.det(U @ Vt) < 0:
        U[:, -1] = -U[:, -1]
    return U @ Vt


def polar_decompose(L: LorentzMatrix) -> tuple[LorentzMatrix, LorentzMatrix]:
    """Factor L = boost . rotation with the boost pure with respect to the rest frame.

    B^-1 L carries rounding of order eps |B| |L|, so its spatial block is
    projected back onto SO(3) before it is embedded.
    """
    v = FourVelocity.from_vector(L.L[:, 0])
    boost = pure_boost_between(REST, v)
    raw = ETA @ boost.L.T @ ETA @ L.L
    R = nearest_rotation(raw[1:, 1:])
    logger.debug(f"Polar rotation block off SO(3) by {float(np.max(np.abs(raw[1:, 1:] - R))):.3e}")
    return boost, LorentzMatrix(embed_rotation(R))


def _sign_convention(axis: np.ndarray) -> np.ndarray:
    for c in axis:
        if abs(c) > 1e-12:
            return axis if c > 0 else -axis
    return axis


def rotation_axis_angle(rotation: Union[LorentzMatrix, np.ndarray]) -> RotationResult:
    """Axis and angle in [0, pi] of a spatial rotation."""
    M = rotation.L if isinstance(rotation, LorentzMatrix) else np.asarray(rotation, dtype=float)
    if M.shape == (4, 4):
        time_part = max(abs(M[0, 0] - 1.0), float(np.max(np.abs(M[0, 1:]))), float(np.max(np.abs(M[1:, 0]))))
        if time_part > METRIC_TOLERANCE:
            raise DomainError(f"Not a spatial rotation (time row/column defect {time_part:.3e})")
        R = M[1:, 1:]
    elif M.shape == (3, 3):
        R = M
    else:
        raise DomainError(f"Expected a 3x3 or 4x4 matrix, got shape {M.shape}")
    if float(np.max(np.abs(R.T @ R - np.eye(3)))) > METRIC_TOLERANCE:
        raise DomainError("Spatial block is not orthogonal")

    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sin_angle = 0.5 * float(np.linalg.norm(w))
    cos_angle = 0.5 * (float(np.trace(R)) - 1.0)
    angle = math.atan2(sin_angle, cos_angle)

    if cos_angle >= 0.0:
        if sin_angle < 1e-15:
            return RotationResult(axis=(0.0, 0.0, 1.0), angle=angle)
        return RotationResult(axis=w / np.linalg.norm(w), angle=angle)

    # Near pi the antisymmetric part vanishes; read the axis off the symmetric part
    _, vecs = np.linalg.eigh(0.5 * (R + R.T))
    axis = vecs[:, -1]
    if sin_angle > 1e-12 and np.dot(axis, w) < 0:
        axis = -axis
    elif sin_angle <= 1e-12:
        axis = _sign_convention(axis)
    return RotationResult(axis=axis, angle=angle)


def is_closed(L: LorentzMatrix, u1: VelocityLike, tol: float) -> bool:
    """True iff L returns u1 to itself within tol."""
    u = _velocity(u1)
    return float(np.linalg.norm(L.L @ u - u)) <= tol


def residual_rapidity(L: LorentzMatrix, u1: VelocityLike = REST) -> float:
    """How far L moves u1, as a rapidity."""
    u = _velocity(u1)
    return rapidity_between(u, FourVelocity.from_vector(L.L @ u))


def reorthogonalize(L: LorentzMatrix) -> LorentzMatrix:
    """Metric Gram-Schmidt on the columns of L."""
    cols = [L.L[:, k].copy() for k in range(4)]
    signs = [1.0, -1.0, -1.0, -1.0]
    out = []
    for k, col in enumerate(cols):
        for j, prev in enumerate(out):
            col = col - signs[j] * minkowski_dot(col, prev) * prev
        col = col / math.sqrt(abs(minkowski_dot(col, col)))
        out.append(col)
    return LorentzMatrix(np.column_stack(out))


def wigner_angle_perpendicular(gamma1: float, gamma2: float) -> float:
    """Thomas-Wigner rotation angle for two perpendicular boosts."""
    return math.acos((gamma1 + gamma2) / (1.0 + gamma1 * gamma2))
