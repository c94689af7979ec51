"""Jones calculus for elliptic dichroic and birefringent elements.

States are kept unnormalised; the Poincare sphere point of a state is its
unit Stokes vector s = <v|sigma|v> / <v|v>. Colatitude is measured from +z
(the |0> = (1, 0) state) so that a state (1, z) with z = tan(theta/2) e^{i phi}
sits at colatitude theta and longitude phi.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import DomainError

logger = logging.getLogger(__name__)

# Trace-free Hermitian basis (Pauli matrices)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

UNIT_TOLERANCE = 1e-12
RAW_UNIT_TOLERANCE = 1e-9


class PoincarePoint(BaseModel):
    """A unit 3-vector on the Poincare sphere."""

    model_config = ConfigDict(frozen=True)

    s: tuple[float, float, float] = Field(description="Unit Stokes vector (s1, s2, s3)")

    @model_validator(mode="after")
    def check_unit(self) -> "PoincarePoint":
        norm = math.sqrt(sum(c * c for c in self.s))
        if not math.isfinite(norm) or abs(norm - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"Poincare point must be a unit vector, got norm {norm}")
        return self

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "PoincarePoint":
        """Normalize an arbitrary nonzero 3-vector onto the sphere."""
        arr = np.asarray(v, dtype=float).reshape(3)
        norm = float(np.linalg.norm(arr))
        if not math.isfinite(norm) or norm == 0.0:
            raise DomainError(f"Cannot place {arr.tolist()} on the Poincare sphere")
        arr = arr / norm
        return cls(s=(float(arr[0]), float(arr[1]), float(arr[2])))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.s, dtype=float)

    def __neg__(self) -> "PoincarePoint":
        return PoincarePoint(s=(-self.s[0], -self.s[1], -self.s[2]))

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {"s": list(self.s)}


PointLike = Union[PoincarePoint, Sequence[float], np.ndarray]


def unit_vector(p: PointLike, tol: float = RAW_UNIT_TOLERANCE) -> np.ndarray:
    """Return p as a numpy unit vector, rejecting raw inputs that are not unit."""
    if isinstance(p, PoincarePoint):
        return p.vector
    arr = np.asarray(p, dtype=float).reshape(3)
    norm = float(np.linalg.norm(arr))
    if not math.isfinite(norm) or abs(norm - 1.0) > tol:
        raise DomainError(f"Expected a unit 3-vector, got norm {norm}")
    return arr / norm


@dataclass(frozen=True)
class JonesVector:
    """Unnormalised 2-component complex polarization state."""

    c: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.c, dtype=complex).reshape(2)
        if not np.all(np.isfinite(arr)):
            raise DomainError("Jones vector components must be finite")
        if not np.any(arr):
            raise DomainError("Jones vector must be nonzero")
        object.__setattr__(self, "c", arr)

    @property
    def c0(self) -> complex:
        return complex(self.c[0])

    @property
    def c1(self) -> complex:
        return complex(self.c[1])

    @property
    def intensity(self) -> float:
        return float(np.vdot(self.c, self.c).real)

    def scaled(self, factor: complex) -> "JonesVector":
        return JonesVector(self.c * factor)


@dataclass(frozen=True)
class JonesMatrix:
    """2x2 complex operator, meaningful up to an overall complex scale."""

    m: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.m, dtype=complex).reshape(2, 2)
        if not np.all(np.isfinite(arr)):
            raise DomainError("Jones matrix entries must be finite")
        object.__setattr__(self, "m", arr)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    def __matmul__(self, other: "JonesMatrix") -> "JonesMatrix":
        return JonesMatrix(self.m @ other.m)

    @classmethod
    def identity(cls) -> "JonesMatrix":
        return cls(np.eye(2, dtype=complex))


def _coerce_axis(value):
    if isinstance(value, (PoincarePoint, dict)):
        return value
    return PoincarePoint.from_vector(unit_vector(value))


class AbsorberSpec(BaseModel):
    """An elliptic dichroic element A_n(alpha)."""

    model_config = ConfigDict(frozen=True)

    axis: PoincarePoint = Field(description="Preferentially transmitted state n")
    alpha: float = Field(ge=0.0, allow_inf_nan=False, description="Relative absorption alpha2 - alpha1 (nepers)")
    alpha0: float = Field(default=0.0, ge=0.0, allow_inf_nan=False, description="Overall absorption (alpha1 + alpha2)/2 (nepers)")

    @field_validator("axis", mode="before")
    @classmethod
    def normalize_axis(cls, value):
        return _coerce_axis(value)

    @classmethod
    def from_coefficients(cls, axis: PointLike, alpha1: float, alpha2: float) -> "AbsorberSpec":
        """Build from the per-state amplitude absorption coefficients."""
        if alpha2 < alpha1:
            raise DomainError("alpha2 must be >= alpha1 (the orthogonal state is absorbed more)")
        return cls(axis=axis, alpha=alpha2 - alpha1, alpha0=(alpha1 + alpha2) / 2)

    @property
    def alpha1(self) -> float:
        return self.alpha0 - self.alpha / 2

    @property
    def alpha2(self) -> float:
        return self.alpha0 + self.alpha / 2

    @property
    def is_passive(self) -> bool:
        """True when neither eigenstate is amplified."""
        return self.alpha1 >= 0.0

    def scaled(self, t: float) -> "AbsorberSpec":
        """Fractional element A_n(t*alpha) with overall absorption t*alpha0."""
        return AbsorberSpec(axis=self.axis, alpha=self.alpha * t, alpha0=self.alpha0 * t)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "kind": "absorber",
            "axis": list(self.axis.s),
            "alpha": self.alpha,
            "alpha0": self.alpha0,
        }


class RetarderSpec(BaseModel):
    """An elliptic birefringent element R_n(delta)."""

    model_config = ConfigDict(frozen=True)

    axis: PoincarePoint = Field(description="Rotation axis on the Poincare sphere")
    delta: float = Field(allow_inf_nan=False, description="Retardance (radians)")

    @field_validator("axis", mode="before")
    @classmethod
    def normalize_axis(cls, value):
        return _coerce_axis(value)

    def scaled(self, t: float) -> "RetarderSpec":
        return RetarderSpec(axis=self.axis, delta=self.delta * t)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "kind": "retarder",
            "axis": list(self.axis.s),
            "delta": self.delta,
        }


ElementSpec = Union[AbsorberSpec, RetarderSpec]


def _as_jones(v: Union[JonesVector, Sequence[complex], np.ndarray]) -> JonesVector:
    return v if isinstance(v, JonesVector) else JonesVector(np.asarray(v))


def poincare_of_jones(v: Union[JonesVector, Sequence[complex], np.ndarray]) -> PoincarePoint:
    """Unit Stokes vector of a Jones state (invariant under complex rescaling)."""
    c = _as_jones(v).c
    norm = float(np.vdot(c, c).real)
    s = np.einsum("i,kij,j->k", c.conj(), PAULI, c).real / norm
    return PoincarePoint.from_vector(s)


def jones_of_poincare(p: PointLike) -> JonesVector:
    """Jones representative of a sphere point: first component real and non-negative.

    The south pole maps to (0, 1).
    """
    s = unit_vector(p)
    rho = math.hypot(s[0], s[1])
    if rho == 0.0 and s[2] < 0:
        return JonesVector(np.array([0.0, 1.0], dtype=complex))
    theta = math.atan2(rho, s[2])
    phi = math.atan2(s[1], s[0])
    return JonesVector(np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)]))


def _eigenbasis(axis: PointLike) -> tuple[np.ndarray, np.ndarray]:
    """Normalized |n> and its orthogonal partner |s>."""
    n = jones_of_poincare(axis).c
    n = n / np.linalg.norm(n)
    s = np.array([-n[1].conjugate(), n[0].conjugate()])
    return n, s


def absorber_matrix(a: AbsorberSpec) -> JonesMatrix:
    """diag(e^-alpha1, e^-alpha2) expressed in the global basis."""
    n, s = _eigenbasis(a.axis)
    m = math.exp(-a.alpha1) * np.outer(n, n.conj()) + math.exp(-a.alpha2) * np.outer(s, s.conj())
    return JonesMatrix(m)


def retarder_matrix(r: RetarderSpec) -> JonesMatrix:
    """Unitary exp(-i delta/2 n.sigma): rotates the sphere by delta about n."""
    n = r.axis.vector
    generator = np.einsum("k,kij->ij", n, PAULI)
    m = math.cos(r.delta / 2) * np.eye(2) - 1j * math.sin(r.delta / 2) * generator
    return JonesMatrix(m)


def element_matrix(spec: ElementSpec) -> JonesMatrix:
    """Jones matrix of any element spec."""
    if isinstance(spec, AbsorberSpec):
        return absorber_matrix(spec)
    if isinstance(spec, RetarderSpec):
        return retarder_matrix(spec)
    raise TypeError(f"Unknown element spec: {type(spec).__name__}")


def sequence_matrix(elements: Sequence[ElementSpec]) -> JonesMatrix:
    """Ordered product: the first element acts first (rightmost)."""
    m = np.eye(2, dtype=complex)
    for spec in elements:
        m = element_matrix(spec).m @ m
    return JonesMatrix(m)


def apply_element(m: JonesMatrix, v: JonesVector) -> tuple[JonesVector, float]:
    """Return m.v and the intensity ratio |m.v|^2 / |v|^2."""
    out = JonesVector(m.m @ v.c)
    return out, out.intensity / v.intensity


def induced_sphere_map(m: JonesMatrix, p: PointLike) -> PoincarePoint:
    """Action of a Jones operator on the Poincare sphere."""
    out, _ = apply_element(m, jones_of_poincare(p))
    return poincare_of_jones(out)


def tan_half_map(theta: float, alpha: float) -> float:
    """Colatitude after an absorber: tan(theta'/2) = e^-alpha tan(theta/2)."""
    return 2.0 * math.atan(math.exp(-alpha) * math.tan(theta / 2))


def aberration_cos(theta: float, alpha: float) -> float:
    """cos(theta') from the relativistic aberration formula with beta = tanh(alpha)."""
    beta = math.tanh(alpha)
    return (math.cos(theta) + beta) / (1 + math.cos(theta) * beta)


def stokes_from_angles(two_chi_deg: float, two_psi_deg: float) -> PoincarePoint:
    """Axis from sphere angles: 2chi is the latitude (ellipticity), 2psi the longitude (azimuth)."""
    two_chi = math.radians(two_chi_deg)
    two_psi = math.radians(two_psi_deg)
    return PoincarePoint.from_vector(
        [
            math.cos(two_chi) * math.cos(two_psi),
            math.cos(two_chi) * math.sin(two_psi),
            math.sin(two_chi),
        ]
    )


def angles_from_stokes(p: PointLike) -> tuple[float, float]:
    """Inverse of stokes_from_angles, in degrees."""
    s = unit_vector(p)
    two_chi = math.degrees(math.asin(max(-1.0, min(1.0, s[2]))))
    two_psi = math.degrees(math.atan2(s[1], s[0]))
    return two_chi, two_psi
