#!/usr/bin/env python3
"""Tests for Jones calculus and the Poincare sphere map.

Cross-platform compatible (Windows, macOS, Linux).
"""

import math
import sys
from pathlib import Path

# Add lib to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts" / "lib"))

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.linalg import expm

from errors import DomainError
from jones import (
    AbsorberSpec,
    JonesMatrix,
    JonesVector,
    PoincarePoint,
    RetarderSpec,
    aberration_cos,
    absorber_matrix,
    angles_from_stokes,
    apply_element,
    element_matrix,
    induced_sphere_map,
    jones_of_poincare,
    poincare_of_jones,
    retarder_matrix,
    sequence_matrix,
    stokes_from_angles,
    tan_half_map,
)

X = (1.0, 0.0, 0.0)
Y = (0.0, 1.0, 0.0)
Z = (0.0, 0.0, 1.0)


class TestPoincareOfJones:
    """Tests for the Jones -> sphere map."""

    def test_basis_states(self):
        """Test the three canonical states land on the axes."""
        assert np.allclose(poincare_of_jones([1, 0]).vector, Z, atol=1e-15)
        assert np.allclose(poincare_of_jones([1, 1]).vector, X, atol=1e-15)
        assert np.allclose(poincare_of_jones([1, 1j]).vector, Y, atol=1e-15)
        assert np.allclose(poincare_of_jones([0, 1]).vector, (0, 0, -1), atol=1e-15)

    def test_invariant_under_complex_scale(self):
        """Test that rescaling a state does not move its sphere point."""
        v = np.array([0.3 - 0.2j, 1.1 + 0.5j])
        p = poincare_of_jones(v).vector
        q = poincare_of_jones(v * (2.5 * np.exp(0.7j))).vector
        assert np.allclose(p, q, atol=1e-14)

    def test_zero_vector_rejected(self):
        """Test that the zero Jones vector is outside the domain."""
        with pytest.raises(DomainError):
            JonesVector(np.zeros(2))

    def test_inverse_map(self):
        """Test jones_of_poincare inverts poincare_of_jones, south pole included."""
        for s in [X, Y, Z, (0, 0, -1), (0.6, -0.0, -0.8), (-0.48, 0.6, 0.64)]:
            p = PoincarePoint.from_vector(s)
            assert np.allclose(poincare_of_jones(jones_of_poincare(p)).vector, p.vector, atol=1e-14)

    def test_representative_is_normalized(self):
        """Test that representatives have unit intensity and a real first component."""
        v = jones_of_poincare(PoincarePoint.from_vector((0.2, -0.3, 0.5)))
        assert v.intensity == pytest.approx(1.0, abs=1e-15)
        assert v.c0.imag == 0.0
        assert v.c0.real >= 0.0

    def test_non_unit_raw_vector_rejected(self):
        """Test that raw non-unit axes are rejected rather than normalized."""
        with pytest.raises(DomainError):
            jones_of_poincare((1.0, 1.0, 0.0))


class TestAbsorber:
    """Tests for elliptic dichroic elements."""

    def test_eigenvalues(self):
        """Test the axis state and its orthogonal partner are attenuated by e^-alpha1, e^-alpha2."""
        a = AbsorberSpec(axis=PoincarePoint.from_vector((1, 2, 2)), alpha=0.8, alpha0=0.6)
        m = absorber_matrix(a).m
        n = jones_of_poincare(a.axis).c
        s = jones_of_poincare(-a.axis).c
        assert np.allclose(m @ n, math.exp(-0.2) * n, atol=1e-14)
        assert np.allclose(m @ s, math.exp(-1.0) * s, atol=1e-14)

    def test_from_coefficients(self):
        """Test building from per-state absorption coefficients."""
        a = AbsorberSpec.from_coefficients(Z, 0.2, 1.0)
        assert a.alpha == pytest.approx(0.8)
        assert a.alpha0 == pytest.approx(0.6)
        assert a.alpha1 == pytest.approx(0.2)
        assert a.alpha2 == pytest.approx(1.0)
        assert a.is_passive

    def test_zero_overall_absorption_amplifies(self):
        """Test that alpha0 = 0 makes the preferred state gain intensity."""
        a = AbsorberSpec(axis=Z, alpha=1.0)
        assert not a.is_passive
        _, ratio = apply_element(absorber_matrix(a), jones_of_poincare(Z))
        assert ratio == pytest.approx(math.e, rel=1e-12)

    def test_negative_alpha_rejected(self):
        """Test that a negative relative absorption fails validation."""
        with pytest.raises(ValidationError):
            AbsorberSpec(axis=Z, alpha=-0.1)

    def test_non_unit_axis_rejected(self):
        """Test that a non-unit raw axis fails validation."""
        with pytest.raises(ValidationError):
            AbsorberSpec(axis=(0.0, 0.0, 2.0), alpha=0.1)

    def test_tan_half_law(self):
        """Test that a z absorber contracts tan(theta/2) by e^-alpha."""
        theta, alpha = 1.1, 0.7
        p = (math.sin(theta), 0.0, math.cos(theta))
        q = induced_sphere_map(absorber_matrix(AbsorberSpec(axis=Z, alpha=alpha)), p).vector
        assert math.acos(q[2]) == pytest.approx(tan_half_map(theta, alpha), abs=1e-13)
        assert q[1] == pytest.approx(0.0, abs=1e-15)

    def test_tan_half_matches_aberration(self):
        """Test the tan-half map and the aberration formula agree."""
        for theta in (0.1, 1.0, 2.0, 3.0):
            for alpha in (0.0, 0.5, 2.0):
                assert math.cos(tan_half_map(theta, alpha)) == pytest.approx(aberration_cos(theta, alpha), abs=1e-12)

    def test_semigroup(self):
        """Test A(t alpha) A((1-t) alpha) = A(alpha)."""
        a = AbsorberSpec(axis=PoincarePoint.from_vector((0.3, -0.4, 0.2)), alpha=1.3, alpha0=0.9)
        full = absorber_matrix(a).m
        for t in (0.25, 0.5, 0.75):
            split = absorber_matrix(a.scaled(1 - t)).m @ absorber_matrix(a.scaled(t)).m
            assert np.allclose(split, full, atol=1e-12)

    def test_fractional_moves_along_great_circle(self):
        """Test fractional absorbers keep the state on the great circle through the axis."""
        a = AbsorberSpec(axis=X, alpha=2.0)
        p = np.array([0.0, 0.6, 0.8])
        normal = np.cross(p, a.axis.vector)
        for t in np.linspace(0.0, 1.0, 9):
            q = induced_sphere_map(absorber_matrix(a.scaled(float(t))), p).vector
            assert abs(np.dot(q, normal)) < 1e-12


class TestRetarder:
    """Tests for elliptic birefringent elements."""

    def test_unitary(self):
        """Test that retarders are unitary."""
        m = retarder_matrix(RetarderSpec(axis=PoincarePoint.from_vector((1, 1, 1)), delta=0.9)).m
        assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-15)

    def test_right_handed_rotation(self):
        """Test a quarter-wave z retarder turns x into y."""
        r = RetarderSpec(axis=Z, delta=math.pi / 2)
        assert np.allclose(induced_sphere_map(retarder_matrix(r), X).vector, Y, atol=1e-14)

    def test_axis_state_fixed(self):
        """Test that the retarder axis is left in place."""
        r = RetarderSpec(axis=PoincarePoint.from_vector((0.0, 0.6, -0.8)), delta=2.1)
        assert np.allclose(induced_sphere_map(element_matrix(r), r.axis).vector, r.axis.vector, atol=1e-14)


class TestSequence:
    """Tests for ordered element products."""

    def test_first_element_acts_first(self):
        """Test that the first element is the rightmost factor."""
        a = AbsorberSpec(axis=Z, alpha=0.5)
        r = RetarderSpec(axis=X, delta=0.4)
        expected = retarder_matrix(r).m @ absorber_matrix(a).m
        assert np.allclose(sequence_matrix([a, r]).m, expected, atol=1e-15)

    def test_empty_sequence_is_identity(self):
        """Test that no elements give the identity."""
        assert np.allclose(sequence_matrix([]).m, JonesMatrix.identity().m)

    def test_intensity_ratio(self):
        """Test the intensity ratio of an eigenstate through a passive absorber."""
        a = AbsorberSpec(axis=Y, alpha=1.0, alpha0=1.0)
        _, ratio = apply_element(absorber_matrix(a), jones_of_poincare(Y))
        assert ratio == pytest.approx(math.exp(-1.0), rel=1e-12)


class TestSphereAngles:
    """Tests for the 2chi/2psi axis convention."""

    def test_poles_and_equator(self):
        """Test the latitude/longitude reading of the angles."""
        assert np.allclose(stokes_from_angles(90, 0).vector, Z, atol=1e-15)
        assert np.allclose(stokes_from_angles(0, 90).vector, Y, atol=1e-15)
        assert np.allclose(stokes_from_angles(0, 0).vector, X, atol=1e-15)

    def test_inverse(self):
        """Test angles_from_stokes undoes stokes_from_angles."""
        two_chi, two_psi = angles_from_stokes(stokes_from_angles(30.0, -120.0))
        assert two_chi == pytest.approx(30.0, abs=1e-12)
        assert two_psi == pytest.approx(-120.0, abs=1e-12)


def random_unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_element(rng):
    axis = random_unit(rng)
    if rng.random() < 0.5:
        return AbsorberSpec(axis=axis, alpha=float(rng.uniform(0.0, 2.0)), alpha0=float(rng.uniform(0.0, 1.0)))
    return RetarderSpec(axis=axis, delta=float(rng.uniform(-math.pi, math.pi)))


class TestRandomizedProperties:
    """Seeded checks of the sphere map over many random states and elements."""

    def test_round_trip(self):
        """Test poincare_of_jones undoes jones_of_poincare over 1000 random points."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            p = random_unit(rng)
            assert np.allclose(poincare_of_jones(jones_of_poincare(p)).vector, p, atol=1e-12)

    def test_map_ignores_complex_scale(self):
        """Test the induced map of c m equals that of m for nonzero complex c."""
        rng = np.random.default_rng(17)
        for _ in range(200):
            m = element_matrix(random_element(rng))
            c = math.exp(rng.uniform(-3.0, 3.0)) * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
            p = random_unit(rng)
            scaled = JonesMatrix(c * m.m)
            assert np.allclose(induced_sphere_map(scaled, p).vector, induced_sphere_map(m, p).vector, atol=1e-12)

    def test_map_of_product_is_composition(self):
        """Test the map of b a equals applying a then b."""
        rng = np.random.default_rng(23)
        for _ in range(200):
            a = element_matrix(random_element(rng))
            b = element_matrix(random_element(rng))
            p = random_unit(rng)
            composed = induced_sphere_map(b, induced_sphere_map(a, p))
            assert np.allclose(induced_sphere_map(b @ a, p).vector, composed.vector, atol=1e-11)

    def test_absorber_drags_toward_axis(self):
        """Test an absorber moves every state along its great circle toward the axis."""
        rng = np.random.default_rng(31)
        for _ in range(200):
            n = random_unit(rng)
            p = random_unit(rng)
            a = AbsorberSpec(axis=n, alpha=float(rng.uniform(0.0, 3.0)), alpha0=float(rng.uniform(0.0, 1.0)))
            q = induced_sphere_map(absorber_matrix(a), p).vector
            assert np.dot(q, n) >= np.dot(p, n) - 1e-12
            assert abs(np.linalg.det(np.array([n, p, q]))) <= 1e-12

    def test_x_absorber_is_matrix_exponential(self):
        """Test the x absorber equals expm(-alpha0 + (alpha/2) sigma_x)."""
        rng = np.random.default_rng(37)
        sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        for _ in range(50):
            alpha, alpha0 = float(rng.uniform(0.0, 3.0)), float(rng.uniform(0.0, 1.0))
            m = absorber_matrix(AbsorberSpec(axis=X, alpha=alpha, alpha0=alpha0)).m
            expected = expm(-alpha0 * np.eye(2) + 0.5 * alpha * sigma_x)
            assert np.allclose(m, expected, rtol=1e-12, atol=1e-13)
