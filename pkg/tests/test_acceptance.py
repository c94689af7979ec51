#!/usr/bin/env python3
"""End-to-end checks of the optical Thomas rotation against independent routes.

Cross-platform compatible (Windows, macOS, Linux).
"""

import math
import sys
from pathlib import Path

# Add lib to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts" / "lib"))

import numpy as np
import pytest

from cli import parse_scenario_file
from geometry import HyperbolicPolyline, arc_angle
from jones import AbsorberSpec, absorber_matrix, induced_sphere_map, tan_half_map
from lorentz import REST, FourVelocity, boost_matrix, polar_decompose, rotation_axis_angle
from phases import (
    close_sequence,
    complete_closure,
    find_rapidity_for_angle,
    m_element_rotation,
    sequence_loop,
    thomas_report,
)
from sim import chain_lorentz, run_scenario
from wilson import compare_loop, compose_rotations, exact_loop_matrix, fan_triangle_rotations, loop_matrix, wilson_loop

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
X = (1.0, 0.0, 0.0)
Z = (0.0, 0.0, 1.0)


def folded(a: float, b: float) -> float:
    """Distance between two angles modulo 2 pi."""
    return abs(math.remainder(a - b, 2 * math.pi))


def random_absorber(rng) -> AbsorberSpec:
    v = rng.normal(size=3)
    return AbsorberSpec(axis=v / np.linalg.norm(v), alpha=float(rng.uniform(0.1, 2.0)))


class TestThreeWayAgreement:
    """Rotation angle, pole phase and solid angle of random closed triples."""

    def test_random_triples(self):
        """Test 200 random closures agree three ways within 1e-8."""
        rng = np.random.default_rng(1905)
        for _ in range(200):
            _, seq = close_sequence(random_absorber(rng), random_absorber(rng))
            report = thomas_report(seq, samples_per_leg=8)
            angle = report.rotation.angle
            from_phase = 2 * abs(report.phase_n)
            from_area = abs(report.omega)
            assert folded(angle, from_phase) <= 1e-8
            assert folded(angle, from_area) <= 1e-8
            assert folded(from_phase, from_area) <= 1e-8


class TestWilsonConvergence:
    """Path-ordered integral around the loop of the z/x closed triple."""

    def test_matches_oracle(self):
        """Test agreement at 10^4 steps and second-order error decay."""
        _, seq = close_sequence(AbsorberSpec(axis=Z, alpha=1.0), AbsorberSpec(axis=X, alpha=1.0))
        loop = sequence_loop(seq.elements)
        assert compare_loop(loop, 10_000).angle_error <= 1e-6

        exact = exact_loop_matrix(loop)
        errors = [np.linalg.norm(loop_matrix(loop, n) - exact, 2) for n in (64, 128, 256, 512)]
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.5 <= coarse / fine <= 4.5

        assert m_element_rotation(seq.elements).angle == pytest.approx(wilson_loop(loop, 10_000).angle, abs=1e-6)


class TestAberration:
    """The Jones tan-half map against the boost action on null directions."""

    def test_grid(self):
        """Test a 100 x 100 grid of polar angle and rapidity."""
        thetas = np.linspace(0.0, math.pi, 102)[1:-1]
        alphas = np.linspace(0.0, 5.0, 100)
        worst = 0.0
        for alpha in alphas:
            L = boost_matrix(Z, float(alpha)).L
            for theta in thetas:
                k = L @ np.array([1.0, math.sin(theta), 0.0, math.cos(theta)])
                worst = max(worst, abs(k[3] / k[0] - math.cos(tan_half_map(float(theta), float(alpha)))))
        assert worst <= 1e-10

    def test_jones_matches_boost(self):
        """Test the absorber's sphere map is the boost's null-direction map for a tilted axis."""
        axis = np.array([0.48, -0.6, 0.64])
        a = AbsorberSpec(axis=axis, alpha=1.7)
        L = boost_matrix(axis, 1.7).L
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = rng.normal(size=3)
            p /= np.linalg.norm(p)
            k = L @ np.concatenate([[1.0], p])
            assert np.allclose(induced_sphere_map(absorber_matrix(a), p).vector, k[1:] / k[0], atol=1e-12)


class TestPlanarity:
    """The closing axis lies on the great circle of the first two."""

    def test_random_completions(self):
        """Test 1000 random closures."""
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(1000):
            a1, a2 = random_absorber(rng), random_absorber(rng)
            a3, _ = close_sequence(a1, a2)
            worst = max(worst, abs(float(np.dot(a3.axis.vector, np.cross(a1.axis.vector, a2.axis.vector)))))
        assert worst <= 1e-9


class TestFiftyDegrees:
    """Equal orthogonal absorbers tuned to a 50 degree rotation."""

    def test_bisection(self):
        """Test the found rapidity and the rotation it produces."""
        alpha = find_rapidity_for_angle(50.0)
        assert alpha == pytest.approx(1.6690, abs=1e-4)
        _, seq = close_sequence(AbsorberSpec(axis=Z, alpha=alpha), AbsorberSpec(axis=X, alpha=alpha))
        assert thomas_report(seq).rotation.angle_deg == pytest.approx(50.0, abs=0.1)

    def test_scenario_file(self):
        """Test the bundled scenario reproduces the rotation."""
        _, report = run_scenario(parse_scenario_file(SCENARIOS / "fifty_degrees.json"))
        assert report.status == "closed"
        assert report.rotation.angle_deg == pytest.approx(50.0, abs=0.1)
        assert report.total_overall_absorption == pytest.approx(0.1)


class TestAbelianCase:
    """Collinear absorbers commute and never rotate."""

    def test_collinear_sequences(self):
        """Test random collinear chains, open or closed."""
        rng = np.random.default_rng(11)
        for _ in range(20):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            elements = [AbsorberSpec(axis=v * rng.choice([-1.0, 1.0]), alpha=float(rng.uniform(0.0, 1.0))) for _ in range(3)]
            _, rotation = polar_decompose(chain_lorentz(elements))
            assert rotation_axis_angle(rotation).angle <= 1e-12

            _, seq = complete_closure(elements)
            assert seq.degenerate
            report = thomas_report(seq)
            assert report.rotation.angle <= 1e-12
            assert abs(report.omega) <= 1e-12


class TestNonAbelianWitness:
    """Path ordering matters on a nonplanar loop."""

    def test_skew_quadrilateral(self):
        """Test ordered and reversed fan compositions differ while each triangle is consistent."""
        bz, bx, by = boost_matrix(Z, 1.0), boost_matrix(X, 1.0), boost_matrix((0.0, 1.0, 0.0), 1.0)
        loop = HyperbolicPolyline(
            vertices=[FourVelocity.rest()]
            + [FourVelocity.from_vector(L.L @ REST) for L in (bz, bz @ bx, bz @ bx @ by)]
        )
        fans = fan_triangle_rotations(loop)
        assert np.linalg.norm(compose_rotations(fans) - compose_rotations(fans, reverse=True), 2) > 1e-3
        assert np.allclose(compose_rotations(fans), exact_loop_matrix(loop), atol=1e-9)
        for i in (1, 2):
            triangle = HyperbolicPolyline(vertices=[loop.vertices[0], loop.vertices[i], loop.vertices[i + 1]])
            assert compare_loop(triangle, 2000).angle_error <= 1e-6


class TestProjectorLimit:
    """A very strong absorber acts as a projector onto its axis.

    At alpha = 20 the image of a point theta from the axis sits
    2 atan(e^-20 tan(theta/2)) away, which stays within 1e-8 only while
    tan(theta/2) <= 1e-8 e^20 / 2, i.e. theta below about 135.2 degrees.
    """

    ALPHA = 20.0
    REACH = 1e-8

    @staticmethod
    def sample(rng, theta_deg: float) -> tuple:
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        side = np.cross(n, rng.normal(size=3))
        side /= np.linalg.norm(side)
        theta = math.radians(theta_deg)
        return n, math.cos(theta) * n + math.sin(theta) * side

    def test_bound(self):
        """Test the largest angle pulled within 1e-8 is about 135.2 degrees."""
        limit = math.degrees(2.0 * math.atan(self.REACH * math.exp(self.ALPHA) / 2.0))
        assert limit == pytest.approx(135.2, abs=0.05)
        assert tan_half_map(math.radians(limit), self.ALPHA) == pytest.approx(self.REACH, rel=1e-9)

    def test_strong_absorber(self):
        """Test inputs up to 130 degrees from the axis end within 1e-8 of it."""
        rng = np.random.default_rng(5)
        for _ in range(50):
            n, p = self.sample(rng, rng.uniform(0.0, 130.0))
            m = absorber_matrix(AbsorberSpec(axis=n, alpha=self.ALPHA))
            assert arc_angle(induced_sphere_map(m, p), n) <= self.REACH

    def test_beyond_bound(self):
        """Test inputs past 140 degrees stay farther than 1e-8, as the tan-half law says."""
        rng = np.random.default_rng(6)
        for _ in range(50):
            theta_deg = rng.uniform(140.0, 170.0)
            n, p = self.sample(rng, theta_deg)
            m = absorber_matrix(AbsorberSpec(axis=n, alpha=self.ALPHA))
            distance = arc_angle(induced_sphere_map(m, p), n)
            assert distance > self.REACH
            assert distance == pytest.approx(tan_half_map(math.radians(theta_deg), self.ALPHA), rel=1e-5)
