import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdwork.errors import OutOfRange
from cdwork.linalg import eigendecompose
from cdwork.models import LandauZener, Protocol

J = 5.0


@pytest.fixture
def smooth():
    return LandauZener(J, Protocol("smoothstep", -50.0, 50.0))


@pytest.fixture
def linear():
    return LandauZener(J, Protocol("linear", -50.0, 50.0))


class TestProtocol:
    def test_smoothstep_midpoint(self):
        p = Protocol("smoothstep", -50.0, 50.0)
        assert p.value(0.5) == 0.0
        assert p.deriv(0.5) == 150.0

    @pytest.mark.parametrize("bi,bf", [(-50.0, 50.0), (3.0, -7.5), (1.0, 1.0)])
    def test_smoothstep_start(self, bi, bf):
        p = Protocol("smoothstep", bi, bf)
        assert p.value(0.0) == bi
        assert p.deriv(0.0) == 0.0
        assert p.value(1.0) == bf
        assert p.deriv(1.0) == 0.0

    def test_linear_quarter(self):
        p = Protocol("linear", -50.0, 50.0)
        assert p.value(0.25) == -25.0
        assert p.deriv(0.25) == 100.0

    def test_exact_endpoints_linear(self):
        p = Protocol("linear", 0.1, 0.7)
        assert p.value(0.0) == 0.1
        assert p.value(1.0) == 0.7

    @pytest.mark.parametrize("s", [-1e-12, 1.0 + 1e-12, np.nan])
    def test_out_of_range(self, s):
        with pytest.raises(OutOfRange):
            Protocol("linear", 0.0, 1.0).value(s)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Protocol("cubic", 0.0, 1.0)

    def test_endpoint_rate_flag(self):
        assert Protocol("smoothstep", -1.0, 1.0).vanishing_endpoint_rate
        assert not Protocol("linear", -1.0, 1.0).vanishing_endpoint_rate

    @given(st.floats(0.0, 1.0), st.sampled_from(["linear", "smoothstep"]))
    def test_derivative_matches_finite_difference(self, s, kind):
        p = Protocol(kind, -50.0, 50.0)
        h = 1e-6
        lo, hi = max(s - h, 0.0), min(s + h, 1.0)
        fd = (p.value(hi) - p.value(lo)) / (hi - lo)
        # a centered difference about the interval midpoint stays second order at the ends
        assert p.deriv(0.5 * (lo + hi)) == pytest.approx(fd, abs=1e-4)


class TestLandauZener:
    def test_h0_symmetric_point(self):
        m = LandauZener(J, Protocol("linear", 0.0, 0.0))
        np.testing.assert_array_equal(m.h0(0.3), [[0, 5], [5, 0]])

    def test_h0_start(self, smooth):
        np.testing.assert_array_equal(smooth.h0(0.0), [[-50, 5], [5, 50]])

    def test_dh0_midpoint(self, smooth):
        np.testing.assert_array_equal(smooth.dh0_ds(0.5), [[150, 0], [0, -150]])

    def test_vectorized_shape(self, smooth):
        assert smooth.h0(np.linspace(0, 1, 7)).shape == (7, 2, 2)

    def test_requires_positive_j(self):
        with pytest.raises(ValueError):
            LandauZener(0.0, Protocol("linear", -1.0, 1.0))

    @pytest.mark.parametrize("s", [0.1, 0.37, 0.5, 0.8])
    def test_h0_derivative_consistent(self, smooth, s):
        h = 1e-6
        fd = (smooth.h0(s + h) - smooth.h0(s - h)) / (2 * h)
        np.testing.assert_allclose(fd, smooth.dh0_ds(s), atol=1e-6)

    def test_spectrum_h0_symmetric(self):
        m = LandauZener(J, Protocol("linear", 0.0, 0.0))
        em, ep, th = m.spectrum_h0(0.5)
        assert (em, ep) == (-5.0, 5.0)
        assert th == pytest.approx(np.pi / 4)

    def test_spectrum_h0_start(self, smooth):
        em, ep, _ = smooth.spectrum_h0(0.0)
        assert ep == pytest.approx(np.sqrt(2525.0), rel=1e-15)
        assert em == -ep

    def test_theta_range_and_continuity(self, smooth):
        _, _, th = smooth.spectrum_h0(np.linspace(0, 1, 1001))
        assert np.all((th > 0) & (th < np.pi / 2))
        # steepest at the crossing, where dtheta/ds = 15; a branch jump would be ~pi/2
        assert np.max(np.abs(np.diff(th))) < 0.02

    def test_analytic_matches_numerical(self, smooth):
        s = np.linspace(0.0, 1.0, 101)
        spec = eigendecompose(smooth.h0(s))
        em, ep, _ = smooth.spectrum_h0(s)
        np.testing.assert_allclose(spec.eigenvalues, np.stack([em, ep], -1), atol=1e-12)
        vec = smooth.eigenvectors_h0(s)
        # compare rays: |<analytic|numerical>| = 1
        ov = np.abs(np.einsum("kim,kim->km", vec.conj(), spec.eigenvectors))
        np.testing.assert_allclose(ov, 1.0, atol=1e-12)


class TestCDAmplitude:
    def test_midpoint_magnitude(self, smooth):
        c = smooth.cd_amplitude(0.5, 0.1)
        assert abs(c) == pytest.approx(150.0, rel=1e-14)

    def test_linear_midpoint(self, linear):
        assert abs(linear.cd_amplitude(0.5, 0.1)) == pytest.approx(100.0, rel=1e-14)

    def test_vanishes_at_smoothstep_ends(self, smooth):
        assert smooth.cd_amplitude(0.0, 0.1) == 0.0
        assert smooth.cd_amplitude(1.0, 0.1) == 0.0

    def test_inverse_scaling(self, smooth):
        s = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(smooth.cd_amplitude(s, 0.05), 2 * smooth.cd_amplitude(s, 0.1))


class TestSpectrumTotal:
    def test_midpoint(self, smooth):
        em, ep, _, _ = smooth.spectrum_total(0.5, 0.1)
        assert ep == pytest.approx(np.sqrt(22525.0), rel=1e-14)
        assert ep == pytest.approx(150.083, abs=1e-3)
        assert em == -ep

    def test_linear_midpoint(self, linear):
        _, ep, _, _ = linear.spectrum_total(0.5, 0.1)
        assert ep == pytest.approx(np.sqrt(10025.0), rel=1e-14)

    def test_reduces_to_h0_without_rate(self, smooth):
        em, ep, th, mu = smooth.spectrum_total(0.0, 0.1)
        e0m, e0p, th0 = smooth.spectrum_h0(0.0)
        assert (em, ep, th, mu) == (e0m, e0p, th0, 0.0)

    def test_numerical_agreement(self, smooth):
        s = np.linspace(0.0, 1.0, 101)
        ham = smooth.h0(s) + smooth.cd_amplitude(s, 0.1)[:, None, None] * np.array([[0, -1j], [1j, 0]])
        spec = eigendecompose(ham)
        em, ep, _, _ = smooth.spectrum_total(s, 0.1)
        np.testing.assert_allclose(spec.eigenvalues, np.stack([em, ep], -1), atol=1e-12)
        vec = smooth.eigenvectors_total(s, 0.1)
        ov = np.abs(np.einsum("kim,kim->km", vec.conj(), spec.eigenvectors))
        np.testing.assert_allclose(ov, 1.0, atol=1e-12)

    @pytest.mark.parametrize("kind", ["smoothstep", "linear"])
    def test_gap_extrema_coincide(self, kind):
        m = LandauZener(J, Protocol(kind, -50.0, 50.0))
        s = np.linspace(0.0, 1.0, 1001)
        _, ep0, _ = m.spectrum_h0(s)
        _, ep, _, _ = m.spectrum_total(s, 0.1)
        assert s[np.argmin(ep0)] == 0.5
        assert s[np.argmax(ep)] == 0.5

    def test_large_tau_d_limit(self, smooth):
        s = np.linspace(0.0, 1.0, 201)
        _, ep0, _ = smooth.spectrum_h0(s)
        _, ep, _, _ = smooth.spectrum_total(s, 1e3)
        assert np.max(np.abs(2 * ep - 2 * ep0)) < 1e-4
