import numpy as np
import pytest
from dataclasses import dataclass

from cdwork.counterdiabatic import (CDConvention, h1_operator, lz_h1_analytic, synthesize_h1,
                                    total_hamiltonian)
from cdwork.linalg import eigendecompose
from cdwork.models import SIGMA_Y, DrivenModel, LandauZener, Protocol
from cdwork.propagation import propagate, transition_probabilities


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class PolyPath(DrivenModel):
    """H0(s) = A + s B + s^2 C with random Hermitian coefficients."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def dim(self):
        return self.a.shape[0]

    @classmethod
    def random(cls, seed, n):
        rng = np.random.default_rng(seed)
        # a dominant diagonal keeps the levels apart along the whole path
        a = np.diag(np.arange(n) * 4.0).astype(complex)
        return cls(a, random_hermitian(rng, n), random_hermitian(rng, n))

    def h0(self, s):
        s = np.asarray(s, dtype=float)[..., None, None]
        return self.a + s * self.b + s**2 * self.c

    def dh0_ds(self, s):
        s = np.asarray(s, dtype=float)[..., None, None]
        return self.b + 2 * s * self.c


LZ = LandauZener(5.0, Protocol("smoothstep", -50.0, 50.0))
GRID = np.linspace(0.0, 1.0, 41)


def h1_from_vectors(model, s, vecs, intensity_time):
    e = np.linalg.eigvalsh(model.h0(s))
    dh = vecs.conj().T @ model.dh0_ds(s) @ vecs
    n = len(e)
    m = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i != j:
                m[i, j] = dh[i, j] / (e[j] - e[i])
    return 1j / intensity_time * vecs @ m @ vecs.conj().T


@pytest.mark.parametrize("seed,n", [(0, 3), (1, 3), (2, 4), (3, 4)])
class TestSynthesizeGeneral:
    def test_hermitian(self, seed, n):
        h1 = synthesize_h1(PolyPath.random(seed, n), GRID, 0.3)
        assert np.max(np.abs(h1 - np.conj(np.swapaxes(h1, -1, -2)))) < 1e-12

    def test_zero_diagonal_in_eigenbasis(self, seed, n):
        model = PolyPath.random(seed, n)
        v = eigendecompose(model.h0(GRID)).eigenvectors
        h1 = synthesize_h1(model, GRID, 0.3)
        inner = np.conj(np.swapaxes(v, -1, -2)) @ h1 @ v
        assert np.max(np.abs(np.diagonal(inner, axis1=-2, axis2=-1))) < 1e-12

    def test_phase_twirl_invariance(self, seed, n):
        model = PolyPath.random(seed, n)
        rng = np.random.default_rng(100 + seed)
        for s in (0.0, 0.3, 0.77, 1.0):
            v = eigendecompose(model.h0(s)).eigenvectors
            twirled = v * np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
            ref = h1_from_vectors(model, s, twirled, 0.3)
            np.testing.assert_allclose(synthesize_h1(model, s, 0.3), ref, atol=1e-12)

    def test_inverse_time_scaling(self, seed, n):
        model = PolyPath.random(seed, n)
        h_a = synthesize_h1(model, GRID, 0.2)
        h_b = synthesize_h1(model, GRID, 0.4)
        np.testing.assert_allclose(h_a, 2 * h_b, rtol=1e-12, atol=1e-14)

    def test_transitionless(self, seed, n):
        model = PolyPath.random(seed, n)
        rec = propagate(model, CDConvention("standard"), 0.5, steps=2000)
        p = transition_probabilities(rec, "h0")
        assert np.min(p[:, 0]) > 1 - 1e-8


class TestLandauZenerTerm:
    def test_zero_without_rate(self):
        np.testing.assert_allclose(synthesize_h1(LZ, 0.0, 0.1), 0.0, atol=1e-15)
        np.testing.assert_array_equal(lz_h1_analytic(LZ, 1.0, 0.1), np.zeros((2, 2)))

    def test_midpoint(self):
        h1 = synthesize_h1(LZ, 0.5, 0.1)
        c = LZ.cd_amplitude(0.5, 0.1)
        assert abs(c) == pytest.approx(150.0)
        np.testing.assert_allclose(h1, c * SIGMA_Y, atol=1e-10)

    def test_analytic_agreement(self):
        s = np.linspace(0.0, 1.0, 101)
        for kind in ("smoothstep", "linear"):
            m = LandauZener(5.0, Protocol(kind, -50.0, 50.0))
            diff = synthesize_h1(m, s, 0.1) - lz_h1_analytic(m, s, 0.1)
            assert np.max(np.abs(diff)) < 1e-10

    def test_halving_intensity_time_doubles(self):
        np.testing.assert_array_equal(lz_h1_analytic(LZ, 0.3, 0.05), 2 * lz_h1_analytic(LZ, 0.3, 0.1))

    def test_dispatch(self):
        np.testing.assert_array_equal(h1_operator(LZ, 0.4, 0.1), lz_h1_analytic(LZ, 0.4, 0.1))


class TestTotalHamiltonian:
    def test_standard_equals_fixed_at_same_time(self):
        a = total_hamiltonian(LZ, GRID, CDConvention("standard"), 0.1)
        b = total_hamiltonian(LZ, GRID, CDConvention("tau_d_fixed", 0.1), 0.1)
        np.testing.assert_array_equal(a, b)

    def test_fixed_intensity_ignores_tau(self):
        conv = CDConvention("tau_d_fixed", 0.1)
        np.testing.assert_array_equal(total_hamiltonian(LZ, GRID, conv, 10.0),
                                      total_hamiltonian(LZ, GRID, conv, 0.1))

    def test_endpoints_equal_h0(self):
        for s in (0.0, 1.0):
            h = total_hamiltonian(LZ, s, CDConvention("standard"), 0.05)
            np.testing.assert_allclose(h, LZ.h0(s), atol=1e-12)

    def test_no_cd(self):
        np.testing.assert_array_equal(total_hamiltonian(LZ, GRID, None, 0.1), LZ.h0(GRID))

    def test_analytic_flag(self):
        conv = CDConvention("standard")
        h = total_hamiltonian(LZ, GRID, conv, 0.1, analytic=True)
        np.testing.assert_allclose(h, total_hamiltonian(LZ, GRID, conv, 0.1), atol=1e-10)


class TestConvention:
    def test_intensity_time(self):
        assert CDConvention("standard").intensity_time(0.3) == 0.3
        assert CDConvention("tau_d_fixed", 0.1).intensity_time(7.0) == 0.1

    @pytest.mark.parametrize("kwargs", [
        {"mode": "tau_d_fixed"},
        {"mode": "tau_d_fixed", "tau_d": -1.0},
        {"mode": "standard", "tau_d": 0.1},
        {"mode": "bogus"},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            CDConvention(**kwargs)
