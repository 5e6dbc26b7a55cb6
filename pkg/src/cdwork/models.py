"""Driving protocols and the Landau-Zener model.

The dimensionless schedule parameter ``s = t / tau`` runs over [0, 1]. All
model methods are vectorized: pass a scalar ``s`` for a single ``(N, N)``
matrix or an array for a stack ``(..., N, N)``.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PROTOCOL_KINDS = ("linear", "smoothstep")


def check_schedule(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise OutOfRange("schedule parameter s must lie in [0, 1]")
    return s


@dataclass(frozen=True)
class Protocol:
    """Schedule lambda(s) of a control parameter from lambda_i to lambda_f."""

    kind: str
    lambda_i: float
    lambda_f: float

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}; expected one of {PROTOCOL_KINDS}")

    def _shape(self, s):
        if self.kind == "linear":
            return s, np.ones_like(s)
        return 3 * s**2 - 2 * s**3, 6 * s - 6 * s**2

    def value(self, s):
        s = check_schedule(s)
        f, _ = self._shape(s)
        out = self.lambda_i + (self.lambda_f - self.lambda_i) * f
        # exact endpoint values regardless of round-off in the polynomial
        out = np.where(s == 1.0, self.lambda_f, np.where(s == 0.0, self.lambda_i, out))
        return out[()] if out.ndim == 0 else out

    def deriv(self, s):
        """d lambda / ds."""
        s = check_schedule(s)
        _, df = self._shape(s)
        out = (self.lambda_f - self.lambda_i) * df
        return out[()] if out.ndim == 0 else out

    @property
    def vanishing_endpoint_rate(self) -> bool:
        return self.kind == "smoothstep" or self.lambda_i == self.lambda_f


class DrivenModel(abc.ABC):
    """A reference Hamiltonian H0(s) together with its s-derivative."""

    dim: int

    @abc.abstractmethod
    def h0(self, s) -> np.ndarray:
        ...

    @abc.abstractmethod
    def dh0_ds(self, s) -> np.ndarray:
        ...


@dataclass(frozen=True)
class LandauZener(DrivenModel):
    """H0(s) = B(s) sigma_z + J sigma_x with B following ``protocol``."""

    J: float
    protocol: Protocol
    dim: int = 2

    def __post_init__(self):
        if not self.J > 0:
            raise ValueError("J must be positive")

    def field(self, s):
        return self.protocol.value(s), self.protocol.deriv(s)

    def h0(self, s):
        b, _ = self.field(s)
        b = np.asarray(b)[..., None, None]
        return b * SIGMA_Z + self.J * SIGMA_X

    def dh0_ds(self, s):
        _, bdot = self.field(s)
        return np.asarray(bdot)[..., None, None] * SIGMA_Z

    def spectrum_h0(self, s):
        """Return ``(E_minus, E_plus, theta)`` of H0(s)."""
        b, _ = self.field(s)
        e = np.hypot(b, self.J)
        theta = 0.5 * np.arctan2(self.J, b)
        return -e, e, theta

    def cd_amplitude(self, s, intensity_time: float):
        """Coefficient C(s) of sigma_y in the counterdiabatic term.

        The sign is the one that cancels diabatic transitions for
        sigma_y = [[0, -i], [i, 0]].
        """
        if not intensity_time > 0:
            raise ValueError("intensity_time must be positive")
        b, bdot = self.field(s)
        return -self.J * bdot / (2.0 * intensity_time * (b**2 + self.J**2))

    def spectrum_total(self, s, tau_d: float):
        """Return ``(E_minus, E_plus, theta_c, mu)`` of H0 + C sigma_y."""
        b, _ = self.field(s)
        c = self.cd_amplitude(s, tau_d)
        r = np.hypot(c, self.J)
        e = np.sqrt(b**2 + r**2)
        theta_c = 0.5 * np.arctan2(r, b)
        mu = np.arctan2(c, self.J)
        return -e, e, theta_c, mu

    def eigenvectors_h0(self, s) -> np.ndarray:
        """Analytic eigenvectors of H0 as columns ``[minus, plus]``."""
        _, _, th = self.spectrum_h0(s)
        return _two_level_vectors(th, np.zeros_like(th))

    def eigenvectors_total(self, s, tau_d: float) -> np.ndarray:
        _, _, th, mu = self.spectrum_total(s, tau_d)
        return _two_level_vectors(th, mu)


def _two_level_vectors(theta, mu) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    ph = np.exp(1j * np.asarray(mu))
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -np.sin(theta)
    out[..., 1, 0] = np.cos(theta) * ph
    out[..., 0, 1] = np.cos(theta)
    out[..., 1, 1] = np.sin(theta) * ph
    return out
