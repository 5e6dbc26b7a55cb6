"""Counterdiabatic (transitionless) driving terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eigendecompose
from .models import SIGMA_Y, DrivenModel, LandauZener, check_schedule

CD_MODES = ("standard", "tau_d_fixed")


@dataclass(frozen=True)
class CDConvention:
    """How the strength of the counterdiabatic term is set.

    ``standard``: H1 scales as 1/tau with the protocol duration.
    ``tau_d_fixed``: H1 scales as 1/tau_d, a driving duration that is held
    fixed when tau is varied (in particular in the adiabatic limit).
    """

    mode: str = "standard"
    tau_d: float | None = None

    def __post_init__(self):
        if self.mode not in CD_MODES:
            raise ValueError(f"unknown CD mode {self.mode!r}; expected one of {CD_MODES}")
        if self.mode == "tau_d_fixed":
            if self.tau_d is None or not self.tau_d > 0:
                raise ValueError("tau_d_fixed convention needs a positive tau_d")
        elif self.tau_d is not None:
            raise ValueError("tau_d is only meaningful for the tau_d_fixed convention")

    def intensity_time(self, tau: float) -> float:
        return float(tau) if self.mode == "standard" else float(self.tau_d)


def synthesize_h1(model: DrivenModel, s, intensity_time: float) -> np.ndarray:
    """Counterdiabatic Hamiltonian built from the spectrum of ``model.h0``.

    Uses <m|d/ds|n> = <m|dH0/ds|n> / (E_n - E_m) for m != n, so the result
    does not depend on the phases chosen for the eigenvectors.
    """
    if not intensity_time > 0:
        raise ValueError("intensity_time must be positive")
    s = check_schedule(s)
    spec = eigendecompose(model.h0(s))
    v = spec.eigenvectors
    vh = np.conj(np.swapaxes(v, -1, -2))
    dh = vh @ model.dh0_ds(s) @ v
    e = spec.eigenvalues
    denom = e[..., None, :] - e[..., :, None]  # [m, n] -> E_n - E_m
    n = spec.dim
    off = ~np.eye(n, dtype=bool)
    m_eig = np.zeros_like(dh)
    m_eig[..., off] = dh[..., off] / denom[..., off]
    h1 = (1j / intensity_time) * (v @ m_eig @ vh)
    return 0.5 * (h1 + np.conj(np.swapaxes(h1, -1, -2)))


def lz_h1_analytic(params: LandauZener, s, intensity_time: float) -> np.ndarray:
    """Closed-form counterdiabatic term C(s) sigma_y of the Landau-Zener model."""
    c = params.cd_amplitude(s, intensity_time)
    return np.asarray(c)[..., None, None] * SIGMA_Y


def h1_operator(model: DrivenModel, s, intensity_time: float) -> np.ndarray:
    if isinstance(model, LandauZener):
        return lz_h1_analytic(model, s, intensity_time)
    return synthesize_h1(model, s, intensity_time)


def total_hamiltonian(model: DrivenModel, s, convention: CDConvention | None, tau: float,
                      analytic: bool = False) -> np.ndarray:
    """H0(s) + H1(s); ``convention=None`` means no counterdiabatic term.

    By default H1 is synthesized from the spectrum of H0 for every model;
    ``analytic=True`` uses the closed form where one exists.
    """
    h0 = model.h0(s)
    if convention is None:
        return h0
    t = convention.intensity_time(tau)
    h1 = h1_operator(model, s, t) if analytic else synthesize_h1(model, s, t)
    return h0 + h1
