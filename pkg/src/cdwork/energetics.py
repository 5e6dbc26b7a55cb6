"""Work, adiabatic work and excess work along a propagated trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .counterdiabatic import CDConvention
from .errors import InitialNotEigenstate
from .linalg import SpectralDecomposition, eigendecompose, expectation
from .models import LandauZener
from .propagation import EvolutionRecord

EIGENSTATE_TOL = 1e-8


@dataclass(frozen=True)
class WorkSeries:
    s_grid: np.ndarray
    mean_energy: np.ndarray
    work: np.ndarray
    adiabatic_work: np.ndarray
    excess_work: np.ndarray
    branch: int
    convention: CDConvention | None


@dataclass(frozen=True)
class TimeAveragedCosts:
    avg_excess_work: float
    avg_max_gap: float


def adiabatic_hamiltonians(record: EvolutionRecord,
                           convention: CDConvention | None = None) -> np.ndarray:
    """Total Hamiltonians whose eigenvalues define the adiabatic reference.

    The counterdiabatic term scales as 1/T with T its intensity time. Under
    the ``standard`` convention T = tau, so the term vanishes in the
    adiabatic limit tau -> infinity and only H0 remains. Under
    ``tau_d_fixed`` the term is kept at intensity 1/tau_d. The recorded H1
    is rescaled, so no model evaluation is needed.
    """
    if record.convention is None:
        return record.hamiltonians
    if convention is None:
        convention = record.convention
    if convention.mode == "standard":
        return record.h0
    scale = record.intensity_time / convention.tau_d
    if scale == 1.0:
        return record.hamiltonians
    return record.h0 + scale * record.h1


def adiabatic_spectra(record: EvolutionRecord,
                      convention: CDConvention | None = None) -> SpectralDecomposition:
    ham = adiabatic_hamiltonians(record, convention)
    if ham is record.h0:
        return record.h0_spectra
    if ham is record.hamiltonians:
        return record.total_spectra
    return eigendecompose(ham)


def eigen_branch(state: np.ndarray, spectrum: SpectralDecomposition,
                 tol: float = EIGENSTATE_TOL) -> int | None:
    """Index of the eigenvector ``state`` coincides with (up to phase), else None."""
    overlaps = np.abs(np.conj(spectrum.eigenvectors).T @ state)
    k = int(np.argmax(overlaps))
    return k if overlaps[k] >= 1.0 - tol else None


def _initial_branch(record: EvolutionRecord, spectra: SpectralDecomposition) -> int:
    psi0 = record.initial_state
    for spec in (spectra[0], record.h0_spectra[0]):
        k = eigen_branch(psi0, spec)
        if k is not None:
            return k
    raise InitialNotEigenstate(
        "initial state is not an eigenstate of the adiabatic or reference Hamiltonian at s=0"
    )


def mean_energy(record: EvolutionRecord) -> np.ndarray:
    return expectation(record.hamiltonians, record.states)


def work_series(record: EvolutionRecord, adiabatic_basis: str = "total",
                convention: CDConvention | None = None) -> WorkSeries:
    """W(s), W_ad(s) and W_ex(s) = W(s) - W_ad(s) for ``record``.

    W(s) = E(s) - E(0) with E the mean energy of the driving Hamiltonian.
    W_ad(s) = E_n(s) - E(0), where E_n follows the eigenvalue branch n the
    initial state belongs to, taken from H0 (``adiabatic_basis="h0"``) or
    from the adiabatic-limit total Hamiltonian selected by ``convention``
    (defaults to the record's own convention).
    """
    if adiabatic_basis == "h0":
        spectra = record.h0_spectra
    elif adiabatic_basis == "total":
        spectra = adiabatic_spectra(record, convention)
    else:
        raise ValueError("adiabatic_basis must be 'h0' or 'total'")
    n = _initial_branch(record, spectra)

    energy = mean_energy(record)
    work = energy - energy[0]
    w_ad = spectra.eigenvalues[:, n] - energy[0]
    return WorkSeries(
        s_grid=record.s_grid, mean_energy=energy, work=work, adiabatic_work=w_ad,
        excess_work=work - w_ad, branch=n,
        convention=convention if convention is not None else record.convention,
    )


def excess_work_closed_form_lz(params: LandauZener, s, tau_d: float):
    """sqrt(B^2 + J^2 + C^2) - sqrt(B^2 + J^2) for the ground-state branch."""
    b, _ = params.field(s)
    c = params.cd_amplitude(s, tau_d)
    e0 = np.hypot(b, params.J)
    # difference of square roots without cancellation
    return c**2 / (np.sqrt(e0**2 + c**2) + e0)


def time_average(values, s_grid=None) -> float:
    """(1/tau) * integral over t of f, i.e. the integral of f(s) over [0, 1].

    Trapezoid rule on a uniform grid (``s_grid`` defaults to linspace(0, 1)).
    """
    y = np.asarray(values, dtype=float)
    if s_grid is None:
        s_grid = np.linspace(0.0, 1.0, len(y))
    return float(trapezoid(y, s_grid))


def max_gap(spectra: SpectralDecomposition) -> np.ndarray:
    return spectra.eigenvalues[..., -1] - spectra.eigenvalues[..., 0]


def time_averaged_costs(record: EvolutionRecord,
                        convention: CDConvention | None = None) -> TimeAveragedCosts:
    """Time-averaged excess work and time-averaged maximum energy gap."""
    series = work_series(record, "total", convention)
    spectra = adiabatic_spectra(record, convention)
    return TimeAveragedCosts(
        avg_excess_work=time_average(series.excess_work, record.s_grid),
        avg_max_gap=time_average(max_gap(spectra), record.s_grid),
    )


def work_decomposition(record: EvolutionRecord, s_index: int):
    """Work at grid point ``s_index`` from transition probabilities.

    Requires the initial state to be the l-th eigenstate of H(0). Returns
    ``(p, energies, work)`` with p[m] = |<m(s)|psi(s)>|^2, energies the
    instantaneous eigenvalues of H(s), and
    ``work = sum_m p[m] (E_m(s) - E_l(0))``.
    """
    spec = record.total_spectra
    l = eigen_branch(record.initial_state, spec[0])
    if l is None:
        raise InitialNotEigenstate("initial state is not an eigenstate of H(0)")
    vecs = spec.eigenvectors[s_index]
    p = np.abs(np.conj(vecs).T @ record.states[s_index]) ** 2
    energies = spec.eigenvalues[s_index]
    work = float(np.sum(p * (energies - spec.eigenvalues[0, l])))
    return p, energies, work
