"""Unitary time propagation on a uniform schedule grid.

The Schrödinger equation in the schedule variable reads
``i d/ds psi = tau H(s) psi`` (hbar = 1). A step from s_k to s_{k+1} is
``exp(-i Omega_k)`` where Omega_k is a Hermitian Magnus exponent; it is
exponentiated through its eigendecomposition, so every step is unitary to
round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .counterdiabatic import CDConvention, total_hamiltonian
from .errors import NonUnitaryStep, NotConverged, NumericalError
from .linalg import SpectralDecomposition, as_state, eigendecompose, jacobi_eigh
from .models import DrivenModel

STEPPERS = ("magnus4", "midpoint")
DEFAULT_STEPS = 4000
MIN_STEPS = 100
_UNITARITY_ATOL = 1e-10
_NORM_ATOL = 1e-9

HamiltonianPath = Callable[[np.ndarray], np.ndarray]


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def magnus_exponents(hamiltonian: HamiltonianPath, tau: float, steps: int,
                     stepper: str = "magnus4") -> np.ndarray:
    """Hermitian exponents Omega_k with U_k = exp(-i Omega_k), shape (M, N, N).

    ``midpoint`` is the exponential midpoint rule (second order).
    ``magnus4`` is the two-point Gauss-Legendre Magnus integrator (fourth order).
    """
    h = 1.0 / steps
    k = np.arange(steps)
    if stepper == "midpoint":
        return tau * h * hamiltonian((k + 0.5) * h)
    if stepper == "magnus4":
        c = np.sqrt(3.0) / 6.0
        ha = hamiltonian((k + 0.5 - c) * h)
        hb = hamiltonian((k + 0.5 + c) * h)
        dt = tau * h
        comm = ha @ hb - hb @ ha
        return _hermitize(0.5 * dt * (ha + hb) + 1j * (np.sqrt(3.0) / 12.0) * dt**2 * comm)
    raise ValueError(f"unknown stepper {stepper!r}; expected one of {STEPPERS}")


def step_propagators(hamiltonian: HamiltonianPath, tau: float, steps: int,
                     stepper: str = "magnus4") -> np.ndarray:
    omega = magnus_exponents(hamiltonian, tau, steps, stepper)
    w, v = jacobi_eigh(omega)
    u = (v * np.exp(-1j * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    n = u.shape[-1]
    dev = np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(n)))
    if dev > _UNITARITY_ATOL:
        raise NonUnitaryStep(f"step propagator deviates from unitarity by {dev:.2e}")
    return u


def _evolve(u: np.ndarray, psi0: np.ndarray, keep_all: bool = True) -> np.ndarray:
    psi = np.array(psi0, dtype=complex)
    if not keep_all:
        for uk in u:
            psi = uk @ psi
        return psi
    out = np.empty((u.shape[0] + 1, psi.shape[0]), dtype=complex)
    out[0] = psi
    for k, uk in enumerate(u):
        psi = uk @ psi
        out[k + 1] = psi
    return out


def schedule_grid(steps: int) -> np.ndarray:
    return np.arange(steps + 1) / steps


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class EvolutionRecord:
    """A propagated trajectory sampled on ``s_grid`` (M + 1 points).

    ``hamiltonians`` are the total Hamiltonians actually driving the state;
    ``h0`` the reference Hamiltonians. Without counterdiabatic driving the
    two coincide and ``convention`` is None.
    """

    s_grid: np.ndarray
    tau: float
    states: np.ndarray
    h0: np.ndarray
    hamiltonians: np.ndarray
    h0_spectra: SpectralDecomposition
    total_spectra: SpectralDecomposition
    convention: CDConvention | None
    stepper: str
    metadata: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.s_grid) - 1

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    @property
    def times(self) -> np.ndarray:
        return self.tau * self.s_grid

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def intensity_time(self) -> float | None:
        if self.convention is None:
            return None
        return self.convention.intensity_time(self.tau)

    @property
    def h1(self) -> np.ndarray:
        return self.hamiltonians - self.h0


def propagate(model: DrivenModel, convention: CDConvention | None, tau: float,
              initial=None, steps: int = DEFAULT_STEPS, stepper: str = "magnus4",
              tolerance: float = 1e-8, check_convergence: bool = True) -> EvolutionRecord:
    """Integrate the driven Schrödinger equation for H0 (+ H1 if ``convention``).

    The initial state defaults to the ground state of H0(0). When
    ``check_convergence`` is set the run is repeated with twice the steps and
    NotConverged is raised if the final states differ by more than
    ``tolerance`` in norm.
    """
    if steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} steps, got {steps}")
    if not tau > 0:
        raise ValueError("tau must be positive")
    if stepper not in STEPPERS:
        raise ValueError(f"unknown stepper {stepper!r}; expected one of {STEPPERS}")

    def hamiltonian(s):
        return total_hamiltonian(model, s, convention, tau)

    s_grid = schedule_grid(steps)
    h0 = np.asarray(model.h0(s_grid), dtype=complex)
    ham = np.asarray(hamiltonian(s_grid), dtype=complex)
    h0_spec = eigendecompose(h0)
    tot_spec = h0_spec if convention is None else eigendecompose(ham)

    if initial is None:
        psi0 = h0_spec.eigenvectors[0, :, 0]
    else:
        psi0 = as_state(initial)
        if psi0.shape != (model.dim,):
            raise ValueError(f"initial state must have shape ({model.dim},)")

    states = _evolve(step_propagators(hamiltonian, tau, steps, stepper), psi0)
    norms = np.linalg.norm(states, axis=-1)
    drift = np.max(np.abs(norms - 1.0))
    if drift > _NORM_ATOL:
        raise NonUnitaryStep(f"state norm drifted by {drift:.2e}")
    # round-off drift is O(M eps); squared energies (~1e5) would amplify it.
    # states[0] is left exactly as given.
    states[1:] /= norms[1:, None]

    metadata = {"norm_drift": float(drift)}
    if check_convergence:
        fine = _evolve(step_propagators(hamiltonian, tau, 2 * steps, stepper), psi0,
                       keep_all=False)
        err = float(np.linalg.norm(fine - states[-1]))
        metadata["halving_error"] = err
        if err > tolerance:
            raise NotConverged(
                f"step halving changed the final state by {err:.2e} (> {tolerance:.1e}); "
                f"increase steps above {steps}"
            )

    _freeze(s_grid, states, h0, ham)
    return EvolutionRecord(
        s_grid=s_grid, tau=float(tau), states=states, h0=h0, hamiltonians=ham,
        h0_spectra=h0_spec, total_spectra=tot_spec, convention=convention,
        stepper=stepper, metadata=metadata,
    )


def continuous_gauge(vectors: np.ndarray) -> np.ndarray:
    """Remove the phase jumps of gauge-fixed eigenvectors along a path.

    The largest-component gauge is discontinuous wherever the index of the
    largest component changes. Across such a switch the new segment is
    re-phased so that the previous pivot component keeps its phase, which
    makes the sequence continuous without altering its smooth phase drift.
    ``vectors`` has shape (K, N).
    """
    v = np.asarray(vectors, dtype=complex)
    mags = np.abs(v)
    pivots = np.argmax(mags >= np.max(mags, axis=-1, keepdims=True) * (1 - 1e-12), axis=-1)
    out = np.empty_like(v)
    offset = 1.0 + 0j
    ref = pivots[0]
    for k in range(len(v)):
        if pivots[k] != ref:
            comp = v[k, ref]
            offset = offset * np.conj(comp) / abs(comp)
            ref = pivots[k]
        out[k] = v[k] * offset
    return out


@dataclass(frozen=True)
class AdiabaticReference:
    """Adiabatically followed eigenstate e^{i gamma} e^{-i omega} |n(s)>."""

    s_grid: np.ndarray
    index: int
    energies: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray
    eigenvectors: np.ndarray

    @property
    def states(self) -> np.ndarray:
        phase = np.exp(1j * self.gamma - 1j * self.omega)
        return phase[:, None] * self.eigenvectors


def adiabatic_reference(hamiltonian: DrivenModel | HamiltonianPath, tau: float,
                        index: int = 0, steps: int = DEFAULT_STEPS) -> AdiabaticReference:
    """Geometric and dynamical phases of eigenstate ``index`` along a path.

    ``hamiltonian`` is a DrivenModel (its H0 is used) or a vectorized
    callable s -> H(s). The Berry connection is evaluated with centered
    finite differences of continuously gauged eigenvectors and both phases
    are accumulated with the trapezoid rule.
    """
    path = hamiltonian.h0 if isinstance(hamiltonian, DrivenModel) else hamiltonian
    s_grid = schedule_grid(steps)
    spec = eigendecompose(path(s_grid))
    energies = spec.eigenvalues[:, index]
    vecs = continuous_gauge(spec.eigenvectors[:, :, index])

    ds = 1.0 / steps
    dvec = np.gradient(vecs, ds, axis=0, edge_order=2)
    conn = np.einsum("ki,ki->k", np.conj(vecs), dvec)
    # <n|dn> is imaginary; a real part beyond the O(ds^2) truncation signals a gauge jump
    limit = 1e-8 + ds * np.max(np.sum(np.abs(dvec) ** 2, axis=-1))
    resid = np.max(np.abs(conn.real))
    if resid > limit:
        raise NumericalError(f"Berry connection has real residual {resid:.2e} (> {limit:.2e})")

    gamma = -cumulative_trapezoid(conn.imag, s_grid, initial=0.0)
    omega = tau * cumulative_trapezoid(energies, s_grid, initial=0.0)
    return AdiabaticReference(s_grid, index, energies, gamma, omega, vecs)


def transition_probabilities(record: EvolutionRecord, basis: str = "h0") -> np.ndarray:
    """|<m(s)|psi(s)>|^2 for every grid point, shape (M + 1, N)."""
    if basis == "h0":
        spec = record.h0_spectra
    elif basis == "total":
        spec = record.total_spectra
    else:
        raise ValueError("basis must be 'h0' or 'total'")
    amps = np.einsum("kim,ki->km", np.conj(spec.eigenvectors), record.states)
    return np.abs(amps) ** 2
