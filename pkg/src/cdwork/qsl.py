"""Quantum speed limits for driven closed evolutions (hbar = 1).

All three bounds have the form ``tau >= numerator / <rate>`` where
``<rate>`` is a time average over the propagated trajectory:

* Mandelstam-Tamm: L / <std(H)>
* excess work:     L / sqrt(<E_max - E_min> <W_ex>)
* trace norm (Margolus-Levitin type): sin^2(L) / <||H psi||>

L is the Bures angle between initial and final state. Inside these bounds
the excess work is the instantaneous ``<H(t)> - E_1(t)``; the convention
selects whether E_1(t) comes from H0 (standard) or from the total
Hamiltonian at fixed tau_d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counterdiabatic import CDConvention
from .energetics import adiabatic_spectra, max_gap, mean_energy, time_average
from .errors import DimensionMismatch, ZeroDenominator
from .linalg import energy_std, trace_norm_product
from .propagation import EvolutionRecord

RATE_FLOOR = 1e-14
# Bures angles below this are round-off of a stationary evolution
ANGLE_FLOOR = 1e-12
# excess work below this fraction of the mean gap is round-off of an exact zero
EXCESS_WORK_RTOL = 1e-10
ORDERING_RTOL = 1e-9


def bures_angle(a, b) -> float:
    """arccos |<a|b>| for normalized pure states, in [0, pi/2].

    Evaluated as 2 arcsin(d / 2) with d the distance between ``a`` and the
    phase-aligned ``b``; unlike arccos this stays accurate near L = 0.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"state shapes differ: {a.shape} vs {b.shape}")
    ov = np.vdot(b, a)
    if abs(ov) == 0.0:
        return float(np.pi / 2)
    d = np.linalg.norm(a - (ov / abs(ov)) * b)
    return float(min(2.0 * np.arcsin(min(d / 2.0, 1.0)), np.pi / 2))


def _bound(numerator: float, rate: float, what: str) -> float:
    if numerator == 0.0:
        return 0.0
    if rate < RATE_FLOOR:
        raise ZeroDenominator(f"{what}: time-averaged rate {rate:.2e} vanishes")
    return float(numerator / rate)


def _angle(record: EvolutionRecord) -> float:
    ang = bures_angle(record.initial_state, record.final_state)
    return 0.0 if ang < ANGLE_FLOOR else ang


def mt_bound(record: EvolutionRecord) -> float:
    """Mandelstam-Tamm minimal time."""
    spread = energy_std(record.hamiltonians, record.states)
    rate = time_average(spread, record.s_grid)
    return _bound(_angle(record), rate, "Mandelstam-Tamm bound")


def instantaneous_excess_work(record: EvolutionRecord,
                              convention: CDConvention | None = None):
    """Return (W_ex(t), Delta E(t)) with W_ex = <H> - E_1 and Delta E = E_N - E_1."""
    spectra = adiabatic_spectra(record, convention)
    w_ex = mean_energy(record) - spectra.eigenvalues[:, 0]
    return w_ex, max_gap(spectra)


def excess_work_bound(record: EvolutionRecord,
                      convention: CDConvention | None = None) -> float:
    """Minimal time from the time-averaged gap and time-averaged excess work."""
    angle = _angle(record)
    if angle == 0.0:
        return 0.0
    w_ex, gap = instantaneous_excess_work(record, convention)
    avg_w = time_average(w_ex, record.s_grid)
    avg_gap = time_average(gap, record.s_grid)
    if avg_w <= EXCESS_WORK_RTOL * avg_gap:
        raise ZeroDenominator(f"excess-work bound: time-averaged excess work {avg_w:.2e} vanishes")
    rate = float(np.sqrt(avg_gap * avg_w))
    return _bound(angle, rate, "excess-work bound")


def ml_trace_bound(record: EvolutionRecord) -> float:
    """Trace-norm minimal time sin^2(L) / <||rho H||_1>."""
    rate = time_average(trace_norm_product(record.hamiltonians, record.states), record.s_grid)
    return _bound(np.sin(_angle(record)) ** 2, rate, "trace-norm bound")


@dataclass(frozen=True)
class QSLReport:
    """Speed-limit times for one trajectory; None marks a bound that does not apply."""

    tau: float
    bures_angle: float
    tau_mt: float | None
    tau_wex: float | None
    tau_ml: float | None

    @property
    def ordering_ok(self) -> bool:
        slack = self.tau * (1.0 + ORDERING_RTOL)
        return all(t is None or t <= slack for t in (self.tau_mt, self.tau_wex, self.tau_ml))


def qsl_report(record: EvolutionRecord, convention: CDConvention | None = None) -> QSLReport:
    def attempt(fn, *args):
        try:
            return fn(*args)
        except ZeroDenominator:
            return None

    return QSLReport(
        tau=record.tau,
        bures_angle=_angle(record),
        tau_mt=attempt(mt_bound, record),
        tau_wex=attempt(excess_work_bound, record, convention),
        tau_ml=attempt(ml_trace_bound, record),
    )


@dataclass(frozen=True)
class InequalityChain:
    """Both sides of the steps leading from the MT bound to the excess-work bound.

    Pointwise: variance <= (E_N - <H>)(<H> - E_1) <= Delta E * W_ex.
    Averaged:  <sqrt(Delta E W_ex)> <= sqrt(<Delta E> <W_ex>).
    """

    variance: np.ndarray
    bhatia_davis: np.ndarray
    gap_times_excess: np.ndarray
    avg_sqrt_product: float
    sqrt_avg_product: float

    def pointwise_ok(self, slack: float = 1e-9) -> bool:
        return bool(np.all(self.variance <= self.bhatia_davis + slack)
                    and np.all(self.bhatia_davis <= self.gap_times_excess + slack))

    def cauchy_schwarz_ok(self, slack: float = 1e-9) -> bool:
        return self.avg_sqrt_product <= self.sqrt_avg_product + slack


def inequality_chain(record: EvolutionRecord) -> InequalityChain:
    """Evaluate the chain for the Hamiltonian that drives ``record``.

    Bhatia-Davis bounds the variance of an operator by its own extreme
    eigenvalues, so E_1 and E_N here are those of the driving Hamiltonian.
    """
    spectra = record.total_spectra
    energy = mean_energy(record)
    e_min = spectra.eigenvalues[:, 0]
    e_max = spectra.eigenvalues[:, -1]
    w_ex = energy - e_min
    gap = e_max - e_min
    product = gap * w_ex
    return InequalityChain(
        variance=energy_std(record.hamiltonians, record.states) ** 2,
        bhatia_davis=(e_max - energy) * (energy - e_min),
        gap_times_excess=product,
        avg_sqrt_product=time_average(np.sqrt(np.clip(product, 0.0, None)), record.s_grid),
        sqrt_avg_product=float(np.sqrt(max(time_average(gap, record.s_grid)
                                           * time_average(w_ex, record.s_grid), 0.0))),
    )
