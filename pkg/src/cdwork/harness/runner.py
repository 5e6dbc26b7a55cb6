"""Scenario execution: fan out over (protocol, tau), collect tables, check figure shapes."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..counterdiabatic import CDConvention
from ..energetics import (excess_work_closed_form_lz, mean_energy, time_average,
                          time_averaged_costs, work_series)
from ..errors import CDWorkError, ConfigInvalid, FigureCheckFailed, NumericalError
from ..linalg import energy_std, expectation
from ..models import LandauZener
from ..propagation import EvolutionRecord, propagate, transition_probabilities
from ..qsl import ORDERING_RTOL, inequality_chain, qsl_report
from .config import ScenarioConfig
from .output import Table, emit_csv

DIP_LOCATION_TOL = 0.1


@dataclass(frozen=True)
class Run:
    """One propagated trajectory of a scenario."""

    protocol: str
    tau: float
    tau_d: float | None
    model: LandauZener
    convention: CDConvention | None
    record: EvolutionRecord

    def cd_amplitude(self) -> np.ndarray:
        if self.convention is None:
            return np.zeros_like(self.record.s_grid)
        return self.model.cd_amplitude(self.record.s_grid, self.record.intensity_time)


@dataclass(frozen=True)
class RunResult:
    config: ScenarioConfig
    tables: dict
    runs: tuple
    warnings: tuple = ()
    provenance: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "provenance": self.provenance,
            "runs": [
                {"protocol": r.protocol, "tau": r.tau, "tau_d": r.tau_d,
                 "norm_drift": r.record.metadata.get("norm_drift"),
                 "halving_error": r.record.metadata.get("halving_error")}
                for r in self.runs
            ],
            "warnings": list(self.warnings),
        }

    def write(self, out_dir) -> list[Path]:
        """Write every table as CSV, one SVG per requested output, and run.json."""
        from .plotting import emit_svg

        if not self.config.outputs:
            return []
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            paths = [emit_csv(t, out / f"{name}.csv") for name, t in self.tables.items()]
            for kind in self.config.outputs:
                paths.append(emit_svg(self, kind, out / f"{kind}.svg"))
            meta = out / "run.json"
            meta.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
            paths.append(meta)
        except OSError as exc:
            raise CDWorkError(f"cannot write results to {out}: {exc}") from exc
        return paths


def _execute(config: ScenarioConfig, protocol: str, tau: float) -> Run:
    model = config.model_for(protocol)
    convention = config.convention_for(tau)
    try:
        record = propagate(model, convention, tau, steps=config.steps, stepper=config.stepper,
                           tolerance=config.tolerance)
    except NumericalError as exc:
        raise type(exc)(f"scenario protocol={protocol} tau={tau:g}: {exc}") from exc
    tau_d = convention.tau_d if convention is not None and convention.mode == "tau_d_fixed" else None
    return Run(protocol, float(tau), tau_d, model, convention, record)


def _stack(runs, build) -> dict:
    parts = [build(r) for r in runs]
    keys = list(parts[0])
    return {k: np.concatenate([np.asarray(p[k]) for p in parts]) for k in keys}


def _per_run(r: Run, n: int) -> dict:
    return {
        "protocol": np.full(n, r.protocol, dtype=object),
        "tau": np.full(n, r.tau),
    }


def timeseries_table(runs) -> Table:
    def build(r: Run):
        rec = r.record
        n = len(rec.s_grid)
        b, _ = r.model.field(rec.s_grid)
        return {
            **_per_run(r, n),
            "s": rec.s_grid,
            "t": rec.times,
            "B": b,
            "C": r.cd_amplitude(),
            "p_minus_h0": transition_probabilities(rec, "h0")[:, 0],
            "p_minus_total": transition_probabilities(rec, "total")[:, 0],
            "mean_energy": mean_energy(rec),
            "h1_expectation": expectation(rec.h1, rec.states),
            "energy_std": energy_std(rec.hamiltonians, rec.states),
        }
    return Table("timeseries", _stack(runs, build))


def _closed_form(r: Run) -> np.ndarray | None:
    if r.tau_d is None:
        return None
    return excess_work_closed_form_lz(r.model, r.record.s_grid, r.tau_d)


def work_tables(runs) -> tuple[Table, Table]:
    def build(r: Run):
        rec = r.record
        n = len(rec.s_grid)
        series = work_series(rec, "total")
        closed = _closed_form(r)
        return {
            **_per_run(r, n),
            "tau_d": np.full(n, r.tau_d, dtype=object),
            "s": rec.s_grid,
            "mean_energy": series.mean_energy,
            "work": series.work,
            "adiabatic_work": series.adiabatic_work,
            "excess_work": series.excess_work,
            "excess_work_closed_form": (np.full(n, None, dtype=object) if closed is None
                                        else closed),
        }

    summary = {k: [] for k in ("protocol", "tau", "tau_d", "avg_excess_work", "avg_max_gap",
                               "avg_excess_work_closed_form")}
    for r in runs:
        costs = time_averaged_costs(r.record)
        closed = _closed_form(r)
        summary["protocol"].append(r.protocol)
        summary["tau"].append(r.tau)
        summary["tau_d"].append(r.tau_d)
        summary["avg_excess_work"].append(costs.avg_excess_work)
        summary["avg_max_gap"].append(costs.avg_max_gap)
        summary["avg_excess_work_closed_form"].append(
            None if closed is None else time_average(closed, r.record.s_grid))
    return Table("work", _stack(runs, build)), Table("work_summary", summary)


def qsl_table(runs) -> Table:
    cols = {k: [] for k in ("protocol", "tau", "tau_d", "bures_angle", "tau_mt", "tau_wex",
                            "tau_ml", "ordering_ok", "chain_ok")}
    for r in runs:
        rep = qsl_report(r.record)
        chain = inequality_chain(r.record)
        cols["protocol"].append(r.protocol)
        cols["tau"].append(r.tau)
        cols["tau_d"].append(r.tau_d)
        cols["bures_angle"].append(rep.bures_angle)
        cols["tau_mt"].append(rep.tau_mt)
        cols["tau_wex"].append(rep.tau_wex)
        cols["tau_ml"].append(rep.tau_ml)
        cols["ordering_ok"].append(_bounds_ordered(rep))
        cols["chain_ok"].append(chain.pointwise_ok() and chain.cauchy_schwarz_ok())
    return Table("qsl", cols)


def _bounds_ordered(rep) -> bool:
    """tau_ml <= tau_wex <= tau_mt <= tau within the relative slack."""
    chain = [t for t in (rep.tau_ml, rep.tau_wex, rep.tau_mt) if t is not None] + [rep.tau]
    return all(a <= b * (1.0 + ORDERING_RTOL) for a, b in zip(chain, chain[1:]))


def spectra_table(runs) -> Table:
    def build(r: Run):
        rec = r.record
        n = len(rec.s_grid)
        b, _ = r.model.field(rec.s_grid)
        e0 = rec.h0_spectra.eigenvalues
        et = rec.total_spectra.eigenvalues
        return {
            **_per_run(r, n),
            "tau_d": np.full(n, r.tau_d, dtype=object),
            "s": rec.s_grid,
            "B": b,
            "C": r.cd_amplitude(),
            "E_minus_h0": e0[:, 0],
            "E_plus_h0": e0[:, -1],
            "E_minus_total": et[:, 0],
            "E_plus_total": et[:, -1],
            "gap_h0": e0[:, -1] - e0[:, 0],
            "gap_total": et[:, -1] - et[:, 0],
        }
    return Table("spectra", _stack(runs, build))


def _groups(table: Table, key="protocol"):
    labels = np.asarray(table[key])
    for label in dict.fromkeys(labels.tolist()):
        yield label, labels == label


def _strictly_decreasing(values) -> bool:
    return bool(np.all(np.diff(np.asarray(values, dtype=float)) < 0))


def check_figure(result_tables: dict, figure: str | None) -> None:
    """Assert the documented shape of a figure preset; raise FigureCheckFailed otherwise."""
    if figure is None:
        return
    problems = []
    t = result_tables
    if figure == "fig1" and "timeseries" in t:
        ts = t["timeseries"]
        for proto, mask in _groups(ts):
            depths = []
            for tau in np.unique(ts["tau"][mask]):
                sel = mask & (ts["tau"] == tau)
                p = np.asarray(ts["p_minus_total"][sel], dtype=float)
                k = int(np.argmin(p))
                s_min = float(ts["s"][sel][k])
                if abs(s_min - 0.5) > DIP_LOCATION_TOL:
                    problems.append(f"{proto} tau={tau:g}: ground-population dip at s={s_min:.3f}")
                depths.append(1.0 - p[k])
            if not _strictly_decreasing(depths):
                problems.append(f"{proto}: dip depths {np.round(depths, 6).tolist()} "
                                "do not decrease with tau")
    if figure == "fig2" and "qsl" in t:
        q = t["qsl"]
        for i, tau in enumerate(q["tau"]):
            if not q["ordering_ok"][i]:
                problems.append(f"tau={tau:g}: bound ordering violated")
            if not q["chain_ok"][i]:
                problems.append(f"tau={tau:g}: inequality chain violated")
            if q["tau_mt"][i] is None or q["tau_mt"][i] / tau <= 0.9:
                problems.append(f"tau={tau:g}: Mandelstam-Tamm bound not tight")
    if figure == "fig3" and "work_summary" in t:
        w = t["work_summary"]
        for proto, mask in _groups(w):
            vals = np.asarray(w["avg_excess_work"], dtype=float)[mask]
            if not _strictly_decreasing(vals):
                problems.append(f"{proto}: time-averaged excess work not strictly decreasing "
                                f"in tau: {vals.tolist()}")
    if figure in ("fig4", "fig5", "fig6") and "spectra" in t:
        sp = t["spectra"]
        runs = sorted({(p, tau) for p, tau in zip(sp["protocol"], sp["tau"])})
        peaks = {}
        for proto, tau in runs:
            sel = (sp["protocol"] == proto) & (sp["tau"] == tau)
            s = np.asarray(sp["s"][sel], dtype=float)
            ds = s[1] - s[0]
            if figure == "fig4":
                s_max = s[np.argmax(sp["gap_total"][sel])]
                s_min = s[np.argmin(sp["gap_h0"][sel])]
                if abs(s_max - s_min) > ds + 1e-12:
                    problems.append(f"tau={tau:g}: total-gap maximum at s={s_max:.4f}, "
                                    f"H0-gap minimum at s={s_min:.4f}")
            elif figure == "fig5":
                peaks.setdefault(proto, []).append(float(np.max(np.abs(sp["C"][sel]))))
            else:
                diff = np.asarray(sp["E_minus_h0"][sel] - sp["E_minus_total"][sel], dtype=float)
                if np.min(diff) < -1e-9:
                    problems.append(f"tau={tau:g}: total ground energy above the H0 ground energy")
        for proto, vals in peaks.items():
            if not _strictly_decreasing(vals):
                problems.append(f"{proto}: counterdiabatic amplitude does not shrink with tau")
    if problems:
        raise FigureCheckFailed(f"{figure} shape check failed: " + "; ".join(problems))


def run_scenario(config: ScenarioConfig) -> RunResult:
    """Propagate every (protocol, tau) pair of ``config`` and assemble the output tables.

    Runs are independent and fan out over a thread pool; rows are ordered by
    ascending tau, then by the protocol order of the config.
    """
    if not isinstance(config, ScenarioConfig):
        raise ConfigInvalid("run_scenario expects a ScenarioConfig")
    protocols = config.protocol_kinds()
    taus = config.tau_values()
    jobs = [(p, tau) for tau in taus for p in protocols]

    workers = config.workers or min(len(jobs), os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda job: _execute(config, *job), jobs))
    else:
        runs = [_execute(config, *job) for job in jobs]
    runs.sort(key=lambda r: (r.tau, protocols.index(r.protocol)))

    warnings = []
    if config.cd != "off":
        for p in protocols:
            if not config.model_for(p).protocol.vanishing_endpoint_rate:
                warnings.append(f"protocol {p}: dB/ds is nonzero at s=0 and s=1, so the "
                                "counterdiabatic term does not vanish at the endpoints")

    tables = {}
    if "timeseries" in config.outputs:
        tables["timeseries"] = timeseries_table(runs)
    if "work" in config.outputs:
        tables["work"], tables["work_summary"] = work_tables(runs)
    if "qsl" in config.outputs:
        tables["qsl"] = qsl_table(runs)
    if "spectra" in config.outputs:
        tables["spectra"] = spectra_table(runs)
    check_figure(tables, config.figure)

    provenance = {
        "package": "cdwork",
        "version": __version__,
        "steps": config.steps,
        "grid_points": config.steps + 1,
        "stepper": config.stepper,
        "halving_tolerance": config.tolerance,
        "time_mapping": "t = s * tau",
    }
    return RunResult(config, tables, tuple(runs), tuple(warnings), provenance)
