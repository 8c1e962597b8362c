"""Named scenarios, sweep execution and CSV output."""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..model import SystemParams, reference_params
from . import pipelines as pl
from .pipelines import SolverSettings

KINDS = ("sweep", "rabi", "transient", "correlation")

# Hz-valued SystemParams.from_hz keywords; the rest are dimensionless
FREQUENCY_KEYS = ("f0", "g", "omega_p", "epsilon", "delta_d", "gamma", "gamma_phi",
                  "kappa", "delta")
PLAIN_KEYS = ("Q", "n_th", "fock_dim")
PARAM_KEYS = FREQUENCY_KEYS + PLAIN_KEYS

DEFAULT_BASE = dict(f0=1e9, g=80e6, omega_p=100e6, epsilon=0.2e6, delta_d=0.0,
                    gamma=1e6, gamma_phi=0.0, Q=5e3, n_th=0.0, fock_dim=10)

KIND_OUTPUTS = {
    "rabi": ("P_0e", "P_2g"),
    "transient": ("P_0", "P_1", "P_2", "P_3", "n_mean"),
    "correlation": ("g2_tau",),
}
KIND_AXIS = {"rabi": "t", "transient": "t", "correlation": "kappa_tau"}


class ScenarioError(ValueError):
    """Scenario or configuration is invalid."""


def column_name(key: str) -> str:
    if key in FREQUENCY_KEYS:
        return f"{key}_hz"
    if key == "t":
        return "t_s"
    return key


@dataclass(frozen=True)
class Scenario:
    """A parameter sweep (or time/delay grid) evaluated by one pipeline.

    ``base`` and grid values are in Hz for frequency keys.  ``series`` adds an
    outer axis, e.g. three qubit drive strengths for a decay-rate sweep.
    For ``kind`` other than ``sweep`` the axis is time (s) or ``kappa * tau``.
    """

    name: str
    kind: str
    axis: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]
    pipeline: str = "lab"
    base: dict = field(default_factory=lambda: dict(DEFAULT_BASE))
    series: tuple[str, tuple[float, ...]] | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    description: str = ""

    def validate(self) -> Scenario:
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; choose from {KINDS}")
        if self.pipeline not in pl.PIPELINES:
            raise ScenarioError(f"unknown pipeline {self.pipeline!r}; choose from {pl.PIPELINES}")
        if not self.grid:
            raise ScenarioError(f"scenario {self.name!r} has an empty sweep grid")
        if any(not math.isfinite(v) for v in self.grid):
            raise ScenarioError("sweep grid contains non-finite values")
        if list(self.grid) != sorted(self.grid):
            raise ScenarioError("sweep grid must be sorted ascending")
        if self.kind == "sweep":
            if self.axis not in PARAM_KEYS:
                raise ScenarioError(f"cannot sweep {self.axis!r}; choose from {PARAM_KEYS}")
            bad = set(self.outputs) - pl.SUPPORTED[self.pipeline]
            if bad:
                raise ScenarioError(f"pipeline {self.pipeline!r} does not provide {sorted(bad)}")
        else:
            if self.axis != KIND_AXIS[self.kind]:
                raise ScenarioError(f"{self.kind} scenarios use axis {KIND_AXIS[self.kind]!r}")
            if self.pipeline not in ("lab", "effective"):
                raise ScenarioError(f"{self.kind} scenarios need the lab or effective pipeline")
            bad = set(self.outputs) - set(KIND_OUTPUTS[self.kind])
            if bad:
                raise ScenarioError(f"{self.kind} scenarios provide only {KIND_OUTPUTS[self.kind]}")
        if not self.outputs:
            raise ScenarioError("no observables requested")
        if self.series is not None:
            key, vals = self.series
            if key not in PARAM_KEYS or not vals:
                raise ScenarioError(f"invalid series axis {key!r}")
        for k in self.base:
            if k not in PARAM_KEYS:
                raise ScenarioError(f"unknown system parameter {k!r}")
        try:
            self.params_at({})
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"invalid system parameters: {exc}") from exc
        return self

    def params_at(self, overrides: dict) -> SystemParams:
        values = dict(self.base)
        values.update(overrides)
        if "kappa" in values and "Q" in values:
            if "kappa" in overrides:
                values.pop("Q")
            else:
                values.pop("kappa")
        if "fock_dim" in values:
            values["fock_dim"] = int(values["fock_dim"])
        return reference_params(**values)

    def columns(self) -> list[str]:
        cols = []
        if self.series is not None:
            cols.append(column_name(self.series[0]))
        if self.kind == "correlation":
            cols += ["kappa_tau", "tau_s"]
        else:
            cols.append(column_name(self.axis))
        return cols + list(self.outputs)

    def config_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "axis": self.axis,
                "grid": list(self.grid), "outputs": list(self.outputs),
                "pipeline": self.pipeline, "base": dict(sorted(self.base.items())),
                "series": None if self.series is None else [self.series[0], list(self.series[1])],
                "solver": self.solver.as_dict()}

    def config_hash(self) -> str:
        blob = json.dumps(self.config_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class SweepResult:
    scenario: Scenario
    columns: list[str]
    rows: list[list[float]]
    errors: dict[int, str]
    meta: dict
    wall_time: float

    @property
    def ok(self) -> bool:
        return not self.errors

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def _series_values(scn: Scenario):
    if scn.series is None:
        return [None]
    return list(scn.series[1])


def _curve_task(args):
    """One whole time or delay grid; returns ``(rows, error, meta)``."""
    scn, sval = args
    over = {} if sval is None else {scn.series[0]: sval}
    prefix = [] if sval is None else [sval]
    try:
        params = scn.params_at(over)
        if scn.kind == "correlation":
            taus, vals, _ = pl.correlation_curve(params, scn.pipeline, scn.grid, scn.solver)
            return [prefix + [kt, t, v] for kt, t, v in zip(scn.grid, taus, vals)], None, {}
        times = np.asarray(scn.grid)
        if scn.kind == "rabi":
            traj, rabi = pl.rabi_trace(params, scn.pipeline, times, scn.solver)
            meta = {"rabi_frequency_rad_s": rabi, "norm_drift": traj.meta["norm_drift"]}
        else:
            traj = pl.transient_trace(params, scn.pipeline, times, scn.solver)
            meta = {"trace_drift": traj.meta["trace_drift"]}
        rows = [prefix + [t] + [traj[k][i] for k in scn.outputs]
                for i, t in enumerate(traj.times)]
        return rows, None, meta
    except Exception as exc:  # attached to the rows; the run continues
        width = len(scn.columns()) - len(prefix) - 1
        rows = [prefix + [x] + [math.nan] * width for x in scn.grid]
        return rows, f"{type(exc).__name__}: {exc}", {}


def _point_task(args):
    scn, sval, x = args
    over = {scn.axis: x}
    if sval is not None:
        over[scn.series[0]] = sval
    prefix = ([] if sval is None else [sval]) + [x]
    try:
        vals = pl.evaluate_point(scn.params_at(over), scn.pipeline, scn.outputs, scn.solver)
        return prefix + [vals[k] for k in scn.outputs], None
    except Exception as exc:
        return prefix + [math.nan] * len(scn.outputs), f"{type(exc).__name__}: {exc}"


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))  # map keeps submission order
    return [fn(it) for it in items]


def run(scn: Scenario, threads: int = 1) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order."""
    scn.validate()
    start = time.perf_counter()
    rows, errors, meta = [], {}, {}
    if scn.kind == "sweep":
        items = [(scn, s, x) for s in _series_values(scn) for x in scn.grid]
        for i, (row, err) in enumerate(_map(_point_task, items, threads)):
            rows.append(row)
            if err:
                errors[i] = err
    else:
        svals = _series_values(scn)
        for sval, (part, err, m) in zip(svals, _map(_curve_task, [(scn, v) for v in svals],
                                                    threads)):
            for j in range(len(part)):
                if err:
                    errors[len(rows) + j] = err
            rows.extend(part)
            if m:
                meta["all" if sval is None else _fmt(sval)] = m
    return SweepResult(scn, scn.columns(), rows, errors,
                       {"solver": scn.solver.as_dict(), "pipeline": scn.pipeline, **meta},
                       time.perf_counter() - start)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def emit_csv(result: SweepResult, path) -> Path:
    """Write the result as UTF-8 CSV with a ``# cfg=<sha256>`` first line.

    Only configuration-determined content is written, so reruns of the same
    configuration produce identical files.
    """
    path = Path(path)
    if not result.rows:
        raise ScenarioError("refusing to write an empty result")
    lines = [f"# cfg={result.scenario.config_hash()}", ",".join(result.columns)]
    lines += [",".join(_fmt(v) for v in row) for row in result.rows]
    for i in sorted(result.errors):
        lines.append(f"# row {i}: {result.errors[i]}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def default_output_dir() -> Path:
    return Path(os.environ.get("PHONON_BLOCKADE_OUT", "results"))


# -- built-in scenarios --------------------------------------------------------

def _grid(start, stop, num):
    return tuple(float(v) for v in np.round(np.linspace(start, stop, num), 12))


def _fig4_grid():
    inner = np.round(np.arange(-2.0, 2.0001, 0.1), 10) * 1e6
    outer = np.array([-6, -5, -4, -3, -2.5, 2.5, 3, 4, 5, 6]) * 1e6
    return tuple(float(v) for v in np.sort(np.concatenate([inner, outer])))


def builtin_scenarios() -> dict[str, Scenario]:
    rabi_base = dict(DEFAULT_BASE, g=100e6, omega_p=100e6, epsilon=0.0, gamma=0.0,
                     gamma_phi=0.0, Q=math.inf)
    scns = [
        # about a thousand resonator periods; rtol 1e-9 keeps the norm drift below 1e-8
        Scenario("fig2d", "rabi", "t", _grid(0.0, 1e-6, 501), ("P_0e", "P_2g"),
                 base=rabi_base, solver=SolverSettings(rtol=1e-9, atol=1e-11),
                 description="Rabi oscillation |e,0> <-> |g,2> of the full Hamiltonian, g = Omega_p = 0.1 omega0"),
        Scenario("fig3a", "transient", "t", _grid(0.0, 10e-6, 201),
                 ("P_0", "P_1", "P_2", "P_3", "n_mean"),
                 description="phonon-number probabilities and mean number versus time from |g,0>"),
        Scenario("fig3b", "correlation", "kappa_tau", _grid(0.0, 5.0, 51), ("g2_tau",),
                 description="g2(tau) versus kappa*tau at the blockade point"),
        Scenario("fig4", "sweep", "delta_d", _fig4_grid(), ("n_mean", "g2_0"),
                 description="mean phonon number and g2(0) versus mechanical drive detuning"),
        Scenario("fig5a", "sweep", "gamma", _grid(0.5e6, 6e6, 12), ("g2_0",),
                 series=("omega_p", (50e6, 100e6, 200e6)),
                 description="g2(0) versus qubit decay for three qubit drive strengths"),
        Scenario("fig5b", "sweep", "n_th", _grid(0.0, 2.0, 9), ("g2_0",),
                 series=("Q", (5e3, 5e4)),
                 description="g2(0) versus thermal occupation for two quality factors"),
        Scenario("fig6", "correlation", "kappa_tau", _grid(0.0, 5.0, 51), ("g2_tau",),
                 series=("gamma_phi", (0.0, 0.2e6, 2e6)),
                 description="g2(tau) for pure dephasing 0, 0.2 Gamma and 2 Gamma"),
        Scenario("fig7a", "sweep", "epsilon", _grid(0.05e6, 1.5e6, 12),
                 ("g2_0", "P_e", "P_2"),
                 description="P_e and P_2 against g2(0) under a mechanical drive sweep"),
        Scenario("fig7b", "sweep", "epsilon", _grid(0.05e6, 1.5e6, 12),
                 ("g2_0", "P_e", "P_2", "R"), series=("omega_p", (100e6, 200e6)),
                 description="detection ratio R = P_e/P_2 against P_2 for two qubit drives"),
        Scenario("fig8a", "sweep", "epsilon", _grid(0.1e6, 1.5e6, 15), ("F", "g2_0"),
                 description="truncation fidelity versus mechanical drive strength"),
        Scenario("fig8b", "sweep", "omega_p", (25e6, 50e6, 75e6, 100e6, 125e6, 150e6,
                                               200e6, 250e6, 300e6), ("F", "g2_0"),
                 description="truncation fidelity versus qubit drive strength, both sides of 100 MHz"),
    ]
    return {s.name: s for s in scns}


def get_scenario(name: str) -> Scenario:
    scns = builtin_scenarios()
    if name not in scns:
        raise ScenarioError(f"unknown scenario {name!r}; available: {', '.join(scns)}")
    return scns[name]


def with_overrides(scn: Scenario, pipeline=None, tol=None, fock_dim=None) -> Scenario:
    if pipeline:
        scn = replace(scn, pipeline=pipeline)
    if tol:
        scn = replace(scn, solver=replace(scn.solver, rtol=tol, atol=tol * 1e-2))
    if fock_dim:
        scn = replace(scn, base={**scn.base, "fock_dim": int(fock_dim)})
    return scn.validate()
