"""INI scenario files.

Example::

    [system]
    # Hz unless noted; omitted keys keep the reference working point
    f0 = 1e9
    g = 80e6
    omega_p = 100e6
    epsilon = 0.2e6
    gamma = 1e6
    Q = 5e3
    n_th = 0
    fock_dim = 10

    [solver]
    pipeline = lab
    rtol = 1e-8
    atol = 1e-10
    window_periods = 10
    samples = 200

    [sweep]
    name = detuning
    kind = sweep
    param = delta_d
    values = -2e6, -1e6, 0, 1e6, 2e6
    # or: start = -2e6 / stop = 2e6 / num = 41
    # optional outer axis: series_param = omega_p / series_values = 50e6, 100e6

    [output]
    observables = n_mean, g2_0
    file = detuning.csv
"""
from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path

import numpy as np

from .pipelines import SolverSettings
from .scenarios import (DEFAULT_BASE, KIND_AXIS, PARAM_KEYS, Scenario, ScenarioError,
                        get_scenario)

SOLVER_KEYS = {"rtol": float, "atol": float, "transient": float, "window_periods": int,
               "samples": int, "n_phase": int, "n_t0": int}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace("\n", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ScenarioError(f"cannot parse number list {text!r}") from exc


def _float(section, key):
    try:
        return float(section[key])
    except ValueError as exc:
        raise ScenarioError(f"[{section.name}] {key} = {section[key]!r} is not a number") from exc


def load_config(path) -> tuple[Scenario, str | None]:
    """Parse a config file into a validated scenario and an optional output file name."""
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep "Q" distinct from "q"
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ScenarioError(f"malformed config {path}: {exc}") from exc
    unknown = set(cp.sections()) - {"system", "solver", "sweep", "output"}
    if unknown:
        raise ScenarioError(f"unknown config sections {sorted(unknown)}")

    sweep = cp["sweep"] if cp.has_section("sweep") else None
    if sweep is None:
        raise ScenarioError("config needs a [sweep] section")

    template = None
    if "scenario" in sweep:
        template = get_scenario(sweep["scenario"])

    base = dict(template.base if template else DEFAULT_BASE)
    if cp.has_section("system"):
        sysec = cp["system"]
        for key in sysec:
            if key not in PARAM_KEYS:
                raise ScenarioError(f"[system] unknown parameter {key!r}")
            base[key] = _float(sysec, key)
        if "kappa" in sysec:
            base.pop("Q", None)
        if "Q" in sysec:
            base.pop("kappa", None)

    solver = template.solver if template else SolverSettings()
    pipeline = template.pipeline if template else "lab"
    if cp.has_section("solver"):
        sol = cp["solver"]
        changes = {}
        for key in sol:
            if key == "pipeline":
                pipeline = sol[key].strip()
            elif key in SOLVER_KEYS:
                try:
                    changes[key] = SOLVER_KEYS[key](sol[key])
                except ValueError as exc:
                    raise ScenarioError(f"[solver] {key} = {sol[key]!r} is invalid") from exc
            else:
                raise ScenarioError(f"[solver] unknown key {key!r}")
        solver = replace(solver, **changes)

    kind = sweep.get("kind", template.kind if template else "sweep").strip()
    if kind == "sweep":
        axis = sweep.get("param", template.axis if template else None)
        if axis is None:
            raise ScenarioError("[sweep] needs param for a parameter sweep")
    else:
        axis = KIND_AXIS.get(kind, "")
    if "values" in sweep:
        grid = _floats(sweep["values"])
    elif {"start", "stop", "num"} <= set(sweep):
        grid = tuple(float(v) for v in np.linspace(_float(sweep, "start"), _float(sweep, "stop"),
                                                   int(_float(sweep, "num"))))
    elif template is not None:
        grid = template.grid
    else:
        raise ScenarioError("[sweep] needs values or start/stop/num")

    series = template.series if template else None
    if "series_param" in sweep:
        series = (sweep["series_param"].strip(), _floats(sweep.get("series_values", "")))

    outputs = template.outputs if template else ()
    out_file = None
    if cp.has_section("output"):
        out = cp["output"]
        if "observables" in out:
            outputs = tuple(v.strip() for v in out["observables"].split(",") if v.strip())
        out_file = out.get("file")
    name = sweep.get("name", template.name if template else path.stem)
    scn = Scenario(name=name, kind=kind, axis=axis, grid=grid, outputs=outputs,
                   pipeline=pipeline, base=base, series=series, solver=solver)
    return scn.validate(), out_file
