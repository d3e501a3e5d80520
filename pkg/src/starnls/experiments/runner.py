"""Execute scenarios: evolve, diagnose, and emit deterministic CSV/JSON/SVG.

Identical config + seed give byte-identical CSV and JSON: all numbers are
written in full-precision scientific notation and JSON keys are sorted.
"""

from __future__ import annotations

import copy
import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np
import yaml

from ..dynamics import blowup_diagnostic, evolve_nls, scattering_diagnostic
from ..functionals import localized_virial, tangent_omega, threshold_table, classify_potential_well
from ..grid import norm_lq, save_snapshot
from ..propagator import LinearPropagatorConfig, dispersive_ratio
from ..symmetry import invariance_drift, standard_group
from .scenario import ConfigError, Scenario, build_initial_data, load_scenario, validate_config
from .svgplot import write_timeseries_svg


def _sci(v: float) -> str:
    return f"{v:.17e}"


@dataclass
class RunResult:
    out_dir: Path
    verdict: dict
    csv_path: Path | None
    termination: str


def run_scenario(config, out_dir=None) -> RunResult:
    """Run one scenario given a path or a parsed mapping; write artifacts.

    Emits diagnostics.csv (t, M, E_gamma, S_omega*, K_gamma, H1, Linf and
    the virial columns per requested radius), verdict.json, optional state
    snapshots and optional SVG plots, all under the output directory.
    """
    if isinstance(config, (str, Path)):
        sc = load_scenario(config)
    else:
        sc = validate_config(copy.deepcopy(config))
    out = Path(out_dir) if out_dir is not None else Path(sc.outputs["directory"])
    out.mkdir(parents=True, exist_ok=True)
    mp = sc.model
    f0 = build_initial_data(sc)

    verdict_doc: dict = {
        "model": {"n_edges": mp.n_edges, "gamma": mp.gamma, "p": mp.p, "mu": mp.mu, "omega": mp.omega,
                  "s_c": mp.s_c},
        "grid": {"length": sc.grid.length, "n_points": sc.grid.n_points,
                 "h": sc.grid.h, "boundary_far": str(sc.grid.boundary_far)},
        "initial": {k: v for k, v in sc.initial.items() if not isinstance(v, (list, dict))},
        "seed": sc.seed,
    }
    if mp.p > 5.0:
        table = threshold_table(mp)
        verdict_doc["thresholds"] = table.to_dict()
        if sc.diagnostics.get("dichotomy"):
            verdict_doc["verdict"] = classify_potential_well(f0, mp, table).as_dict()

    traj = evolve_nls(f0, mp, sc.evolve)
    verdict_doc["termination"] = {
        "kind": traj.termination.kind,
        "time": traj.termination.time,
        "detail": traj.termination.detail,
    }
    e0 = traj.reports[0].energy
    energy_drift = max(abs(r.energy - e0) / max(abs(e0), 1e-300) for r in traj.reports)
    verdict_doc["drift"] = {"mass": float(traj.mass_drift[-1]), "energy": float(energy_drift)}

    radii = []
    virials = {}
    if "virial" in sc.diagnostics and len(traj.states) >= 3:
        radii = list(sc.diagnostics["virial"]["radii"])
        for r in radii:
            virials[r] = localized_virial(traj, float(r))
        rep = blowup_diagnostic(traj, mp, float(radii[0]))
        verdict_doc["blowup"] = {
            "concavity_onset": rep.concavity_onset,
            "grow_or_blow": rep.grow_or_blow,
            "h1_growth": float(rep.h1_series[-1] / max(rep.h1_series[0], 1e-300)),
        }

    if sc.diagnostics.get("scattering") and traj.termination.kind == "completed":
        srep = scattering_diagnostic(traj, mp)
        verdict_doc["scattering"] = {
            "cauchy_residuals": [float(v) for v in srep.cauchy_residuals],
            "cauchy_tail_past_half": float(srep.cauchy_tail_sum(0.5 * traj.times[-1])),
            "strichartz_total": float(srep.strichartz_accumulation[-1]),
        }

    sym_drift = None
    if "symmetry" in sc.diagnostics:
        group = standard_group(sc.diagnostics["symmetry"]["group"], mp.n_edges)
        sym_drift = invariance_drift(traj, group)
        verdict_doc["symmetry"] = {"group": sc.diagnostics["symmetry"]["group"],
                                   "max_drift": float(sym_drift.max())}

    if "dispersive" in sc.diagnostics:
        lincfg = LinearPropagatorConfig(dt=sc.evolve.dt, method=sc.evolve.method, gamma=mp.gamma)
        dser = dispersive_ratio(f0, sc.diagnostics["dispersive"]["times"], lincfg)
        verdict_doc["dispersive"] = {
            "times": [float(t) for t in dser.times],
            "ratios": [float(v) for v in dser.ratios],
            "truncated_at": dser.truncated_at,
        }

    # terminal scalars mirror the CSV row at the last stored time
    last = traj.reports[-1]
    verdict_doc["terminal"] = {
        "t": float(traj.times[-1]),
        "mass": last.mass, "energy": last.energy, "k_gamma": last.virial_k,
        "h1gamma": last.h1gamma,
    }

    csv_path = out / "diagnostics.csv"
    _write_csv(csv_path, sc, traj, virials, sym_drift)
    with open(out / "verdict.json", "w") as fh:
        json.dump(verdict_doc, fh, sort_keys=True, indent=1)
        fh.write("\n")

    if sc.outputs.get("snapshots"):
        for t, st in zip(traj.times, traj.states):
            save_snapshot(out / f"state_t{t:012.6f}.txt", st)
    if sc.outputs.get("plots"):
        series = {"M": [r.mass for r in traj.reports],
                  "E_gamma": [r.energy for r in traj.reports],
                  "K_gamma": [r.virial_k for r in traj.reports]}
        write_timeseries_svg(out / "plots.svg", traj.times, series, title="invariants")
        for r, vs in virials.items():
            write_timeseries_svg(out / f"virial_R{r:g}.svg", vs.times,
                                 {"V": vs.v, "V'": vs.vp_formula, "V''": vs.vpp_formula},
                                 title=f"localized virial, R={r:g}")
    return RunResult(out, verdict_doc, csv_path, traj.termination.kind)


def _write_csv(path, sc: Scenario, traj, virials, sym_drift):
    mp = sc.model
    omega_star = mp.omega
    if mp.p > 5.0 and traj.reports[0].mass > 0:
        omega_star = tangent_omega(traj.reports[0].mass, mp)
    cols = ["t", "M", "E_gamma", "S_omega_star", "K_gamma", "H1", "Linf_sum"]
    for r in virials:
        cols += [f"V_R{r:g}", f"dV_R{r:g}", f"d2V_R{r:g}"]
    if sym_drift is not None:
        cols.append("sym_drift")
    lines = [
        "# starnls diagnostics; quantities are dimensionless (hbar = 1)",
        f"# omega_star={_sci(omega_star)} (tangent frequency of the initial mass)",
        ",".join(cols),
    ]
    h1 = traj.h1_series()
    for i, t in enumerate(traj.times):
        rep = traj.reports[i]
        action = rep.energy + omega_star / 2.0 * rep.mass
        row = [t, rep.mass, rep.energy, action, rep.virial_k, h1[i],
               norm_lq(traj.states[i], np.inf)]
        for r, vs in virials.items():
            row += [vs.v[i], vs.vp_formula[i], vs.vpp_formula[i]]
        if sym_drift is not None:
            row.append(sym_drift[i])
        lines.append(",".join(_sci(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# parameter sweeps


def _cell_config(base: dict, scale, gamma, p) -> dict:
    cfg = copy.deepcopy(base)
    cfg.pop("sweep", None)
    cfg.setdefault("model", {})
    if gamma is not None:
        cfg["model"]["gamma"] = gamma
    if p is not None:
        cfg["model"]["p"] = p
    if scale is not None:
        init = cfg.setdefault("initial", {})
        if init.get("kind") == "gaussian":
            init["amplitude"] = scale
        else:
            init["scale"] = scale
    return cfg


def _run_cell(args):
    idx, cfg = args
    row = {"index": idx,
           "scale": cfg["initial"].get("scale", cfg["initial"].get("amplitude", "")),
           "gamma": cfg["model"].get("gamma", 0.0), "p": cfg["model"]["p"]}
    try:
        sc = validate_config(copy.deepcopy(cfg))
        mp = sc.model
        f0 = build_initial_data(sc)
        side = ""
        if mp.p > 5.0:
            side = classify_potential_well(f0, mp).side
        traj = evolve_nls(f0, mp, sc.evolve)
        e0 = traj.reports[0].energy
        h1 = traj.h1_series()
        row.update(
            side=side,
            k_gamma0=traj.reports[0].virial_k,
            mass_drift=float(traj.mass_drift[-1]),
            energy_drift=max(abs(r.energy - e0) / max(abs(e0), 1e-300) for r in traj.reports),
            termination=traj.termination.kind,
            h1_growth=float(h1[-1] / max(h1[0], 1e-300)),
            error="",
        )
    except Exception as exc:  # cell failures are recorded, the sweep continues
        row.update(side="", k_gamma0="", mass_drift="", energy_drift="",
                   termination="", h1_growth="", error=repr(exc))
    return row


_SWEEP_COLS = ["index", "scale", "gamma", "p", "side", "k_gamma0", "mass_drift",
               "energy_drift", "termination", "h1_growth", "error"]


def sweep(config, out_dir=None) -> Path:
    """Cross-product sweep over initial scale, gamma and p; one CSV row per cell.

    Cells run concurrently up to the STARNLS_WORKERS budget (default 1) and
    results are merged in declaration order; per-cell failures land in the
    'error' column without stopping the sweep.
    """
    if isinstance(config, (str, Path)):
        with open(config) as fh:
            base = yaml.safe_load(fh)
    else:
        base = copy.deepcopy(config)
    if not isinstance(base, dict):
        raise ConfigError("top level: expected a mapping")
    sweep_d = base.get("sweep", {}) or {}
    scales = sweep_d.get("scale", [None])
    gammas = sweep_d.get("gamma", [None])
    ps = sweep_d.get("p", [None])
    validate_config(copy.deepcopy(_cell_config(base, scales[0], gammas[0], ps[0])))
    cells = [(i, _cell_config(base, s, g, p))
             for i, (s, g, p) in enumerate(product(scales, gammas, ps))]
    workers = int(os.environ.get("STARNLS_WORKERS", "1"))
    if workers > 1 and len(cells) > 1:
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_run_cell, cells))
        except (OSError, RuntimeError):  # restricted environments: degrade to serial
            rows = [_run_cell(c) for c in cells]
    else:
        rows = [_run_cell(c) for c in cells]
    out = Path(out_dir) if out_dir is not None else Path((base.get("outputs") or {}).get("directory", "out"))
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with open(path, "w") as fh:
        fh.write(",".join(_SWEEP_COLS) + "\n")
        for row in rows:
            fh.write(",".join(_sci(row[c]) if isinstance(row[c], float) else str(row[c])
                              for c in _SWEEP_COLS) + "\n")
    return path
