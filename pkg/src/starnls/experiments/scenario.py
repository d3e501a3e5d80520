"""Scenario configuration: a single YAML file describing model, grid,
initial data, evolution and diagnostics.

Validation reports the full key path of every problem (e.g. ``model.p:
required field missing``) so configs can be fixed without reading code.
The exact schema is documented in the package README and mirrored by
``EXAMPLE_CONFIG`` below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from ..dynamics import EvolveConfig
from ..functionals import soliton_values
from ..grid import AbsorbingLayer, EdgeGrid, GraphFunction, load_snapshot
from ..params import ModelParams
from ..profiles import ProfileSpec, shift_profile
from ..grid import LineFunction
from ..variational import vertex_cutoff

EXAMPLE_CONFIG = """\
model: {n_edges: 3, gamma: 1.0, p: 7.0, mu: -1, omega: 1.0}
grid:
  length: 60.0
  n_points: 3001
  boundary_far: dirichlet          # or {absorbing_layer: {width: 8.0, strength: 5.0}}
initial:
  kind: edge_soliton               # edge_soliton | radial_soliton | gaussian | profile_sum | file
  edge: 1
  y: 8.0
  scale: 1.0
  velocity: 0.0
evolve:
  dt: 0.01
  t_end: 10.0
  store_stride: 25
  blowup_h1_factor: 1000.0
  adapt: false
  method: q_conjugated             # or direct_cn
  monitor_boundary: true
diagnostics:
  dichotomy: true
  virial: {radii: [20.0]}
  scattering: false
  # symmetry: {group: cyclic}
  # dispersive: {times: [1.0, 2.0, 5.0]}
outputs:
  directory: out
  snapshots: false
  plots: false
seed: 0
"""


class ConfigError(ValueError):
    """Validation failure with the offending key path in the message."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _need(d: dict, path: str, key: str):
    if key not in d:
        _fail(f"{path}.{key}" if path else key, "required field missing")
    return d[key]


def _num(d: dict, path: str, key: str, default=None, positive=False, nonneg=False):
    if key not in d:
        if default is None:
            _fail(f"{path}.{key}", "required field missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if positive and v <= 0:
        _fail(f"{path}.{key}", f"must be positive, got {v}")
    if nonneg and v < 0:
        _fail(f"{path}.{key}", f"must be nonnegative, got {v}")
    return v


def _int(d: dict, path: str, key: str, default=None, minimum=None):
    if key not in d:
        if default is None:
            _fail(f"{path}.{key}", "required field missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"{path}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(f"{path}.{key}", f"must be >= {minimum}, got {v}")
    return v


@dataclass
class Scenario:
    model: ModelParams
    grid: EdgeGrid
    initial: dict
    evolve: EvolveConfig
    diagnostics: dict
    outputs: dict
    seed: int = 0


def validate_config(cfg: dict) -> Scenario:
    """Turn a parsed mapping into a Scenario, or raise ConfigError."""
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a mapping")
    model_d = _need(cfg, "", "model")
    if not isinstance(model_d, dict):
        _fail("model", "expected a mapping")
    mp = ModelParams(
        n_edges=_int(model_d, "model", "n_edges", default=3, minimum=3),
        gamma=_num(model_d, "model", "gamma", default=0.0, nonneg=True),
        p=_num(model_d, "model", "p"),
        mu=_int(model_d, "model", "mu"),
        omega=_num(model_d, "model", "omega", default=1.0, positive=True),
    )
    grid_d = _need(cfg, "", "grid")
    far = grid_d.get("boundary_far", "dirichlet")
    if isinstance(far, dict):
        lay = _need(far, "grid.boundary_far", "absorbing_layer")
        far = AbsorbingLayer(
            width=_num(lay, "grid.boundary_far.absorbing_layer", "width", positive=True),
            strength=_num(lay, "grid.boundary_far.absorbing_layer", "strength", positive=True),
        )
    elif far != "dirichlet":
        _fail("grid.boundary_far", f"expected 'dirichlet' or an absorbing_layer mapping, got {far!r}")
    grid = EdgeGrid(
        length=_num(grid_d, "grid", "length", positive=True),
        n_points=_int(grid_d, "grid", "n_points", minimum=16),
        boundary_far=far,
    )
    init_d = _need(cfg, "", "initial")
    kind = _need(init_d, "initial", "kind")
    kinds = ("edge_soliton", "radial_soliton", "gaussian", "profile_sum", "file")
    if kind not in kinds:
        _fail("initial.kind", f"expected one of {kinds}, got {kind!r}")
    ev_d = cfg.get("evolve", {})
    evolve = EvolveConfig(
        dt=_num(ev_d, "evolve", "dt", default=0.01, positive=True),
        t_end=_num(ev_d, "evolve", "t_end", default=10.0, positive=True),
        store_stride=_int(ev_d, "evolve", "store_stride", default=1, minimum=1),
        blowup_h1_factor=_num(ev_d, "evolve", "blowup_h1_factor", default=1e3, positive=True),
        adapt=bool(ev_d.get("adapt", False)),
        method=str(ev_d.get("method", "q_conjugated")),
        monitor_boundary=bool(ev_d.get("monitor_boundary", True)),
    )
    if evolve.method not in ("q_conjugated", "direct_cn"):
        _fail("evolve.method", f"expected q_conjugated or direct_cn, got {evolve.method!r}")
    diag = cfg.get("diagnostics", {}) or {}
    if "virial" in diag:
        radii = diag["virial"].get("radii") if isinstance(diag["virial"], dict) else None
        if not radii or not all(isinstance(r, (int, float)) and r > 0 for r in radii):
            _fail("diagnostics.virial.radii", "expected a nonempty list of positive radii")
    if "dispersive" in diag:
        times = diag["dispersive"].get("times") if isinstance(diag["dispersive"], dict) else None
        if not times or not all(isinstance(t, (int, float)) and t >= 0 for t in times):
            _fail("diagnostics.dispersive.times", "expected a nonempty list of times >= 0")
    if "symmetry" in diag:
        grp = diag["symmetry"].get("group") if isinstance(diag["symmetry"], dict) else None
        if grp not in ("cyclic", "swap23", "signed_swap23", "phase_cyclic"):
            _fail("diagnostics.symmetry.group", f"unknown group {grp!r}")
    outputs = cfg.get("outputs", {}) or {}
    outputs.setdefault("directory", "out")
    outputs.setdefault("snapshots", False)
    outputs.setdefault("plots", False)
    return Scenario(
        model=mp,
        grid=grid,
        initial=dict(init_d),
        evolve=evolve,
        diagnostics=dict(diag),
        outputs=dict(outputs),
        seed=_int(cfg, "", "seed", default=0),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            cfg = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"parse error in {path}: {exc}") from exc
    return validate_config(cfg)


# ---------------------------------------------------------------------------
# initial data builders


def _boost(vals: np.ndarray, x: np.ndarray, velocity: float) -> np.ndarray:
    if velocity == 0.0:
        return vals
    return vals * np.exp(1j * velocity * x)  # unimodular: preserves all L^q norms


def build_initial_data(sc: Scenario) -> GraphFunction:
    """Realize the configured initial datum on the scenario grid."""
    mp, grid = sc.model, sc.grid
    x = grid.x
    kind = sc.initial["kind"]
    d = sc.initial
    if kind == "edge_soliton":
        edge = _int(d, "initial", "edge", default=1, minimum=1) - 1
        if edge >= mp.n_edges:
            _fail("initial.edge", f"edge {edge + 1} out of range for {mp.n_edges} edges")
        y = _num(d, "initial", "y", default=8.0, nonneg=True)
        scale = _num(d, "initial", "scale", default=1.0)
        vel = _num(d, "initial", "velocity", default=0.0)
        vals = np.zeros((mp.n_edges, grid.n_points), dtype=complex)
        prof = vertex_cutoff(x) * soliton_values(mp.p, mp.omega, x - y)
        vals[edge] = _boost(scale * prof, x, vel)
        return GraphFunction(grid, vals)
    if kind == "radial_soliton":
        scale = _num(d, "initial", "scale", default=1.0)
        prof = scale * soliton_values(mp.p, mp.omega, x)
        return GraphFunction(grid, np.tile(prof, (mp.n_edges, 1)).astype(complex))
    if kind == "gaussian":
        placement = d.get("placement", "radial")
        width = _num(d, "initial", "width", default=2.0, positive=True)
        center = _num(d, "initial", "center", default=8.0, nonneg=True)
        amp = _num(d, "initial", "amplitude", default=1.0)
        vel = _num(d, "initial", "velocity", default=0.0)
        prof = amp * np.exp(-((x - center) ** 2) / (2.0 * width * width))
        if placement == "radial":
            vals = np.tile(_boost(prof, x, vel), (mp.n_edges, 1)).astype(complex)
        else:
            edge = _int(d, "initial", "edge", default=1, minimum=1) - 1
            if edge >= mp.n_edges:
                _fail("initial.edge", f"edge {edge + 1} out of range for {mp.n_edges} edges")
            vals = np.zeros((mp.n_edges, grid.n_points), dtype=complex)
            vals[edge] = _boost(prof * vertex_cutoff(x), x, vel)
        return GraphFunction(grid, vals)
    if kind == "profile_sum":
        items = d.get("profiles")
        if not items:
            _fail("initial.profiles", "required nonempty list for profile_sum")
        total = GraphFunction.zero(grid, mp.n_edges)
        for i, item in enumerate(items):
            path = f"initial.profiles[{i}]"
            edge = _int(item, path, "edge", default=1, minimum=1) - 1
            y = _num(item, path, "y", default=0.0, nonneg=True)
            t = _num(item, path, "t", default=0.0)
            width = _num(item, path, "width", default=1.0, positive=True)
            amp = _num(item, path, "amplitude", default=1.0)
            center = _num(item, path, "center", default=0.0)
            xl = grid.x_line
            psi = LineFunction(grid, amp * np.exp(-((xl - center) ** 2) / (2.0 * width * width)) + 0j)
            psis = [LineFunction.zero(grid)] * mp.n_edges
            psis[edge] = psi
            spec = ProfileSpec(t_shift=t, y_shift=y, psis=tuple(psis))
            total = total + shift_profile(spec, mp.gamma, dt=sc.evolve.dt)
        return total
    if kind == "file":
        path = _need(d, "initial", "path")
        f = load_snapshot(path)
        if f.grid.n_points != grid.n_points or f.grid.length != grid.length:
            _fail("initial.path", "snapshot grid does not match the scenario grid")
        return f
    raise AssertionError(f"unhandled kind {kind}")
