"""Sharp-constant estimation for the graph Gagliardo-Nirenberg inequality.

The best graph constant equals the line constant for every gamma >= 0, it
is approached by solitons escaping along one edge (and, at gamma > 0, by
wide dilations that starve the vertex term), and it is never attained.  The
estimator therefore combines three probes: the escaping-soliton sequence,
a dilation sequence, and projected gradient ascent on the (0-homogeneous)
ratio from random starts.  The supremum shows up as the max over probes
while the best witness keeps drifting outward, which is exactly the
non-attainment signature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import line_soliton_integrals, soliton_values
from .grid import EdgeGrid, GraphFunction, edge_derivatives, norm_h1gamma_sq
from .params import ModelParams


def gn_ratio(f: GraphFunction, mp: ModelParams) -> float:
    """||f||_{p+1}^{p+1} / (||f||_2^((p+3)/2) ||f||_{H^1_gamma}^((p-1)/2))."""
    w = f.grid.weights
    m = float((np.abs(f.values) ** 2 @ w).sum())
    lp1 = float((np.abs(f.values) ** (mp.p + 1.0) @ w).sum())
    hg = norm_h1gamma_sq(f, mp.gamma)
    if m <= 0 or hg <= 0:
        raise ZeroDivisionError("gn_ratio needs a nonzero function")
    return lp1 / (m ** ((mp.p + 3.0) / 4.0) * hg ** ((mp.p - 1.0) / 4.0))


def line_gn_constant(p: float) -> float:
    """Best line constant via the sharp relation with the soliton norms."""
    i2, ig, _ = line_soliton_integrals(p, 1.0)
    sc = 0.5 - 2.0 / (p - 1.0)
    k2 = i2 ** ((1.0 - sc) / 2.0) * ig ** (sc / 2.0)
    return 2.0 * (p + 1.0) / ((p - 1.0) * k2 ** (p - 1.0))


def vertex_cutoff(x: np.ndarray, lo: float = 1.0, hi: float = 2.0) -> np.ndarray:
    """Smoothstep vanishing on (0, lo) and equal to 1 beyond hi."""
    u = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def escaping_soliton(mp: ModelParams, grid: EdgeGrid, shift: float) -> GraphFunction:
    """Soliton on edge 1 cut off near the vertex and pushed out by `shift`."""
    vals = np.zeros((mp.n_edges, grid.n_points), dtype=complex)
    vals[0] = vertex_cutoff(grid.x) * soliton_values(mp.p, 1.0, grid.x - shift)
    return GraphFunction(grid, vals)


def centroid(f: GraphFunction) -> float:
    """Mass-weighted first moment; grows along escaping sequences."""
    w = f.grid.weights
    a2 = np.abs(f.values) ** 2
    m = float((a2 @ w).sum())
    return float(((a2 * f.grid.x) @ w).sum() / m) if m > 0 else 0.0


@dataclass
class GNEstimate:
    """Best ratio found, the witness, and the escaping-soliton series."""

    value: float
    witness: GraphFunction
    escape_series: np.ndarray
    escape_shifts: np.ndarray
    dilation_series: np.ndarray = field(default_factory=lambda: np.empty(0))
    ascent_best: float = 0.0
    witness_centroids: np.ndarray = field(default_factory=lambda: np.empty(0))
    start_centroids: np.ndarray = field(default_factory=lambda: np.empty(0))
    seed: int = 0


def _project_continuity(vals: np.ndarray) -> None:
    vals[:, 0] = vals[:, 0].mean()


def _ratio_log_gradient(vals: np.ndarray, grid: EdgeGrid, mp: ModelParams) -> np.ndarray:
    """Wirtinger gradient of log gn_ratio; scale-invariant ascent direction."""
    w = grid.weights
    a = np.abs(vals)
    m = float((a**2 @ w).sum())
    lp1 = float((a ** (mp.p + 1.0) @ w).sum())
    h = grid.h
    d = np.gradient(vals, h, axis=1)
    hg = float((np.abs(d) ** 2 @ w).sum()) + vals.shape[0] * mp.gamma * abs(vals[0, 0]) ** 2
    g_lp1 = (mp.p + 1.0) / 2.0 * a ** (mp.p - 1.0) * vals * w
    g_m = vals * w
    # quadratic-form gradient of the H^1_gamma part: -(W u')' plus vertex term
    g_h = -np.gradient(d * w, h, axis=1)
    g_h[:, 0] += mp.gamma * vals[:, 0].mean()
    grad = g_lp1 / lp1 - (mp.p + 3.0) / 4.0 * 2.0 * g_m / m - (mp.p - 1.0) / 4.0 * 2.0 * g_h / hg
    return grad


def estimate_gn_constant(mp: ModelParams, budget: int = 200, seed: int = 0,
                         grid: EdgeGrid | None = None, restarts: int = 3) -> GNEstimate:
    """Estimate the best graph GN constant; deterministic given the seed.

    Probes: (a) the escaping-soliton sequence at shifts 2, 4, 8, 16 (capped
    by the grid), (b) a dilation sequence of a vertex-heavy bump whose
    gamma-term decays like 1/lambda, (c) `restarts` runs of projected
    log-gradient ascent with `budget` iterations each.  Ascent steps that
    lower the ratio are retried with a halved step.
    """
    if grid is None:
        grid = EdgeGrid(length=40.0, n_points=2001)
    rng = np.random.default_rng(seed)
    x = grid.x

    shifts = np.array([s for s in (2.0, 4.0, 8.0, 16.0) if s < grid.length - 10.0])
    escape, best, witness = [], -np.inf, None
    for s in shifts:
        f = escaping_soliton(mp, grid, s)
        r = gn_ratio(f, mp)
        escape.append(r)
        if r > best:
            best, witness = r, f

    dil = []
    for lam in (1.0, 2.0, 4.0, 8.0):
        profile = (1.0 + lam * x) * np.exp(-((lam * x) ** 2) / 2.0)
        f = GraphFunction(grid, np.tile(profile, (mp.n_edges, 1)).astype(complex))
        r = gn_ratio(f, mp)
        dil.append(r)
        if r > best:
            best, witness = r, f

    ascent_best = -np.inf
    cents, cents0 = [], []
    for _ in range(restarts):
        center = rng.uniform(3.0, 0.5 * grid.length)
        width = rng.uniform(0.5, 2.0)
        vals = np.zeros((mp.n_edges, grid.n_points), dtype=complex)
        k = rng.integers(0, mp.n_edges)
        vals[k] = np.exp(-((x - center) / width) ** 2) * vertex_cutoff(x)
        _project_continuity(vals)
        cents0.append(centroid(GraphFunction(grid, vals)))
        r = gn_ratio(GraphFunction(grid, vals), mp)
        step = 0.5
        for _ in range(budget):
            g = _ratio_log_gradient(vals, grid, mp)
            trial = vals + step * g / max(1e-12, float(np.abs(g).max()))
            _project_continuity(trial)
            trial *= 1.0 / np.sqrt(float((np.abs(trial) ** 2 @ grid.weights).sum()))
            r_trial = gn_ratio(GraphFunction(grid, trial), mp)
            if not np.isfinite(r_trial) or r_trial < r:
                step /= 2.0  # divergence guard: retry smaller
                if step < 1e-8:
                    break
                continue
            vals, r = trial, r_trial
        f = GraphFunction(grid, vals)
        cents.append(centroid(f))
        ascent_best = max(ascent_best, r)
        if r > best:
            best, witness = r, f

    return GNEstimate(
        value=float(best),
        witness=witness,
        escape_series=np.asarray(escape),
        escape_shifts=shifts,
        dilation_series=np.asarray(dil),
        ascent_best=float(ascent_best),
        witness_centroids=np.asarray(cents),
        start_centroids=np.asarray(cents0),
        seed=seed,
    )
