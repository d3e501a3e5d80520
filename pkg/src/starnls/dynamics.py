"""Nonlinear evolution by Strang splitting, wave operator and diagnostics.

The nonlinear substep is exact: the phase flow of i u_t = mu |u|^(p-1) u
leaves |u| pointwise invariant, so u <- u exp(-i mu |u|^(p-1) dt / 2).  All
discretization error therefore lives in the linear substep and in the
splitting commutator, both O(dt^2); the splitting is time-symmetric, which
makes backward integration (wave operator) the exact inverse of forward
integration at the discrete level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .functionals import FunctionalReport, evaluate_functionals, localized_virial
from .grid import AbsorbingLayer, EdgeGrid, GraphFunction, h1_norm_sq, norm_lq
from .params import ModelParams
from .propagator import GraphLinearStepper, LinearPropagatorConfig, advance_values
from .grid import mass as graph_mass


@dataclass(frozen=True)
class EvolveConfig:
    """Time stepping and termination policy for evolve_nls."""

    dt: float = 0.01
    t_end: float = 10.0
    store_stride: int = 1
    blowup_h1_factor: float = 1e3
    adapt: bool = False
    method: str = "q_conjugated"
    monitor_boundary: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.store_stride < 1:
            raise ValueError("store_stride must be >= 1")


@dataclass(frozen=True)
class Termination:
    kind: str  # 'completed' | 'blowup_suspected' | 'boundary_contaminated'
    time: float | None = None
    detail: str = ""


@dataclass
class Trajectory:
    """Stored states with per-state functional reports.

    ``mass_drift`` is the running maximum of |M(t)-M(0)|/M(0) up to each
    stored time, so it is nondecreasing by construction.
    """

    model: ModelParams
    grid: EdgeGrid
    times: np.ndarray
    states: list[GraphFunction]
    reports: list[FunctionalReport]
    termination: Termination
    mass_drift: np.ndarray
    dt: float
    method: str

    def h1_series(self) -> np.ndarray:
        return np.array([np.sqrt(h1_norm_sq(s)) for s in self.states])


class _NLSStepper:
    """One Strang step; dt may be negative for backward integration."""

    def __init__(self, grid: EdgeGrid, n_edges: int, mp: ModelParams, dt: float, method: str):
        self.linear = GraphLinearStepper(grid, n_edges, mp.gamma, dt, method)
        self.mu_p = (mp.mu, mp.p)
        self.dt = dt

    def step(self, vals: np.ndarray) -> np.ndarray:
        mu, p = self.mu_p
        half = np.exp((-0.5j * mu * self.dt) * np.abs(vals) ** (p - 1.0))
        vals = self.linear.step(vals * half)
        half = np.exp((-0.5j * mu * self.dt) * np.abs(vals) ** (p - 1.0))
        return vals * half


def _boundary_band(grid: EdgeGrid) -> np.ndarray:
    if isinstance(grid.boundary_far, AbsorbingLayer):
        start = grid.length - grid.boundary_far.width
    else:
        start = grid.length - max(min(3.0, 0.05 * grid.length), 2 * grid.h)
    return grid.x >= start


def _discrete_h1(vals: np.ndarray, grid: EdgeGrid) -> float:
    # forward-difference H^1 proxy, cheap enough for a per-step check
    h = grid.h
    d = np.diff(vals, axis=1) / h
    return float(np.sqrt((np.abs(d) ** 2).sum() * h + (np.abs(vals) ** 2 @ grid.weights).sum()))


def evolve_nls(f0: GraphFunction, mp: ModelParams, cfg: EvolveConfig) -> Trajectory:
    """Integrate i u_t + Delta_gamma u = mu |u|^(p-1) u from f0 to t_end.

    Halts early with termination 'blowup_suspected' when the H^1 norm
    exceeds blowup_h1_factor times its initial value, when adaptive halving
    underflows, or when samples stop being finite (last good state kept);
    'boundary_contaminated' when more than 1% of the initial mass reaches
    the far band.
    """
    grid = f0.grid
    vals = f0.values.copy()
    dt = cfg.dt
    stepper = _NLSStepper(grid, f0.n_edges, mp, dt, cfg.method)
    band = _boundary_band(grid) if cfg.monitor_boundary else None
    m0 = graph_mass(f0)
    h1_0 = _discrete_h1(vals, grid)
    e_prev = evaluate_functionals(f0, mp).energy if cfg.adapt else None

    times = [0.0]
    states = [f0]
    reports = [evaluate_functionals(f0, mp)]
    drift = [0.0]
    termination = Termination("completed", cfg.t_end)

    t = 0.0
    steps_since_store = 0
    max_drift = 0.0
    while t < cfg.t_end - 1e-12:
        step_dt = min(dt, cfg.t_end - t)
        if step_dt != stepper.dt:
            stepper = _NLSStepper(grid, f0.n_edges, mp, step_dt, cfg.method)
        new_vals = stepper.step(vals)
        if not np.isfinite(new_vals).all():
            termination = Termination("blowup_suspected", t, "non-finite samples; kept last good state")
            break
        if cfg.adapt:
            e_new = _energy_of_values(new_vals, grid, mp)
            if abs(e_new - e_prev) > 1e-6 * max(abs(e_prev), 1e-12):
                dt = dt / 2.0
                if dt < cfg.dt * 2.0**-20:
                    termination = Termination("blowup_suspected", t, "dt underflow under adaptation")
                    break
                stepper = _NLSStepper(grid, f0.n_edges, mp, dt, cfg.method)
                continue
            e_prev = e_new
        vals = new_vals
        t += step_dt
        steps_since_store += 1
        h1_now = _discrete_h1(vals, grid)
        if h1_now > cfg.blowup_h1_factor * max(h1_0, 1e-300):
            _store(times, states, reports, drift, t, vals, grid, mp, m0, max_drift)
            termination = Termination("blowup_suspected", t, f"H1 grew by {h1_now / h1_0:.1e}")
            break
        if band is not None and m0 > 0:
            in_band = float(((np.abs(vals) ** 2) @ (grid.weights * band)).sum())
            if in_band > 0.01 * m0:
                _store(times, states, reports, drift, t, vals, grid, mp, m0, max_drift)
                termination = Termination("boundary_contaminated", t, f"band mass {in_band / m0:.1%}")
                break
        if steps_since_store >= cfg.store_stride or t >= cfg.t_end - 1e-12:
            max_drift = _store(times, states, reports, drift, t, vals, grid, mp, m0, max_drift)
            steps_since_store = 0
    return Trajectory(
        model=mp,
        grid=grid,
        times=np.asarray(times),
        states=states,
        reports=reports,
        termination=termination,
        mass_drift=np.asarray(drift),
        dt=cfg.dt,
        method=cfg.method,
    )


def _energy_of_values(vals, grid, mp):
    w = grid.weights
    d = np.gradient(vals, grid.h, axis=1)
    grad_sq = float((np.abs(d) ** 2 @ w).sum())
    lp1 = float((np.abs(vals) ** (mp.p + 1.0) @ w).sum())
    return 0.5 * grad_sq + vals.shape[0] * mp.gamma / 2.0 * abs(vals[0, 0]) ** 2 + mp.mu / (mp.p + 1.0) * lp1


def _store(times, states, reports, drift, t, vals, grid, mp, m0, max_drift):
    if times and abs(times[-1] - t) < 1e-15:
        return max_drift
    st = GraphFunction(grid, vals.copy())
    times.append(t)
    states.append(st)
    reports.append(evaluate_functionals(st, mp))
    rel = abs(reports[-1].mass - m0) / max(m0, 1e-300)
    max_drift = max(max_drift, rel)
    drift.append(max_drift)
    return max_drift


# ---------------------------------------------------------------------------
# wave operator


def solve_wave_operator(psi_plus: GraphFunction, T: float, mp: ModelParams,
                        cfg: EvolveConfig) -> GraphFunction:
    """Initial datum whose nonlinear flow matches e^{i t Delta} psi_+ at late time.

    Sets u(T) = e^{i T Delta_gamma} psi_+ with the same discrete linear
    stepper used inside the splitting, then integrates the nonlinear flow
    backward to t = 0.  Requires small data (warns above ||psi_+||_H1 = 0.5).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    h1 = np.sqrt(h1_norm_sq(psi_plus))
    if h1 > 0.5:
        warnings.warn(f"wave operator input is large (H1 norm {h1:.3g}); backward solve may not converge")
    grid = psi_plus.grid
    nsteps = int(np.ceil(T / cfg.dt - 1e-9))
    dte = T / nsteps
    vals = psi_plus.values.copy()
    lin = GraphLinearStepper(grid, psi_plus.n_edges, mp.gamma, dte, cfg.method)
    for _ in range(nsteps):
        vals = lin.step(vals)
    back = _NLSStepper(grid, psi_plus.n_edges, mp, -dte, cfg.method)
    for _ in range(nsteps):
        vals = back.step(vals)
        if not np.isfinite(vals).all():
            raise FloatingPointError("backward wave-operator solve diverged")
    return GraphFunction(grid, vals)


def wave_operator_matching_residual(u0: GraphFunction, psi_plus: GraphFunction,
                                    T: float, mp: ModelParams, cfg: EvolveConfig) -> float:
    """H^1 distance at time T between the nonlinear flow of u0 and the free
    flow of psi_+; decreasing in T certifies the backward construction."""
    grid = u0.grid
    nsteps = int(np.ceil(T / cfg.dt - 1e-9))
    dte = T / nsteps
    fwd = _NLSStepper(grid, u0.n_edges, mp, dte, cfg.method)
    vals = u0.values.copy()
    for _ in range(nsteps):
        vals = fwd.step(vals)
    lin = GraphLinearStepper(grid, u0.n_edges, mp.gamma, dte, cfg.method)
    ref = psi_plus.values.copy()
    for _ in range(nsteps):
        ref = lin.step(ref)
    return float(np.sqrt(h1_norm_sq(GraphFunction(grid, vals - ref))))


# ---------------------------------------------------------------------------
# scattering and blow-up diagnostics


@dataclass
class ScatteringReport:
    """Cauchy residuals of U(-t)u(t), sup-norm decay and Strichartz growth."""

    times: np.ndarray
    cauchy_residuals: np.ndarray  # len(times) - 1 entries
    linfty_decay: np.ndarray
    strichartz_accumulation: np.ndarray

    def cauchy_tail_sum(self, t_past: float) -> float:
        mask = self.times[1:] > t_past
        return float(self.cauchy_residuals[mask].sum())


def scattering_diagnostic(traj: Trajectory, mp: ModelParams) -> ScatteringReport:
    """Measure convergence of U(-t) u(t) along a completed trajectory.

    The Cauchy residual between consecutive stored states is computed as
    ||U(-(t2-t1)) u(t2) - u(t1)||_H1, which equals the textbook residual up
    to the (unitary) conjugation by U(-t1) and costs one short backward
    solve per stored gap.
    """
    if traj.termination.kind != "completed":
        raise ValueError(f"trajectory did not complete ({traj.termination.kind}); "
                         "scattering diagnostic not applicable")
    a, r, _ = mp.strichartz
    grid = traj.grid
    n_e = traj.states[0].n_edges
    res = []
    for i in range(len(traj.states) - 1):
        gap = traj.times[i + 1] - traj.times[i]
        back = advance_values(traj.states[i + 1].values.copy(), -gap, grid, n_e,
                              mp.gamma, traj.dt, traj.method)
        diff = GraphFunction(grid, back - traj.states[i].values)
        res.append(np.sqrt(h1_norm_sq(diff)))
    linf = np.array([norm_lq(s, np.inf) * np.sqrt(max(t, 0.0))
                     for t, s in zip(traj.times, traj.states)])
    lr_a = np.array([norm_lq(s, r) ** a for s in traj.states])
    stri = np.concatenate([[0.0], np.cumsum(0.5 * (lr_a[1:] + lr_a[:-1]) * np.diff(traj.times))])
    return ScatteringReport(traj.times, np.asarray(res), linf, stri)


@dataclass
class BlowupReport:
    """H^1 growth, localized virial series and the concavity certificate."""

    times: np.ndarray
    h1_series: np.ndarray
    virial: object  # VirialSeries
    concavity_onset: float | None
    grow_or_blow: str  # 'blowup_suspected' | 'growing' | 'bounded'


def blowup_diagnostic(traj: Trajectory, mp: ModelParams, R: float) -> BlowupReport:
    """Assemble blow-up evidence: H^1 series, V/V'/V'' and concavity onset.

    concavity_onset is the earliest stored time from which the four-term
    V'' stays negative through the end of the stored window.
    """
    h1 = traj.h1_series()
    vir = localized_virial(traj, R)
    onset = None
    vpp = vir.vpp_formula
    neg = vpp < 0
    for i in range(len(neg)):
        if neg[i:].all() and len(neg) - i >= 2:
            onset = float(traj.times[i])
            break
    if traj.termination.kind == "blowup_suspected":
        verdict = "blowup_suspected"
    elif h1[-1] >= 10.0 * max(h1[0], 1e-300):
        verdict = "growing"
    else:
        verdict = "bounded"
    return BlowupReport(traj.times, h1, vir, onset, verdict)
