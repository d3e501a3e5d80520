"""Conserved and variational quantities, the explicit soliton, thresholds,
the potential-well classifier and localized virial identities.

Sign conventions: the flow is i u_t + Delta u = mu |u|^(p-1) u, with

    M(u)   = ||u||_2^2
    E(u)   = 1/2 ||u_x||_2^2 + (N gamma / 2)|u_1(0)|^2 + mu/(p+1) ||u||_{p+1}^{p+1}
    S(u)   = E(u) + (omega/2) M(u)
    K(u)   = 2 ||u_x||_2^2 + N gamma |u_1(0)|^2 - (p-1)/(p+1) ||u||_{p+1}^{p+1}

The line ground state Q solves -Q'' + omega Q = Q^p and is given in closed
form by a sech power; all line thresholds are quadratures of that formula
(the derivative is also sampled in closed form, Q' = -sqrt(omega) tanh(.) Q,
so threshold constants are quadrature-accurate, not FD-limited).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    EdgeGrid,
    GraphFunction,
    LineFunction,
    edge_derivatives,
    grad_norm_sq,
    norm_h1gamma_sq,
)
from .params import ModelParams

# ---------------------------------------------------------------------------
# explicit line soliton


def soliton_amplitude(p: float, omega: float) -> float:
    """Peak value Q_omega(0) = ((p+1) omega / 2)^(1/(p-1))."""
    return ((p + 1.0) * omega / 2.0) ** (1.0 / (p - 1.0))


def soliton_values(p: float, omega: float, x: np.ndarray) -> np.ndarray:
    beta = (p - 1.0) * np.sqrt(omega) / 2.0
    return soliton_amplitude(p, omega) * np.cosh(beta * np.abs(x)) ** (-2.0 / (p - 1.0))


def soliton_derivative_values(p: float, omega: float, x: np.ndarray) -> np.ndarray:
    """Closed-form Q' = -sqrt(omega) tanh(beta x) Q."""
    beta = (p - 1.0) * np.sqrt(omega) / 2.0
    return -np.sqrt(omega) * np.tanh(beta * x) * soliton_values(p, omega, x)


def soliton_line(p: float, omega: float, grid: EdgeGrid) -> LineFunction:
    """The ground state sampled on the symmetric line grid; even by construction."""
    return LineFunction(grid, soliton_values(p, omega, grid.x_line))


@lru_cache(maxsize=64)
def line_soliton_integrals(p: float, omega: float = 1.0, h: float = 1e-3) -> tuple[float, float, float]:
    """(mass, gradient-square, L^(p+1) power) of Q_omega by fine quadrature."""
    x_max = max(25.0, 25.0 / np.sqrt(omega))
    n = int(np.ceil(x_max / h)) + 1
    x = np.linspace(0.0, x_max, n)
    w = np.full(n, x[1] - x[0])
    w[0] = w[-1] = w[0] / 2
    q = soliton_values(p, omega, x)
    qp = soliton_derivative_values(p, omega, x)
    return (
        2.0 * float((q * q) @ w),
        2.0 * float((qp * qp) @ w),
        2.0 * float((q ** (p + 1.0)) @ w),
    )


# ---------------------------------------------------------------------------
# functional reports


@dataclass(frozen=True)
class FunctionalReport:
    """Evaluated invariants of one state."""

    mass: float
    energy: float
    action: float
    virial_k: float
    l_gamma: float
    h1gamma: float
    lp1: float

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate_functionals(f: GraphFunction, mp: ModelParams) -> FunctionalReport:
    """All conserved/variational quantities of a vertex-continuous state."""
    w = f.grid.weights
    m = float((np.abs(f.values) ** 2 @ w).sum())
    lp1 = float((np.abs(f.values) ** (mp.p + 1.0) @ w).sum())
    h1gamma = norm_h1gamma_sq(f, mp.gamma)
    grad_sq = h1gamma - f.n_edges * mp.gamma * abs(f.values[0, 0]) ** 2
    vert = f.n_edges * mp.gamma / 2.0 * abs(f.values[0, 0]) ** 2
    energy = 0.5 * grad_sq + vert + mp.mu / (mp.p + 1.0) * lp1
    return FunctionalReport(
        mass=m,
        energy=energy,
        action=energy + mp.omega / 2.0 * m,
        virial_k=2.0 * grad_sq + 2.0 * vert - (mp.p - 1.0) / (mp.p + 1.0) * lp1,
        l_gamma=0.5 * grad_sq + vert,
        h1gamma=h1gamma,
        lp1=lp1,
    )


# ---------------------------------------------------------------------------
# Pohozaev identities


@dataclass(frozen=True)
class PohozaevResiduals:
    """Relative gaps of the three pairwise identities and the M/E ratio."""

    l2_vs_grad: float
    grad_vs_lp1: float
    l2_vs_lp1: float
    mass_energy_ratio: float


def pohozaev_check(p: float, omega: float, grid: EdgeGrid) -> PohozaevResiduals:
    """Quadrature check of ||Q||^2/(p+3) = ||Q'||^2/(p-1) = ||Q||_{p+1}^{p+1}/(2(p+1)).

    Both sides come from the sampled soliton on the given grid with a
    finite-difference gradient, so every residual decays at O(h^2); the
    mass/energy ratio gap needs p > 5.
    """
    x = grid.x
    w = grid.weights
    q = soliton_values(p, omega, x)
    qp = np.gradient(q, grid.h)
    i2 = 2.0 * float((q * q) @ w)
    ig = 2.0 * float((qp * qp) @ w)
    ip1 = 2.0 * float((q ** (p + 1.0)) @ w)
    a = i2 / (p + 3.0)
    b = ig / (p - 1.0)
    c = ip1 / (2.0 * (p + 1.0))
    res = PohozaevResiduals(
        l2_vs_grad=abs(a - b) / max(a, b),
        grad_vs_lp1=abs(b - c) / max(b, c),
        l2_vs_lp1=abs(a - c) / max(a, c),
        mass_energy_ratio=np.nan,
    )
    if p > 5.0:
        energy = 0.5 * ig - ip1 / (p + 1.0)
        target = 2.0 * (p + 3.0) / (p - 5.0)
        res = PohozaevResiduals(
            res.l2_vs_grad, res.grad_vs_lp1, res.l2_vs_lp1,
            abs(i2 / energy - target) / target,
        )
    return res


# ---------------------------------------------------------------------------
# thresholds and the potential-well classifier


@dataclass(frozen=True)
class ThresholdTable:
    """Line ground-state constants that bound the dichotomy."""

    p: float
    omega: float
    gamma: float
    m_line_q: float
    e_line_q: float
    me_threshold: float
    k2_threshold: float
    n_omega: float
    gn_line_constant: float
    sharp_relation_residual: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps({"key": {"p": self.p, "omega": self.omega, "gamma": self.gamma},
                           "table": self.to_dict()}, sort_keys=True, **kwargs)


def threshold_table(mp: ModelParams) -> ThresholdTable:
    """Compute soliton-based thresholds; requires the supercritical range p > 5.

    The gamma of the model is carried along for bookkeeping only: every
    entry is a line quantity of Q and is gamma-independent.
    """
    p = mp.p
    if p <= 5.0:
        raise ValueError(f"threshold table needs p > 5, got {p}")
    sc = mp.s_c
    i2, ig, ip1 = line_soliton_integrals(p, 1.0)
    e0 = 0.5 * ig - ip1 / (p + 1.0)
    me = i2 ** ((1.0 - sc) / sc) * e0
    k2 = i2 ** ((1.0 - sc) / 2.0) * ig ** (sc / 2.0)
    s10 = e0 + 0.5 * i2
    n_omega = mp.omega ** ((p + 3.0) / (2.0 * (p - 1.0))) * s10
    c_gn = ip1 / (i2 ** ((p + 3.0) / 4.0) * ig ** ((p - 1.0) / 4.0))
    k2_from_relation = (2.0 * (p + 1.0) / ((p - 1.0) * c_gn)) ** (1.0 / (p - 1.0))
    return ThresholdTable(
        p=p,
        omega=mp.omega,
        gamma=mp.gamma,
        m_line_q=i2,
        e_line_q=e0,
        me_threshold=me,
        k2_threshold=k2,
        n_omega=n_omega,
        gn_line_constant=c_gn,
        sharp_relation_residual=abs(k2 - k2_from_relation) / k2,
    )


def tangent_omega(mass_value: float, mp: ModelParams) -> float:
    """Frequency whose soliton mass matches the given mass.

    Solves M_omega = omega^(-(p-5)/(2(p-1))) M_line(Q) = mass; this is the
    tangent choice that makes action-based thresholds sharp.
    """
    if mass_value <= 0:
        raise ValueError("mass must be positive")
    i2, _, _ = line_soliton_integrals(mp.p, 1.0)
    return (i2 / mass_value) ** (2.0 * (mp.p - 1.0) / (mp.p - 5.0))


@dataclass(frozen=True)
class DichotomyVerdict:
    """Potential-well side with the distances to each inequality."""

    side: str  # 'pw_plus' | 'pw_minus' | 'above_threshold'
    margins: dict

    def as_dict(self) -> dict:
        return {"side": self.side, "margins": dict(self.margins)}


def classify_potential_well(f: GraphFunction, mp: ModelParams,
                            table: ThresholdTable | None = None) -> DichotomyVerdict:
    """Classify a state into PW+, PW- or above-threshold.

    First gate: M^((1-s_c)/s_c) E against the line soliton product; below it,
    the gradient product ||f||_2^(1-s_c) ||f||_{H^1_gamma}^(s_c) against the
    soliton value decides the side.  The sign of K is reported and checked
    for consistency with the side (they must agree below threshold).
    """
    if table is None:
        table = threshold_table(mp)
    rep = evaluate_functionals(f, mp)
    sc = mp.s_c
    me = rep.mass ** ((1.0 - sc) / sc) * rep.energy
    k2 = rep.mass ** ((1.0 - sc) / 2.0) * rep.h1gamma ** (sc / 2.0)
    margins = {
        "me_product": me,
        "me_threshold": table.me_threshold,
        "me_margin": (table.me_threshold - me) / abs(table.me_threshold),
        "k2_product": k2,
        "k2_threshold": table.k2_threshold,
        "k2_margin": (table.k2_threshold - k2) / table.k2_threshold,
        "k_gamma": rep.virial_k,
    }
    if me >= table.me_threshold:
        return DichotomyVerdict("above_threshold", margins)
    side = "pw_plus" if k2 < table.k2_threshold else "pw_minus"
    expected_sign = 1.0 if side == "pw_plus" else -1.0
    if rep.virial_k * expected_sign < 0 and abs(rep.virial_k) > 1e-9 * max(1.0, rep.h1gamma):
        warnings.warn(
            f"K_gamma sign ({rep.virial_k:+.3e}) contradicts the gradient comparison ({side}); "
            "state is probably within quadrature noise of the boundary"
        )
    return DichotomyVerdict(side, margins)


# ---------------------------------------------------------------------------
# virial cutoff profile
#
# The dimensionless profile equals x^2 on [0, 1], vanishes beyond 3 and is
# C^3 on the bridge with second derivative <= 2 everywhere.  The minimal
# Hermite bridge violates the bound, so the second derivative itself is
# designed: w = 2 - phi with phi >= 0 a combination of two quartic bumps and
# a smoothstep, the two free weights fixed by the moment conditions
# int phi = 6 and int (3-s) phi = 9 that make value/slope land at zero.


class _PiecewisePoly:
    """Polynomial pieces in local coordinates; zero right of the last break."""

    def __init__(self, breaks, coeffs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = [np.asarray(c, dtype=float) for c in coeffs]

    def eval(self, x, der: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.coeffs) - 1)
        inside = (x >= self.breaks[0]) & (x < self.breaks[-1])
        for i, c in enumerate(self.coeffs):
            m = inside & (idx == i)
            if not m.any():
                continue
            cd = np.polynomial.polynomial.polyder(c, der) if der else c
            out[m] = np.polynomial.polynomial.polyval(x[m] - self.breaks[i], cd)
        return out

    def antiderivative(self, value_at_left: float) -> "_PiecewisePoly":
        coeffs = []
        acc = value_at_left
        for i, c in enumerate(self.coeffs):
            ci = np.polynomial.polynomial.polyint(c, k=[acc])
            coeffs.append(ci)
            acc = np.polynomial.polynomial.polyval(self.breaks[i + 1] - self.breaks[i], ci)
        return _PiecewisePoly(self.breaks, coeffs)

    def moment(self, weight_coeffs_global=None) -> float:
        """Integral over the domain, optionally against a global-coordinate poly."""
        total = 0.0
        for i, c in enumerate(self.coeffs):
            a = self.breaks[i]
            width = self.breaks[i + 1] - a
            cc = c
            if weight_coeffs_global is not None:
                # express weight(s) = weight(a + xi) in the local variable
                wloc = _taylor_shift(np.asarray(weight_coeffs_global, dtype=float), a)
                cc = _polymul(cc, wloc)
            ci = np.polynomial.polynomial.polyint(cc)
            total += np.polynomial.polynomial.polyval(width, ci)
        return float(total)


def _polymul(a, b):
    return np.polynomial.polynomial.polymul(a, b)


def _taylor_shift(coeffs, delta):
    """Coefficients of P(delta + xi) as a polynomial in xi."""
    n = len(coeffs)
    out = np.zeros(n)
    for k in range(n):
        ck = coeffs[k]
        if ck == 0.0:
            continue
        for j in range(k + 1):
            out[j] += ck * _binom(k, j) * delta ** (k - j)
    return out


def _binom(n, k):
    from math import comb

    return float(comb(n, k))


def _restrict(breaks, support, local_coeffs):
    """Pieces of one polynomial (local at support[0]) on a finer partition."""
    out = []
    for a in breaks[:-1]:
        if support[0] <= a < support[1]:
            out.append(_taylor_shift(local_coeffs, a - support[0]))
        else:
            out.append(np.zeros(1))
    return out


@lru_cache(maxsize=1)
def _cutoff_pieces() -> _PiecewisePoly:
    bridge = [1.0, 1.6, 2.4, 2.8, 3.0]
    # bumps ((s-1)(b-s))^2 in local xi = s-1, and the smoothstep near s = 3
    b1 = _PiecewisePoly(bridge, _restrict(bridge, (1.0, 1.6), [0.0, 0.0, 0.36, -1.2, 1.0]))
    b2 = _PiecewisePoly(bridge, _restrict(bridge, (1.0, 2.8), [0.0, 0.0, 3.24, -3.6, 1.0]))
    wstep = 3.0 - 2.4
    step = _PiecewisePoly(
        bridge, _restrict(bridge, (2.4, 3.0), [0.0, 0.0, 3.0 / wstep**2, -2.0 / wstep**3])
    )
    wgt = [3.0, -1.0]  # (3 - s) in global coordinates
    m = np.array([[b1.moment(), b2.moment()], [b1.moment(wgt), b2.moment(wgt)]])
    rhs = np.array([6.0 - 2.0 * step.moment(), 9.0 - 2.0 * step.moment(wgt)])
    c1, c2 = np.linalg.solve(m, rhs)
    if c1 < 0 or c2 < 0:
        raise AssertionError("cutoff construction lost nonnegativity")
    # w = X'' = 2 - phi on the bridge; integrate twice with x^2 data at s = 1
    pa = np.polynomial.polynomial.polyadd
    w_coeffs = []
    for i in range(len(bridge) - 1):
        phi_i = pa(pa(2.0 * step.coeffs[i], c1 * b1.coeffs[i]), c2 * b2.coeffs[i])
        w_coeffs.append(pa([2.0], -phi_i))
    w = _PiecewisePoly(bridge, w_coeffs)
    xp = w.antiderivative(2.0)  # X'(1) = 2
    xx = xp.antiderivative(1.0)  # X(1) = 1
    breaks = [0.0] + bridge
    coeffs = [np.array([0.0, 0.0, 1.0])] + list(xx.coeffs)
    chi = _PiecewisePoly(breaks, coeffs)
    # landing at s = 3 must be flat to rounding for the zero tail to be C^3
    for der in range(4):
        val = np.polynomial.polynomial.polyval(
            0.2, np.polynomial.polynomial.polyder(chi.coeffs[-1], der) if der else chi.coeffs[-1])
        if abs(val) > 1e-9:
            raise AssertionError(f"cutoff bridge fails to land flat (der {der}: {val:.2e})")
    return chi


def cutoff_value(x, der: int = 0):
    """The dimensionless cutoff profile and its derivatives (orders 0..4)."""
    return _cutoff_pieces().eval(x, der)


@dataclass(frozen=True)
class CutoffProfile:
    """Rescaled cutoff R^2 chi(x/R) sampled on one edge, with certificate."""

    R: float
    x: np.ndarray
    values: np.ndarray  # R^2 chi(x/R)
    d1: np.ndarray  # R chi'(x/R)
    d2: np.ndarray  # chi''(x/R)
    d4: np.ndarray  # chi''''(x/R) / R^2
    max_second_derivative: float


def cutoff_profile(R: float, grid: EdgeGrid) -> CutoffProfile:
    """Sample the localized-virial cutoff at scale R on the edge grid.

    The certificate samples the dimensionless second derivative on a fine
    grid; the construction guarantees it never exceeds 2.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    s_fine = np.linspace(0.0, 3.0, 30001)
    cert = float(cutoff_value(s_fine, 2).max())
    if cert > 2.0 + 1e-12:
        raise AssertionError(f"cutoff second derivative certificate failed: {cert}")
    s = grid.x / R
    return CutoffProfile(
        R=R,
        x=grid.x,
        values=R * R * cutoff_value(s),
        d1=R * cutoff_value(s, 1),
        d2=cutoff_value(s, 2),
        d4=cutoff_value(s, 4) / (R * R),
        max_second_derivative=cert,
    )


# ---------------------------------------------------------------------------
# localized virial series along a trajectory


@dataclass
class VirialSeries:
    """V, V', V'' along a trajectory, each by formula and by differencing."""

    R: float
    times: np.ndarray
    v: np.ndarray
    vp_formula: np.ndarray
    vp_diff: np.ndarray
    vpp_formula: np.ndarray
    vpp_diff: np.ndarray
    vp_residual: float
    vpp_residual: float


def localized_virial(traj, R: float) -> VirialSeries:
    """Localized virial identities evaluated on the stored states.

    V' and V'' come once from the (paper-exact) spatial formulas and once
    from time differencing of V resp. V'; the residual between routes is the
    interior max-difference and converges at O(dt^2 + h^2).
    """
    mp: ModelParams = traj.model
    states = traj.states
    if len(states) < 3:
        raise ValueError("need at least 3 stored states for time differencing")
    grid = states[0].grid
    cut = cutoff_profile(R, grid)
    w = grid.weights
    n_e = states[0].n_edges
    v = np.empty(len(states))
    vp = np.empty(len(states))
    vpp = np.empty(len(states))
    for i, st in enumerate(states):
        a2 = np.abs(st.values) ** 2
        du = edge_derivatives(st)
        v[i] = float(((cut.values * a2) @ w).sum())
        vp[i] = 2.0 * float(np.imag(((cut.d1 * np.conj(st.values) * du) @ w).sum()))
        vpp[i] = (
            4.0 * float(((cut.d2 * np.abs(du) ** 2) @ w).sum())
            + 2.0 * n_e * mp.gamma * cut.d2[0] * abs(st.values[0, 0]) ** 2
            - float(((cut.d4 * a2) @ w).sum())
            + mp.mu * 2.0 * (mp.p - 1.0) / (mp.p + 1.0)
            * float(((cut.d2 * np.abs(st.values) ** (mp.p + 1.0)) @ w).sum())
        )
    times = np.asarray(traj.times)
    vp_diff = np.gradient(v, times)
    vpp_diff = np.gradient(vp, times)
    return VirialSeries(
        R=R,
        times=times,
        v=v,
        vp_formula=vp,
        vp_diff=vp_diff,
        vpp_formula=vpp,
        vpp_diff=vpp_diff,
        vp_residual=float(np.abs(vp[1:-1] - vp_diff[1:-1]).max()),
        vpp_residual=float(np.abs(vpp[1:-1] - vpp_diff[1:-1]).max()),
    )
