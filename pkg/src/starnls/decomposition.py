"""Odd/even decomposition between graph functions and line-function tuples.

A graph function splits into N-1 odd line functions and one even line
function.  For N = 3 the half-line combinations are

    a_1 = (-2 f_1 + f_2 + f_3) / 3,
    a_2 = (- f_1 - f_2 + 2 f_3) / 3,
    a_3 = (  f_1 + f_2 + f_3) / 3,

odd-extended (a_1, a_2) and even-extended (a_3); the inverse applies the
matrix ((-1, 0, 1), (1, -1, 1), (0, 1, 1)) and restricts to x >= 0.  For
general N the inverse matrix has -1 on the first N-1 diagonal entries, +1 on
the subdiagonal and in the last column, and (0, ..., 0, 1, 1) as last row;
the forward combinations are its exact inverse.

At the discrete level the map is a bijection on *all* sampled data: the
center sample of an odd part carries the (normally vanishing) vertex
combination, and is snapped to exactly zero when it is zero up to rounding,
which is the case for every vertex-continuous function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import EdgeGrid, GraphFunction, LineFunction

#: odd-part center samples below this relative level are snapped to zero
_CENTER_SNAP = 64 * np.finfo(float).eps


@lru_cache(maxsize=16)
def inverse_matrix(n_edges: int) -> np.ndarray:
    """Matrix applied to a line tuple (restricted to x >= 0) to rebuild edges."""
    m = np.zeros((n_edges, n_edges))
    for k in range(n_edges - 1):
        m[k, k] = -1.0
        if k >= 1:
            m[k, k - 1] = 1.0
        m[k, n_edges - 1] = 1.0
    m[n_edges - 1, n_edges - 2] = 1.0
    m[n_edges - 1, n_edges - 1] = 1.0
    m.flags.writeable = False
    return m


@lru_cache(maxsize=16)
def forward_matrix(n_edges: int) -> np.ndarray:
    """Exact inverse of :func:`inverse_matrix`: edge values -> combinations."""
    n = n_edges
    a = np.empty((n, n))
    for k in range(n - 1):
        for j in range(n):
            a[k, j] = (k + 1) / n - (1.0 if j <= k else 0.0)
    a[n - 1, :] = 1.0 / n
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LineTriple:
    """Image of a graph function: N-1 odd parts followed by one even part."""

    parts: tuple[LineFunction, ...]

    def __post_init__(self):
        if len(self.parts) < 3:
            raise ValueError("need at least 3 parts")
        grid = self.parts[0].half_grid
        for p in self.parts:
            if p.half_grid.n_points != grid.n_points or p.half_grid.length != grid.length:
                raise ValueError("grid mismatch among parts")

    @property
    def n_edges(self) -> int:
        return len(self.parts)

    @property
    def half_grid(self) -> EdgeGrid:
        return self.parts[0].half_grid

    def parity_of(self, k: int) -> int:
        """-1 for the odd slots (k < N-1), +1 for the even slot."""
        return 1 if k == len(self.parts) - 1 else -1


def decompose(f: GraphFunction) -> LineTriple:
    """Map a graph function to its (odd, ..., odd, even) line parts."""
    n = f.grid.n_points
    alpha = forward_matrix(f.n_edges) @ f.values
    scale = max(1.0, float(np.abs(f.vertex_values).max()))
    parts = []
    for k in range(f.n_edges):
        line = np.empty(2 * n - 1, dtype=complex)
        line[n - 1 :] = alpha[k]
        if k < f.n_edges - 1:
            line[: n - 1] = -alpha[k][1:][::-1]
            if abs(line[n - 1]) <= _CENTER_SNAP * scale:
                line[n - 1] = 0.0
        else:
            line[: n - 1] = alpha[k][1:][::-1]
        parts.append(LineFunction(f.grid, line))
    return LineTriple(tuple(parts))


def parity_residual(t: LineTriple) -> float:
    """Max over parts of the L^2 distance to the declared parity.

    For an odd part the residual is ||part + reflected part||_2 over the
    mirrored sample pairs; the center sample is structural (it stores the
    vertex combination of not-necessarily-continuous data) and is excluded.
    """
    worst = 0.0
    w = t.half_grid.weights_line
    c = t.half_grid.n_points - 1
    for k, part in enumerate(t.parts):
        diff = part.values - t.parity_of(k) * part.values[::-1]
        if t.parity_of(k) < 0:
            diff[c] = 0.0
        worst = max(worst, float(np.sqrt((np.abs(diff) ** 2 * w).sum())))
    return worst


def reconstruct(t: LineTriple, parity_tol: float = 1e-8) -> GraphFunction:
    """Exact discrete inverse of :func:`decompose`; rejects parity violations."""
    res = parity_residual(t)
    scale = max(float(np.sqrt((np.abs(p.values) ** 2 * t.half_grid.weights_line).sum())) for p in t.parts)
    if res > parity_tol * max(scale, 1e-300):
        raise ValueError(f"parity residual {res:.3e} exceeds {parity_tol:.1e} relative")
    c = t.half_grid.n_points - 1
    half = np.stack([p.values[c:] for p in t.parts])
    return GraphFunction(t.half_grid, inverse_matrix(t.n_edges) @ half)


def l2_quadratic_form(t: LineTriple) -> float:
    """Graph L^2 norm squared expressed through the tuple.

    Equals sum_{j,k} G[j,k] <a_j, a_k> over the half-line x >= 0 with
    G = M^T M, M the inverse matrix; the odd and even blocks never mix.
    """
    m = inverse_matrix(t.n_edges)
    g = m.T @ m
    c = t.half_grid.n_points - 1
    w = t.half_grid.weights
    half = np.stack([p.values[c:] for p in t.parts])
    total = 0.0
    for j in range(t.n_edges):
        for k in range(t.n_edges):
            if g[j, k] != 0.0:
                total += g[j, k] * float(np.real((half[j] * np.conj(half[k])) @ w))
    return total
