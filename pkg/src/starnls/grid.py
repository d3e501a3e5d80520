"""Discrete functions on the star graph and on the symmetric line.

The graph is N copies of the truncated half-line [0, L] sharing the sample
at x = 0 (the vertex).  All edges use the same uniform spacing h so that the
odd/even decomposition is exact index arithmetic.  Line functions live on
the symmetric grid {-L, ..., -h, 0, h, ..., L} of size 2*n_points - 1.

Quadrature is composite trapezoid throughout and derivatives are
second-order central differences with one-sided ends, matching the O(h^2)
accuracy of the time steppers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class VertexContinuityError(ValueError):
    """Raised when an operation requires continuity at the vertex."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"function is discontinuous at the vertex (gap {residual:.3e})")


@dataclass(frozen=True)
class AbsorbingLayer:
    """Smooth complex-potential ramp of given width next to x = L."""

    width: float
    strength: float

    def __post_init__(self):
        if self.width <= 0 or self.strength <= 0:
            raise ValueError("absorbing layer needs positive width and strength")


@dataclass(frozen=True)
class EdgeGrid:
    """Uniform truncation [0, L] of each half-line, n_points samples."""

    length: float
    n_points: int
    boundary_far: str | AbsorbingLayer = "dirichlet"

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")
        if isinstance(self.boundary_far, AbsorbingLayer):
            if self.boundary_far.width >= self.length / 2:
                raise ValueError("absorbing layer width must be < length/2")
        elif self.boundary_far != "dirichlet":
            raise ValueError(f"unknown boundary_far: {self.boundary_far!r}")

    @property
    def h(self) -> float:
        return self.length / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        """Samples 0, h, ..., L on one edge."""
        return _edge_axis(self.length, self.n_points)

    @property
    def x_line(self) -> np.ndarray:
        """Samples -L, ..., 0, ..., L of the symmetric line grid."""
        return _line_axis(self.length, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on one edge."""
        return _trapz_weights(self.n_points, self.h)

    @property
    def weights_line(self) -> np.ndarray:
        return _trapz_weights(2 * self.n_points - 1, self.h)

    def absorbing_sigma(self) -> np.ndarray | None:
        """Damping profile sigma(x) on one edge, or None for Dirichlet."""
        if not isinstance(self.boundary_far, AbsorbingLayer):
            return None
        layer = self.boundary_far
        ramp = np.clip((self.x - (self.length - layer.width)) / layer.width, 0.0, 1.0)
        return layer.strength * ramp * ramp


@lru_cache(maxsize=32)
def _edge_axis(length: float, n_points: int) -> np.ndarray:
    x = np.linspace(0.0, length, n_points)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=32)
def _line_axis(length: float, n_points: int) -> np.ndarray:
    x = np.linspace(-length, length, 2 * n_points - 1)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=64)
def _trapz_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    w.flags.writeable = False
    return w


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


class GraphFunction:
    """Complex samples on all edges of the star graph; values[k][i] ~ u_k(i*h).

    Instances are immutable value objects: mutate by constructing a new one
    via :meth:`with_values`.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: EdgeGrid, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 2 or values.shape[1] != grid.n_points:
            raise ValueError(f"values must have shape (n_edges, {grid.n_points})")
        if values.shape[0] < 3:
            raise ValueError("a star graph needs at least 3 edges")
        if not np.isfinite(values).all():
            raise ValueError("non-finite samples")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _freeze(values))

    def __setattr__(self, name, value):
        raise AttributeError("GraphFunction is immutable")

    @property
    def n_edges(self) -> int:
        return self.values.shape[0]

    @property
    def vertex_values(self) -> np.ndarray:
        return self.values[:, 0]

    def with_values(self, values: np.ndarray) -> "GraphFunction":
        return GraphFunction(self.grid, values)

    def scaled(self, c: complex) -> "GraphFunction":
        return GraphFunction(self.grid, c * self.values)

    def __add__(self, other: "GraphFunction") -> "GraphFunction":
        _check_same_grid(self, other)
        return GraphFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GraphFunction") -> "GraphFunction":
        _check_same_grid(self, other)
        return GraphFunction(self.grid, self.values - other.values)

    @staticmethod
    def zero(grid: EdgeGrid, n_edges: int = 3) -> "GraphFunction":
        return GraphFunction(grid, np.zeros((n_edges, grid.n_points), dtype=complex))


class LineFunction:
    """Complex samples on the symmetric grid {-L, ..., 0, ..., L}."""

    __slots__ = ("half_grid", "values")

    def __init__(self, half_grid: EdgeGrid, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 1 or values.size != 2 * half_grid.n_points - 1:
            raise ValueError(f"values must have length {2 * half_grid.n_points - 1}")
        if not np.isfinite(values).all():
            raise ValueError("non-finite samples")
        object.__setattr__(self, "half_grid", half_grid)
        object.__setattr__(self, "values", _freeze(values))

    def __setattr__(self, name, value):
        raise AttributeError("LineFunction is immutable")

    @property
    def center_index(self) -> int:
        """Index of the x = 0 sample."""
        return self.half_grid.n_points - 1

    @property
    def x(self) -> np.ndarray:
        return self.half_grid.x_line

    def with_values(self, values: np.ndarray) -> "LineFunction":
        return LineFunction(self.half_grid, values)

    def reflected(self) -> "LineFunction":
        return LineFunction(self.half_grid, self.values[::-1])

    @staticmethod
    def zero(half_grid: EdgeGrid) -> "LineFunction":
        return LineFunction(half_grid, np.zeros(2 * half_grid.n_points - 1, dtype=complex))

    @staticmethod
    def from_callable(half_grid: EdgeGrid, fn) -> "LineFunction":
        return LineFunction(half_grid, np.asarray(fn(half_grid.x_line), dtype=complex))


def _check_same_grid(f, g):
    if f.grid is not g.grid and (f.grid.length != g.grid.length or f.grid.n_points != g.grid.n_points):
        raise ValueError("grid mismatch")


# ---------------------------------------------------------------------------
# norms and inner products


def norm_lq(f: GraphFunction | LineFunction, q: float) -> float:
    """L^q norm by trapezoid quadrature; q = inf is the sup-norm.

    On the graph the L^inf norm is the *sum* of per-edge sup norms (the
    convention used for all graph estimates here); see
    :func:`norm_linf_max` for the plain max variant.
    """
    if q != np.inf and q < 2:
        raise ValueError(f"q must be >= 2 or inf, got {q}")
    if isinstance(f, GraphFunction):
        a = np.abs(f.values)
        if q == np.inf:
            return float(a.max(axis=1).sum())
        return float(((a**q) @ f.grid.weights).sum() ** (1.0 / q))
    a = np.abs(f.values)
    if q == np.inf:
        return float(a.max())
    return float(((a**q) @ f.half_grid.weights_line) ** (1.0 / q))


def norm_linf_max(f: GraphFunction) -> float:
    """Diagnostic variant: max over all samples of all edges."""
    return float(np.abs(f.values).max())


def norm_l1(f: GraphFunction | LineFunction) -> float:
    if isinstance(f, GraphFunction):
        return float((np.abs(f.values) @ f.grid.weights).sum())
    return float(np.abs(f.values) @ f.half_grid.weights_line)


def edge_derivatives(f: GraphFunction) -> np.ndarray:
    """d/dx per edge: central differences, one-sided second order at ends."""
    return np.gradient(f.values, f.grid.h, axis=1)


def line_derivative(g: LineFunction) -> np.ndarray:
    return np.gradient(g.values, g.half_grid.h)


def grad_norm_sq(f: GraphFunction) -> float:
    d = edge_derivatives(f)
    return float((np.abs(d) ** 2 @ f.grid.weights).sum())


def norm_h1gamma_sq(f: GraphFunction, gamma: float, continuity_tol: float = 1e-6) -> float:
    """||d_x f||_2^2 + N*gamma*|f_1(0)|^2, requiring vertex continuity."""
    gap, _ = vertex_residual(f, gamma)
    scale = max(1.0, float(np.abs(f.values).max()))
    if gap > continuity_tol * scale:
        raise VertexContinuityError(gap)
    return grad_norm_sq(f) + f.n_edges * gamma * abs(f.values[0, 0]) ** 2


def h1_norm_sq(f: GraphFunction) -> float:
    """Plain H^1 norm squared: sum over edges of L^2 and gradient terms."""
    w = f.grid.weights
    return float((np.abs(f.values) ** 2 @ w).sum() + (np.abs(edge_derivatives(f)) ** 2 @ w).sum())


def inner_l2(f: GraphFunction, g: GraphFunction) -> complex:
    """Sum over edges of int f_k conj(g_k); conjugate symmetric."""
    _check_same_grid(f, g)
    return complex(((f.values * np.conj(g.values)) @ f.grid.weights).sum())


def mass(f: GraphFunction) -> float:
    return float((np.abs(f.values) ** 2 @ f.grid.weights).sum())


def vertex_residual(f: GraphFunction, gamma: float = 0.0) -> tuple[float, float]:
    """(continuity gap, flux gap) of the vertex coupling condition.

    continuity gap: max over edge pairs of |f_j(0) - f_k(0)|.
    flux gap: |sum_k f_k'(0+) - N*gamma*f_1(0)| with one-sided second-order
    differences for the edge derivatives at the vertex.
    """
    v = f.vertex_values
    cont = float(np.abs(v[:, None] - v[None, :]).max())
    h = f.grid.h
    d0 = (-3.0 * f.values[:, 0] + 4.0 * f.values[:, 1] - f.values[:, 2]) / (2.0 * h)
    flux = abs(complex(d0.sum()) - f.n_edges * gamma * complex(f.values[0, 0]))
    return cont, float(flux)


# ---------------------------------------------------------------------------
# snapshot serialization (columnar text)


def save_snapshot(path, f: GraphFunction) -> None:
    """Columnar text: header (N, L, n_points, h), then per-edge re/im columns."""
    g = f.grid
    cols = []
    header = [f"# starnls graph snapshot", f"# n_edges={f.n_edges} length={g.length!r} n_points={g.n_points} h={g.h!r}"]
    names = []
    for k in range(f.n_edges):
        names += [f"re_{k + 1}", f"im_{k + 1}"]
        cols += [f.values[k].real, f.values[k].imag]
    header.append("# x " + " ".join(names))
    data = np.column_stack([g.x] + cols)
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        for row in data:
            fh.write(" ".join(f"{v:.17e}" for v in row) + "\n")


def load_snapshot(path) -> GraphFunction:
    with open(path) as fh:
        lines = fh.readlines()
    meta = {}
    for ln in lines:
        if ln.startswith("# n_edges"):
            for item in ln[1:].split():
                if "=" in item:
                    key, val = item.split("=")
                    meta[key] = val
            break
    n_edges = int(meta["n_edges"])
    grid = EdgeGrid(length=float(meta["length"]), n_points=int(meta["n_points"]))
    data = np.loadtxt(path, comments="#")
    if data.shape != (grid.n_points, 1 + 2 * n_edges):
        raise ValueError("snapshot data does not match its header")
    values = np.empty((n_edges, grid.n_points), dtype=complex)
    for k in range(n_edges):
        values[k] = data[:, 1 + 2 * k] + 1j * data[:, 2 + 2 * k]
    return GraphFunction(grid, values)
