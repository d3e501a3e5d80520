"""Finite symmetry groups acting on graph functions by edge permutation and
a unit phase, invariant-subspace projection and flow-invariance measurement.

Groups are explicit element lists (every group of interest here has at most
six elements).  An element acts by (g u)_k = phase * u_{perm[k]}; both the
Laplacian and the power nonlinearity commute with every such action, so the
fixed-point subspaces are preserved by the flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GraphFunction, h1_norm_sq


@dataclass(frozen=True)
class GroupElement:
    """Edge permutation plus unit phase; perm[k] is the source edge of slot k."""

    perm: tuple[int, ...]
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"perm {self.perm} is not a permutation")
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError(f"phase must be unimodular, got |{self.phase}| = {abs(self.phase)}")

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Element acting as self after other: (self*other) u = self (other u)."""
        perm = tuple(other.perm[self.perm[k]] for k in range(len(self.perm)))
        return GroupElement(perm, self.phase * other.phase)

    def is_close(self, other: "GroupElement") -> bool:
        return self.perm == other.perm and abs(self.phase - other.phase) < 1e-9


def identity_element(n_edges: int) -> GroupElement:
    return GroupElement(tuple(range(n_edges)))


def apply_group_element(f: GraphFunction, g: GroupElement) -> GraphFunction:
    if len(g.perm) != f.n_edges:
        raise ValueError("permutation size does not match the edge count")
    return GraphFunction(f.grid, g.phase * f.values[list(g.perm)])


def generated_group(gen: GroupElement, max_order: int = 64) -> list[GroupElement]:
    """Cyclic group generated by one element."""
    elems = [identity_element(len(gen.perm))]
    g = gen
    while not g.is_close(elems[0]):
        elems.append(g)
        g = g.compose(gen)
        if len(elems) > max_order:
            raise ValueError("element order exceeds max_order; phase likely not a root of unity")
    return elems


def standard_group(name: str, n_edges: int = 3) -> list[GroupElement]:
    """Named groups: 'cyclic', 'swap23', 'signed_swap23', 'phase_cyclic'."""
    if name == "cyclic":
        perm = tuple((k + 1) % n_edges for k in range(n_edges))
        return generated_group(GroupElement(perm))
    if name == "swap23":
        if n_edges < 3:
            raise ValueError("swap23 needs 3 edges")
        perm = (0, 2, 1) + tuple(range(3, n_edges))
        return generated_group(GroupElement(perm))
    if name == "signed_swap23":
        perm = (0, 2, 1) + tuple(range(3, n_edges))
        return generated_group(GroupElement(perm, -1.0 + 0.0j))
    if name == "phase_cyclic":
        perm = tuple((k + 1) % n_edges for k in range(n_edges))
        phase = np.exp(2j * np.pi / n_edges)
        return generated_group(GroupElement(perm, complex(phase)))
    raise ValueError(f"unknown group name {name!r}")


def _check_closed(group: list[GroupElement]) -> None:
    for g in group:
        for h in group:
            gh = g.compose(h)
            if not any(gh.is_close(e) for e in group):
                raise ValueError("group list is not closed under composition")


def project_invariant(f: GraphFunction, group: list[GroupElement]) -> GraphFunction:
    """Group average (1/#G) sum_g g f; idempotent, fixed by every element."""
    _check_closed(group)
    acc = np.zeros_like(f.values)
    for g in group:
        acc = acc + apply_group_element(f, g).values
    return GraphFunction(f.grid, acc / len(group))


def invariance_drift(traj, group: list[GroupElement]) -> np.ndarray:
    """Per stored state: max over g of ||g u - u||_H1 (absolute)."""
    out = np.empty(len(traj.states))
    for i, st in enumerate(traj.states):
        worst = 0.0
        for g in group:
            diff = apply_group_element(st, g) - st
            worst = max(worst, float(np.sqrt(h1_norm_sq(diff))))
        out[i] = worst
    return out
