"""Model parameters for the vertex-coupled NLS on a star graph."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters (N, gamma, p, mu, omega) plus derived exponents.

    ``n_edges`` is the number of half-lines meeting at the vertex,
    ``gamma >= 0`` the strength of the repulsive delta coupling (``gamma = 0``
    is the Kirchhoff condition), ``p`` the power of the nonlinearity,
    ``mu = +1/-1`` the defocusing/focusing sign and ``omega > 0`` the
    reference frequency used for action-based functionals.
    """

    n_edges: int = 3
    gamma: float = 0.0
    p: float = 7.0
    mu: int = -1
    omega: float = 1.0

    def __post_init__(self):
        if self.n_edges < 3:
            raise ValueError(f"n_edges must be >= 3, got {self.n_edges}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.p <= 1:
            raise ValueError(f"p must be > 1, got {self.p}")
        if self.mu not in (-1, 1):
            raise ValueError(f"mu must be +1 or -1, got {self.mu}")
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")

    @property
    def s_c(self) -> float:
        """Critical Sobolev index 1/2 - 2/(p-1); positive for p > 5."""
        return 0.5 - 2.0 / (self.p - 1.0)

    @property
    def strichartz(self) -> tuple[float, float, float]:
        """Time-space exponents (a, r, b) used for scattering norms, p > 5.

        r = p+1, a = 2(p^2-1)/(p+3), b = 2(p^2-1)/(p^2-3p-2).  They satisfy
        2/a + 1/r = 1/2 - s_c.
        """
        p = self.p
        r = p + 1.0
        a = 2.0 * (p * p - 1.0) / (p + 3.0)
        b = 2.0 * (p * p - 1.0) / (p * p - 3.0 * p - 2.0)
        return (a, r, b)

    def replace(self, **kwargs) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **kwargs)
