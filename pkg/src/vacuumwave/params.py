"""Model parameters shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the vacuum-boundary wave model.

    n_dim is the effective dimension N of the weighted space; it is a real
    number, not necessarily an integer, and must satisfy N >= 4 so that the
    adiabatic exponent gamma = N/(N-2) lies in (1, 2].  The excited mode
    index n0 (1-based), its phase theta0, the hierarchy order and the
    amplitude eps describe the time-periodic perturbation built on top of
    the resting column.
    """

    n_dim: float = 4.0
    n0: int = 1
    theta0: float = 0.0
    order: int = 3
    eps: float = 1e-3

    def __post_init__(self) -> None:
        if self.n_dim < 4.0:
            raise ValueError(f"n_dim must be >= 4, got {self.n_dim}")
        if self.n0 < 1:
            raise ValueError(f"mode index n0 must be >= 1, got {self.n0}")
        if self.order < 1:
            raise ValueError(f"hierarchy order must be >= 1, got {self.order}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def gamma(self) -> float:
        """Adiabatic exponent gamma = N/(N-2)."""
        return self.n_dim / (self.n_dim - 2.0)

    @property
    def nu(self) -> float:
        """Bessel order nu = N/2 - 1 attached to the weighted space."""
        return self.n_dim / 2.0 - 1.0

    @property
    def density_exponent(self) -> float:
        """Power 1/(gamma-1) = N/2 - 1 governing the background density."""
        return 1.0 / (self.gamma - 1.0)
