"""Power nonlinearity ``lam * |u|^(2 sigma) * u``."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

__all__ = ["Nonlinearity"]


@dataclass(frozen=True)
class Nonlinearity:
    lam: float
    sigma: float
    dim: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if not self.h1_subcritical:
            raise DomainError(
                f"sigma={self.sigma} is not H1-subcritical in dimension {self.dim} "
                f"(need sigma < {2.0 / (self.dim - 2)})")

    @classmethod
    def linear(cls, dim: int = 1) -> "Nonlinearity":
        return cls(0.0, 1.0, dim)

    @property
    def is_linear(self) -> bool:
        return self.lam == 0.0

    @property
    def critical_sigma(self) -> float:
        return 2.0 / self.dim

    @property
    def l2_critical(self) -> bool:
        return abs(self.sigma - self.critical_sigma) <= 1e-12

    @property
    def l2_supercritical(self) -> bool:
        return self.sigma >= self.critical_sigma - 1e-12

    @property
    def h1_subcritical(self) -> bool:
        return self.dim <= 2 or self.sigma < 2.0 / (self.dim - 2)

    @property
    def focusing(self) -> bool:
        return self.lam < 0
