"""Equation coefficients and numerical tolerance bundles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class TelegraphParams:
    """Coefficients of ``d^alpha u + b d^beta u - u_xx + c u = f`` with ``alpha = 2 beta``.

    Only ``alpha``, ``b`` and ``c`` are stored; every derived constant is a
    property so it can never disagree with them.
    """

    alpha: float
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "b", "c"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))
        if not 0.0 < self.alpha < 2.0:
            raise ConfigError(f"alpha must lie in (0, 2), got {self.alpha}")

    @property
    def beta(self) -> float:
        return self.alpha / 2.0

    @property
    def b1(self) -> float:
        return -self.b / 2.0

    @property
    def a(self) -> float:
        return self.b1**2 - self.c

    @property
    def n(self) -> int:
        return 1 if self.alpha <= 1.0 else 2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the kernel's tau-integral and the solution integrals.

    ``max_panels`` caps the number of Gauss-Legendre panels per integral and
    ``tail_safety`` stretches the analytic truncation point of semi-infinite
    ranges.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_panels: int = 400
    tail_safety: float = 1.5

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("rel_tol and abs_tol must be positive")
        if self.max_panels < 1:
            raise ConfigError("max_panels must be positive")
        if not self.tail_safety >= 1.0:
            raise ConfigError("tail_safety must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)
