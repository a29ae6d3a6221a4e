"""Quadratic generation-cost model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["QuadraticCost"]


@dataclass(frozen=True)
class QuadraticCost:
    """Hourly generation cost ``C(P) = q2*P^2 + q1*P + q0``.

    ``q2`` must be strictly positive (strict convexity: the marginal cost is
    invertible and the equilibrium split of load is unique); ``q1`` and
    ``q0`` must be non-negative.  Units: q2 in $/MW^2 h, q1 in $/MWh, q0 in
    $/h.
    """

    q2: float
    q1: float
    q0: float

    def __post_init__(self) -> None:
        for name in ("q2", "q1", "q0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.q2 <= 0.0:
            raise ValueError(f"q2 must be > 0 for strict convexity, got {self.q2!r}")
        if self.q1 < 0.0 or self.q0 < 0.0:
            raise ValueError("q1 and q0 must be non-negative")

    def cost(self, power):
        """Hourly cost at output ``power`` (scalar or array), in $/h."""
        p = np.asarray(power, dtype=float)
        if np.any(p < 0.0):
            raise DomainError("output power must be non-negative")
        out = self.q2 * p * p + self.q1 * p + self.q0
        return float(out) if out.ndim == 0 else out

    def marginal(self, power):
        """Marginal cost ``2*q2*P + q1`` at output ``power``, in $/MWh."""
        p = np.asarray(power, dtype=float)
        if np.any(p < 0.0):
            raise DomainError("output power must be non-negative")
        out = 2.0 * self.q2 * p + self.q1
        return float(out) if out.ndim == 0 else out

    def inverse_marginal(self, price):
        """Output at which the marginal cost equals ``price``.

        Prices below ``q1`` would ask for negative output (the plant is
        priced out) and raise :class:`DomainError`; the dispatch solver
        handles that case through its bound validation instead.
        """
        lam = np.asarray(price, dtype=float)
        if np.any(lam < self.q1):
            raise DomainError(
                f"price below the zero-output marginal cost {self.q1!r}: plant is priced out"
            )
        out = (lam - self.q1) / (2.0 * self.q2)
        return float(out) if out.ndim == 0 else out
