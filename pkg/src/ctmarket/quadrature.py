"""Dual integration engines over time and over power levels.

``riemann_integrate`` sums a composite rule over interval panels on the time
axis; ``lebesgue_integrate`` sums the same rules over power-level panels,
weighting each level by the trajectory's measure function.  Panel edges are
snapped to curve breakpoints (and to their images on the power axis), so the
piecewise-polynomial integrands arising from piecewise-linear curves are
integrated exactly by the Simpson rule; the limit constructions behind the
two integral notions are exercised as convergence tests, not reimplemented
as the production algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .curves import LoadCurve, MeasureFunction
from .errors import DomainError, NumericError

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CONFIG",
    "riemann_integrate",
    "lebesgue_integrate",
    "lebesgue_energy",
]

_RULES = ("midpoint", "simpson")


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite-rule settings: panel count and rule choice."""

    n_panels: int = 10_000
    rule: str = "simpson"

    def __post_init__(self) -> None:
        if self.rule not in _RULES:
            raise ValueError(f"rule must be one of {_RULES}, got {self.rule!r}")
        if self.n_panels < 2:
            raise ValueError("n_panels must be at least 2")
        if self.rule == "simpson" and self.n_panels % 2 != 0:
            raise ValueError("simpson requires an even n_panels")


DEFAULT_CONFIG = QuadratureConfig()


def _evaluate(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array, tolerating scalar-only callables."""
    try:
        vals = np.asarray(f(xs), dtype=float)
    except (TypeError, ValueError):
        vals = np.array([float(f(float(x))) for x in xs], dtype=float)
    if vals.shape == ():
        vals = np.full(xs.shape, float(vals))
    elif vals.shape != xs.shape:
        vals = np.array([float(f(float(x))) for x in xs], dtype=float)
    return vals


def _check_finite(vals: np.ndarray, xs: np.ndarray, axis_name: str) -> None:
    bad = ~np.isfinite(vals)
    if np.any(bad):
        x = float(xs[bad][0])
        raise NumericError(
            f"integrand is not finite at {axis_name} = {x!r}", abscissa=x
        )


def _edges(a: float, b: float, breakpoints: Iterable[float]) -> list[float]:
    interior = sorted({float(x) for x in breakpoints if a < float(x) < b})
    return [a, *interior, b]


def _allocate_panels(edges: Sequence[float], n_total: int, rule: str) -> list[int]:
    span = edges[-1] - edges[0]
    minimum = 2 if rule == "simpson" else 1
    counts = []
    for e0, e1 in zip(edges, edges[1:]):
        n = max(minimum, round(n_total * (e1 - e0) / span))
        if rule == "simpson" and n % 2 != 0:
            n += 1
        counts.append(int(n))
    return counts


def _panel_sum(vals: np.ndarray, h: float, rule: str) -> float:
    if rule == "midpoint":
        return h * float(np.sum(vals))
    w = np.ones(vals.shape[0])
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (h / 3.0) * float(np.dot(w, vals))


def riemann_integrate(
    f: Callable,
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    breakpoints: Iterable[float] = (),
) -> float:
    """Composite-rule approximation of the time integral of ``f`` over ``[a, b]``.

    ``breakpoints`` lists known kinks of ``f``; panel edges are snapped to
    them, which makes the Simpson rule exact (to round-off) for
    piecewise-polynomial integrands of degree <= 3.

    Raises
    ------
    NumericError
        If ``f`` evaluates to a non-finite value; the offending abscissa is
        carried on the exception.
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration bounds must be finite")
    if a > b:
        raise DomainError(f"integration bounds out of order: {a!r} > {b!r}")
    if a == b:
        return 0.0
    edges = _edges(a, b, breakpoints)
    total = 0.0
    for (e0, e1), n in zip(zip(edges, edges[1:]), _allocate_panels(edges, cfg.n_panels, cfg.rule)):
        h = (e1 - e0) / n
        if cfg.rule == "midpoint":
            xs = e0 + (np.arange(n) + 0.5) * h
        else:
            xs = np.linspace(e0, e1, n + 1)
        vals = _evaluate(f, xs)
        _check_finite(vals, xs, "t")
        total += _panel_sum(vals, h, cfg.rule)
    return total


def lebesgue_integrate(
    m: MeasureFunction,
    y_lo: float,
    y_hi: float,
    weight: Callable,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """Integral of ``weight(m(y))`` over the power interval ``[y_lo, y_hi]``.

    Panel edges are aligned to the breakpoint levels of the underlying
    curve.  ``m`` jumps down at levels carrying flat segments; within each
    level band ``weight(m(y))`` is smooth, so each band is integrated with
    its right edge evaluated as the limit from below.  This keeps the rule
    exact for piecewise-polynomial compositions despite the jumps.
    """
    y_lo, y_hi = float(y_lo), float(y_hi)
    if not (math.isfinite(y_lo) and math.isfinite(y_hi)):
        raise DomainError("integration bounds must be finite")
    if y_lo > y_hi:
        raise DomainError(f"integration bounds out of order: {y_lo!r} > {y_hi!r}")
    if y_lo == y_hi:
        return 0.0
    edges = _edges(y_lo, y_hi, m.levels)
    total = 0.0
    for (e0, e1), n in zip(zip(edges, edges[1:]), _allocate_panels(edges, cfg.n_panels, cfg.rule)):
        h = (e1 - e0) / n
        if cfg.rule == "midpoint":
            ys = e0 + (np.arange(n) + 0.5) * h
            ms = m.sample(ys)
        else:
            ys = np.linspace(e0, e1, n + 1)
            ms = m.sample(ys)
            ms[-1] = m.limit_from_below(e1)
        vals = _evaluate(weight, ms)
        _check_finite(vals, ys, "y")
        total += _panel_sum(vals, h, cfg.rule)
    return total


def lebesgue_energy(curve: LoadCurve, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Energy of the trajectory read off its level sets.

    The rectangle below the minimum power contributes ``min_power * T``; on
    top of it every level band contributes its measure:
    ``min_power * T + integral of m(y) over [min_power, max_power]``.
    Agrees with the time-axis reading of energy for every curve.
    """
    m = MeasureFunction(curve)
    base = curve.min_power * curve.horizon
    if curve.max_power == curve.min_power:
        return base
    return base + lebesgue_integrate(m, curve.min_power, curve.max_power, lambda d: d, cfg)
