"""Per-plant and market-wide settlement under both pricing mechanisms.

Generation cost is identical under both mechanisms (same dispatch); only
revenue differs.  Spot revenue integrates price times output over time.
Duration revenue integrates the bounded product ``pi(m(y)) * m(y)`` over
the plant's output range and adds the base block ``[0, min output]``,
which runs the whole cycle and settles at the anchor price ``pi(T)``.
Every plant settles at the single market duration price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import MeasureFunction
from .dispatch import DispatchSolution, Plant, dispatch_cost
from .errors import UnsupportedOperationError
from .pricing import (
    DurationPrice,
    SpotPrice,
    unit_energy_price_duration,
    unit_energy_price_spot,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, lebesgue_integrate, riemann_integrate

__all__ = [
    "PlantSettlement",
    "SettlementReport",
    "ValueSegment",
    "settle_spot",
    "settle_duration",
    "value_decomposition",
]


@dataclass(frozen=True)
class PlantSettlement:
    """One plant's cycle accounting: cost, revenue, profit, profit rate, energy."""

    plant: str
    generation_cost: float
    revenue: float
    profit: float
    profit_rate: float | None  # profit / cost; None when cost == 0
    energy: float


@dataclass(frozen=True)
class SettlementReport:
    """Market-wide settlement under one mechanism."""

    mechanism: str  # "spot" | "duration"
    plants: tuple[PlantSettlement, ...]
    total_cost: float
    total_revenue: float
    total_profit: float
    market_profit_rate: float | None


@dataclass(frozen=True)
class ValueSegment:
    """Unit energy value of one commodity segment of one plant."""

    mechanism: str
    plant: str
    lo: float  # slice start (hours) under spot, band bottom (MW) under duration
    hi: float
    energy: float
    unit_value: float


def _assemble(mechanism: str, rows: list[PlantSettlement]) -> SettlementReport:
    total_cost = math.fsum(r.generation_cost for r in rows)
    total_revenue = math.fsum(r.revenue for r in rows)
    total_profit = math.fsum(r.profit for r in rows)
    return SettlementReport(
        mechanism=mechanism,
        plants=tuple(rows),
        total_cost=total_cost,
        total_revenue=total_revenue,
        total_profit=total_profit,
        market_profit_rate=total_profit / total_cost if total_cost > 0.0 else None,
    )


def _plant_row(plant: str, cost: float, revenue: float, energy: float) -> PlantSettlement:
    profit = revenue - cost
    return PlantSettlement(
        plant=plant,
        generation_cost=cost,
        revenue=revenue,
        profit=profit,
        profit_rate=profit / cost if cost > 0.0 else None,
        energy=energy,
    )


def settle_spot(
    sol: DispatchSolution,
    price: SpotPrice,
    plants: Sequence[Plant],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> SettlementReport:
    """Settle each plant at the spot price: revenue = int lam(t) P_j(t) dt.

    The market purchasing cost (total revenue) equals the integral of
    lam times the system load, since outputs balance the load pointwise.
    """
    costs = dispatch_cost(sol, plants, cfg)
    rows = []
    for p in plants:
        curve = sol.outputs[p.id]
        kinks = np.concatenate([price.curve.times, curve.times])
        revenue = riemann_integrate(
            lambda ts, k=curve: price.sample(ts) * k.sample(ts),
            0.0, sol.horizon, cfg, breakpoints=kinks,
        )
        energy = riemann_integrate(curve.sample, 0.0, sol.horizon, cfg, breakpoints=curve.times)
        rows.append(_plant_row(p.id, costs.per_plant[p.id], revenue, energy))
    return _assemble("spot", rows)


def settle_duration(
    sol: DispatchSolution,
    price: DurationPrice,
    plants: Sequence[Plant],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> SettlementReport:
    """Settle each plant at the market duration price.

    revenue = pi(T) * min_output * T + int pi(m_j(y)) m_j(y) dy over the
    plant's output range; the first term is the base block running the
    whole cycle, priced at the anchor.  Generation cost is the same
    time-domain integral as under spot settlement.
    """
    if sol.clamped:
        raise UnsupportedOperationError(
            "duration settlement is undefined for bound-clamped dispatch"
        )
    costs = dispatch_cost(sol, plants, cfg)
    rows = []
    for p in plants:
        curve = sol.outputs[p.id]
        m = MeasureFunction(curve)
        revenue = price.anchor * curve.min_power * sol.horizon
        if curve.max_power > curve.min_power:
            revenue += lebesgue_integrate(
                m, curve.min_power, curve.max_power, price.price_times_duration, cfg
            )
        energy = riemann_integrate(curve.sample, 0.0, sol.horizon, cfg, breakpoints=curve.times)
        rows.append(_plant_row(p.id, costs.per_plant[p.id], revenue, energy))
    return _assemble("duration", rows)


def value_decomposition(
    sol: DispatchSolution,
    price: SpotPrice | DurationPrice,
    mechanism: str,
    *,
    time_edges: Sequence[float] | None = None,
    band_edges: Sequence[float] | None = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> tuple[ValueSegment, ...]:
    """Partition each plant's energy into commodity segments and value them.

    Under "spot" the segments are time slices (default: between consecutive
    shadow-price breakpoints, or ``time_edges``); a slice's unit value is
    the market unit price of the slice commodity -- total load settlement
    over total load energy -- so same-time segments carry one value across
    plants.  Under "duration" the segments are power bands per plant
    (default: the base block ``[0, min output]`` plus the bands between
    consecutive output breakpoint levels, or ``band_edges``); a band's unit
    value depends only on the band, not on when the energy was produced.
    Segments carrying no energy are omitted.
    """
    rows: list[ValueSegment] = []
    if mechanism == "spot":
        if not isinstance(price, SpotPrice):
            raise ValueError("spot decomposition needs a SpotPrice")
        edges = list(time_edges) if time_edges is not None else list(price.curve.times)
        for t1, t2 in zip(edges, edges[1:]):
            load_energy = riemann_integrate(
                sol.load.sample, t1, t2, cfg, breakpoints=sol.load.times
            )
            if load_energy <= 0.0:
                continue
            unit = unit_energy_price_spot(price, sol.load, t1, t2, cfg)
            for pid, curve in sol.outputs.items():
                energy = riemann_integrate(curve.sample, t1, t2, cfg, breakpoints=curve.times)
                if energy <= 0.0:
                    continue
                rows.append(ValueSegment("spot", pid, float(t1), float(t2), energy, unit))
    elif mechanism == "duration":
        if not isinstance(price, DurationPrice):
            raise ValueError("duration decomposition needs a DurationPrice")
        for pid, curve in sol.outputs.items():
            m = MeasureFunction(curve)
            if band_edges is not None:
                edges = sorted(set(float(y) for y in band_edges))
            else:
                edges = sorted({0.0, *curve.levels})
            for y1, y2 in zip(edges, edges[1:]):
                energy = lebesgue_integrate(m, y1, y2, lambda d: d, cfg)
                if energy <= 0.0:
                    continue
                unit = unit_energy_price_duration(price, m, y1, y2, cfg)
                rows.append(ValueSegment("duration", pid, y1, y2, energy, unit))
    else:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    return tuple(rows)
