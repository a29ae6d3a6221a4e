"""Continuous-time equal-marginal-cost dispatch.

The welfare problem reduces to generation-cost minimization subject to the
instantaneous power balance; its first-order conditions equalize marginal
costs across interior plants, giving the affine map

    lam(t) = (P_d(t) + sum_j q1_j/(2 q2_j)) / (sum_j 1/(2 q2_j))
    P_j(t) = (lam(t) - q1_j) / (2 q2_j)

so a piecewise-linear load yields a piecewise-linear shadow price and
piecewise-linear plant outputs sharing the load's breakpoint times.

Capacity bounds are validated after the fact.  The default refuses with the
violating plant, time interval and bound; the opt-in clamped mode computes
the exact active-set dispatch instead, subdividing time at the shadow-price
levels where a plant enters or leaves a bound.  A clamped solution supports
spot settlement only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .cost import QuadraticCost
from .curves import LoadCurve
from .errors import InfeasibleDispatchError, UnsupportedOperationError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, riemann_integrate

__all__ = [
    "Plant",
    "ClampEvent",
    "DispatchSolution",
    "DispatchCost",
    "solve_equilibrium",
    "dispatch_cost",
]

_INF = float("inf")


@dataclass(frozen=True)
class Plant:
    """A generating unit: quadratic cost plus optional time-constant bounds."""

    id: str
    cost: QuadraticCost
    p_min: float = 0.0
    p_max: float | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("plant id must be a non-empty string")
        if not math.isfinite(self.p_min) or self.p_min < 0.0:
            raise ValueError(f"p_min must be finite and >= 0, got {self.p_min!r}")
        if self.p_max is not None:
            if not math.isfinite(self.p_max) or self.p_max < self.p_min:
                raise ValueError(
                    f"p_max must be finite and >= p_min, got {self.p_max!r}"
                )

    @property
    def p_max_or_inf(self) -> float:
        return _INF if self.p_max is None else self.p_max


class ClampEvent(NamedTuple):
    plant: str
    start: float
    end: float
    kind: str  # "p_min" | "p_max"
    bound: float


@dataclass(frozen=True)
class DispatchSolution:
    """Equilibrium dispatch: shadow-price curve plus per-plant trajectories.

    ``outputs`` maps plant id to its trajectory; all curves share the
    horizon.  ``clamped`` marks solutions where a capacity bound is active
    on an interval (``clamp_events`` lists them); duration pricing refuses
    such solutions.
    """

    lambda_curve: LoadCurve
    outputs: Mapping[str, LoadCurve]
    load: LoadCurve
    horizon: float
    clamped: bool = False
    clamp_events: tuple[ClampEvent, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "outputs", MappingProxyType(dict(self.outputs)))


class DispatchCost(NamedTuple):
    per_plant: dict[str, float]
    total: float


def _check_plants(plants: Sequence[Plant]) -> None:
    if not plants:
        raise ValueError("at least one plant is required")
    ids = [p.id for p in plants]
    if len(set(ids)) != len(ids):
        raise ValueError("plant ids must be unique")


def _violation_intervals(
    times: np.ndarray, values: np.ndarray, bound: float, below: bool
) -> list[tuple[float, float]]:
    """Maximal intervals where the piecewise-linear (times, values) path
    crosses strictly past ``bound`` (below it if ``below`` else above)."""
    gap = bound - values if below else values - bound
    tol = 1e-9 * max(1.0, abs(bound))
    if not np.any(gap > tol):
        return []
    intervals: list[tuple[float, float]] = []
    start: float | None = None
    for i in range(len(times) - 1):
        g0, g1 = gap[i], gap[i + 1]
        t0, t1 = times[i], times[i + 1]
        if start is None and g0 <= 0.0 < g1:
            start = t0 + (0.0 - g0) * (t1 - t0) / (g1 - g0)
        if start is None and g0 > 0.0:
            start = t0
        if start is not None and g0 > 0.0 >= g1:
            end = t0 + (0.0 - g0) * (t1 - t0) / (g1 - g0)
            intervals.append((start, end))
            start = None
    if start is not None:
        intervals.append((start, float(times[-1])))
    return intervals


def solve_equilibrium(
    plants: Sequence[Plant], load: LoadCurve, *, allow_clamp: bool = False
) -> DispatchSolution:
    """Solve the equal-marginal-cost equilibrium against ``load``.

    Returns the shadow price lam(t) and every plant trajectory as exact
    piecewise-linear curves.  If the unconstrained solution violates a
    capacity bound anywhere, the default raises
    :class:`InfeasibleDispatchError` naming the plant, the first violating
    time interval and the bound; with ``allow_clamp=True`` the exact
    active-set solution is returned instead, marked ``clamped``.
    """
    plants = list(plants)
    _check_plants(plants)
    inv2a = np.array([1.0 / (2.0 * p.cost.q2) for p in plants])
    q1 = np.array([p.cost.q1 for p in plants])
    denom = float(inv2a.sum())
    offset = float((q1 * inv2a).sum())

    times = load.times
    lam = (load.powers + offset) / denom
    outputs = {p.id: (lam - p.cost.q1) * inv2a[j] for j, p in enumerate(plants)}

    violations: list[tuple[float, float, Plant, str, float]] = []
    for p in plants:
        vals = outputs[p.id]
        for s, e in _violation_intervals(times, vals, p.p_min, below=True):
            violations.append((s, e, p, "p_min", p.p_min))
        if p.p_max is not None:
            for s, e in _violation_intervals(times, vals, p.p_max, below=False):
                violations.append((s, e, p, "p_max", p.p_max))

    if not violations:
        return DispatchSolution(
            lambda_curve=LoadCurve(zip(times, lam)),
            outputs={pid: LoadCurve(zip(times, vals)) for pid, vals in outputs.items()},
            load=load,
            horizon=load.horizon,
        )

    if not allow_clamp:
        s, e, plant, kind, bound = min(violations, key=lambda v: v[0])
        side = "below p_min" if kind == "p_min" else "above p_max"
        raise InfeasibleDispatchError(
            f"unconstrained dispatch puts plant {plant.id!r} {side} = {bound:.6g} MW "
            f"on t in [{s:.6g}, {e:.6g}] h; enable clamped dispatch to proceed "
            f"(spot settlement only)",
            plant=plant.id,
            interval=(s, e),
            bound=bound,
            kind=kind,
        )

    return _solve_clamped(plants, load)


# ----------------------------------------------------------------------
# Clamped (active-set) dispatch
# ----------------------------------------------------------------------


def _clipped_outputs(plants: Sequence[Plant], lam: float) -> np.ndarray:
    out = np.empty(len(plants))
    for j, p in enumerate(plants):
        raw = (lam - p.cost.q1) / (2.0 * p.cost.q2)
        out[j] = min(max(raw, p.p_min), p.p_max_or_inf)
    return out


def _supply(plants: Sequence[Plant], lam: float) -> float:
    return float(_clipped_outputs(plants, lam).sum())


def _thresholds(plants: Sequence[Plant]) -> list[float]:
    vals = set()
    for p in plants:
        vals.add(p.cost.marginal(p.p_min))
        if p.p_max is not None:
            vals.add(p.cost.marginal(p.p_max))
    return sorted(vals)


def _lambda_for_demand(plants: Sequence[Plant], demand: float, thr: list[float]) -> float:
    """Smallest lam with total clipped supply equal to ``demand``."""
    p_min_sum = sum(p.p_min for p in plants)
    p_max_sum = sum(p.p_max_or_inf for p in plants)
    tol = 1e-9 * max(1.0, abs(demand))
    if demand < p_min_sum - tol or demand > p_max_sum + tol:
        raise InfeasibleDispatchError(
            f"demand {demand:.6g} MW outside the feasible range "
            f"[{p_min_sum:.6g}, {p_max_sum:.6g}] MW",
            kind="capacity",
        )
    supplies = [_supply(plants, v) for v in thr]
    if demand <= supplies[0]:
        return thr[0]
    if demand >= supplies[-1]:
        active = [p for p in plants if p.p_max is None]
        fixed = sum(p.p_max_or_inf for p in plants if p.p_max is not None)
        den = sum(1.0 / (2.0 * p.cost.q2) for p in active)
        if den == 0.0:
            return thr[-1]
        num = demand - fixed + sum(p.cost.q1 / (2.0 * p.cost.q2) for p in active)
        return max(num / den, thr[-1])
    k = int(np.searchsorted(supplies, demand, side="left"))
    v_lo, v_hi = thr[k - 1], thr[k]
    active, fixed, den, num = [], 0.0, 0.0, 0.0
    for p in plants:
        lo_thr = p.cost.marginal(p.p_min)
        hi_thr = _INF if p.p_max is None else p.cost.marginal(p.p_max)
        if hi_thr <= v_lo:
            fixed += p.p_max_or_inf
        elif lo_thr >= v_hi:
            fixed += p.p_min
        else:
            active.append(p)
            den += 1.0 / (2.0 * p.cost.q2)
            num += p.cost.q1 / (2.0 * p.cost.q2)
    if den == 0.0:
        # Supply plateau: demand equals the constant supply on this bracket.
        return v_lo
    lam = (demand - fixed + num) / den
    return min(max(lam, v_lo), v_hi)


def _solve_clamped(plants: Sequence[Plant], load: LoadCurve) -> DispatchSolution:
    thr = _thresholds(plants)
    T = load.horizon
    t_tol = 1e-14 * max(T, 1.0)
    knots: list[tuple[float, float]] = []

    def push(t: float, lam: float) -> None:
        if knots and t <= knots[-1][0] + t_tol:
            if abs(lam - knots[-1][1]) > 1e-9 * max(1.0, abs(lam)):
                raise UnsupportedOperationError(
                    "shadow price jumps across a merit-order gap (supply "
                    "plateau); clamped dispatch cannot represent this load"
                )
            return
        knots.append((t, lam))

    for i in range(len(load.times) - 1):
        t0, t1 = float(load.times[i]), float(load.times[i + 1])
        d0, d1 = float(load.powers[i]), float(load.powers[i + 1])
        lam0 = _lambda_for_demand(plants, d0, thr)
        lam1 = _lambda_for_demand(plants, d1, thr)
        if not knots:
            knots.append((t0, lam0))
        if lam1 > lam0:
            crossings = [v for v in thr if lam0 < v < lam1]
        else:
            crossings = [v for v in reversed(thr) if lam1 < v < lam0]
        prev_supply = None
        for v in crossings:
            dv = _supply(plants, v)
            if prev_supply is not None and dv == prev_supply:
                raise UnsupportedOperationError(
                    "shadow price jumps across a merit-order gap (supply "
                    "plateau); clamped dispatch cannot represent this load"
                )
            prev_supply = dv
            tv = t0 + (dv - d0) * (t1 - t0) / (d1 - d0)
            push(tv, v)
        push(t1, lam1)

    times = np.array([t for t, _ in knots])
    lam_vals = np.array([v for _, v in knots])
    out_vals = {p.id: np.empty(len(knots)) for p in plants}
    for k, (_, lam) in enumerate(knots):
        clipped = _clipped_outputs(plants, lam)
        for j, p in enumerate(plants):
            out_vals[p.id][k] = clipped[j]

    events: list[ClampEvent] = []
    for p in plants:
        vals = out_vals[p.id]
        for kind, bound in (("p_min", p.p_min), ("p_max", p.p_max)):
            if bound is None:
                continue
            at = np.abs(vals - bound) <= 1e-9 * max(1.0, abs(bound))
            start = None
            for k in range(len(times) - 1):
                if at[k] and at[k + 1]:
                    if start is None:
                        start = float(times[k])
                    end = float(times[k + 1])
                elif start is not None:
                    events.append(ClampEvent(p.id, start, end, kind, bound))
                    start = None
            if start is not None:
                events.append(ClampEvent(p.id, start, end, kind, bound))

    return DispatchSolution(
        lambda_curve=LoadCurve(zip(times, lam_vals)),
        outputs={pid: LoadCurve(zip(times, vals)) for pid, vals in out_vals.items()},
        load=load,
        horizon=T,
        clamped=bool(events),
        clamp_events=tuple(events),
    )


def dispatch_cost(
    sol: DispatchSolution,
    plants: Sequence[Plant],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> DispatchCost:
    """Per-plant generation cost over the cycle plus the market total.

    Integrates each plant's quadratic cost along its trajectory; with panel
    edges snapped to the trajectory breakpoints the integrand is piecewise
    quadratic, so the default Simpson rule is exact to round-off.
    """
    per: dict[str, float] = {}
    for p in plants:
        curve = sol.outputs[p.id]
        per[p.id] = riemann_integrate(
            lambda ts, c=p.cost, k=curve: c.cost(k.sample(ts)),
            0.0,
            sol.horizon,
            cfg,
            breakpoints=curve.times,
        )
    return DispatchCost(per, math.fsum(per.values()))
