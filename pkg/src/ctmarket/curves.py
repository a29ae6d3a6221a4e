"""Piecewise-linear power trajectories and their level-set geometry.

A :class:`LoadCurve` is a continuous, piecewise-linear power trajectory on a
market cycle ``[0, T]``.  On top of it the module provides the level-set
measure function ``m(y)`` -- the total time the trajectory spends strictly
above power ``y`` -- and the monotone non-decreasing rearrangement, which is
the curve sharing the original's measure function that the load-duration
pricing mechanism operates on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedOperationError

__all__ = ["LoadCurve", "MeasureFunction", "duration_curve"]


def _as_breakpoints(points: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    return tuple((float(t), float(p)) for t, p in points)


@dataclass(frozen=True, init=False)
class LoadCurve:
    """Continuous piecewise-linear trajectory ``P(t)`` on ``[0, T]``.

    Parameters
    ----------
    breakpoints:
        Ordered ``(time_h, power_mw)`` pairs.  Times must be strictly
        increasing and start at exactly 0; the last time defines the horizon
        ``T``.  Powers must be finite and non-negative.  Between breakpoints
        the curve is the linear interpolant, so it is continuous by
        construction.

    Instances are immutable values; they are safe to share between threads.
    """

    breakpoints: tuple[tuple[float, float], ...]
    _times: np.ndarray = field(init=False, repr=False, compare=False)
    _powers: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, breakpoints: Iterable[Sequence[float]]) -> None:
        pts = _as_breakpoints(breakpoints)
        if len(pts) < 2:
            raise ValueError("a curve needs at least 2 breakpoints")
        times = np.array([t for t, _ in pts], dtype=float)
        powers = np.array([p for _, p in pts], dtype=float)
        if times[0] != 0.0:
            raise ValueError(f"first breakpoint time must be 0, got {times[0]!r}")
        if not np.all(np.diff(times) > 0.0):
            raise ValueError("breakpoint times must be strictly increasing")
        if not np.all(np.isfinite(powers)):
            raise ValueError("power values must be finite")
        if np.any(powers < 0.0):
            raise ValueError("power values must be non-negative")
        times.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "_times", times)
        object.__setattr__(self, "_powers", powers)

    # ------------------------------------------------------------------
    # Basic geometry
    # ------------------------------------------------------------------

    @property
    def horizon(self) -> float:
        """Length ``T`` of the market cycle in hours."""
        return self.breakpoints[-1][0]

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def powers(self) -> np.ndarray:
        return self._powers

    @property
    def min_power(self) -> float:
        return float(self._powers.min())

    @property
    def max_power(self) -> float:
        return float(self._powers.max())

    @property
    def levels(self) -> tuple[float, ...]:
        """Distinct breakpoint power levels, ascending."""
        return tuple(np.unique(self._powers))

    @property
    def is_non_decreasing(self) -> bool:
        return bool(np.all(np.diff(self._powers) >= 0.0))

    @property
    def is_strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self._powers) > 0.0))

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _check_domain(self, ts: np.ndarray) -> None:
        tol = 1e-12 * max(self.horizon, 1.0)
        if np.any(ts < -tol) or np.any(ts > self.horizon + tol):
            bad = ts[(ts < -tol) | (ts > self.horizon + tol)]
            raise DomainError(
                f"time {float(np.atleast_1d(bad)[0])!r} outside [0, {self.horizon!r}]"
            )

    def evaluate(self, t: float) -> float:
        """Power at time ``t``: linear interpolation, exact at breakpoints."""
        arr = np.asarray(float(t))
        self._check_domain(arr)
        return float(np.interp(arr, self._times, self._powers))

    def sample(self, ts) -> np.ndarray:
        """Vectorised :meth:`evaluate` over an array of times."""
        arr = np.asarray(ts, dtype=float)
        self._check_domain(arr)
        return np.interp(arr, self._times, self._powers)

    # ------------------------------------------------------------------
    # Level sets
    # ------------------------------------------------------------------

    def measure_of(self, y: float) -> float:
        """Total length of the strict superlevel set ``{t : P(t) > y}``.

        Computed exactly segment by segment.  A flat segment lying exactly
        at level ``y`` contributes zero (strict inequality), which makes the
        measure right-continuous in ``y`` with a downward jump at every
        level carrying a flat segment.
        """
        y = float(y)
        total = 0.0
        for (t0, p0), (t1, p1) in zip(self.breakpoints, self.breakpoints[1:]):
            dt = t1 - t0
            if p0 == p1:
                if p0 > y:
                    total += dt
            else:
                lo, hi = (p0, p1) if p0 < p1 else (p1, p0)
                frac = (hi - y) / (hi - lo)
                total += dt * min(max(frac, 0.0), 1.0)
        return total

    def flat_duration(self, y: float) -> float:
        """Total length of segments sitting exactly flat at level ``y``."""
        y = float(y)
        return sum(
            t1 - t0
            for (t0, p0), (t1, p1) in zip(self.breakpoints, self.breakpoints[1:])
            if p0 == p1 == y
        )

    def inverse(self, y: float) -> float:
        """The unique ``t`` with ``P(t) == y`` for a strictly increasing curve."""
        if not self.is_strictly_increasing:
            raise UnsupportedOperationError(
                "inverse requires a strictly increasing curve; "
                "rearrange with duration_curve() first"
            )
        y = float(y)
        if y < self._powers[0] or y > self._powers[-1]:
            raise DomainError(
                f"level {y!r} outside output range "
                f"[{self._powers[0]!r}, {self._powers[-1]!r}]"
            )
        k = int(np.searchsorted(self._powers, y, side="left"))
        if k == 0:
            return float(self._times[0])
        t0, p0 = self.breakpoints[k - 1]
        t1, p1 = self.breakpoints[k]
        return t0 + (y - p0) * (t1 - t0) / (p1 - p0)


@dataclass(frozen=True)
class MeasureFunction:
    """Level-set measure ``m(y)`` of a trajectory.

    ``m(y)`` is the time the trajectory spends strictly above power ``y``.
    It is non-increasing, equals the horizon for ``y`` below the trajectory
    minimum, 0 above its maximum, and is right-continuous with a downward
    jump at every level carrying a flat segment.  ``levels`` lists the
    breakpoint levels of the underlying curve; between consecutive levels
    ``m`` is affine, which the quadrature engine exploits for exactness.
    """

    curve: LoadCurve

    @property
    def y_lo(self) -> float:
        return self.curve.min_power

    @property
    def y_hi(self) -> float:
        return self.curve.max_power

    @property
    def horizon(self) -> float:
        return self.curve.horizon

    @property
    def levels(self) -> tuple[float, ...]:
        return self.curve.levels

    def __call__(self, y: float) -> float:
        return self.curve.measure_of(y)

    def sample(self, ys) -> np.ndarray:
        """Vectorised ``m`` over an array of levels."""
        ys = np.asarray(ys, dtype=float)
        total = np.zeros_like(ys)
        for (t0, p0), (t1, p1) in zip(self.curve.breakpoints, self.curve.breakpoints[1:]):
            dt = t1 - t0
            if p0 == p1:
                total += np.where(ys < p0, dt, 0.0)
            else:
                lo, hi = (p0, p1) if p0 < p1 else (p1, p0)
                total += dt * np.clip((hi - ys) / (hi - lo), 0.0, 1.0)
        return total

    def limit_from_below(self, y: float) -> float:
        """Left limit ``m(y^-)``: the strict measure plus flat time exactly at ``y``."""
        return self.curve.measure_of(y) + self.curve.flat_duration(y)


def _merge_collinear(pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = [pts[0]]
    for nxt in pts[1:]:
        if len(out) >= 2:
            (t0, p0), (t1, p1) = out[-2], out[-1]
            t2, p2 = nxt
            if (p1 - p0) * (t2 - t1) == (p2 - p1) * (t1 - t0):
                out[-1] = nxt
                continue
        out.append(nxt)
    return out


def duration_curve(curve: LoadCurve) -> LoadCurve:
    """Monotone non-decreasing rearrangement sharing the input's measure function.

    The result ``Q`` is the unique non-decreasing curve on ``[0, T]`` with
    ``Q.measure_of(y) == curve.measure_of(y)`` for every level ``y``; energy
    is preserved as a consequence.  A non-decreasing input comes back
    unchanged up to merging of collinear breakpoints.

    Construction is analytic, not sampled: for each distinct breakpoint
    level ``y`` the strict measure ``m`` and the flat time ``d`` pin the
    piece of ``Q`` carrying that level to ``[T - m - d, T - m]``; between
    consecutive levels the measure is affine, so ``Q`` is linear there.
    """
    T = curve.horizon
    raw: list[tuple[float, float]] = []
    for y in curve.levels:
        m = curve.measure_of(y)
        d = curve.flat_duration(y)
        raw.append((min(max(T - m - d, 0.0), T), y))
        if d > 0.0:
            raw.append((min(max(T - m, 0.0), T), y))
    # Mathematically the first point is (0, min level) and the last (T, max
    # level); snap float drift from the measure sums.
    raw[0] = (0.0, raw[0][1])
    raw[-1] = (T, raw[-1][1])
    pts = [raw[0]]
    tol = 1e-15 * max(T, 1.0)
    for t, y in raw[1:]:
        if t <= pts[-1][0] + tol:
            continue
        pts.append((t, y))
    if pts[-1][0] != T:
        pts.append((T, curve.max_power))
    return LoadCurve(_merge_collinear(pts))
