"""Shared fixtures and random-instance generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from ctmarket import (
    LoadCurve,
    Plant,
    QuadraticCost,
    builtin_case_study,
    solve_equilibrium,
)


@pytest.fixture(scope="session")
def case_study():
    return builtin_case_study()


@pytest.fixture(scope="session")
def case_plants(case_study):
    return case_study.plant_objects()


@pytest.fixture(scope="session")
def case_load(case_study):
    return case_study.load_curve()


@pytest.fixture(scope="session")
def case_solution(case_plants, case_load):
    return solve_equilibrium(case_plants, case_load)


# ----------------------------------------------------------------------
# Random instances (seeded by the caller)
# ----------------------------------------------------------------------


def random_plants(rng: np.random.Generator, n: int | None = None) -> list[Plant]:
    n = int(rng.integers(1, 6)) if n is None else n
    return [
        Plant(
            id=f"g{j}",
            cost=QuadraticCost(
                q2=float(10.0 ** rng.uniform(-4.0, -1.3)),
                q1=float(rng.uniform(0.0, 0.5)),
                q0=float(rng.uniform(0.0, 5.0)),
            ),
        )
        for j in range(n)
    ]


def interior_demand_floor(plants: list[Plant]) -> float:
    """Demand above which every plant runs strictly above zero output."""
    denom = sum(1.0 / (2.0 * p.cost.q2) for p in plants)
    offset = sum(p.cost.q1 / (2.0 * p.cost.q2) for p in plants)
    lam_floor = max(p.cost.q1 for p in plants) + 0.05
    return max(lam_floor * denom - offset, 0.0) + 1.0


def random_monotone_load(rng: np.random.Generator, plants: list[Plant]) -> LoadCurve:
    """Non-decreasing load keeping every plant strictly interior."""
    floor = interior_demand_floor(plants)
    T = float(rng.uniform(0.5, 24.0))
    n_seg = int(rng.integers(1, 6))
    interior = np.sort(rng.uniform(0.05 * T, 0.95 * T, size=n_seg - 1))
    times = np.unique(np.concatenate([[0.0], interior, [T]]))
    incs = rng.uniform(0.0, 300.0, size=len(times))
    if len(times) > 2 and rng.random() < 0.4:
        incs[int(rng.integers(1, len(times)))] = 0.0  # an exactly flat piece
    powers = floor + np.cumsum(incs)
    return LoadCurve(zip(times, powers))


def random_wiggly_curve(rng: np.random.Generator) -> LoadCurve:
    """Arbitrary (generally non-monotone) trajectory for rearrangement tests."""
    T = float(rng.uniform(0.5, 10.0))
    n = int(rng.integers(3, 9))
    interior = np.sort(rng.uniform(0.02 * T, 0.98 * T, size=n - 2))
    times = np.unique(np.concatenate([[0.0], interior, [T]]))
    powers = rng.uniform(0.0, 800.0, size=len(times))
    if len(times) > 3 and rng.random() < 0.3:
        i = int(rng.integers(1, len(times) - 1))
        powers[i] = powers[i - 1]  # flat piece
    return LoadCurve(zip(times, powers))


def affine_product_integral(c0, c1, d0, d1, a, b) -> float:
    """Antiderivative oracle for the integral of (c0 + c1 t)(d0 + d1 t)."""
    a0, a1, a2 = c0 * d0, c0 * d1 + c1 * d0, c1 * d1

    def antider(t):
        return a0 * t + a1 * t * t / 2.0 + a2 * t**3 / 3.0

    return antider(b) - antider(a)
