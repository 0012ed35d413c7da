"""Shared fixtures and helpers for the gammaconv test suite."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from gammaconv import ConvolutionSpec


def rel_err(got: float, want: float, floor: float = 1e-300) -> float:
    return abs(got - want) / max(abs(want), floor)


def random_spec(rng: random.Random, n: int, shape_hi: float = 8.0) -> ConvolutionSpec:
    comps = []
    scales: set[float] = set()
    for _ in range(n):
        b = math.exp(rng.uniform(-1.5, 1.6))
        while b in scales:
            b *= 1.0 + 1e-6
        scales.add(b)
        comps.append((rng.uniform(0.2, shape_hi), b))
    return ConvolutionSpec.of(*comps)


@pytest.fixture(scope="session")
def seeded_random():
    return random.Random(20260826)


def grid_between(lo: float, hi: float, points: int) -> np.ndarray:
    return np.linspace(lo, hi, points)
