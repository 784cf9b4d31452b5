"""Deterministic sample generation: sphere point sets and estimator plans.

All randomness in the package flows through :func:`rng_from_seed`, which
wraps the MT19937 (Mersenne Twister) generator.  The algorithm is named so
that a sampling stream can be reproduced exactly from a seed, independent
of this code base.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAGNITUDE_LADDER",
    "rng_from_seed",
    "unit_sphere_points",
    "SamplingPlan",
]

# Geometric ladder of increment magnitudes used when estimating sup-type
# difference quotients.  Small entries probe the derivative regime, large
# ones the far field.
MAGNITUDE_LADDER = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Seeded MT19937 generator; the single RNG used across the package."""
    return np.random.Generator(np.random.MT19937(int(seed)))


def unit_sphere_points(n: int, count: int) -> np.ndarray:
    """Quasi-uniform points on the unit sphere in R^n, shape (R, n), R >= count.

    n=2 uses equally spaced angles, n=3 the Fibonacci spiral, higher n a
    product-of-angles grid in hyperspherical coordinates.  The sets are
    deterministic and contain no exact poles or repeats.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if n < 2:
        raise ValueError("sphere sampling needs n >= 2")
    if n == 2:
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / count)
        theta = np.pi * (1.0 + np.sqrt(5.0)) * i
        return np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
            axis=1,
        )
    m = int(np.ceil(count ** (1.0 / (n - 1))))
    polar = [(np.arange(m) + 0.5) * np.pi / m for _ in range(n - 2)]
    azimuth = (np.arange(2 * m) + 0.5) * np.pi / m
    grids = np.meshgrid(*polar, azimuth, indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=1)  # (R, n-1)
    pts = np.empty((angles.shape[0], n))
    sin_running = np.ones(angles.shape[0])
    for k in range(n - 1):
        pts[:, k] = sin_running * np.cos(angles[:, k])
        sin_running = sin_running * np.sin(angles[:, k])
    pts[:, n - 1] = sin_running
    return pts


def _coordinate_matrices(N: int, n: int) -> np.ndarray:
    """All matrices with a single unit entry, shape (N*n, N, n)."""
    eye = np.eye(N * n)
    return eye.reshape(N * n, N, n)


@dataclass(frozen=True)
class SamplingPlan:
    """Recipe for the (x, P, Q) triples fed to sup-type estimators.

    x points are a uniform grid over the fundamental cell [0, x_box)^n
    (always including the origin).  P anchors combine the origin,
    coordinate matrices scaled to trigonometric half-periods, and random
    draws.  Q increments combine signed coordinate directions, the
    anchor tensor's strongest direction, optional extra directions, and
    random draws, each swept through the magnitude ladder.

    Random P, Q, and any future categories use separate child seeds so
    that enlarging one count extends its stream without moving any other;
    estimates are therefore monotone under sample enrichment.
    """

    x_per_axis: int = 2
    random_p: int = 4
    random_q: int = 8
    q_scales: tuple = MAGNITUDE_LADDER
    seed: int = 0
    include_axis_directions: bool = True
    include_anchor_extreme: bool = True
    structured_p_scales: tuple = (0.5 * np.pi, np.pi)
    extra_p: tuple = ()
    extra_q_directions: tuple = ()
    x_box: float = 1.0

    def __post_init__(self):
        if self.x_per_axis < 1 or self.random_p < 0 or self.random_q < 0:
            raise ValueError("sample counts must be nonnegative (x_per_axis >= 1)")
        if len(self.q_scales) == 0 or any(s <= 0 for s in self.q_scales):
            raise ValueError("q_scales must be positive")

    def x_points(self, n: int) -> np.ndarray:
        """Grid sample of the fundamental cell, shape (X, n), first row 0."""
        axis = self.x_box * np.arange(self.x_per_axis) / self.x_per_axis
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def p_matrices(self, N: int, n: int) -> np.ndarray:
        """Base-point matrices P, shape (P, N, n); always starts with 0."""
        parts = [np.zeros((1, N, n))]
        coords = _coordinate_matrices(N, n)
        for s in self.structured_p_scales:
            parts.append(s * coords)
            parts.append(-s * coords)
        for extra in self.extra_p:
            parts.append(np.asarray(extra, dtype=float).reshape(1, N, n))
        if self.random_p:
            rng = rng_from_seed(self.seed * 5 + 1)
            parts.append(rng.normal(size=(self.random_p, N, n)))
        return np.concatenate(parts, axis=0)

    def q_directions(self, N: int, n: int, anchor=None) -> np.ndarray:
        """Unit-Frobenius increment directions, shape (D, N, n)."""
        parts = []
        if self.include_axis_directions:
            coords = _coordinate_matrices(N, n)
            parts.append(coords)
            parts.append(-coords)
        if self.include_anchor_extreme and anchor is not None:
            _, _, vh = np.linalg.svd(anchor.flattened())
            parts.append(vh[0].reshape(1, N, n))
        for extra in self.extra_q_directions:
            d = np.asarray(extra, dtype=float).reshape(1, N, n)
            parts.append(d / np.linalg.norm(d))
        if self.random_q:
            rng = rng_from_seed(self.seed * 5 + 2)
            raw = rng.normal(size=(self.random_q, N, n))
            parts.append(raw)
        if not parts:
            raise ValueError("sampling plan produced no Q directions")
        dirs = np.concatenate(parts, axis=0)
        norms = np.linalg.norm(dirs.reshape(len(dirs), -1), axis=1)
        keep = norms > 1e-300
        return dirs[keep] / norms[keep, None, None]
