"""Verified sphere covers and the discretized singlet-measurement box.

Covers are built from a Fibonacci spiral lattice and then *audited*: a
deterministic latitude/longitude probe grid is checked against the cover,
and each probe's nearest-cover distance plus an analytic bound on its grid
cell's half-diagonal gives a sound upper bound on the true covering radius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .boxes import CorrelationBox, JointDistribution
from .quantum import (SINGLET, bloch_of, random_unitary, simple_bell_spec,
                      singlet_measure_box, unitary_for_point, KET1)

# empirical certified-radius constant of the audited Fibonacci lattice,
# certified_radius ~= RADIUS_FIT / sqrt(T); retuned if the audit ever fails
RADIUS_FIT = 2.95
T_SCALING_CAP = 10.0  # T <= T_SCALING_CAP / epsilon^2


def fibonacci_points(n: int) -> np.ndarray:
    """Offset Fibonacci spiral lattice, n quasi-uniform points on the sphere."""
    idx = np.arange(n, dtype=np.float64) + 0.5
    z = 1.0 - 2.0 * idx / n
    theta = 2.0 * np.pi * idx / ((1.0 + np.sqrt(5.0)) / 2.0)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def audit_cover(points: np.ndarray, n_probes: int) -> float:
    """Sound upper bound on the covering radius of a point set.

    Probes form a theta/phi grid of about ``n_probes`` cell centers.  Any
    sphere point s lies in some cell, so d(s, cover) <= d(probe, cover) +
    d(s, probe), and d(s, probe) is at most the cell's half-diagonal chord,
    bounded through the geodesic metric ds^2 = dtheta^2 + sin^2(theta) dphi^2.
    """
    points = np.asarray(points, dtype=np.float64)
    n_theta = max(4, int(np.ceil(np.sqrt(n_probes / 2.0))))
    n_phi = 2 * n_theta
    d_theta = np.pi / n_theta
    d_phi = 2.0 * np.pi / n_phi
    tree = cKDTree(points)
    certified = 0.0
    thetas = (np.arange(n_theta) + 0.5) * d_theta
    phis = (np.arange(n_phi) + 0.5) * d_phi
    cos_p, sin_p = np.cos(phis), np.sin(phis)
    for i, theta in enumerate(thetas):
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        probes = np.column_stack([sin_t * cos_p, sin_t * sin_p,
                                  np.full(n_phi, cos_t)])
        dists, _ = tree.query(probes)
        # max sin over the cell's theta range bounds the azimuthal arc length
        sin_max = max(np.sin(theta - d_theta / 2.0), np.sin(theta + d_theta / 2.0))
        if theta - d_theta / 2.0 < np.pi / 2.0 < theta + d_theta / 2.0:
            sin_max = 1.0
        cell_bound = 0.5 * np.hypot(d_theta, sin_max * d_phi)
        certified = max(certified, float(dists.max()) + cell_bound)
    return certified


@dataclass(frozen=True)
class SphereCover:
    """T unit vectors with an audited covering radius."""

    points: np.ndarray      # shape (T, 3)
    covering_radius: float

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 4:
            raise ValueError("cover needs at least 4 points in R^3")
        norms = np.linalg.norm(points, axis=1)
        if np.abs(norms - 1.0).max() > 1e-10:
            raise ValueError("cover points must be unit vectors")
        points = points.copy()
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def nearest(self, c: np.ndarray) -> int:
        """Index of the closest cover point; ties go to the smallest index."""
        d2 = ((self.points - np.asarray(c, dtype=np.float64)) ** 2).sum(axis=1)
        return int(np.argmin(d2))


def build_cover(epsilon: float, probes_per_point: int = 100,
                max_retries: int = 3) -> SphereCover:
    """Audited cover with covering_radius <= epsilon and T <= 10 / epsilon^2."""
    if not 0.0 < epsilon <= 2.0:
        raise ValueError("epsilon must lie in (0, 2]")
    t = max(4, int(np.ceil((RADIUS_FIT / epsilon) ** 2)))
    for _ in range(max_retries + 1):
        points = fibonacci_points(t)
        certified = audit_cover(points, probes_per_point * t)
        if certified <= epsilon:
            return SphereCover(points, certified)
        t = int(np.ceil(t * 1.3))
    raise ValueError("audit failed to certify radius %g after retries" % epsilon)


def octahedron_cover() -> SphereCover:
    """The six octahedron vertices, with an audited radius."""
    points = np.vstack([np.eye(3), -np.eye(3)])
    return SphereCover(points, audit_cover(points, 20000))


def discretized_box(cover: SphereCover) -> CorrelationBox:
    """Box on [T] x [T] with Pr[a = b | i, j] = 1/2 - (c_i . c_j) / 2."""
    dots = cover.points @ cover.points.T
    t = cover.size
    table = np.empty((t, t, 2, 2))
    table[:, :, 0, 0] = table[:, :, 1, 1] = 0.25 - 0.25 * dots
    table[:, :, 0, 1] = table[:, :, 1, 0] = 0.25 + 0.25 * dots
    return CorrelationBox(table)


def cover_bell_spec(cover: SphereCover):
    """BELL spec reproducing discretized_box by measuring the singlet."""
    us = [unitary_for_point(c) for c in cover.points]
    return simple_bell_spec(us, us)


def reduce_measurement(u: np.ndarray, v: np.ndarray,
                       cover: SphereCover) -> tuple[int, int]:
    """Nearest cover indices for the Bloch points of U^-1|1> and V^-1|1>."""
    i = cover.nearest(bloch_of(np.linalg.inv(u) @ KET1))
    j = cover.nearest(bloch_of(np.linalg.inv(v) @ KET1))
    return i, j


def verify_reduction(cover: SphereCover, trials: int,
                     seed: int = 0) -> tuple[float, float]:
    """Exact TV error of the 1-query nearest-point reduction on Haar pairs.

    Per-trial generators derive deterministically from the master seed, so
    trials are order-independent and parallelizable.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    box = discretized_box(cover)
    tvs = np.empty(trials)
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        u = random_unitary(rng)
        v = random_unitary(rng)
        i, j = reduce_measurement(u, v, cover)
        exact = singlet_measure_box(u, v)
        approx = JointDistribution(box.table[i, j])
        tvs[trial] = exact.tv(approx)
    return float(tvs.max()), float(tvs.mean())


def cover_to_json(cover: SphereCover, audit_probes: int | None = None) -> str:
    payload = {
        "points": cover.points.tolist(),
        "covering_radius": cover.covering_radius,
        "audit": {"probes": audit_probes} if audit_probes else {},
    }
    return json.dumps(payload)


def cover_from_json(text: str) -> SphereCover:
    payload = json.loads(text)
    return SphereCover(np.asarray(payload["points"], dtype=np.float64),
                       float(payload["covering_radius"]))
