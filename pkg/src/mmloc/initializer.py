"""Starting-point selection by grid search along one measurement hyperbola.

A range-difference measurement r_ij constrains the source to one branch
of a hyperbola with foci y_i and y_j (the branch nearer y_j, because the
stored value ||x - y_i|| - ||x - y_j|| = r_ij is nonnegative).  One stored
pair is chosen uniformly at random, l points are placed along that branch
uniformly in the hyperbolic angle, clipped to a bounding box, and the
point with the smallest range-difference cost is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMeasurementError, RayMeasurementError
from .objective import f_rdls_many
from .scenario import RangeDiffSet, as_position, sensor_coords


@dataclass(frozen=True)
class InitConfig:
    grid_size: int = 128       # points evaluated along the chosen hyperbola
    coord_bound: float | None = None  # search box half-width [m]; default 2*max|coord|
    seed: int | None = None

    def __post_init__(self):
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if self.coord_bound is not None and not self.coord_bound > 0:
            raise ValueError("coord_bound must be > 0")


def hyperbola_points(y_i, y_j, r_ij: float, l: int, coord_bound: float) -> np.ndarray:
    """l points on the branch where ||x - y_i|| - ||x - y_j|| = r_ij (n=2 only).

    Canonical form: semi-transverse a = r_ij/2, focal half-distance
    c = ||y_i - y_j||/2, b^2 = c^2 - a^2, parameterized as
    center + a*cosh(t)*u + b*sinh(t)*p with u the unit vector from y_i to
    y_j and p perpendicular to it.  r_ij = 0 degenerates to the
    perpendicular bisector.  The angle t is sampled uniformly over the
    largest interval keeping every point inside ||x||_inf <= coord_bound.
    """
    yi = as_position(y_i)
    yj = as_position(y_j)
    if yi.size != 2 or yj.size != 2:
        raise ValueError("hyperbola sampling is 2-D only")
    if not (l >= 2):
        raise ValueError("l must be >= 2")
    if not coord_bound > 0:
        raise ValueError("coord_bound must be > 0")
    if r_ij < 0:
        raise ValueError("r_ij must be >= 0")
    foc = float(np.linalg.norm(yj - yi))
    if r_ij == foc:
        raise RayMeasurementError(
            f"range difference {r_ij} equals the focal distance; the locus is a ray"
        )
    if r_ij > foc:
        raise DegenerateMeasurementError(
            f"range difference {r_ij} exceeds the focal distance {foc}"
        )
    a = r_ij / 2.0
    c = foc / 2.0
    b = math.sqrt(c * c - a * a)
    center = (yi + yj) / 2.0
    u = (yj - yi) / foc
    p = np.array([-u[1], u[0]])

    def point(t: float) -> np.ndarray:
        return center + a * math.cosh(t) * u + b * math.sinh(t) * p

    if np.max(np.abs(point(0.0))) > coord_bound:
        raise ValueError("hyperbola vertex lies outside the search box; "
                         "increase coord_bound")

    def reach(sign: float) -> float:
        # largest |t| in the given direction with the point still in the box;
        # cosh grows fast, so cap the doubling phase well before overflow
        t = 1.0
        if np.max(np.abs(point(sign * t))) > coord_bound:
            lo, hi = 0.0, t
        else:
            while np.max(np.abs(point(sign * t))) <= coord_bound and t < 512.0:
                t *= 2.0
            lo, hi = t / 2.0, t
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if np.max(np.abs(point(sign * mid))) <= coord_bound:
                lo = mid
            else:
                hi = mid
        return lo

    ts = np.linspace(-reach(-1.0), reach(+1.0), l)
    return (center[None, :]
            + a * np.cosh(ts)[:, None] * u[None, :]
            + b * np.sinh(ts)[:, None] * p[None, :])


def _grid_fallback(coords: np.ndarray, rd: RangeDiffSet, l: int,
                   bound: float) -> np.ndarray:
    """Coarse mesh argmin over the box, used when no pair gives a hyperbola
    and for 3-D problems (the hyperbola scheme is planar)."""
    n = coords.shape[1]
    side = max(2, int(round(l ** (1.0 / n))))
    axes = [np.linspace(-bound, bound, side)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    vals = f_rdls_many(pts, coords, rd)
    return pts[int(np.argmin(vals))]


def init_point(array, rd: RangeDiffSet, cfg: InitConfig | None = None) -> np.ndarray:
    """Pick a starting point for the range-difference solver.

    Chooses one stored pair uniformly at random (seeded), samples
    cfg.grid_size points on its hyperbola, and returns the sample with
    the lowest f_rdls.  Pairs whose value is geometrically infeasible
    (>= the sensor separation, which noise can produce) are excluded from
    the draw; if none remain, or for n=3, a coarse grid over the box is
    searched instead.
    """
    cfg = cfg or InitConfig()
    coords = sensor_coords(array)
    if rd.m != coords.shape[0]:
        raise ValueError(f"measurement set indexes {rd.m} sensors, array has {coords.shape[0]}")
    bound = cfg.coord_bound
    if bound is None:
        bound = 2.0 * float(np.max(np.abs(coords)))
        if bound <= 0:
            bound = 1.0
    if coords.shape[1] != 2:
        return _grid_fallback(coords, rd, cfg.grid_size, bound)
    feasible = [
        (i, j, v) for (i, j, v) in rd.entries()
        if v < np.linalg.norm(coords[i - 1] - coords[j - 1])
    ]
    if not feasible:
        return _grid_fallback(coords, rd, cfg.grid_size, bound)
    rng = np.random.default_rng(cfg.seed)
    i, j, v = feasible[int(rng.integers(len(feasible)))]
    try:
        pts = hyperbola_points(coords[i - 1], coords[j - 1], v, cfg.grid_size, bound)
    except ValueError:
        # a tight user-supplied box can exclude the branch vertex entirely
        return _grid_fallback(coords, rd, cfg.grid_size, bound)
    vals = f_rdls_many(pts, coords, rd)
    return pts[int(np.argmin(vals))]
