"""Measure-density diagnostics and the test geometries that exercise them."""

import json
import math
from dataclasses import dataclass

import numpy as np

from .regions import (carpet_area, carpet_level_areas, make_carpet, make_cusp,
                      make_slit_disc)

__all__ = [
    "DensityReport", "check_measure_density", "log_radii",
    "make_carpet", "make_cusp", "make_slit_disc",
    "carpet_area", "carpet_level_areas",
]


def log_radii(r_min, r_max, per_decade=16):
    """Log-uniform radius samples with at least per_decade per decade."""
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    decades = math.log10(r_max / r_min)
    count = max(2, int(math.ceil(per_decade * decades)) + 1)
    return np.geomspace(r_min, r_max, count)


@dataclass
class DensityReport:
    """Worst sampled ratio of mask measure to ball measure."""
    passed: bool
    worst_ratio: float
    witness_point: int
    witness_radius: float
    threshold: float
    radius_range: tuple
    centers: int

    def to_dict(self):
        return {
            "passed": bool(self.passed),
            "worst_ratio": self.worst_ratio,
            "witness_point": int(self.witness_point),
            "witness_radius": self.witness_radius,
            "threshold": self.threshold,
            "radius_range": list(self.radius_range),
            "centers": int(self.centers),
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def check_measure_density(space, mask, threshold, radii=None, centers=None,
                          boundary_margin=1.0):
    """Sample mu(S intersect B(x, r)) / mu(B(x, r)) over mask centers.

    Centers keep a margin from the bounding box so ambient balls are not
    clipped; radii default to a log-uniform sweep capped at 1.  Passes
    when the worst ratio stays at or above the threshold.
    """
    if radii is None:
        r_min = 4 * space.grid.spacing if space.grid is not None else \
            space.min_gap * 4
        radii = log_radii(min(r_min, 0.5), 1.0)
    radii = np.asarray(radii, dtype=float)
    if centers is None:
        ids = mask.indices
        if space.grid is not None and boundary_margin > 0:
            lo, hi = space.grid.bbox()
            pts = space.points[ids]
            margin = np.minimum(pts - lo, hi - pts).min(axis=1)
            ids = ids[margin > boundary_margin]
        if len(ids) == 0:
            raise ValueError("no admissible centers inside the boundary margin")
        centers = ids
    centers = np.asarray(centers)
    w = space.weights
    worst = math.inf
    wit_x, wit_r = -1, math.nan
    for x in centers:
        row = space.dist_row(x)
        for r in radii:
            ball = row < r
            mass = float(w[ball].sum())
            hit = float(w[ball & mask.members].sum())
            ratio = hit / mass
            if ratio < worst:
                worst, wit_x, wit_r = ratio, int(x), float(r)
    return DensityReport(passed=worst >= threshold, worst_ratio=float(worst),
                         witness_point=wit_x, witness_radius=wit_r,
                         threshold=float(threshold),
                         radius_range=(float(radii.min()), float(radii.max())),
                         centers=len(centers))
