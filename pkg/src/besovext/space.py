"""Finite metric measure spaces: weighted points, exact ball queries,
uniform-grid construction, and sampled doubling/dimension estimates."""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .regions import region_from_spec


class GeometryError(ValueError):
    """A construction yielded no points or an unreachable complement."""


class GridInfo:
    """Lattice metadata for spaces sampled from a uniform rectangular grid."""

    def __init__(self, spacing, origin, shape, lattice, raster):
        self.spacing = float(spacing)
        self.origin = np.asarray(origin, dtype=float)
        self.shape = tuple(int(c) for c in shape)
        self.lattice = np.asarray(lattice, dtype=np.int64)
        self.raster = raster  # point id per lattice cell, -1 where absent

    @property
    def dim(self):
        return len(self.shape)

    def bbox(self):
        lo = self.origin
        hi = self.origin + (np.asarray(self.shape) - 1) * self.spacing
        return lo, hi


class MetricMeasureSpace:
    """Finite weighted point set with a metric and bucketed ball queries.

    Either coordinates (Euclidean metric) or an explicit symmetric distance
    table must be supplied.  Weights are strictly positive.  The bucket
    index over coordinate cells is built once at construction.
    """

    def __init__(self, points=None, weights=None, distances=None, grid=None):
        if points is None and distances is None:
            raise ValueError("need point coordinates or a distance table")
        self.points = None
        if points is not None:
            self.points = np.asarray(points, dtype=float)
            if self.points.ndim == 1:
                self.points = self.points[:, None]
        self.distances = None
        if distances is not None:
            table = np.asarray(distances, dtype=float)
            if table.ndim != 2 or table.shape[0] != table.shape[1]:
                raise ValueError("distance table must be square")
            if not np.allclose(table, table.T, rtol=1e-12, atol=0.0):
                raise ValueError("distance table must be symmetric")
            if np.any(np.diag(table) != 0) or np.any(table < 0):
                raise ValueError("distance table needs zero diagonal and no negatives")
            self.distances = table
        n = len(self.points) if self.points is not None else len(self.distances)
        if n == 0:
            raise GeometryError("empty domain")
        if weights is None:
            weights = np.ones(n)
        self.weights = np.asarray(weights, dtype=float).ravel()
        if len(self.weights) != n:
            raise ValueError("weights length does not match point count")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise ValueError("weights must be finite and strictly positive")
        self.grid = grid
        self._diameter = None
        self._min_gap = None
        self._build_index()

    @property
    def n_points(self):
        return len(self.weights)

    @property
    def total_measure(self):
        return float(self.weights.sum())

    def _build_index(self):
        """Bucket points by coordinate cell for fixed-radius queries."""
        self._buckets = None
        if self.points is None:
            return
        n, d = self.points.shape
        ext = np.ptp(self.points, axis=0)
        vol = float(np.prod(np.maximum(ext, 1e-12)))
        cell = (8.0 * vol / n) ** (1.0 / d)
        if not np.isfinite(cell) or cell <= 0:
            cell = 1.0
        self._cell = cell
        keys = np.floor(self.points / cell).astype(np.int64)
        buckets = {}
        for i, key in enumerate(map(tuple, keys)):
            buckets.setdefault(key, []).append(i)
        self._buckets = {k: np.asarray(v) for k, v in buckets.items()}
        self._keys = keys

    def _candidates(self, center, r):
        lo = np.floor((center - r) / self._cell).astype(np.int64)
        hi = np.floor((center + r) / self._cell).astype(np.int64)
        span = np.prod(hi - lo + 1)
        if span >= len(self._buckets):
            return np.arange(self.n_points)
        ranges = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, len(lo))
        found = [self._buckets[key] for key in map(tuple, mesh) if key in self._buckets]
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(found)

    def dist_row(self, x, ids=None):
        """Distances from point x to ids (default: to every point)."""
        if self.distances is not None:
            row = self.distances[x]
            return row if ids is None else row[ids]
        ref = self.points[x]
        pts = self.points if ids is None else self.points[np.asarray(ids)]
        return np.sqrt(np.sum((pts - ref) ** 2, axis=1))

    def ball(self, x, r):
        """Point ids of the open ball B(x, r); the center is always a member."""
        if r <= 0:
            return np.asarray([x], dtype=np.int64)
        if self.distances is not None:
            return np.nonzero(self.distances[x] < r)[0]
        cand = self._candidates(self.points[x], r)
        d = np.sqrt(np.sum((self.points[cand] - self.points[x]) ** 2, axis=1))
        ids = cand[d < r]
        return np.sort(ids)

    def ball_measure(self, x, r):
        return float(self.weights[self.ball(x, r)].sum())

    def _pairwise_scan(self):
        best_max = 0.0
        best_min = math.inf
        n = self.n_points
        for lo in range(0, n, 512):
            hi = min(lo + 512, n)
            if self.distances is not None:
                block = self.distances[lo:hi]
            else:
                block = cdist(self.points[lo:hi], self.points)
            best_max = max(best_max, float(block.max()))
            pos = block[block > 0]
            if len(pos):
                best_min = min(best_min, float(pos.min()))
        self._diameter = best_max
        self._min_gap = best_min

    @property
    def diameter(self):
        if self._diameter is None:
            self._pairwise_scan()
        return self._diameter

    @property
    def min_gap(self):
        """Smallest positive pairwise distance."""
        if self._min_gap is None:
            self._pairwise_scan()
        if not math.isfinite(self._min_gap):
            raise ValueError("need at least two distinct points")
        return self._min_gap

    def subset(self, selector):
        """Boolean array or region -> SubsetMask."""
        if hasattr(selector, "contains"):
            if self.points is None:
                raise ValueError("region masks need point coordinates")
            members = selector.contains(self.points)
        else:
            members = np.asarray(selector, dtype=bool)
            if members.shape != (self.n_points,):
                raise ValueError("mask shape does not match the space")
        return SubsetMask(self, members)


class SubsetMask:
    """Boolean membership view of a space, with the induced measure."""

    def __init__(self, space, members):
        self.space = space
        self.members = np.asarray(members, dtype=bool).copy()
        if self.members.shape != (space.n_points,):
            raise ValueError("mask shape does not match the space")
        self._indices = None

    @property
    def indices(self):
        if self._indices is None:
            self._indices = np.nonzero(self.members)[0]
        return self._indices

    @property
    def size(self):
        return len(self.indices)

    @property
    def measure(self):
        return float(self.space.weights[self.members].sum())

    def complement(self):
        return SubsetMask(self.space, ~self.members)

    def induced_space(self):
        """Restriction of metric and measure to the members."""
        ids = self.indices
        if len(ids) == 0:
            raise GeometryError("mask has no members")
        sp = self.space
        grid = None
        if sp.grid is not None:
            raster = np.full(sp.grid.shape, -1, dtype=np.int64)
            lat = sp.grid.lattice[ids]
            raster[tuple(lat.T)] = np.arange(len(ids))
            grid = GridInfo(sp.grid.spacing, sp.grid.origin, sp.grid.shape, lat, raster)
        if sp.points is not None:
            return MetricMeasureSpace(points=sp.points[ids],
                                      weights=sp.weights[ids], grid=grid)
        return MetricMeasureSpace(distances=sp.distances[np.ix_(ids, ids)],
                                  weights=sp.weights[ids])


def distance_to_mask(space, mask):
    """Distance from every point to the nearest mask member (0 on members)."""
    ids = mask.indices
    if len(ids) == 0:
        raise GeometryError("mask has no members")
    n = space.n_points
    out = np.empty(n)
    for lo in range(0, n, 512):
        hi = min(lo + 512, n)
        if space.distances is not None:
            block = space.distances[lo:hi][:, ids]
        else:
            block = cdist(space.points[lo:hi], space.points[ids])
        out[lo:hi] = block.min(axis=1)
    out[ids] = 0.0
    return out


def build_grid(spacing, bbox, region=None):
    """Uniform grid over bbox with cell weight spacing**dim, filtered by region.

    bbox is a pair (lo, hi) of coordinate vectors; lattice sites run from lo
    to hi inclusive in steps of `spacing` along every axis.
    """
    h = float(spacing)
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    lo = np.atleast_1d(np.asarray(bbox[0], dtype=float))
    hi = np.atleast_1d(np.asarray(bbox[1], dtype=float))
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError("bbox needs lo <= hi of equal dimension")
    dim = len(lo)
    counts = np.floor((hi - lo) / h + 1e-9).astype(int) + 1
    axes = [lo[d] + h * np.arange(counts[d]) for d in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    lattice = np.stack([m.ravel() for m in np.meshgrid(
        *[np.arange(c) for c in counts], indexing="ij")], axis=-1)
    keep = region.contains(pts) if region is not None else np.ones(len(pts), bool)
    if not np.any(keep):
        raise GeometryError("empty domain: region excludes every grid point")
    pts, lattice = pts[keep], lattice[keep]
    raster = np.full(tuple(counts), -1, dtype=np.int64)
    raster[tuple(lattice.T)] = np.arange(len(pts))
    info = GridInfo(h, lo, counts, lattice, raster)
    weights = np.full(len(pts), h ** dim)
    return MetricMeasureSpace(points=pts, weights=weights, grid=info)


def lattice_offsets(grid, t, closed=False, tol=1e-9):
    """Integer lattice offsets m with |m| * spacing < t (or <= t when closed).

    A relative tolerance keeps offsets whose float norm lands within
    tol of the threshold, which can only enlarge the collection.
    """
    h = grid.spacing
    reach = int(math.floor(t / h * (1 + tol))) + 1
    rng = np.arange(-reach, reach + 1)
    mesh = np.meshgrid(*[rng] * grid.dim, indexing="ij")
    offs = np.stack([m.ravel() for m in mesh], axis=-1)
    norms = np.sqrt(np.sum(offs.astype(float) ** 2, axis=1)) * h
    cut = t * (1 + tol)
    keep = norms <= cut if closed else norms < cut
    return offs[keep], norms[keep]


@dataclass
class SpaceConstants:
    """Sampled doubling ratio and volume-growth exponent."""
    doubling: float
    dimension: float
    radius_range: tuple
    sample_size: int


def estimate_constants(space, radii, centers=None):
    """Estimate the doubling constant and growth exponent from ball measures.

    The exponent is the least-squares slope of log mu(B(x, r)) against
    log r pooled over sampled centers; at least two distinct radii are
    required for the fit.
    """
    radii = np.sort(np.unique(np.asarray(radii, dtype=float)))
    if len(radii) < 2:
        raise ValueError("need at least two distinct radii for the exponent fit")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if centers is None:
        n = space.n_points
        centers = np.arange(n) if n <= 256 else np.linspace(0, n - 1, 256).astype(int)
    centers = np.asarray(centers)
    doubling = 0.0
    log_r, log_mu = [], []
    for x in centers:
        row = space.dist_row(x)
        for r in radii:
            mu_r = float(space.weights[row < r].sum())
            mu_2r = float(space.weights[row < 2 * r].sum())
            doubling = max(doubling, mu_2r / mu_r)
            log_r.append(math.log(r))
            log_mu.append(math.log(mu_r))
    slope = np.polyfit(log_r, log_mu, 1)[0]
    return SpaceConstants(doubling=float(doubling), dimension=float(slope),
                          radius_range=(float(radii[0]), float(radii[-1])),
                          sample_size=len(centers))


def load_domain(source):
    """Build a space from a domain-spec JSON document (path or dict)."""
    if isinstance(source, dict):
        spec = source
    else:
        with open(source) as fh:
            spec = json.load(fh)
    kind = spec.get("kind")
    if kind == "grid":
        for key in ("spacing", "bbox"):
            if key not in spec:
                raise ValueError(f"grid domain spec needs {key!r}")
        region = region_from_spec(spec["region"]) if "region" in spec else None
        return build_grid(spec["spacing"], spec["bbox"], region)
    if kind == "cloud":
        if "points" not in spec and "distances" not in spec:
            raise ValueError("cloud domain spec needs points or distances")
        return MetricMeasureSpace(points=spec.get("points"),
                                  weights=spec.get("weights"),
                                  distances=spec.get("distances"))
    raise ValueError(f"unknown domain kind {kind!r}")
