"""Whitney covers of a mask's complement and tent partitions of unity."""

import json

import numpy as np
import scipy.sparse as sparse

from .space import GeometryError, distance_to_mask


class WhitneyCover:
    """Balls B(x_i, r_i) with r_i = dist(x_i, S)/10 covering the complement of S."""

    def __init__(self, centers, radii, reflected, small_ball_index,
                 overlap_bound, boundary_distance):
        self.centers = np.asarray(centers, dtype=np.int64)
        self.radii = np.asarray(radii, dtype=float)
        self.reflected = np.asarray(reflected, dtype=np.int64)
        self.small_ball_index = np.asarray(small_ball_index, dtype=np.int64)
        self.overlap_bound = int(overlap_bound)
        self.boundary_distance = boundary_distance

    @property
    def n_balls(self):
        return len(self.centers)


def whitney_cover(space, mask):
    """Greedy Whitney cover of the complement of the mask.

    Fifth-radius balls are packed over complement points in decreasing
    radius order (ties by point id) and the selected balls are inflated
    back, which covers every complement point.
    """
    if mask.size == 0:
        raise GeometryError("mask has no members")
    comp = np.nonzero(~mask.members)[0]
    if len(comp) == 0:
        raise GeometryError("complement is empty; nothing to cover")
    dist = distance_to_mask(space, mask)
    radii_all = dist[comp] / 10.0
    order = np.lexsort((comp, -radii_all))
    chosen = []
    chosen_r = []
    for pos in order:
        x = comp[pos]
        rx = radii_all[pos]
        if chosen:
            d = space.dist_row(x, np.asarray(chosen))
            if np.any(d < (rx + np.asarray(chosen_r)) / 5.0):
                continue
        chosen.append(int(x))
        chosen_r.append(float(rx))
    centers = np.asarray(chosen, dtype=np.int64)
    radii = np.asarray(chosen_r)

    members = mask.indices
    reflected = np.empty(len(centers), dtype=np.int64)
    for i, c in enumerate(centers):
        d = space.dist_row(c, members)
        reflected[i] = members[int(np.argmin(d))]  # first minimum = lowest id

    counts = np.zeros(space.n_points, dtype=np.int64)
    for c, r in zip(centers, radii):
        counts[space.ball(c, 5.0 * r)] += 1
    overlap = int(counts[comp].max())
    small = np.nonzero(radii < 1.0)[0]
    return WhitneyCover(centers, radii, reflected, small, overlap, dist)


def _tents(space, centers, radii):
    """Sparse matrix of tent bumps psi_i(x) = clip(2 - d(x, x_i)/r_i, 0, 1)."""
    rows, cols, vals = [], [], []
    for i, (c, r) in enumerate(zip(centers, radii)):
        ids = space.ball(c, 2.0 * r)
        d = space.dist_row(c, ids)
        psi = np.clip(2.0 - d / r, 0.0, 1.0)
        keep = psi > 0
        rows.append(np.full(keep.sum(), i))
        cols.append(ids[keep])
        vals.append(psi[keep])
    mat = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(centers), space.n_points))
    return mat


class PartitionOfUnity:
    """Normalized tent bumps subordinate to a ball family."""

    def __init__(self, phi, tents, lipschitz_factor, radii):
        self.phi = phi          # csr (n_balls, n_points)
        self.tents = tents
        self.lipschitz_factor = lipschitz_factor
        self.radii = radii

    @property
    def lipschitz_constants(self):
        """Per-ball Lipschitz bounds K / r_i."""
        return self.lipschitz_factor / self.radii

    def column_sums(self):
        return np.asarray(self.phi.sum(axis=0)).ravel()


def partition_of_unity(space, cover):
    """Tent partition subordinate to the doubled cover balls.

    Sums to one exactly on the covered complement; a covered point with no
    tent mass is a cover gap and raises GeometryError.
    """
    tents = _tents(space, cover.centers, cover.radii)
    sums = np.asarray(tents.sum(axis=0)).ravel()
    comp = cover.boundary_distance > 0
    if np.any(sums[comp] == 0):
        bad = int(np.nonzero(comp & (sums == 0))[0][0])
        raise GeometryError(f"cover gap at point {bad}")
    inv = np.zeros_like(sums)
    inv[sums > 0] = 1.0 / sums[sums > 0]
    phi = tents.multiply(inv[None, :]).tocsr()
    factor = 1.0 + 6.0 * cover.overlap_bound
    return PartitionOfUnity(phi, tents, factor, cover.radii)


def greedy_net(space, radius, ids=None):
    """Maximal radius-separated subset, in increasing id order; the balls
    B(c, radius) around the selected centers cover the candidate set."""
    if ids is None:
        ids = np.arange(space.n_points)
    chosen = []
    for x in ids:
        if chosen:
            d = space.dist_row(x, np.asarray(chosen))
            if np.any(d < radius):
                continue
        chosen.append(int(x))
    return np.asarray(chosen, dtype=np.int64)


def cover_to_dict(space, cover):
    """JSON-ready description of a Whitney cover."""
    out = {
        "centers": cover.centers.tolist(),
        "radii": cover.radii.tolist(),
        "reflected": cover.reflected.tolist(),
        "small_ball_index": cover.small_ball_index.tolist(),
        "overlap_bound": cover.overlap_bound,
    }
    if space.points is not None:
        out["center_coords"] = space.points[cover.centers].tolist()
    return out


def dump_cover(space, cover, path):
    with open(path, "w") as fh:
        json.dump(cover_to_dict(space, cover), fh, indent=2, sort_keys=True)
