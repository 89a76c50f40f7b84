"""Fractional smoothness norms on finite metric measure spaces.

Gradient-sequence norms (canonical suprema and convex-program infima),
translation / averaged / centered modulus norms on dyadic scale grids,
scale-averaged function norms, exact two-index rearrangement norms, and
the exact Hardy-Littlewood maximal function.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .median import WeightedSample, median
from .space import SubsetMask, lattice_offsets

INF = math.inf


def _resolve(target):
    """Return (space, member ids) for a space or a subset mask."""
    if isinstance(target, SubsetMask):
        return target.space, target.indices
    return target, np.arange(target.n_points)


@dataclass
class SmoothnessParams:
    """Smoothness and integrability exponents (s, p, q) plus the inner
    exponent r used by scale-averaged norms."""
    s: float
    p: float
    q: float = INF
    r: float = None

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")
        if not 0 < self.p < INF:
            raise ValueError("p must lie in (0, inf)")
        if not 0 < self.q:
            raise ValueError("q must be positive (inf allowed)")
        if self.r is not None and not 0 < self.r < min(self.p, self.q):
            raise ValueError("r must lie in (0, min(p, q))")


def annulus_index(d):
    """Dyadic annulus index k with 2**(-k-1) <= d < 2**(-k), elementwise."""
    d = np.asarray(d, dtype=float)
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    if np.any(d <= 0):
        raise ValueError("annulus index needs positive distances")
    k = np.floor(-np.log2(d)).astype(np.int64)
    k[d >= 2.0 ** (-k)] -= 1
    k[d < 2.0 ** (-k - 1)] += 1
    return int(k[0]) if scalar else k


def dyadic_range(space):
    """Scale range [k_min, k_max] covering every pairwise-distance annulus."""
    if space.n_points < 2:
        raise ValueError("need at least two points for a scale range")
    k_min = int(annulus_index(np.asarray([space.diameter]))[0])
    k_max = int(math.ceil(-math.log2(space.min_gap)))
    return k_min, max(k_min, k_max)


@dataclass
class GradientSequence:
    """Per-scale nonnegative coefficient functions, zero off their support."""
    k_min: int
    values: np.ndarray  # (n_scales, n_points)
    s: float

    @property
    def k_max(self):
        return self.k_min + self.values.shape[0] - 1

    @property
    def k_range(self):
        return range(self.k_min, self.k_max + 1)

    def scale(self, k):
        if not self.k_min <= k <= self.k_max:
            raise KeyError(f"scale {k} outside [{self.k_min}, {self.k_max}]")
        return self.values[k - self.k_min]


def _group_reduce_max(keys, vals):
    """Max of vals per sorted unique key."""
    order = np.argsort(keys, kind="stable")
    ks, vs = keys[order], vals[order]
    starts = np.append(0, np.nonzero(np.diff(ks))[0] + 1)
    return ks[starts], np.maximum.reduceat(vs, starts)


def canonical_gradient(u, target, s):
    """Smallest per-scale coefficients: the supremum of |u(x)-u(y)| d^(-s)
    over partners y in each dyadic annulus around x."""
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    k0, k1 = dyadic_range(space)
    values = np.zeros((k1 - k0 + 1, space.n_points))
    if len(ids) >= 2:
        for x in ids:
            d = space.dist_row(x, ids)
            pos = d > 0
            if not np.any(pos):
                continue
            k = annulus_index(d[pos])
            quot = np.abs(u[ids[pos]] - u[x]) * d[pos] ** (-s)
            uk, mk = _group_reduce_max(k, quot)
            values[uk - k0, x] = mk
    return GradientSequence(k0, values, s)


def canonical_single_gradient(u, target, s):
    """Scale-free coefficient: the supremum of |u(x)-u(y)| d^(-s) over all
    partners, valid on every annulus at once."""
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    g = np.zeros(space.n_points)
    for x in ids:
        d = space.dist_row(x, ids)
        pos = d > 0
        if np.any(pos):
            g[x] = np.max(np.abs(u[ids[pos]] - u[x]) * d[pos] ** (-s))
    return g


def sequence_norm(gs, target, params, kind):
    """Mixed norm of a gradient sequence over the target's members.

    kind "lp_lq": pointwise l^q across scales, then weighted L^p.
    kind "lq_lp": weighted L^p per scale, then l^q across scales.
    q = inf takes suprema.
    """
    space, ids = _resolve(target)
    w = space.weights[ids]
    V = gs.values[:, ids]
    p, q = params.p, params.q
    if kind == "lp_lq":
        if math.isinf(q):
            inner = V.max(axis=0) if len(V) else np.zeros(len(ids))
        else:
            inner = np.sum(V ** q, axis=0) ** (1.0 / q)
        return float(np.sum(w * inner ** p) ** (1.0 / p))
    if kind == "lq_lp":
        per_scale = np.sum(w[None, :] * V ** p, axis=1) ** (1.0 / p)
        if math.isinf(q):
            return float(per_scale.max()) if len(per_scale) else 0.0
        return float(np.sum(per_scale ** q) ** (1.0 / q))
    raise ValueError("kind must be 'lp_lq' or 'lq_lp'")


def lebesgue_norm(u, target, p):
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    if math.isinf(p):
        return float(np.max(np.abs(u[ids])))
    return float(np.sum(space.weights[ids] * np.abs(u[ids]) ** p) ** (1.0 / p))


def padded_gradient(gs, u, target):
    """Replace scales k <= 0 by 2**((k+1) s) |u|, which dominates any pair
    at distance >= 2**(-k-1) and so stays a valid coefficient sequence."""
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    out = gs.values.copy()
    for k in gs.k_range:
        if k <= 0:
            row = np.zeros(space.n_points)
            row[ids] = 2.0 ** ((k + 1) * gs.s) * np.abs(u[ids])
            out[k - gs.k_min] = row
    return GradientSequence(gs.k_min, out, gs.s)


def _pair_arrays(u, space, ids, s, with_scales=True):
    """Upper-triangle in-range pairs as flat arrays (i, j, k, rhs)."""
    u = np.asarray(u, dtype=float)
    ii, jj, kk, rhs = [], [], [], []
    for a, x in enumerate(ids):
        rest = ids[a + 1:]
        if len(rest) == 0:
            continue
        d = space.dist_row(x, rest)
        pos = d > 0
        rest, d = rest[pos], d[pos]
        ii.append(np.full(len(rest), x))
        jj.append(rest)
        kk.append(annulus_index(d) if with_scales else np.zeros(len(rest), np.int64))
        rhs.append(np.abs(u[rest] - u[x]) * d ** (-s))
    if not ii:
        return (np.empty(0, np.int64),) * 3 + (np.empty(0),)
    return (np.concatenate(ii), np.concatenate(jj),
            np.concatenate(kk), np.concatenate(rhs))


def pair_lower_bound(u, target, params, kind):
    """Largest single-pair relaxation bound; a certified lower bound for
    the infimum over coefficient sequences."""
    space, ids = _resolve(target)
    w = space.weights
    p = params.p
    ii, jj, _, rhs = _pair_arrays(u, space, ids, params.s,
                                  with_scales=(kind != "single"))
    if len(ii) == 0:
        return 0.0
    wx, wy = w[ii], w[jj]
    if p == 1:
        vals = rhs * np.minimum(wx, wy)
    else:
        e = -1.0 / (p - 1.0)
        vals = rhs * (wx ** e + wy ** e) ** ((1.0 - p) / p)
    return float(vals.max())


def infimum_gradient(u, target, params, kind, cap=64, solver=None):
    """Exact infimum of the mixed norm over admissible coefficient
    sequences, via a convex program.

    kind "lp_lq" or "lq_lp" constrain pairs per annulus; kind "single"
    uses one scale-free coefficient constrained on every pair.  Restricted
    to p >= 1 with q in {p, inf} (else the program is not convex) and to
    at most `cap` member points.
    """
    import cvxpy as cp

    space, ids = _resolve(target)
    n = len(ids)
    if n > cap:
        raise ValueError(f"oracle size cap exceeded: {n} > {cap}")
    p, q = params.p, params.q
    if p < 1 or (kind != "single" and not (q == p or math.isinf(q))):
        raise ValueError("oracle limited to the convex range p >= 1, q in {p, inf}")
    w = space.weights[ids]
    wroot = w ** (1.0 / p)
    col = {int(x): a for a, x in enumerate(ids)}
    ii, jj, kk, rhs = _pair_arrays(u, space, ids, params.s,
                                   with_scales=(kind != "single"))
    ci = np.asarray([col[int(x)] for x in ii], dtype=np.int64)
    cj = np.asarray([col[int(x)] for x in jj], dtype=np.int64)

    constraints = []
    if kind == "single":
        g = cp.Variable(n, nonneg=True)
        if len(ii):
            constraints.append(g[ci] + g[cj] >= rhs)
        objective = cp.pnorm(cp.multiply(wroot, g), p)
        var = g
        scales = None
    else:
        scales = np.sort(np.unique(kk)) if len(kk) else np.asarray([0])
        srow = {int(k): a for a, k in enumerate(scales)}
        G = cp.Variable((len(scales), n), nonneg=True)
        if len(ii):
            rows = np.asarray([srow[int(k)] for k in kk], dtype=np.int64)
            lhs = cp.hstack([G[rows[t], ci[t]] + G[rows[t], cj[t]]
                             for t in range(len(rows))])
            constraints.append(lhs >= rhs)
        wmat = np.tile(wroot, (len(scales), 1))
        if q == p:
            objective = cp.pnorm(cp.vec(cp.multiply(wmat, G), order="C"), p)
        elif kind == "lp_lq":  # q = inf: weighted L^p of the scalewise sup
            env = cp.Variable(n, nonneg=True)
            for a in range(len(scales)):
                constraints.append(G[a, :] <= env)
            objective = cp.pnorm(cp.multiply(wroot, env), p)
        else:  # lq_lp with q = inf: sup of the per-scale L^p norms
            top = cp.Variable(nonneg=True)
            for a in range(len(scales)):
                constraints.append(cp.pnorm(cp.multiply(wroot, G[a, :]), p) <= top)
            objective = top
        var = G
    problem = cp.Problem(cp.Minimize(objective), constraints)
    problem.solve(solver=solver)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"infimum oracle did not converge: {problem.status}")

    if kind == "single":
        vals = np.maximum(np.asarray(var.value).ravel(), 0.0)
        k0, k1 = dyadic_range(space)
        full = np.zeros((k1 - k0 + 1, space.n_points))
        full[:, ids] = vals[None, :]
        gs = GradientSequence(k0, full, params.s)
    else:
        vals = np.maximum(np.asarray(var.value), 0.0)
        k0, k1 = int(scales[0]), int(scales[-1])
        full = np.zeros((k1 - k0 + 1, space.n_points))
        for a, k in enumerate(scales):
            full[int(k) - k0][ids] = vals[a]
        gs = GradientSequence(k0, full, params.s)
    return float(problem.value), gs


@dataclass
class NormReport:
    """Named norm values with the parameters that produced them."""
    params: SmoothnessParams
    values: dict
    meta: dict = field(default_factory=dict)

    def header(self):
        q = "inf" if math.isinf(self.params.q) else f"{self.params.q:g}"
        r = "none" if self.params.r is None else f"{self.params.r:g}"
        return (f"# besovext {__version__} s={self.params.s:g} "
                f"p={self.params.p:g} q={q} r={r}")

    def to_json(self):
        return json.dumps({"params": self.header(), "values": self.values,
                           "meta": self.meta}, indent=2, sort_keys=True)

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.header() + "\n")
            fh.write("name,value\n")
            for name in sorted(self.values):
                fh.write(f"{name},{self.values[name]:.17g}\n")


def hajlasz_norms(u, target, params, oracle_cap=64, padded=False):
    """Norm report for u built from coefficient sequences.

    Canonical sequences give upper bounds for the homogeneous norms; the
    convex-program infima are added when the member count fits under the
    oracle cap and the exponents are in the convex range.
    """
    space, ids = _resolve(target)
    gs = canonical_gradient(u, target, params.s)
    single = canonical_single_gradient(u, target, params.s)
    w = space.weights[ids]
    lp = lebesgue_norm(u, target, params.p)
    values = {
        "lebesgue": lp,
        "tl_gradient": sequence_norm(gs, target, params, "lp_lq"),
        "besov_gradient": sequence_norm(gs, target, params, "lq_lp"),
        "single_gradient": float(np.sum(w * single[ids] ** params.p)
                                 ** (1.0 / params.p)),
    }
    values["tl_total"] = lp + values["tl_gradient"]
    values["besov_total"] = lp + values["besov_gradient"]
    values["single_total"] = lp + values["single_gradient"]
    if padded:
        pad = padded_gradient(gs, u, target)
        values["tl_gradient_padded"] = sequence_norm(pad, target, params, "lp_lq")
        values["besov_gradient_padded"] = sequence_norm(pad, target, params, "lq_lp")
    oracle = (len(ids) <= oracle_cap and params.p >= 1
              and (params.q == params.p or math.isinf(params.q)))
    if oracle:
        values["tl_gradient_infimum"] = infimum_gradient(u, target, params, "lp_lq",
                                                         cap=oracle_cap)[0]
        values["besov_gradient_infimum"] = infimum_gradient(u, target, params,
                                                            "lq_lp", cap=oracle_cap)[0]
        values["single_gradient_infimum"] = infimum_gradient(u, target, params,
                                                             "single",
                                                             cap=oracle_cap)[0]
    meta = {"points": int(len(ids)), "oracle": bool(oracle),
            "k_range": [gs.k_min, gs.k_max]}
    return NormReport(params=params, values=values, meta=meta)


# ---------------------------------------------------------------------------
# modulus machinery


def ep_modulus(u, space, t, p):
    """Averaged p-modulus at scale t with true ball measures."""
    u = np.asarray(u, dtype=float)
    w = space.weights
    acc = 0.0
    for x in range(space.n_points):
        ids = space.ball(x, t)
        mass = w[ids].sum()
        acc += w[x] / mass * float(np.sum(w[ids] * np.abs(u[ids] - u[x]) ** p))
    return acc ** (1.0 / p)


def _grid_rasters(space, ids, u):
    grid = space.grid
    val = np.zeros(grid.shape)
    mem = np.zeros(grid.shape, dtype=bool)
    lat = grid.lattice[ids]
    val[tuple(lat.T)] = np.asarray(u, dtype=float)[ids]
    mem[tuple(lat.T)] = True
    return val, mem


def _shift_slices(shape, m):
    src = tuple(slice(max(0, -mi), s - max(0, mi)) for s, mi in zip(shape, m))
    dst = tuple(slice(max(0, mi), s - max(0, -mi)) for s, mi in zip(shape, m))
    return src, dst


def translation_modulus(u, target, t, p):
    """Largest L^p difference norm over lattice shifts of length at most t.

    Defined only on grid spaces; the shift h ranges over all lattice
    offsets with |h| <= t and each term sums over the points whose
    translate stays inside the member set.
    """
    space, ids = _resolve(target)
    if space.grid is None:
        raise ValueError("translation modulus needs a grid space")
    val, mem = _grid_rasters(space, ids, u)
    offs, _ = lattice_offsets(space.grid, t, closed=True)
    celw = space.grid.spacing ** space.grid.dim
    best = 0.0
    for m in offs:
        if not np.any(m):
            continue
        src, dst = _shift_slices(space.grid.shape, m)
        both = mem[src] & mem[dst]
        if not np.any(both):
            continue
        diff = np.abs(val[dst][both] - val[src][both])
        best = max(best, celw * float(np.sum(diff ** p)))
    return best ** (1.0 / p)


def _offset_neighbors(space, ids, offs):
    """Per-member lists of member neighbor ids reached by the offsets."""
    grid = space.grid
    raster = np.full(grid.shape, -1, dtype=np.int64)
    lat_all = grid.lattice
    raster[tuple(lat_all[ids].T)] = ids
    shape = np.asarray(grid.shape)
    out = []
    for x in ids:
        cand = grid.lattice[x][None, :] + offs
        ok = np.all((cand >= 0) & (cand < shape), axis=1)
        hits = raster[tuple(cand[ok].T)]
        out.append(hits[hits >= 0])
    return out


def averaged_modulus(u, target, t, p):
    """Ball-averaged p-modulus at scale t restricted to the member set.

    On grids the normalizing ball measure is the translation-invariant
    lattice-offset count, so the modulus is dominated exactly by the
    translation modulus; on point clouds the true ambient ball measure
    is used.
    """
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    w = space.weights
    if space.grid is not None:
        val, mem = _grid_rasters(space, ids, u)
        offs, _ = lattice_offsets(space.grid, t, closed=False)
        celw = space.grid.spacing ** space.grid.dim
        nu = celw * len(offs)
        acc = 0.0
        for m in offs:
            if not np.any(m):
                continue
            src, dst = _shift_slices(space.grid.shape, m)
            both = mem[src] & mem[dst]
            if np.any(both):
                acc += float(np.sum(np.abs(val[dst][both] - val[src][both]) ** p))
        return (celw * celw * acc / nu) ** (1.0 / p)
    members = np.zeros(space.n_points, dtype=bool)
    members[ids] = True
    acc = 0.0
    for x in ids:
        bids = space.ball(x, t)
        nu = w[bids].sum()
        sel = bids[members[bids]]
        acc += w[x] / nu * float(np.sum(w[sel] * np.abs(u[sel] - u[x]) ** p))
    return acc ** (1.0 / p)


def centered_power_min(values, weights, p):
    """Minimize sum w |v - c|**p over c; returns (c, minimum).

    Closed forms for p = 1 (weighted median) and p = 2 (mean); for p < 1
    the objective is piecewise concave so the minimum sits at an attained
    value and a scan is exact; otherwise golden-section refined against
    the attained-value candidates.
    """
    v = np.asarray(values, dtype=float)
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float)

    def cost(c):
        return float(np.sum(w * np.abs(v - c) ** p))

    if p == 2:
        c = float(np.sum(w * v) / np.sum(w))
        return c, cost(c)
    if p == 1:
        c = median(WeightedSample(v, w))
        return c, cost(c)
    cand = np.unique(v)
    best_c, best = None, INF
    for c in cand:
        val = cost(c)
        if val < best:
            best_c, best = float(c), val
    if p > 1 and len(cand) > 1:
        res = minimize_scalar(cost, bounds=(cand[0], cand[-1]),
                              method="bounded",
                              options={"xatol": 1e-10})
        if res.fun < best:
            best_c, best = float(res.x), float(res.fun)
    return best_c, best


def centered_modulus(u, target, t, p):
    """Like the averaged modulus but with the best constant subtracted
    inside each ball, which can only decrease it."""
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    w = space.weights
    if space.grid is not None:
        offs, _ = lattice_offsets(space.grid, t, closed=False)
        celw = space.grid.spacing ** space.grid.dim
        nu = celw * len(offs)
        neigh = _offset_neighbors(space, ids, offs)
        acc = 0.0
        for x, nb in zip(ids, neigh):
            if len(nb) == 0:
                continue
            _, inner = centered_power_min(u[nb], None, p)
            acc += w[x] / nu * celw * inner
        return acc ** (1.0 / p)
    members = np.zeros(space.n_points, dtype=bool)
    members[ids] = True
    acc = 0.0
    for x in ids:
        bids = space.ball(x, t)
        nu = w[bids].sum()
        sel = bids[members[bids]]
        _, inner = centered_power_min(u[sel], w[sel], p)
        acc += w[x] / nu * inner
    return acc ** (1.0 / p)


_MODULUS = {
    "translation": translation_modulus,
    "averaged": averaged_modulus,
    "centered": centered_modulus,
}


def log_trapezoid_weights(ts):
    """Trapezoid quadrature weights for dt/t on a sorted positive grid."""
    ts = np.asarray(ts, dtype=float)
    if len(ts) == 1:
        return np.asarray([math.log(2.0)])
    x = np.log(ts)
    w = np.empty_like(x)
    w[0] = (x[1] - x[0]) / 2.0
    w[-1] = (x[-1] - x[-2]) / 2.0
    if len(x) > 2:
        w[1:-1] = (x[2:] - x[:-2]) / 2.0
    return w


def besov_modulus_norm(u, target, params, variant, t_grid):
    """Inhomogeneous modulus norm: L^p plus the l^q average of the scale
    profile t^(-s) mod(t) over a dyadic grid in (0, 1].

    variant is "translation" (grid shifts), "averaged", or "centered".
    """
    if variant not in _MODULUS:
        raise ValueError(f"variant must be one of {sorted(_MODULUS)}")
    ts = np.sort(np.asarray(t_grid, dtype=float))
    if len(ts) == 0 or np.any(ts <= 0) or np.any(ts > 1):
        raise ValueError("t grid must lie in (0, 1]")
    fn = _MODULUS[variant]
    mods = np.asarray([fn(u, target, t, params.p) for t in ts])
    profile = ts ** (-params.s) * mods
    if math.isinf(params.q):
        hom = float(profile.max())
    else:
        wts = log_trapezoid_weights(ts)
        hom = float(np.sum(wts * profile ** params.q) ** (1.0 / params.q))
    return lebesgue_norm(u, target, params.p) + hom


# ---------------------------------------------------------------------------
# scale-averaged function norms


def scale_average_profile(u, target, params, variant, t_grid, tau=None):
    """Per-member l^q profile of t^(-s) times the local r-average of
    differences (variant "averaged"), of the best-constant deviation
    (variant "centered"), or of the centered deviation integrated only up
    to tau times the distance to the complement (variant "interior")."""
    if params.r is None:
        raise ValueError("scale-averaged norms need the inner exponent r")
    if variant not in ("averaged", "centered", "interior"):
        raise ValueError("variant must be averaged, centered, or interior")
    space, ids = _resolve(target)
    u = np.asarray(u, dtype=float)
    w = space.weights
    ts = np.sort(np.asarray(t_grid, dtype=float))
    if len(ts) == 0 or np.any(ts <= 0) or np.any(ts > 1):
        raise ValueError("t grid must lie in (0, 1]")
    reach = None
    if variant == "interior":
        if tau is None or not 0 < tau < 1:
            raise ValueError("interior variant needs tau in (0, 1)")
        if not isinstance(target, SubsetMask) or target.complement().size == 0:
            raise ValueError("interior variant needs a proper domain mask")
        from .space import distance_to_mask
        reach = tau * distance_to_mask(space, target.complement())
    r = params.r
    members = np.zeros(space.n_points, dtype=bool)
    members[ids] = True

    inner = np.zeros((len(ts), len(ids)))
    for a, t in enumerate(ts):
        if space.grid is not None:
            offs, _ = lattice_offsets(space.grid, t, closed=False)
            celw = space.grid.spacing ** space.grid.dim
            nu = celw * len(offs)
            neigh = _offset_neighbors(space, ids, offs)
            for b, (x, nb) in enumerate(zip(ids, neigh)):
                if len(nb) == 0:
                    continue
                if variant == "averaged":
                    tot = celw * float(np.sum(np.abs(u[nb] - u[x]) ** r))
                else:
                    tot = celw * centered_power_min(u[nb], None, r)[1]
                inner[a, b] = (tot / nu) ** (1.0 / r)
        else:
            for b, x in enumerate(ids):
                bids = space.ball(x, t)
                nu = w[bids].sum()
                sel = bids[members[bids]]
                if variant == "averaged":
                    tot = float(np.sum(w[sel] * np.abs(u[sel] - u[x]) ** r))
                else:
                    tot = centered_power_min(u[sel], w[sel], r)[1]
                inner[a, b] = (tot / nu) ** (1.0 / r)

    keep = np.ones((len(ts), len(ids)), dtype=bool)
    if reach is not None:
        keep = ts[:, None] < reach[ids][None, :]
    profile = ts[:, None] ** (-params.s) * inner
    profile = np.where(keep, profile, 0.0)
    if math.isinf(params.q):
        return profile.max(axis=0)
    wts = log_trapezoid_weights(ts)
    return np.sum(wts[:, None] * profile ** params.q, axis=0) ** (1.0 / params.q)


def tl_function_norm(u, target, params, variant, t_grid, tau=None):
    """L^p of u plus the L^p norm of its scale-averaged profile."""
    space, ids = _resolve(target)
    g = scale_average_profile(u, target, params, variant, t_grid, tau=tau)
    w = space.weights[ids]
    gnorm = float(np.sum(w * g ** params.p) ** (1.0 / params.p))
    return lebesgue_norm(u, target, params.p) + gnorm


# ---------------------------------------------------------------------------
# rearrangement norms and the maximal function


def lorentz_norm(u, space, p, q):
    """Exact two-index rearrangement norm of a step function.

    For finite q the distribution function uses non-strict level sets and
    the layer integral is evaluated in closed form; q = inf takes the
    supremum with strict level sets.
    """
    if not 0 < p < INF or not 0 < q:
        raise ValueError("need p in (0, inf) and q in (0, inf]")
    a = np.abs(np.asarray(u, dtype=float))
    w = space.weights
    pos = a > 0
    if not np.any(pos):
        return 0.0
    order = np.argsort(a[pos], kind="stable")
    vs = a[pos][order]
    ws = w[pos][order]
    breaks = np.nonzero(np.diff(vs) > 0)[0]
    uniq = vs[np.append(breaks, len(vs) - 1)]
    group_w = np.add.reduceat(ws, np.append(0, breaks + 1))
    tails = np.cumsum(group_w[::-1])[::-1]  # weight of {|u| >= v_j}
    if math.isinf(q):
        return float(np.max(uniq * tails ** (1.0 / p)))
    prev = np.concatenate(([0.0], uniq[:-1]))
    layers = np.sum(tails ** (q / p) * (uniq ** q - prev ** q) / q)
    return float(p ** (1.0 / q) * layers ** (1.0 / q))


def maximal_function(g, space):
    """Exact centered Hardy-Littlewood maximal function of |g|."""
    g = np.abs(np.asarray(g, dtype=float))
    w = space.weights
    out = np.empty(space.n_points)
    for x in range(space.n_points):
        d = space.dist_row(x)
        order = np.argsort(d, kind="stable")
        ds = d[order]
        num = np.cumsum((w * g)[order])
        den = np.cumsum(w[order])
        last = np.nonzero(np.diff(ds) > 0)[0]
        ends = np.append(last, len(ds) - 1)
        out[x] = float(np.max(num[ends] / den[ends]))
    return out
