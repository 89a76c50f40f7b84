"""Constructive two-space interpolation profiles.

Splits a function into a rough part plus a Lipschitz-controlled smooth
part at every scale, brackets the resulting K-profile between modulus
envelopes, and checks the refined-scale embedding into rearrangement
norms.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cover import _tents, greedy_net
from .median import WeightedSample, median
from .norms import (canonical_gradient, ep_modulus, lebesgue_norm,
                    log_trapezoid_weights, lorentz_norm, sequence_norm)
from .space import estimate_constants


@dataclass
class KDecomposition:
    smooth: np.ndarray      # partition blend of ball medians
    rough: np.ndarray       # f minus the smooth part
    gradient: np.ndarray    # sharp maximal function, a Lipschitz budget
    centers: np.ndarray
    overlap: int
    lipschitz_factor: float


def sharp_maximal(f, space, t, p):
    """Exact sup over r >= t of (1/r) times the p-average of |f - f(x)|
    over B(x, r); the sup runs over the finitely many distinct balls."""
    f = np.asarray(f, dtype=float)
    w = space.weights
    out = np.empty(space.n_points)
    for x in range(space.n_points):
        d = space.dist_row(x)
        order = np.argsort(d, kind="stable")
        ds = d[order]
        diffp = (np.abs(f - f[x]) ** p * w)[order]
        num = np.cumsum(diffp)
        den = np.cumsum(w[order])
        last = np.nonzero(np.diff(ds) > 0)[0]
        ends = np.append(last, len(ds) - 1)
        avg = (num[ends] / den[ends]) ** (1.0 / p)
        radii = ds[ends]
        below = radii < t
        best = 0.0
        if np.any(below):
            j = np.nonzero(below)[0][-1]
            best = avg[j] / t
        if np.any(~below):
            best = max(best, float(np.max(avg[~below] / radii[~below])))
        out[x] = best
    return out


def k_decomposition(f, space, t, p=1.0):
    """Split f into rough + smooth at scale t.

    The smooth part blends ball medians over a t/6 net with a tent
    partition; the sharp maximal function at scale t is its Lipschitz
    budget.
    """
    f = np.asarray(f, dtype=float)
    w = space.weights
    radius = t / 6.0
    centers = greedy_net(space, radius)
    tents = _tents(space, centers, np.full(len(centers), radius))
    sums = np.asarray(tents.sum(axis=0)).ravel()
    if np.any(sums == 0):
        raise RuntimeError("net failed to cover the space")
    phi = tents.multiply(1.0 / sums[None, :]).tocsr()
    meds = np.empty(len(centers))
    for i, c in enumerate(centers):
        ids = space.ball(c, radius)
        meds[i] = median(WeightedSample(f[ids], w[ids]))
    smooth = np.asarray(phi.T @ meds).ravel()
    counts = np.zeros(space.n_points, dtype=np.int64)
    for c in centers:
        counts[space.ball(c, 2 * radius)] += 1
    overlap = int(counts.max())
    grad = sharp_maximal(f, space, t, p)
    return KDecomposition(smooth=smooth, rough=f - smooth, gradient=grad,
                          centers=centers, overlap=overlap,
                          lipschitz_factor=6.0 * (1.0 + 2.0 * overlap))


def lipschitz_validity(h, g, space, region=None):
    """Measured smallest C with |h(x)-h(y)| <= C d (g(x)+g(y))."""
    h = np.asarray(h, dtype=float)
    ids = np.asarray(region) if region is not None else np.arange(space.n_points)
    best = 0.0
    for a, x in enumerate(ids):
        rest = ids[a + 1:]
        if len(rest) == 0:
            continue
        d = space.dist_row(x, rest)
        pos = d > 0
        rest, d = rest[pos], d[pos]
        denom = d * (g[x] + g[rest])
        okay = denom > 0
        if np.any(okay):
            best = max(best, float(np.max(np.abs(h[rest] - h[x])[okay]
                                          / denom[okay])))
    return best


@dataclass
class KProfile:
    """Scalewise bracket around the achieved decomposition cost."""
    t_grid: np.ndarray
    lower: np.ndarray      # averaged modulus, a lower proxy
    achieved: np.ndarray   # |rough|_p + t |gradient|_p
    upper: np.ndarray      # damped modulus envelope with analytic tail
    meta: dict = field(default_factory=dict)

    def write_csv(self, path, header=""):
        with open(path, "w") as fh:
            if header:
                fh.write(header + "\n")
            fh.write("t,lower,achieved,upper\n")
            for row in zip(self.t_grid, self.lower, self.achieved, self.upper):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def k_profile(f, space, p, t_grid):
    """Lower proxy, achieved cost, and damped upper envelope per scale."""
    f = np.asarray(f, dtype=float)
    ts = np.sort(np.asarray(t_grid, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("scales must be positive")
    ptil = min(p, 1.0)
    diam = space.diameter
    lower = np.empty(len(ts))
    achieved = np.empty(len(ts))
    upper = np.empty(len(ts))
    cache = {}

    def modulus(r):
        if r not in cache:
            cache[r] = ep_modulus(f, space, r, p)
        return cache[r]

    flat = modulus(2.0 * diam)  # every ball is the whole space from here on
    for a, t in enumerate(ts):
        lower[a] = modulus(t)
        dec = k_decomposition(f, space, t, p)
        achieved[a] = (lebesgue_norm(dec.rough, space, p)
                       + t * lebesgue_norm(dec.gradient, space, p))
        acc = 0.0
        k = 0
        while t * 2.0 ** k <= diam:
            acc += 2.0 ** (-k * ptil) * modulus(t * 2.0 ** k) ** ptil
            k += 1
        acc += flat ** ptil * 2.0 ** (-k * ptil) / (1.0 - 2.0 ** (-ptil))
        upper[a] = acc ** (1.0 / ptil)
    return KProfile(t_grid=ts, lower=lower, achieved=achieved, upper=upper,
                    meta={"p": p, "diameter": diam})


def interpolation_norm(profile, s, q):
    """l^q average of t^(-s) times the achieved profile over its scale grid."""
    vals = profile.t_grid ** (-s) * profile.achieved
    if math.isinf(q):
        return float(vals.max())
    wts = log_trapezoid_weights(profile.t_grid)
    return float(np.sum(wts * vals ** q) ** (1.0 / q))


def brute_force_k(f, space, t, p, cap=16, solver=None):
    """Exact decomposition cost inf |f-h|_p + t |H|_p over pairs (h, H)
    with H a Lipschitz budget for h, by convex program; p in {1, 2}."""
    import cvxpy as cp

    n = space.n_points
    if n > cap:
        raise ValueError(f"oracle size cap exceeded: {n} > {cap}")
    if p not in (1, 2):
        raise ValueError("brute-force profile limited to p in {1, 2}")
    f = np.asarray(f, dtype=float)
    wroot = space.weights ** (1.0 / p)
    h = cp.Variable(n)
    g = cp.Variable(n, nonneg=True)
    cons = []
    for i in range(n):
        d = space.dist_row(i)
        for j in range(i + 1, n):
            if d[j] > 0:
                cons.append(h[i] - h[j] <= d[j] * (g[i] + g[j]))
                cons.append(h[j] - h[i] <= d[j] * (g[i] + g[j]))
    obj = (cp.pnorm(cp.multiply(wroot, f - h), p)
           + t * cp.pnorm(cp.multiply(wroot, g), p))
    problem = cp.Problem(cp.Minimize(obj), cons)
    problem.solve(solver=solver)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"K oracle did not converge: {problem.status}")
    return float(problem.value)


@dataclass
class EmbeddingReport:
    lhs: float          # best-constant rearrangement norm of u
    rhs: float          # scalewise-sequence norm of u
    ratio: float
    p_star: float
    dimension: float


def lorentz_embedding_check(u, space, params, dimension=None, radii=None,
                            scan=512):
    """Refined-scale embedding check: compare inf_c of the rearrangement
    norm of u - c at the critical index against the scalewise sequence
    norm.  Raises for supercritical parameters s p >= dimension."""
    u = np.asarray(u, dtype=float)
    if dimension is None:
        if radii is None:
            d = space.diameter
            radii = np.geomspace(d / 32.0, d / 4.0, 6)
        dimension = estimate_constants(space, radii).dimension
    s, p, q = params.s, params.p, params.q
    if s * p >= dimension:
        raise ValueError("supercritical: s*p must stay below the dimension")
    p_star = dimension * p / (dimension - s * p)

    lo, hi = float(np.min(u)), float(np.max(u))
    if lo == hi:
        lhs = 0.0
    else:
        cs = np.linspace(lo, hi, scan)
        vals = [lorentz_norm(u - c, space, p_star, q) for c in cs]
        b = int(np.argmin(vals))
        lhs = vals[b]
        window = (cs[max(b - 1, 0)], cs[min(b + 1, scan - 1)])
        from scipy.optimize import minimize_scalar
        res = minimize_scalar(lambda c: lorentz_norm(u - c, space, p_star, q),
                              bounds=window, method="bounded",
                              options={"xatol": 1e-10})
        lhs = min(lhs, float(res.fun))
    gs = canonical_gradient(u, space, s)
    rhs = sequence_norm(gs, space, params, "lq_lp")
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return EmbeddingReport(lhs=lhs, rhs=rhs, ratio=ratio, p_star=p_star,
                           dimension=float(dimension))
