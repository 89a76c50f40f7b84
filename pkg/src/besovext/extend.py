"""Whitney-type extension of functions from a subset to the whole space.

The operator averages local medians (or integral means) over reflected
near-boundary balls, multiplies by a Lipschitz cutoff, and carries a
per-scale coefficient sequence certifying fractional smoothness of the
result up to a measured constant.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .cover import partition_of_unity, whitney_cover
from .median import WeightedSample, median
from .norms import (GradientSequence, SmoothnessParams, annulus_index,
                    canonical_gradient, dyadic_range, hajlasz_norms,
                    maximal_function)
from .space import GeometryError, SubsetMask, distance_to_mask


@dataclass
class ExtensionParams:
    """Exponents and geometry knobs of the extension pipeline.

    delta in (0, 1-s) and eps_prime in (0, s) shape the cross-scale sums;
    t_inner in (0, min(p, q)) is the maximal-average exponent.  Omitted
    values default to the midpoints.  v_radius bounds the reach of the
    extension; the cutoff falls linearly from cutoff_start to cutoff_end.
    """
    s: float
    p: float
    q: float = math.inf
    method: str = "median"
    delta: float = None
    eps_prime: float = None
    t_inner: float = None
    v_radius: float = 8.0
    cutoff_start: float = None
    cutoff_end: float = None

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")
        if not 0 < self.p < math.inf:
            raise ValueError("p must lie in (0, inf)")
        if self.method not in ("median", "average"):
            raise ValueError("method must be 'median' or 'average'")
        if self.delta is None:
            self.delta = (1.0 - self.s) / 2.0
        if self.eps_prime is None:
            self.eps_prime = self.s / 2.0
        if self.t_inner is None:
            self.t_inner = min(self.p, self.q) / 2.0
        if not 0 < self.delta < 1.0 - self.s:
            raise ValueError("delta must lie in (0, 1-s)")
        if not 0 < self.eps_prime < self.s:
            raise ValueError("eps_prime must lie in (0, s)")
        if not 0 < self.t_inner < min(self.p, self.q):
            raise ValueError("t_inner must lie in (0, min(p, q))")
        if self.v_radius <= 0:
            raise ValueError("v_radius must be positive")
        if self.cutoff_start is None:
            self.cutoff_start = self.v_radius / 2.0
        if self.cutoff_end is None:
            self.cutoff_end = self.v_radius
        if not 0 <= self.cutoff_start < self.cutoff_end:
            raise ValueError("need 0 <= cutoff_start < cutoff_end")

    def smoothness(self):
        return SmoothnessParams(self.s, self.p, self.q)


@dataclass
class ValidityReport:
    """Measured smallest constant making a coefficient sequence admissible."""
    constant: float
    violations: int
    pairs: int


@dataclass
class ExtensionResult:
    eu: np.ndarray
    etilde: np.ndarray
    psi: np.ndarray
    gradient: GradientSequence            # pre-cutoff extension coefficients
    final_gradient: GradientSequence      # post-cutoff coefficients
    validity_local: ValidityReport        # (etilde, gradient) on pairs in V
    validity_global: ValidityReport       # (eu, final_gradient) on all pairs
    lipschitz: float
    k_cut: int
    v_members: np.ndarray
    norms_input: object = None
    norms_output: object = None
    meta: dict = field(default_factory=dict)


def local_extend(u, mask, space, cover, pou, method="median"):
    """Blend per-ball medians (or means) of u over the reflected balls.

    On members the value is u itself; elsewhere it is the partition
    average over the small balls of the cover.
    """
    u = np.asarray(u, dtype=float)
    w = space.weights
    small = cover.small_ball_index
    coeffs = np.zeros(cover.n_balls)
    for i in small:
        ids = space.ball(cover.reflected[i], cover.radii[i])
        ids = ids[mask.members[ids]]
        if len(ids) == 0:
            raise GeometryError(f"reflected ball {i} misses the mask")
        if method == "median":
            coeffs[i] = median(WeightedSample(u[ids], w[ids]))
        elif method == "average":
            coeffs[i] = float(np.sum(w[ids] * u[ids]) / np.sum(w[ids]))
        else:
            raise ValueError("method must be 'median' or 'average'")
    out = np.asarray(pou.phi[small].T @ coeffs[small]).ravel()
    out[mask.members] = u[mask.members]
    return out


def extension_gradient(gs, space, params, k_range=None):
    """Cross-scale coefficient sequence for the extended function.

    Each output scale k collects maximal averages of the input scales:
    coarser scales j < k damped by 2**((j-k) delta), scales j >= k-6
    damped by 2**((k-j)(s - eps_prime)).
    """
    t = params.t_inner
    mg = np.empty((len(gs.values), space.n_points))
    for a in range(len(gs.values)):
        mg[a] = maximal_function(gs.values[a] ** t, space) ** (1.0 / t)
    if k_range is None:
        k0, k1 = dyadic_range(space)
        k0, k1 = min(k0, gs.k_min), max(k1, gs.k_max)
    else:
        k0, k1 = k_range
    ks = np.arange(k0, k1 + 1)
    js = np.arange(gs.k_min, gs.k_max + 1)
    kk, jj = np.meshgrid(ks, js, indexing="ij")
    wmat = (np.where(jj <= kk - 1, 2.0 ** ((jj - kk) * params.delta), 0.0)
            + np.where(jj >= kk - 6, 2.0 ** ((kk - jj) * (params.s - params.eps_prime)),
                       0.0))
    return GradientSequence(int(k0), wmat @ mg, params.s)


def validity_constant(f, gs, space, region=None, tolerance=1e-9):
    """Smallest C with |f(x)-f(y)| <= C d^s (g_k(x)+g_k(y)) over in-annulus
    pairs of the region; pairs with zero coefficient sum but a difference
    above tolerance * scale(f) count as violations."""
    f = np.asarray(f, dtype=float)
    ids = region.indices if isinstance(region, SubsetMask) else (
        np.asarray(region) if region is not None else np.arange(space.n_points))
    s = gs.s
    floor = tolerance * (np.max(np.abs(f[ids])) + 1.0) if len(ids) else 0.0
    best = 0.0
    bad = 0
    pairs = 0
    for a, x in enumerate(ids):
        rest = ids[a + 1:]
        if len(rest) == 0:
            continue
        d = space.dist_row(x, rest)
        pos = d > 0
        rest, d = rest[pos], d[pos]
        k = annulus_index(d)
        in_range = (k >= gs.k_min) & (k <= gs.k_max)
        rest, d, k = rest[in_range], d[in_range], k[in_range]
        if len(rest) == 0:
            continue
        pairs += len(rest)
        gsum = gs.values[k - gs.k_min, x] + gs.values[k - gs.k_min, rest]
        num = np.abs(f[rest] - f[x])
        denom = d ** s * gsum
        okay = denom > 0
        if np.any(okay):
            best = max(best, float(np.max(num[okay] / denom[okay])))
        bad += int(np.sum(~okay & (num > floor)))
    return ValidityReport(constant=best, violations=bad, pairs=pairs)


def cutoff(space, mask, start=4.0, end=8.0):
    """Lipschitz cutoff: 1 on the mask, 0 beyond distance `end`.

    Returns (psi, L, k_cut) where L = 1/(end - start) is the Lipschitz
    constant and k_cut is the scale with 2**(k_cut - 1) < L <= 2**k_cut.
    """
    if not 0 <= start < end:
        raise ValueError("need 0 <= start < end")
    dist = distance_to_mask(space, mask)
    psi = np.clip((end - dist) / (end - start), 0.0, 1.0)
    lip = 1.0 / (end - start)
    k_cut = int(math.ceil(math.log2(lip)))
    return psi, lip, k_cut


def combine_cutoff(etilde, gs, psi, lip, k_cut, s):
    """Multiply by the cutoff and fold its Lipschitz cost into the
    coefficients: below the cutoff scale the price is 4 * 2**(s k) |f|,
    above it 2**(k(s-1)) L |f|, both restricted to the cutoff support."""
    etilde = np.asarray(etilde, dtype=float)
    support = psi > 0
    eu = psi * etilde
    out = np.empty_like(gs.values)
    for a, k in enumerate(gs.k_range):
        if k < k_cut:
            extra = 2.0 ** (s * k + 2) * np.abs(etilde)
        else:
            extra = 2.0 ** (k * (s - 1.0)) * lip * np.abs(etilde)
        out[a] = np.where(support, gs.values[a] + extra, 0.0)
    return eu, GradientSequence(gs.k_min, out, s)


class WhitneyExtension(BaseEstimator):
    """Extension operator with a fit/transform interface.

    fit builds the Whitney cover, partition of unity, and cutoff for a
    (space, mask) pair; transform extends functions given on the mask.
    With method="average" the fitted operator is linear.
    """

    def __init__(self, s=0.5, p=2.0, q=2.0, method="median", delta=None,
                 eps_prime=None, t_inner=None, v_radius=8.0,
                 cutoff_start=None, cutoff_end=None):
        self.s = s
        self.p = p
        self.q = q
        self.method = method
        self.delta = delta
        self.eps_prime = eps_prime
        self.t_inner = t_inner
        self.v_radius = v_radius
        self.cutoff_start = cutoff_start
        self.cutoff_end = cutoff_end

    def _params(self):
        return ExtensionParams(s=self.s, p=self.p, q=self.q, method=self.method,
                               delta=self.delta, eps_prime=self.eps_prime,
                               t_inner=self.t_inner, v_radius=self.v_radius,
                               cutoff_start=self.cutoff_start,
                               cutoff_end=self.cutoff_end)

    def fit(self, space, mask):
        params = self._params()
        self.space_ = space
        self.mask_ = mask
        self.cover_ = whitney_cover(space, mask)
        self.pou_ = partition_of_unity(space, self.cover_)
        self.psi_, self.lipschitz_, self.k_cut_ = cutoff(
            space, mask, params.cutoff_start, params.cutoff_end)
        self.v_members_ = self.cover_.boundary_distance < params.v_radius
        self.params_ = params
        return self

    def transform(self, u):
        """Extend u (given on the mask members) to the whole space."""
        etilde = local_extend(u, self.mask_, self.space_, self.cover_,
                              self.pou_, self.params_.method)
        eu = self.psi_ * etilde
        eu[self.mask_.members] = np.asarray(u, dtype=float)[self.mask_.members]
        return eu

    def fit_transform(self, space, mask, u):
        return self.fit(space, mask).transform(u)

    def extend(self, u, with_gradient=True, compute_norms=False):
        """Full pipeline report for one function."""
        params = self.params_
        space, mask = self.space_, self.mask_
        etilde = local_extend(u, mask, space, self.cover_, self.pou_,
                              params.method)
        eu = self.psi_ * etilde
        eu[mask.members] = np.asarray(u, dtype=float)[mask.members]
        gradient = final = None
        val_local = val_global = None
        if with_gradient:
            gs = canonical_gradient(u, mask, params.s)
            gradient = extension_gradient(gs, space, params)
            val_local = validity_constant(etilde, gradient, space,
                                          space.subset(self.v_members_))
            _, final = combine_cutoff(etilde, gradient, self.psi_,
                                      self.lipschitz_, self.k_cut_, params.s)
            val_global = validity_constant(eu, final, space)
        norms_in = norms_out = None
        if compute_norms:
            sp = params.smoothness()
            norms_in = hajlasz_norms(u, mask, sp)
            norms_out = hajlasz_norms(eu, space, sp)
        return ExtensionResult(
            eu=eu, etilde=etilde, psi=self.psi_, gradient=gradient,
            final_gradient=final, validity_local=val_local,
            validity_global=val_global, lipschitz=self.lipschitz_,
            k_cut=self.k_cut_, v_members=self.v_members_,
            norms_input=norms_in, norms_output=norms_out,
            meta={"balls": self.cover_.n_balls,
                  "overlap": self.cover_.overlap_bound,
                  "method": params.method})


def extend(u, mask, params, with_gradient=True, compute_norms=False):
    """One-shot extension of u from the mask to its parent space."""
    op = WhitneyExtension(s=params.s, p=params.p, q=params.q,
                          method=params.method, delta=params.delta,
                          eps_prime=params.eps_prime, t_inner=params.t_inner,
                          v_radius=params.v_radius,
                          cutoff_start=params.cutoff_start,
                          cutoff_end=params.cutoff_end)
    op.fit(mask.space, mask)
    return op.extend(u, with_gradient=with_gradient, compute_norms=compute_norms)
