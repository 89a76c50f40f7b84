"""Planar region predicates used to carve domains out of rectangular grids."""

import numpy as np


class Region:
    """A named point-membership predicate on R^n."""

    def __init__(self, name, predicate, params=None):
        self.name = name
        self.predicate = predicate
        self.params = dict(params or {})

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return np.asarray(self.predicate(pts), dtype=bool)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"Region({self.name}{', ' + args if args else ''})"


def full_region():
    """Region containing every point."""
    return Region("all", lambda pts: np.ones(len(pts), dtype=bool))


def box_region(lo, hi):
    """Closed axis-aligned box [lo, hi]."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError("box needs lo <= hi of equal dimension")

    def _pred(pts):
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    return Region("box", _pred, {"lo": lo.tolist(), "hi": hi.tolist()})


def disc_region(center, radius):
    """Open disc of given center and radius."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    r = float(radius)
    if r <= 0:
        raise ValueError("disc radius must be positive")

    def _pred(pts):
        return np.sum((pts - c) ** 2, axis=1) < r * r

    return Region("disc", _pred, {"center": c.tolist(), "radius": r})


def halfplane_region(axis=1, threshold=0.0, side="below"):
    """Closed half-space {x_axis <= threshold} (or >= for side="above")."""
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")

    def _pred(pts):
        coord = pts[:, axis]
        return coord <= threshold if side == "below" else coord >= threshold

    return Region("halfplane", _pred,
                  {"axis": axis, "threshold": threshold, "side": side})


def make_carpet(levels, removal_fractions):
    """Generalized carpet in [0,1]^2 built on dyadic tiles.

    At level l (1-based) each of the 4**(l-1) closed tiles of side 2**(1-l)
    loses its central open square of side fraction removal_fractions[l-1].
    """
    fr = np.atleast_1d(np.asarray(removal_fractions, dtype=float))
    if levels < 1 or len(fr) != levels:
        raise ValueError("need one removal fraction per level")
    if np.any(fr <= 0) or np.any(fr >= 1):
        raise ValueError("removal fractions must lie in (0, 1)")

    def _pred(pts):
        x, y = pts[:, 0], pts[:, 1]
        keep = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        for lev in range(1, levels + 1):
            side = 2.0 ** (1 - lev)
            ntiles = 2 ** (lev - 1)
            lx = x / side - np.clip(np.floor(x / side), 0, ntiles - 1)
            ly = y / side - np.clip(np.floor(y / side), 0, ntiles - 1)
            half = fr[lev - 1] / 2.0
            hole = (np.abs(lx - 0.5) < half) & (np.abs(ly - 0.5) < half)
            keep &= ~hole
        return keep

    return Region("carpet", _pred,
                  {"levels": levels, "fractions": fr.tolist()})


def carpet_level_areas(removal_fractions):
    """Retained area after each level; holes of distinct levels are disjoint
    for fraction sequences with 2 f_l + f_{l+1} < 1, so each level subtracts
    exactly f_l**2."""
    fr = np.atleast_1d(np.asarray(removal_fractions, dtype=float))
    return (1.0 - np.cumsum(fr ** 2)).tolist()


def carpet_area(removal_fractions):
    """Total retained area of the carpet with the given fractions."""
    return carpet_level_areas(removal_fractions)[-1]


def make_slit_disc():
    """Open unit disc minus the slit [0, 1) x {0}.

    Grids over this region should use a bbox with a small positive y
    offset so no lattice row sits exactly on the slit.
    """

    def _pred(pts):
        x, y = pts[:, 0], pts[:, 1]
        in_disc = x * x + y * y < 1.0
        on_slit = (y == 0.0) & (x >= 0.0)
        return in_disc & ~on_slit

    return Region("slit_disc", _pred)


def make_cusp(beta):
    """Outward cusp domain {0 < x < 1, |y| < x**beta}; beta > 1 makes the
    tip at the origin thinner than any cone."""
    b = float(beta)
    if b <= 1:
        raise ValueError("cusp exponent must exceed 1")

    def _pred(pts):
        x, y = pts[:, 0], pts[:, 1]
        return (x > 0) & (x < 1) & (np.abs(y) < x ** b)

    return Region("cusp", _pred, {"beta": b})


_FACTORIES = {
    "all": lambda spec: full_region(),
    "box": lambda spec: box_region(spec["lo"], spec["hi"]),
    "disc": lambda spec: disc_region(spec["center"], spec["radius"]),
    "halfplane": lambda spec: halfplane_region(
        spec.get("axis", 1), spec.get("threshold", 0.0), spec.get("side", "below")),
    "carpet": lambda spec: make_carpet(spec["levels"], spec["fractions"]),
    "slit_disc": lambda spec: make_slit_disc(),
    "cusp": lambda spec: make_cusp(spec["beta"]),
}


def region_from_spec(spec):
    """Build a region from a domain-spec dictionary entry."""
    if not isinstance(spec, dict) or "name" not in spec:
        raise ValueError("region spec must be a dict with a 'name' entry")
    name = spec["name"]
    if name not in _FACTORIES:
        raise ValueError(f"unknown region {name!r}; known: {sorted(_FACTORIES)}")
    return _FACTORIES[name](spec)
