"""Weighted medians over balls and the averaged-defect inequality."""

import numpy as np


class WeightedSample:
    """Finite list of values with strictly positive weights."""

    def __init__(self, values, weights):
        v = np.asarray(values, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if len(v) == 0:
            raise ValueError("sample must be nonempty")
        if len(v) != len(w):
            raise ValueError("values and weights must have equal length")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(w)):
            raise ValueError("sample entries must be finite")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        self.values = v
        self.weights = w

    @property
    def total(self):
        return float(self.weights.sum())


def median(sample):
    """Largest attained value whose strictly-smaller mass is at most half
    the total; ties are merged before cumulating."""
    order = np.argsort(sample.values, kind="stable")
    vs = sample.values[order]
    ws = sample.weights[order]
    breaks = np.nonzero(np.diff(vs) > 0)[0]
    uniq = vs[np.append(breaks, len(vs) - 1)]
    group_w = np.add.reduceat(ws, np.append(0, breaks + 1))
    below = np.concatenate(([0.0], np.cumsum(group_w)[:-1]))
    ok = below <= ws.sum() / 2.0
    return float(uniq[ok][-1])


def median_on_ball(u, space, x, r, mask=None):
    """Median of u over the open ball B(x, r), optionally intersected with a mask."""
    ids = space.ball(x, r)
    if mask is not None:
        ids = ids[mask.members[ids]]
    if len(ids) == 0:
        raise ValueError("ball does not meet the mask")
    u = np.asarray(u, dtype=float)
    return median(WeightedSample(u[ids], space.weights[ids]))


def median_defect(sample, center, eta):
    """Both sides of the median defect bound at a reference value.

    Returns (|median - center|, (2 * avg |u - center|**eta)**(1/eta)); the
    left side never exceeds the right for eta in (0, 1].
    """
    eta = float(eta)
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    m = median(sample)
    avg = float((sample.weights * np.abs(sample.values - center) ** eta).sum())
    avg /= sample.total
    return abs(m - center), (2.0 * avg) ** (1.0 / eta)
