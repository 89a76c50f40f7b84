"""Acceptance gate: one check and one printed pass/fail line per criterion."""

import json

import numpy as np
import pytest

import besovext as bx
from besovext import cli
from besovext.norms import SmoothnessParams, canonical_gradient


@pytest.fixture
def emit(capsys):
    """Print one pass/fail line per criterion, bypassing output capture."""
    def _emit(num, label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {label}"
        if detail:
            line += f" — {detail}"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line
    return _emit


@pytest.fixture(scope="module")
def regular_sets():
    """Three regular subsets of a common ambient grid, with fitted operators."""
    space = bx.build_grid(1.0 / 8.0, ([-1.0, -1.0], [2.0, 2.0]))
    regions = {
        "square": bx.box_region([0.0, 0.0], [1.0, 1.0]),
        "carpet": bx.make_carpet(2, [0.25, 0.0625]),
        "strip": bx.box_region([-1.0, 0.0], [2.0, 0.5]),
    }
    fitted = {}
    for name, region in regions.items():
        mask = space.subset(region)
        est = bx.WhitneyExtension(s=0.5, p=2.0, q=2.0).fit(space, mask)
        fitted[name] = (mask, est)
    return space, fitted


def test_c01_restriction_identity(regular_sets, emit):
    space, fitted = regular_sets
    rng = np.random.default_rng(101)
    checked = exact = 0
    for _ in range(50):
        u = rng.standard_normal(space.n_points)
        for mask, est in fitted.values():
            res = est.extend(u, with_gradient=False)
            checked += 1
            exact += np.array_equal(res.eu[mask.members], u[mask.members])
    emit(1, "restriction identity, bitwise", exact == checked,
         f"{exact}/{checked} extensions restrict exactly")


def test_c02_median_defect_bound(emit):
    rng = np.random.default_rng(202)
    failures = 0
    for _ in range(10000):
        n = int(rng.integers(1, 13))
        sample = bx.WeightedSample(rng.standard_normal(n),
                                   rng.uniform(0.1, 2.0, n))
        center = float(rng.standard_normal())
        eta = float(rng.uniform(0.05, 1.0))
        lhs, rhs = bx.median_defect(sample, center, eta)
        if lhs > rhs * (1.0 + 1e-12):
            failures += 1
    emit(2, "median defect bound on 10000 triples", failures == 0,
         f"{failures} failures")


def _cover_invariants(space, mask, cover, pou):
    comp = ~mask.members
    centers = cover.centers
    radii = cover.radii
    dist = bx.distance_to_mask(space, mask)
    ok = bool(np.all(comp[centers]))
    ok &= np.allclose(radii, dist[centers] / 10.0, rtol=1e-12, atol=0.0)
    pts = space.points[centers]
    gap = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(gap, np.inf)
    sep = (radii[:, None] + radii[None, :]) / 5.0
    ok &= bool(np.all(gap >= sep - 1e-12))
    covered = np.zeros(space.n_points, dtype=bool)
    counts = np.zeros(space.n_points, dtype=int)
    for c, r in zip(centers, radii):
        ball = space.ball(int(c), 5.0 * r)
        covered[ball] = True
        counts[ball] += 1
    ok &= bool(np.all(covered[comp]))
    ok &= int(counts[comp].max()) == cover.overlap_bound
    phi = pou.phi.toarray()
    for i, (c, r) in enumerate(zip(centers, radii)):
        idx = np.flatnonzero(phi[i] > 0.0)
        if idx.size:
            d = np.sqrt(((space.points[idx] - space.points[c]) ** 2).sum(-1))
            ok &= bool(np.all(d < 2.0 * r))
    sums = pou.column_sums()
    ok &= float(np.max(np.abs(sums[comp] - 1.0))) <= 1e-12
    ok &= bool(np.allclose(sums[mask.members], 0.0))
    ok &= pou.lipschitz_factor == 1 + 6 * cover.overlap_bound
    return ok


def test_c03_whitney_invariants(regular_sets, emit):
    space, fitted = regular_sets
    instances = [(space, mask, est.cover_, est.pou_)
                 for mask, est in fitted.values()]
    cusp_space = bx.build_grid(1.0 / 16.0, ([-1.25, -1.25], [2.25, 2.25]))
    cusp_mask = cusp_space.subset(bx.make_cusp(2.0))
    cusp_cover = bx.whitney_cover(cusp_space, cusp_mask)
    instances.append((cusp_space, cusp_mask, cusp_cover,
                      bx.partition_of_unity(cusp_space, cusp_cover)))
    line = bx.build_grid(0.2, ([0.0], [6.0]))
    line_mask = line.subset(bx.box_region([0.0], [1.0]))
    line_cover = bx.whitney_cover(line, line_mask)
    instances.append((line, line_mask, line_cover,
                      bx.partition_of_unity(line, line_cover)))
    ok = all(_cover_invariants(*inst) for inst in instances)
    emit(3, "Whitney cover and partition invariants", ok,
         f"{len(instances)} covers checked")


def test_c04_gradient_validity(regular_sets, emit):
    rng = np.random.default_rng(404)
    ok = True
    for i in range(50):
        n = int(rng.integers(6, 21))
        cloud = bx.MetricMeasureSpace(points=rng.random((n, 2)),
                                      weights=rng.uniform(0.5, 2.0, n))
        s = float(rng.uniform(0.1, 0.9))
        u = rng.standard_normal(n)
        if i % 2:
            members = np.zeros(n, dtype=bool)
            members[rng.choice(n, size=n // 2 + 1, replace=False)] = True
            target = cloud.subset(members)
        else:
            target = cloud
        gs = canonical_gradient(u, target, s)
        region = target if isinstance(target, bx.SubsetMask) else None
        rep = bx.validity_constant(u, gs, cloud, region=region)
        ok &= rep.constant <= 1.0 + 1e-9 and rep.violations == 0
    space, fitted = regular_sets
    extension_ok = True
    for mask, est in fitted.values():
        res = est.extend(rng.standard_normal(space.n_points))
        extension_ok &= np.isfinite(res.validity_global.constant)
        extension_ok &= res.validity_global.violations == 0
        extension_ok &= np.isfinite(res.validity_local.constant)
        extension_ok &= res.validity_local.violations == 0
    emit(4, "pointwise gradient validity", ok and extension_ok,
         "50 canonical instances, 3 extension instances")


def test_c05_oracle_sandwich(emit):
    rng = np.random.default_rng(2024)
    worst = 0.0
    ok = True
    for i in range(30):
        n = int(rng.integers(4, 17))
        space = bx.MetricMeasureSpace(points=rng.random((n, 2)),
                                      weights=rng.uniform(0.5, 2.0, n))
        s = float(rng.uniform(0.2, 0.8))
        p = 1.0 if i % 2 == 0 else 2.0
        q = p if i % 4 < 2 else np.inf
        u = rng.standard_normal(n)
        report = bx.hajlasz_norms(u, space, SmoothnessParams(s, p, q),
                                  oracle_cap=64)
        for base in ("tl", "besov", "single"):
            upper = report.values[f"{base}_gradient"]
            inf_v = report.values[f"{base}_gradient_infimum"]
            ok &= inf_v <= upper * (1.0 + 1e-9)
            ok &= upper <= 4.0 * inf_v
            if inf_v > 0:
                worst = max(worst, upper / inf_v)
    emit(5, "convex-program infimum sandwich", ok,
         f"worst canonical/infimum factor {worst:.3f} <= 4")


def test_c06_norm_chains(emit):
    rng = np.random.default_rng(606)
    spaces = [
        (bx.build_grid(1.0 / 8.0, ([0.0, 0.0], [1.0, 1.0])),
         bx.box_region([0.0, 0.0], [0.75, 0.75])),
        (bx.build_grid(1.0 / 8.0, ([0.0], [1.5])),
         bx.box_region([0.0], [1.0])),
    ]
    ts = [0.25, 0.5, 1.0]
    ok = True
    for space, sub in spaces:
        mask = space.subset(sub)
        for params in (SmoothnessParams(0.5, 2.0, 2.0, r=1.0),
                       SmoothnessParams(0.3, 1.5, 3.0, r=0.5)):
            for _ in range(4):
                u = rng.standard_normal(space.n_points)
                cen = bx.besov_modulus_norm(u, space, params, "centered", ts)
                avg = bx.besov_modulus_norm(u, space, params, "averaged", ts)
                tra = bx.besov_modulus_norm(u, space, params, "translation", ts)
                ok &= cen <= avg * (1.0 + 1e-12)
                ok &= avg <= tra * (1.0 + 1e-12)
                inner = bx.scale_average_profile(u, mask, params, "interior",
                                                 ts, tau=0.5)
                cen_p = bx.scale_average_profile(u, mask, params, "centered", ts)
                avg_p = bx.scale_average_profile(u, mask, params, "averaged", ts)
                ok &= bool(np.all(inner <= cen_p * (1.0 + 1e-12) + 1e-15))
                ok &= bool(np.all(cen_p <= avg_p * (1.0 + 1e-12) + 1e-15))
    emit(6, "modulus norm chains, 1e-12 relative", ok,
         "2 grids x 2 parameter sets x 4 functions")


def _smooth_field(space, coeffs):
    pts = space.points
    c = np.asarray(coeffs, dtype=float)
    return (np.cos(pts @ (c[:2] + [2.0, 1.0]))
            + 0.5 * np.sin(pts @ (c[2:4] + [1.0, 3.0])))


def test_c07_k_functional_bracket(emit):
    ts = 1.0 / 2.0 ** np.arange(8)
    consts = {}
    for h in (1.0 / 8.0, 1.0 / 16.0):
        space = bx.build_grid(h, ([0.0, 0.0], [1.0, 1.0]))
        rng = np.random.default_rng(11)
        c1 = c2 = 0.0
        for _ in range(20):
            u = _smooth_field(space, rng.normal(size=4))
            prof = bx.k_profile(u, space, 2.0, ts)
            pos = prof.achieved > 0
            c1 = max(c1, float(np.max(prof.lower[pos] / prof.achieved[pos])))
            up = prof.upper > 0
            c2 = max(c2, float(np.max(prof.achieved[up] / prof.upper[up])))
        consts[h] = (c1, c2)
    (c1a, c2a), (c1b, c2b) = consts[1.0 / 8.0], consts[1.0 / 16.0]
    ok = all(np.isfinite([c1a, c2a, c1b, c2b]))
    ok &= 0.5 < c1a / c1b < 2.0 and 0.5 < c2a / c2b < 2.0
    emit(7, "split-cost bracket constants refine stably", ok,
         f"C1 {c1a:.3f}->{c1b:.3f}, C2 {c2a:.3f}->{c2b:.3f}")


def test_c08_lorentz_embedding(emit):
    params = SmoothnessParams(0.5, 1.0, 1.0)
    worst = {}
    for h in (1.0 / 8.0, 1.0 / 16.0):
        space = bx.build_grid(h, ([0.0, 0.0], [1.0, 1.0]))
        rng = np.random.default_rng(5)
        ratios = []
        for _ in range(20):
            u = _smooth_field(space, rng.normal(size=4))
            rep = bx.lorentz_embedding_check(u, space, params, dimension=2.0)
            ratios.append(rep.ratio)
        worst[h] = max(ratios)
    ok = all(np.isfinite(v) for v in worst.values())
    stability = worst[1.0 / 8.0] / worst[1.0 / 16.0]
    ok &= 0.5 < stability < 2.0
    emit(8, "Lorentz embedding ratio finite and refine-stable", ok,
         f"worst lhs/rhs {worst[1.0 / 8.0]:.3f} vs {worst[1.0 / 16.0]:.3f}")


def test_c09_density_discrimination(emit):
    radii = np.geomspace(0.125, 1.0, 9)
    space = bx.build_grid(1.0 / 8.0, ([-1.125, -1.125], [2.125, 2.125]))
    square = bx.check_measure_density(
        space, space.subset(bx.box_region([0.0, 0.0], [1.0, 1.0])),
        0.05, radii=radii)
    carpet = bx.check_measure_density(
        space, space.subset(bx.make_carpet(2, [0.25, 0.0625])),
        0.05, radii=radii)
    slit_space = bx.build_grid(1.0 / 8.0, ([-2.0625, -2.0625], [2.0625, 2.0625]))
    slit = bx.check_measure_density(
        slit_space, slit_space.subset(bx.make_slit_disc()),
        0.05, radii=np.geomspace(0.125, 1.0, 7))
    cusp = bx.make_cusp(2.0)
    tip_worst = {}
    for h in (1.0 / 16.0, 1.0 / 32.0):
        ambient = bx.build_grid(h, ([-1.25, -1.25], [2.25, 2.25]))
        mask = ambient.subset(cusp)
        tip = mask.indices[ambient.points[mask.indices][:, 0] <= 0.2]
        rep = bx.check_measure_density(ambient, mask, 0.05,
                                       radii=np.geomspace(0.125, 1.0, 7),
                                       centers=tip, boundary_margin=0.0)
        tip_worst[h] = rep.worst_ratio
    ok = square.passed and carpet.passed and slit.passed
    ok &= tip_worst[1.0 / 32.0] < tip_worst[1.0 / 16.0]
    emit(9, "measure density discriminates the cusp", ok,
         f"square {square.worst_ratio:.3f}, carpet {carpet.worst_ratio:.3f}, "
         f"slit {slit.worst_ratio:.3f} pass; cusp tip "
         f"{tip_worst[1.0 / 16.0]:.3f} -> {tip_worst[1.0 / 32.0]:.3f}")


def test_c10_average_extension_linearity(regular_sets, emit):
    space, fitted = regular_sets
    mask, _ = fitted["square"]
    est = bx.WhitneyExtension(s=0.5, p=2.0, q=2.0, method="average")
    est.fit(space, mask)
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(10):
        u = rng.standard_normal(space.n_points)
        v = rng.standard_normal(space.n_points)
        a, b = rng.standard_normal(2)
        lhs = est.extend(a * u + b * v, with_gradient=False).eu
        rhs = (a * est.extend(u, with_gradient=False).eu
               + b * est.extend(v, with_gradient=False).eu)
        scale = max(float(np.max(np.abs(rhs))), 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    emit(10, "average-method extension is linear", worst <= 1e-12,
         f"worst superposition error {worst:.2e}")


def test_c11_cli_determinism(tmp_path, emit):
    config = {
        "domain": {"kind": "grid", "spacing": 0.25,
                   "bbox": [[-1.0, -1.0], [2.0, 2.0]]},
        "mask": {"name": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
        "params": {"s": 0.5, "p": 1.0, "q": 1.0},
        "t_grid": {"max": 1.0, "min": 0.25},
        "dimension": 2.0,
        "radii": {"min": 0.25, "max": 1.0},
        "functions": [
            {"kind": "constant", "value": 1.0},
            {"kind": "coordinate", "axis": 0},
            {"kind": "random-smooth", "count": 1},
        ],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    runs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        out.mkdir()
        for command in ("norms", "extend", "density", "kfunc", "embed"):
            code = cli.main([command, "--config", str(path),
                             "--out", str(out), "--seed", "7"])
            assert code == 0
        runs.append({f.name: f.read_bytes() for f in out.iterdir()})
    ok = set(runs[0]) == set(runs[1]) and len(runs[0]) >= 5
    ok &= all(runs[0][name] == runs[1][name] for name in runs[0])
    emit(11, "CLI outputs byte-identical across reruns", ok,
         f"{len(runs[0])} artifacts compared")
