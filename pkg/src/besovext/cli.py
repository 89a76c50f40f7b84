"""Command line front end: norms, extend, density, kfunc, embed.

Each subcommand reads an experiment config (JSON), writes CSV/JSON
reports into the output directory, and is byte-deterministic for a fixed
config and seed.  Exit codes: 0 success, 2 config errors, 3 geometry
errors.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .extend import ExtensionParams, WhitneyExtension
from .geometry import check_measure_density, log_radii
from .interp import interpolation_norm, k_profile, lorentz_embedding_check
from .norms import SmoothnessParams, besov_modulus_norm, hajlasz_norms
from .regions import region_from_spec
from .space import GeometryError, build_grid, load_domain

CONFIG_EXIT = 2
GEOMETRY_EXIT = 3


class ConfigError(ValueError):
    pass


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _domain_spec(cfg, refine_level=0):
    if "domain" not in cfg:
        raise ConfigError("config needs a 'domain' entry")
    spec = dict(cfg["domain"])
    if refine_level and spec.get("kind") == "grid":
        spec = dict(spec, spacing=spec["spacing"] / 2 ** refine_level)
    return spec


def _build_space(cfg, refine_level=0):
    try:
        return load_domain(_domain_spec(cfg, refine_level))
    except GeometryError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _mask(cfg, space):
    if "mask" not in cfg:
        return None
    try:
        return space.subset(region_from_spec(cfg["mask"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _params(cfg):
    raw = cfg.get("params", {})
    try:
        return SmoothnessParams(s=raw.get("s", 0.5), p=raw.get("p", 2.0),
                                q=raw.get("q", math.inf) or math.inf,
                                r=raw.get("r"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _extension_params(cfg):
    raw = cfg.get("params", {})
    try:
        return ExtensionParams(
            s=raw.get("s", 0.5), p=raw.get("p", 2.0),
            q=raw.get("q", math.inf) or math.inf,
            method=cfg.get("method", "median"),
            delta=raw.get("delta"), eps_prime=raw.get("eps_prime"),
            t_inner=raw.get("t_inner"), v_radius=raw.get("v_radius", 8.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _t_grid(cfg, space):
    raw = cfg.get("t_grid", {})
    t_max = raw.get("max", 1.0)
    if "min" in raw:
        t_min = raw["min"]
    elif space.grid is not None:
        t_min = 4 * space.grid.spacing
    else:
        t_min = space.min_gap * 4
    if not 0 < t_min <= t_max:
        raise ConfigError("t grid needs 0 < min <= max")
    count = int(math.floor(math.log2(t_max / t_min))) + 1
    return t_max / 2.0 ** np.arange(count)[::-1]


def _functions(cfg, space, seed):
    """Deterministic corpus of sample functions on the space."""
    specs = cfg.get("functions")
    if not specs:
        raise ConfigError("config needs a nonempty 'functions' list")
    out = []
    for idx, spec in enumerate(specs):
        kind = spec.get("kind")
        if kind == "constant":
            out.append((f"constant_{idx}",
                        np.full(space.n_points, float(spec.get("value", 1.0)))))
        elif kind == "coordinate":
            axis = int(spec.get("axis", 0))
            if space.points is None or axis >= space.points.shape[1]:
                raise ConfigError("coordinate function needs that axis")
            out.append((f"coordinate_{idx}", space.points[:, axis].copy()))
        elif kind == "indicator":
            region = region_from_spec(spec["region"])
            out.append((f"indicator_{idx}",
                        region.contains(space.points).astype(float)))
        elif kind == "random-smooth":
            count = int(spec.get("count", 1))
            for rep in range(count):
                rng = np.random.default_rng([seed, idx, rep])
                out.append((f"smooth_{idx}_{rep}",
                            _random_smooth(space, rng)))
        else:
            raise ConfigError(f"unknown function kind {kind!r}")
    return out


def _random_smooth(space, rng, modes=4):
    pts = space.points
    span = np.ptp(pts, axis=0)
    span[span == 0] = 1.0
    u = np.zeros(space.n_points)
    for _ in range(modes):
        freq = rng.integers(0, 3, size=pts.shape[1])
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.normal()
        u += amp * np.cos(2 * np.pi * (pts / span) @ freq + phase)
    return u


def _write_rows(path, header, columns, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = [c if isinstance(c, str) else f"{c:.17g}" for c in row]
            fh.write(",".join(cells) + "\n")


def _header(cfg, extra=""):
    p = cfg.get("params", {})
    q = p.get("q", "inf")
    base = (f"# besovext {__version__} s={p.get('s', 0.5)} p={p.get('p', 2.0)} "
            f"q={q if q else 'inf'}")
    return base + (f" {extra}" if extra else "")


def cmd_norms(cfg, out, seed, refine):
    params = _params(cfg)
    rows = []
    for level in range(refine + 1):
        space = _build_space(cfg, level)
        mask = _mask(cfg, space)
        target = mask if mask is not None else space
        ts = _t_grid(cfg, space)
        for name, u in _functions(cfg, space, seed):
            report = hajlasz_norms(u, target, params,
                                   oracle_cap=cfg.get("oracle_cap", 0))
            for key in sorted(report.values):
                rows.append((name, str(level), key, report.values[key]))
            for variant in ("averaged", "centered"):
                val = besov_modulus_norm(u, target, params, variant, ts)
                rows.append((name, str(level), f"modulus_{variant}", val))
            if space.grid is not None:
                val = besov_modulus_norm(u, target, params, "translation", ts)
                rows.append((name, str(level), "modulus_translation", val))
    _write_rows(out / "norms.csv", _header(cfg), ("function", "level", "name", "value"),
                rows)
    return 0


def cmd_extend(cfg, out, seed, refine):
    params = _extension_params(cfg)
    rows = []
    status = 0
    for level in range(refine + 1):
        space = _build_space(cfg, level)
        mask = _mask(cfg, space)
        if mask is None:
            raise ConfigError("extend needs a 'mask' region")
        if mask.size == 0:
            raise GeometryError("mask has no members")
        from .space import distance_to_mask
        dist = distance_to_mask(space, mask)
        if float(dist.max()) >= params.v_radius:
            print("complement not covered by V", file=sys.stderr)
            return GEOMETRY_EXIT
        op = WhitneyExtension(s=params.s, p=params.p, q=params.q,
                              method=params.method, delta=params.delta,
                              eps_prime=params.eps_prime,
                              t_inner=params.t_inner,
                              v_radius=params.v_radius)
        op.fit(space, mask)
        for name, u in _functions(cfg, space, seed):
            res = op.extend(u, with_gradient=True, compute_norms=True)
            restricted = np.array_equal(res.eu[mask.members], u[mask.members])
            if not restricted or res.validity_global.violations:
                status = 1
            rows.append((name, str(level), "restriction_exact", float(restricted)))
            rows.append((name, str(level), "validity_local",
                         res.validity_local.constant))
            rows.append((name, str(level), "validity_global",
                         res.validity_global.constant))
            rows.append((name, str(level), "violations",
                         float(res.validity_global.violations)))
            for key in sorted(res.norms_input.values):
                rows.append((name, str(level), f"input_{key}",
                             res.norms_input.values[key]))
            for key in sorted(res.norms_output.values):
                rows.append((name, str(level), f"output_{key}",
                             res.norms_output.values[key]))
    _write_rows(out / "extend.csv", _header(cfg, f"method={params.method}"),
                ("function", "level", "name", "value"), rows)
    return status


def cmd_density(cfg, out, seed, refine):
    threshold = cfg.get("c_m", 0.05)
    raw = cfg.get("radii", {})
    results = {}
    for level in range(refine + 1):
        space = _build_space(cfg, level)
        mask = _mask(cfg, space)
        if mask is None or mask.size == 0:
            raise GeometryError("density needs a nonempty 'mask' region")
        radii = None
        if raw:
            radii = log_radii(raw.get("min", 0.05), raw.get("max", 1.0),
                              raw.get("per_decade", 16))
        report = check_measure_density(
            space, mask, threshold, radii=radii,
            boundary_margin=cfg.get("boundary_margin", 1.0))
        results[f"level_{level}"] = report.to_dict()
    with open(out / "density.json", "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
    return 0


def cmd_kfunc(cfg, out, seed, refine):
    params = _params(cfg)
    for level in range(refine + 1):
        space = _build_space(cfg, level)
        ts = _t_grid(cfg, space)
        for name, u in _functions(cfg, space, seed):
            profile = k_profile(u, space, params.p, ts)
            norm = interpolation_norm(profile, params.s, params.q)
            header = _header(cfg, f"function={name} level={level} "
                                  f"interpolation_norm={norm:.17g}")
            profile.write_csv(out / f"kfunc_{name}_l{level}.csv", header)
    return 0


def cmd_embed(cfg, out, seed, refine):
    params = _params(cfg)
    rows = []
    for level in range(refine + 1):
        space = _build_space(cfg, level)
        for name, u in _functions(cfg, space, seed):
            try:
                report = lorentz_embedding_check(u, space, params,
                                                 dimension=cfg.get("dimension"))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            rows.append((name, str(level), report.lhs, report.rhs,
                         report.ratio, report.p_star))
    _write_rows(out / "embed.csv", _header(cfg),
                ("function", "level", "lhs", "rhs", "ratio", "p_star"), rows)
    return 0


_COMMANDS = {
    "norms": cmd_norms,
    "extend": cmd_extend,
    "density": cmd_density,
    "kfunc": cmd_kfunc,
    "embed": cmd_embed,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="besovext",
        description="Fractional smoothness toolkit on finite metric measure spaces")
    parser.add_argument("--version", action="version",
                        version=f"besovext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="experiment config JSON")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=0, help="corpus seed")
        cmd.add_argument("--refine", type=int, default=0,
                         help="extra dyadic refinement levels")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed else cfg.get("seed", 0)
        return _COMMANDS[args.command](cfg, out, seed, max(0, args.refine))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return GEOMETRY_EXIT


if __name__ == "__main__":
    sys.exit(main())
