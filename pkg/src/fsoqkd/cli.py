"""Command-line front end.

Subcommands: ``sweep``, ``wavefront``, ``optimal-distance``, ``optimize-d``,
``before-bob``, ``cache``.  All outputs are deterministic: identical configs
produce byte-identical files regardless of thread count.

Exit codes: 0 on success, 1 when computational error rows were recorded, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .beams import BeamParams
from .cache import CACHE_ENV_VAR, ProfileDiskCache, default_cache_dir
from .channel import Scenario, channel_params
from .config import ConfigError, RunConfig
from .diffraction import DiskSpec, SourceAnnulus
from .rates import RateInputs, rate_report
from .recipes import Recipe, RecipeItem, build_recipe, recipe_names
from .sweeps import (ProfileCache, SweepRow, SweepSpec, arago_prediction_curve,
                     optimal_eve_distance, optimize_eve_offset, run_sweep)

CSV_HEADER = ["parameter", "eta", "kappa", "P_Bob", "P_Eve", "lb_direct",
              "lb_reverse", "lb", "ub", "skr_cv", "skr_bb84", "optimal_mu",
              "D_opt", "error"]


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _row_cells(row: SweepRow) -> list[str]:
    if row.error is not None:
        return [_fmt(row.value)] + [""] * 12 + [row.error]
    ch, rep = row.channel, row.report
    return [
        _fmt(row.value), _fmt(ch.eta), _fmt(ch.kappa), _fmt(ch.p_bob),
        _fmt(ch.p_eve), _fmt(rep.lb_direct), _fmt(rep.lb_reverse),
        _fmt(rep.lb), _fmt(rep.ub), _fmt(rep.skr_cv), _fmt(rep.skr_bb84),
        _fmt(rep.optimal_mu), _fmt(row.d_opt), "",
    ]


def write_rows_csv(path: Path, rows) -> int:
    """Write sweep rows; returns the number of error rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    errors = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            if row.error is not None:
                errors += 1
            writer.writerow(_row_cells(row))
    return errors


def _make_cache(config: RunConfig, cache_override: str | None) -> ProfileCache:
    cache_dir = cache_override or config.cache_dir or default_cache_dir()
    if cache_dir:
        disk = ProfileDiskCache(cache_dir)
        return ProfileCache(compute=disk.get_or_compute)
    return ProfileCache()


def _sweep_spec(config: RunConfig) -> SweepSpec:
    geom = config.geometry()
    beam = config.beam()
    noise = config.noise()
    # channel placeholder: rows recompute it; only n_e is read from here
    from .channel import ChannelParams

    rates = RateInputs(channel=ChannelParams(0.5, 0.5, noise, 0.5, 0.25),
                       mu=config.mu, beta=config.beta, f_L=config.f_L,
                       pulse_rate=config.pulse_rate)
    return SweepSpec(parameter=config.sweep_parameter, minimum=config.sweep_min,
                     maximum=config.sweep_max, count=config.sweep_count,
                     spacing=config.sweep_spacing, geometry=geom, beam=beam,
                     rates=rates, optimize_power=config.optimize_mu,
                     objective=config.objective,
                     tie_bob_eve_to_link=config.tie_bob_eve_to_link)


def _out_path(out_dir: str, name: str, label: str, suffix: str = ".csv") -> Path:
    return Path(out_dir) / f"{name}__{label}{suffix}"


def cmd_sweep(config: RunConfig, out_dir: str, name: str, label: str,
              cache: ProfileCache, threads: int) -> int:
    spec = _sweep_spec(config)
    rows = run_sweep(spec, cache=cache, threads=threads)
    errors = write_rows_csv(_out_path(out_dir, name, label), rows)
    if config.emit_arago_overlay and spec.parameter == "L_BE" \
            and config.scenario == "behind_bob" and config.eve_offset == 0.0:
        overlay = arago_prediction_curve(spec.geometry, spec.beam, spec.rates,
                                         spec.grid())
        errors += write_rows_csv(_out_path(out_dir, name, f"{label}_arago"), overlay)
    return errors


def cmd_before_bob(config: RunConfig, out_dir: str, name: str, label: str,
                   cache: ProfileCache, threads: int) -> int:
    """Sweep Eve's plane between Alice and Bob; the parameter column is the
    signed Bob-to-Eve distance (negative when Eve is before Bob)."""
    if config.scenario != "before_bob":
        raise ConfigError("before-bob command needs scenario = before_bob")
    spec = _sweep_spec(config)
    rows = run_sweep(spec, cache=cache, threads=threads)
    lab = config.alice_bob_distance
    signed = [replace(r, value=-(lab - r.value)) for r in rows]
    signed.sort(key=lambda r: r.value)
    return write_rows_csv(_out_path(out_dir, name, label), signed)


def cmd_combined_axis(items, out_dir: str, name: str, cache: ProfileCache,
                      threads: int) -> int:
    """Merge before-Bob (negative axis) and behind-Bob (positive) segments."""
    merged: dict[str, list[SweepRow]] = {}
    for item in items:
        spec = _sweep_spec(item.config)
        rows = run_sweep(spec, cache=cache, threads=threads)
        base, _, side = item.label.rpartition("_")
        if side == "before":
            lab = item.config.alice_bob_distance
            rows = [replace(r, value=-(lab - r.value)) for r in rows]
        merged.setdefault(base, []).extend(rows)
    errors = 0
    for base, rows in sorted(merged.items()):
        rows.sort(key=lambda r: r.value)
        errors += write_rows_csv(_out_path(out_dir, name, base), rows)
    return errors


def cmd_optimal_distance(config: RunConfig, out_dir: str, name: str, label: str,
                         cache: ProfileCache) -> int:
    geom = config.geometry()
    beam = config.beam()
    from .channel import ChannelParams

    rates = RateInputs(channel=ChannelParams(0.5, 0.5, config.noise(), 0.5, 0.25),
                       mu=config.mu, beta=config.beta, f_L=config.f_L,
                       pulse_rate=config.pulse_rate)
    result = optimal_eve_distance(geom, beam, rates,
                                  search_range=(config.sweep_min, config.sweep_max),
                                  n_coarse=max(200, config.sweep_count),
                                  cache=cache, objective=config.objective)
    rows = []
    for lbe, _ in ((result.distance, result.rate),) + result.secondary_minima:
        ch = channel_params(replace(geom, bob_eve_distance=lbe), beam,
                            config.noise(), profile_provider=cache.get_or_compute)
        rep = rate_report(replace(rates, channel=ch),
                          optimize=config.optimize_mu, objective=config.objective)
        rows.append(SweepRow(value=lbe, channel=ch, report=rep, d_opt=0.0))
    return write_rows_csv(_out_path(out_dir, name, label), rows)


def cmd_optimize_d(config: RunConfig, out_dir: str, name: str, label: str,
                   cache: ProfileCache) -> int:
    if config.scenario != "behind_bob":
        raise ConfigError("offset optimization needs scenario = behind_bob")
    geom = config.geometry()
    beam = config.beam()
    from .channel import ChannelParams

    rates = RateInputs(channel=ChannelParams(0.5, 0.5, config.noise(), 0.5, 0.25),
                       mu=config.mu, beta=config.beta, f_L=config.f_L,
                       pulse_rate=config.pulse_rate)
    spec = _sweep_spec(config)
    rows_opt, rows_axis = [], []
    for lbe in spec.grid():
        try:
            d_star, _ = optimize_eve_offset(geom, beam, rates, lbe, cache=cache)
            ch = channel_params(replace(geom, bob_eve_distance=lbe, eve_offset=d_star),
                                beam, config.noise(),
                                profile_provider=cache.get_or_compute)
            rep = rate_report(replace(rates, channel=ch),
                              optimize=config.optimize_mu, objective=config.objective)
            rows_opt.append(SweepRow(value=lbe, channel=ch, report=rep, d_opt=d_star))
            ch0 = channel_params(replace(geom, bob_eve_distance=lbe), beam,
                                 config.noise(), profile_provider=cache.get_or_compute)
            rep0 = rate_report(replace(rates, channel=ch0),
                               optimize=config.optimize_mu, objective=config.objective)
            rows_axis.append(SweepRow(value=lbe, channel=ch0, report=rep0, d_opt=0.0))
        except Exception as exc:
            err = f"{type(exc).__name__}: {exc}"
            rows_opt.append(SweepRow(value=lbe, channel=None, report=None, error=err))
            rows_axis.append(SweepRow(value=lbe, channel=None, report=None, error=err))
    errors = write_rows_csv(_out_path(out_dir, name, label), rows_opt)
    errors += write_rows_csv(_out_path(out_dir, name, f"{label}_d0"), rows_axis)
    return errors


def cmd_wavefront(config: RunConfig, out_dir: str, name: str, label: str,
                  cache: ProfileCache) -> int:
    if config.scenario != "behind_bob" or config.eve_offset != 0.0:
        raise ConfigError("wavefront maps are on-axis, behind-Bob only")
    beam = config.beam()
    src = SourceAnnulus(beam, config.alice_bob_distance, config.bob_radius)
    wf = config.wavefront
    if wf.pixels < 1 or wf.half_width <= 0:
        raise ConfigError("wavefront grid must have positive size")
    for dist in wf.distances:
        coverage = wf.half_width * math.sqrt(2.0) * 1.0001
        profile = cache.get_or_compute(src, dist, DiskSpec(coverage, 0.0))
        spline = profile.interpolator()
        axis = (np.linspace(-wf.half_width, wf.half_width, wf.pixels)
                if wf.pixels > 1 else np.array([0.0]))
        xx, yy = np.meshgrid(axis, axis)
        rho = np.hypot(xx, yy)
        mag = np.abs(spline(np.clip(rho, 0.0, profile.truncation_radius)))
        peak = mag.max()
        pixels = np.zeros_like(mag, dtype=">u2")
        if peak > 0:
            pixels = np.round(mag / peak * 65535.0).astype(">u2")
        tag = f"{label}_lbe{int(round(dist))}m"
        pgm = _out_path(out_dir, name, tag, suffix=".pgm")
        pgm.parent.mkdir(parents=True, exist_ok=True)
        with open(pgm, "wb") as handle:
            handle.write(f"P5\n{wf.pixels} {wf.pixels}\n65535\n".encode())
            handle.write(pixels.tobytes())
        with open(_out_path(out_dir, name, tag, suffix=".txt"), "w") as handle:
            handle.write(f"half_width_m {wf.half_width!r}\n"
                         f"pixels {wf.pixels}\n"
                         f"propagation_distance_m {dist!r}\n"
                         f"peak_field_amplitude {peak!r}\n")
        with open(_out_path(out_dir, name, tag, suffix=".csv"), "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["rho", "magnitude", "real", "imag"])
            for r, a in zip(profile.radial_nodes, profile.complex_amplitudes):
                writer.writerow([repr(float(r)), repr(abs(a)),
                                 repr(a.real), repr(a.imag)])
    return 0


def cmd_cache(args) -> int:
    cache_dir = args.cache or default_cache_dir()
    if not cache_dir:
        print(f"no cache directory; pass --cache or set {CACHE_ENV_VAR}",
              file=sys.stderr)
        return 2
    disk = ProfileDiskCache(cache_dir)
    if args.cache_action == "clear":
        removed = disk.clear()
        print(f"removed {removed} cached profiles")
    else:
        entries = disk.entries()
        print(f"{len(entries)} cached profiles in {disk.directory}")
        for entry in entries:
            print(f"  {entry.name}  {entry.stat().st_size} bytes")
    return 0


def _load_items(args) -> tuple[str, str, list[RecipeItem]]:
    if args.recipe:
        recipe = build_recipe(args.recipe, scale=args.scale)
        items = list(recipe.items)
        if args.max_points:
            items = [RecipeItem(i.label, replace(i.config, sweep_count=min(
                i.config.sweep_count, args.max_points))) for i in items]
        return recipe.name, recipe.kind, items
    if not args.config:
        raise ConfigError("either --config or --recipe is required")
    config = RunConfig.from_json(Path(args.config).read_text())
    if args.max_points:
        config = replace(config, sweep_count=min(config.sweep_count, args.max_points))
    return Path(args.config).stem, args.command.replace("-", "_"), \
        [RecipeItem("run", config)]


_KIND_FOR_COMMAND = {
    "sweep": ("sweep",),
    "wavefront": ("wavefront",),
    "optimal-distance": ("optimal_distance", "sweep"),
    "optimize-d": ("optimize_d",),
    "before-bob": ("before_bob", "combined_axis"),
}


def _run_command(args) -> int:
    name, kind, items = _load_items(args)
    if args.recipe and kind not in _KIND_FOR_COMMAND[args.command]:
        raise ConfigError(
            f"recipe {name!r} is of kind {kind!r}, not usable with '{args.command}'")
    out_dir = args.out or items[0].config.output_dir
    threads = args.threads or items[0].config.threads
    cache = _make_cache(items[0].config, args.cache)
    errors = 0
    if kind == "combined_axis":
        errors += cmd_combined_axis(items, out_dir, name, cache, threads)
    else:
        for item in items:
            cfg = item.config
            if args.command == "sweep":
                errors += cmd_sweep(cfg, out_dir, name, item.label, cache, threads)
            elif args.command == "wavefront":
                errors += cmd_wavefront(cfg, out_dir, name, item.label, cache)
            elif args.command == "optimal-distance":
                errors += cmd_optimal_distance(cfg, out_dir, name, item.label, cache)
            elif args.command == "optimize-d":
                errors += cmd_optimize_d(cfg, out_dir, name, item.label, cache)
            elif args.command == "before-bob":
                errors += cmd_before_bob(cfg, out_dir, name, item.label, cache, threads)
    if errors:
        print(f"{errors} error rows recorded", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsoqkd",
        description="Key-rate bounds over a free-space link with a movable "
                    "finite-aperture eavesdropper")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--recipe", choices=recipe_names(),
                       help="named canonical recipe")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--cache", help=f"profile cache directory "
                                       f"(default ${CACHE_ENV_VAR})")
        p.add_argument("--threads", type=int, default=0,
                       help="worker threads for sweep rows")
        p.add_argument("--max-points", type=int, default=0,
                       help="cap sweep grid sizes (smoke testing)")
        p.add_argument("--scale", type=float, default=1.0,
                       help="scale factor for recipe grid sizes")

    for cmd in ("sweep", "wavefront", "optimal-distance", "optimize-d",
                "before-bob"):
        add_common(sub.add_parser(cmd))

    cache_p = sub.add_parser("cache")
    cache_p.add_argument("cache_action", choices=["inspect", "clear"])
    cache_p.add_argument("--cache", help="cache directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "cache":
            return cmd_cache(args)
        return _run_command(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
