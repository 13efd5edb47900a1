"""Command-line front end.

Subcommands: effective, boundstates, quench, spectrum, dispersion.  Each
reads an optional INI config (section [run]), applies key=value overrides,
writes CSVs plus a JSON manifest into the output directory, and exits with
0 on success, 2 on configuration errors, 3 on numerical failures and 4 on
budget refusals.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .boundstates import Thresholds, classify, density_map
from .exact import MAX_SITES, BudgetError, PropagationError, run_quench
from .lattice import LatticeSpec
from .runio import (
    ConfigError,
    RunConfig,
    read_gaps_csv,
    read_timeseries_csv,
    write_assignments_csv,
    write_density_map,
    write_eigenvalues_csv,
    write_gaps_csv,
    write_manifest,
    write_peaks_csv,
    write_records_csv,
    write_spectrum_csv,
    write_timeseries_csv,
)
from .spectral import detect_peaks, fft_spectrum, match_gaps
from .sw import (
    SolverError,
    SWDegeneracyError,
    build_h2,
    diagonalize,
    dispersion,
    gap_table,
    solve_sectors,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_ini(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(args.set)
    if args.out is not None:
        cfg = cfg.with_overrides([f"output_dir={args.out}"])
    return cfg.validate()


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_effective(args) -> int:
    cfg = _load_config(args)
    lattice = LatticeSpec(cfg.L, cfg.alpha)
    out = _outdir(cfg)
    solutions = solve_sectors(lattice, cfg.J, cfg.g, cfg.sectors, mode=cfg.mode,
                              identify_inversion=cfg.identify_inversion,
                              eps_sw=cfg.eps_sw)
    outputs = []
    for nu, sol in solutions.items():
        path = out / f"eigenvalues_nu{nu}.csv"
        write_eigenvalues_csv(sol, path)
        outputs.append(path)
    if len(solutions) >= 2:
        table = gap_table(solutions, max_levels=cfg.max_levels)
        path = out / "gaps.csv"
        write_gaps_csv(table, path)
        outputs.append(path)
    write_manifest(out / "manifest.json", "effective", cfg, outputs)
    return EXIT_OK


def cmd_boundstates(args) -> int:
    cfg = _load_config(args)
    lattice = LatticeSpec(cfg.L, cfg.alpha)
    out = _outdir(cfg)
    h2 = build_h2(lattice, cfg.J, cfg.g, mode=cfg.mode,
                  identify_inversion=cfg.identify_inversion, eps_sw=cfg.eps_sw)
    sol = diagonalize(h2)
    thresholds = Thresholds(bound_ipr=cfg.bound_ipr,
                            scattering_factor=cfg.scattering_factor)
    records = classify(sol, h2.basis, thresholds)
    outputs = [out / "records.csv"]
    write_records_csv(records, outputs[0])
    wanted = []
    if args.density_indices:
        wanted = [int(tok) for tok in args.density_indices.split(",")]
    elif args.density_top:
        by_ipr = sorted(records, key=lambda r: -r.ipr)[: args.density_top]
        wanted = [r.eigen_index for r in by_ipr]
    for idx in wanted:
        if not (0 <= idx < sol.dim):
            raise ConfigError(f"field 'density_indices': index {idx} out of range")
        grid = density_map(sol.vectors[:, idx], h2.basis, lattice.L)
        path = out / f"density_{idx}.txt"
        write_density_map(grid, path, lattice.L, cfg.alpha, cfg.g, idx)
        outputs.append(path)
    write_manifest(out / "manifest.json", "boundstates", cfg, outputs)
    return EXIT_OK


def cmd_quench(args) -> int:
    cfg = _load_config(args)
    lattice = LatticeSpec(cfg.L, cfg.alpha)
    max_sites = MAX_SITES if args.allow_large else cfg.max_sites
    if lattice.n_sites > max_sites:
        hours = (1 << lattice.n_sites) * cfg.t_max / cfg.dt * 30 * 4e-9 / 3600.0
        raise BudgetError(
            f"{lattice.L}x{lattice.L} quench exceeds the {max_sites}-site budget "
            f"(rough estimate {hours:.1f} h); rerun with --allow-large to permit "
            f"up to {MAX_SITES} sites")
    out = _outdir(cfg)
    ckpt = out / "checkpoint.npz" if args.checkpoint else None
    ts = run_quench(lattice, cfg.J, cfg.g, cfg.t_max, dt_record=cfg.dt,
                    krylov_dim=cfg.krylov_dim, tol=cfg.tol, max_sites=max_sites,
                    checkpoint_path=ckpt, checkpoint_every=args.checkpoint_every)
    path = out / "timeseries.csv"
    write_timeseries_csv(ts, path)
    write_manifest(out / "manifest.json", "quench", cfg, [path])
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    out = _outdir(cfg)
    try:
        ts = read_timeseries_csv(args.series)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    t_max = ts.times[-1] if cfg.t_max <= 0 else min(cfg.t_max, ts.times[-1])
    channels = {"sz": ts.sz_site_avg}
    for di, d in enumerate(ts.d_values):
        channels[f"C_{d}"] = ts.corr[:, di]
    outputs = []
    peaks_by_channel = {}
    spectra = {}
    for name, series in channels.items():
        spec = fft_spectrum(ts.times, series, t_min=cfg.t_min, t_max=t_max)
        spectra[name] = spec
        path = out / f"spectrum_{name}.csv"
        write_spectrum_csv(spec, path)
        outputs.append(path)
        peaks_by_channel[name] = detect_peaks(spec, rel_threshold=cfg.rel_threshold)
    path = out / "peaks.csv"
    write_peaks_csv(peaks_by_channel, path)
    outputs.append(path)
    if args.gaps:
        try:
            table = read_gaps_csv(args.gaps)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        assignments = {}
        for name, peaks in peaks_by_channel.items():
            tol = cfg.match_tol_bins * spectra[name].bin_width
            assignments[name] = match_gaps(peaks, table, tol)
        path = out / "assignments.csv"
        write_assignments_csv(assignments, path)
        outputs.append(path)
    write_manifest(out / "manifest.json", "spectrum", cfg, outputs)
    return EXIT_OK


def _bz_path(L: int):
    """Grid points along X -> M -> Gamma -> X -> S of the square lattice."""
    def pt(nx, ny):
        return (nx, ny)

    half = L // 2
    quarter = max(1, round(L / 4))
    segs = []
    segs += [pt(half, n) for n in range(0, half + 1)]            # X -> M
    segs += [pt(half - n, half - n) for n in range(1, half + 1)]  # M -> Gamma
    segs += [pt(n, 0) for n in range(1, half + 1)]               # Gamma -> X
    segs += [pt(half - n, n) for n in range(1, quarter + 1)]     # X -> S
    return segs


def cmd_dispersion(args) -> int:
    cfg = _load_config(args)
    lattice = LatticeSpec(cfg.L, cfg.alpha)
    out = _outdir(cfg)
    step = 2.0 * math.pi / cfg.L
    rows = ["segment_index,kx,ky,energy"]
    for i, (nx, ny) in enumerate(_bz_path(cfg.L)):
        k = (nx * step, ny * step)
        e = dispersion(lattice, cfg.J, cfg.g, k, mode=cfg.mode, eps_sw=cfg.eps_sw)
        rows.append(f"{i},{k[0]:.17g},{k[1]:.17g},{e:.17g}")
    path = out / "dispersion.csv"
    path.write_text("\n".join(rows) + "\n")
    write_manifest(out / "manifest.json", "dispersion", cfg, [path])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrising",
        description="Few-magnon effective theory and exact quench spectroscopy "
                    "of the 2D long-range transverse-field Ising model")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file with a [run] section")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field (repeatable)")
        p.add_argument("--out", help="output directory (overrides output_dir)")

    p = sub.add_parser("effective", help="diagonalize magnon sectors, emit gap table")
    common(p)
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("boundstates", help="classify two-magnon eigenstates")
    common(p)
    p.add_argument("--density-indices", help="comma list of eigenstate indices to map")
    p.add_argument("--density-top", type=int, help="map the N highest-IPR states")
    p.set_defaults(func=cmd_boundstates)

    p = sub.add_parser("quench", help="exact time evolution from the polarized state")
    common(p)
    p.add_argument("--allow-large", action="store_true",
                   help=f"permit up to {MAX_SITES} sites (long job)")
    p.add_argument("--checkpoint", action="store_true",
                   help="write resumable state checkpoints into the output dir")
    p.add_argument("--checkpoint-every", type=int, default=500, metavar="N",
                   help="records between checkpoints (default 500)")
    p.set_defaults(func=cmd_quench)

    p = sub.add_parser("spectrum", help="windowed FFT of a quench series")
    common(p)
    p.add_argument("series", help="timeseries.csv produced by the quench command")
    p.add_argument("--gaps", help="gaps.csv to assign peaks against")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("dispersion", help="single-magnon dispersion along X-M-Gamma-X-S")
    common(p)
    p.set_defaults(func=cmd_dispersion)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SWDegeneracyError, SolverError, PropagationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BudgetError as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
