"""Run configuration and deterministic file formats.

All CSVs carry full double precision (17 significant digits) and a header
row; quench series additionally carry one comment line naming the physical
parameters.  Manifests are JSON; the timestamp lives in its own field so
that everything else is bit-stable across reruns.
"""

from __future__ import annotations

import configparser
import json
import math
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .exact import TimeSeries
from .spectral import Spectrum
from .sw import EigenSolution, GapTable

__all__ = [
    "ConfigError",
    "RunConfig",
    "fmt",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_eigenvalues_csv",
    "write_records_csv",
    "write_gaps_csv",
    "read_gaps_csv",
    "write_spectrum_csv",
    "write_peaks_csv",
    "write_assignments_csv",
    "write_density_map",
    "write_manifest",
]


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class RunConfig:
    """Flat run parameters with the package-wide defaults.

    Times are in units of 1/J, energies in units of J.  `sectors` lists the
    magnon numbers entering gap tables; nu >= 3 is automatically restricted
    to configurations with a nearest-neighbor pair.
    """

    L: int = 3
    alpha: float = 3.0
    J: float = 1.0
    g: float = 0.2
    mode: str = "full"
    t_max: float = 200.0
    dt: float = 0.05
    t_min: float = 5.0
    sectors: tuple = (0, 1, 2)
    identify_inversion: bool = True
    krylov_dim: int = 30
    tol: float = 1e-9
    eps_sw: float = 1e-8
    bound_ipr: float = 0.1
    scattering_factor: float = 5.0
    rel_threshold: float = 0.05
    match_tol_bins: float = 1.0
    max_levels: int = 6
    seed: int = 0
    max_sites: int = 16
    output_dir: str = "out"

    def validate(self) -> "RunConfig":
        if self.L < 2:
            raise ConfigError("field 'L': must be an integer >= 2")
        if not (self.alpha > 0):
            raise ConfigError("field 'alpha': must be positive (or inf)")
        if self.J <= 0:
            raise ConfigError("field 'J': must be positive")
        if self.g < 0:
            raise ConfigError("field 'g': must be non-negative")
        if self.mode not in ("full", "asymptotic"):
            raise ConfigError("field 'mode': must be 'full' or 'asymptotic'")
        if self.t_max < 0 or self.dt <= 0:
            raise ConfigError("field 't_max'/'dt': need t_max >= 0 and dt > 0")
        if any(nu < 0 for nu in self.sectors):
            raise ConfigError("field 'sectors': magnon numbers must be >= 0")
        if not (0 < self.rel_threshold < 1):
            raise ConfigError("field 'rel_threshold': must lie in (0, 1)")
        if self.max_levels < 1:
            raise ConfigError("field 'max_levels': must be >= 1")
        return self

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sectors"] = list(self.sectors)
        d["alpha"] = "inf" if math.isinf(self.alpha) else self.alpha
        return d

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["run"] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "sectors":
                cp["run"][f.name] = ",".join(str(int(s)) for s in v)
            elif isinstance(v, bool):
                cp["run"][f.name] = "true" if v else "false"
            elif isinstance(v, float):
                cp["run"][f.name] = "inf" if math.isinf(v) else fmt(v)
            else:
                cp["run"][f.name] = str(v)
        out = []
        out.append("[run]")
        for k, v in cp["run"].items():
            out.append(f"{k} = {v}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_ini(cls, path) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        read = cp.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        if "run" not in cp:
            raise ConfigError("config file must contain a [run] section")
        return cls._apply(cls(), dict(cp["run"]))

    @classmethod
    def _apply(cls, base: "RunConfig", entries: dict) -> "RunConfig":
        typemap = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in entries.items():
            if key not in typemap:
                raise ConfigError(f"unknown config field '{key}'")
            current = getattr(base, key)
            try:
                if key == "sectors":
                    kwargs[key] = tuple(int(tok) for tok in str(raw).split(",") if tok.strip() != "")
                elif isinstance(current, bool):
                    kwargs[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(current, int):
                    kwargs[key] = int(raw)
                elif isinstance(current, float):
                    kwargs[key] = float(raw)
                else:
                    kwargs[key] = str(raw)
            except ValueError as exc:
                raise ConfigError(f"field '{key}': cannot parse {raw!r}") from exc
        return replace(base, **kwargs)

    def with_overrides(self, pairs) -> "RunConfig":
        """Apply 'key=value' override strings on top of this config."""
        entries = {}
        for item in pairs or []:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            k, v = item.split("=", 1)
            entries[k.strip()] = v.strip()
        return self._apply(self, entries)


# -- CSV writers ----------------------------------------------------------


def write_timeseries_csv(ts: TimeSeries, path) -> None:
    p = ts.params
    header = (f"# L={p['L']} J={fmt(p['J'])} g={fmt(p['g'])} "
              f"alpha={'inf' if math.isinf(p['alpha']) else fmt(p['alpha'])} "
              f"dt={fmt(p['dt'])}")
    cols = ["t", "sz_avg"]
    cols += [f"C_{d}" for d in ts.d_values]
    cols += [f"Ctilde_{d}" for d in ts.d_values]
    cols += ["energy"]
    lines = [header, ",".join(cols)]
    for i, t in enumerate(ts.times):
        row = [fmt(t), fmt(ts.sz_site_avg[i])]
        row += [fmt(v) for v in ts.corr[i]]
        row += [fmt(v) for v in ts.corr_normalized[i]]
        row += [fmt(ts.energy[i])]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_timeseries_csv(path) -> TimeSeries:
    """Parse a quench series file; reports the line number on bad input."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}:1: expected a '# L=... J=...' parameter line")
    params = {}
    for tok in lines[0].lstrip("# ").split():
        k, _, v = tok.partition("=")
        params[k] = float(v) if k != "L" else int(v)
    if len(lines) < 2:
        raise ValueError(f"{path}:2: missing column header")
    cols = lines[1].split(",")
    try:
        c_idx = [i for i, c in enumerate(cols) if c.startswith("C_")]
        ct_idx = [i for i, c in enumerate(cols) if c.startswith("Ctilde_")]
        t_i, sz_i, e_i = cols.index("t"), cols.index("sz_avg"), cols.index("energy")
    except ValueError as exc:
        raise ValueError(f"{path}:2: unrecognized column layout") from exc
    d_values = [int(cols[i].split("_")[1]) for i in c_idx]
    rows = []
    for ln, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ValueError(f"{path}:{ln}: expected {len(cols)} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: non-numeric field") from exc
    data = np.array(rows)
    if data.size == 0:
        raise ValueError(f"{path}:3: no data rows")
    return TimeSeries(
        times=data[:, t_i], sz_site_avg=data[:, sz_i],
        corr=data[:, c_idx] if c_idx else np.zeros((len(rows), 0)),
        corr_normalized=data[:, ct_idx] if ct_idx else np.zeros((len(rows), 0)),
        energy=data[:, e_i], d_values=d_values, params=params)


def write_eigenvalues_csv(solution: EigenSolution, path) -> None:
    lines = ["index,energy"]
    for i, e in enumerate(solution.energies):
        lines.append(f"{i},{fmt(e)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_records_csv(records, path) -> None:
    lines = ["eigen_index,energy,ipr,dbar,label"]
    for r in records:
        lines.append(f"{r.eigen_index},{fmt(r.energy)},{fmt(r.ipr)},{fmt(r.dbar)},{r.label}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_gaps_csv(table: GapTable, path) -> None:
    lines = ["nu,nu_prime,i,j,delta"]
    for e in table.entries:
        lines.append(f"{e.nu},{e.nu_prime},{e.i},{e.j},{fmt(e.delta)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_gaps_csv(path) -> GapTable:
    from .sw import GapEntry

    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "nu,nu_prime,i,j,delta":
        raise ValueError(f"{path}:1: expected header 'nu,nu_prime,i,j,delta'")
    entries = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"{path}:{ln}: expected 5 fields")
        try:
            entries.append(GapEntry(int(parts[0]), int(parts[1]), int(parts[2]),
                                    int(parts[3]), float(parts[4])))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: non-numeric field") from exc
    return GapTable(entries=entries, provenance={})


def write_spectrum_csv(spec: Spectrum, path) -> None:
    lines = ["omega,magnitude"]
    for om, mag in zip(spec.omegas, spec.magnitudes):
        lines.append(f"{fmt(om)},{fmt(mag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_peaks_csv(peaks_by_channel: dict, path) -> None:
    lines = ["channel,omega,magnitude"]
    for channel in sorted(peaks_by_channel):
        for om, mag in peaks_by_channel[channel]:
            lines.append(f"{channel},{fmt(om)},{fmt(mag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_assignments_csv(assignments_by_channel: dict, path) -> None:
    lines = ["channel,peak_omega,magnitude,nu,nu_prime,i,j,delta,residual"]
    for channel in sorted(assignments_by_channel):
        for a in assignments_by_channel[channel]:
            if a.assigned_gap is None:
                lines.append(f"{channel},{fmt(a.peak_omega)},{fmt(a.peak_magnitude)},,,,,,")
            else:
                e = a.assigned_gap
                lines.append(f"{channel},{fmt(a.peak_omega)},{fmt(a.peak_magnitude)},"
                             f"{e.nu},{e.nu_prime},{e.i},{e.j},{fmt(e.delta)},{fmt(a.residual)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_density_map(grid: np.ndarray, path, L: int, alpha: float, g: float,
                      eigen_index: int) -> None:
    a = "inf" if math.isinf(alpha) else fmt(alpha)
    header = f"# L={L} alpha={a} g={fmt(g)} eigen_index={eigen_index}"
    body = "\n".join(" ".join(fmt(v) for v in row) for row in grid)
    Path(path).write_text(header + "\n" + body + "\n")


def write_manifest(path, command: str, config: RunConfig, outputs) -> None:
    from . import __version__

    doc = {
        "command": command,
        "version": __version__,
        "parameters": config.to_dict(),
        "outputs": sorted(str(o) for o in outputs),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
