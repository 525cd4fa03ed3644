"""Command-line driver: single-point analysis, phase-diagram sweeps over the
(omega, E) plane, memory-time maps, Choi-eigenvalue trajectory dumps, and
generator extraction. Structured config in, CSV / JSON / PGM heatmaps out.

Per-point failures are data, not crashes: a sweep survives defective grid
points by recording them in the row's status column.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernel as kernel_mod
from .errors import (
    EmptyPhase,
    FloquetLindbladError,
    NoValidKernelInRange,
)
from .markovianity import find_floquet_lindbladian, mu_min
from .model import DriveParams, build_two_level_model
from .propagator import IntegratorConfig, floquet_map, propagate_trajectory, choi_eigenvalue_trajectory
from .superop import branch_generator, matrix_exp, spectral_decompose

__all__ = [
    "TauScanConfig",
    "SweepConfig",
    "SweepResultRow",
    "run_point",
    "run_sweep",
    "phase_extent",
    "extent_from_rows",
    "emit",
    "parse_csv",
    "main",
]

ROW_FIELDS = (
    "omega", "E", "gamma", "phi", "T", "exists", "mu_min", "d_rhp",
    "tau_min", "n_c", "branch", "negative_pair", "status",
)


@dataclass(frozen=True)
class TauScanConfig:
    lo_factor: float = 1e-2
    hi_factor: float = 10.0
    points: int = 40

    def grid(self, period: float) -> np.ndarray:
        return kernel_mod.default_tau_grid(
            period, points=self.points, lo_factor=self.lo_factor, hi_factor=self.hi_factor
        )


@dataclass(frozen=True)
class SweepConfig:
    gamma: float = 0.01
    phi: float = 0.0
    omega_range: tuple[float, float, int] = (0.4, 3.0, 40)
    e_range: tuple[float, float, int] = (0.0, 3.0, 40)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    x_max: int = 20
    tau_scan: TauScanConfig = field(default_factory=TauScanConfig)
    outputs: tuple[str, ...] = ("exists", "mu_min", "d_rhp", "n_c", "branch")
    workers: int = 1

    def __post_init__(self):
        for rng in (self.omega_range, self.e_range):
            if rng[2] < 1:
                raise ValueError("each axis needs at least one grid point")
        unknown = set(self.outputs) - {"mu_min", "d_rhp", "exists", "tau_min", "n_c", "branch"}
        if unknown:
            raise ValueError(f"unknown output columns: {sorted(unknown)}")

    def omega_values(self) -> np.ndarray:
        lo, hi, n = self.omega_range
        return np.linspace(lo, hi, n)

    def e_values(self) -> np.ndarray:
        lo, hi, n = self.e_range
        return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class SweepResultRow:
    omega: float
    E: float
    gamma: float
    phi: float
    T: float
    exists: bool
    mu_min: float
    d_rhp: float
    tau_min: float
    n_c: int
    branch: tuple[int, ...] | None
    negative_pair: bool
    status: str


def run_point(params: DriveParams, cfg: SweepConfig) -> SweepResultRow:
    """Full analysis of one parameter point; failures land in the status field."""
    period = params.period
    base = dict(
        omega=params.omega, E=params.E, gamma=params.gamma, phi=params.phi, T=period,
        exists=False, mu_min=math.nan, d_rhp=math.nan, tau_min=math.nan,
        n_c=0, branch=None, negative_pair=False, status="ok",
    )
    try:
        model = build_two_level_model(params)
        p = floquet_map(model, cfg.integrator)
        report = find_floquet_lindbladian(p, period, x_max=cfg.x_max)
        base.update(
            exists=report.exists, mu_min=report.mu_min, d_rhp=report.d_rhp,
            n_c=report.n_c, branch=report.best_branch, negative_pair=report.negative_pair,
        )
        if report.bound_hit:
            base["status"] = "bound_exceeded"
        if "tau_min" in cfg.outputs:
            if report.exists:
                base["tau_min"] = 0.0
            dec = spectral_decompose(p)
            try:
                kreport = kernel_mod.minimal_memory_time(
                    dec, period, tau_grid=cfg.tau_scan.grid(period)
                )
                base["tau_min"] = kreport.tau_min
            except NoValidKernelInRange:
                base["tau_min"] = math.inf
                base["status"] = "no_kernel"
    except FloquetLindbladError:
        base["status"] = "defective"
    return SweepResultRow(**base)


def _point_worker(args: tuple[DriveParams, SweepConfig]) -> SweepResultRow:
    return run_point(*args)


def run_sweep(cfg: SweepConfig) -> list[SweepResultRow]:
    """One row per grid point, row-major (omega outer, E inner); worker count
    never changes the output content or order."""
    points = [
        (DriveParams(E=float(e), omega=float(w), phi=cfg.phi, gamma=cfg.gamma), cfg)
        for w in cfg.omega_values()
        for e in cfg.e_values()
    ]
    if cfg.workers <= 1:
        return [_point_worker(p) for p in points]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        chunk = max(1, len(points) // (cfg.workers * 8))
        return list(pool.map(_point_worker, points, chunksize=chunk))


def extent_from_rows(rows: Sequence[SweepResultRow]) -> tuple[float, float, float]:
    """Extent (delta_omega, delta_E) of the non-Lindbladian region and the
    maximal distance from Markovianity over a sweep table."""
    non_l = [r for r in rows if not r.exists and r.status in ("ok", "bound_exceeded")]
    if not non_l:
        raise EmptyPhase("no non-Lindbladian grid points in the sweep")
    omegas = [r.omega for r in non_l]
    es = [r.E for r in non_l]
    finite_mu = [r.mu_min for r in rows if math.isfinite(r.mu_min)]
    return max(omegas) - min(omegas), max(es) - min(es), max(finite_mu)


def phase_extent(
    gamma: float, phi: float, cfg: SweepConfig | None = None
) -> tuple[float, float, float]:
    """Extent of the non-Lindbladian region over a fresh sweep at (gamma, phi)."""
    cfg = dataclasses.replace(cfg or SweepConfig(), gamma=gamma, phi=phi)
    return extent_from_rows(run_sweep(cfg))


# ---------------------------------------------------------------------------
# serialization

def _fmt_float(x: float) -> str:
    return format(float(x), ".12g")


def _fmt_value(name: str, value) -> str:
    if name in ("exists", "negative_pair"):
        return "true" if value else "false"
    if name == "branch":
        return "" if value is None else ";".join(str(int(v)) for v in value)
    if name == "n_c":
        return str(int(value))
    if name == "status":
        return str(value)
    return _fmt_float(value)


def rows_to_csv(rows: Sequence[SweepResultRow]) -> str:
    lines = [",".join(ROW_FIELDS)]
    for row in rows:
        lines.append(",".join(_fmt_value(f, getattr(row, f)) for f in ROW_FIELDS))
    return "\n".join(lines) + "\n"


def parse_csv(text_or_path) -> list[SweepResultRow]:
    """Inverse of the CSV writer at serialization precision."""
    if isinstance(text_or_path, Path) or (
        isinstance(text_or_path, str) and "\n" not in text_or_path
    ):
        text = Path(text_or_path).read_text()
    else:
        text = text_or_path
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    if tuple(header) != ROW_FIELDS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for ln in lines[1:]:
        vals = dict(zip(ROW_FIELDS, ln.split(",")))
        rows.append(
            SweepResultRow(
                omega=float(vals["omega"]), E=float(vals["E"]),
                gamma=float(vals["gamma"]), phi=float(vals["phi"]), T=float(vals["T"]),
                exists=vals["exists"] == "true",
                mu_min=float(vals["mu_min"]), d_rhp=float(vals["d_rhp"]),
                tau_min=float(vals["tau_min"]), n_c=int(vals["n_c"]),
                branch=None if vals["branch"] == "" else tuple(
                    int(v) for v in vals["branch"].split(";")
                ),
                negative_pair=vals["negative_pair"] == "true",
                status=vals["status"],
            )
        )
    return rows


def rows_to_json(rows: Sequence[SweepResultRow]) -> str:
    payload = []
    for row in rows:
        obj = {}
        for f in ROW_FIELDS:
            v = getattr(row, f)
            if f == "branch":
                obj[f] = None if v is None else list(v)
            elif f in ("exists", "negative_pair"):
                obj[f] = bool(v)
            elif f == "n_c":
                obj[f] = int(v)
            elif f == "status":
                obj[f] = v
            else:
                obj[f] = float(v)
        payload.append(obj)
    return json.dumps(payload, indent=1) + "\n"


def rows_to_pgm(rows: Sequence[SweepResultRow], cfg: SweepConfig, column: str) -> bytes:
    """8-bit binary PGM of one column over the (omega, E) grid, linearly
    scaled; the top pixel row is the largest driving strength."""
    n_w = cfg.omega_range[2]
    n_e = cfg.e_range[2]
    values = np.array(
        [float(getattr(r, column)) if column != "exists" else float(getattr(r, column))
         for r in rows]
    ).reshape(n_w, n_e)
    finite = values[np.isfinite(values)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0
    scaled = np.clip((values - lo) / span, 0.0, 1.0)
    scaled[~np.isfinite(values)] = 0.0
    pixels = np.round(255 * scaled).astype(np.uint8)
    image = pixels.T[::-1, :]  # rows: E descending; columns: omega ascending
    header = f"P5\n{n_w} {n_e}\n255\n".encode("ascii")
    return header + image.tobytes()


def emit(rows: Sequence[SweepResultRow], fmt: str, path, cfg: SweepConfig | None = None,
         column: str = "mu_min") -> None:
    """Write a sweep table as csv, json, or pgm heatmap."""
    path = Path(path)
    if fmt == "csv":
        path.write_text(rows_to_csv(rows), newline="")
    elif fmt == "json":
        path.write_text(rows_to_json(rows), newline="")
    elif fmt == "pgm":
        if cfg is None:
            raise ValueError("pgm output needs the sweep config for the grid shape")
        path.write_bytes(rows_to_pgm(rows, cfg, column))
    else:
        raise ValueError(f"unknown output format {fmt!r}")


# ---------------------------------------------------------------------------
# command line

def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be MIN:MAX:N, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _config_from_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file {path} not found")
    out: dict = {}
    if parser.has_section("sweep"):
        s = parser["sweep"]
        for key in ("gamma", "phi"):
            if key in s:
                out[key] = s.getfloat(key)
        if "omega_range" in s:
            out["omega_range"] = _parse_range(s["omega_range"])
        if "e_range" in s:
            out["e_range"] = _parse_range(s["e_range"])
        if "x_max" in s:
            out["x_max"] = s.getint("x_max")
        if "workers" in s:
            out["workers"] = s.getint("workers")
        if "outputs" in s:
            out["outputs"] = tuple(v.strip() for v in s["outputs"].split(",") if v.strip())
    if parser.has_section("integrator"):
        s = parser["integrator"]
        kwargs = {}
        if "method" in s:
            kwargs["method"] = s["method"]
        for key in ("rel_tol", "abs_tol"):
            if key in s:
                kwargs[key] = s.getfloat(key)
        for key in ("max_steps", "min_substeps_per_period"):
            if key in s:
                kwargs[key] = s.getint(key)
        out["integrator"] = IntegratorConfig(**kwargs)
    if parser.has_section("tau_scan"):
        s = parser["tau_scan"]
        kwargs = {}
        for key in ("lo_factor", "hi_factor"):
            if key in s:
                kwargs[key] = s.getfloat(key)
        if "points" in s:
            kwargs["points"] = s.getint("points")
        out["tau_scan"] = TauScanConfig(**kwargs)
    return out


def _build_sweep_config(args, need_tau: bool) -> SweepConfig:
    kwargs = _config_from_file(args.config) if args.config else {}
    for name, attr in (
        ("gamma", "gamma"), ("phi", "phi"), ("x_max", "x_max"), ("workers", "workers"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            kwargs[name] = value
    if getattr(args, "omega_range", None) is not None:
        kwargs["omega_range"] = args.omega_range
    if getattr(args, "e_range", None) is not None:
        kwargs["e_range"] = args.e_range
    if getattr(args, "outputs", None) is not None:
        kwargs["outputs"] = tuple(v.strip() for v in args.outputs.split(","))
    cfg = SweepConfig(**kwargs)
    if need_tau and "tau_min" not in cfg.outputs:
        cfg = dataclasses.replace(cfg, outputs=cfg.outputs + ("tau_min",))
    return cfg


def _add_common(sub, point: bool):
    sub.add_argument("--gamma", type=float, default=None, help="dissipation strength")
    sub.add_argument("--phi", type=float, default=None, help="driving phase")
    sub.add_argument("--x-max", dest="x_max", type=int, default=None,
                     help="branch search bound")
    sub.add_argument("--config", default=None, help="INI config file")
    sub.add_argument("--out", default=None, help="output file (default: stdout)")
    sub.add_argument("--format", dest="fmt", choices=("csv", "json", "pgm"), default=None)
    if point:
        sub.add_argument("--omega", type=float, required=True, help="driving frequency")
        sub.add_argument("--e", type=float, required=True, help="driving strength")
    else:
        sub.add_argument("--omega-range", dest="omega_range", type=_parse_range,
                         default=None, metavar="MIN:MAX:N")
        sub.add_argument("--e-range", dest="e_range", type=_parse_range,
                         default=None, metavar="MIN:MAX:N")
        sub.add_argument("--workers", type=int, default=None)


def _write_or_print(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="")


def _complex_matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _cmd_point(args) -> int:
    cfg = _build_sweep_config(args, need_tau=True)
    params = DriveParams(E=args.e, omega=args.omega, phi=cfg.phi, gamma=cfg.gamma)
    row = run_point(params, cfg)
    fmt = args.fmt or "csv"
    if fmt == "pgm":
        raise ValueError("pgm output needs a sweep grid")
    text = rows_to_csv([row]) if fmt == "csv" else rows_to_json([row])
    _write_or_print(text, args.out)
    return 0


def _cmd_sweep(args, need_tau: bool) -> int:
    cfg = _build_sweep_config(args, need_tau=need_tau)
    rows = run_sweep(cfg)
    fmt = args.fmt or "csv"
    if fmt == "pgm":
        if args.out is None:
            raise ValueError("pgm output requires --out")
        emit(rows, "pgm", args.out, cfg=cfg,
             column="tau_min" if need_tau else "mu_min")
    else:
        text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
        _write_or_print(text, args.out)
    return 0


def _cmd_extent(args) -> int:
    cfg = _build_sweep_config(args, need_tau=False)
    delta_omega, delta_e, max_mu = phase_extent(cfg.gamma, cfg.phi, cfg)
    payload = {
        "gamma": cfg.gamma, "phi": cfg.phi,
        "delta_omega": delta_omega, "delta_E": delta_e, "max_mu": max_mu,
    }
    _write_or_print(json.dumps(payload, indent=1) + "\n", args.out)
    return 0


def _cmd_trajectory(args) -> int:
    cfg = _build_sweep_config(args, need_tau=True)
    params = DriveParams(E=args.e, omega=args.omega, phi=cfg.phi, gamma=cfg.gamma)
    model = build_two_level_model(params)
    period = model.period
    t_end = args.t_end if args.t_end is not None else 2 * period
    samples = args.samples

    traj_full = propagate_trajectory(model, t_end, samples, cfg.integrator)
    p = floquet_map(model, cfg.integrator)
    dec = spectral_decompose(p)
    _, best_branch = mu_min(dec, period, x_max=cfg.x_max)
    closest = branch_generator(dec, best_branch, period)
    semigroup_maps = np.stack([matrix_exp(closest, t) for t in traj_full.times])
    semigroup = dataclasses.replace(traj_full, maps=semigroup_maps)

    curves = {
        "full": choi_eigenvalue_trajectory(traj_full),
        "semigroup": choi_eigenvalue_trajectory(semigroup),
    }
    if args.tau is not None:
        spec = kernel_mod.build_kernel_lindbladian(dec, args.tau, period)
    else:
        try:
            spec = kernel_mod.minimal_memory_time(
                dec, period, tau_grid=cfg.tau_scan.grid(period)
            ).spec_at_tau_min
        except NoValidKernelInRange:
            spec = None
    if spec is not None:
        curves["kernel"] = choi_eigenvalue_trajectory(
            kernel_mod.kernel_evolution(spec, dec, period, t_end, samples)
        )

    lines = ["t,curve,eigenvalue_index,value"]
    for name, eigs in curves.items():
        for i, t in enumerate(traj_full.times):
            for k in range(eigs.shape[1]):
                lines.append(
                    f"{_fmt_float(t)},{name},{k},{_fmt_float(eigs[i, k])}"
                )
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_extract(args) -> int:
    cfg = _build_sweep_config(args, need_tau=False)
    params = DriveParams(E=args.e, omega=args.omega, phi=cfg.phi, gamma=cfg.gamma)
    model = build_two_level_model(params)
    p = floquet_map(model, cfg.integrator)
    report = find_floquet_lindbladian(p, model.period, x_max=cfg.x_max)
    payload = {
        "omega": params.omega, "E": params.E, "gamma": params.gamma, "phi": params.phi,
        "exists": report.exists,
        "hermiticity_ok": report.hermiticity_ok,
        "mu_min": report.mu_min, "d_rhp": report.d_rhp,
        "branch": None if report.best_branch is None else list(report.best_branch),
        "n_c": report.n_c,
    }
    if report.exists:
        payload["hamiltonian"] = _complex_matrix_json(report.h_f)
        payload["jumps"] = [_complex_matrix_json(a) for a in report.jumps_f]
    _write_or_print(json.dumps(payload, indent=1) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floquet-lindblad",
        description="Markovianity analysis of the periodically driven "
        "dissipative two-level system",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_point = subs.add_parser("point", help="full analysis of one parameter point")
    _add_common(p_point, point=True)
    p_point.set_defaults(func=_cmd_point)

    p_phase = subs.add_parser("phase-diagram", help="sweep mu_min over the (omega, E) grid")
    _add_common(p_phase, point=False)
    p_phase.add_argument("--outputs", default=None,
                         help="comma-separated columns to compute")
    p_phase.set_defaults(func=lambda a: _cmd_sweep(a, need_tau=False))

    p_kernel = subs.add_parser("kernel-map", help="sweep the minimal memory time")
    _add_common(p_kernel, point=False)
    p_kernel.add_argument("--outputs", default=None)
    p_kernel.set_defaults(func=lambda a: _cmd_sweep(a, need_tau=True))

    p_traj = subs.add_parser(
        "trajectory",
        help="Choi eigenvalue curves of the full, semigroup, and kernel evolutions",
    )
    _add_common(p_traj, point=True)
    p_traj.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_traj.add_argument("--samples", type=int, default=161)
    p_traj.add_argument("--tau", type=float, default=None,
                        help="kernel memory time (default: minimal valid)")
    p_traj.set_defaults(func=_cmd_trajectory)

    p_extract = subs.add_parser("extract", help="effective Hamiltonian and jump operators")
    _add_common(p_extract, point=True)
    p_extract.set_defaults(func=_cmd_extract)

    p_extent = subs.add_parser("extent", help="extent of the non-Lindbladian phase")
    _add_common(p_extent, point=False)
    p_extent.add_argument("--outputs", default=None)
    p_extent.set_defaults(func=_cmd_extent)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, configparser.Error, EmptyPhase) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
