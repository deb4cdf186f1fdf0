"""Command-line front end.

Every subcommand reads an optional JSON config, writes CSV/JSON files into
the output directory, and maps failures onto stable exit codes:
0 success, 1 verification failure, 2 configuration error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cavity as cav_mod
from . import sweep as sweep_mod
from .dynamics import susceptibility_from_oracle
from .errors import CellError, ConfigError, NumericError, QdmError
from .model import (
    PRESET_NAME,
    PhysicalPreset,
    QdmParams,
    UnitContext,
    physical_from_dict,
    params_from_dict,
    susceptibility_prefactor,
    units_from_dict,
)
from .susceptibility import (
    Convention,
    check_grid,
    chi_canonical,
    chi_printed,
    dispersion_exact,
)
from .verify import report_json, run_verification

log = logging.getLogger("qdmcavity")

OUT_ENV = "QDMCAVITY_OUT"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_TOP_KEYS = {"preset", "qdm", "units", "physical", "cavity", "grid", "te_grid",
             "gamma10_grid_ueV", "clip", "sweep", "convention", "oracle",
             "oracle_g", "threads", "seed"}
_CAVITY_KEYS = {"base", "L", "l", "r", "omega_c", "K", "linewidth_override",
                "xi_target", "use_physical_K"}


@dataclass
class RunConfig:
    params: QdmParams
    units: UnitContext
    physical: PhysicalPreset
    cavity: cav_mod.CavityParams
    grid: np.ndarray | None = None
    te_grid: sweep_mod.GridSpec | None = None
    gamma10_grid: sweep_mod.GridSpec | None = None
    clip: float = 7.0
    sweep_axes: list = field(default_factory=list)
    sweep_quantity: str = "window_dispersion"
    convention: Convention = Convention.CANONICAL
    oracle: bool = False
    oracle_g: float = 1e-3
    threads: int = 1
    seed: int = 0
    literal_rho10: bool = False
    source: dict = field(default_factory=dict)


def _grid_from(data, name):
    if isinstance(data, list):
        return check_grid(data)
    if isinstance(data, dict):
        if "values" in data:
            if set(data) != {"values"}:
                raise ConfigError(f"{name}: 'values' cannot be combined with other keys")
            return check_grid(data["values"])
        return sweep_mod.GridSpec.from_dict(data, name).values()
    raise ConfigError(f"{name} must be a list or an object")


def _build_cavity(data: dict, params: QdmParams, ctx: UnitContext,
                  physical: PhysicalPreset) -> cav_mod.CavityParams:
    unknown = set(data) - _CAVITY_KEYS
    if unknown:
        raise ConfigError(f"unknown cavity key(s): {sorted(unknown)}")
    base = data.get("base", "figure2")
    if base == "figure2":
        cav = cav_mod.figure2_cavity(ctx)
    elif base == "micro":
        cav = cav_mod.microcavity(ctx)
    else:
        raise ConfigError(f"unknown cavity base {base!r}")
    changes = {k: data[k] for k in ("L", "l", "r", "omega_c", "K", "linewidth_override")
               if k in data}
    if data.get("use_physical_K"):
        changes["K"] = susceptibility_prefactor(physical, ctx)
    try:
        cav = cav.replace(**changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if "xi_target" in data:
        cav = cav_mod.cavity_for_xi(cav, params, float(data["xi_target"]))
    return cav


def load_config(path: str | None, preset: str | None = None) -> RunConfig:
    data: dict = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")

    qdm = dict(data.get("qdm", {}))
    chosen = preset or data.get("preset")
    if chosen is None and not qdm:
        chosen = PRESET_NAME
    if chosen is not None:
        qdm["preset"] = chosen
    params = params_from_dict(qdm)
    try:
        units = units_from_dict(data.get("units", {}))
        physical = physical_from_dict(data.get("physical", {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(params, units, physical,
                    _build_cavity(data.get("cavity", {}), params, units, physical))
    if "grid" in data:
        cfg.grid = _grid_from(data["grid"], "grid")
    if "te_grid" in data:
        cfg.te_grid = sweep_mod.GridSpec.from_dict(data["te_grid"], "Te")
    if "gamma10_grid_ueV" in data:
        cfg.gamma10_grid = sweep_mod.GridSpec.from_dict(data["gamma10_grid_ueV"], "Gamma10_ueV")
    cfg.clip = float(data.get("clip", 7.0))
    sweep = data.get("sweep", {})
    cfg.sweep_axes = [sweep_mod.GridSpec.from_dict(a) for a in sweep.get("axes", [])]
    cfg.sweep_quantity = sweep.get("quantity", "window_dispersion")
    try:
        cfg.convention = Convention(data.get("convention", "canonical"))
    except ValueError:
        raise ConfigError("convention must be 'printed' or 'canonical'") from None
    cfg.oracle = bool(data.get("oracle", False))
    cfg.oracle_g = float(data.get("oracle_g", 1e-3))
    cfg.threads = int(data.get("threads", 1))
    cfg.seed = int(data.get("seed", 0))
    cfg.source = data
    return cfg


def describe(cfg: RunConfig) -> dict:
    """JSON-ready echo of the resolved configuration."""
    cav = dataclasses.asdict(cfg.cavity)
    return {
        "qdm": dataclasses.asdict(cfg.params),
        "units": dataclasses.asdict(cfg.units),
        "physical": dataclasses.asdict(cfg.physical),
        "cavity": cav,
        "convention": cfg.convention.value,
        "literal_rho10": cfg.literal_rho10,
        "input": cfg.source,
    }


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([sweep_mod.fmt(v) for v in row])


def _write_json(path: Path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n")


def _nullable(x):
    return None if x is None or not np.isfinite(x) else float(x)


# -- commands ---------------------------------------------------------------

def cmd_susceptibility(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid if cfg.grid is not None else np.linspace(-5, 5, 1001)
    grid = check_grid(grid)
    p = cfg.params
    pr, ca = chi_printed(p, grid), chi_canonical(p, grid)
    dp = dispersion_exact(p, grid, Convention.PRINTED).exact
    dc = dispersion_exact(p, grid, Convention.CANONICAL).exact
    header = ["Delta [Gamma10]", "chi_re_printed [K]", "chi_im_printed [K]",
              "chi_re_canonical [K]", "chi_im_canonical [K]",
              "dchi_re_dDelta_printed [K/Gamma10]", "dchi_re_dDelta_canonical [K/Gamma10]"]
    cols = [grid, pr.chi_re, pr.chi_im, ca.chi_re, ca.chi_im, dp, dc]
    if cfg.oracle:
        orc = susceptibility_from_oracle(p, grid, cfg.oracle_g, cfg.literal_rho10)
        header += ["chi_re_oracle [K]", "chi_im_oracle [K]"]
        cols += [orc.chi_re, orc.chi_im]
    _write_csv(out / "susceptibility.csv", header, zip(*cols))
    return EXIT_OK


def cavity_summary(cfg: RunConfig, grid=None):
    p, cav = cfg.params, cfg.cavity
    resp, window = cav_mod.window_response(cav, p)
    if grid is None:
        half = 5 * cav.empty_linewidth
        if np.isfinite(resp.linewidth):
            half = 5 * min(resp.linewidth, cav.empty_linewidth)
        grid = np.linspace(window - half, window + half, 20001)
    spec = cav_mod.transmission_spectrum(cav, p, grid)
    try:
        measured = cav_mod.measure_fwhm(spec.Delta, spec.T)
    except NumericError as exc:
        log.warning("no measurable linewidth: %s", exc)
        measured = None
    gap = None
    if measured is not None and np.isfinite(resp.linewidth):
        gap = abs(measured - resp.linewidth) / resp.linewidth
    summary = {
        "xi": resp.xi,
        "omega_r": _nullable(resp.omega_r),
        "window_Delta": window,
        "kappa_at_window": resp.kappa,
        "transmission_peak": resp.transmission_peak,
        "spectrum_peak": float(np.max(spec.T)),
        "empty_cavity_peak": 1.0,
        "empty_linewidth": cav.empty_linewidth,
        "linewidth_formula": _nullable(resp.linewidth),
        "linewidth_measured": measured,
        "linewidth_gap": gap,
    }
    return summary, spec


def cmd_cavity(cfg: RunConfig, out: Path) -> int:
    summary, spec = cavity_summary(cfg, cfg.grid)
    _write_csv(out / "cavity_spectrum.csv",
               ["Delta [Gamma10]", "omega_p_minus_omega01 [Gamma10]", "T", "kappa", "phase [rad]"],
               zip(spec.Delta, spec.probe_offset, spec.T, spec.kappa, spec.phase))
    _write_json(out / "cavity_summary.json", {"summary": summary, "config": describe(cfg)})
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_fig2(cfg: RunConfig, out: Path) -> int:
    family = sweep_mod.figure2_family(cfg.cavity, cfg.params, cfg.grid)
    rows = []
    for item in family:
        s = item.spectrum
        _write_csv(out / f"fig2_{item.label}.csv",
                   ["Delta [Gamma10]", "omega_p_minus_omega01 [Gamma10]", "T"],
                   zip(s.Delta, s.probe_offset, s.T))
        try:
            width = item.fwhm()
        except NumericError:
            width = None
        rows.append({"label": item.label, "description": item.description,
                     "peak": item.peak, "peak_Delta": item.peak_position,
                     "fwhm": width})
    _write_json(out / "fig2_summary.json", {"spectra": rows, "config": describe(cfg)})
    return EXIT_OK


def cmd_fig3(cfg: RunConfig, out: Path) -> int:
    te, g10 = sweep_mod.default_fig3_grids()
    surface = sweep_mod.dispersion_surface(cfg.te_grid or te, cfg.gamma10_grid or g10,
                                           cfg.units, cfg.clip, threads=cfg.threads)
    (out / "fig3_surface.csv").write_text(sweep_mod.surface_to_csv(surface), encoding="utf-8")
    (out / "fig3_surface.json").write_text(
        sweep_mod.surface_to_json(surface, describe(cfg)), encoding="utf-8")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    if not cfg.sweep_axes:
        raise ConfigError("sweep needs config 'sweep': {'axes': [...]}")
    values, result = sweep_mod.parameter_sweep(cfg.params, cfg.sweep_axes,
                                               cfg.sweep_quantity, cfg.threads)
    names = [a.name for a in cfg.sweep_axes]
    rows = []
    for idx in np.ndindex(*result.shape):
        rows.append([v[i] for v, i in zip(values, idx)] + [result[idx]])
    _write_csv(out / "sweep.csv", names + [cfg.sweep_quantity], rows)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    checks = run_verification(cfg.params, cfg.cavity, cfg.convention,
                              cfg.literal_rho10, cfg.seed)
    for c in checks:
        print(c.line())
    (out / "verify_report.json").write_text(
        report_json(checks, {"convention": cfg.convention.value,
                             "literal_rho10": cfg.literal_rho10, "seed": cfg.seed}),
        encoding="utf-8")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {
    "susceptibility": cmd_susceptibility,
    "cavity": cmd_cavity,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdmcavity", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    ap.add_argument("--preset", choices=[PRESET_NAME])
    ap.add_argument("--convention", choices=[c.value for c in Convention])
    ap.add_argument("--eq1-printed", action="store_true",
                    help="use the literal -i Te rho10 term in the rho10 equation")
    ap.add_argument("--threads", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.preset)
        if args.convention:
            cfg.convention = Convention(args.convention)
        if args.threads is not None:
            cfg.threads = args.threads
        cfg.literal_rho10 = args.eq1_printed
        out = Path(args.out or os.environ.get(OUT_ENV) or "out")
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory: {exc}") from None
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, CellError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QdmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
