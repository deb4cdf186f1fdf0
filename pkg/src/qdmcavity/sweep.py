"""Parameter grids, figure data and order-stable parallel evaluation."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .cavity import (
    CavityParams,
    TransmissionSpectrum,
    measure_fwhm,
    peak_position,
    transmission_spectrum,
)
from .errors import CellError, ConfigError, NoTunnelingError
from .model import QdmParams, UnitContext, to_scaled
from .susceptibility import chi_canonical, dispersion_exact, find_transparency_window


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class GridSpec:
    name: str
    start: float
    stop: float
    count: int
    spacing: Spacing = Spacing.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        if not self.start < self.stop:
            raise ConfigError(f"grid {self.name!r}: need start < stop")
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError(f"grid {self.name!r}: count must be an integer >= 2")
        if self.spacing is Spacing.LOG and self.start <= 0:
            raise ConfigError(f"grid {self.name!r}: log spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.spacing is Spacing.LOG:
            return np.geomspace(self.start, self.stop, int(self.count))
        return np.linspace(self.start, self.stop, int(self.count))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spacing"] = self.spacing.value
        return d

    @classmethod
    def from_dict(cls, data: dict, name: str | None = None) -> "GridSpec":
        allowed = {"name", "start", "stop", "count", "spacing"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown grid key(s): {sorted(unknown)}")
        data = dict(data)
        if name is not None:
            data.setdefault("name", name)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad grid specification: {exc}") from None


# -- ordered parallel map ---------------------------------------------------

def _call(evaluator, index, cell):
    try:
        return evaluator(cell)
    except Exception as exc:  # noqa: BLE001 - re-raised with the cell index
        raise CellError(index, exc) from exc


def run_sweep_parallel(work: Sequence, evaluator: Callable[[Any], Any],
                       threads: int | None = None, processes: bool = False) -> list:
    """Evaluate ``evaluator`` on every cell and return results in input order.

    The evaluator must be a pure function of its cell, so the result does not
    depend on scheduling.  The first failing cell, by index, aborts the sweep
    with a :class:`CellError` carrying that index.
    """
    work = list(work)
    if threads is None or threads <= 1 or len(work) <= 1:
        return [_call(evaluator, i, c) for i, c in enumerate(work)]
    pool_cls = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool_cls(max_workers=threads) as pool:
        futures = [pool.submit(_call, evaluator, i, c) for i, c in enumerate(work)]
        try:
            return [f.result() for f in futures]
        except CellError:
            for f in futures:
                f.cancel()
            raise


# -- dispersion surface -----------------------------------------------------

@dataclass(frozen=True)
class SurfaceResult:
    """Values on a 2D grid, row index along ``axes[0]``.

    ``values`` holds the plotted magnitude and ``raw`` the signed quantity.
    Cells above ``clip_threshold`` (or not computable) are flagged in
    ``clipped_mask`` but keep their value.
    """

    axes: tuple[GridSpec, GridSpec]
    values: np.ndarray
    raw: np.ndarray
    clip_threshold: float | None
    clipped_mask: np.ndarray
    meta: dict


def window_dispersion(params: QdmParams) -> float:
    """Signed d(chi')/d(omega_p) at the transparency window."""
    window = find_transparency_window(params)
    return float(dispersion_exact(params, window).wrt_probe)


def _surface_cell(cell):
    te, gamma10, ratio = cell
    if te == 0:
        return math.nan
    params = QdmParams(Gamma10=gamma10, Gamma20=ratio * gamma10, Te=te)
    return window_dispersion(params)


def dispersion_surface(te_grid: GridSpec, gamma10_grid_ueV: GridSpec, ctx: UnitContext,
                       clip: float = 7.0, gamma20_ratio: float = 1e-4,
                       threads: int | None = None) -> SurfaceResult:
    """Window dispersion over tunneling and sample linewidth.

    ``te_grid`` is in units of the reference scale ``ctx.hbar_Gamma10_ueV``
    and so is the returned dispersion.  Each cell rescales Gamma10 to the
    sample linewidth and sets ``Gamma20 = gamma20_ratio * Gamma10``.
    """
    if not clip > 0:
        raise ConfigError("clip threshold must be > 0")
    tes = te_grid.values()
    g10 = np.array([to_scaled(v, ctx) for v in gamma10_grid_ueV.values()])
    cells = [(float(t), float(g), gamma20_ratio) for t in tes for g in g10]
    flat = run_sweep_parallel(cells, _surface_cell, threads=threads)
    raw = np.array(flat, dtype=float).reshape(tes.size, g10.size)
    values = np.abs(raw)
    mask = ~np.isfinite(values) | (values > clip)
    meta = {
        "quantity": "|d chi'/d omega_p| at the transparency window",
        "units": f"inverse units of hbar*Gamma = {ctx.hbar_Gamma10_ueV} ueV",
        "gamma20_ratio": gamma20_ratio,
        "ctx": asdict(ctx),
    }
    return SurfaceResult((te_grid, gamma10_grid_ueV), values, raw, clip, mask, meta)


def default_fig3_grids() -> tuple[GridSpec, GridSpec]:
    return (GridSpec("Te", 0.05, 1.5, 61), GridSpec("Gamma10_ueV", 6.0, 50.0, 45))


# -- transmission family ----------------------------------------------------

FIG2_SCENARIOS = (
    ("a", "empty cavity", None),
    ("b", "Te=0, omega12=0", {"Te": 0.0, "omega12": 0.0}),
    ("c", "Te=0.5, omega12=0", {"Te": 0.5, "omega12": 0.0}),
    ("d", "Te=0.5, omega12=0.2", {"Te": 0.5, "omega12": 0.2}),
    ("e", "Te=1, omega12=0", {"Te": 1.0, "omega12": 0.0}),
)


@dataclass(frozen=True)
class LabeledSpectrum:
    label: str
    description: str
    params: QdmParams | None
    spectrum: TransmissionSpectrum

    @property
    def peak(self) -> float:
        return float(np.max(self.spectrum.T))

    @property
    def peak_position(self) -> float:
        return peak_position(self.spectrum)

    def fwhm(self) -> float:
        return measure_fwhm(self.spectrum.Delta, self.spectrum.T)


def default_fig2_grid() -> np.ndarray:
    return np.linspace(-1.5, 1.5, 15001)


def figure2_family(cav: CavityParams, base: QdmParams, grid=None,
                   scenarios: Iterable = FIG2_SCENARIOS) -> list[LabeledSpectrum]:
    """Transmission spectra of the empty and loaded cavity on a common grid."""
    grid = default_fig2_grid() if grid is None else grid
    out = []
    for label, text, overrides in scenarios:
        params = None if overrides is None else base.replace(**overrides)
        out.append(LabeledSpectrum(label, text, params,
                                   transmission_spectrum(cav, params, grid)))
    return out


# -- generic sweeps ---------------------------------------------------------

SWEEP_QUANTITIES = ("window_dispersion", "window", "window_absorption")


def _generic_cell(cell):
    params, quantity = cell
    try:
        window = find_transparency_window(params)
    except NoTunnelingError:
        return math.nan
    if quantity == "window":
        return window
    if quantity == "window_absorption":
        return float(chi_canonical(params, window).chi_im)
    return float(dispersion_exact(params, window).wrt_probe)


def parameter_sweep(base: QdmParams, axes: Sequence[GridSpec],
                    quantity: str = "window_dispersion",
                    threads: int | None = None) -> tuple[list[np.ndarray], np.ndarray]:
    """Evaluate a window quantity over a 1D or 2D grid of QDM parameters.

    Axis names must be fields of :class:`QdmParams`.
    """
    if quantity not in SWEEP_QUANTITIES:
        raise ConfigError(f"unknown sweep quantity {quantity!r}")
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep needs one or two axes")
    fields = set(QdmParams.__dataclass_fields__)
    for ax in axes:
        if ax.name not in fields:
            raise ConfigError(f"sweep axis {ax.name!r} is not a QDM parameter")
    values = [ax.values() for ax in axes]
    cells = []
    for idx in np.ndindex(*[v.size for v in values]):
        over = {ax.name: float(v[i]) for ax, v, i in zip(axes, values, idx)}
        cells.append((base.replace(**over), quantity))
    flat = run_sweep_parallel(cells, _generic_cell, threads=threads)
    return values, np.array(flat, dtype=float).reshape([v.size for v in values])


# -- serialisation ----------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits: round-trips every double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def surface_to_csv(surface: SurfaceResult) -> str:
    a0, a1 = surface.axes
    v0, v1 = a0.values(), a1.values()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([a0.name, a1.name, "raw_value", "plotted_value", "clipped"])
    for i, x in enumerate(v0):
        for j, y in enumerate(v1):
            w.writerow([fmt(x), fmt(y), fmt(surface.raw[i, j]),
                        fmt(surface.values[i, j]), int(surface.clipped_mask[i, j])])
    return buf.getvalue()


def _json_matrix(m):
    return [[None if not np.isfinite(v) else float(v) for v in row] for row in m]


def surface_to_json(surface: SurfaceResult, config: dict | None = None) -> str:
    doc = {
        "axes": [a.to_dict() for a in surface.axes],
        "axis_values": [[float(v) for v in a.values()] for a in surface.axes],
        "raw": _json_matrix(surface.raw),
        "values": _json_matrix(surface.values),
        "clipped_mask": surface.clipped_mask.astype(int).tolist(),
        "clip_threshold": surface.clip_threshold,
        "meta": surface.meta,
        "config": config or {},
    }
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"
