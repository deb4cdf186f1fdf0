"""End-to-end consistency checks between the closed forms and the oracle."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics
from .cavity import (
    CavityParams,
    cavity_for_xi,
    measure_fwhm,
    microcavity,
    modified_linewidth,
    round_trip_absorption,
    transmission_spectrum,
    window_response,
)
from .errors import QdmError
from .model import ProbeField, QdmParams
from .susceptibility import (
    Convention,
    chi,
    chi_canonical,
    chi_printed,
    denominator,
    dispersion_exact,
)


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.1e}) {self.detail}".rstrip()


def _check(name, measured, tol, detail="", upper=True):
    ok = bool(np.isfinite(measured) and (measured <= tol if upper else measured >= tol))
    return Check(name, float(measured), float(tol), ok, detail)


def random_params(rng: np.random.Generator, n: int) -> list[QdmParams]:
    """Random QDM parameter sets used by the oracle checks.

    ``Gamma12`` is set to the smallest value compatible with a positive
    density matrix, ``(gamma10 + gamma20) / 2``; with no 1-2 dephasing the
    literal equations trap population in |2>.
    """
    out = []
    for _ in range(n):
        G20 = 10 ** rng.uniform(-4, -1)
        p = QdmParams(Gamma10=1.0, Gamma20=G20, Te=rng.uniform(0.1, 2.0),
                      omega12=rng.uniform(-1.0, 1.0))
        out.append(p.replace(Gamma12=0.5 * (p.gamma10 + p.gamma20)))
    return out


def rel_error(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.abs(b)


# -- individual checks ------------------------------------------------------

def check_weak_field_oracle(rng, literal_rho10=False, n_sets=5, n_grid=201) -> Check:
    """Numerical linear response of the equations of motion vs the closed form."""
    grid = np.linspace(-5, 5, n_grid)
    worst = 0.0
    for p in random_params(rng, n_sets):
        oracle = np.array([-dynamics.linear_response(p, D, literal_rho10) for D in grid])
        worst = max(worst, float(np.max(rel_error(oracle, chi_canonical(p, grid).chi))))
    return _check("oracle_weak_field", worst, 1e-10,
                  f"{n_sets} sets x {n_grid} detunings")


def check_d_identity(rng, literal_rho10=False, n_draws=100) -> Check:
    """Denominator implied by the oracle's first-order state vs the printed D.

    With ``rho10 / g = -i B / (A B + Te^2)`` the printed denominator is
    ``|B|^2 / |rho10 / g|^2``; the literal rho10 equation breaks this.
    """
    worst = 0.0
    for _ in range(n_draws):
        p = QdmParams(Gamma10=1.0, Gamma20=10 ** rng.uniform(-5, 0),
                      Te=rng.uniform(0, 3), omega12=rng.uniform(-2, 2))
        D = rng.uniform(-5, 5)
        B = 1j * (D - p.omega12) + p.Gamma20
        r = dynamics.linear_response(p, D, literal_rho10)
        implied = abs(B) ** 2 / abs(r) ** 2
        worst = max(worst, abs(implied - float(denominator(p, D))) / float(denominator(p, D)))
    variant = "literal -iTe*rho10" if literal_rho10 else "corrected -iTe*rho20"
    return _check("d_identity", worst, 1e-10, f"{n_draws} draws, {variant}")


def check_d_identity_closed_form(rng, n_draws=100) -> Check:
    worst = 0.0
    for _ in range(n_draws):
        G10 = 1.0
        G20 = 10 ** rng.uniform(-5, 0)
        Te, w12, D = rng.uniform(0, 3), rng.uniform(-2, 2), rng.uniform(-5, 5)
        A = 1j * D + G10
        B = 1j * (D - w12) + G20
        lhs = abs(A * B + Te**2) ** 2
        p = QdmParams(Gamma10=G10, Gamma20=G20, Te=Te, omega12=w12)
        worst = max(worst, abs(lhs - float(denominator(p, D))) / float(denominator(p, D)))
    return _check("d_identity_closed_form", worst, 1e-12, f"{n_draws} draws")


def saturation_order(params: QdmParams, Delta: float, gs=(1e-2, 1e-3, 1e-4)) -> tuple[float, list[float]]:
    """Observed order of ``rho10(g)/g -> first-order value`` as g shrinks."""
    ref = dynamics.steady_state_first_order(params, Delta)
    errs = []
    for g in gs:
        r = dynamics.steady_state(params, ProbeField(g, Delta)).rho[1, 0] / g
        errs.append(abs(r - ref) / abs(ref))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(gs[i] / gs[i + 1])
              for i in range(len(gs) - 1)]
    return min(orders), errs


def check_saturation_order(params: QdmParams) -> Check:
    order, errs = saturation_order(params, 0.3)
    return _check("oracle_saturation_order", order, 1.9,
                  f"errors {', '.join(f'{e:.2e}' for e in errs)}", upper=False)


def check_steady_state_residual(params: QdmParams, literal_rho10=False) -> Check:
    worst = 0.0
    for D in (-2.0, -0.3, 0.0, params.omega12, 1.7):
        probe = ProbeField(1e-3, D)
        ss = dynamics.steady_state(params, probe, literal_rho10)
        worst = max(worst, float(np.max(np.abs(dynamics.rhs(ss, params, probe, literal_rho10)))))
    return _check("steady_state_residual", worst, 1e-10)


def conservation_run(params: QdmParams, probe: ProbeField, steps=1000, dt=1e-3,
                     literal_rho10=False):
    """Worst trace, Hermiticity and population violations over an RK4 run."""
    start = dynamics.DensityMatrix.from_vector([0.3, 0.2, 0.1, -0.05, 0.02, 0.1, 0.05, -0.03])
    times, states = dynamics.integrate(start, params, probe,
                                       dynamics.EvolutionConfig(dt, steps * dt),
                                       literal_rho10)
    tr = herm = 0.0
    lo, hi = 1.0, 0.0
    for x in states:
        rho = dynamics.DensityMatrix.from_vector(x)
        tr = max(tr, abs(rho.trace - 1))
        herm = max(herm, rho.hermiticity_error())
        pops = rho.populations
        lo, hi = min(lo, pops.min()), max(hi, pops.max())
    return tr, herm, lo, hi, len(times) - 1


def check_conservation(params: QdmParams, literal_rho10=False) -> list[Check]:
    tr, herm, lo, hi, n = conservation_run(params, ProbeField(0.5, 0.4), literal_rho10=literal_rho10)
    pop_violation = max(0.0, -lo, hi - 1)
    return [
        _check("trace_conservation", tr, 1e-9, f"{n} RK4 steps"),
        _check("hermiticity", herm, 1e-12, f"{n} RK4 steps"),
        _check("population_bounds", pop_violation, 1e-9, f"range [{lo:.3g}, {hi:.3g}]"),
    ]


def check_derivative(params: QdmParams, h=1e-6) -> Check:
    grid = np.linspace(-3, 3, 121) + 0.0123
    exact = np.asarray(dispersion_exact(params, grid).exact)
    fd = (np.asarray(chi_printed(params, grid + h).chi_re)
          - np.asarray(chi_printed(params, grid - h).chi_re)) / (2 * h)
    keep = np.abs(exact) > 1e-3
    return _check("derivative_vs_finite_difference",
                  float(np.max(rel_error(fd[keep], exact[keep]))), 1e-5)


def check_window_reduction(cav: CavityParams) -> Check:
    worst = 0.0
    for xi in (0.0, 0.5, 10.0, 999.0, 1e5):
        got = modified_linewidth(cav.empty_linewidth, cav.r, 1.0, xi)
        want = cav.empty_linewidth / (1 + xi)
        worst = max(worst, abs(got - want) / want)
    return _check("window_reduction", worst, 1e-14)


def check_convention(cav: CavityParams, convention) -> Check:
    """Feed the selected convention's chi'' into the round-trip absorption."""
    p = QdmParams(Gamma10=1.0, Gamma20=1e-4, Te=0.0)
    try:
        kappa = round_trip_absorption(cav, chi(p, 0.0, convention).chi_im)
    except QdmError as exc:
        return Check("convention_guard", math.nan, 1.0, False,
                     f"{type(exc).__name__}: {exc}")
    return _check("convention_guard", kappa, 1.0, f"kappa={kappa:.3e} with {Convention(convention).value} chi''")


def check_cavity_self_consistency(params: QdmParams, xi=999.0) -> Check:
    p = params.replace(Te=4.0)
    cav = cavity_for_xi(microcavity(), p, xi)
    resp, window = window_response(cav, p)
    grid = np.linspace(window - 5 * resp.linewidth, window + 5 * resp.linewidth, 20001)
    spec = transmission_spectrum(cav, p, grid)
    measured = measure_fwhm(spec.Delta, spec.T)
    return _check("cavity_self_consistency", abs(measured - resp.linewidth) / resp.linewidth,
                  0.05, f"xi={resp.xi:.0f}, kappa={resp.kappa:.5f}")


# -- suite ------------------------------------------------------------------

def run_verification(params: QdmParams, cav: CavityParams,
                     convention=Convention.CANONICAL, literal_rho10=False,
                     seed: int = 0) -> list[Check]:
    """Run every check; numerical failures are reported, not raised."""
    rng = np.random.default_rng(seed)
    oracle_params = params.replace(Gamma12=max(params.Gamma12, 0.5 * (params.gamma10 + params.gamma20)),
                                   Te=params.Te or 0.5)
    steps = [
        ("oracle_weak_field", lambda: check_weak_field_oracle(rng, literal_rho10)),
        ("d_identity", lambda: check_d_identity(rng, literal_rho10)),
        ("d_identity_closed_form", lambda: check_d_identity_closed_form(rng)),
        ("oracle_saturation_order", lambda: check_saturation_order(oracle_params)),
        ("steady_state_residual", lambda: check_steady_state_residual(oracle_params, literal_rho10)),
        ("conservation", lambda: check_conservation(oracle_params, literal_rho10)),
        ("derivative_vs_finite_difference", lambda: check_derivative(oracle_params)),
        ("window_reduction", lambda: check_window_reduction(cav)),
        ("convention_guard", lambda: check_convention(cav, convention)),
        ("cavity_self_consistency", lambda: check_cavity_self_consistency(params)),
    ]
    checks: list[Check] = []
    for name, step in steps:
        try:
            result = step()
        except QdmError as exc:
            result = Check(name, math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")
        checks.extend(result if isinstance(result, list) else [result])
    return checks


def report_json(checks: list[Check], meta: dict | None = None) -> str:
    rows = []
    for c in checks:
        d = asdict(c)
        for k in ("measured", "tolerance"):
            if not math.isfinite(d[k]):
                d[k] = None
        rows.append(d)
    doc = {"passed": all(c.passed for c in checks), "checks": rows, "meta": meta or {}}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
