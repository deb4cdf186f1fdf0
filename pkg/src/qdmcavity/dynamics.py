"""Density-matrix oracle for the three-level quantum-dot molecule.

The equations of motion are integrated and solved directly, with no use of
the closed-form susceptibility, so the two routes can check each other.

State vector
------------
Hermiticity and unit trace are built into the parameterisation.  Only the
eight independent real components are evolved::

    x = [rho11, rho22, Re rho10, Im rho10, Re rho20, Im rho20, Re rho12, Im rho12]

and ``rho00 = 1 - rho11 - rho22``.  The right-hand side is affine in ``x``,
so ``x' = M x + b``.  ``M`` and ``b`` are read off the matrix-element
equations by evaluating them on the unit vectors.

The ``literal_rho10`` flag switches the tunneling term of the rho10 equation
to the literal ``-i Te rho10``.  The default couples to ``rho20``, which is
what the Hamiltonian with a ``Te`` matrix element between |1> and |2>
produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDenominatorError,
    SingularSystemError,
    StepTooLargeError,
)
from .model import ProbeField, QdmParams
from .susceptibility import ComplexResponse, Convention

_N = 8


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray

    @classmethod
    def ground(cls) -> "DensityMatrix":
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    @classmethod
    def from_vector(cls, x) -> "DensityMatrix":
        rho = np.empty((3, 3), dtype=complex)
        rho[1, 1] = x[0]
        rho[2, 2] = x[1]
        rho[0, 0] = 1.0 - x[0] - x[1]
        rho[1, 0] = x[2] + 1j * x[3]
        rho[2, 0] = x[4] + 1j * x[5]
        rho[1, 2] = x[6] + 1j * x[7]
        rho[0, 1] = np.conj(rho[1, 0])
        rho[0, 2] = np.conj(rho[2, 0])
        rho[2, 1] = np.conj(rho[1, 2])
        return cls(rho)

    def to_vector(self) -> np.ndarray:
        r = self.rho
        return np.array([
            r[1, 1].real, r[2, 2].real,
            r[1, 0].real, r[1, 0].imag,
            r[2, 0].real, r[2, 0].imag,
            r[1, 2].real, r[1, 2].imag,
        ])

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.rho).real.copy()

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_end: float
    method: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be >= 0")
        if self.method != "rk4":
            raise ConfigError(f"unsupported method {self.method!r}")


def rhs(state: DensityMatrix, params: QdmParams, probe: ProbeField,
        literal_rho10: bool = False) -> np.ndarray:
    """Time derivative of the full 3x3 density matrix.

    The six independent lines are written out as matrix elements; the other
    three follow from Hermiticity.
    """
    r = state.rho
    g, D = probe.g, probe.Delta
    Te, w12 = params.Te, params.omega12
    G10, G20, G12 = params.Gamma10, params.Gamma20, params.Gamma12
    g10, g20 = params.gamma10, params.gamma20

    out = np.empty((3, 3), dtype=complex)
    out[0, 0] = g10 * r[1, 1] + g20 * r[2, 2] + 1j * g * (r[0, 1] - r[1, 0])
    out[1, 1] = (-g10 * r[1, 1] + 1j * Te * (r[1, 2] - r[2, 1])
                 + 1j * g * (r[1, 0] - r[0, 1]))
    out[2, 2] = -g20 * r[2, 2] + 1j * Te * (r[2, 1] - r[1, 2])
    tunnel_partner = r[1, 0] if literal_rho10 else r[2, 0]
    out[1, 0] = (-(1j * D + G10) * r[1, 0] - 1j * g * (r[0, 0] - r[1, 1])
                 - 1j * Te * tunnel_partner)
    out[2, 0] = (-(1j * (D - w12) + G20) * r[2, 0] + 1j * g * r[2, 1]
                 - 1j * Te * r[1, 0])
    out[1, 2] = (-(1j * w12 + G12) * r[1, 2] - 1j * Te * (r[2, 2] - r[1, 1])
                 - 1j * g * r[0, 2])
    out[0, 1] = np.conj(out[1, 0])
    out[0, 2] = np.conj(out[2, 0])
    out[2, 1] = np.conj(out[1, 2])
    return out


def _vector_rhs(x, params, probe, literal_rho10):
    d = rhs(DensityMatrix.from_vector(x), params, probe, literal_rho10)
    return np.array([
        d[1, 1].real, d[2, 2].real,
        d[1, 0].real, d[1, 0].imag,
        d[2, 0].real, d[2, 0].imag,
        d[1, 2].real, d[1, 2].imag,
    ])


def affine_system(params: QdmParams, probe: ProbeField,
                  literal_rho10: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(M, b)`` with ``dx/dt = M @ x + b`` on the 8 real unknowns."""
    b = _vector_rhs(np.zeros(_N), params, probe, literal_rho10)
    cols = [_vector_rhs(e, params, probe, literal_rho10) - b for e in np.eye(_N)]
    return np.column_stack(cols), b


def max_stable_dt(params: QdmParams, probe: ProbeField) -> float:
    return 0.01 / max(1.0, abs(probe.Delta), params.Te, probe.g)


def integrate(state0: DensityMatrix, params: QdmParams, probe: ProbeField,
              cfg: EvolutionConfig, literal_rho10: bool = False,
              check_stability: bool = True):
    """Fixed-step RK4 integration.

    Returns
    -------
    times : ndarray, shape (n+1,)
    states : ndarray, shape (n+1, 8)
        Independent components at every step, including the initial state.
        Use :meth:`DensityMatrix.from_vector` to rebuild matrices.
    """
    if check_stability and cfg.dt > max_stable_dt(params, probe):
        raise StepTooLargeError(
            f"dt={cfg.dt} exceeds stability bound {max_stable_dt(params, probe):.3g}"
        )
    M, b = affine_system(params, probe, literal_rho10)
    n_full = int(np.floor(cfg.t_end / cfg.dt + 1e-12))
    steps = [cfg.dt] * n_full
    rest = cfg.t_end - n_full * cfg.dt
    if rest > 1e-12 * cfg.dt:
        steps.append(rest)

    x = state0.to_vector()
    states = np.empty((len(steps) + 1, _N))
    times = np.empty(len(steps) + 1)
    states[0], times[0] = x, 0.0
    t = 0.0
    for i, h in enumerate(steps, start=1):
        k1 = M @ x + b
        k2 = M @ (x + 0.5 * h * k1) + b
        k3 = M @ (x + 0.5 * h * k2) + b
        k4 = M @ (x + h * k3) + b
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        states[i], times[i] = x, t
    return times, states


def evolve(state0: DensityMatrix, params: QdmParams, probe: ProbeField,
           cfg: EvolutionConfig, literal_rho10: bool = False) -> DensityMatrix:
    if cfg.t_end == 0:
        return state0
    _, states = integrate(state0, params, probe, cfg, literal_rho10)
    return DensityMatrix.from_vector(states[-1])


def steady_state(params: QdmParams, probe: ProbeField,
                 literal_rho10: bool = False, rcond: float = 1e-13) -> DensityMatrix:
    """Stationary state of the full (nonlinear in g) equations.

    Raises
    ------
    SingularSystemError
        If the stationary state is not unique, e.g. without any relaxation.
    """
    M, b = affine_system(params, probe, literal_rho10)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < rcond:
        raise SingularSystemError("steady state is not unique for these parameters")
    x = np.linalg.solve(M, -b)
    return DensityMatrix.from_vector(x)


def linear_response(params: QdmParams, Delta: float,
                    literal_rho10: bool = False) -> complex:
    """``rho10 / g`` in the limit g -> 0, solved numerically.

    At g = 0 the optical coherences rho10 and rho20 decouple from the
    populations and rho12, and the drive enters only through rho10.  The
    derivative of the steady state with respect to g is therefore the
    solution of that 4x4 coherence block driven by the g = 1 source.
    """
    M0, _ = affine_system(params, ProbeField(0.0, Delta), literal_rho10)
    _, b1 = affine_system(params, ProbeField(1.0, Delta), literal_rho10)
    block = slice(2, 6)
    coupling = np.delete(M0[block], np.s_[2:6], axis=1)
    assert not np.any(coupling), "optical coherences must decouple at g = 0"
    try:
        y = np.linalg.solve(M0[block, block], -b1[block])
    except np.linalg.LinAlgError:
        raise SingularSystemError("coherence block is singular") from None
    return complex(y[0], y[1])


def steady_state_first_order(params: QdmParams, Delta: float) -> complex:
    """Closed form of ``rho10 / g`` to first order in the probe field."""
    A = 1j * Delta + params.Gamma10
    B = 1j * (Delta - params.omega12) + params.Gamma20
    den = A * B + params.Te**2
    if den == 0:
        raise DegenerateDenominatorError("A*B + Te^2 vanished")
    return -1j * B / den


def susceptibility_from_oracle(params: QdmParams, Delta, g: float,
                               literal_rho10: bool = False) -> ComplexResponse:
    """Canonical susceptibility ``-rho10 / g`` from the full steady state.

    ``Delta`` may be a scalar or an array.  ``g = 0`` falls back to the
    closed-form first-order result.
    """
    deltas = np.atleast_1d(np.asarray(Delta, dtype=float))
    out = np.empty(deltas.size, dtype=complex)
    for i, D in enumerate(deltas):
        if g == 0:
            out[i] = -steady_state_first_order(params, D)
        else:
            try:
                rho = steady_state(params, ProbeField(g, D), literal_rho10).rho
            except SingularSystemError as exc:
                raise SingularSystemError(f"{exc} (Delta={D})") from None
            out[i] = -rho[1, 0] / g
    if np.ndim(Delta) == 0:
        return ComplexResponse(out[0].real, out[0].imag, Convention.CANONICAL)
    return ComplexResponse(out.real, out.imag, Convention.CANONICAL)
