"""Pseudospectral RK4 solver for the generalized BBM-type system.

The evolved system is

    (I - eps b Lap) eta_t + div V + eps div(eta W1 + h V + beta eta V) = eps f
    (I - eps d Lap) V_t + grad eta + eps (W2 + beta V).grad V + eps V.grad W3 = eps g

with optional Friedrichs truncation ``E_m`` of both right-hand sides.
Internally states are ``(eta, V)`` numpy arrays with ``V`` of shape
``(dim, *grid.shape)`` and transforms use the real FFT.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .bore import BufferZone, State, extend_1d, low_high_split
from .diagnostics import EnergyLedger, buffer_monitor, modified_energies
from .errors import BlowUpError, ConfigurationError, DomainError
from .littlewood_paley import (
    BesovSpec,
    DyadicPartition,
    EnergyWeights,
    besov_norm,
    block_energies,
    build_partition,
    e_norm,
    sup_norm,
)
from .linear_waves import (
    WaveBackground,
    _forcing_arrays,
    embedding_constant,
    linear_bbm_propagate,
)
from .spectral import Field, GridSpec, gradient

__all__ = [
    "E_SQRT7",
    "ModelParams",
    "TimeSeries",
    "CoefficientSet",
    "SolverConfig",
    "BBMSystem",
    "rhs_eval",
    "rk4_step",
    "step",
    "RunResult",
    "run",
    "solve_1d_bore",
    "solve_2d_bore",
    "BootstrapConstants",
    "bootstrap_constants",
    "TStar",
    "t_star_measure",
]

E_SQRT7 = math.e * math.sqrt(7.0)
THRESHOLD_FACTOR = 1.0 + E_SQRT7


@dataclass(frozen=True)
class ModelParams:
    """Coefficients ``(b, d, eps, beta)``; ``bbm_sum`` enforces ``b + d = 1/3``."""

    b: float
    d: float
    eps: float
    beta: float = 1.0
    bbm_sum: bool = False

    def __post_init__(self):
        for name in ("b", "d", "eps", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigurationError(f"must be a finite number, got {v!r}", f"params.{name}")
        if self.b < 0 or self.d < 0:
            raise ConfigurationError("b and d must be nonnegative", "params.b" if self.b < 0 else "params.d")
        if not 0 <= self.eps <= 1:
            raise ConfigurationError(f"eps must lie in [0, 1], got {self.eps}", "params.eps")
        if not 0 <= self.beta <= 1:
            raise ConfigurationError(f"beta must lie in [0, 1], got {self.beta}", "params.beta")
        if self.bbm_sum and abs(self.b + self.d - 1.0 / 3.0) >= 1e-12:
            raise ConfigurationError(f"b + d = {self.b + self.d} differs from 1/3", "params.b")

    @property
    def regularized(self) -> bool:
        return self.b + self.d > 0

    def weights(self, s: float) -> EnergyWeights:
        return EnergyWeights(self.b, self.d, self.eps, s)


@dataclass(frozen=True)
class TimeSeries:
    """Samples of a coefficient at increasing times, interpolated linearly."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        times = np.asarray(self.times, float)
        i = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
        w = (t - times[i]) / (times[i + 1] - times[i])
        return (1 - w) * self.values[i] + w * self.values[i + 1]


def _evaluate(coef, t):
    if coef is None:
        return None
    if callable(coef):
        return np.asarray(coef(t), float)
    return np.asarray(getattr(coef, "samples", coef), float)


@dataclass
class CoefficientSet:
    """Coefficients ``h, W1, W2, W3, f, g`` of the system.

    Each entry is ``None`` (zero), a static array or Field, a ``TimeSeries``
    or a callable ``t -> array``. Vector entries (W1, W2, W3, g) have shape
    ``(dim, *grid.shape)``. ``dt_h`` is only used by diagnostics.
    """

    h: object = None
    W1: object = None
    W2: object = None
    W3: object = None
    f: object = None
    g: object = None
    dt_h: object = None

    def at(self, t: float) -> dict:
        return {name: _evaluate(getattr(self, name), t)
                for name in ("h", "W1", "W2", "W3", "f", "g", "dt_h")}

    @property
    def is_zero(self) -> bool:
        return all(getattr(self, n) is None for n in ("h", "W1", "W2", "W3", "f", "g"))


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping, truncation and ledger settings of a run."""

    dt: float
    t_end: float
    friedrichs_m: float | None = None
    dealias: bool = True
    ledger_stride: float = 0.05
    s: float = 2.0
    r: float = 2
    p1: float = 2
    stop_on_threshold: bool = True
    threshold_factor: float = THRESHOLD_FACTOR
    abort_on_contamination: bool = True
    leak_tol: float = 1e-4
    checkpoint_stride: float | None = None
    enforce_cfl: bool = True
    ledger_blocks: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt}", "solver.dt")
        if not self.t_end >= 0:
            raise ConfigurationError(f"t_end must be nonnegative, got {self.t_end}", "solver.t_end")
        if self.friedrichs_m is not None and not self.friedrichs_m > 0:
            raise ConfigurationError("m must be positive", "solver.m")
        if not self.ledger_stride > 0:
            raise ConfigurationError("stride must be positive", "ledger.stride")

    def check_against(self, grid: GridSpec, params: ModelParams) -> None:
        if self.enforce_cfl and (params.b == 0 or params.d == 0):
            limit = 0.5 * min(grid.spacing)
            if self.dt > limit:
                raise ConfigurationError(
                    f"dt={self.dt} exceeds the advective limit {limit:.4g} required when b or d is 0",
                    "solver.dt")


class BBMSystem:
    """Right-hand side of the system on one grid.

    Holds precomputed symbols on the real-FFT lattice; instances carry no
    state between calls but are not meant to be shared across threads.
    """

    def __init__(self, grid: GridSpec, params: ModelParams, coeffs: CoefficientSet | None = None,
                 friedrichs_m: float | None = None, dealias: bool = True):
        self.grid = grid
        self.params = params
        self.coeffs = coeffs or CoefficientSet()
        self.dim = grid.dim
        self.axes = tuple(range(grid.dim))
        ks, idx = [], []
        for l in range(grid.dim):
            n = grid.points[l]
            if l == grid.dim - 1:
                i = np.arange(n // 2 + 1)
            else:
                i = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
            k = 2 * np.pi * i / grid.lengths[l]
            kd = np.where(np.abs(i) == n // 2, 0.0, k)
            shape = [1] * grid.dim
            shape[l] = len(i)
            ks.append((k.reshape(shape), kd.reshape(shape), np.abs(i).reshape(shape) * 3 < n))
        self.ik = [1j * kd for _, kd, _ in ks]
        k2 = sum(kd**2 for _, kd, _ in ks)
        kabs = np.sqrt(sum(k**2 for k, _, _ in ks))
        mask = np.ones(kabs.shape, bool)
        if dealias:
            for _, _, m in ks:
                mask = mask & m
        self.mask = mask
        proj = np.ones(kabs.shape)
        if friedrichs_m is not None:
            proj = (kabs <= friedrichs_m).astype(float)
        self.proj = proj
        self.m = friedrichs_m
        e = params.eps
        self.op_eta = proj / (1.0 + e * params.b * k2)
        self.op_V = proj / (1.0 + e * params.d * k2)

    def fwd(self, a):
        return np.fft.rfftn(a, axes=self.axes)

    def inv(self, a):
        return np.fft.irfftn(a, s=self.grid.shape, axes=self.axes)

    def project(self, a):
        """Apply ``E_m`` to a physical array."""
        if self.m is None:
            return a
        return self.inv(self.fwd(a) * self.proj)

    def _low(self, a):
        return self.inv(self.fwd(a) * self.mask)

    def evaluate(self, eta, V, t, co: dict):
        """``(eta_t, V_t)`` for arrays ``eta`` and ``V`` with coefficients ``co`` at ``t``."""
        p = self.params
        eps, beta = p.eps, p.beta
        E = self.fwd(eta)
        Vh = [self.fwd(v) for v in V]
        div_V = sum(self.ik[l] * Vh[l] for l in range(self.dim))
        rhs_eta = div_V
        rhs_V = [self.ik[k] * E for k in range(self.dim)]
        if eps != 0:
            inv, mask = self.inv, self.mask
            eta_d = inv(E * mask)
            V_d = [inv(v * mask) for v in Vh]
            h = co.get("h")
            W1, W2, W3 = co.get("W1"), co.get("W2"), co.get("W3")
            h_d = None if h is None else self._low(h)
            flux = []
            for l in range(self.dim):
                q = beta * eta_d * V_d[l]
                if W1 is not None:
                    q = q + eta_d * self._low(W1[l])
                if h_d is not None:
                    q = q + h_d * V_d[l]
                flux.append(q)
            div_flux = sum(self.ik[l] * self.fwd(flux[l]) for l in range(self.dim)) * mask
            rhs_eta = rhs_eta + eps * div_flux
            if co.get("f") is not None:
                rhs_eta = rhs_eta - eps * self.fwd(co["f"])
            adv_vel = [beta * V_d[m] + (0.0 if W2 is None else self._low(W2[m])) for m in range(self.dim)]
            if W3 is not None:
                W3h = [self.fwd(w) * mask for w in W3]
            for k in range(self.dim):
                a = sum(adv_vel[m] * inv(self.ik[m] * Vh[k] * mask) for m in range(self.dim))
                if W3 is not None:
                    a = a + sum(V_d[m] * inv(self.ik[m] * W3h[k]) for m in range(self.dim))
                rhs_V[k] = rhs_V[k] + eps * self.fwd(a) * mask
                if co.get("g") is not None:
                    rhs_V[k] = rhs_V[k] - eps * self.fwd(co["g"][k])
        eta_t = self.inv(-self.op_eta * rhs_eta)
        V_t = np.stack([self.inv(-self.op_V * r) for r in rhs_V])
        if not (np.all(np.isfinite(eta_t)) and np.all(np.isfinite(V_t))):
            raise BlowUpError(t)
        return eta_t, V_t

    def rhs(self, y, t):
        return self.evaluate(y[0], y[1], t, self.coeffs.at(t))


def rhs_eval(state: State, t: float, params: ModelParams, coeffs: CoefficientSet | None = None,
             config: SolverConfig | None = None) -> State:
    """Time derivative of ``state`` as a State."""
    m = None if config is None else config.friedrichs_m
    dealias = True if config is None else config.dealias
    sys = BBMSystem(state.grid, params, coeffs, m, dealias)
    eta, V = state.arrays()
    d_eta, d_V = sys.rhs((eta, V), t)
    return State.from_arrays(state.grid, d_eta, d_V)


def rk4_step(system, y: tuple, t: float, dt: float) -> tuple:
    """Classical four-stage Runge-Kutta step on a tuple of arrays."""
    k1 = system.rhs(y, t)
    k2 = system.rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)), t + 0.5 * dt)
    k3 = system.rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)), t + 0.5 * dt)
    k4 = system.rhs(tuple(a + dt * b for a, b in zip(y, k3)), t + dt)
    return tuple(a + dt / 6.0 * (p + 2 * q + 2 * r + s)
                 for a, p, q, r, s in zip(y, k1, k2, k3, k4))


def step(state: State, t: float, dt: float, params: ModelParams,
         coeffs: CoefficientSet | None = None, config: SolverConfig | None = None) -> State:
    """Advance ``state`` by one RK4 step."""
    m = None if config is None else config.friedrichs_m
    dealias = True if config is None else config.dealias
    sys = BBMSystem(state.grid, params, coeffs, m, dealias)
    eta, V = rk4_step(sys, state.arrays(), t, dt)
    return State.from_arrays(state.grid, eta, V)


# ------------------------------------------------------------------ running

@dataclass
class RunResult:
    """Outcome of a run: ledger, final state, termination reason, checkpoints."""

    ledger: EnergyLedger
    final: State
    t_final: float
    reason: str
    checkpoints: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    perturbation: State | None = None
    wall_time: float = 0.0

    @property
    def U_s0(self) -> float:
        return float(self.ledger.column("U_s")[0])


class _Recorder:
    """Computes one ledger row from the evolved state and context callbacks."""

    def __init__(self, grid, params, config, system, part=None):
        self.grid = grid
        self.params = params
        self.config = config
        self.system = system
        self.part = part or build_partition(grid)
        self.weights = params.weights(config.s)
        self.spec_W = BesovSpec(config.s, config.p1, config.r)
        self.spec_F = BesovSpec(config.s, 2, config.r)

    def coefficient_norms(self, co: dict):
        """``W_s`` and ``F_s`` from coefficient arrays at one time."""
        g = self.grid
        Ws = 0.0
        h = co.get("h")
        if h is not None:
            hf = Field(g, h)
            Ws += hf.linf() + besov_norm(_grad(hf), self.spec_W, self.part)
            if co.get("dt_h") is not None:
                Ws += float(np.max(np.abs(co["dt_h"])))
        for name in ("W1", "W2", "W3"):
            W = co.get(name)
            if W is not None:
                comps = [Field(g, w) for w in W]
                Ws += sup_norm(comps) + besov_norm([_grad(c) for c in comps], self.spec_W, self.part)
        forcings = []
        if co.get("f") is not None:
            forcings.append(Field(g, co["f"]))
        if co.get("g") is not None:
            forcings.extend(Field(g, c) for c in co["g"])
        Fs = besov_norm(forcings, self.spec_F, self.part) if forcings else 0.0
        return Ws, Fs

    def row(self, t, y, co):
        eta, V = y
        g = self.grid
        st = State.from_arrays(g, eta, V)
        Uj = block_energies(st, self.weights, self.part)
        Us = _lr_weighted(Uj, self.config.s, self.config.r, self.part)
        d_eta, _ = self.system.evaluate(eta, V, t, co)
        grads = [np.abs(x) for f in st.fields() for x in (f.samples, *[gg.samples for gg in _grad(f)])]
        U_inf = max(float(np.max(a)) for a in grads)
        row = {
            "t": t,
            "U_s": Us,
            "max_eta": float(np.max(np.abs(eta))),
            "dt_eta_inf": float(np.max(np.abs(d_eta))),
            "U_inf": U_inf,
            "mass": float(np.sum(eta) * g.cell_volume),
        }
        Ws, Fs = self.coefficient_norms(co)
        row["W_s"], row["F_s"] = Ws, Fs
        Nj = None
        if self.config.ledger_blocks:
            Nj, ok = modified_energies(st, self.weights, self.part, co.get("h"))
            row["window_ok"] = float(ok)
        return row, Uj, Nj


def _grad(f: Field) -> list:
    return gradient(f)


def _lr_weighted(Uj, s, r, part):
    w = 2.0 ** (s * part.indices) * Uj
    if r == math.inf:
        return float(w.max())
    return float(np.sum(w**r) ** (1.0 / r))


def _integrate(system, y0, config: SolverConfig, record: Callable, on_checkpoint=None):
    """Fixed-step RK4 loop; ``record(t, y)`` returns ``None`` or a stop reason."""
    dt = config.dt
    n_steps = int(math.ceil(config.t_end / dt - 1e-9))
    stride = max(1, int(round(config.ledger_stride / dt)))
    cstride = None
    if config.checkpoint_stride:
        cstride = max(1, int(round(config.checkpoint_stride / dt)))
    y, t = y0, 0.0
    try:
        reason = record(0.0, y)
    except FloatingPointError:
        return y, 0.0, "blowup"
    if on_checkpoint and cstride:
        on_checkpoint(0.0, y)
    n = 0
    while reason is None and n < n_steps:
        h = min(dt, config.t_end - n * dt)
        try:
            y = rk4_step(system, y, t, h)
        except BlowUpError as exc:
            return y, exc.t, "blowup"
        n += 1
        t = n * dt if n < n_steps else config.t_end
        if not all(np.all(np.isfinite(a)) for a in y):
            return y, t, "blowup"
        if n % stride == 0 or n == n_steps:
            try:
                reason = record(t, y)
            except FloatingPointError:
                return y, t, "blowup"
        if on_checkpoint and cstride and (n % cstride == 0 or n == n_steps):
            on_checkpoint(t, y)
    return y, t, reason or "horizon"


def _check_stop(ledger: EnergyLedger, config: SolverConfig, leak_report=None):
    U = ledger.scalars["U_s"]
    if config.stop_on_threshold and U[0] > 0 and U[-1] > config.threshold_factor * U[0]:
        return "threshold"
    if leak_report is not None and config.abort_on_contamination and leak_report.contaminated:
        return "contamination"
    return None


def run(initial: State, params: ModelParams, config: SolverConfig,
        coeffs: CoefficientSet | None = None, part: DyadicPartition | None = None) -> RunResult:
    """Direct periodic solve from ``initial``; ``E_m`` is applied to the data when set."""
    grid = initial.grid
    config.check_against(grid, params)
    sys = BBMSystem(grid, params, coeffs, config.friedrichs_m, config.dealias)
    rec = _Recorder(grid, params, config, sys, part)
    ledger = EnergyLedger(config.s, config.r, params.eps, params.beta)
    checkpoints = []
    eta0, V0 = initial.arrays()
    y0 = (sys.project(eta0), np.stack([sys.project(v) for v in V0]))

    def record(t, y):
        co = sys.coeffs.at(t)
        row, Uj, Nj = rec.row(t, y, co)
        row["buffer_leak"] = 0.0
        ledger.append(row, Uj, Nj)
        return _check_stop(ledger, config)

    def keep(t, y):
        checkpoints.append((t, State.from_arrays(grid, y[0], y[1])))

    start = time.perf_counter()
    y, t, reason = _integrate(sys, y0, config, record, keep)
    final = State.from_arrays(grid, y[0], y[1])
    return RunResult(ledger, final, t, reason, checkpoints, {}, final, time.perf_counter() - start)


# -------------------------------------------------------------- bore pipelines

class _BackgroundCoefficients:
    """Coefficients of the perturbation system driven by the acoustic background."""

    def __init__(self, bg: WaveBackground, params: ModelParams):
        self.bg = bg
        self.b, self.d = params.b, params.d
        self.grid = bg.grid
        n = self.grid.points[0]
        k = self.grid.k_axis(0).copy()
        k[n // 2] = 0.0
        self.ik = 1j * k
        self._cache_t = None
        self._cache = None

    def at(self, t: float) -> dict:
        if self._cache_t == t:
            return self._cache
        se, su = self.bg.spectra(t)
        ifft = np.fft.ifft
        eta_L, u_L = ifft(se).real, ifft(su).real
        f, g = _forcing_arrays(se, su, self.grid, self.b, self.d)
        W = u_L[None, :]
        co = {"h": eta_L, "W1": W, "W2": W, "W3": W, "f": ifft(f).real,
              "g": ifft(g).real[None, :], "dt_h": ifft(-self.ik * su).real,
              "u_L": u_L}
        self._cache_t, self._cache = t, co
        return co


class _BoreSystem1D(BBMSystem):
    def __init__(self, grid, params, background: _BackgroundCoefficients, m, dealias):
        super().__init__(grid, params, None, m, dealias)
        self.background = background

    def rhs(self, y, t):
        return self.evaluate(y[0], y[1], t, self.background.at(t))


def _bore_setup(eta0: Field, u0: Field, params: ModelParams, config: SolverConfig, part):
    grid = eta0.grid
    part = part or build_partition(grid)
    split = low_high_split(State(eta0, (u0,)), part, params.weights(config.s), config.r)
    bg = WaveBackground(split.low.eta, split.low.V[0])
    C1 = embedding_constant((split.low.eta, split.low.V[0]), (eta0, u0))
    return grid, part, split, bg, C1


def _leak_reference(high: State, buffer: BufferZone | None, params: ModelParams):
    """Buffer-resident part of the initial perturbation, propagated linearly."""
    if buffer is None or buffer.empty:
        return None
    mask = buffer.mask
    eta_b = Field(high.grid, np.where(mask, high.eta.samples, 0.0))
    u_b = Field(high.grid, np.where(mask, high.V[0].samples, 0.0))

    def reference(t):
        return linear_bbm_propagate(eta_b, u_b, t, params.eps, params.b, params.d)[0]

    return reference


def solve_1d_bore(eta0: Field, u0: Field, params: ModelParams, config: SolverConfig,
                  buffer: BufferZone | None = None, part: DyadicPartition | None = None) -> RunResult:
    """Background plus perturbation solve for 1D bore data.

    The result's ``final`` is the composed solution; ``perturbation`` holds
    the evolved high-frequency part. The ledger tracks the X-norm of the
    perturbation (``U_s``) and the E-norm of the composed solution
    (``E_composed``).
    """
    grid, part, split, bg, C1 = _bore_setup(eta0, u0, params, config, part)
    config.check_against(grid, params)
    background = _BackgroundCoefficients(bg, params)
    sys = _BoreSystem1D(grid, params, background, config.friedrichs_m, config.dealias)
    rec = _Recorder(grid, params, config, sys, part)
    ledger = EnergyLedger(config.s, config.r, params.eps, params.beta)
    reference = _leak_reference(split.high, buffer, params)
    weights = params.weights(config.s)
    checkpoints = []
    interior0 = []

    def composed(t, y):
        co = background.at(t)
        return State.from_arrays(grid, y[0] + co["h"], [y[1][0] + co["u_L"]])

    def record(t, y):
        co = background.at(t)
        row, Uj, Nj = rec.row(t, y, co)
        total = composed(t, y)
        row["E_composed"] = e_norm(total, weights, part, config.r)
        row["mass_composed"] = float(np.sum(total.eta.samples) * grid.cell_volume)
        leak = None
        if reference is not None:
            if not interior0:
                interior0.append(float(np.max(np.abs(y[0][~buffer.mask]))))
            leak = buffer_monitor(y[0], buffer, reference(t), config.leak_tol, interior0[0])
            row["buffer_leak"] = leak.leak
        else:
            row["buffer_leak"] = 0.0
        ledger.append(row, Uj, Nj)
        return _check_stop(ledger, config, leak)

    def keep(t, y):
        checkpoints.append((t, composed(t, y)))

    eta_h, V_h = split.high.arrays()
    y0 = (sys.project(eta_h), np.stack([sys.project(v) for v in V_h]))
    start = time.perf_counter()
    y, t, reason = _integrate(sys, y0, config, record, keep)
    info = {"C1": C1, "C2": split.C2, "background_band_leak": bg.band_leak()}
    pert = State.from_arrays(grid, y[0], y[1])
    return RunResult(ledger, composed(t, y), t, reason, checkpoints, info, pert,
                     time.perf_counter() - start)


class _BoreSystem2D:
    """Joint system: 1D perturbation (background) and 2D perturbation on top of it."""

    def __init__(self, sys1d: _BoreSystem1D, sys2d: BBMSystem):
        self.sys1d = sys1d
        self.sys2d = sys2d
        self.ny = sys2d.grid.points[1]

    def background_fields(self, y, t):
        co = self.sys1d.background.at(t)
        eta1 = y[0] + co["h"]
        u1 = y[1][0] + co["u_L"]
        return eta1, u1, co

    def coefficients(self, y, t, d1=None):
        eta1, u1, co = self.background_fields(y, t)
        shape = self.sys2d.grid.shape
        h = np.broadcast_to(eta1[:, None], shape)
        W = np.stack([np.broadcast_to(u1[:, None], shape), np.zeros(shape)])
        out = {"h": h, "W1": W, "W2": W, "W3": W}
        if d1 is not None:
            out["dt_h"] = np.broadcast_to((d1[0] + co["dt_h"])[:, None], shape)
        return out

    def rhs(self, y, t):
        d1 = self.sys1d.rhs((y[0], y[1]), t)
        d2 = self.sys2d.evaluate(y[2], y[3], t, self.coefficients(y, t))
        return (*d1, *d2)


def solve_2d_bore(eta0: Field, u0: Field, phi: Field, psi, params: ModelParams,
                  config: SolverConfig, buffer: BufferZone | None = None) -> RunResult:
    """2D solve around the y-extended 1D bore solution.

    The 1D perturbation and the 2D perturbation are advanced together so
    the background is available at every Runge-Kutta stage. ``final`` is
    the composed 2D state; ``info['background']`` holds the final 1D state.
    """
    grid2 = phi.grid
    if eta0.grid != grid2.line(0):
        raise ConfigurationError("1D grid does not match the x-axis of the 2D grid")
    grid1, part1, split, bg, C1 = _bore_setup(eta0, u0, params, config, None)
    config.check_against(grid2, params)
    background = _BackgroundCoefficients(bg, params)
    sys1 = _BoreSystem1D(grid1, params, background, config.friedrichs_m, config.dealias)
    sys2 = BBMSystem(grid2, params, None, config.friedrichs_m, config.dealias)
    joint = _BoreSystem2D(sys1, sys2)
    part2 = build_partition(grid2)
    rec = _Recorder(grid2, replace(params, beta=1.0), config, sys2, part2)
    weights = params.weights(config.s)
    ledger = EnergyLedger(config.s, config.r, params.eps, 1.0)
    checkpoints = []

    def composed(t, y):
        eta1, u1, _ = joint.background_fields(y, t)
        ext = extend_1d(State.from_arrays(grid1, eta1, [u1]), grid2)
        return ext + State.from_arrays(grid2, y[2], y[3])

    def record(t, y):
        d1 = sys1.rhs((y[0], y[1]), t)
        co = joint.coefficients(y, t, d1)
        row, Uj, Nj = rec.row(t, (y[2], y[3]), co)
        eta1, u1, _ = joint.background_fields(y, t)
        bg_state = State.from_arrays(grid1, eta1, [u1])
        E1 = e_norm(bg_state, weights, part1, config.r)
        row["E_background"] = E1
        row["M_composed"] = E1 + row["U_s"]
        row["buffer_leak"] = 0.0
        ledger.append(row, Uj, Nj)
        return _check_stop(ledger, config)

    def keep(t, y):
        checkpoints.append((t, composed(t, y)))

    eta_h, V_h = split.high.arrays()
    p_eta, p_V = State(phi, tuple(psi)).arrays()
    y0 = (sys1.project(eta_h), np.stack([sys1.project(v) for v in V_h]),
          sys2.project(p_eta), np.stack([sys2.project(v) for v in p_V]))
    start = time.perf_counter()
    y, t, reason = _integrate(joint, y0, config, record, keep)
    eta1, u1, _ = joint.background_fields(y, t)
    info = {"C1": C1, "C2": split.C2, "background": State.from_arrays(grid1, eta1, [u1])}
    pert = State.from_arrays(grid2, y[2], y[3])
    return RunResult(ledger, composed(t, y), t, reason, checkpoints, info, pert,
                     time.perf_counter() - start)


# ----------------------------------------------------------- bootstrap constants

@dataclass(frozen=True)
class BootstrapConstants:
    """Smallness threshold ``eps0`` and horizon constant ``C_tilde``."""

    eps01: float
    eps02: float
    eps03: float
    eps04: float
    C_tilde_candidates: tuple
    R0_1: float
    R0_0: float
    sup_W: float
    sup_F: float
    sup_h: float
    C: float
    C1: float

    @property
    def eps0(self) -> float:
        return min(self.eps01, self.eps02, self.eps03, self.eps04)

    @property
    def C_tilde(self) -> float:
        return min(self.C_tilde_candidates)

    def horizon(self, eps: float) -> float:
        """Predicted existence horizon ``C_tilde / eps``."""
        return self.C_tilde / eps


def bootstrap_constants(R0_1: float, R0_0: float, sup_W: float, sup_F: float,
                        C: float = 1.0, C1: float = 1.0, sup_h: float | None = None) -> BootstrapConstants:
    """Evaluate the four ``eps0`` candidates and three ``C_tilde`` candidates.

    ``sup_h`` (the sup norm of h) defaults to ``sup_W``, which bounds it.
    """
    sup_h = sup_W if sup_h is None else sup_h
    for name, v in (("R0_1", R0_1), ("R0_0", R0_0), ("sup_W", sup_W), ("sup_F", sup_F),
                    ("C", C), ("C1", C1), ("sup_h", sup_h)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    a = 1.0 + E_SQRT7
    eps01 = 3.0 / (4.0 * C1 * a * R0_1 + 4.0 * sup_h)
    eps02 = 1.0 / (2.0 * a * R0_1 + 2.0 * sup_W)
    eps03 = (a * R0_0 + sup_W) / (2.0 * sup_F)
    cands = (R0_0 / (3.0 * math.e * C * sup_F), 1.0 / (16.0 * C * a * R0_1), 1.0 / (16.0 * C * sup_W))
    return BootstrapConstants(eps01, eps02, eps03, eps02, cands, R0_1, R0_0, sup_W, sup_F,
                              sup_h, C, C1)


@dataclass(frozen=True)
class TStar:
    crossed: bool
    t_star: float
    threshold: float


def t_star_measure(result, R0_eps: float | None = None,
                   factor: float = THRESHOLD_FACTOR) -> TStar:
    """First time ``U_s`` exceeds ``factor * R0_eps`` (linear interpolation).

    ``result`` is a RunResult or EnergyLedger; ``R0_eps`` defaults to the
    initial ``U_s``. Without a crossing, ``t_star`` is the last ledger time.
    """
    ledger = getattr(result, "ledger", result)
    if len(ledger) == 0:
        raise ConfigurationError("empty ledger")
    t, U = ledger.t, ledger.column("U_s")
    R0 = U[0] if R0_eps is None else R0_eps
    thr = factor * R0
    above = np.nonzero(U > thr)[0]
    if R0 <= 0 or above.size == 0:
        return TStar(False, float(t[-1]), float(thr))
    i = int(above[0])
    if i == 0:
        return TStar(True, float(t[0]), float(thr))
    w = (thr - U[i - 1]) / (U[i] - U[i - 1])
    return TStar(True, float(t[i - 1] + w * (t[i] - t[i - 1])), float(thr))
