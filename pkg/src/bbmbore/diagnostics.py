"""Energy ledgers and run-time audits.

The ledger stores one row per sampled time. Its CSV form keeps the six
public columns first (``t, U_s, max_eta, dt_eta_inf, blowup_integral,
buffer_leak``) followed by any extra scalar columns of the run.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .littlewood_paley import DyadicPartition, EnergyWeights, block_energies
from .spectral import Field, derivative_op

__all__ = [
    "LEDGER_COLUMNS",
    "EnergyLedger",
    "modified_energies",
    "modified_energy",
    "BlowupStatus",
    "blowup_monitor",
    "AuditReport",
    "fit_audit_constant",
    "inequality_audit",
    "BufferReport",
    "buffer_monitor",
]

LEDGER_COLUMNS = ("t", "U_s", "max_eta", "dt_eta_inf", "blowup_integral", "buffer_leak")


@dataclass
class EnergyLedger:
    """Time series of norms recorded along a run.

    ``scalars`` maps a column name to a list of floats. ``U_j`` and ``N_j``
    hold per-block arrays (``j = -1..j_max``) for every sample.
    """

    s: float = 2.0
    r: float = 2
    eps: float = 0.0
    beta: float = 1.0
    scalars: dict = field(default_factory=lambda: {c: [] for c in LEDGER_COLUMNS})
    U_j: list = field(default_factory=list)
    N_j: list = field(default_factory=list)

    def __len__(self):
        return len(self.scalars["t"])

    def append(self, row: dict, U_j=None, N_j=None) -> None:
        row = dict(row)
        t = row["t"]
        n = len(self)
        U = row.pop("U_inf", None)
        if U is not None:
            prev = self.scalars["blowup_integral"]
            if prev:
                dt = t - self.scalars["t"][-1]
                row["blowup_integral"] = prev[-1] + 0.5 * dt * (self.scalars["U_inf"][-1] + U)
            else:
                row["blowup_integral"] = 0.0
            row["U_inf"] = U
        for name, value in row.items():
            value = float(value)
            if not math.isfinite(value):
                raise FloatingPointError(f"non-finite ledger value {name}={value} at t={t}")
            column = self.scalars.setdefault(name, [])
            if len(column) != n:
                raise ConfigurationError(f"ledger column {name} started late")
            column.append(value)
        for name in LEDGER_COLUMNS:
            if len(self.scalars[name]) == n:
                self.scalars[name].append(0.0)
        if U_j is not None:
            self.U_j.append(np.asarray(U_j, float))
        if N_j is not None:
            self.N_j.append(np.asarray(N_j, float))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.scalars[name], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def to_csv(self, path=None) -> str:
        names = list(LEDGER_COLUMNS) + [c for c in self.scalars if c not in LEDGER_COLUMNS]
        lines = [",".join(names)]
        for i in range(len(self)):
            lines.append(",".join("%.17g" % self.scalars[c][i] for c in names))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text) -> "EnergyLedger":
        text = path_or_text
        if "\n" not in str(path_or_text):
            with open(path_or_text) as fh:
                text = fh.read()
        rows = list(csv.reader(text.strip().splitlines()))
        names = rows[0]
        if tuple(names[: len(LEDGER_COLUMNS)]) != LEDGER_COLUMNS:
            raise ConfigurationError(f"ledger header {names[:6]} does not match {LEDGER_COLUMNS}")
        led = cls()
        led.scalars = {n: [float(row[i]) for row in rows[1:]] for i, n in enumerate(names)}
        return led


def modified_energies(state, weights: EnergyWeights, part: DyadicPartition, h=None):
    """``N_j`` for every block and the positivity-window flag.

    The velocity terms are weighted by ``1 + eps (eta + h)``; the window
    requires ``eps |eta + h|_inf < 3/4``.
    """
    eta, V = state
    V = [V] if isinstance(V, Field) else list(V)
    grid = part.grid
    a = 1.0 + weights.eps * (eta.samples + (0.0 if h is None else np.asarray(getattr(h, "samples", h))))
    window_ok = bool(np.max(np.abs(a - 1.0)) < 0.75)
    eta_part = block_energies((eta, [Field.zeros(grid) for _ in V]), weights, part) ** 2
    vol = grid.cell_volume
    derivs = [derivative_op(grid, l).symbol for l in range(grid.dim)]
    v_part = np.zeros(part.j_max + 2)
    for i, w in enumerate(part.weights):
        total = 0.0
        for v in V:
            spec = w * v.spectrum
            vj = np.fft.ifftn(spec).real
            total += np.sum(a * vj**2)
            if weights.d > 0 and weights.eps > 0:
                for ik in derivs:
                    total += weights.eps * weights.d * np.sum(a * np.fft.ifftn(ik * spec).real ** 2)
        v_part[i] = vol * total
    return np.sqrt(np.maximum(eta_part + v_part, 0.0)), window_ok


def modified_energy(state, j: int, weights: EnergyWeights, part: DyadicPartition, h=None):
    """``(N_j, window_ok)`` for a single block ``j``."""
    N, ok = modified_energies(state, weights, part, h)
    if j < -1 or j > part.j_max:
        return 0.0, ok
    return float(N[j + 1]), ok


@dataclass
class BlowupStatus:
    integral: float
    flagged: bool
    flag_time: float | None


def blowup_monitor(ledger: EnergyLedger, growth: float = 2.0, window: float = 0.05) -> BlowupStatus:
    """Flag when the running integral of U grows by ``growth`` within ``window`` of elapsed time."""
    if len(ledger) == 0:
        return BlowupStatus(0.0, False, None)
    t = ledger.t
    I = ledger.column("blowup_integral")
    for i in range(1, len(t)):
        earlier = np.interp((1.0 - window) * t[i], t, I)
        if earlier > 0 and I[i] >= growth * earlier:
            return BlowupStatus(float(I[-1]), True, float(t[i]))
    return BlowupStatus(float(I[-1]), False, None)


def _audit_terms(ledger: EnergyLedger):
    """Finite-difference LHS ``dN_j^2/dt`` and the C-free RHS, shape (samples, blocks)."""
    t = ledger.t
    N2 = np.asarray(ledger.N_j) ** 2
    U = np.asarray(ledger.U_j)
    if len(t) < 3:
        return np.zeros((0, 0)), np.zeros((0, 0))
    lhs = (N2[2:] - N2[:-2]) / (t[2:] - t[:-2])[:, None]
    eps, beta = ledger.eps, ledger.beta
    Us = ledger.column("U_s")[1:-1, None]
    Ws = ledger.column("W_s")[1:-1, None] if "W_s" in ledger.scalars else 0.0 * Us
    Fs = ledger.column("F_s")[1:-1, None] if "F_s" in ledger.scalars else 0.0 * Us
    Uj = U[1:-1]
    j = np.arange(-1, U.shape[1] - 1)[None, :]
    a = Ws + beta * Us
    rhs = eps * Uj**2 * (eps * beta * Fs + a + eps * a**2)
    rhs = rhs + eps * 2.0 ** (-j * ledger.s) * Uj * (Fs * (1 + eps * a) + Us * a * (1 + eps * a))
    return lhs, rhs


def fit_audit_constant(ledger: EnergyLedger) -> float:
    """Smallest C making the block inequality hold on every sample of ``ledger``."""
    lhs, rhs = _audit_terms(ledger)
    mask = (lhs > 0) & (rhs > 0)
    if not np.any(mask):
        return 0.0
    return float(np.max(lhs[mask] / rhs[mask]))


@dataclass
class AuditReport:
    C: float
    residual: np.ndarray
    fraction_holding: float
    max_lhs: float

    def to_json(self) -> str:
        return json.dumps({"C": self.C, "fraction_holding": self.fraction_holding,
                           "min_residual": float(self.residual.min(initial=0.0)),
                           "max_lhs": self.max_lhs})


def inequality_audit(ledger: EnergyLedger, C: float, atol: float = 0.0) -> AuditReport:
    """Per-sample, per-block residual ``C*RHS - LHS``; advisory only."""
    lhs, rhs = _audit_terms(ledger)
    residual = C * rhs - lhs
    frac = float(np.mean(residual >= -atol)) if residual.size else 1.0
    return AuditReport(C, residual, frac, float(np.max(np.abs(lhs), initial=0.0)))


@dataclass
class BufferReport:
    leak: float
    interior_max: float
    contaminated: bool


def buffer_monitor(signal, zone, reference=None, rel_tol: float = 1e-4,
                   interior_max: float | None = None) -> BufferReport:
    """Largest ``|signal - reference|`` over buffer nodes against the interior level.

    ``interior_max`` defaults to the largest ``|signal|`` outside the buffer.
    """
    a = np.asarray(getattr(signal, "samples", signal), dtype=float)
    if reference is not None:
        a = a - np.asarray(getattr(reference, "samples", reference), dtype=float)
    if zone is None or zone.empty:
        return BufferReport(0.0, float(np.max(np.abs(a))), False)
    mask = zone.mask
    leak = float(np.max(np.abs(a[mask])))
    if interior_max is None:
        raw = np.asarray(getattr(signal, "samples", signal), dtype=float)
        interior_max = float(np.max(np.abs(raw[~mask])))
    return BufferReport(leak, interior_max, leak > rel_tol * interior_max)
