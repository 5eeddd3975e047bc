"""Static suite of quick invariant checks run by ``bbmbore verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bore import BoreProfile, State, make_bore
from .diagnostics import EnergyLedger
from .linear_waves import WaveBackground, dalembert_evolve
from .littlewood_paley import DyadicPartition, bernstein_audit, build_partition, dyadic_block
from .solver import ModelParams, SolverConfig, bootstrap_constants, rhs_eval, solve_1d_bore, t_star_measure
from .spectral import Field, GridSpec, dealias_product, friedrichs_project

__all__ = ["CheckResult", "CHECKS", "run_suite"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "limit": self.limit}


def _partition(grid, faults):
    part = build_partition(grid)
    if "partition_unity" in faults:
        w = part.weights.copy()
        w[1] = w[1] * (1 + 1e-6)
        part = DyadicPartition(grid, part.j_max, w)
    return part


def _rng():
    return np.random.default_rng(20240517)


def check_partition_unity(faults):
    worst = max(_partition(g, faults).residuals()["unity"]
                for g in (GridSpec(2 * np.pi, 1024), GridSpec((2 * np.pi,) * 2, (64, 64))))
    return worst, 1e-12


def check_partition_bracket(faults):
    r = _partition(GridSpec(2 * np.pi, 1024), faults).residuals()
    return max(0.5 - r["square_min"], r["square_max"] - 1.0, 0.0), 1e-12


def check_partition_disjoint(faults):
    return _partition(GridSpec(2 * np.pi, 1024), faults).residuals()["disjoint"], 0.0


def check_reconstruction(faults):
    g = GridSpec(2 * np.pi, 256)
    part = _partition(g, faults)
    u = Field(g, _rng().standard_normal(g.shape))
    total = sum(dyadic_block(u, j, part).samples for j in part.indices)
    return float(np.max(np.abs(total - u.samples)) / np.max(np.abs(u.samples))), 1e-12


def check_dft_oracle(faults):
    g = GridSpec(1.0, 16)
    a = _rng().standard_normal(16)
    n = np.arange(16)
    naive = np.exp(-2j * np.pi * np.outer(n, n) / 16) @ a
    return float(np.max(np.abs(Field(g, a).spectrum - naive)) / np.max(np.abs(naive))), 1e-12


def check_dealias(faults):
    g = GridSpec(2 * np.pi, 16)
    x = g.axis()
    f = Field(g, np.cos(x))
    out = dealias_product(f, f)
    return float(np.max(np.abs(out.samples - 0.5 * (1 + np.cos(2 * x))))), 1e-13


def check_friedrichs(faults):
    g = GridSpec(2 * np.pi, 64)
    u = Field(g, _rng().standard_normal(g.shape))
    once = friedrichs_project(u, 7.5)
    twice = friedrichs_project(once, 7.5)
    return float(np.max(np.abs(once.samples - twice.samples))), 0.0


def check_bernstein(faults):
    g = GridSpec(2 * np.pi, 512)
    rep = bernstein_audit(_partition(g, faults), trials=20, j=3, rng=_rng())
    bad = np.sum((rep.ratios < rep.lower) | (rep.ratios > rep.upper))
    return float(bad), 0.0


def check_acoustic_limit(faults):
    g = GridSpec(2 * np.pi, 64)
    x = g.axis()
    st = State(Field(g, np.sin(2 * x)), (Field(g, np.cos(3 * x)),))
    d = rhs_eval(st, 0.0, ModelParams(0.2, 0.3, 0.0))
    err = max(np.max(np.abs(d.eta.samples - 3 * np.sin(3 * x))),
              np.max(np.abs(d.V[0].samples - (-2 * np.cos(2 * x)))))
    return float(err), 1e-12


def check_dalembert_energy(faults):
    g = GridSpec(40.0, 256)
    part = _partition(g, faults)
    rng = _rng()
    e = dyadic_block(Field(g, rng.standard_normal(g.shape)), -1, part)
    u = dyadic_block(Field(g, rng.standard_normal(g.shape)), -1, part)
    bg = WaveBackground(e, u)
    energies = []
    for t in np.linspace(0, 50, 11):
        a, b = dalembert_evolve(bg, t)
        energies.append(a.l2() ** 2 + b.l2() ** 2)
    energies = np.array(energies)
    return float(np.max(np.abs(energies - energies[0])) / energies[0]), 1e-12


def check_bootstrap_arithmetic(faults):
    bc = bootstrap_constants(1, 1, 1, 1, 1, 1)
    a = 1 + math.e * math.sqrt(7)
    err = max(abs(bc.eps01 - 3 / (4 * a + 4)), abs(bc.eps02 - 1 / (2 * a + 2)),
              abs(bc.C_tilde - 1 / (16 * a)))
    return float(err), 1e-15


def check_t_star_interpolation(faults):
    led = EnergyLedger()
    led.append({"t": 0.0, "U_s": 1.0})
    led.append({"t": 1.0, "U_s": 10.0})
    a = 1 + math.e * math.sqrt(7)
    return abs(t_star_measure(led).t_star - (a - 1) / 9), 1e-14


def check_mass_conservation(faults):
    g = GridSpec(40.0, 256)
    bf = make_bore(BoreProfile("tanh", -0.5, 0.5), g)
    cfg = SolverConfig(dt=0.05, t_end=1.0, ledger_stride=0.25, abort_on_contamination=False,
                       ledger_blocks=False)
    res = solve_1d_bore(bf.field, Field.zeros(g), ModelParams(1 / 6, 1 / 6, 0.1), cfg, bf.buffer)
    m = res.ledger.column("mass_composed")
    return float(np.max(np.abs(m - m[0])) / bf.field.l2()), 1e-10


def check_ledger_roundtrip(faults):
    led = EnergyLedger()
    rng = _rng()
    for t in range(4):
        led.append({"t": 0.1 * t, "U_s": rng.random(), "U_inf": rng.random(), "mass": rng.random()})
    text = led.to_csv()
    return float(EnergyLedger.from_csv(text).to_csv() != text), 0.0


CHECKS = {
    "partition_unity": check_partition_unity,
    "partition_bracket": check_partition_bracket,
    "partition_disjoint": check_partition_disjoint,
    "reconstruction": check_reconstruction,
    "dft_oracle": check_dft_oracle,
    "dealias_product": check_dealias,
    "friedrichs_idempotent": check_friedrichs,
    "bernstein": check_bernstein,
    "acoustic_limit": check_acoustic_limit,
    "dalembert_energy": check_dalembert_energy,
    "bootstrap_arithmetic": check_bootstrap_arithmetic,
    "t_star_interpolation": check_t_star_interpolation,
    "mass_conservation": check_mass_conservation,
    "ledger_roundtrip": check_ledger_roundtrip,
}


def run_suite(faults=()) -> list:
    """Run every check; ``faults`` names checks whose inputs are deliberately corrupted."""
    faults = set(faults)
    unknown = faults - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown fault target(s): {sorted(unknown)}")
    out = []
    for name, fn in CHECKS.items():
        value, limit = fn(faults)
        out.append(CheckResult(name, bool(value <= limit), float(value), float(limit)))
    return out

