"""Dyadic partition of unity, Besov norms and epsilon-weighted block energies.

The low-frequency cutoff ``chi`` equals 1 on ``[0, 1]``, vanishes on
``[4/3, inf)`` and ramps in between with the smooth step built from
``g(t) = exp(-1/t)``. The annulus profile is ``phi(r) = chi(r/2) - chi(r)``.
Block ``j = -1`` is ``chi(|D|)`` and block ``j >= 0`` is ``phi(2^-j |D|)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DegenerateGridError
from .spectral import Field, GridSpec, dealias_product, derivative_op, gradient

__all__ = [
    "smooth_step",
    "chi_profile",
    "phi_profile",
    "DyadicPartition",
    "build_partition",
    "dyadic_block",
    "BesovSpec",
    "NormReport",
    "block_norms",
    "besov_norm",
    "EnergyWeights",
    "block_energies",
    "block_energy",
    "stacked_norm",
    "e_norm",
    "sup_norm",
    "BernsteinReport",
    "bernstein_audit",
    "commutator_residual",
    "CommutatorReport",
    "commutator_constant",
]

TAIL_RATIO = 1e-10


def _glue(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _glue(t)
    return a / (a + _glue(1.0 - np.asarray(t, dtype=float)))


def chi_profile(r):
    return smooth_step(3.0 * (4.0 / 3.0 - np.asarray(r, dtype=float)))


def phi_profile(r):
    r = np.asarray(r, dtype=float)
    return chi_profile(r / 2.0) - chi_profile(r)


@dataclass(frozen=True)
class DyadicPartition:
    """Block weights tabulated on the full lattice of ``grid``.

    ``weights[j + 1]`` is the multiplier of block ``j`` for ``j = -1..j_max``.
    """

    grid: GridSpec
    j_max: int
    weights: np.ndarray = field(repr=False)

    j_min = -1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-1, self.j_max + 1)

    @cached_property
    def j_top(self) -> int:
        """Highest block with nonzero weight somewhere on the lattice.

        Can be below ``j_max``: phi vanishes on [3/4, 1], so block ``j_max`` is
        empty whenever max |k| <= 2^j_max.
        """
        nonempty = [j for j in self.indices if np.any(self.weights[j + 1] > 0)]
        return int(max(nonempty))

    def weight(self, j: int) -> np.ndarray:
        if j < -1 or j > self.j_max:
            return np.zeros(self.grid.shape)
        return self.weights[j + 1]

    def residuals(self) -> dict:
        """Partition identities evaluated at every lattice point."""
        w = self.weights
        total = w.sum(axis=0)
        squares = (w**2).sum(axis=0)
        overlap = 0.0
        for a in range(len(w)):
            for b in range(a + 2, len(w)):
                overlap = max(overlap, float(np.max(w[a] * w[b])))
        return {
            "unity": float(np.max(np.abs(total - 1.0))),
            "square_min": float(squares.min()),
            "square_max": float(squares.max()),
            "disjoint": overlap,
        }


def build_partition(grid: GridSpec) -> DyadicPartition:
    kabs = grid.kabs
    kmax = float(kabs.max())
    if kmax < 0.75:
        raise DegenerateGridError(f"max |k| = {kmax:.4g} < 3/4; no block j >= 0 fits")
    j_max = int(math.floor(math.log2(kmax / 0.75)))
    while 0.75 * 2.0 ** (j_max + 1) <= kmax:
        j_max += 1
    while 0.75 * 2.0**j_max > kmax:
        j_max -= 1
    weights = np.empty((j_max + 2,) + grid.shape)
    weights[0] = chi_profile(kabs)
    for j in range(j_max + 1):
        weights[j + 1] = phi_profile(kabs / 2.0**j)
    weights.setflags(write=False)
    return DyadicPartition(grid, j_max, weights)


def dyadic_block(u: Field, j: int, part: DyadicPartition) -> Field:
    if u.grid != part.grid:
        raise ConfigurationError("field and partition live on different grids")
    spec = part.weight(j) * u.spectrum
    return Field(u.grid, np.fft.ifftn(spec).real, spec)


def _components(u) -> list:
    if isinstance(u, Field):
        return [u]
    out = []
    for item in u:
        out.extend(_components(item))
    return out


@dataclass(frozen=True)
class BesovSpec:
    s: float
    p: float = 2
    r: float = 2

    def __post_init__(self):
        if self.p not in (2, math.inf):
            raise ConfigurationError(f"p must be 2 or inf, got {self.p}", "p")
        if not self.r >= 1:
            raise ConfigurationError(f"r must be >= 1, got {self.r}", "r")


@dataclass
class NormReport:
    quantity: str
    s: float
    p: float
    r: float
    eps: float | None
    b: float | None
    d: float | None
    value: float
    tail_estimate: float

    def to_json(self) -> str:
        rec = asdict(self)
        for key in ("p", "r"):
            if rec[key] == math.inf:
                rec[key] = "inf"
        return json.dumps(rec)


def block_norms(u, p, part: DyadicPartition) -> np.ndarray:
    """Discrete L^p norms of every block, ``out[j + 1]`` for ``j = -1..j_max``.

    ``u`` may be a Field or a sequence of Fields; a sequence is measured as
    a vector (Euclidean for p=2, componentwise max for p=inf).
    """
    comps = _components(u)
    grid = part.grid
    out = np.zeros(part.j_max + 2)
    if p == 2:
        scale = grid.cell_volume / grid.size
        power = sum(np.abs(c.spectrum) ** 2 for c in comps)
        for i, w in enumerate(part.weights):
            out[i] = math.sqrt(scale * float(np.sum(w**2 * power)))
    elif p == math.inf:
        for i, w in enumerate(part.weights):
            out[i] = max(float(np.max(np.abs(np.fft.ifftn(w * c.spectrum).real))) for c in comps)
    else:
        raise ConfigurationError(f"p must be 2 or inf, got {p}", "p")
    return out


def _lr(seq, r) -> float:
    seq = np.asarray(seq, dtype=float)
    if seq.size == 0:
        return 0.0
    if r == math.inf:
        return float(seq.max())
    return float(np.sum(seq**r) ** (1.0 / r))


def _stack(block_values, s, r, part):
    weighted = 2.0 ** (s * part.indices) * block_values
    value = _lr(weighted, r)
    tail = float(weighted[part.j_top + 1])
    return value, (tail if value > 0 and tail > TAIL_RATIO * value else 0.0)


def besov_norm(u, spec: BesovSpec, part: DyadicPartition, *, report: bool = False):
    """B^s_{p,r} norm truncated at ``j_max``; ``report=True`` returns a NormReport."""
    value, tail = _stack(block_norms(u, spec.p, part), spec.s, spec.r, part)
    if report:
        return NormReport("besov", spec.s, spec.p, spec.r, None, None, None, value, tail)
    return value


@dataclass(frozen=True)
class EnergyWeights:
    """Parameters of the epsilon-weighted block energy ``U_j``."""

    b: float
    d: float
    eps: float
    s: float = 0.0

    def __post_init__(self):
        if self.b < 0 or self.d < 0:
            raise ConfigurationError("b and d must be nonnegative")
        if not 0 <= self.eps <= 1:
            raise ConfigurationError(f"eps must lie in [0, 1], got {self.eps}", "eps")

    @property
    def s_b(self) -> float:
        return self.s + float(np.sign(self.b))

    @property
    def s_d(self) -> float:
        return self.s + float(np.sign(self.d))

    def with_s(self, s: float) -> "EnergyWeights":
        return EnergyWeights(self.b, self.d, self.eps, s)


def _split_state(state):
    eta, V = state
    V = [V] if isinstance(V, Field) else list(V)
    return eta, V


def block_energies(state, weights: EnergyWeights, part: DyadicPartition) -> np.ndarray:
    """``U_j`` for ``j = -1..j_max`` with gradients taken spectrally."""
    eta, V = _split_state(state)
    grid = part.grid
    k2 = grid.kabs_deriv**2
    dens = np.abs(eta.spectrum) ** 2 * (1.0 + weights.eps * weights.b * k2)
    if V:
        dens = dens + sum(np.abs(v.spectrum) ** 2 for v in V) * (1.0 + weights.eps * weights.d * k2)
    scale = grid.cell_volume / grid.size
    sq = np.array([scale * float(np.sum(w**2 * dens)) for w in part.weights])
    return np.sqrt(np.maximum(sq, 0.0))


def block_energy(state, j: int, weights: EnergyWeights, part: DyadicPartition) -> float:
    if j < -1 or j > part.j_max:
        return 0.0
    return float(block_energies(state, weights, part)[j + 1])


def stacked_norm(state, weights: EnergyWeights, part: DyadicPartition, r=2, *, report=False):
    """The norm ``U_s = || (2^{js} U_j)_j ||_{l^r}``."""
    value, tail = _stack(block_energies(state, weights, part), weights.s, r, part)
    if report:
        return NormReport("X", weights.s, 2, r, weights.eps, weights.b, weights.d, value, tail)
    return value


def sup_norm(fields) -> float:
    return max(c.linf() for c in _components(fields))


def e_norm(state, weights: EnergyWeights, part: DyadicPartition, r=2, *, report=False):
    """Sup norm of the state plus the X^{s-1} norm of its first derivatives."""
    eta, V = _split_state(state)
    w1 = weights.with_s(weights.s - 1)
    total = 0.0
    tail = 0.0
    for l in range(part.grid.dim):
        op = derivative_op(part.grid, l)
        deta = Field(part.grid, np.fft.ifftn(op.symbol * eta.spectrum).real, op.symbol * eta.spectrum)
        dV = [Field(part.grid, np.fft.ifftn(op.symbol * v.spectrum).real, op.symbol * v.spectrum) for v in V]
        val, t = _stack(block_energies((deta, dV), w1, part), w1.s, r, part)
        total += val**2
        tail = max(tail, t)
    value = sup_norm([eta] + V) + math.sqrt(total)
    if report:
        return NormReport("E", weights.s, 2, r, weights.eps, weights.b, weights.d, value, tail)
    return value


@dataclass
class BernsteinReport:
    j: int
    lower: float
    upper: float
    ratios: np.ndarray
    skipped: int

    @property
    def passed(self) -> bool:
        return bool(np.all((self.ratios >= self.lower) & (self.ratios <= self.upper)))


def bernstein_audit(part: DyadicPartition, grid: GridSpec | None = None, trials: int = 100,
                    j: int = 3, rng=None) -> BernsteinReport:
    """Check ``||grad v|| / ||v||`` against the annulus bracket for random blocks."""
    grid = part.grid if grid is None else grid
    if grid != part.grid:
        raise ConfigurationError("partition built on another grid")
    rng = np.random.default_rng(rng)
    ratios, skipped = [], 0
    for _ in range(trials):
        v = dyadic_block(Field(grid, rng.standard_normal(grid.shape)), j, part)
        norm = v.l2()
        if norm == 0.0:
            skipped += 1
            continue
        grad = math.sqrt(sum(g.l2() ** 2 for g in gradient(v)))
        ratios.append(grad / norm)
    return BernsteinReport(j, 0.75 * 2.0**j, (8.0 / 3.0) * 2.0**j, np.array(ratios), skipped)


def commutator_residual(u: Field, v: Field, j: int, part: DyadicPartition, axis: int = 0) -> float:
    """L2 norm of ``Delta_j(u dv) - u Delta_j dv`` with dealiased products."""
    if u.grid != v.grid or u.grid != part.grid:
        raise ConfigurationError("commutator inputs live on different grids")
    op = derivative_op(part.grid, axis)
    dv = Field(part.grid, np.fft.ifftn(op.symbol * v.spectrum).real)
    first = dyadic_block(dealias_product(u, dv), j, part)
    second = dealias_product(u, dyadic_block(dv, j, part))
    return (first - second).l2()


@dataclass
class CommutatorReport:
    s: float
    r: float
    stacked: float
    bound: float

    @property
    def constant(self) -> float:
        return self.stacked / self.bound if self.bound > 0 else 0.0


def commutator_constant(u: Field, v: Field, s: float, r, part: DyadicPartition,
                        axis: int = 0) -> CommutatorReport:
    """Fit the constant in the commutator estimate (reported, not asserted)."""
    res = np.array([commutator_residual(u, v, j, part, axis) for j in part.indices])
    stacked = _lr(2.0 ** (s * part.indices) * res, r)
    spec = BesovSpec(s - 1, 2, r)
    gu, gv = gradient(u), gradient(v)
    bound = sup_norm(gu) * besov_norm(gv, spec, part) + sup_norm(gv) * besov_norm(gu, spec, part)
    return CommutatorReport(s, r, stacked, bound)

