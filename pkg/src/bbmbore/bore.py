"""Bore initial data on the torus, low/high frequency splitting, 2D composition.

A bore has distinct limits ``eta_-`` and ``eta_+`` at the two ends and so is
not periodic. ``make_bore`` adds a smooth anti-transition of height
``eta_- - eta_+`` inside a buffer straddling the periodic seam ``x = +-L/2``.
The buffer is 20% of the domain length, and outside it the field equals the
pure profile exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erf

from .errors import ConfigurationError, DomainTooSmallError
from .littlewood_paley import (
    DyadicPartition,
    EnergyWeights,
    dyadic_block,
    e_norm,
    smooth_step,
    stacked_norm,
)
from .spectral import Field, GridSpec, derivative_op

__all__ = [
    "State",
    "BoreProfile",
    "BufferZone",
    "BoreField",
    "make_bore",
    "gaussian",
    "SplitData",
    "low_high_split",
    "ComposedState",
    "compose_2d",
    "m_norm",
]

BUFFER_FRACTION = 0.2
# Distance (in units of 1/steepness) beyond which the profile equals its limit to 1e-12.
_TRANSITION_HALF_WIDTH = {"tanh": 14.0, "smoothed-step": 5.5}


@dataclass(frozen=True)
class State:
    """Pair ``(eta, V)`` at one instant; ``V`` has one Field per axis."""

    eta: Field
    V: tuple

    def __post_init__(self):
        V = (self.V,) if isinstance(self.V, Field) else tuple(self.V)
        object.__setattr__(self, "V", V)
        if len(V) != self.eta.grid.dim:
            raise ConfigurationError(f"V needs {self.eta.grid.dim} components, got {len(V)}")
        for v in V:
            if v.grid != self.eta.grid:
                raise ConfigurationError("state components live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.eta.grid

    @classmethod
    def zeros(cls, grid: GridSpec) -> "State":
        return cls(Field.zeros(grid), tuple(Field.zeros(grid) for _ in range(grid.dim)))

    @classmethod
    def from_arrays(cls, grid: GridSpec, eta, V) -> "State":
        return cls(Field(grid, eta), tuple(Field(grid, v) for v in V))

    def arrays(self):
        return self.eta.samples, np.stack([v.samples for v in self.V])

    def fields(self) -> list:
        return [self.eta, *self.V]

    def __iter__(self):
        # Lets a State be passed wherever an (eta, V) pair is expected.
        yield self.eta
        yield self.V

    def __add__(self, other: "State") -> "State":
        return State(self.eta + other.eta, tuple(a + b for a, b in zip(self.V, other.V)))

    def __sub__(self, other: "State") -> "State":
        return State(self.eta - other.eta, tuple(a - b for a, b in zip(self.V, other.V)))


@dataclass(frozen=True)
class BoreProfile:
    """Bore shape: ``kind`` in {"tanh", "smoothed-step", "custom-samples"}."""

    kind: str = "tanh"
    eta_minus: float = -1.0
    eta_plus: float = 1.0
    steepness: float = 1.0
    center: float = 0.0
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("tanh", "smoothed-step", "custom-samples"):
            raise ConfigurationError(f"unknown bore kind {self.kind!r}", "init.kind")
        if not self.steepness > 0:
            raise ConfigurationError("steepness must be positive", "init.steepness")
        if self.kind == "custom-samples" and self.samples is None:
            raise ConfigurationError("custom-samples bore needs samples", "init.samples")

    @property
    def jump(self) -> float:
        return self.eta_plus - self.eta_minus

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Pure (non-periodic) profile at points ``x``."""
        z = self.steepness * (np.asarray(x) - self.center)
        if self.kind == "tanh":
            return self.eta_minus + self.jump * 0.5 * (1.0 + np.tanh(z))
        if self.kind == "smoothed-step":
            return self.eta_minus + self.jump * 0.5 * (1.0 + erf(z))
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != np.shape(x):
            raise ConfigurationError("custom samples do not match the grid", "init.samples")
        return samples.copy()

    def half_width(self) -> float | None:
        if self.kind == "custom-samples":
            return None
        return _TRANSITION_HALF_WIDTH[self.kind] / self.steepness


@dataclass(frozen=True)
class BufferZone:
    """Nodes with ``|x| >= inner`` along the first axis (empty when ``width == 0``)."""

    grid: GridSpec
    inner: float
    width: float

    @property
    def mask(self) -> np.ndarray:
        if self.width == 0:
            return np.zeros(self.grid.shape, bool)
        return np.abs(self.grid.coords[0]) >= self.inner

    @property
    def empty(self) -> bool:
        return self.width == 0


@dataclass(frozen=True)
class BoreField:
    """Periodized bore samples together with the pure profile and buffer."""

    field: Field
    pure: np.ndarray = field(repr=False)
    buffer: BufferZone
    profile: BoreProfile

    @property
    def compensation(self) -> np.ndarray:
        return self.field.samples - self.pure


def make_bore(profile: BoreProfile, grid: GridSpec, *, compensate: bool = True) -> BoreField:
    """Sample ``profile`` on a 1D grid and periodize it in the boundary buffer.

    ``compensate=False`` skips the anti-transition (diagnostic use only).
    """
    if grid.dim != 1:
        raise ConfigurationError("bores are built on 1D grids", "grid.dim")
    L = grid.lengths[0]
    x = grid.axis(0)
    pure = profile.evaluate(x)
    jump = profile.jump
    if jump == 0:
        return BoreField(Field(grid, pure), pure, BufferZone(grid, L / 2, 0.0), profile)
    if profile.steepness * L < 20:
        raise DomainTooSmallError(f"steepness*length = {profile.steepness * L:.3g} < 20", "grid.length")
    width = BUFFER_FRACTION * L
    inner = L / 2 - width / 2
    hw = profile.half_width()
    if hw is not None and abs(profile.center) + hw > inner:
        raise DomainTooSmallError(
            f"transition |center| + {hw:.3g} exceeds buffer edge {inner:.3g}", "grid.length")
    comp = np.zeros_like(x)
    if compensate:
        y = np.where(x >= 0, x, x + L)
        ramp = smooth_step((y - inner) / width)
        comp = -jump * (ramp - (x < 0))
    return BoreField(Field(grid, pure + comp), pure, BufferZone(grid, inner, width), profile)


def gaussian(grid: GridSpec, amplitude: float, width: float, center=None) -> Field:
    """``amplitude * exp(-|x - center|^2 / width^2)``."""
    center = (0.0,) * grid.dim if center is None else tuple(np.atleast_1d(center))
    r2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords, center))
    return Field(grid, amplitude * np.exp(-r2 / width**2))


@dataclass(frozen=True)
class SplitData:
    low: State
    high: State
    C2: float | None = None


def low_high_split(state: State, part: DyadicPartition,
                   weights: EnergyWeights | None = None, r=2) -> SplitData:
    """Low part is block ``j = -1``, high part is the remainder.

    When ``weights`` is given, ``C2 = |high|_{X^s} / |(grad eta, grad V)|_{X^{s-1}}``
    is computed (``None`` if the derivative norm vanishes).
    """
    low = State(dyadic_block(state.eta, -1, part), tuple(dyadic_block(v, -1, part) for v in state.V))
    high = state - low
    C2 = None
    if weights is not None:
        num = stacked_norm(high, weights, part, r)
        w1 = weights.with_s(weights.s - 1)
        den2 = 0.0
        for l in range(state.grid.dim):
            op = derivative_op(state.grid, l)
            dfields = [Field(state.grid, np.fft.ifftn(op.symbol * f.spectrum).real) for f in state.fields()]
            den2 += stacked_norm((dfields[0], dfields[1:]), w1, part, r) ** 2
        C2 = num / math.sqrt(den2) if den2 > 0 else None
    return SplitData(low, high, C2)


@dataclass(frozen=True)
class ComposedState:
    """2D state stored as y-extended 1D background plus 2D perturbation."""

    background1d: State
    perturbation: State

    @property
    def grid(self) -> GridSpec:
        return self.perturbation.grid

    def extended_background(self) -> State:
        return extend_1d(self.background1d, self.grid)

    def total(self) -> State:
        return self.extended_background() + self.perturbation


def extend_1d(state1d: State, grid2d: GridSpec) -> State:
    """Copy a 1D state along y; velocity becomes ``(u, 0)``."""
    if state1d.grid != grid2d.line(0):
        raise ConfigurationError("1D grid does not match the x-axis of the 2D grid")
    ny = grid2d.points[1]
    eta = np.repeat(state1d.eta.samples[:, None], ny, axis=1)
    u = np.repeat(state1d.V[0].samples[:, None], ny, axis=1)
    return State.from_arrays(grid2d, eta, [u, np.zeros(grid2d.shape)])


def compose_2d(eta1d: Field, u1d: Field, phi: Field, psi: Sequence[Field]) -> ComposedState:
    """Data ``eta0(x) + phi(x, y)`` and ``(u0(x), 0) + psi(x, y)``."""
    if phi.grid.dim != 2 or eta1d.grid.dim != 1:
        raise ConfigurationError("compose_2d expects 1D background and 2D perturbation")
    if eta1d.grid != phi.grid.line(0) or u1d.grid != eta1d.grid:
        raise ConfigurationError("1D grid does not match the x-axis of the 2D grid")
    return ComposedState(State(eta1d, (u1d,)), State(phi, tuple(psi)))


def m_norm(composed: ComposedState, weights: EnergyWeights, part1d: DyadicPartition,
           part2d: DyadicPartition, r=2) -> float:
    """E-norm of the 1D background plus X-norm of the 2D perturbation."""
    return (e_norm(composed.background1d, weights, part1d, r)
            + stacked_norm(composed.perturbation, weights, part2d, r))
