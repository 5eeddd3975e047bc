"""Dyadic partition, Besov norms, block energies and audits."""
import json
import math

import numpy as np
import pytest

from bbmbore.bore import BoreProfile, make_bore
from bbmbore.errors import ConfigurationError, DegenerateGridError
from bbmbore.littlewood_paley import (
    BesovSpec,
    EnergyWeights,
    bernstein_audit,
    besov_norm,
    block_energies,
    block_energy,
    block_norms,
    build_partition,
    chi_profile,
    commutator_constant,
    commutator_residual,
    dyadic_block,
    e_norm,
    phi_profile,
    smooth_step,
    stacked_norm,
)
from bbmbore.spectral import Field, GridSpec, dealias_product, derivative_op, apply_multiplier, inner

TWO_PI = 2 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture(scope="module")
def g1():
    return GridSpec(TWO_PI, 256)


@pytest.fixture(scope="module")
def p1(g1):
    return build_partition(g1)


def rand_field(g, rng):
    return Field(g, rng.standard_normal(g.shape))


class TestProfiles:
    def test_endpoints(self):
        assert chi_profile(0.0) == 1.0
        assert phi_profile(0.0) == 0.0
        assert chi_profile(1.0) == 1.0
        assert chi_profile(2.0) == 0.0
        assert phi_profile(2.0) == 1.0

    def test_supports(self):
        r = np.linspace(0, 4, 4001)
        assert np.all(chi_profile(r[r <= 1]) == 1)
        assert np.all(chi_profile(r[r >= 4 / 3]) == 0)
        assert np.all(phi_profile(r[(r <= 0.75) | (r >= 8 / 3)]) == 0)

    def test_smooth_step_monotone(self):
        t = np.linspace(-0.5, 1.5, 2001)
        s = smooth_step(t)
        assert np.all(np.diff(s) >= 0)
        assert s[0] == 0 and s[-1] == 1
        assert smooth_step(0.5) == pytest.approx(0.5)


class TestPartition:
    @pytest.mark.parametrize("shape", [(512,), (1024,), (64, 64)])
    def test_identities(self, shape):
        g = GridSpec((TWO_PI,) * len(shape), shape)
        res = build_partition(g).residuals()
        assert res["unity"] < 1e-12
        assert res["square_min"] >= 0.5 - 1e-12
        assert res["square_max"] <= 1 + 1e-12
        assert res["disjoint"] == 0.0

    def test_j_max(self):
        part = build_partition(GridSpec(TWO_PI, 64))
        # kmax = 32 on this grid
        assert 0.75 * 2**part.j_max <= 32 < 0.75 * 2 ** (part.j_max + 1)
        assert part.j_max == 5

    def test_degenerate_grid(self):
        with pytest.raises(DegenerateGridError):
            build_partition(GridSpec(1000.0, 4))

    def test_top_block(self):
        # kmax = 32 = 2^5 so block 5 is empty; kmax = 48 > 2^5 fills it
        assert build_partition(GridSpec(TWO_PI, 64)).j_top == 4
        assert build_partition(GridSpec(TWO_PI, 96)).j_top == 5

    def test_outside_blocks_zero(self, p1):
        assert np.all(p1.weight(-2) == 0)
        assert np.all(p1.weight(p1.j_max + 1) == 0)


class TestDyadicBlock:
    def test_constant_field(self, g1, p1):
        u = Field(g1, np.full(g1.shape, 2.5))
        np.testing.assert_allclose(dyadic_block(u, -1, p1).samples, 2.5, atol=1e-15)
        for j in range(p1.j_max + 1):
            assert np.max(np.abs(dyadic_block(u, j, p1).samples)) < 1e-15

    def test_mode_two(self, g1, p1):
        u = Field(g1, np.cos(2 * g1.axis()))
        blocks = {j: dyadic_block(u, j, p1) for j in p1.indices}
        for j, b in blocks.items():
            if j not in (0, 1):
                assert np.max(np.abs(b.samples)) < 1e-15
        np.testing.assert_allclose((blocks[0] + blocks[1]).samples, u.samples, atol=1e-14)

    def test_reconstruction(self, rng):
        for shape in [(256,), (32, 16)]:
            g = GridSpec((TWO_PI,) * len(shape), shape)
            part = build_partition(g)
            for _ in range(100 if len(shape) == 1 else 10):
                u = rand_field(g, rng)
                total = sum(dyadic_block(u, j, part).samples for j in part.indices)
                assert np.max(np.abs(total - u.samples)) / np.max(np.abs(u.samples)) < 1e-12

    def test_almost_orthogonal(self, g1, p1, rng):
        u = rand_field(g1, rng)
        scale = u.l2() ** 2
        for a in p1.indices:
            for b in p1.indices:
                if abs(a - b) >= 2:
                    assert abs(inner(dyadic_block(u, a, p1), dyadic_block(u, b, p1))) < 1e-13 * scale


class TestBesov:
    def test_zero(self, g1, p1):
        assert besov_norm(Field.zeros(g1), BesovSpec(2.0), p1) == 0.0

    def test_mode_two_bracket(self, g1, p1):
        u = Field(g1, np.cos(2 * g1.axis()))
        ratio = besov_norm(u, BesovSpec(1, 2, 2), p1) / besov_norm(u, BesovSpec(0, 2, 2), p1)
        assert 1.0 <= ratio <= 2.0

    def test_homogeneity(self, g1, p1, rng):
        u = rand_field(g1, rng)
        for spec in (BesovSpec(1.5, 2, 2), BesovSpec(0.5, math.inf, 1), BesovSpec(-1, 2, math.inf)):
            a, b = besov_norm(3.5 * u, spec, p1), 3.5 * besov_norm(u, spec, p1)
            assert abs(a - b) <= 1e-12 * b

    def test_sobolev_bracket(self, g1, p1, rng):
        # B^s_{2,2}/H^s is a weighted mean of the lattice multiplier m(k); bracket by its range
        for s in (-1.0, 0.0, 1.0, 2.0):
            m = sum(2.0 ** (2 * j * s) * p1.weight(j) ** 2 for j in p1.indices) / (1 + g1.kabs**2) ** s
            lo, hi = math.sqrt(m.min()), math.sqrt(m.max())
            assert lo >= (3 / (8 * math.sqrt(2))) ** abs(s) / math.sqrt(2) / 2 ** abs(s)
            assert hi <= (8 * math.sqrt(2) / 3) ** abs(s)
            for _ in range(20):
                u = rand_field(g1, rng)
                hs = math.sqrt(g1.cell_volume / g1.size
                               * np.sum((1 + g1.kabs**2) ** s * np.abs(u.spectrum) ** 2))
                ratio = besov_norm(u, BesovSpec(s, 2, 2), p1) / hs
                assert lo * (1 - 1e-12) <= ratio <= hi * (1 + 1e-12)

    def test_p_inf_blocks(self, g1, p1):
        u = Field(g1, 0.7 * np.cos(2 * g1.axis()))
        assert block_norms(u, math.inf, p1)[1] == pytest.approx(0.7)

    def test_invalid_spec(self):
        with pytest.raises(ConfigurationError):
            BesovSpec(1.0, 3, 2)
        with pytest.raises(ConfigurationError):
            BesovSpec(1.0, 2, 0.5)

    def test_tail_reported(self, rng):
        g = GridSpec(TWO_PI, 64)
        part = build_partition(g)
        rough = besov_norm(rand_field(g, rng), BesovSpec(2.0), part, report=True)
        smooth = besov_norm(Field(g, np.cos(g.axis())), BesovSpec(2.0), part, report=True)
        assert rough.tail_estimate > 0
        assert smooth.tail_estimate == 0.0

    def test_report_json(self, g1, p1):
        rep = besov_norm(Field(g1, np.cos(g1.axis())), BesovSpec(1, 2, math.inf), p1, report=True)
        rec = json.loads(rep.to_json())
        assert set(rec) == {"quantity", "s", "p", "r", "eps", "b", "d", "value", "tail_estimate"}
        assert rec["r"] == "inf"


class TestEnergies:
    def test_weights(self):
        w = EnergyWeights(0.0, 0.5, 0.1, 2.0)
        assert w.s_b == 2.0 and w.s_d == 3.0
        with pytest.raises(ConfigurationError):
            EnergyWeights(-1.0, 0.0, 0.1)
        with pytest.raises(ConfigurationError):
            EnergyWeights(1.0, 1.0, 1.5)

    def test_zero_state(self, g1, p1):
        z = Field.zeros(g1)
        assert np.all(block_energies((z, [z]), EnergyWeights(1, 1, 0.5), p1) == 0)

    def test_pure_l2_blocks(self, g1, p1, rng):
        eta, v = rand_field(g1, rng), rand_field(g1, rng)
        U = block_energies((eta, [v]), EnergyWeights(0, 0, 0.5), p1)
        expect = np.hypot(block_norms(eta, 2, p1), block_norms(v, 2, p1))
        np.testing.assert_allclose(U, expect, rtol=1e-12)

    def test_cos2x_exact_integral(self, g1, p1):
        eta = Field(g1, np.cos(2 * g1.axis()))
        U = block_energies((eta, [Field.zeros(g1)]), EnergyWeights(1.0, 0.0, 0.25), p1)
        assert np.sum(U**2) == pytest.approx(2 * np.pi, rel=1e-13)

    def test_block_energy_single(self, g1, p1, rng):
        st = (rand_field(g1, rng), [rand_field(g1, rng)])
        w = EnergyWeights(1, 2, 0.3)
        U = block_energies(st, w, p1)
        assert block_energy(st, 2, w, p1) == U[3]
        assert block_energy(st, p1.j_max + 3, w, p1) == 0.0

    def test_small_eps_limit(self, g1, p1, rng):
        eta, v = rand_field(g1, rng), rand_field(g1, rng)
        j = 3
        base = block_energy((eta, [v]), j, EnergyWeights(0.4, 0.7, 0.0), p1) ** 2
        grad2 = lambda f: sum(g.l2() ** 2 for g in
                              [apply_multiplier(derivative_op(g1), dyadic_block(f, j, p1))])
        slope = 0.4 * grad2(eta) + 0.7 * grad2(v)
        for eps in (1e-2, 1e-3):
            val = block_energy((eta, [v]), j, EnergyWeights(0.4, 0.7, eps), p1) ** 2
            assert (val - base) / eps == pytest.approx(slope, rel=1e-10)

    def test_stacked_zero(self, g1, p1):
        z = Field.zeros(g1)
        assert stacked_norm((z, [z]), EnergyWeights(1, 1, 0.1, 2), p1) == 0.0

    def test_stacked_eps_zero_is_besov(self, g1, p1, rng):
        eta, v = rand_field(g1, rng), rand_field(g1, rng)
        a = stacked_norm((eta, [v]), EnergyWeights(1, 1, 0.0, 1.5), p1, r=2)
        b = besov_norm([eta, v], BesovSpec(1.5, 2, 2), p1)
        assert a == pytest.approx(b, rel=1e-13)

    def test_stacked_monotone_in_eps(self, g1, p1, rng):
        for _ in range(10):
            st = (rand_field(g1, rng), [rand_field(g1, rng)])
            lo = stacked_norm(st, EnergyWeights(1, 1, 0.1, 2), p1)
            hi = stacked_norm(st, EnergyWeights(1, 1, 0.2, 2), p1)
            assert lo <= hi

    def test_e_norm_constant(self, g1, p1):
        st = (Field(g1, np.full(g1.shape, -1.25)), [Field.zeros(g1)])
        assert e_norm(st, EnergyWeights(1, 1, 0.5, 2), p1) == pytest.approx(1.25, abs=1e-14)

    def test_e_norm_bore_refinement(self):
        vals = []
        for n in (4096, 8192):
            g = GridSpec(80.0, n)
            bore = make_bore(BoreProfile("tanh", -0.5, 0.5), g).field
            vals.append(e_norm((bore, [Field.zeros(g)]), EnergyWeights(1 / 6, 1 / 6, 1.0, 2),
                               build_partition(g)))
        assert np.isfinite(vals[0])
        assert abs(vals[1] - vals[0]) / vals[0] < 5e-3

    def test_e_norm_triangle(self, g1, p1, rng):
        w = EnergyWeights(1, 1, 0.3, 2)
        for _ in range(10):
            a = (rand_field(g1, rng), [rand_field(g1, rng)])
            b = (rand_field(g1, rng), [rand_field(g1, rng)])
            ab = (a[0] + b[0], [a[1][0] + b[1][0]])
            assert e_norm(ab, w, p1) <= e_norm(a, w, p1) + e_norm(b, w, p1) * (1 + 1e-14)


class TestBernstein:
    def test_random_blocks(self, rng):
        g = GridSpec(TWO_PI, 512)
        rep = bernstein_audit(build_partition(g), trials=100, j=3, rng=rng)
        assert rep.passed
        assert rep.lower == 6.0 and rep.upper == pytest.approx(64 / 3)
        assert len(rep.ratios) == 100 and rep.skipped == 0

    def test_exact_mode(self):
        g = GridSpec(TWO_PI, 64)
        v = Field(g, np.sin(8 * g.axis()))
        grad = apply_multiplier(derivative_op(g), v)
        assert grad.l2() / v.l2() == pytest.approx(8.0, rel=1e-13)

    def test_zero_blocks_skipped(self):
        part = build_partition(GridSpec(TWO_PI, 8))
        # block j = j_max + 1 does not exist, so every trial is zero
        rep = bernstein_audit(part, trials=5, j=part.j_max + 1, rng=0)
        assert rep.skipped == 5 and rep.ratios.size == 0


class TestCommutator:
    def test_constant_u(self, g1, p1, rng):
        u = Field(g1, np.full(g1.shape, 3.0))
        v = Field(g1, np.cos(5 * g1.axis()))
        for j in p1.indices:
            assert commutator_residual(u, v, j, p1) < 1e-13

    def test_identity_oracle(self, g1, p1):
        x = g1.axis()
        u = Field(g1, np.cos(6 * x))
        j = 2
        dv = apply_multiplier(derivative_op(g1), u)
        first = dyadic_block(dealias_product(u, dv), j, p1)
        second = dealias_product(u, dyadic_block(dv, j, p1))
        direct = (first - second).l2()
        # expanded: u u' = -3 sin(12x); block of mode 12 times weight, then subtract u * block(u')
        w6 = float(p1.weight(j)[6])
        w12 = float(p1.weight(j)[12])
        expanded = -3 * w12 * np.sin(12 * x) - w6 * (-6) * np.cos(6 * x) * np.sin(6 * x)
        assert commutator_residual(u, u, j, p1) == pytest.approx(direct, abs=1e-12)
        assert direct == pytest.approx(Field(g1, expanded).l2(), abs=1e-12)

    def test_fitted_constant_stable(self):
        consts = []
        for n in (1024, 2048):
            g = GridSpec(TWO_PI, n)
            x = g.axis()
            u = Field(g, np.sin(x) + 0.5 * np.cos(2 * x))
            k = np.arange(1, 200)
            phase = np.random.default_rng(3).uniform(0, TWO_PI, k.size)
            v = Field(g, sum(np.cos(kk * x + ph) / kk**2 for kk, ph in zip(k, phase)))
            consts.append(commutator_constant(u, v, 1.0, 2, build_partition(g)).constant)
        assert consts[0] > 0
        assert abs(consts[1] - consts[0]) / consts[0] < 0.2
