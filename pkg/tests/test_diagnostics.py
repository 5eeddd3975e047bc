"""Ledger, modified energies, blow-up monitor, inequality audit and buffer monitor."""
import json
import math

import numpy as np
import pytest

from bbmbore.bore import BoreProfile, State, gaussian, low_high_split, make_bore
from bbmbore.diagnostics import (
    LEDGER_COLUMNS,
    EnergyLedger,
    blowup_monitor,
    buffer_monitor,
    fit_audit_constant,
    inequality_audit,
    modified_energies,
    modified_energy,
)
from bbmbore.errors import ConfigurationError
from bbmbore.littlewood_paley import EnergyWeights, block_energies, build_partition
from bbmbore.solver import ModelParams, SolverConfig, run, solve_1d_bore
from bbmbore.spectral import Field, GridSpec

SQRT7_2 = math.sqrt(7.0) / 2


def ledger_from(t, U_inf):
    led = EnergyLedger()
    for ti, ui in zip(t, U_inf):
        led.append({"t": ti, "U_s": 1.0, "U_inf": ui})
    return led


class TestLedger:
    def test_csv_round_trip(self):
        rng = np.random.default_rng(1)
        led = EnergyLedger()
        for i in range(7):
            led.append({"t": 0.1 * i, "U_s": rng.random(), "max_eta": rng.random() * 1e-300,
                        "U_inf": rng.random(), "extra": -rng.random() * 1e20})
        text = led.to_csv()
        again = EnergyLedger.from_csv(text).to_csv()
        assert again == text
        assert text.splitlines()[0].split(",")[:6] == list(LEDGER_COLUMNS)

    def test_file_round_trip(self, tmp_path):
        led = ledger_from([0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
        path = tmp_path / "ledger.csv"
        led.to_csv(path)
        back = EnergyLedger.from_csv(path)
        np.testing.assert_array_equal(back.column("blowup_integral"), led.column("blowup_integral"))

    def test_bad_header(self):
        with pytest.raises(ConfigurationError):
            EnergyLedger.from_csv("t,U_s,foo\n0,1,2\n")

    def test_nonfinite_rejected(self):
        led = EnergyLedger()
        with pytest.raises(FloatingPointError):
            led.append({"t": 0.0, "U_s": float("nan")})

    def test_late_column_rejected(self):
        led = EnergyLedger()
        led.append({"t": 0.0, "U_s": 1.0})
        with pytest.raises(ConfigurationError):
            led.append({"t": 0.1, "U_s": 1.0, "new": 2.0})

    def test_trapezoid_integral(self):
        t = np.linspace(0, 2, 41)
        led = ledger_from(t, 1 + t)
        I = led.column("blowup_integral")
        np.testing.assert_allclose(I, t + t**2 / 2, atol=1e-13)
        assert np.all(np.diff(I) >= 0)


class TestModifiedEnergy:
    def setup_method(self):
        self.g = GridSpec(20.0, 256)
        self.part = build_partition(self.g)
        rng = np.random.default_rng(3)
        k = np.fft.rfftfreq(256, 20.0 / 256)
        # smooth random fields so every block carries energy
        self.smooth = [np.fft.irfft(np.fft.rfft(rng.standard_normal(256)) * np.exp(-k), 256)
                       for _ in range(3)]

    def state(self, eta, u):
        return State.from_arrays(self.g, eta, [u])

    def test_zero_velocity_equals_U(self):
        w = EnergyWeights(0.2, 0.3, 0.4, 2.0)
        st = self.state(self.smooth[0], np.zeros(256))
        N, ok = modified_energies(st, w, self.part, h=self.smooth[1])
        U = block_energies(st, w, self.part)
        np.testing.assert_allclose(N, U, rtol=1e-12, atol=1e-300)
        assert ok

    def test_eps_zero_equals_U(self):
        w = EnergyWeights(0.2, 0.3, 0.0, 2.0)
        st = self.state(self.smooth[0], self.smooth[1])
        N, _ = modified_energies(st, w, self.part, h=self.smooth[2])
        np.testing.assert_allclose(N, block_energies(st, w, self.part), rtol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_bracket(self, seed):
        rng = np.random.default_rng(seed)
        eps = 0.5
        eta = self.smooth[0] * rng.uniform(0.5, 2.0)
        h = self.smooth[2]
        # scale so that eps * |eta + h| reaches 0.74
        scale = 0.74 / (eps * np.max(np.abs(eta + h)))
        eta, h = eta * scale, h * scale
        w = EnergyWeights(rng.uniform(0, 1), rng.uniform(0, 1), eps, 2.0)
        st = self.state(eta, self.smooth[1] * rng.uniform(0.1, 3.0))
        N, ok = modified_energies(st, w, self.part, h=h)
        U = block_energies(st, w, self.part)
        assert ok
        nz = U > 1e-14 * U.max()
        ratio = N[nz] / U[nz]
        assert ratio.min() >= 0.5 and ratio.max() <= SQRT7_2

    def test_window_violation_flagged(self):
        w = EnergyWeights(0.2, 0.3, 0.5, 2.0)
        eta = np.full(256, 2.0)
        _, ok = modified_energies(self.state(eta, self.smooth[1]), w, self.part)
        assert not ok

    def test_single_block(self):
        w = EnergyWeights(0.2, 0.3, 0.4, 2.0)
        st = self.state(self.smooth[0], self.smooth[1])
        N, ok = modified_energies(st, w, self.part)
        assert modified_energy(st, 2, w, self.part) == (pytest.approx(N[3]), ok)
        assert modified_energy(st, self.part.j_max + 5, w, self.part)[0] == 0.0


class TestBlowupMonitor:
    def test_zero_run(self):
        g = GridSpec(10.0, 32)
        res = run(State.from_arrays(g, np.zeros(32), [np.zeros(32)]), ModelParams(0.1, 0.1, 0.1),
                  SolverConfig(0.01, 1.0))
        st = blowup_monitor(res.ledger)
        assert st.integral == 0.0 and not st.flagged

    def test_linear_growth_not_flagged(self):
        t = np.linspace(0, 10, 201)
        st = blowup_monitor(ledger_from(t, 1 + 3 * t))
        assert not st.flagged
        assert st.integral == pytest.approx(10 + 1.5 * 100, rel=1e-12)

    def test_divergence_flagged_before_singularity(self):
        # U = 1/(T - t) has a divergent integral at T = 1
        t = np.arange(0, 0.9995, 5e-4)
        st = blowup_monitor(ledger_from(t, 1 / (1 - t)))
        assert st.flagged
        assert st.flag_time < t[-1]

    def test_empty(self):
        assert not blowup_monitor(EnergyLedger()).flagged


class TestAudit:
    def test_zero_run(self):
        g = GridSpec(10.0, 32)
        res = run(State.from_arrays(g, np.zeros(32), [np.zeros(32)]), ModelParams(0.1, 0.1, 0.1),
                  SolverConfig(0.01, 1.0))
        rep = inequality_audit(res.ledger, 1.0)
        assert np.all(rep.residual == 0) and rep.fraction_holding == 1.0
        assert fit_audit_constant(res.ledger) == 0.0

    def test_acoustic_lhs_vanishes(self):
        g = GridSpec(40.0, 256)
        st = State(gaussian(g, 0.5, 2.0), (gaussian(g, 0.2, 3.0, 4.0),))
        res = run(st, ModelParams(1 / 6, 1 / 6, 0.0), SolverConfig(0.01, 2.0, ledger_stride=0.1))
        rep = inequality_audit(res.ledger, 1.0)
        N0 = np.asarray(res.ledger.N_j).max() ** 2
        assert rep.max_lhs < 1e-8 * N0

    @pytest.mark.slow
    def test_bore_calibrated_constant(self):
        # fit C on one bore run, audit a run from different bore data
        g = GridSpec(80.0, 1024)
        p = ModelParams(1 / 6, 1 / 6, 0.05)
        cfg = SolverConfig(0.01, 5.0, ledger_stride=0.1, abort_on_contamination=False)
        bf = make_bore(BoreProfile("tanh", -0.5, 0.5), g)
        calib = solve_1d_bore(bf.field, Field.zeros(g), p, cfg, buffer=bf.buffer)
        C = fit_audit_constant(calib.ledger)
        assert C > 0
        bf2 = make_bore(BoreProfile("tanh", -0.4, 0.4, steepness=1.2), g)
        fresh = solve_1d_bore(bf2.field, Field.zeros(g), p, cfg, buffer=bf2.buffer)
        rep = inequality_audit(fresh.ledger, C)
        assert rep.fraction_holding >= 0.99
        assert set(json.loads(rep.to_json())) == {"C", "fraction_holding", "min_residual", "max_lhs"}


class TestBufferMonitor:
    def setup_method(self):
        self.g = GridSpec(80.0, 1024)
        self.part = build_partition(self.g)
        self.bore = make_bore(BoreProfile("tanh", -0.5, 0.5), self.g)

    def high_eta(self, field):
        return low_high_split(State(field, (Field.zeros(self.g),)), self.part).high.eta

    def test_ramp_removed_is_large(self):
        zone = self.bore.buffer
        with_ramp = buffer_monitor(self.high_eta(self.bore.field), zone)
        raw = Field(self.g, BoreProfile("tanh", -0.5, 0.5).evaluate(self.g.axis()))
        without = buffer_monitor(self.high_eta(raw), zone)
        assert without.contaminated
        assert without.leak > 100 * with_ramp.leak
        assert without.leak > without.interior_max

    def test_reference_subtracted(self):
        hi = self.high_eta(self.bore.field)
        ref = np.where(self.bore.buffer.mask, hi.samples, 0.0)
        rep = buffer_monitor(hi, self.bore.buffer, ref)
        assert rep.leak == 0.0 and not rep.contaminated

    def test_centered_perturbation_short_run(self):
        # travel speed is at most 1, so a width-2 pulse at the center does not
        # reach the buffer (|x| > 32) in 5 time units
        st = State(gaussian(self.g, 0.1, 2.0), (Field.zeros(self.g),))
        res = run(st, ModelParams(1 / 6, 1 / 6, 0.1), SolverConfig(0.01, 5.0, ledger_blocks=False))
        rep = buffer_monitor(res.final.eta, self.bore.buffer)
        assert not rep.contaminated
        assert rep.leak < 1e-4 * rep.interior_max

    def test_no_zone(self):
        rep = buffer_monitor(np.ones(8), None)
        assert rep.leak == 0.0 and not rep.contaminated
