import math

import numpy as np
import pytest

from spinphase.analysis import (CANONICAL_LABELS_6, SweepConfig, canonical_labels,
                                count_sign_changes, factorization_value_check,
                                find_derivative_extrema, find_jumps, find_parity_crossings,
                                first_derivative, sweep)
from spinphase.errors import ConfigError, NumericalError
from spinphase.models import ModelSpec

SQ3 = math.sqrt(3.0)
HI = 0.5 * (1 + SQ3)
TOT6 = tuple(range(1, 7))


def ti_cfg(start, stop, step, labels=(TOT6,), policy="symmetric"):
    return SweepConfig(spec=ModelSpec(family="ti", n=6, lam=0.0), start=start, stop=stop,
                       step=step, labels=labels, policy=policy)


@pytest.fixture(scope="module")
def ti_line():
    return sweep(ti_cfg(0.0, 2.0, 0.01, labels=(TOT6, (1,))))


@pytest.fixture(scope="module")
def xy_line():
    cfg = SweepConfig(spec=ModelSpec(family="xy", n=6, lam=1.0, gamma=0.5),
                      start=1.0, stop=1.7, step=0.005, labels=(TOT6, (1,)))
    return sweep(cfg)


class TestSweep:
    def test_grid_is_deterministic_and_inclusive(self):
        cfg = ti_cfg(0.0, 1.0, 0.25)
        assert np.array_equal(cfg.params, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_labels_default_to_canonical(self):
        cfg = SweepConfig(spec=ModelSpec(family="ti", n=6, lam=0.0),
                          start=0.0, stop=1.0, step=0.5)
        assert cfg.labels == tuple(tuple(l) for l in CANONICAL_LABELS_6)

    def test_invalid_ranges(self):
        with pytest.raises(ConfigError):
            ti_cfg(0.0, 1.0, -0.1)
        with pytest.raises(ConfigError):
            ti_cfg(1.0, 0.5, 0.1)

    def test_ti_start_value_is_product_power(self, ti_line):
        assert ti_line.values[TOT6][0] == pytest.approx(HI**6, abs=1e-10)

    def test_metadata_recorded(self, ti_line):
        assert ti_line.energy[0] == pytest.approx(-6.0, abs=1e-10)
        assert ti_line.degeneracy[0] == 1
        assert ti_line.parity[0] == 1
        assert ti_line.gap[0] > 0

    def test_xxz_aligned_up_constant_below_transition(self):
        cfg = SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                          start=-2.0, stop=-1.0 - 1e-4, step=0.01,
                          labels=tuple(tuple(l) for l in CANONICAL_LABELS_6),
                          policy="aligned_up")
        line = sweep(cfg)
        for label in cfg.labels:
            series = line.values[label]
            assert np.max(series) - np.min(series) < 1e-10

    def test_xy_discontinuity_near_factorization(self, xy_line):
        # single-site values change discontinuously around 1.1547
        series = xy_line.values[(1,)]
        params = xy_line.params
        window = (params > 1.10) & (params < 1.20)
        diffs = np.abs(np.diff(series[window]))
        assert np.max(diffs) > 10 * np.median(diffs)
        jump_at = params[window][np.argmax(diffs)]
        assert abs(jump_at - 1.1547) <= 0.005

    def test_determinism(self):
        cfg = ti_cfg(0.0, 0.3, 0.1)
        a = sweep(cfg)
        b = sweep(cfg)
        assert np.array_equal(a.values[TOT6], b.values[TOT6])
        assert np.array_equal(a.energy, b.energy)


class TestFirstDerivative:
    def test_constant_series_is_zero(self, ti_line):
        line = sweep(SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                                 start=-2.0, stop=-1.5, step=0.1, labels=((1,),),
                                 policy="aligned_up"))
        d = first_derivative(line, (1,))
        assert np.max(np.abs(d)) < 1e-12

    def test_linear_ramp(self):
        cfg = ti_cfg(0.0, 1.0, 0.1)
        line = sweep(cfg)
        # overwrite with a synthetic ramp: derivative must be 2 everywhere
        line.values[TOT6] = 2.0 * line.params
        d = first_derivative(line, TOT6)
        assert np.max(np.abs(d - 2.0)) < 1e-9


class TestDerivativeExtrema:
    def test_ti_pseudo_critical_minimum(self, ti_line):
        minima = [p for p in find_derivative_extrema(ti_line, TOT6) if p.detail == "minimum"]
        assert minima
        deepest = min(minima, key=lambda p: p.magnitude)
        assert deepest.location == pytest.approx(0.9156, abs=0.01)
        assert deepest.magnitude == pytest.approx(-5.57, abs=0.1)
        assert deepest.kind == "derivative_extremum"
        assert deepest.label == "tot"

    def test_short_series_rejected(self):
        line = sweep(ti_cfg(0.0, 0.3, 0.1))
        with pytest.raises(NumericalError):
            find_derivative_extrema(line, TOT6)

    def test_flat_series_reports_nothing(self):
        line = sweep(SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                                 start=-2.0, stop=-1.2, step=0.05, labels=((1, 2),),
                                 policy="aligned_up"))
        assert find_derivative_extrema(line, (1, 2)) == []


class TestJumps:
    def test_smooth_ti_sweep_is_clean(self, ti_line):
        assert find_jumps(ti_line, TOT6, jump_factor=50.0) == []

    def test_xy_jumps_at_crossings(self, xy_line):
        locations = [p.location for p in find_jumps(xy_line, TOT6)]
        assert any(abs(l - 1.1547) <= 0.005 for l in locations)
        assert any(abs(l - 1.545) <= 0.02 for l in locations)

    def test_xxz_jump_at_first_transition(self):
        cfg = SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                          start=-1.5, stop=-0.5, step=0.01, labels=((1,), TOT6),
                          policy="aligned_up")
        line = sweep(cfg)
        for label in ((1,), TOT6):
            locations = [p.location for p in find_jumps(line, label)]
            assert any(abs(l + 1.0) <= 0.01 for l in locations)

    def test_all_equal_series_returns_empty(self):
        line = sweep(SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                                 start=-2.0, stop=-1.5, step=0.1, labels=((1,),),
                                 policy="aligned_up"))
        assert find_jumps(line, (1,)) == []


class TestParityCrossings:
    def test_xy_gamma_05_factorization_crossing(self):
        cfg = SweepConfig(spec=ModelSpec(family="xy", n=6, lam=1.0, gamma=0.5),
                          start=1.0, stop=1.3, step=0.01, labels=((1,),))
        points = find_parity_crossings(cfg)
        assert len(points) == 1
        assert points[0].location == pytest.approx(2 / SQ3, abs=1e-6)
        assert points[0].kind == "parity_crossing"
        assert points[0].label == "global"

    def test_xy_gamma_08_closed_form(self):
        cfg = SweepConfig(spec=ModelSpec(family="xy", n=6, lam=1.0, gamma=0.8),
                          start=1.5, stop=1.8, step=0.01, labels=((1,),))
        points = find_parity_crossings(cfg)
        assert len(points) == 1
        assert points[0].location == pytest.approx(5.0 / 3.0, abs=1e-6)

    def test_ti_has_no_crossing(self):
        cfg = SweepConfig(spec=ModelSpec(family="ti", n=6, lam=0.0),
                          start=0.01, stop=5.0, step=0.25, labels=((1,),))
        assert find_parity_crossings(cfg) == []


class TestFactorizationValueCheck:
    def test_expected_column_gamma_half_is_unity(self):
        rows = factorization_value_check(0.5, CANONICAL_LABELS_6, offset=0.005)
        assert len(rows) == 12
        for _, expected, _ in rows:
            assert expected == pytest.approx(1.0, abs=1e-14)

    def test_expected_single_site_gamma_08(self):
        rows = factorization_value_check(0.8, [(1,)], offset=0.005)
        # 0.5 * (1 + sqrt(3)/3), frozen by direct arithmetic
        assert rows[0][1] == pytest.approx(0.7886751345948129, abs=1e-14)

    def test_measured_is_mean_of_straddling_values(self):
        from spinphase.models import ground_state, xy_factorization_point
        from spinphase.wigner import equal_angle_point

        offset = 0.01
        lam_f = xy_factorization_point(0.5)
        rows = factorization_value_check(0.5, [(1, 2)], offset=offset)
        lo = ground_state(ModelSpec(family="xy", n=6, lam=lam_f - offset, gamma=0.5)).state
        hi = ground_state(ModelSpec(family="xy", n=6, lam=lam_f + offset, gamma=0.5)).state
        mean = 0.5 * (equal_angle_point(lo, (1, 2), 0.0, 0.0, n=6)
                      + equal_angle_point(hi, (1, 2), 0.0, 0.0, n=6))
        assert rows[0][2] == pytest.approx(mean, abs=1e-12)

    def test_ising_limit_rejected(self):
        with pytest.raises(ValueError):
            factorization_value_check(1.0, [(1,)])


class TestInvariants:
    def test_label_size_monotone_at_zero_coupling(self, ti_line):
        # at lambda=0 the value is HI^k for a k-site label: strictly increasing in k
        line = sweep(ti_cfg(0.0, 0.02, 0.01,
                            labels=tuple(tuple(l) for l in CANONICAL_LABELS_6)))
        values = {label: line.values[label][0] for label in line.values}
        for label, value in values.items():
            assert value == pytest.approx(HI ** len(label), abs=1e-12)
        by_size = sorted(values.items(), key=lambda kv: (len(kv[0]), kv[0]))
        for (la, va), (lb, vb) in zip(by_size, by_size[1:]):
            if len(lb) > len(la):
                assert vb > va

    def test_xxz_constant_labels_above_transition(self):
        cfg = SweepConfig(spec=ModelSpec(family="xxz", n=6, delta=0.0),
                          start=-0.8, stop=10.0, step=0.2,
                          labels=((1,), (1, 2, 3, 4, 5), TOT6))
        line = sweep(cfg)
        for label in cfg.labels:
            series = line.values[label]
            assert np.max(series) - np.min(series) < 1e-8

    @pytest.mark.parametrize("gamma", [0.3, 0.8])
    def test_parity_flips_only_at_detected_crossings(self, gamma):
        lam_f = 1.0 / math.sqrt(1.0 - gamma**2)
        cfg = SweepConfig(spec=ModelSpec(family="xy", n=6, lam=1.0, gamma=gamma),
                          start=max(0.05, lam_f - 0.3), stop=lam_f + 0.3, step=0.01,
                          labels=((1,),))
        line = sweep(cfg)
        crossings = [p.location for p in find_parity_crossings(cfg)]
        flips = []
        for i in range(len(line.params) - 1):
            if line.parity[i] != line.parity[i + 1]:
                flips.append(0.5 * (line.params[i] + line.params[i + 1]))
        assert len(flips) == len(crossings)
        for flip, crossing in zip(flips, sorted(crossings)):
            assert abs(flip - crossing) <= 0.01


class TestHelpers:
    def test_canonical_labels(self):
        assert len(canonical_labels(6)) == 12
        assert canonical_labels(4) == [(1,), (1, 2), (1, 2, 3, 4)]

    def test_count_sign_changes(self):
        assert count_sign_changes([1.0, -1.0, 1.0, 1.0, -2.0]) == 3
        assert count_sign_changes([1.0, 2.0, 3.0]) == 0
        assert count_sign_changes([1.0, 0.0, -1.0], zero_atol=1e-12) == 1
