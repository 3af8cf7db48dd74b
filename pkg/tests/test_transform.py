import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coascent.pathgen import GeneratorConfig, GridPath, HorizonError, generate, reach, rescale
from coascent.records import PassageNotReached, RecordProfile
from coascent.transform import (
    FUNCTIONALS,
    battery,
    coascent,
    excursion_from_max,
    iterated_coascent,
    lamperti,
    rescaled_battery,
)


def brownian(seed, horizon=16.0, steps=4096):
    return generate(GeneratorConfig("brownian", horizon=horizon, steps=steps, seed=seed))


def usable(seed, level, factor, steps=4096):
    """A Brownian path extended until ``level`` is hit at T with ``factor * T`` covered."""
    cfg = GeneratorConfig("brownian", horizon=1.0, steps=steps, seed=seed)
    return reach(generate(cfg), cfg, level, factor)


class TestBattery:
    def test_power_path_values(self, power_path):
        endpoint, sup, avg, alpha = battery(power_path, 0.25)
        assert endpoint == pytest.approx(1.0, abs=1e-15)
        assert sup == pytest.approx(1.0, abs=1e-15)
        assert avg == pytest.approx(2 / 3, abs=1e-4)
        assert alpha == pytest.approx(0.5, abs=1e-12)

    def test_power_path_is_fixed_under_rescaling(self, power_path):
        # u * r stays on the grid, so the alpha column is exact too
        r = power_path.delta * np.array([4, 8, 100, 2048, 4096])
        table = rescaled_battery(power_path, r, 0.25).as_array()
        assert table.shape == (5, 4)
        np.testing.assert_allclose(table[:, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(table[:, 1], 1.0, atol=1e-12)
        np.testing.assert_allclose(table[:, 3], 0.5, atol=1e-12)

    def test_column_order(self):
        assert FUNCTIONALS == ("endpoint", "sup", "avg", "alpha")

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 4.0), st.floats(0.0, 1.0))
    def test_matches_explicit_rescaling(self, r, u):
        path = generate(GeneratorConfig("fbm", 0.7, 4.0, 512, seed=8))
        fast = rescaled_battery(path, r, u).as_array()[0]
        slow = battery(rescale(path, r), u)
        np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-12)

    def test_beyond_horizon(self, power_path):
        with pytest.raises(HorizonError):
            rescaled_battery(power_path, 5.0, 0.5)


class TestCoAscent:
    @pytest.mark.parametrize("hurst", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("level", [0.5, 1.0, 2.0])
    def test_power_path_is_fixed(self, hurst, level):
        path = generate(GeneratorConfig("deterministic-power", hurst, 2.0 * level ** (1 / hurst), 4096))
        result = coascent(path, level)
        assert result.passage_time_used == pytest.approx(level ** (1 / hurst), rel=1e-9)
        np.testing.assert_allclose(result.path.values, result.path.times**hurst, atol=1e-9)

    def test_hand_path_endpoint(self):
        values = [0.0, 0.25, 0.5, 0.75, 1.0, 1.2, 1.4, 1.6, 1.8]
        result = coascent(GridPath(1.0, values, 0.5), 1.0)
        assert result.passage_time_used == pytest.approx(4.0)
        assert result.path.at(1.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("level", [0.5, 1.0])
    def test_result_invariants(self, seed, level):
        result = coascent(usable(seed, level, 2.0), level, out_horizon=2.0)
        path, t = result.path, result.passage_time_used
        assert path.at(1.0) == pytest.approx(level * t**-0.5, abs=1e-12)
        first = path.values[path.times <= 1.0]
        assert first.max() <= path.at(1.0) + 1e-12
        assert path.horizon >= 2.0

    def test_resampled_output(self):
        result = coascent(usable(1, 1.0, 2.0), 1.0, out_horizon=2.0, out_steps=256)
        assert result.path.steps == 256 and result.path.horizon == pytest.approx(2.0)

    def test_unreached_level(self, power_path):
        with pytest.raises(PassageNotReached):
            coascent(power_path, 5.0)

    def test_short_path(self, power_path):
        with pytest.raises(HorizonError):
            coascent(power_path, 1.5, out_horizon=2.0)

    @pytest.mark.parametrize("kwargs", [{"level": 0.0}, {"out_horizon": 0.5}])
    def test_invalid_arguments(self, power_path, kwargs):
        with pytest.raises(ValueError):
            coascent(power_path, **kwargs)


class TestIteratedCoAscent:
    def test_power_path_is_fixed(self, power_path):
        twice = iterated_coascent(coascent(power_path, 1.0), 1.0)
        np.testing.assert_allclose(twice.path.values, twice.path.times**0.5, atol=1e-9)

    @pytest.mark.parametrize("seed", range(6))
    def test_equals_coascent_at_scaled_level(self, seed):
        cfg = GeneratorConfig("brownian", horizon=1.0, steps=2**14, seed=seed)
        path = reach(generate(cfg), cfg, 1.0)
        while True:
            # extending may move T_1 (coarser grid), so repeat until the path is stable
            t = RecordProfile(path).first_passage(1.0)
            longer = reach(path, cfg, t**0.5, factor=2.0)
            if longer is path:
                break
            path = longer
        first = coascent(path, 1.0, out_horizon=path.horizon / t)
        twice = iterated_coascent(first, 1.0, out_horizon=2.0)
        level = first.passage_time_used**0.5
        direct = coascent(path, level, out_horizon=2.0)
        # passage times multiply, up to one source cell of interpolation
        product = twice.passage_time_used * first.passage_time_used
        assert product == pytest.approx(direct.passage_time_used, abs=path.delta)
        assert twice.path.at(1.0) == pytest.approx(direct.path.at(1.0), rel=1e-6)


class TestLamperti:
    def test_power_path_maps_to_one(self, power_path):
        image = lamperti(power_path, math.log(0.25), math.log(4.0), 4)
        np.testing.assert_allclose(image.values, 1.0, atol=1e-12)

    def test_power_path_has_no_excursion(self, power_path):
        image = excursion_from_max(power_path, math.log(0.25), math.log(4.0), 16)
        np.testing.assert_allclose(image.values, 0.0, atol=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_excursion_is_nonpositive_and_linear(self, seed):
        path = brownian(seed, horizon=8.0, steps=1024)
        lo, hi = math.log(0.05), math.log(8.0)
        x = lamperti(path, lo, hi, 200).values
        m = lamperti(GridPath(path.delta, RecordProfile(path).running_max, 0.5), lo, hi, 200).values
        u = excursion_from_max(path, lo, hi, 200).values
        assert np.all(u <= 0)
        np.testing.assert_allclose(x - m, u, atol=1e-12)

    @pytest.mark.parametrize("tau", [0.25, 0.5, 1.0])
    def test_brownian_covariance(self, tau):
        cfg = GeneratorConfig("brownian", horizon=2.0, steps=256)
        pairs = []
        for seed in range(4000):
            image = lamperti(generate(GeneratorConfig("brownian", horizon=2.0, steps=256, seed=seed)),
                             -tau / 2, tau / 2, 1)
            pairs.append(image.values)
        pairs = np.array(pairs)
        prod = pairs[:, 0] * pairs[:, 1]
        assert cfg.horizon > math.exp(tau / 2)
        assert abs(prod.mean() - math.exp(-tau / 2)) < 4 * prod.std() / math.sqrt(prod.size)

    @pytest.mark.parametrize("z_min, z_max", [(0.0, 2.0), (math.log(1e-4), 0.0), (0.5, 0.5)])
    def test_invalid_ranges(self, power_path, z_min, z_max):
        with pytest.raises(ValueError):
            lamperti(power_path, z_min, z_max, 4)
