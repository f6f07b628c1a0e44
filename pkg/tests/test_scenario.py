"""Geometry containers, noise model, measurement simulation, and file I/O."""

import math

import numpy as np
import pytest

from mmloc import (
    NoiseModel,
    RangeDiffSet,
    Scenario,
    SensorArray,
    circular_array,
    linear_array,
    load_scenario,
    noisy_rangediffs,
    noisy_ranges,
    random_array,
    range_noise_std,
    rangediffs_from_ranges,
    read_rangediffs_csv,
    read_ranges_csv,
    rhombus_array,
    save_scenario,
    snr_to_sigma2,
    true_ranges,
    unordered_pairs,
    write_rangediffs_csv,
    write_ranges_csv,
)


class TestSensorArray:
    def test_basic_properties(self):
        arr = SensorArray(np.array([[0.0, 0.0], [3.0, 4.0], [1.0, -2.0]]))
        assert arr.m == 3
        assert arr.n == 2
        np.testing.assert_allclose(arr.sensor(2), [3.0, 4.0])
        np.testing.assert_allclose(arr.centroid(), [4.0 / 3.0, 2.0 / 3.0])

    def test_rejects_single_sensor(self):
        with pytest.raises(ValueError):
            SensorArray(np.array([[0.0, 0.0]]))

    def test_rejects_coincident_sensors(self):
        with pytest.raises(ValueError):
            SensorArray(np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]))

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            SensorArray(np.array([[1.0], [2.0]]))
        with pytest.raises(ValueError):
            SensorArray(np.zeros((3, 4)))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            SensorArray(np.array([[0.0, 0.0], [np.nan, 1.0]]))

    def test_coordinates_write_protected(self):
        arr = circular_array(4, radius=1.0)
        with pytest.raises(ValueError):
            arr.sensors[0, 0] = 99.0

    def test_sensor_index_out_of_range(self):
        arr = circular_array(4, radius=1.0)
        with pytest.raises(IndexError):
            arr.sensor(0)
        with pytest.raises(IndexError):
            arr.sensor(5)


class TestFixtureArrays:
    def test_circular_sensor_positions(self):
        # sensor i sits at radius * [cos(2 pi i / m), sin(2 pi i / m)]
        arr = circular_array(5, radius=10.0)
        np.testing.assert_allclose(
            arr.sensor(1), [3.090169943749474, 9.510565162951535], atol=1e-12)
        np.testing.assert_allclose(arr.sensor(5), [10.0, 0.0], atol=1e-12)

    def test_circular_m6_last_sensor(self):
        arr = circular_array(6, radius=10.0)
        np.testing.assert_allclose(arr.sensor(6), [10.0, 0.0], atol=1e-12)

    def test_rhombus(self):
        arr = rhombus_array()
        np.testing.assert_allclose(arr.sensor(1), [0.0, 10.0])
        assert arr.m == 4
        np.testing.assert_allclose(arr.centroid(), [0.0, 0.0], atol=1e-15)

    def test_linear(self):
        arr = linear_array()
        np.testing.assert_allclose(arr.sensor(1), [5.0, 0.0])
        assert np.all(arr.sensors[:, 0] == 5.0)
        centered = arr.sensors - arr.sensors.mean(axis=0)
        assert np.linalg.matrix_rank(centered) == 1

    def test_random_array_determinism_and_bounds(self):
        a1 = random_array(5, -50.0, 50.0, n=2, seed=11)
        a2 = random_array(5, -50.0, 50.0, n=2, seed=11)
        np.testing.assert_array_equal(a1.sensors, a2.sensors)
        assert np.all(np.abs(a1.sensors) <= 50.0)

    def test_random_array_degenerate_bounds(self):
        with pytest.raises(ValueError):
            random_array(2, 0.0, 0.0)


class TestPairsAndRanges:
    def test_unordered_pairs_count_and_order(self):
        pairs = unordered_pairs(4)
        assert pairs == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

    def test_true_ranges_at_sensor(self):
        arr = rhombus_array()
        r = true_ranges(arr.sensor(1), arr)
        assert r[0] == 0.0

    def test_true_ranges_rhombus_center(self):
        arr = rhombus_array()
        np.testing.assert_allclose(true_ranges(np.zeros(2), arr), 10.0)

    def test_true_ranges_circular_oracle(self):
        # distance [1,5] -> [10,0] is sqrt(81 + 25) = sqrt(106)
        arr = circular_array(6, radius=10.0)
        r = true_ranges(np.array([1.0, 5.0]), arr)
        np.testing.assert_allclose(r[5], math.sqrt(106.0), rtol=1e-12)


class TestNoiseModel:
    def test_snr_mapping(self):
        # unit signal power: sigma^2 = 10^(-SNR/10)
        assert snr_to_sigma2(0.0) == 1.0
        np.testing.assert_allclose(snr_to_sigma2(10.0), 0.1, rtol=1e-12)
        np.testing.assert_allclose(snr_to_sigma2(-10.0), 10.0, rtol=1e-12)
        with pytest.raises(ValueError):
            snr_to_sigma2(math.inf)  # the benchmark layer owns the inf case

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(sigma2=-1.0, f0=1000.0, c=340.0)
        with pytest.raises(ValueError):
            NoiseModel(sigma2=1.0, f0=0.0, c=340.0)
        with pytest.raises(ValueError):
            NoiseModel(sigma2=1.0, f0=1000.0, c=-5.0)

    def test_range_noise_std_grows_with_distance(self):
        arr = SensorArray(np.array([[0.0, 0.0], [100.0, 0.0]]))
        noise = NoiseModel(sigma2=1.0, f0=1000.0, c=340.0)
        std = range_noise_std(np.array([1.0, 0.0]), arr, noise)
        assert std[1] > std[0] > 0.0

    def test_zero_variance_gives_zero_std(self):
        arr = rhombus_array()
        noise = NoiseModel(sigma2=0.0, f0=1000.0, c=340.0)
        std = range_noise_std(np.array([1.0, 5.0]), arr, noise)
        np.testing.assert_array_equal(std, 0.0)


class TestMeasurements:
    def test_noiseless_ranges_exact(self):
        arr = circular_array(5, radius=10.0)
        src = np.array([1.0, 5.0])
        noise = NoiseModel(sigma2=0.0, f0=1000.0, c=340.0)
        np.testing.assert_array_equal(
            noisy_ranges(src, arr, noise, seed=0), true_ranges(src, arr))

    def test_noisy_ranges_deterministic(self):
        arr = circular_array(5, radius=10.0)
        src = np.array([1.0, 5.0])
        noise = NoiseModel(sigma2=1.0, f0=1000.0, c=340.0)
        r1 = noisy_ranges(src, arr, noise, seed=42)
        r2 = noisy_ranges(src, arr, noise, seed=42)
        np.testing.assert_array_equal(r1, r2)
        r3 = noisy_ranges(src, arr, noise, seed=43)
        assert not np.array_equal(r1, r3)

    def test_negative_range_kept_with_warning(self):
        # enormous noise can push a range negative; it must survive unclamped
        import warnings

        arr = SensorArray(np.array([[0.0, 0.0], [0.2, 0.0]]))
        src = np.array([0.1, 0.0])
        noise = NoiseModel(sigma2=1e6, f0=1.0, c=1.0)
        hit = False
        for seed in range(50):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                r = noisy_ranges(src, arr, noise, seed=seed)
            if np.any(r < 0):
                hit = True
                assert any("non-positive" in str(w.message) for w in caught)
                break
        assert hit

    def test_rangediffs_from_ranges_orientation(self):
        # first index is always the farther sensor, value = |r_i - r_j|
        rd = rangediffs_from_ranges(np.array([5.0, 2.0, 9.0]))
        got = {(i, j): v for i, j, v in rd.entries()}
        assert got[(1, 2)] == pytest.approx(3.0)
        assert got[(3, 1)] == pytest.approx(4.0)
        assert got[(3, 2)] == pytest.approx(7.0)

    def test_rangediff_tie_keeps_ascending_order(self):
        rd = rangediffs_from_ranges(np.array([4.0, 4.0]))
        entries = list(rd.entries())
        assert entries == [(1, 2, 0.0)]

    def test_noisy_rangediffs_noiseless_matches_truth(self):
        arr = circular_array(4, radius=10.0)
        src = np.array([1.0, 5.0])
        noise = NoiseModel(sigma2=0.0, f0=1000.0, c=340.0)
        rd = noisy_rangediffs(src, arr, noise, seed=0)
        d = true_ranges(src, arr)
        for i, j, v in rd.entries():
            assert v == pytest.approx(abs(d[i - 1] - d[j - 1]), abs=1e-12)


class TestRangeDiffSet:
    def test_requires_all_pairs(self):
        with pytest.raises(ValueError):
            RangeDiffSet(np.array([1, 1]), np.array([2, 3]),
                         np.array([0.5, 0.5]), m=4)

    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            RangeDiffSet(np.array([1]), np.array([2]), np.array([-0.1]), m=2)

    def test_flipped_pair_is_legal(self):
        # (2, 1) just encodes the orientation r_2 - r_1 >= 0
        rd = RangeDiffSet(np.array([2]), np.array([1]), np.array([0.5]), m=2)
        assert list(rd.entries()) == [(2, 1, 0.5)]

    def test_rejects_out_of_range_indices(self):
        with pytest.raises(ValueError):
            RangeDiffSet(np.array([3]), np.array([1]), np.array([0.5]), m=2)

    def test_rejects_duplicate_pair(self):
        with pytest.raises(ValueError):
            RangeDiffSet(np.array([1, 2, 1]), np.array([2, 1, 3]),
                         np.array([0.5, 0.5, 0.5]), m=3)

    def test_n_pairs(self):
        rd = rangediffs_from_ranges(np.arange(1.0, 6.0))
        assert rd.n_pairs == 10


class TestFileIO:
    def test_ranges_csv_roundtrip(self, tmp_path):
        r = np.array([5.511303103005568, 1.25, 9.75e-3])
        path = tmp_path / "r.csv"
        write_ranges_csv(path, r)
        np.testing.assert_array_equal(read_ranges_csv(path), r)

    def test_rangediffs_csv_roundtrip(self, tmp_path):
        rd = rangediffs_from_ranges(np.array([5.0, 2.0, 9.0, 3.3]))
        path = tmp_path / "rd.csv"
        write_rangediffs_csv(path, rd)
        back = read_rangediffs_csv(path)
        assert back.m == rd.m
        assert list(back.entries()) == list(rd.entries())

    def test_scenario_json_roundtrip(self, tmp_path):
        scen = Scenario(array=circular_array(5, radius=10.0),
                        source=np.array([1.0, 5.0]),
                        noise=NoiseModel(sigma2=0.5, f0=1000.0, c=340.0),
                        seed=123)
        path = tmp_path / "scen.json"
        save_scenario(path, scen)
        back = load_scenario(path)
        np.testing.assert_array_equal(back.array.sensors,
                                      scen.array.sensors)
        np.testing.assert_array_equal(back.source, scen.source)
        assert back.noise == scen.noise
        assert back.seed == 123

    def test_read_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_ranges_csv(path)
