import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linerecon import (
    DataError,
    DimensionError,
    Family,
    Grid,
    HalfWidthLaw,
    InstrumentFunction,
    LineSpectrum,
    NoiseModel,
    SampledSpectrum,
    SpectralLine,
    add_noise,
    build_matrix,
    forward_continuous,
    forward_discrete,
)
from linerecon.io import read_sampled_csv
from linerecon.pipeline import simulate

GOLDEN = Path(__file__).parent / "golden"


def model_value(nu, nup, sigma0=0.05, g=0.075):
    sigma = sigma0 * math.sqrt(1 - 0.16 * nu)
    return g / (math.sqrt(2 * math.pi) * sigma) * math.exp(-((nu - nup) ** 2) / (2 * sigma**2))


class TestTypes:
    def test_sorted(self):
        s = LineSpectrum.from_arrays([3.0, 1.0, 2.0], [1, 2, 3])
        assert list(s.frequencies) == [1.0, 2.0, 3.0]
        assert list(s.intensities) == [2.0, 3.0, 1.0]

    def test_duplicate(self):
        with pytest.raises(DataError):
            LineSpectrum.from_arrays([1.0, 1.0], [1, 2])

    def test_nonfinite(self):
        with pytest.raises(DataError):
            SpectralLine(float("nan"), 1.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            SampledSpectrum(Grid(0, 1, 3), [1.0, 2.0])

    def test_read_only(self):
        s = SampledSpectrum(Grid(0, 1, 3), [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            s.values[0] = 0.0

    def test_negative_sd(self):
        with pytest.raises(DataError):
            NoiseModel(-1.0)

    def test_dict_round_trip(self, seven_lines):
        assert LineSpectrum.from_dict(seven_lines.to_dict()) == seven_lines


class TestForward:
    def test_single_line_is_kernel(self, model_if, band):
        u = forward_discrete(LineSpectrum.from_arrays([3.0], [1.0]), model_if, band)
        np.testing.assert_allclose(u.values, [model_value(x, 3.0) for x in band.nodes], rtol=1e-12)

    def test_background_only(self, model_if, band):
        u = forward_discrete(LineSpectrum((), 0.2), model_if, band)
        np.testing.assert_array_equal(u.values, np.full(101, 0.2))

    def test_seven_line_spot_values(self, model_if, band, seven_lines):
        u = forward_discrete(seven_lines, model_if, band)
        for i in (0, 17, 50, 80, 100):
            nu = band.nodes[i]
            expected = 0.2 + sum(
                z * model_value(nu, f) for f, z in zip(seven_lines.frequencies, seven_lines.intensities)
            )
            assert u.values[i] == pytest.approx(expected, rel=1e-13)

    def test_linearity(self, model_if, band, seven_lines):
        u = forward_discrete(seven_lines, model_if, band)
        double = LineSpectrum.from_arrays(seven_lines.frequencies, 2 * seven_lines.intensities, 0.4)
        np.testing.assert_array_equal(forward_discrete(double, model_if, band).values, 2 * u.values)

    def test_continuous_zero(self, model_if, band):
        z = SampledSpectrum(Grid(2, 4, 401), np.zeros(401))
        np.testing.assert_array_equal(forward_continuous(z, model_if, band).values, 0.0)

    def test_continuous_equals_matrix(self, model_if, band, rng):
        sol = Grid(2, 4, 401)
        z = SampledSpectrum(sol, rng.uniform(0, 1, 401))
        A = build_matrix(model_if, band, sol)
        np.testing.assert_array_equal(forward_continuous(z, model_if, band).values, A.values @ z.values)
        np.testing.assert_array_equal(forward_continuous(z, model_if, band, matrix=A).values, A.values @ z.values)

    def test_continuous_grid_mismatch(self, model_if, band):
        A = build_matrix(model_if, band, Grid(2, 4, 201))
        z = SampledSpectrum(Grid(2, 4, 401), np.zeros(401))
        with pytest.raises(DimensionError):
            forward_continuous(z, model_if, band, matrix=A)

    def test_delta_correspondence(self, model_if, band):
        sol = Grid(2, 4, 401)
        z = np.zeros(401)
        idx = [56, 72, 190]
        z[idx] = [4.4, 4.6, 1.1]
        lines = LineSpectrum.from_arrays(sol.nodes[idx], z[idx])
        # equal up to the summation order of the underlying dot products
        np.testing.assert_allclose(
            forward_continuous(SampledSpectrum(sol, z), model_if, band).values,
            forward_discrete(lines, model_if, band).values,
            rtol=4 * np.finfo(float).eps,
            atol=0,
        )

    def test_spike_off_node(self, model_if, band):
        sol = Grid(2, 4, 401)
        j = int(np.argmin(abs(sol.nodes - 2.28)))
        z = np.zeros(401)
        z[j] = 4.4
        u = forward_continuous(SampledSpectrum(sol, z), model_if, band).values
        exact = forward_discrete(LineSpectrum.from_arrays([2.28], [4.4]), model_if, band).values
        # |dK/dnu'| <= g / (sigma^2 sqrt(2 pi e)) with the smallest sigma on the band
        smin = 0.05 * math.sqrt(1 - 0.16 * 4)
        slope = 0.075 / (smin**2 * math.sqrt(2 * math.pi * math.e))
        assert np.max(np.abs(u - exact)) <= abs(sol.nodes[j] - 2.28) * slope * 4.4

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.0, 10.0), min_size=401, max_size=401))
    def test_nonnegative(self, vals):
        ifn = InstrumentFunction(Family.LORENTZ, HalfWidthLaw("constant", 0.05))
        u = forward_continuous(SampledSpectrum(Grid(2, 4, 401), vals), ifn, Grid(2, 4, 51))
        assert np.all(u.values >= 0)


class TestNoise:
    def test_zero_sd(self, model_if, band, seven_lines):
        clean = forward_discrete(seven_lines, model_if, band)
        assert add_noise(clean, NoiseModel(0.0, 3)) == clean

    def test_sample_sd(self, config):
        clean, noisy = simulate(config)
        assert 0.035 <= np.std(noisy.values - clean.values, ddof=1) <= 0.065

    def test_determinism(self, config):
        assert simulate(config)[1] == simulate(config)[1]

    def test_golden(self, config):
        golden = read_sampled_csv(GOLDEN / "noisy_seed0.csv")
        assert simulate(config)[1] == golden
