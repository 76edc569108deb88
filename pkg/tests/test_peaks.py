import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linerecon import (
    DataError,
    DomainError,
    Grid,
    InsufficientDataError,
    Peak,
    SampledSpectrum,
    annotate,
    find_local_maxima,
    frequency_error,
    second_derivative,
    top_L,
)
from linerecon.pipeline import run_pipeline

from conftest import SEVEN_FREQS


def sampled(values, start=0.0, step=1.0):
    n = len(values)
    return SampledSpectrum(Grid(start, start + step * (n - 1), n), values)


def pointwise_offset(z, i, j):
    """``|nu_j - nu_i|`` from the quadratic expansion of ``z`` about the peak ``i``."""
    return math.sqrt(2 * abs(z.values[j] - z.values[i]) / abs(second_derivative(z, i)))


class TestMaxima:
    def test_monotone(self):
        assert find_local_maxima(sampled(np.arange(10.0))) == []

    def test_single(self):
        (p,) = find_local_maxima(sampled([0.0, 1.0, 0.0]))
        assert p.index == 1

    def test_plateau(self):
        assert [p.index for p in find_local_maxima(sampled([0.0, 2.0, 2.0, 0.0]))] == [1]

    def test_boundary_excluded(self):
        assert find_local_maxima(sampled([5.0, 1.0, 0.0, 1.0, 5.0])) == []

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            find_local_maxima(sampled([1.0, 2.0]))

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=60))
    def test_predicate(self, vals):
        v = np.array(vals)
        z = sampled(v)
        found = {p.index for p in find_local_maxima(z)}
        expected = {i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] >= v[i + 1]}
        assert found == expected


class TestTopL:
    def test_supply_short(self):
        peaks = [Peak(i, float(i), 1.0) for i in (1, 3, 5)]
        assert top_L(peaks, 12) == peaks

    def test_tie(self):
        peaks = [Peak(9, 9.0, 2.0), Peak(5, 5.0, 2.0)]
        assert [p.index for p in top_L(peaks, 1)] == [5]

    def test_bad_L(self):
        with pytest.raises(DataError):
            top_L([], 0)

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=60), st.integers(1, 20))
    def test_subset_sorted(self, vals, L):
        peaks = find_local_maxima(sampled(vals))
        top = top_L(peaks, L)
        assert len(top) == min(L, len(peaks))
        assert all(p in peaks for p in top)
        f = [p.frequency for p in top]
        assert f == sorted(f)
        if top:
            rest = [p for p in peaks if p not in top]
            assert all(r.height <= min(p.height for p in top) for r in rest)

    def test_seven_line_tallest(self, config):
        run = run_pipeline(config)
        z = run.deconvolution.solution.z_alpha
        top = top_L(find_local_maxima(z), 12)
        tallest = sorted(top, key=lambda p: -p.height)[:7]
        h = z.grid.step
        for f in SEVEN_FREQS:
            assert min(abs(p.frequency - f) for p in tallest) <= 2 * h


class TestDerivative:
    def test_quadratic(self):
        x = Grid(0.0, 2.0, 21).nodes
        z = SampledSpectrum(Grid(0.0, 2.0, 21), x**2)
        for i in (1, 7, 19):
            assert second_derivative(z, i) == pytest.approx(2.0, rel=1e-9)

    def test_constant(self):
        assert second_derivative(sampled(np.full(5, 3.0)), 2) == 0.0

    def test_hand(self):
        assert second_derivative(sampled([0.0, 1.0, 0.0]), 1) == -2.0

    @pytest.mark.parametrize("i", [0, 4])
    def test_boundary(self, i):
        with pytest.raises(DomainError):
            second_derivative(sampled(np.zeros(5)), i)


class TestFrequencyError:
    def test_zero_eps(self):
        assert frequency_error(0.0, -3.0, 0.2) == 0.1

    def test_without_step_term(self):
        assert math.sqrt(2 * 1.0 / 8.0) == 0.5
        assert frequency_error(1.0, 8.0, 1e-300) == pytest.approx(0.5)

    def test_hand(self):
        assert frequency_error(1.0, -8.0, 1.0) == pytest.approx(math.sqrt(0.5), rel=1e-15)

    def test_flat(self):
        assert frequency_error(1.0, 0.0, 0.1) == math.inf

    def test_bad_step(self):
        with pytest.raises(DataError):
            frequency_error(1.0, 1.0, 0.0)

    @given(
        st.floats(0, 10), st.floats(0, 10),
        st.floats(0.01, 100), st.floats(0.01, 100),
        st.floats(1e-3, 1), st.floats(1e-3, 1),
    )
    def test_monotone(self, e1, e2, c1, c2, h1, h2):
        lo_e, hi_e = sorted((e1, e2))
        lo_c, hi_c = sorted((c1, c2))
        lo_h, hi_h = sorted((h1, h2))
        assert frequency_error(lo_e, lo_c, lo_h) <= frequency_error(hi_e, lo_c, lo_h)
        assert frequency_error(lo_e, hi_c, lo_h) <= frequency_error(lo_e, lo_c, lo_h)
        assert frequency_error(lo_e, lo_c, lo_h) <= frequency_error(lo_e, lo_c, hi_h)

    @given(st.floats(1e-6, 10), st.floats(1e-3, 100), st.floats(1e-3, 1))
    def test_dominates_plain_form(self, eps, z2, h):
        plain = math.sqrt(2 * eps / z2)
        assert frequency_error(eps, z2, h) >= max(plain, h / 2) * (1 - 1e-15)


def test_pointwise_form_consistency():
    # on an exact parabola the pointwise offset is recovered exactly, and the
    # norm form with eps equal to the height drop reproduces it
    grid = Grid(0.0, 2.0, 41)
    z = SampledSpectrum(grid, 5.0 - 3.0 * (grid.nodes - 1.0) ** 2)
    i = 20
    for j in (17, 22, 25):
        offset = abs(grid.nodes[j] - grid.nodes[i])
        assert pointwise_offset(z, i, j) == pytest.approx(offset, rel=1e-9)
        drop = abs(z.values[j] - z.values[i])
        assert frequency_error(drop, second_derivative(z, i), 1e-300) == pytest.approx(offset, rel=1e-9)


def test_annotate():
    z = sampled([0.0, 1.0, 3.0, 1.0, 0.0], step=0.5)
    (p,) = annotate(z, find_local_maxima(z), 0.25)
    assert p.second_derivative == pytest.approx(-16.0)
    assert p.freq_error == pytest.approx(math.sqrt(2 * 0.25 / 16 + 0.0625))
