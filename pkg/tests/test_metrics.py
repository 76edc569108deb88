import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linerecon import DataError, LineSpectrum, compute_metrics, evaluate_lines, match_lines
from linerecon.metrics import MetricsReport

from conftest import SEVEN_FREQS, SEVEN_INTENSITIES

TRUTH = LineSpectrum.from_arrays(SEVEN_FREQS, SEVEN_INTENSITIES)
REFERENCE_RECON = LineSpectrum.from_arrays(
    (2.280, 2.363, 2.943, 3.020, 3.554, 3.638, 3.696),
    (4.848, 4.783, 1.361, 3.546, 3.271, 3.607, 3.498),
)


def test_identical():
    m = evaluate_lines(TRUTH, TRUTH, 0.01)
    assert m.matching == tuple((i, i) for i in range(7))
    assert (m.eps, m.xi, m.eps_rel, m.xi_rel, m.zeta_rel) == (0, 0, 0, 0, 0)


def test_reference_vectors():
    m = evaluate_lines(REFERENCE_RECON, TRUTH, 0.025)
    assert m.eps_rel == pytest.approx(0.1146, abs=5e-4)
    assert m.xi_rel == pytest.approx(0.0014, abs=5e-4)


def test_reference_independent_oracle():
    dz = np.subtract(REFERENCE_RECON.intensities, SEVEN_INTENSITIES)
    df = np.subtract(REFERENCE_RECON.frequencies, SEVEN_FREQS)
    m = evaluate_lines(REFERENCE_RECON, TRUTH, 0.025)
    assert m.eps == pytest.approx(math.sqrt(np.mean(dz**2)), rel=1e-12)
    assert m.xi == pytest.approx(math.sqrt(np.mean(df**2)), rel=1e-12)
    assert m.eps_rel == pytest.approx(np.linalg.norm(dz) / np.linalg.norm(SEVEN_INTENSITIES), rel=1e-12)


def test_spurious_padding():
    recon = LineSpectrum.from_arrays(
        list(SEVEN_FREQS) + [2.6, 3.3], list(SEVEN_INTENSITIES) + [0.3, 0.4]
    )
    matching = match_lines(recon, TRUTH, 0.025)
    assert len(matching) == 9
    assert sorted(recon.frequencies[j] for i, j in matching if i is None) == [2.6, 3.3]
    m = compute_metrics(matching, recon, TRUTH)
    assert m.eps_rel == pytest.approx(0.5 / np.linalg.norm(SEVEN_INTENSITIES))
    assert m.xi_rel == 0.0
    assert m.eps == pytest.approx(0.5 / 3)


def test_empty_recon():
    m = evaluate_lines(LineSpectrum(), TRUTH, 0.025)
    assert all(j is None for _, j in m.matching)
    assert m.eps_rel == pytest.approx(1.0)
    assert m.xi_rel == 0.0


def test_zero_truth_norm():
    m = evaluate_lines(LineSpectrum.from_arrays([1.0], [1.0]), LineSpectrum.from_arrays([5.0], [0.0]), 0.1)
    assert len(m.matching) == 2
    assert math.isnan(m.eps_rel)
    single = compute_metrics([(None, 0)], LineSpectrum.from_arrays([1.0], [1.0]), LineSpectrum.from_arrays([5.0], [0.0]))
    assert single.eps == 1.0
    assert math.isnan(single.eps_rel)


def test_empty_truth():
    with pytest.raises(DataError):
        evaluate_lines(TRUTH, LineSpectrum(), 0.1)


def test_window_positive():
    with pytest.raises(DataError):
        match_lines(TRUTH, TRUTH, 0.0)


def test_greedy_tallest_first():
    truth = LineSpectrum.from_arrays([1.0, 1.2], [1.0, 5.0])
    recon = LineSpectrum.from_arrays([1.15], [4.0])
    # the taller truth line claims the only candidate
    assert match_lines(recon, truth, 0.3) == [(0, None), (1, 0)]


def test_round_trip():
    m = evaluate_lines(REFERENCE_RECON, TRUTH, 0.025)
    assert MetricsReport.from_dict(m.to_dict()) == m


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0.1, 10), min_size=7, max_size=7),
    st.lists(st.floats(-0.004, 0.004), min_size=7, max_size=7),
    st.floats(0.01, 100),
)
def test_scale_and_identity(ints, shifts, c):
    recon = LineSpectrum.from_arrays(np.add(SEVEN_FREQS, shifts), ints)
    m = evaluate_lines(recon, TRUTH, 0.025)
    assert m.zeta_rel == pytest.approx(math.hypot(m.eps_rel, m.xi_rel), rel=1e-12)
    assert min(m.eps, m.xi, m.eps_rel, m.xi_rel, m.zeta_rel) >= 0
    scaled = evaluate_lines(
        LineSpectrum.from_arrays(recon.frequencies, c * recon.intensities),
        LineSpectrum.from_arrays(SEVEN_FREQS, c * np.array(SEVEN_INTENSITIES)),
        0.025,
    )
    assert scaled.eps_rel == pytest.approx(m.eps_rel, rel=1e-9, abs=1e-15)
    assert scaled.eps == pytest.approx(c * m.eps, rel=1e-9, abs=1e-15)


def test_reordering_invariant():
    matching = match_lines(REFERENCE_RECON, TRUTH, 0.025)
    a = compute_metrics(matching, REFERENCE_RECON, TRUTH)
    b = compute_metrics(list(reversed(matching)), REFERENCE_RECON, TRUTH)
    assert a.eps_rel == pytest.approx(b.eps_rel, rel=1e-14)
    assert a.xi == pytest.approx(b.xi, rel=1e-14)
