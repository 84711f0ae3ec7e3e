import io

import numpy as np
import pytest

from treatdur import TreatmentModel, constant, piecewise
from treatdur.hazards import DomainError
from treatdur.sampling import (
    CHUNK,
    DurationBatch,
    Mode,
    coupled_sample,
    exponential_draws,
    read_csv,
    reconstruct,
    sample_batch,
    sample_pair,
)


def test_forced_draw_examples(base_model):
    p = sample_pair(base_model, mode="correct", draws=(1.0, 0.25))
    assert (p.w, p.y, p.absurd) == (1.0, 0.5, False)
    # flawed: 2 y - 1.5 = 0.25
    p = sample_pair(base_model, mode="flawed", draws=(1.0, 0.25))
    assert (p.w, p.y, p.absurd) == (1.0, 0.875, False)
    assert p.exp_draws == (1.0, 0.25)


def test_generator_draws():
    rng = np.random.Generator(np.random.Philox(3))
    m = TreatmentModel(constant(1.0), constant(0.5), constant(2.0))
    p = sample_pair(m, rng)
    assert p.w >= 0 and p.y >= 0 and not p.absurd
    assert reconstruct(m, p) == p


def test_no_effect_modes_coincide():
    h = piecewise([1.0], [0.5, 1.5])
    m = TreatmentModel(constant(1.0), h, h)
    for draws in [(0.3, 0.1), (1.0, 2.0), (2.5, 0.4)]:
        a = sample_pair(m, mode="correct", draws=draws)
        b = sample_pair(m, mode="flawed", draws=draws)
        assert a == b


def test_batch_is_deterministic(base_model):
    a = sample_batch(base_model, 4, 42)
    b = sample_batch(base_model, 4, 42)
    assert list(a) == list(b)
    assert not sample_batch(base_model, 4, 43).equals(a)


def test_worker_count_does_not_change_batch(piecewise_model):
    n = 3 * CHUNK + 17
    for mode in Mode:
        a = sample_batch(piecewise_model, n, 5, mode, workers=1)
        b = sample_batch(piecewise_model, n, 5, mode, workers=8)
        assert a.equals(b)


def test_draws_depend_only_on_index():
    e_w, e_y = exponential_draws(9, 0, 1001)
    for start in (1, 2, 333, 998):
        sw, sy = exponential_draws(9, start, 1001 - start)
        np.testing.assert_array_equal(sw, e_w[start:])
        np.testing.assert_array_equal(sy, e_y[start:])
    other_stream = exponential_draws(9, 0, 1001, stream=1)[0]
    assert not np.array_equal(other_stream, e_w)


def test_draws_are_standard_exponential():
    e_w, e_y = exponential_draws(1, 0, 200_000)
    for e in (e_w, e_y):
        assert np.all(e > 0) and np.all(np.isfinite(e))
        assert e.mean() == pytest.approx(1.0, abs=0.01)
        assert e.var() == pytest.approx(1.0, abs=0.02)
    assert abs(np.corrcoef(e_w, e_y)[0, 1]) < 0.01


def test_zero_n_rejected(base_model):
    with pytest.raises(DomainError):
        sample_batch(base_model, 0, 1)
    with pytest.raises(DomainError):
        coupled_sample(base_model, base_model, 0, 1)


def test_share_of_y_first(base_model):
    b = sample_batch(base_model, 10**6, 7)
    # integral of the Y-first sub-density: l0 / (l0 + lW)
    assert np.mean(b.y < b.w) == pytest.approx(1 / 3, abs=0.002)


def test_flawed_mode_produces_absurd_draws(reversed_model):
    b = sample_batch(reversed_model, 10**6, 7, "flawed")
    assert b.absurd_rate > 0
    assert np.all(b.y[b.absurd] < 0)
    assert np.all(b.y[~b.absurd] >= 0)


@pytest.mark.parametrize("mode", list(Mode))
def test_reconstruction(piecewise_model, mode):
    b = sample_batch(piecewise_model, 2000, 11, mode)
    for p in b[:500]:
        r = reconstruct(piecewise_model, p, mode)
        assert abs(r.w - p.w) <= 1e-12 and abs(r.y - p.y) <= 1e-12


def test_regime_classification(piecewise_model):
    b = sample_batch(piecewise_model, 200_000, 3)
    lam0_w = piecewise_model.h0.cumulative(b.w)
    np.testing.assert_array_equal(b.y < b.w, b.e_y < lam0_w)
    assert not b.absurd.any()


def test_correct_mode_never_absurd(reversed_model):
    assert not sample_batch(reversed_model, 100_000, 1, "correct").absurd.any()


def test_mode_collapse_batches():
    h = piecewise([0.5], [0.7, 1.1])
    m = TreatmentModel(constant(1.3), h, h)
    a, b = coupled_sample(m, m, 50_000, 4, "correct", "flawed")
    assert a.equals(b)
    assert sample_batch(m, 50_000, 4, "correct").equals(sample_batch(m, 50_000, 4, "flawed"))


class TestCoupled:
    def test_same_model_identical(self, base_model):
        a, b = coupled_sample(base_model, base_model, 1000, 2)
        assert a.equals(b)

    def test_differ_only_in_h1(self, base_model):
        a, b = coupled_sample(base_model, base_model.with_h1(constant(5.0)), 100_000, 2)
        np.testing.assert_array_equal(a.w, b.w)
        np.testing.assert_array_equal(a.e_y, b.e_y)
        pre = a.y < a.w
        np.testing.assert_array_equal(pre, b.y < b.w)
        np.testing.assert_array_equal(a.y[pre], b.y[pre])
        post = a.y > a.w
        assert np.all(a.y[post] != b.y[post])


def test_csv_layout_and_round_trip(reversed_model):
    b = sample_batch(reversed_model, 500, 8, "flawed")
    text = b.to_csv()
    lines = text.splitlines()
    assert lines[0] == "w,y,cause,absurd,e_w,e_y"
    assert len(lines) == 501
    first = lines[1].split(",")
    assert first[2] in {"Y_FIRST", "W_FIRST", "TIE"}
    assert first[3] in {"0", "1"}
    back = read_csv(io.StringIO(text), mode="flawed")
    assert back.equals(b)
    assert len(b.to_csv(limit=10).splitlines()) == 11


def test_batch_is_read_only(base_model):
    b = sample_batch(base_model, 10, 1)
    with pytest.raises(ValueError):
        b.w[0] = 1.0
    assert isinstance(b[:3], DurationBatch) and len(b[:3]) == 3
