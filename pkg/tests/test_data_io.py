import locale

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from gaussgamma.data_io import (
    MAX_AUTO_BINS,
    HistogramSpec,
    ReturnSeries,
    bundled_prices_path,
    density_curve,
    freedman_diaconis_bins,
    histogram,
    load_series,
    parse_number,
    prices_to_returns,
    write_columns,
)
from gaussgamma.errors import MissingColumn, ParseError, TooShort
from gaussgamma.mixture import Component, MixtureModel, paper_ground_truth


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadSeries:
    def test_by_name(self, tmp_path):
        p = write(tmp_path, "day,price\n1,100\n2,101\n3,100.5\n")
        np.testing.assert_array_equal(load_series(p, "price", has_header=True), [100, 101, 100.5])

    def test_by_index_without_header(self, tmp_path):
        p = write(tmp_path, "1,100\n2,101\n\n3,100.5\n")
        np.testing.assert_array_equal(load_series(p, 1), [100, 101, 100.5])

    def test_tab_delimited(self, tmp_path):
        p = write(tmp_path, "day\tprice\n1\t1e2\n2\t-3.5E-1\n")
        np.testing.assert_array_equal(load_series(p, "price", has_header=True), [100.0, -0.35])

    def test_parse_error_line(self, tmp_path):
        rows = ["price"] + ["100"] * 5 + ["abc", "101"]
        p = write(tmp_path, "\n".join(rows) + "\n")
        with pytest.raises(ParseError) as err:
            load_series(p, "price", has_header=True)
        assert err.value.line == 7
        assert "7" in str(err.value)

    def test_index_out_of_range(self, tmp_path):
        p = write(tmp_path, "1,2\n3,4\n")
        with pytest.raises(MissingColumn):
            load_series(p, 5)

    def test_unknown_name(self, tmp_path):
        p = write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(MissingColumn):
            load_series(p, "price", has_header=True)

    @pytest.mark.parametrize("cell", ["1,5", "1.000,5", "1_000", "nan", "inf", "", "1.2.3"])
    def test_rejects_non_plain_numbers(self, cell):
        with pytest.raises(ParseError):
            parse_number(cell, 3)

    def test_quoted_thousands_separator_rejected(self, tmp_path):
        p = write(tmp_path, 'price\n"1,000.5"\n')
        with pytest.raises(ParseError):
            load_series(p, "price", has_header=True)

    def test_locale_independent(self, tmp_path):
        p = write(tmp_path, "price\n100.25\n")
        saved = locale.setlocale(locale.LC_NUMERIC)
        for name in ("de_DE.UTF-8", "fr_FR.UTF-8"):
            try:
                locale.setlocale(locale.LC_NUMERIC, name)
            except locale.Error:
                continue
            try:
                assert load_series(p, "price", has_header=True)[0] == 100.25
            finally:
                locale.setlocale(locale.LC_NUMERIC, saved)
        assert load_series(p, "price", has_header=True)[0] == 100.25


class TestReturns:
    def test_example(self):
        np.testing.assert_array_equal(prices_to_returns([100, 101, 100.5]).values, [1.0, -0.5])

    def test_constant(self):
        assert np.all(prices_to_returns([7.0] * 10).values == 0.0)

    def test_too_short(self):
        with pytest.raises(TooShort):
            prices_to_returns([100.0])

    def test_log_returns(self):
        r = prices_to_returns([1.0, np.e], log_returns=True).values
        assert r[0] == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            prices_to_returns([1.0, 0.0], log_returns=True)

    def test_series_invariants(self):
        with pytest.raises(ValueError):
            ReturnSeries([])
        with pytest.raises(ValueError):
            ReturnSeries([1.0, np.inf])

    @given(st.lists(st.floats(1.0, 1e4, allow_nan=False), min_size=2, max_size=200))
    @settings(max_examples=100, deadline=None)
    def test_cumsum_round_trip(self, prices):
        r = prices_to_returns(prices)
        assert len(r) == len(prices) - 1
        rebuilt = prices[0] + np.concatenate([[0.0], np.cumsum(r.values)])
        np.testing.assert_allclose(rebuilt, prices, rtol=0, atol=1e-9 * max(prices) * len(prices))

    def test_bundled_file(self):
        prices = load_series(bundled_prices_path(), "price", has_header=True)
        assert prices.size == 1514
        assert len(prices_to_returns(prices)) == 1513


class TestHistogram:
    def test_single_value(self):
        centres, rel = histogram([2.5] * 40)
        assert np.count_nonzero(rel) == 1 and rel.sum() == 1.0

    def test_symmetric_two_bins(self):
        centres, rel = histogram([-1.0, 1.0] * 500, HistogramSpec(bin_count=2))
        np.testing.assert_array_equal(centres, [-0.5, 0.5])
        np.testing.assert_array_equal(rel, [0.5, 0.5])

    @given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300))
    @settings(max_examples=150, deadline=None)
    def test_sums_to_one(self, data):
        _, rel = histogram(data)
        assert abs(rel.sum() - 1.0) <= 1e-12

    def test_range_and_bins(self):
        centres, rel = histogram(np.linspace(0, 0.99, 100), HistogramSpec(bin_count=4, range=(0.0, 2.0)))
        np.testing.assert_allclose(centres, [0.25, 0.75, 1.25, 1.75])
        assert rel[2] == rel[3] == 0.0 and rel.sum() == pytest.approx(1.0, abs=1e-12)

    def test_range_without_data(self):
        with pytest.raises(ValueError):
            histogram([5.0, 6.0], HistogramSpec(bin_count=3, range=(0.0, 1.0)))

    def test_freedman_diaconis(self):
        x = np.arange(1000.0)
        width = 2 * (np.percentile(x, 75) - np.percentile(x, 25)) / 10.0
        assert freedman_diaconis_bins(x) == int(np.ceil(999.0 / width))

    def test_automatic_bins_are_capped(self):
        x = [0.0, 0.0, 0.0, 1.0, 1e-61]
        assert freedman_diaconis_bins(x) == MAX_AUTO_BINS
        _, rel = histogram(x)
        assert rel.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("kw", [{"bin_count": 0}, {"range": (1.0, 1.0)}])
    def test_spec_invariants(self, kw):
        with pytest.raises(ValueError):
            HistogramSpec(**kw)


class TestDensityCurve:
    def test_standard_normal(self):
        m = MixtureModel((1.0,), (Component.nearzero(1.0),))
        x, pdf = density_curve(m, -4.0, 4.0, 3)
        assert x[0] == -4.0 and x[-1] == 4.0
        assert pdf[1] == pytest.approx(0.3989422804014327, abs=1e-15)

    def test_paper_model_integrates_to_one(self):
        x, pdf = density_curve(paper_ground_truth(), -30.0, 30.0, 10_000)
        assert trapezoid(pdf, x) == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("lo,hi,n", [(1.0, 1.0, 5), (2.0, 1.0, 5), (0.0, 1.0, 1)])
    def test_invalid(self, lo, hi, n):
        m = MixtureModel((1.0,), (Component.nearzero(1.0),))
        with pytest.raises(ValueError):
            density_curve(m, lo, hi, n)


def test_write_columns_round_trip(tmp_path):
    xs = np.array([0.1, -1e-300, 1 / 3])
    p = tmp_path / "out.csv"
    write_columns(p, ("x", "value"), xs, xs * 2)
    lines = p.read_text().splitlines()
    assert lines[0] == "x,value"
    np.testing.assert_array_equal(load_series(p, "x", has_header=True), xs)
