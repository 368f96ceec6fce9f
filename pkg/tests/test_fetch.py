"""Tests for the chart download/cache path. Everything runs offline:
network behavior is replayed through a stub session object."""

import datetime as dt

import pytest
import requests

from minecost import (
    FetchError,
    ParseError,
    ValidationError,
    cache_file_for,
    fetch_remote_series,
    parse_chart_points,
    resample_to_epochs,
)

CHART_TEXT = "2017-01-01 00:00:00,317700000000\n2017-01-02 00:00:00,317700000000\n"


class _Response:
    def __init__(self, status_code=200, text=""):
        self.status_code = status_code
        self.text = text


class _Session:
    """Canned-response stand-in for requests; records every call."""

    def __init__(self, response=None, exc=None):
        self.response = response
        self.exc = exc
        self.calls = []

    def get(self, url, params=None, timeout=None):
        self.calls.append((url, dict(params or {})))
        if self.exc is not None:
            raise self.exc
        return self.response


class TestFetchRemoteSeries:
    def test_download_writes_cache_and_returns_payload(self, tmp_path):
        session = _Session(response=_Response(text=CHART_TEXT))
        payload = fetch_remote_series(
            "difficulty",
            base_url="http://charts.test/api",
            cache_dir=tmp_path,
            session=session,
        )
        assert payload == CHART_TEXT
        assert session.calls == [
            ("http://charts.test/api/difficulty", {"format": "csv"})
        ]
        cached = cache_file_for("difficulty", tmp_path)
        assert cached.read_text() == CHART_TEXT

    def test_same_day_repeat_is_served_from_cache(self, tmp_path):
        first = _Session(response=_Response(text=CHART_TEXT))
        fetch_remote_series(
            "difficulty", base_url="http://x", cache_dir=tmp_path, session=first
        )
        second = _Session(exc=AssertionError("network must not be touched"))
        payload = fetch_remote_series(
            "difficulty", base_url="http://x", cache_dir=tmp_path, session=second
        )
        assert payload == CHART_TEXT
        assert second.calls == []

    def test_transport_failure_maps_to_fetch_error(self, tmp_path):
        session = _Session(exc=requests.ConnectionError("refused"))
        with pytest.raises(FetchError, match="refused"):
            fetch_remote_series(
                "difficulty", base_url="http://x", cache_dir=tmp_path, session=session
            )
        assert not cache_file_for("difficulty", tmp_path).exists()

    def test_http_error_status_maps_to_fetch_error(self, tmp_path):
        session = _Session(response=_Response(status_code=503))
        with pytest.raises(FetchError, match="503"):
            fetch_remote_series(
                "difficulty", base_url="http://x", cache_dir=tmp_path, session=session
            )
        assert not cache_file_for("difficulty", tmp_path).exists()

    def test_empty_payload_rejected_and_not_cached(self, tmp_path):
        session = _Session(response=_Response(text="  \n"))
        with pytest.raises(FetchError, match="empty"):
            fetch_remote_series(
                "market-price", base_url="http://x", cache_dir=tmp_path, session=session
            )
        assert not cache_file_for("market-price", tmp_path).exists()

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(FetchError, match="hashrate"):
            fetch_remote_series("hashrate", cache_dir=tmp_path)

    def test_cache_dir_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MINECOST_CACHE_DIR", str(tmp_path / "cachehome"))
        session = _Session(response=_Response(text=CHART_TEXT))
        fetch_remote_series("difficulty", base_url="http://x", session=session)
        assert cache_file_for("difficulty", tmp_path / "cachehome").exists()

    def test_cache_file_name_carries_kind_and_day(self, tmp_path):
        path = cache_file_for("market-price", tmp_path, today=dt.date(2018, 4, 27))
        assert path.name == "market-price-20180427.csv"


class TestParseChartPoints:
    def test_parses_timestamped_rows(self):
        points = parse_chart_points(CHART_TEXT)
        assert points == [
            (dt.date(2017, 1, 1), 317700000000.0),
            (dt.date(2017, 1, 2), 317700000000.0),
        ]

    def test_header_row_is_tolerated(self):
        points = parse_chart_points("timestamp,value\n" + CHART_TEXT)
        assert len(points) == 2

    def test_iso_t_separator_accepted(self):
        points = parse_chart_points("2017-01-01T00:00:00,5.0\n")
        assert points == [(dt.date(2017, 1, 1), 5.0)]

    def test_malformed_row_reports_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_chart_points("2017-01-01,1.0\nnot-a-row\n")

    def test_out_of_order_timestamps_rejected(self):
        text = "2017-01-02,1.0\n2017-01-01,2.0\n"
        with pytest.raises(ValidationError, match="out of order"):
            parse_chart_points(text)

    def test_duplicate_timestamps_rejected(self):
        text = "2017-01-01,1.0\n2017-01-01,2.0\n"
        with pytest.raises(ValidationError, match="duplicate"):
            parse_chart_points(text)


class TestResampleToEpochs:
    DIFFICULTY = [
        (dt.date(2017, 1, 1), 1e11),
        (dt.date(2017, 1, 2), 1e11),
        (dt.date(2017, 1, 3), 2e11),
        (dt.date(2017, 1, 4), 2e11),
        (dt.date(2017, 1, 5), 3e11),
    ]
    PRICES = [
        (dt.date(2017, 1, 1), 1000.0),
        (dt.date(2017, 1, 2), 1010.0),
        (dt.date(2017, 1, 3), 1020.0),
        (dt.date(2017, 1, 4), 1030.0),
        (dt.date(2017, 1, 5), 1040.0),
    ]

    def test_keeps_only_difficulty_changes(self):
        records = resample_to_epochs(self.DIFFICULTY, self.PRICES)
        assert [r.date.day for r in records] == [1, 3, 5]
        assert [r.difficulty for r in records] == [1e11, 2e11, 3e11]

    def test_price_is_last_at_or_before_change(self):
        records = resample_to_epochs(self.DIFFICULTY, self.PRICES)
        assert [r.market_price for r in records] == [1000.0, 1020.0, 1040.0]

    def test_price_gap_carries_earlier_quote(self):
        sparse = [(dt.date(2017, 1, 1), 1000.0)]
        records = resample_to_epochs(self.DIFFICULTY, sparse)
        assert all(r.market_price == 1000.0 for r in records)

    def test_changes_before_first_price_are_dropped(self):
        late = [(dt.date(2017, 1, 4), 1030.0)]
        records = resample_to_epochs(self.DIFFICULTY, late)
        assert [r.date.day for r in records] == [5]

    def test_empty_difficulty_series_gives_no_records(self):
        assert resample_to_epochs([], self.PRICES) == []
