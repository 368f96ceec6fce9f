"""Remote chart download with a local daily cache.

Pulls raw difficulty and market-price chart series over HTTP and resamples
them to difficulty-change dates so the result feeds the normal parse path.
Strictly optional: the packaged reference dataset covers offline use and no
test depends on the network.

The endpoint layout is ``{base_url}/{chart_name}?format=csv`` with the chart
name one of :data:`CHART_KINDS`. Base URL and cache directory can be set per
call, via MINECOST_BASE_URL / MINECOST_CACHE_DIR, or left to defaults.
Payloads are cached under ``{kind}-{YYYYMMDD}.csv``; a same-day repeat is
served from the cache without a network call, and nothing is written unless
the download succeeded.
"""

from __future__ import annotations

import datetime as dt
import os
import tempfile
from pathlib import Path

import requests

from .dataset import ObservationRecord, _check_dates_sorted, _parse_date, _parse_float
from .errors import FetchError, ParseError

DEFAULT_BASE_URL = "https://api.blockchain.info/charts"
ENV_BASE_URL = "MINECOST_BASE_URL"
ENV_CACHE_DIR = "MINECOST_CACHE_DIR"

CHART_KINDS = ("difficulty", "market-price")


def default_cache_dir() -> Path:
    return Path(os.environ.get(ENV_CACHE_DIR, Path.home() / ".cache" / "minecost"))


def cache_file_for(kind: str, cache_dir=None, today: dt.date | None = None) -> Path:
    """Cache path for one chart kind on one calendar day."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    today = today or dt.date.today()
    return cache_dir / f"{kind}-{today:%Y%m%d}.csv"


def fetch_remote_series(
    kind: str,
    base_url: str | None = None,
    cache_dir=None,
    timeout: float = 30.0,
    session=None,
) -> str:
    """Download (or reuse today's cached copy of) one raw chart series.

    Args:
        kind: one of CHART_KINDS.
        base_url: endpoint root; falls back to MINECOST_BASE_URL, then the
            public default.
        cache_dir: cache directory; falls back to MINECOST_CACHE_DIR, then
            ``~/.cache/minecost``.
        timeout: per-request timeout in seconds.
        session: optional requests-compatible object with a ``get`` method;
            lets callers replay canned fixtures through this code path.

    Returns:
        The raw payload text.

    Raises:
        FetchError: transport failure, non-success status, or empty payload;
            the cache is left untouched.
    """
    if kind not in CHART_KINDS:
        raise FetchError(f"unknown chart kind {kind!r}; choose from {CHART_KINDS}")
    cache_path = cache_file_for(kind, cache_dir)
    if cache_path.exists():
        return cache_path.read_text()

    base = (base_url or os.environ.get(ENV_BASE_URL) or DEFAULT_BASE_URL).rstrip("/")
    url = f"{base}/{kind}"
    http = session or requests
    try:
        response = http.get(url, params={"format": "csv"}, timeout=timeout)
    except requests.RequestException as exc:
        raise FetchError(f"GET {url} failed: {exc}") from exc
    if response.status_code != 200:
        raise FetchError(f"GET {url} returned status {response.status_code}")
    payload = response.text
    if not payload.strip():
        raise FetchError(f"GET {url} returned an empty payload")

    cache_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=cache_path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as tmp:
            tmp.write(payload)
        os.replace(tmp_name, cache_path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return payload


def parse_chart_points(text: str) -> list[tuple[dt.date, float]]:
    """Parse a raw ``timestamp,value`` chart payload into dated points.

    The first field may be an ISO date or ``date time``; a leading header
    row is tolerated. Timestamps must be strictly increasing.
    """
    points = []
    lines = text.splitlines()
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 'timestamp,value', got {line!r}", line_no)
        stamp = parts[0].strip().split(" ")[0].split("T")[0]
        if line_no == 1:
            try:
                dt.date.fromisoformat(stamp)
            except ValueError:
                continue  # header row
        date = _parse_date(stamp, line_no)
        value = _parse_float(parts[1], "chart value", line_no)
        points.append((date, value))
    _check_dates_sorted([d for d, _ in points], "chart")
    return points


def resample_to_epochs(
    difficulty_points: list[tuple[dt.date, float]],
    price_points: list[tuple[dt.date, float]],
) -> list[ObservationRecord]:
    """Reduce raw daily series to one observation per difficulty change.

    Keeps the first difficulty point and every later point whose value
    differs from its predecessor, then attaches the last market price at or
    before each change date. Change dates preceding the first price point
    are dropped (no price to pair with).
    """
    records = []
    previous = None
    price_idx = 0
    last_price = None
    for date, difficulty in difficulty_points:
        changed = previous is None or difficulty != previous
        previous = difficulty
        if not changed:
            continue
        while price_idx < len(price_points) and price_points[price_idx][0] <= date:
            last_price = price_points[price_idx][1]
            price_idx += 1
        if last_price is None:
            continue
        records.append(
            ObservationRecord(date=date, difficulty=difficulty, market_price=last_price)
        )
    return records
