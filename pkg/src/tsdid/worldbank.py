"""Client for the public World Bank v2 indicators API.

Fetches one indicator for several countries over a year range and shapes
the result as a panel file (first requested country = treated unit).
Pagination is handled; missing observations are reported, never imputed.
An offline mode replays recorded page responses through the same parsing
path, which is what the tests use.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataSourceError, ValidationError
from .io import PanelFile

BASE_URL = "https://api.worldbank.org/v2"
PER_PAGE = 1000


def _build_url(countries, indicator, start, end, page):
    joined = ";".join(countries)
    return (
        f"{BASE_URL}/country/{joined}/indicator/{indicator}"
        f"?format=json&per_page={PER_PAGE}&date={start}:{end}&page={page}"
    )


def _fetch_page(countries, indicator, start, end, page, timeout):
    import requests

    url = _build_url(countries, indicator, start, end, page)
    try:
        response = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise DataSourceError(f"World Bank request failed: {exc}") from exc
    if response.status_code != 200:
        raise DataSourceError(
            f"World Bank request returned HTTP {response.status_code}"
        )
    return response.json()


def _parse_pages(pages, countries, start, end):
    observations = {}
    seen_codes = set()
    for payload in pages:
        if not isinstance(payload, list) or not payload:
            raise DataSourceError("unexpected World Bank response shape")
        if len(payload) == 1 or payload[1] is None:
            message = "empty response"
            meta = payload[0]
            if isinstance(meta, dict) and "message" in meta:
                parts = meta["message"]
                if parts and isinstance(parts, list):
                    message = parts[0].get("value", message)
            raise DataSourceError(f"World Bank API error: {message}")
        for obs in payload[1]:
            code = obs.get("countryiso3code") or obs.get("country", {}).get("id", "")
            year = int(obs["date"])
            seen_codes.add(code)
            observations[(code, year)] = obs["value"]
    missing_codes = [c for c in countries if c not in seen_codes]
    if missing_codes:
        raise DataSourceError(
            f"no observations returned for country codes: {', '.join(missing_codes)}"
        )
    years = np.arange(start, end + 1)
    missing = [
        (code, int(year))
        for code in countries
        for year in years
        if observations.get((code, int(year))) is None
    ]
    if missing:
        head = ", ".join(f"{c}:{y}" for c, y in missing[:8])
        more = "" if len(missing) <= 8 else f" (+{len(missing) - 8} more)"
        raise DataSourceError(f"missing observations, not imputed: {head}{more}")
    values = np.array(
        [[float(observations[(code, int(year))]) for code in countries] for year in years]
    )
    return PanelFile(periods=years, unit_labels=tuple(countries), values=values)


def fetch_worldbank(
    countries,
    indicator: str,
    start: int,
    end: int,
    fixture=None,
    timeout: float = 30.0,
) -> PanelFile:
    """Fetch an indicator panel; the first country is the treated unit.

    Parameters
    ----------
    countries : sequence of str
        ISO3 codes, e.g. ``["BEN", "TGO"]``.
    indicator : str
        Indicator code, e.g. ``"NY.GDP.PCAP.KD"``.
    start, end : int
        Inclusive year range.
    fixture : path or file, optional
        Recorded page responses (a JSON list of page payloads) replayed
        instead of hitting the network.
    """
    countries = [c.strip().upper() for c in countries]
    if len(countries) < 2:
        raise ValidationError("need a treated country and at least one control")
    if any(len(c) != 3 or not c.isalpha() for c in countries):
        raise ValidationError(f"country codes must be ISO3 letters, got {countries}")
    if end < start:
        raise ValidationError(f"year range {start}:{end} is empty")

    if fixture is not None:
        if hasattr(fixture, "read"):
            pages = json.load(fixture)
        else:
            with open(fixture) as fh:
                pages = json.load(fh)
        return _parse_pages(pages, countries, start, end)

    pages = []
    page = 1
    while True:
        payload = _fetch_page(countries, indicator, start, end, page, timeout)
        pages.append(payload)
        meta = payload[0] if payload else {}
        total_pages = int(meta.get("pages", 1)) if isinstance(meta, dict) else 1
        if page >= total_pages:
            break
        page += 1
    return _parse_pages(pages, countries, start, end)
