"""Bundled yearly global-pandemic indicator series, 1800-2020.

The indicator is 1 for every year inside one of eight major pandemic
episodes (worldwide spread, high death toll, short activity period):
the third plague pandemic, the 1889-90 flu, encephalitis lethargica, the
Spanish flu, the Asian flu, the Hong Kong flu, the 2009 swine flu and
COVID-19.  The year-by-year coding is reconstructed from the episode
ranges with inclusive endpoints; overlapping episodes are deduplicated.
"""

from __future__ import annotations

import numpy as np

from .model import TimeSeriesData

FIRST_YEAR = 1800
LAST_YEAR = 2020

EPISODES = (
    ("third plague pandemic", 1855, 1860),
    ("1889-90 flu pandemic", 1889, 1890),
    ("encephalitis lethargica", 1915, 1926),
    ("Spanish flu", 1918, 1920),
    ("Asian flu", 1957, 1958),
    ("Hong Kong flu", 1968, 1969),
    ("swine flu", 2009, 2010),
    ("COVID-19", 2019, 2020),
)


def pandemic_years() -> np.ndarray:
    return np.arange(FIRST_YEAR, LAST_YEAR + 1)


def pandemic_series() -> TimeSeriesData:
    """Local-level design (intercept only) with the pandemic indicator."""
    years = pandemic_years()
    y = np.zeros(years.size, dtype=np.int64)
    for _, start, end in EPISODES:
        y[(years >= start) & (years <= end)] = 1
    return TimeSeriesData(x=np.ones((years.size, 1)), y=y)
