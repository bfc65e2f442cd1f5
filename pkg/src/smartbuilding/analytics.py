"""Error-rate analysis of observed sensor series against official records.

Compares what the building's own sensors measured with the official data for
the same days, per quantity: the error rate is the relative gap between the
two means, as a percentage of the official mean. Display output truncates
toward zero at two decimals; the raw values stay on the report object.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal
from importlib import resources
from statistics import fmean
from typing import Sequence

COLUMNS = (
    "date",
    "temp_observed", "temp_official",
    "hum_observed", "hum_official",
    "iaq_observed", "iaq_official",
)


@dataclass(frozen=True)
class ObservationRow:
    date: str
    temp_observed: float
    temp_official: float
    hum_observed: float
    hum_official: float
    iaq_observed: float
    iaq_official: float


@dataclass(frozen=True)
class ObservationTable:
    rows: tuple[ObservationRow, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("observation table needs at least one row")

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]


@dataclass(frozen=True)
class ErrorReport:
    mean_temp_observed: float
    mean_temp_official: float
    mean_hum_observed: float
    mean_hum_official: float
    mean_iaq_observed: float
    mean_iaq_official: float
    temp_rate_pct: float
    hum_rate_pct: float
    iaq_rate_pct: float


def mean_series(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("mean of an empty series is undefined")
    return fmean(values)


def error_rate(mean_observed: float, mean_official: float) -> float:
    """Relative gap of the means, in percent of the official mean."""
    if mean_official == 0:
        raise ZeroDivisionError("official mean is zero; error rate undefined")
    return (mean_official - mean_observed) / mean_official * 100.0


def build_report(table: ObservationTable) -> ErrorReport:
    mt_obs = mean_series(table.column("temp_observed"))
    mt_off = mean_series(table.column("temp_official"))
    mh_obs = mean_series(table.column("hum_observed"))
    mh_off = mean_series(table.column("hum_official"))
    mi_obs = mean_series(table.column("iaq_observed"))
    mi_off = mean_series(table.column("iaq_official"))
    return ErrorReport(
        mt_obs, mt_off, mh_obs, mh_off, mi_obs, mi_off,
        error_rate(mt_obs, mt_off),
        error_rate(mh_obs, mh_off),
        error_rate(mi_obs, mi_off),
    )


def format_rate(rate_pct: float) -> str:
    """Two decimals, truncated toward zero: 0.5665 -> '0.56'."""
    return str(Decimal(repr(rate_pct)).quantize(Decimal("0.01"), rounding=ROUND_DOWN))


def load_table(path: str) -> ObservationTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _parse(fh)


def bundled_table() -> ObservationTable:
    """The packaged 15-day observation fixture."""
    ref = resources.files("smartbuilding").joinpath("data/observed_vs_official.csv")
    with ref.open("r", encoding="utf-8") as fh:
        return _parse(fh)


def _parse(fh) -> ObservationTable:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        raise ValueError("observation table is empty")
    missing = set(COLUMNS) - set(reader.fieldnames)
    if missing:
        raise ValueError(f"observation table missing columns: {sorted(missing)}")
    rows = []
    for line_no, rec in enumerate(reader, start=2):
        try:
            rows.append(ObservationRow(
                rec["date"],
                float(rec["temp_observed"]), float(rec["temp_official"]),
                float(rec["hum_observed"]), float(rec["hum_official"]),
                float(rec["iaq_observed"]), float(rec["iaq_official"]),
            ))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {line_no}: bad observation row: {exc}") from None
    return ObservationTable(tuple(rows))


def report_lines(report: ErrorReport) -> list[str]:
    """Human-readable rendering used by the CLI."""
    return [
        f"temperature: observed mean {report.mean_temp_observed:.4g}, "
        f"official mean {report.mean_temp_official:.4g}, "
        f"error rate {format_rate(report.temp_rate_pct)}%",
        f"humidity: observed mean {report.mean_hum_observed:.4g}, "
        f"official mean {report.mean_hum_official:.4g}, "
        f"error rate {format_rate(report.hum_rate_pct)}%",
        f"air quality: observed mean {report.mean_iaq_observed:.4g}, "
        f"official mean {report.mean_iaq_official:.4g}, "
        f"error rate {format_rate(report.iaq_rate_pct)}%",
    ]
