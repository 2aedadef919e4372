"""Price-panel ingestion, weekly log-returns and market-state labeling."""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParseError, ValidationError

NORMAL_STATE = "N"

# Crisis windows shipped as overridable configuration, not constants baked
# into the computation: the subprime window ends mid-2009 and the sovereign
# debt window spans 2010-2013.  Callers supply their own calendar to change
# them.
DEFAULT_CRISIS_WINDOWS = (
    ("SMC", "2007-08-17", "2009-06-30"),
    ("PDC", "2010-04-01", "2013-12-31"),
)


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for price CSV ingestion."""

    date_column: str = "date"
    delimiter: str = ","
    entity_columns: tuple[str, ...] | None = None  # None = every non-date column
    na_tokens: tuple[str, ...] = ("", "NA", "NaN", "nan", "null")


@dataclass(frozen=True)
class PricePanel:
    """Aligned positive price levels for k entities over T dates."""

    entities: tuple[str, ...]
    dates: tuple[dt.date, ...]
    prices: np.ndarray  # (T, k)

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        T, k = prices.shape
        if len(self.entities) != k:
            raise ValidationError("entity count does not match price columns")
        if len(self.dates) != T:
            raise ValidationError("date count does not match price rows")
        if len(set(self.entities)) != k:
            raise ValidationError("duplicate entity identifiers")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            t, i = map(int, np.argwhere(~(np.isfinite(prices) & (prices > 0.0)))[0])
            raise ValidationError(
                f"non-positive or non-finite price for {self.entities[i]} on {self.dates[t]}"
            )
        for a, b in zip(self.dates[:-1], self.dates[1:]):
            if not a < b:
                raise ValidationError(f"dates not strictly increasing at {b}")

    @property
    def n_weeks(self) -> int:
        return self.prices.shape[0]

    @property
    def n_entities(self) -> int:
        return self.prices.shape[1]


@dataclass(frozen=True)
class ReturnPanel:
    """Weekly log-returns; dates refer to the later observation of each pair."""

    entities: tuple[str, ...]
    dates: tuple[dt.date, ...]
    returns: np.ndarray  # (T-1, k)

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        if returns.ndim != 2:
            raise ValidationError("returns must be 2-dimensional")
        if len(self.dates) != returns.shape[0]:
            raise ValidationError("date count does not match return rows")
        if len(self.entities) != returns.shape[1]:
            raise ValidationError("entity count does not match return columns")
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns contain non-finite values")

    @property
    def n_weeks(self) -> int:
        return self.returns.shape[0]

    @property
    def n_entities(self) -> int:
        return self.returns.shape[1]

    def column(self, entity: str) -> np.ndarray:
        try:
            idx = self.entities.index(entity)
        except ValueError:
            raise ValidationError(f"unknown entity {entity!r}") from None
        return self.returns[:, idx]


@dataclass(frozen=True)
class MarketStateCalendar:
    """Ordered, non-overlapping labeled date windows; gaps default to N."""

    windows: tuple[tuple[str, dt.date, dt.date], ...] = ()

    def __post_init__(self):
        for label, start, end in self.windows:
            if start > end:
                raise ConfigError(f"window {label}: start {start} after end {end}")
        ordered = sorted(self.windows, key=lambda w: w[1])
        for (la, sa, ea), (lb, sb, eb) in zip(ordered[:-1], ordered[1:]):
            if sb <= ea:
                raise ConfigError(f"windows {la} and {lb} overlap")
        object.__setattr__(self, "windows", tuple(ordered))

    def label(self, date: dt.date) -> str:
        for name, start, end in self.windows:
            if start <= date <= end:
                return name
        return NORMAL_STATE


def default_crisis_calendar() -> MarketStateCalendar:
    windows = tuple(
        (label, dt.date.fromisoformat(s), dt.date.fromisoformat(e))
        for label, s, e in DEFAULT_CRISIS_WINDOWS
    )
    return MarketStateCalendar(windows)


def load_calendar_json(path) -> MarketStateCalendar:
    """Read a calendar from a JSON array of {label, start, end} objects."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ConfigError("calendar JSON must be an array of windows")
    windows = []
    for item in raw:
        try:
            windows.append((
                str(item["label"]),
                dt.date.fromisoformat(item["start"]),
                dt.date.fromisoformat(item["end"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad calendar window {item!r}: {exc}") from exc
    return MarketStateCalendar(tuple(windows))


def _parse_date(token: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(token.strip())
    except ValueError:
        raise ParseError(f"unparseable date {token!r}", row=row) from None


def load_price_csv(
    path,
    schema: CsvSchema = CsvSchema(),
    max_missing_frac: float = 0.05,
    resample_weekly: bool = False,
) -> PricePanel:
    """Load a price panel from CSV.

    Missing cells are forward-filled from the last observation; an entity
    missing more than ``max_missing_frac`` of rows (or missing its first
    observation) is rejected.  ``resample_weekly`` keeps the last observation
    of each ISO week, for callers starting from daily data.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        header = [h.strip() for h in header]
        if schema.date_column not in header:
            raise ParseError(f"missing date column {schema.date_column!r}", row=1)
        date_idx = header.index(schema.date_column)
        if schema.entity_columns is None:
            entities = tuple(h for i, h in enumerate(header) if i != date_idx)
        else:
            for col in schema.entity_columns:
                if col not in header:
                    raise ParseError(f"missing entity column {col!r}", row=1)
            entities = tuple(schema.entity_columns)
        col_idx = [header.index(e) for e in entities]

        dates: list[dt.date] = []
        rows: list[list[float]] = []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", row=row_num
                )
            dates.append(_parse_date(row[date_idx], row_num))
            values = []
            for i, ci in enumerate(col_idx):
                token = row[ci].strip()
                if token in schema.na_tokens:
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(token))
                except ValueError:
                    raise ParseError(
                        f"unparseable price {token!r} for {entities[i]}", row=row_num
                    ) from None
            rows.append(values)

    if len(rows) < 2:
        raise ValidationError(f"need at least 2 data rows, got {len(rows)}")
    if len(entities) < 2:
        raise ValidationError(f"need at least 2 entities, got {len(entities)}")

    prices = np.array(rows, dtype=float)
    order = np.argsort([d.toordinal() for d in dates], kind="stable")
    prices = prices[order]
    dates = [dates[i] for i in order]

    if resample_weekly:
        keep = []
        for i, d in enumerate(dates):
            if i + 1 == len(dates) or dates[i + 1].isocalendar()[:2] != d.isocalendar()[:2]:
                keep.append(i)
        prices = prices[keep]
        dates = [dates[i] for i in keep]

    T = prices.shape[0]
    for i, entity in enumerate(entities):
        col = prices[:, i]
        n_missing = int(np.isnan(col).sum())
        if n_missing > max_missing_frac * T:
            raise ValidationError(
                f"entity {entity} missing {n_missing}/{T} rows, above the "
                f"{max_missing_frac:.0%} limit"
            )
        if n_missing and math.isnan(col[0]):
            raise ValidationError(f"entity {entity} has no first observation to fill from")
        for t in range(1, T):
            if math.isnan(col[t]):
                col[t] = col[t - 1]

    bad = np.argwhere(prices <= 0.0)
    if bad.size:
        t, i = map(int, bad[0])
        raise ValidationError(f"non-positive price for {entities[i]} on {dates[t]}")

    return PricePanel(entities=entities, dates=tuple(dates), prices=prices)


def to_log_returns(panel: PricePanel) -> ReturnPanel:
    """Log of consecutive price ratios, dated at the later observation."""
    returns = np.log(panel.prices[1:] / panel.prices[:-1])
    return ReturnPanel(
        entities=panel.entities, dates=panel.dates[1:], returns=returns
    )


def label_dates(dates, calendar: MarketStateCalendar) -> list[str]:
    """One market-state label per date; dates outside all windows get N."""
    return [calendar.label(d) for d in dates]
