"""Price-panel ingestion, returns, and the market-state calendar."""

import datetime as dt
import math

import numpy as np
import pytest

from risknet.errors import ConfigError, ParseError, ValidationError
from risknet.panel import (CsvSchema, MarketStateCalendar, PricePanel,
                           default_crisis_calendar, label_dates,
                           load_calendar_json, load_price_csv, to_log_returns)


def test_load_basic(tiny_price_csv):
    panel = load_price_csv(tiny_price_csv)
    assert panel.entities == ("AAA", "BBB", "CCC")
    assert panel.n_weeks == 6
    assert panel.n_entities == 3
    assert panel.prices[0, 0] == 100.0
    assert panel.dates[0] == dt.date(2006, 1, 6)


def test_returns_are_log_ratios(tiny_price_csv):
    panel = load_price_csv(tiny_price_csv)
    rp = to_log_returns(panel)
    assert rp.n_weeks == 5
    assert rp.returns[0, 0] == pytest.approx(math.log(101.0 / 100.0), rel=1e-15)
    # dated at the later observation
    assert rp.dates[0] == dt.date(2006, 1, 13)
    assert rp.dates[-1] == panel.dates[-1]


def test_missing_values_forward_filled(tmp_path):
    path = tmp_path / "p.csv"
    rows = ["date,X,Y"]
    base = dt.date(2006, 1, 6)
    for i in range(21):
        x = "" if i == 1 else f"{10 + i}.0"
        rows.append(f"{base + dt.timedelta(weeks=i)},{x},5.0")
    path.write_text("\n".join(rows) + "\n")
    panel = load_price_csv(str(path))
    assert panel.prices[1, 0] == 10.0  # carried forward from the first row


def test_too_many_missing_rejected(tmp_path):
    path = tmp_path / "p.csv"
    rows = ["date,X,Y"]
    base = dt.date(2006, 1, 6)
    for i in range(20):
        x = "" if i % 2 else f"{10 + i}.0"
        rows.append(f"{base + dt.timedelta(weeks=i)},{x},5.0")
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(ValidationError, match="X"):
        load_price_csv(str(path), max_missing_frac=0.05)


def test_missing_first_observation_rejected(tmp_path):
    path = tmp_path / "p.csv"
    rows = ["date,X,Y"]
    base = dt.date(2006, 1, 6)
    for i in range(21):
        x = "" if i == 0 else f"{10 + i}.0"
        rows.append(f"{base + dt.timedelta(weeks=i)},{x},5.0")
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(ValidationError, match="X"):
        load_price_csv(str(path))


def test_nonpositive_price_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X\n2006-01-06,10.0\n2006-01-13,-3.0\n")
    with pytest.raises((ParseError, ValidationError)):
        load_price_csv(str(path))


def test_unsorted_dates_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X\n2006-01-13,10.0\n2006-01-06,11.0\n")
    with pytest.raises((ParseError, ValidationError)):
        load_price_csv(str(path))


def test_bad_cell_reports_row_number(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X\n2006-01-06,10.0\n2006-01-13,oops\n")
    with pytest.raises(ParseError, match="row 3"):
        load_price_csv(str(path))


def test_weekly_resampling_takes_last_observation(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(
        "date,X,Y\n"
        "2006-01-02,10.0,1.0\n"   # Mon, ISO week 1
        "2006-01-04,11.0,1.1\n"   # Wed, week 1
        "2006-01-06,12.0,1.2\n"   # Fri, week 1 <- survives
        "2006-01-09,13.0,1.3\n"   # Mon, week 2
        "2006-01-13,14.0,1.4\n"   # Fri, week 2 <- survives
        "2006-01-16,15.0,1.5\n"   # week 3 <- survives
    )
    panel = load_price_csv(str(path), resample_weekly=True)
    assert panel.n_weeks == 3
    assert list(panel.prices[:, 0]) == [12.0, 14.0, 15.0]
    assert panel.dates[0] == dt.date(2006, 1, 6)


def test_custom_schema_delimiter_and_na(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("day;A;B\n2006-01-06;1.0;2.0\n2006-01-13;miss;2.2\n"
                    "2006-01-20;1.2;2.4\n")
    schema = CsvSchema(date_column="day", delimiter=";", na_tokens=("miss",))
    panel = load_price_csv(str(path), schema=schema, max_missing_frac=0.5)
    assert panel.prices[1, 0] == 1.0


def test_entity_subset_via_schema(tmp_path, tiny_price_csv):
    schema = CsvSchema(entity_columns=("CCC", "AAA"))
    panel = load_price_csv(tiny_price_csv, schema=schema)
    assert panel.entities == ("CCC", "AAA")
    assert panel.prices[0, 0] == 200.0


def test_price_panel_validation():
    dates = (dt.date(2006, 1, 6), dt.date(2006, 1, 13))
    with pytest.raises(ValidationError):
        PricePanel(entities=("A",), dates=dates, prices=np.array([[1.0], [0.0]]))
    with pytest.raises(ValidationError):
        PricePanel(entities=("A",), dates=(dates[1], dates[0]),
                   prices=np.array([[1.0], [2.0]]))


def test_calendar_labels():
    cal = default_crisis_calendar()
    assert cal.label(dt.date(2008, 1, 4)) == "SMC"
    assert cal.label(dt.date(2011, 6, 3)) == "PDC"
    assert cal.label(dt.date(2006, 1, 6)) == "N"
    assert cal.label(dt.date(2019, 1, 4)) == "N"
    # boundary dates are inclusive
    assert cal.label(dt.date(2007, 8, 17)) == "SMC"
    assert cal.label(dt.date(2013, 12, 31)) == "PDC"


def test_calendar_rejects_overlap():
    with pytest.raises(ConfigError):
        MarketStateCalendar(windows=(
            ("A", dt.date(2007, 1, 1), dt.date(2008, 1, 1)),
            ("B", dt.date(2007, 6, 1), dt.date(2009, 1, 1)),
        ))


def test_label_dates_vectorized():
    cal = default_crisis_calendar()
    dates = (dt.date(2006, 1, 6), dt.date(2008, 3, 7), dt.date(2012, 2, 3))
    assert tuple(label_dates(dates, cal)) == ("N", "SMC", "PDC")


def test_calendar_json_roundtrip(tmp_path):
    path = tmp_path / "cal.json"
    path.write_text(
        '[{"label": "CRIS", "start": "2010-01-01", "end": "2010-12-31"}]')
    cal = load_calendar_json(str(path))
    assert cal.label(dt.date(2010, 6, 1)) == "CRIS"
    assert cal.label(dt.date(2011, 1, 1)) == "N"
