//! Parsing and normalization of daily weather records, county yield tables,
//! and price/FX/deflator series.
//!
//! Input formats (all CSV with a mandatory header row):
//!
//! * weather: `date,element,value` — ISO-8601 date, element in
//!   `{TMAX, TMIN, PRCP}`, value in integer tenths (tenths of °C for
//!   temperatures, tenths of mm for precipitation);
//! * yields: `year_index,yield_bu_ac`;
//! * market: `date,corn_usd,usdcad,deflator_pct`.
//!
//! Units are normalized at this boundary: all downstream computation is in
//! °C, mm, and metric tonnes per hectare.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::DAYS_PER_YEAR;

/// Tonnes per hectare corresponding to one bushel per acre of grain corn
/// (56 lb/bu standard). The single place this constant is defined.
pub const BU_PER_ACRE_TO_T_PER_HA: f64 = 0.0628;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty input")]
    Empty,
    #[error("line 1: expected header `{expected}`, found `{found}`")]
    BadHeader {
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate {element} entry for {date}")]
    Duplicate {
        line: usize,
        date: NaiveDate,
        element: String,
    },
    #[error("{date}: tmax {tmax} °C is below tmin {tmin} °C")]
    TemperatureOrder {
        date: NaiveDate,
        tmax: f64,
        tmin: f64,
    },
    #[error("{date}: negative rainfall {value} mm")]
    NegativeRain { date: NaiveDate, value: f64 },
    #[error("first day {date} is missing {variable}; no prior value to carry")]
    MissingFirstDay {
        date: NaiveDate,
        variable: &'static str,
    },
    #[error("year {year} is not completely covered by the series")]
    IncompleteYear { year: i32 },
    #[error("line {line}: nonpositive yield {value} bu/ac")]
    NonPositiveYield { line: usize, value: f64 },
    #[error("line {line}: year index {found} breaks contiguity (expected {expected})")]
    YearIndexGap {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {field} must be positive, found {value}")]
    NonPositiveField {
        line: usize,
        field: &'static str,
        value: f64,
    },
    #[error("line {line}: dates must be strictly increasing")]
    OutOfOrderDate { line: usize },
    #[error("year block must have {expected} days, found {found}")]
    BadBlockLength { expected: usize, found: usize },
}

/// One calendar day of (possibly partial) weather observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub tmax: Option<f64>,
    pub tmin: Option<f64>,
    pub rain: Option<f64>,
}

/// Per-station daily weather series with strictly increasing dates.
///
/// A freshly parsed series may have gaps (whole days absent, or individual
/// variables absent on a day); [`fill_gaps`] carries the last valid entry
/// forward so that every day in the span holds all three variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyWeatherSeries {
    pub station_id: String,
    records: Vec<DayRecord>,
}

impl DailyWeatherSeries {
    pub fn records(&self) -> &[DayRecord] {
        &self.records
    }

    pub fn first_date(&self) -> NaiveDate {
        self.records[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.records[self.records.len() - 1].date
    }

    /// True when every day from first to last is present with all variables.
    pub fn is_complete(&self) -> bool {
        let span_days = (self.last_date() - self.first_date()).num_days() + 1;
        self.records.len() as i64 == span_days
            && self
                .records
                .iter()
                .all(|r| r.tmax.is_some() && r.tmin.is_some() && r.rain.is_some())
    }

    fn record_for(&self, date: NaiveDate) -> Option<&DayRecord> {
        self.records
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Serializes back to the `date,element,value` format with integer tenths.
    /// Round-trips exactly on normalized (tenths-derived) values.
    pub fn to_ghcnd_csv(&self) -> String {
        let mut out = String::from("date,element,value\n");
        for r in &self.records {
            let mut push = |element: &str, v: f64| {
                out.push_str(&format!(
                    "{},{},{}\n",
                    r.date,
                    element,
                    (v * 10.0).round() as i64
                ));
            };
            if let Some(v) = r.tmax {
                push("TMAX", v);
            }
            if let Some(v) = r.tmin {
                push("TMIN", v);
            }
            if let Some(v) = r.rain {
                push("PRCP", v);
            }
        }
        out
    }
}

/// One calendar year of complete daily weather, exactly 365 days
/// (February 29 dropped), stored as parallel per-variable vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct YearBlock {
    pub year_label: i32,
    tmax: Vec<f64>,
    tmin: Vec<f64>,
    rain: Vec<f64>,
}

impl YearBlock {
    pub fn new(
        year_label: i32,
        tmax: Vec<f64>,
        tmin: Vec<f64>,
        rain: Vec<f64>,
    ) -> Result<Self, IngestError> {
        for v in [&tmax, &tmin, &rain] {
            if v.len() != DAYS_PER_YEAR {
                return Err(IngestError::BadBlockLength {
                    expected: DAYS_PER_YEAR,
                    found: v.len(),
                });
            }
        }
        if let Some(&bad) = rain.iter().find(|&&r| r < 0.0) {
            return Err(IngestError::NegativeRain {
                date: NaiveDate::from_ymd_opt(year_label, 1, 1).unwrap(),
                value: bad,
            });
        }
        Ok(Self {
            year_label,
            tmax,
            tmin,
            rain,
        })
    }

    pub fn from_days(
        year_label: i32,
        days: impl IntoIterator<Item = (f64, f64, f64)>,
    ) -> Result<Self, IngestError> {
        let mut tmax = Vec::with_capacity(DAYS_PER_YEAR);
        let mut tmin = Vec::with_capacity(DAYS_PER_YEAR);
        let mut rain = Vec::with_capacity(DAYS_PER_YEAR);
        for (tx, tn, r) in days {
            tmax.push(tx);
            tmin.push(tn);
            rain.push(r);
        }
        Self::new(year_label, tmax, tmin, rain)
    }

    pub fn tmax(&self) -> &[f64] {
        &self.tmax
    }

    pub fn tmin(&self) -> &[f64] {
        &self.tmin
    }

    pub fn rain(&self) -> &[f64] {
        &self.rain
    }
}

/// County corn yields in tonnes per hectare, indexed by historical year.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldSeries {
    pub city_index: usize,
    pub entries: Vec<YieldEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldEntry {
    pub year_index: usize,
    pub t_per_ha: f64,
}

/// Daily market quotes: corn futures in USD/tonne, USD→CAD rate, and the
/// annual GDP-deflator percentage applicable to the quote's calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    pub entries: Vec<MarketRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketRecord {
    pub date: NaiveDate,
    pub corn_usd: f64,
    pub usdcad: f64,
    pub deflator_pct: f64,
}

fn split_csv_line(line: &str, n_fields: usize, line_no: usize) -> Result<Vec<&str>, IngestError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != n_fields {
        return Err(IngestError::Malformed {
            line: line_no,
            msg: format!("expected {} fields, found {}", n_fields, fields.len()),
        });
    }
    Ok(fields)
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| IngestError::Malformed {
        line,
        msg: format!("invalid date `{s}`"),
    })
}

fn parse_f64(s: &str, field: &str, line: usize) -> Result<f64, IngestError> {
    s.parse::<f64>().map_err(|_| IngestError::Malformed {
        line,
        msg: format!("invalid {field} `{s}`"),
    })
}

/// Lines with their 1-based numbers, header checked and skipped.
fn body_lines<'a>(
    text: &'a str,
    header: &'static str,
) -> Result<impl Iterator<Item = (usize, &'a str)>, IngestError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => Err(IngestError::Empty),
        Some((_, first)) if first.trim() != header => Err(IngestError::BadHeader {
            expected: header,
            found: first.trim().to_string(),
        }),
        Some(_) => Ok(lines
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty())),
    }
}

/// Parses a `date,element,value` weather CSV into a (possibly gappy) series.
///
/// TMAX/TMIN values are converted from tenths of °C to °C, PRCP from tenths
/// of mm to mm. Rows with other elements are ignored. Errors carry the line
/// number of the offending row.
pub fn parse_ghcnd_daily(
    csv_text: &str,
    station_id: &str,
) -> Result<DailyWeatherSeries, IngestError> {
    let mut by_date: BTreeMap<NaiveDate, DayRecord> = BTreeMap::new();
    let mut any_row = false;

    for (line_no, line) in body_lines(csv_text, "date,element,value")? {
        let fields = split_csv_line(line, 3, line_no)?;
        let date = parse_date(fields[0], line_no)?;
        let element = fields[1];
        let tenths: i64 = fields[2].parse().map_err(|_| IngestError::Malformed {
            line: line_no,
            msg: format!("value `{}` is not an integer (tenths)", fields[2]),
        })?;
        let value = tenths as f64 / 10.0;

        let slot = match element {
            "TMAX" => Some(Tenths::Tmax),
            "TMIN" => Some(Tenths::Tmin),
            "PRCP" => Some(Tenths::Rain),
            _ => None, // other GHCND elements (SNOW, TAVG, ...) are ignored
        };
        let Some(slot) = slot else { continue };
        any_row = true;

        let rec = by_date.entry(date).or_insert(DayRecord {
            date,
            tmax: None,
            tmin: None,
            rain: None,
        });
        let field = match slot {
            Tenths::Tmax => &mut rec.tmax,
            Tenths::Tmin => &mut rec.tmin,
            Tenths::Rain => &mut rec.rain,
        };
        if field.is_some() {
            return Err(IngestError::Duplicate {
                line: line_no,
                date,
                element: element.to_string(),
            });
        }
        *field = Some(value);
    }

    if !any_row {
        return Err(IngestError::Empty);
    }

    let records: Vec<DayRecord> = by_date.into_values().collect();
    for r in &records {
        validate_day(r)?;
    }
    Ok(DailyWeatherSeries {
        station_id: station_id.to_string(),
        records,
    })
}

enum Tenths {
    Tmax,
    Tmin,
    Rain,
}

fn validate_day(r: &DayRecord) -> Result<(), IngestError> {
    if let (Some(tmax), Some(tmin)) = (r.tmax, r.tmin) {
        if tmax < tmin {
            return Err(IngestError::TemperatureOrder {
                date: r.date,
                tmax,
                tmin,
            });
        }
    }
    if let Some(rain) = r.rain {
        if rain < 0.0 {
            return Err(IngestError::NegativeRain {
                date: r.date,
                value: rain,
            });
        }
    }
    Ok(())
}

/// Fills gaps by carrying the last previous valid entry of each variable
/// forward, inserting wholly missing calendar days inside the span.
///
/// The first day must hold all three variables (there is nothing earlier to
/// carry). Idempotent: filling a complete series returns it unchanged.
pub fn fill_gaps(series: &DailyWeatherSeries) -> Result<DailyWeatherSeries, IngestError> {
    let first = &series.records()[0];
    for (value, variable) in [
        (first.tmax, "tmax"),
        (first.tmin, "tmin"),
        (first.rain, "rain"),
    ] {
        if value.is_none() {
            return Err(IngestError::MissingFirstDay {
                date: first.date,
                variable,
            });
        }
    }

    let mut out = Vec::with_capacity(series.records.len());
    let (mut tmax, mut tmin, mut rain) = (0.0, 0.0, 0.0);
    let mut date = series.first_date();
    let last = series.last_date();
    while date <= last {
        let observed = series.record_for(date);
        tmax = observed.and_then(|r| r.tmax).unwrap_or(tmax);
        tmin = observed.and_then(|r| r.tmin).unwrap_or(tmin);
        rain = observed.and_then(|r| r.rain).unwrap_or(rain);
        let rec = DayRecord {
            date,
            tmax: Some(tmax),
            tmin: Some(tmin),
            rain: Some(rain),
        };
        // Carry-forward can pair values observed on different days; the
        // series invariant still has to hold.
        validate_day(&rec)?;
        out.push(rec);
        date = date.succ_opt().expect("date overflow");
    }

    Ok(DailyWeatherSeries {
        station_id: series.station_id.clone(),
        records: out,
    })
}

/// Slices a complete series into `n_years` blocks of exactly 365 days,
/// January 1 to December 31, dropping February 29 in leap years.
pub fn slice_year_blocks(
    series: &DailyWeatherSeries,
    start_year: i32,
    n_years: usize,
) -> Result<Vec<YearBlock>, IngestError> {
    let mut blocks = Vec::with_capacity(n_years);
    for year in start_year..start_year + n_years as i32 {
        let mut tmax = Vec::with_capacity(DAYS_PER_YEAR);
        let mut tmin = Vec::with_capacity(DAYS_PER_YEAR);
        let mut rain = Vec::with_capacity(DAYS_PER_YEAR);
        let mut date = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
        while date <= end {
            if !(date.month() == 2 && date.day() == 29) {
                match series.record_for(date) {
                    Some(r) => match (r.tmax, r.tmin, r.rain) {
                        (Some(tx), Some(tn), Some(ra)) => {
                            tmax.push(tx);
                            tmin.push(tn);
                            rain.push(ra);
                        }
                        _ => return Err(IngestError::IncompleteYear { year }),
                    },
                    None => return Err(IngestError::IncompleteYear { year }),
                }
            }
            date = date.succ_opt().expect("date overflow");
        }
        blocks.push(YearBlock::new(year, tmax, tmin, rain)?);
    }
    Ok(blocks)
}

/// Parses a `year_index,yield_bu_ac` table and converts bushels per acre to
/// tonnes per hectare via [`BU_PER_ACRE_TO_T_PER_HA`].
///
/// Year indices must start at 1 and be contiguous; yields must be positive.
pub fn parse_yield_table(csv_text: &str, city_index: usize) -> Result<YieldSeries, IngestError> {
    let mut entries = Vec::new();
    for (line_no, line) in body_lines(csv_text, "year_index,yield_bu_ac")? {
        let fields = split_csv_line(line, 2, line_no)?;
        let year_index: usize = fields[0].parse().map_err(|_| IngestError::Malformed {
            line: line_no,
            msg: format!("invalid year_index `{}`", fields[0]),
        })?;
        let bu_ac = parse_f64(fields[1], "yield", line_no)?;
        if bu_ac <= 0.0 {
            return Err(IngestError::NonPositiveYield {
                line: line_no,
                value: bu_ac,
            });
        }
        let expected = entries.len() + 1;
        if year_index != expected {
            return Err(IngestError::YearIndexGap {
                line: line_no,
                expected,
                found: year_index,
            });
        }
        entries.push(YieldEntry {
            year_index,
            t_per_ha: bu_ac * BU_PER_ACRE_TO_T_PER_HA,
        });
    }
    if entries.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(YieldSeries {
        city_index,
        entries,
    })
}

/// Parses a `date,corn_usd,usdcad,deflator_pct` market series.
pub fn parse_market_csv(csv_text: &str) -> Result<MarketSeries, IngestError> {
    let mut entries: Vec<MarketRecord> = Vec::new();
    for (line_no, line) in body_lines(csv_text, "date,corn_usd,usdcad,deflator_pct")? {
        let fields = split_csv_line(line, 4, line_no)?;
        let date = parse_date(fields[0], line_no)?;
        let corn_usd = parse_f64(fields[1], "corn_usd", line_no)?;
        let usdcad = parse_f64(fields[2], "usdcad", line_no)?;
        let deflator_pct = parse_f64(fields[3], "deflator_pct", line_no)?;
        if corn_usd <= 0.0 {
            return Err(IngestError::NonPositiveField {
                line: line_no,
                field: "corn_usd",
                value: corn_usd,
            });
        }
        if usdcad <= 0.0 {
            return Err(IngestError::NonPositiveField {
                line: line_no,
                field: "usdcad",
                value: usdcad,
            });
        }
        if let Some(prev) = entries.last() {
            if date <= prev.date {
                return Err(IngestError::OutOfOrderDate { line: line_no });
            }
        }
        entries.push(MarketRecord {
            date,
            corn_usd,
            usdcad,
            deflator_pct,
        });
    }
    if entries.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(MarketSeries { entries })
}
