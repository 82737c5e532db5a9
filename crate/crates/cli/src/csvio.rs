//! Writers and readers for the emitted report CSVs.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! re-parsing a file reproduces the exact in-memory values and identical
//! runs produce byte-identical files.

use std::fmt::Write as _;

use cornsim::agronomy::GrowingSeason;
use cornsim::climate::ClimatePath;
use cornsim::econ::IncomeSeries;
use cornsim::stats::GevParams;
use cornsim::trends::CityClimateStats;

use crate::CliError;

pub fn city_stats_csv(rows: &[(String, CityClimateStats)]) -> String {
    let mut out =
        String::from("city,trend_tmax,trend_tmin,trend_rain,var_tmax,var_tmin,var_rain\n");
    for (slug, s) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            slug, s.trend_tmax, s.trend_tmin, s.trend_rain, s.var_tmax, s.var_tmin, s.var_rain
        )
        .unwrap();
    }
    out
}

pub fn seasons_csv(rows: &[(i32, GrowingSeason)]) -> String {
    let mut out = String::from("year,planting_day,harvest_day,length\n");
    for (year, s) in rows {
        writeln!(
            out,
            "{},{},{},{}",
            year,
            s.planting_day,
            s.harvest_day,
            s.length_days()
        )
        .unwrap();
    }
    out
}

pub fn chu_csv(series: &cornsim::agronomy::ChuSeries) -> String {
    let mut out = String::from("year,H\n");
    for (year, h) in &series.values {
        writeln!(out, "{year},{h}").unwrap();
    }
    out
}

/// One row per (simulated year, realization) fit.
pub fn gev_csv(rows: &[(usize, usize, GevParams)]) -> String {
    let mut out = String::from("year,realization,k,sigma,mu\n");
    for (year, realization, p) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            year, realization, p.shape, p.scale, p.location
        )
        .unwrap();
    }
    out
}

pub fn parse_gev_csv(text: &str, file: &str) -> Result<Vec<(usize, usize, GevParams)>, CliError> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some("year,realization,k,sigma,mu") => {}
        _ => return Err(CliError::Data(format!("{file}: bad or missing header"))),
    }
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Data(format!("{file}: malformed row {}", i + 2)));
        }
        let parse_err = |what: &str| CliError::Data(format!("{file}: bad {what} on row {}", i + 2));
        let year: usize = fields[0].parse().map_err(|_| parse_err("year"))?;
        let realization: usize = fields[1].parse().map_err(|_| parse_err("realization"))?;
        let k: f64 = fields[2].parse().map_err(|_| parse_err("k"))?;
        let sigma: f64 = fields[3].parse().map_err(|_| parse_err("sigma"))?;
        let mu: f64 = fields[4].parse().map_err(|_| parse_err("mu"))?;
        let params = GevParams::new(k, sigma, mu)
            .map_err(|e| CliError::Data(format!("{file}: row {}: {e}", i + 2)))?;
        rows.push((year, realization, params));
    }
    Ok(rows)
}

pub fn income_csv(series_list: &[(String, &IncomeSeries)]) -> String {
    let mut out = String::from("city,year,mean_income_cad\n");
    for (slug, series) in series_list {
        for &(year, income) in &series.mean_income_by_year {
            writeln!(out, "{slug},{year},{income}").unwrap();
        }
    }
    out
}

/// Parsed income rows: (city slug, year, mean income).
pub fn parse_income_csv(text: &str, file: &str) -> Result<Vec<(String, usize, f64)>, CliError> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some("city,year,mean_income_cad") => {}
        _ => return Err(CliError::Data(format!("{file}: bad or missing header"))),
    }
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Data(format!("{file}: malformed row {}", i + 2)));
        }
        let year: usize = fields[1]
            .parse()
            .map_err(|_| CliError::Data(format!("{file}: bad year on row {}", i + 2)))?;
        let income: f64 = fields[2]
            .parse()
            .map_err(|_| CliError::Data(format!("{file}: bad income on row {}", i + 2)))?;
        rows.push((fields[0].to_string(), year, income));
    }
    Ok(rows)
}

pub fn stability_csv(rows: &[(String, cornsim::stats::StabilityReport)]) -> String {
    let mut out = String::from("city,avg_cv_k,avg_cv_sigma,avg_cv_mu\n");
    for (slug, r) in rows {
        writeln!(
            out,
            "{},{},{},{}",
            slug, r.avg_cv_shape, r.avg_cv_scale, r.avg_cv_location
        )
        .unwrap();
    }
    out
}

pub fn income_variation_csv(rows: &[(String, u8, f64)]) -> String {
    let mut out = String::from("city,W,delta_cad\n");
    for (slug, w, delta) in rows {
        writeln!(out, "{slug},{w},{delta}").unwrap();
    }
    out
}

/// Full dump of one realization's paths: `path,year,day,tmax,tmin,rain`.
pub fn paths_csv(paths: &[ClimatePath]) -> String {
    let mut out = String::from("path,year,day,tmax,tmin,rain\n");
    for (p, path) in paths.iter().enumerate() {
        for (y, block) in path.blocks.iter().enumerate() {
            for d in 0..block.tmax().len() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    p,
                    y + 1,
                    d + 1,
                    block.tmax()[d],
                    block.tmin()[d],
                    block.rain()[d]
                )
                .unwrap();
            }
        }
    }
    out
}
