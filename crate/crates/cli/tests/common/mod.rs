//! Shared synthetic-city fixtures for the integration and acceptance suites.
#![allow(dead_code)] // each test target compiles its own copy and uses a subset
//!
//! Two cities cover the behaviors under test:
//!
//! * the *variable* city has seasonal temperature cycles, year-level noise,
//!   a mild warming trend, and wet/dry rainfall years — rich enough that
//!   GEV fits on simulated yields are nondegenerate;
//! * the *staircase* city is built so the whole pipeline is analytically
//!   predictable: temperatures and rainfall are exactly linear in the year
//!   (plus a mean-zero temperature wiggle), and a descending rainfall
//!   staircase in the harvest window shortens simulated growing seasons as
//!   the drying trend continues.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use cornsim::agronomy::{determine_growing_season, season_chu, AgronomyOptions, YieldModel};
use cornsim::ingest::YearBlock;

pub const YEARS: usize = 49;
pub const FIRST_YEAR: i32 = 1970;

/// Table-level yield coefficients with a positive CHU response.
pub fn reference_yield_model() -> YieldModel {
    YieldModel {
        c0: 1.19,
        c1: 0.121,
        c2: 8.68e-4,
        gof: 0.8286,
    }
}

/// 49 years of plausible Ontario-like weather with real variability.
pub fn variable_city_blocks() -> Vec<YearBlock> {
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
    (1..=YEARS)
        .map(|y| {
            let level: f64 = 0.5 * rng.sample::<f64, _>(StandardNormal) + 0.02 * y as f64;
            let dry_year = rng.random_bool(0.22);
            let mut tmax = Vec::with_capacity(365);
            let mut tmin = Vec::with_capacity(365);
            let mut rain = Vec::with_capacity(365);
            for d in 1..=365usize {
                let seasonal = 11.0 + 14.0 * (2.0 * PI * (d as f64 - 114.0) / 365.0).sin();
                let tx = seasonal + level + 2.0 * rng.sample::<f64, _>(StandardNormal);
                let spread = (8.0 + rng.sample::<f64, _>(StandardNormal)).max(3.0);
                let wet_p = if dry_year { 0.25 } else { 0.5 };
                let r = if rng.random_bool(wet_p) {
                    let u: f64 = rng.random_range(1e-12..1.0);
                    -u.ln() * if dry_year { 2.0 } else { 4.5 }
                } else {
                    0.0
                };
                tmax.push(tx);
                tmin.push(tx - spread);
                rain.push(r);
            }
            YearBlock::new(FIRST_YEAR + y as i32 - 1, tmax, tmin, rain).unwrap()
        })
        .collect()
}

/// Rainfall level of the staircase city before the yearly drying is applied.
///
/// Harvest-window groups g = 0..=9 occupy days 283+3g..=285+3g; groups 7, 8
/// and 9 are calibrated to dry out (hit zero rain) at simulated years 40, 25
/// and 10 respectively once the −0.01 mm/yr trend is extended, the later
/// positions dying first so the simulated harvest walks earlier over the
/// horizon.
fn staircase_base_rain(day: usize) -> f64 {
    const DRYING: f64 = 0.01;
    if (283..=312).contains(&day) {
        match (day - 283) / 3 {
            9 => DRYING * (49.0 + 10.0 - 0.5),
            8 => DRYING * (49.0 + 25.0 - 0.5),
            7 => DRYING * (49.0 + 40.0 - 0.5),
            _ => 3.0,
        }
    } else {
        3.0
    }
}

/// Mean-zero deterministic year-to-year temperature wiggle; breaks the
/// collinearity of CHU with the year index without adding randomness.
fn temperature_wiggle() -> Vec<f64> {
    let raw: Vec<f64> = (1..=YEARS).map(|y| (0.9 * y as f64).sin()).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.into_iter().map(|v| 0.3 * (v - mean)).collect()
}

/// The analytically predictable city: flat 24/15 °C temperatures plus a tiny
/// warming ramp and the wiggle, rainfall linear in the year with the harvest
/// staircase.
pub fn staircase_city_blocks() -> Vec<YearBlock> {
    let wiggle = temperature_wiggle();
    (1..=YEARS)
        .map(|y| {
            let level = 0.005 * y as f64 + wiggle[y - 1];
            let tmax = vec![24.0 + level; 365];
            let tmin = vec![15.0 + level; 365];
            let rain: Vec<f64> = (1..=365)
                .map(|d| staircase_base_rain(d) - 0.01 * y as f64)
                .collect();
            YearBlock::new(FIRST_YEAR + y as i32 - 1, tmax, tmin, rain).unwrap()
        })
        .collect()
}

/// Historical per-year CHU of a block set under default season rules.
pub fn historical_chu(blocks: &[YearBlock]) -> Vec<f64> {
    let options = AgronomyOptions::default();
    blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let season = determine_growing_season(b.rain(), i + 1, &options);
            season_chu(b, &season, options.chu_floor_zero)
        })
        .collect()
}

/// Noiseless yields consistent with [`reference_yield_model`] on the given
/// historical CHU values, in tonnes per hectare.
pub fn yields_from_model(chu: &[f64]) -> Vec<f64> {
    let m = reference_yield_model();
    chu.iter()
        .enumerate()
        .map(|(i, h)| m.c0 + m.c1 * (i + 1) as f64 + m.c2 * h)
        .collect()
}

/// Real-calendar day → index into the 365-day arrays (leap day reuses the
/// February 28 value; the slicer drops it anyway).
fn no_leap_index(date: NaiveDate) -> usize {
    let ordinal = date.ordinal() as usize;
    let leap = NaiveDate::from_ymd_opt(date.year(), 2, 29).is_some();
    if leap && ordinal >= 60 {
        ordinal - 2
    } else {
        ordinal - 1
    }
}

/// Writes a block set as a GHCND-style weather CSV (integer tenths).
pub fn write_weather_csv(path: &Path, blocks: &[YearBlock]) {
    let mut csv = String::from("date,element,value\n");
    for block in blocks {
        let year = block.year_label;
        let mut date = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
        while date <= end {
            let i = no_leap_index(date);
            let tenths = |v: f64| (v * 10.0).round() as i64;
            writeln!(csv, "{date},TMAX,{}", tenths(block.tmax()[i])).unwrap();
            writeln!(csv, "{date},TMIN,{}", tenths(block.tmin()[i])).unwrap();
            writeln!(csv, "{date},PRCP,{}", tenths(block.rain()[i])).unwrap();
            date = date.succ_opt().unwrap();
        }
    }
    std::fs::write(path, csv).unwrap();
}

/// Writes a yield CSV derived from the blocks' own CHU so the fitted model
/// recovers [`reference_yield_model`] up to tenth-rounding of the weather.
pub fn write_yield_csv(path: &Path, blocks: &[YearBlock]) {
    let chu = historical_chu(blocks);
    let tonnes = yields_from_model(&chu);
    let mut csv = String::from("year_index,yield_bu_ac\n");
    for (i, t) in tonnes.iter().enumerate() {
        writeln!(
            csv,
            "{},{}",
            i + 1,
            t / cornsim::ingest::BU_PER_ACRE_TO_T_PER_HA
        )
        .unwrap();
    }
    std::fs::write(path, csv).unwrap();
}

/// Year-keyed deflator percentages of the synthetic market decade.
pub fn decade_deflators() -> Vec<(i32, f64)> {
    vec![
        (2009, 1.5),
        (2010, 2.0),
        (2011, 0.8),
        (2012, 1.2),
        (2013, 2.5),
        (2014, 1.9),
        (2015, 0.3),
        (2016, 1.1),
        (2017, 2.2),
        (2018, 1.7),
    ]
}

/// Daily market series 2009–2018 with smooth price and FX cycles.
pub fn decade_market_csv() -> String {
    let deflators = decade_deflators();
    let mut csv = String::from("date,corn_usd,usdcad,deflator_pct\n");
    let mut date = NaiveDate::from_ymd_opt(2009, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2018, 12, 31).unwrap();
    let mut t = 0.0f64;
    while date <= end {
        let year = date.year();
        let deflator = deflators.iter().find(|(y, _)| *y == year).unwrap().1;
        let corn = 150.0 + 20.0 * (2.0 * PI * t / 365.25).sin() + 3.0 * f64::from(year - 2009);
        let fx = 1.25 + 0.05 * (2.0 * PI * t / 181.0).sin() + 0.01 * f64::from(year - 2009);
        writeln!(csv, "{date},{corn},{fx},{deflator}").unwrap();
        date = date.succ_opt().unwrap();
        t += 1.0;
    }
    csv
}

/// The decade fixture's growing seasons, matching the frozen price oracle.
pub fn decade_seasons() -> Vec<cornsim::econ::CityYearSeason> {
    let mut seasons = Vec::new();
    for year in 2009..=2018 {
        let k = (year - 2009) as usize;
        let specs = [
            (1, 140 + (3 * k) % 11, 290 + (2 * k) % 13),
            (2, 155 - (5 * k) % 9, 293 + (7 * k) % 14),
        ];
        for (city_index, planting, harvest) in specs {
            seasons.push(cornsim::econ::CityYearSeason {
                city_index,
                year,
                season: cornsim::agronomy::GrowingSeason::new(k + 1, planting, harvest).unwrap(),
            });
        }
    }
    seasons
}

/// Recursively lists (file name → bytes) of a flat output directory.
pub fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}
