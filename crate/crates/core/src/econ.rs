//! Reference corn price, farm income, and per-scenario income forecasts.

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::agronomy::{
    determine_growing_season, project_yield, season_chu, AgronomyOptions, GrowingSeason, YieldModel,
};
use crate::climate::ClimatePath;

#[derive(Debug, Error)]
pub enum EconError {
    #[error("no growing seasons supplied for the price procedure")]
    NoSeasons,
    #[error("season table is not rectangular: city {city} year {year} is duplicated or missing")]
    RaggedSeasons { city: usize, year: i32 },
    #[error("price window {start}..={end} (city {city}, year {year}) has no market coverage")]
    WindowOutsideSeries {
        city: usize,
        year: i32,
        start: NaiveDate,
        end: NaiveDate,
    },
    #[error("realization has no paths")]
    EmptyRealization,
    #[error("paths disagree on the number of simulated years")]
    RaggedPaths,
}

/// How the reference price is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceMode {
    /// Use [`PriceConfig::fixed_p`] as-is.
    #[default]
    Fixed,
    /// Run the inflation-adjusted futures averaging procedure on a supplied
    /// market series.
    Derived,
}

/// Price and farm-size configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceConfig {
    pub mode: PriceMode,
    /// CAD per tonne; the long-run inflation-adjusted futures average.
    pub fixed_p: f64,
    /// Farm size in hectares.
    pub farm_area_ha: f64,
}

pub const DEFAULT_PRICE_CAD_PER_TONNE: f64 = 186.12;
pub const DEFAULT_FARM_AREA_HA: f64 = 100.0;

impl Default for PriceConfig {
    fn default() -> Self {
        Self {
            mode: PriceMode::Fixed,
            fixed_p: DEFAULT_PRICE_CAD_PER_TONNE,
            farm_area_ha: DEFAULT_FARM_AREA_HA,
        }
    }
}

/// A historical growing season attributed to a (city, calendar year) pair,
/// input to the price procedure.
#[derive(Debug, Clone, Copy)]
pub struct CityYearSeason {
    pub city_index: usize,
    pub year: i32,
    pub season: GrowingSeason,
}

/// Per-year mean income over the paths of one realization, in CAD.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeSeries {
    pub city_index: usize,
    pub warming_c: u8,
    /// One `(year_index, income)` entry per simulated year 1..=n.
    pub mean_income_by_year: Vec<(usize, f64)>,
    pub n_paths: usize,
    /// Projections clamped at zero across all paths and years.
    pub clamped_projections: u64,
}

/// Maps a 365-day-calendar day-of-year to a real date in `year` via the
/// non-leap month/day (so day 152 is June 1 in leap years too).
fn no_leap_doy_to_date(year: i32, doy: usize) -> NaiveDate {
    let reference = NaiveDate::from_yo_opt(2001, doy as u32).unwrap(); // 2001 is not a leap year
    NaiveDate::from_ymd_opt(year, reference.month(), reference.day()).unwrap()
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Reference price: for every (city, year) the mean inflation-adjusted CAD
/// futures price over the 14 days centered on the season midpoint
/// (`[mid−6, mid+7]` with `mid = ⌊(planting+harvest)/2⌋`), then the mean over
/// cities per year, then the mean over years.
///
/// Prices in year `t` are deflated by `Π (1 + deflator_s/100)` for `s` from
/// the series' first year through `t` inclusive. A window reaching outside
/// the market series' date span is an error; weekend/holiday gaps inside the
/// window are skipped.
pub fn compute_reference_price(
    market: &crate::ingest::MarketSeries,
    seasons: &[CityYearSeason],
) -> Result<f64, EconError> {
    if seasons.is_empty() {
        return Err(EconError::NoSeasons);
    }

    let mut years: Vec<i32> = seasons.iter().map(|s| s.year).collect();
    years.sort_unstable();
    years.dedup();
    let mut cities: Vec<usize> = seasons.iter().map(|s| s.city_index).collect();
    cities.sort_unstable();
    cities.dedup();

    // Every (city, year) combination must appear exactly once.
    let mut by_key: std::collections::BTreeMap<(usize, i32), &GrowingSeason> =
        std::collections::BTreeMap::new();
    for s in seasons {
        if by_key.insert((s.city_index, s.year), &s.season).is_some() {
            return Err(EconError::RaggedSeasons {
                city: s.city_index,
                year: s.year,
            });
        }
    }
    for &city in &cities {
        for &year in &years {
            if !by_key.contains_key(&(city, year)) {
                return Err(EconError::RaggedSeasons { city, year });
            }
        }
    }

    // Cumulative deflator per calendar year; the chain starts at the series'
    // first year and a year's rate is read from its first entry.
    let mut deflator_chain: std::collections::BTreeMap<i32, f64> =
        std::collections::BTreeMap::new();
    {
        let mut chain = 1.0;
        let mut current_year = None;
        for e in &market.entries {
            let y = e.date.year();
            if current_year != Some(y) {
                chain *= 1.0 + e.deflator_pct / 100.0;
                current_year = Some(y);
                deflator_chain.insert(y, chain);
            }
        }
    }

    let first = market.entries[0].date;
    let last = market.entries[market.entries.len() - 1].date;

    let mut yearly_means = Vec::with_capacity(years.len());
    for &year in &years {
        let mut city_means = Vec::with_capacity(cities.len());
        for &city in &cities {
            let season = by_key[&(city, year)];
            let mid = (season.planting_day + season.harvest_day) / 2;
            let start = no_leap_doy_to_date(year, mid - 6);
            let end = no_leap_doy_to_date(year, mid + 7);
            if start < first || end > last {
                return Err(EconError::WindowOutsideSeries {
                    city,
                    year,
                    start,
                    end,
                });
            }
            let window: Vec<f64> = market
                .entries
                .iter()
                .filter(|e| e.date >= start && e.date <= end)
                .map(|e| {
                    let chain = deflator_chain[&e.date.year()];
                    e.corn_usd * e.usdcad / chain
                })
                .collect();
            if window.is_empty() {
                return Err(EconError::WindowOutsideSeries {
                    city,
                    year,
                    start,
                    end,
                });
            }
            city_means.push(kahan_sum(window.iter().copied()) / window.len() as f64);
        }
        yearly_means.push(kahan_sum(city_means.iter().copied()) / city_means.len() as f64);
    }
    Ok(kahan_sum(yearly_means.iter().copied()) / yearly_means.len() as f64)
}

/// Farm income: area × yield × price.
pub fn farm_income(area_ha: f64, yield_t_per_ha: f64, price_cad_per_tonne: f64) -> f64 {
    area_ha * yield_t_per_ha * price_cad_per_tonne
}

/// Per-year mean farm income over the paths of one realization.
///
/// Each path/year runs the full season → CHU → projected-yield chain; the
/// mean over paths uses compensated summation so the result is independent
/// of any partitioning of the path set.
pub fn income_forecast(
    realization: &[ClimatePath],
    model: &YieldModel,
    price_cad_per_tonne: f64,
    farm_area_ha: f64,
    options: &AgronomyOptions,
) -> Result<IncomeSeries, EconError> {
    if realization.is_empty() {
        return Err(EconError::EmptyRealization);
    }
    let n_years = realization[0].blocks.len();
    if realization.iter().any(|p| p.blocks.len() != n_years) {
        return Err(EconError::RaggedPaths);
    }

    let mut clamped: u64 = 0;
    let mut mean_income_by_year = Vec::with_capacity(n_years);
    for year in 1..=n_years {
        let mut incomes = Vec::with_capacity(realization.len());
        for path in realization {
            let block = &path.blocks[year - 1];
            let season = determine_growing_season(block.rain(), year, options);
            let h = season_chu(block, &season, options.chu_floor_zero);
            let projected = project_yield(model, h);
            if projected.clamped {
                clamped += 1;
            }
            incomes.push(farm_income(
                farm_area_ha,
                projected.t_per_ha,
                price_cad_per_tonne,
            ));
        }
        let mean = kahan_sum(incomes.iter().copied()) / incomes.len() as f64;
        mean_income_by_year.push((year, mean));
    }

    Ok(IncomeSeries {
        city_index: realization[0].city_index,
        warming_c: realization[0].scenario.warming_c,
        mean_income_by_year,
        n_paths: realization.len(),
        clamped_projections: clamped,
    })
}

/// Income variation at the horizon: mean income of the last simulated year
/// minus the first.
pub fn income_variation(series: &IncomeSeries) -> f64 {
    let first = series.mean_income_by_year.first().expect("nonempty series");
    let last = series.mean_income_by_year.last().expect("nonempty series");
    last.1 - first.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::climate::{build_climate_path, ClimateOptions, ClimateScenario};
    use crate::ingest::{parse_market_csv, YearBlock};
    use crate::trends::CityClimateStats;
    use approx::assert_relative_eq;

    #[test]
    fn income_is_the_triple_product() {
        assert_relative_eq!(farm_income(100.0, 8.0, 186.12), 148_896.0, epsilon = 1e-9);
        assert_eq!(farm_income(100.0, 0.0, 186.12), 0.0);
        assert_eq!(farm_income(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn income_is_bilinear_in_area_and_price() {
        let base = farm_income(100.0, 5.5, 186.12);
        assert_relative_eq!(farm_income(200.0, 5.5, 186.12), 2.0 * base, epsilon = 1e-9);
        assert_relative_eq!(farm_income(100.0, 5.5, 372.24), 2.0 * base, epsilon = 1e-9);
    }

    fn season(planting: usize, harvest: usize) -> GrowingSeason {
        GrowingSeason::new(1, planting, harvest).unwrap()
    }

    fn market_with(
        years: &[i32],
        corn: f64,
        fx: f64,
        deflator: f64,
    ) -> crate::ingest::MarketSeries {
        let mut csv = String::from("date,corn_usd,usdcad,deflator_pct\n");
        for &y in years {
            let mut d = NaiveDate::from_ymd_opt(y, 1, 1).unwrap();
            let end = NaiveDate::from_ymd_opt(y, 12, 31).unwrap();
            while d <= end {
                csv.push_str(&format!("{d},{corn},{fx},{deflator}\n"));
                d = d.succ_opt().unwrap();
            }
        }
        parse_market_csv(&csv).unwrap()
    }

    #[test]
    fn constant_inputs_pass_through_all_means() {
        let market = market_with(&[2009, 2010], 100.0, 1.30, 0.0);
        let seasons = vec![
            CityYearSeason {
                city_index: 1,
                year: 2009,
                season: season(150, 300),
            },
            CityYearSeason {
                city_index: 1,
                year: 2010,
                season: season(152, 298),
            },
        ];
        let p = compute_reference_price(&market, &seasons).unwrap();
        assert_relative_eq!(p, 130.0, epsilon = 1e-9);
    }

    #[test]
    fn price_is_mean_of_city_means() {
        // Two cities whose windows land in regions priced 100 and 200; the
        // price steps up after August 14 (day 226 of a non-leap year).
        let mut csv = String::from("date,corn_usd,usdcad,deflator_pct\n");
        let mut d = NaiveDate::from_ymd_opt(2009, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2009, 12, 31).unwrap();
        while d <= end {
            let price = if d.ordinal() <= 226 { 100.0 } else { 200.0 };
            csv.push_str(&format!("{d},{price},1.0,0.0\n"));
            d = d.succ_opt().unwrap();
        }
        let market = parse_market_csv(&csv).unwrap();
        // Midpoints: city 1 → day (139+283)/2 = 211, window [205, 218];
        // city 2 → day (167+313)/2 = 240, window [234, 247].
        let seasons = vec![
            CityYearSeason {
                city_index: 1,
                year: 2009,
                season: season(139, 283),
            },
            CityYearSeason {
                city_index: 2,
                year: 2009,
                season: season(167, 313),
            },
        ];
        let p = compute_reference_price(&market, &seasons).unwrap();
        assert_relative_eq!(p, 150.0, epsilon = 1e-9);
    }

    #[test]
    fn deflator_chain_divides_later_years() {
        // 0% in 2009, 10% in 2010: 2010 prices are divided by 1.1 while
        // 2009 prices keep their chain of 1.0.
        let mut csv = String::from("date,corn_usd,usdcad,deflator_pct\n");
        for (year, deflator) in [(2009, 0.0), (2010, 10.0)] {
            let mut d = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
            let end = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
            while d <= end {
                csv.push_str(&format!("{d},110.0,1.0,{deflator}\n"));
                d = d.succ_opt().unwrap();
            }
        }
        let market = parse_market_csv(&csv).unwrap();
        let seasons = vec![
            CityYearSeason {
                city_index: 1,
                year: 2009,
                season: season(152, 298),
            },
            CityYearSeason {
                city_index: 1,
                year: 2010,
                season: season(152, 298),
            },
        ];
        let p = compute_reference_price(&market, &seasons).unwrap();
        assert_relative_eq!(p, (110.0 + 100.0) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn window_outside_series_is_an_error() {
        // Market data only covers January-March; the season window is summer.
        let mut csv = String::from("date,corn_usd,usdcad,deflator_pct\n");
        let mut d = NaiveDate::from_ymd_opt(2009, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2009, 3, 31).unwrap();
        while d <= end {
            csv.push_str(&format!("{d},100.0,1.3,0.0\n"));
            d = d.succ_opt().unwrap();
        }
        let market = parse_market_csv(&csv).unwrap();
        let seasons = vec![CityYearSeason {
            city_index: 1,
            year: 2009,
            season: season(152, 298),
        }];
        assert!(matches!(
            compute_reference_price(&market, &seasons).unwrap_err(),
            EconError::WindowOutsideSeries {
                city: 1,
                year: 2009,
                ..
            }
        ));
    }

    #[test]
    fn ragged_season_table_is_rejected() {
        let market = market_with(&[2009, 2010], 100.0, 1.3, 0.0);
        let seasons = vec![
            CityYearSeason {
                city_index: 1,
                year: 2009,
                season: season(152, 298),
            },
            CityYearSeason {
                city_index: 2,
                year: 2009,
                season: season(152, 298),
            },
            CityYearSeason {
                city_index: 1,
                year: 2010,
                season: season(152, 298),
            },
        ];
        assert!(matches!(
            compute_reference_price(&market, &seasons).unwrap_err(),
            EconError::RaggedSeasons {
                city: 2,
                year: 2010
            }
        ));
    }

    fn flat_blocks() -> Vec<YearBlock> {
        (1..=49)
            .map(|y| {
                let tmax = vec![24.0; 365];
                let tmin = vec![14.0; 365];
                let rain = vec![2.0; 365];
                YearBlock::new(1969 + y, tmax, tmin, rain).unwrap()
            })
            .collect()
    }

    fn zero_stats() -> CityClimateStats {
        CityClimateStats {
            city_index: 1,
            trend_tmax: 0.0,
            trend_tmin: 0.0,
            trend_rain: 0.0,
            var_tmax: 0.0,
            var_tmin: 0.0,
            var_rain: 0.0,
        }
    }

    fn demo_model() -> YieldModel {
        YieldModel {
            c0: 1.19,
            c1: 0.121,
            c2: 8.68e-4,
            gof: 0.83,
        }
    }

    #[test]
    fn constant_weather_gives_constant_income() {
        let blocks = flat_blocks();
        let path = build_climate_path(
            &blocks,
            &zero_stats(),
            &ClimateScenario::new(0).unwrap(),
            5,
            &ClimateOptions::default(),
        )
        .unwrap();
        let series = income_forecast(
            &[path],
            &demo_model(),
            DEFAULT_PRICE_CAD_PER_TONNE,
            DEFAULT_FARM_AREA_HA,
            &AgronomyOptions::default(),
        )
        .unwrap();
        let first = series.mean_income_by_year[0].1;
        assert!(first > 0.0);
        for &(_, income) in &series.mean_income_by_year {
            assert_relative_eq!(income, first, epsilon = 1e-9);
        }
        assert_relative_eq!(income_variation(&series), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn two_path_mean_matches_hand_average() {
        let blocks = flat_blocks();
        let mut stats = zero_stats();
        stats.var_tmax = 0.25;
        stats.var_tmin = 0.25;
        let scenario = ClimateScenario::new(2).unwrap();
        let opts = ClimateOptions::default();
        let a = build_climate_path(&blocks, &stats, &scenario, 1, &opts).unwrap();
        let b = build_climate_path(&blocks, &stats, &scenario, 2, &opts).unwrap();
        let model = demo_model();
        let agro = AgronomyOptions::default();
        let sa = income_forecast(std::slice::from_ref(&a), &model, 186.12, 100.0, &agro).unwrap();
        let sb = income_forecast(std::slice::from_ref(&b), &model, 186.12, 100.0, &agro).unwrap();
        let both = income_forecast(&[a, b], &model, 186.12, 100.0, &agro).unwrap();
        for year in 0..49 {
            let expected = (sa.mean_income_by_year[year].1 + sb.mean_income_by_year[year].1) / 2.0;
            assert_relative_eq!(both.mean_income_by_year[year].1, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn path_order_does_not_change_the_mean() {
        let blocks = flat_blocks();
        let mut stats = zero_stats();
        stats.var_tmax = 0.5;
        stats.var_tmin = 0.3;
        let scenario = ClimateScenario::new(3).unwrap();
        let opts = ClimateOptions::default();
        let paths: Vec<_> = (0..16)
            .map(|s| build_climate_path(&blocks, &stats, &scenario, s, &opts).unwrap())
            .collect();
        let mut reversed = paths.clone();
        reversed.reverse();
        let model = demo_model();
        let agro = AgronomyOptions::default();
        let fwd = income_forecast(&paths, &model, 186.12, 100.0, &agro).unwrap();
        let rev = income_forecast(&reversed, &model, 186.12, 100.0, &agro).unwrap();
        for year in 0..49 {
            assert_relative_eq!(
                fwd.mean_income_by_year[year].1,
                rev.mean_income_by_year[year].1,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn income_variation_fixtures() {
        let series = IncomeSeries {
            city_index: 1,
            warming_c: 4,
            mean_income_by_year: (1..=49)
                .map(|i| {
                    (
                        i,
                        if i == 1 {
                            100_000.0
                        } else if i == 49 {
                            108_130.28
                        } else {
                            104_000.0
                        },
                    )
                })
                .collect(),
            n_paths: 1500,
            clamped_projections: 0,
        };
        assert_relative_eq!(income_variation(&series), 8_130.28, epsilon = 1e-9);

        // A linear ramp of slope s over 49 years moves by 48·s.
        let ramp = IncomeSeries {
            city_index: 1,
            warming_c: 0,
            mean_income_by_year: (1..=49).map(|i| (i, 1000.0 + 2.5 * i as f64)).collect(),
            n_paths: 1,
            clamped_projections: 0,
        };
        assert_relative_eq!(income_variation(&ramp), 48.0 * 2.5, epsilon = 1e-9);
    }

    #[test]
    fn warming_raises_income_below_the_chu_optimum() {
        // C2 > 0, temperatures below the concavity optimum, common seed:
        // income variation is nondecreasing in W.
        let blocks = flat_blocks();
        let mut stats = zero_stats();
        stats.var_tmax = 0.09;
        stats.var_tmin = 0.09;
        let opts = ClimateOptions::default();
        let model = demo_model();
        let agro = AgronomyOptions::default();
        let mut previous = f64::NEG_INFINITY;
        for w in 0..=4u8 {
            let paths: Vec<_> = (0..32)
                .map(|p| {
                    build_climate_path(
                        &blocks,
                        &stats,
                        &ClimateScenario::new(w).unwrap(),
                        1000 + p,
                        &opts,
                    )
                    .unwrap()
                })
                .collect();
            let series = income_forecast(&paths, &model, 186.12, 100.0, &agro).unwrap();
            let delta = income_variation(&series);
            assert!(
                delta >= previous,
                "income variation must be nondecreasing in W: {delta} < {previous} at W={w}"
            );
            previous = delta;
        }
    }

    #[test]
    fn empty_realization_is_rejected() {
        assert!(matches!(
            income_forecast(
                &[],
                &demo_model(),
                186.12,
                100.0,
                &AgronomyOptions::default()
            )
            .unwrap_err(),
            EconError::EmptyRealization
        ));
    }
}
