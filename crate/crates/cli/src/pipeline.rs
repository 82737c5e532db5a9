//! The end-to-end simulate pipeline: ingest → trends → paths → seasons/CHU →
//! yields → GEV fits → income series, with every CSV written deterministically.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use cornsim::agronomy::{
    determine_growing_season, fit_yield_model, project_yield, season_chu, AgronomyOptions,
    ChuSeries, GrowingSeason, YieldModel,
};
use cornsim::climate::{generate_realization, ClimateOptions, ClimateScenario};
use cornsim::econ::{
    compute_reference_price, income_forecast, CityYearSeason, IncomeSeries, PriceMode,
};
use cornsim::ingest::{
    fill_gaps, parse_ghcnd_daily, parse_market_csv, parse_yield_table, slice_year_blocks, YearBlock,
};
use cornsim::seed::child_seed;
use cornsim::stats::{fit_gev, GevParams};
use cornsim::trends::{estimate_city_climate_stats, CityClimateStats};
use cornsim::HISTORY_YEARS;

use crate::config::RunConfig;
use crate::{city_slug, csvio, CliError};

/// Counters returned by a successful run; timing goes to stdout, never into
/// output files.
#[derive(Debug)]
pub struct RunSummary {
    pub cities: usize,
    pub scenarios: usize,
    pub paths_generated: usize,
    pub gev_fits: usize,
    pub files_written: usize,
    pub reference_price_cad: f64,
    pub clamped_projections: u64,
    pub wall: std::time::Duration,
}

struct CityData {
    index: usize,
    slug: String,
    blocks: Vec<YearBlock>,
    stats: CityClimateStats,
    hist_seasons: Vec<(i32, GrowingSeason)>,
    hist_chu: ChuSeries,
    model: YieldModel,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn agronomy_options(config: &RunConfig) -> AgronomyOptions {
    AgronomyOptions {
        chu_floor_zero: config.chu_floor_zero,
        rain_threshold_mm: config.rain_threshold_mm,
    }
}

fn load_city(config: &RunConfig, name: &str, index: usize) -> Result<CityData, CliError> {
    let slug = city_slug(name);
    let weather_path = config.weather_dir.join(format!("{slug}.csv"));
    let series = fill_gaps(
        &parse_ghcnd_daily(&read_file(&weather_path)?, &slug)
            .map_err(|e| CliError::Data(format!("{}: {e}", weather_path.display())))?,
    )?;

    let start_year = config.start_year.unwrap_or_else(|| {
        use chrono::Datelike;
        let first = series.first_date();
        if first.ordinal() == 1 {
            first.year()
        } else {
            first.year() + 1
        }
    });
    let blocks = slice_year_blocks(&series, start_year, HISTORY_YEARS)
        .map_err(|e| CliError::Data(format!("{}: {e}", weather_path.display())))?;
    let stats = estimate_city_climate_stats(&blocks, index)?;

    let options = agronomy_options(config);
    let hist_seasons: Vec<(i32, GrowingSeason)> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            (
                b.year_label,
                determine_growing_season(b.rain(), i + 1, &options),
            )
        })
        .collect();
    let hist_chu = ChuSeries {
        city_index: index,
        values: blocks
            .iter()
            .zip(&hist_seasons)
            .map(|(b, (year, season))| (*year, season_chu(b, season, options.chu_floor_zero)))
            .collect(),
    };

    let yield_path = config.yield_dir.join(format!("{slug}.csv"));
    let yields = parse_yield_table(&read_file(&yield_path)?, index)
        .map_err(|e| CliError::Data(format!("{}: {e}", yield_path.display())))?;
    if yields.entries.len() > blocks.len() {
        return Err(CliError::Data(format!(
            "{}: {} yield years exceed the {}-year weather record",
            yield_path.display(),
            yields.entries.len(),
            blocks.len()
        )));
    }
    let year_indices: Vec<f64> = yields.entries.iter().map(|e| e.year_index as f64).collect();
    let chu_for_years: Vec<f64> = yields
        .entries
        .iter()
        .map(|e| hist_chu.values[e.year_index - 1].1)
        .collect();
    let tonnes: Vec<f64> = yields.entries.iter().map(|e| e.t_per_ha).collect();
    let model = fit_yield_model(&year_indices, &chu_for_years, &tonnes)?;

    Ok(CityData {
        index,
        slug,
        blocks,
        stats,
        hist_seasons,
        hist_chu,
        model,
    })
}

/// Reference price for the run: the fixed configuration value, or the
/// derived procedure over the market series and the historical seasons of
/// every calendar year covered by both the market data and the weather
/// record of every city.
fn resolve_price(config: &RunConfig, cities: &[CityData]) -> Result<f64, CliError> {
    match config.price_mode {
        PriceMode::Fixed => Ok(config.fixed_price_cad),
        PriceMode::Derived => {
            let market_path = config.market_csv.as_ref().expect("validated by config");
            let market = parse_market_csv(&read_file(market_path)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", market_path.display())))?;
            use chrono::Datelike;
            let mut market_years: Vec<i32> = market.entries.iter().map(|e| e.date.year()).collect();
            market_years.sort_unstable();
            market_years.dedup();

            let mut seasons = Vec::new();
            let mut shared_years = Vec::new();
            for year in market_years {
                let in_all = cities
                    .iter()
                    .all(|c| c.hist_seasons.iter().any(|(y, _)| *y == year));
                if !in_all {
                    continue;
                }
                shared_years.push(year);
                for city in cities {
                    let (_, season) = city
                        .hist_seasons
                        .iter()
                        .find(|(y, _)| *y == year)
                        .expect("checked above");
                    seasons.push(CityYearSeason {
                        city_index: city.index,
                        year,
                        season: *season,
                    });
                }
            }
            if shared_years.is_empty() {
                return Err(CliError::Data(
                    "derived price: market series and weather records share no calendar year"
                        .into(),
                ));
            }
            Ok(compute_reference_price(&market, &seasons)?)
        }
    }
}

/// Per-path, per-year projected yields for one realization.
fn yield_matrix(
    paths: &[cornsim::climate::ClimatePath],
    model: &YieldModel,
    options: &AgronomyOptions,
) -> Vec<Vec<f64>> {
    paths
        .par_iter()
        .map(|path| {
            path.blocks
                .iter()
                .enumerate()
                .map(|(i, block)| {
                    let season = determine_growing_season(block.rain(), i + 1, options);
                    let h = season_chu(block, &season, options.chu_floor_zero);
                    project_yield(model, h).t_per_ha
                })
                .collect()
        })
        .collect()
}

pub fn run_simulate(config: &RunConfig) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        CliError::Data(format!(
            "cannot create {}: {e}",
            config.output_dir.display()
        ))
    })?;

    let mut cities = Vec::with_capacity(config.cities.len());
    for (pos, name) in config.cities.iter().enumerate() {
        cities.push(load_city(config, name, pos + 1)?);
    }

    let price = resolve_price(config, &cities)?;
    let options = agronomy_options(config);
    let climate_options = ClimateOptions {
        perturb_scale: config.perturb_scale,
    };

    let mut files_written = 0usize;
    let mut write = |path: PathBuf, contents: String| -> Result<(), CliError> {
        write_file(&path, &contents)?;
        files_written += 1;
        Ok(())
    };

    // Static per-city outputs.
    let stats_rows: Vec<(String, CityClimateStats)> =
        cities.iter().map(|c| (c.slug.clone(), c.stats)).collect();
    write(
        config.output_dir.join("city_stats.csv"),
        csvio::city_stats_csv(&stats_rows),
    )?;
    for city in &cities {
        write(
            config.output_dir.join(format!("seasons_{}.csv", city.slug)),
            csvio::seasons_csv(&city.hist_seasons),
        )?;
        write(
            config.output_dir.join(format!("chu_{}.csv", city.slug)),
            csvio::chu_csv(&city.hist_chu),
        )?;
    }

    let mut paths_generated = 0usize;
    let mut gev_fits = 0usize;
    let mut clamped_projections = 0u64;
    // income series per scenario, in config city order
    let mut income_by_scenario: BTreeMap<u8, Vec<(String, IncomeSeries)>> = BTreeMap::new();

    for city in &cities {
        let city_seed = child_seed(config.master_seed, city.index as u64);
        for &w in &config.scenarios {
            let scenario = ClimateScenario::new(w).expect("validated by config");
            let scenario_seed = child_seed(city_seed, u64::from(w));
            let mut gev_rows: Vec<(usize, usize, GevParams)> = Vec::new();

            for realization in 0..config.n_realizations {
                let realization_seed = child_seed(scenario_seed, realization as u64);
                let paths = generate_realization(
                    &city.blocks,
                    &city.stats,
                    &scenario,
                    realization_seed,
                    config.n_paths,
                    &climate_options,
                )?;
                paths_generated += paths.len();

                let yields = yield_matrix(&paths, &city.model, &options);
                let n_years = paths[0].blocks.len();
                let fits: Vec<Result<GevParams, CliError>> = (0..n_years)
                    .into_par_iter()
                    .map(|year| {
                        let sample: Vec<f64> =
                            yields.iter().map(|per_path| per_path[year]).collect();
                        fit_gev(&sample).map_err(|e| {
                            CliError::Numeric(format!(
                                "GEV fit failed ({}, W={w}, realization {realization}, year {}): {e}",
                                city.slug,
                                year + 1
                            ))
                        })
                    })
                    .collect();
                for (year, fit) in fits.into_iter().enumerate() {
                    gev_rows.push((year + 1, realization, fit?));
                    gev_fits += 1;
                }

                if realization == 0 {
                    let series =
                        income_forecast(&paths, &city.model, price, config.farm_area_ha, &options)?;
                    clamped_projections += series.clamped_projections;
                    income_by_scenario
                        .entry(w)
                        .or_default()
                        .push((city.slug.clone(), series));
                    if config.dump_paths {
                        write(
                            config
                                .output_dir
                                .join(format!("paths_{}_{w}.csv", city.slug)),
                            csvio::paths_csv(&paths),
                        )?;
                    }
                }
            }

            write(
                config.output_dir.join(format!("gev_{}_{w}.csv", city.slug)),
                csvio::gev_csv(&gev_rows),
            )?;
        }
    }

    for (&w, series_list) in &income_by_scenario {
        let rows: Vec<(String, &IncomeSeries)> = series_list
            .iter()
            .map(|(slug, series)| (slug.clone(), series))
            .collect();
        write(
            config.output_dir.join(format!("income_{w}.csv")),
            csvio::income_csv(&rows),
        )?;
    }

    Ok(RunSummary {
        cities: cities.len(),
        scenarios: config.scenarios.len(),
        paths_generated,
        gev_fits,
        files_written,
        reference_price_cad: price,
        clamped_projections,
        wall: started.elapsed(),
    })
}
