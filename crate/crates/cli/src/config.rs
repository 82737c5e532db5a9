//! Run configuration: a flat TOML file plus CLI/environment overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use cornsim::climate::PerturbScale;
use cornsim::econ::{PriceMode, DEFAULT_FARM_AREA_HA, DEFAULT_PRICE_CAD_PER_TONNE};

/// Environment variable overriding `output_dir` (and nothing else).
pub const OUTPUT_DIR_ENV: &str = "CORNSIM_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn default_n_paths() -> usize {
    1500
}
fn default_n_realizations() -> usize {
    4
}
fn default_price_mode() -> String {
    "fixed".into()
}
fn default_fixed_price() -> f64 {
    DEFAULT_PRICE_CAD_PER_TONNE
}
fn default_farm_area() -> f64 {
    DEFAULT_FARM_AREA_HA
}
fn default_perturb_scale() -> String {
    "stddev_sqrt_var".into()
}

/// The raw TOML schema; every key is top-level.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    weather_dir: PathBuf,
    yield_dir: PathBuf,
    market_csv: Option<PathBuf>,
    output_dir: PathBuf,
    cities: Vec<String>,
    scenarios: Vec<u8>,
    #[serde(default = "default_n_paths")]
    n_paths: usize,
    #[serde(default = "default_n_realizations")]
    n_realizations: usize,
    master_seed: u64,
    start_year: Option<i32>,
    #[serde(default = "default_price_mode")]
    price_mode: String,
    #[serde(default = "default_fixed_price")]
    fixed_price_cad: f64,
    #[serde(default = "default_farm_area")]
    farm_area_ha: f64,
    #[serde(default)]
    chu_floor_zero: bool,
    #[serde(default = "default_perturb_scale")]
    perturb_scale: String,
    #[serde(default)]
    rain_threshold_mm: f64,
    #[serde(default)]
    dump_paths: bool,
}

/// Fully validated configuration driving one `simulate` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub weather_dir: PathBuf,
    pub yield_dir: PathBuf,
    pub market_csv: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub cities: Vec<String>,
    pub scenarios: Vec<u8>,
    pub n_paths: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub start_year: Option<i32>,
    pub price_mode: PriceMode,
    pub fixed_price_cad: f64,
    pub farm_area_ha: f64,
    pub chu_floor_zero: bool,
    pub perturb_scale: PerturbScale,
    pub rain_threshold_mm: f64,
    pub dump_paths: bool,
}

/// CLI flag overrides; flags beat the environment, which beats the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub scenarios: Option<Vec<u8>>,
    pub output_dir: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let file: FileConfig = toml::from_str(&text)?;

    let price_mode = match file.price_mode.as_str() {
        "fixed" => PriceMode::Fixed,
        "derived" => PriceMode::Derived,
        other => {
            return Err(ConfigError::Invalid {
                field: "price_mode",
                reason: format!("expected \"fixed\" or \"derived\", got \"{other}\""),
            })
        }
    };
    let perturb_scale = match file.perturb_scale.as_str() {
        "stddev_sqrt_var" => PerturbScale::StddevSqrtVar,
        "var_sqrt_var" => PerturbScale::VarSqrtVar,
        other => {
            return Err(ConfigError::Invalid {
                field: "perturb_scale",
                reason: format!(
                    "expected \"stddev_sqrt_var\" or \"var_sqrt_var\", got \"{other}\""
                ),
            })
        }
    };

    let mut output_dir = file.output_dir;
    if let Ok(env_dir) = std::env::var(OUTPUT_DIR_ENV) {
        output_dir = PathBuf::from(env_dir);
    }
    if let Some(dir) = &overrides.output_dir {
        output_dir = dir.clone();
    }

    let mut config = RunConfig {
        weather_dir: file.weather_dir,
        yield_dir: file.yield_dir,
        market_csv: file.market_csv,
        output_dir,
        cities: file.cities,
        scenarios: overrides.scenarios.clone().unwrap_or(file.scenarios),
        n_paths: overrides.n_paths.unwrap_or(file.n_paths),
        n_realizations: file.n_realizations,
        master_seed: overrides.master_seed.unwrap_or(file.master_seed),
        start_year: file.start_year,
        price_mode,
        fixed_price_cad: file.fixed_price_cad,
        farm_area_ha: file.farm_area_ha,
        chu_floor_zero: file.chu_floor_zero,
        perturb_scale,
        rain_threshold_mm: file.rain_threshold_mm,
        dump_paths: file.dump_paths,
    };
    // Scenario order never affects the outputs; normalize it away.
    config.scenarios.sort_unstable();
    config.scenarios.dedup();
    validate(&config)?;
    Ok(config)
}

fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    if config.cities.is_empty() {
        return Err(ConfigError::Invalid {
            field: "cities",
            reason: "at least one city is required".into(),
        });
    }
    let mut slugs: Vec<String> = config.cities.iter().map(|c| crate::city_slug(c)).collect();
    slugs.sort();
    for pair in slugs.windows(2) {
        if pair[0] == pair[1] {
            return Err(ConfigError::Invalid {
                field: "cities",
                reason: format!("duplicate city slug `{}`", pair[0]),
            });
        }
    }
    if slugs.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::Invalid {
            field: "cities",
            reason: "city name produces an empty file slug".into(),
        });
    }
    if config.scenarios.is_empty() {
        return Err(ConfigError::Invalid {
            field: "scenarios",
            reason: "at least one warming scenario is required".into(),
        });
    }
    if let Some(&w) = config.scenarios.iter().find(|&&w| w > 4) {
        return Err(ConfigError::Invalid {
            field: "scenarios",
            reason: format!("warming must be an integer in 0..=4, got {w}"),
        });
    }
    if config.n_paths == 0 {
        return Err(ConfigError::Invalid {
            field: "n_paths",
            reason: "must be at least 1".into(),
        });
    }
    if config.n_realizations == 0 {
        return Err(ConfigError::Invalid {
            field: "n_realizations",
            reason: "must be at least 1".into(),
        });
    }
    if config.fixed_price_cad <= 0.0 {
        return Err(ConfigError::Invalid {
            field: "fixed_price_cad",
            reason: "must be positive".into(),
        });
    }
    if config.farm_area_ha <= 0.0 {
        return Err(ConfigError::Invalid {
            field: "farm_area_ha",
            reason: "must be positive".into(),
        });
    }
    if config.rain_threshold_mm < 0.0 {
        return Err(ConfigError::Invalid {
            field: "rain_threshold_mm",
            reason: "must be nonnegative".into(),
        });
    }
    if config.price_mode == PriceMode::Derived && config.market_csv.is_none() {
        return Err(ConfigError::Invalid {
            field: "market_csv",
            reason: "required when price_mode = \"derived\"".into(),
        });
    }
    Ok(())
}
