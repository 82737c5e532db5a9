//! Block-bootstrap climate path generation under a warming scenario.
//!
//! A path permutes the 49 historical year blocks, removes the historical
//! temperature trend according to each block's original position, injects a
//! Gaussian warming perturbation whose mean ramps from `W/49` to `W` °C over
//! the simulated horizon, and re-adds the realized historical warming as a
//! continuity correction. Rainfall keeps its historical trend, extended
//! according to the block's new position, and is clamped at zero day-wise.
//!
//! All randomness comes from a ChaCha12 generator seeded per path; the
//! consumption order (permutation first, then one tmax and one tmin standard
//! normal draw per simulated year) is fixed, so a (seed, scenario) pair fully
//! determines a path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::YearBlock;
use crate::seed::child_seed;
use crate::trends::CityClimateStats;
use crate::HISTORY_YEARS;

#[derive(Debug, Error)]
pub enum ClimateError {
    #[error("warming scenario must be an integer between 0 and 4 °C, got {0}")]
    BadWarming(u8),
    #[error("expected exactly {expected} historical blocks, found {found}")]
    WrongBlockCount { expected: usize, found: usize },
    #[error("negative variance {value} for {variable}")]
    NegativeVariance { variable: &'static str, value: f64 },
    #[error("a realization needs at least one path")]
    NoPaths,
}

/// Warming scenario: `warming_c` extra °C phased in linearly over the
/// simulated horizon. Rainfall always continues its historical trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClimateScenario {
    pub warming_c: u8,
    pub n_years: usize,
}

impl ClimateScenario {
    pub fn new(warming_c: u8) -> Result<Self, ClimateError> {
        if warming_c > 4 {
            return Err(ClimateError::BadWarming(warming_c));
        }
        Ok(Self {
            warming_c,
            n_years: HISTORY_YEARS,
        })
    }
}

/// How to read the dispersion argument of the warming perturbation, which is
/// written as √𝒱 of the historical annual means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbScale {
    /// √𝒱 is the standard deviation (variance = 𝒱). The conventional
    /// reading and the default.
    #[default]
    StddevSqrtVar,
    /// √𝒱 is the variance (standard deviation = 𝒱^¼), the literal
    /// alternative.
    VarSqrtVar,
}

impl PerturbScale {
    fn stddev(self, variance: f64) -> f64 {
        match self {
            PerturbScale::StddevSqrtVar => variance.sqrt(),
            PerturbScale::VarSqrtVar => variance.sqrt().sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClimateOptions {
    pub perturb_scale: PerturbScale,
}

/// One simulated 49-year climate path.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimatePath {
    pub city_index: usize,
    pub scenario: ClimateScenario,
    /// Simulated blocks in order; `year_label` is the simulated year index
    /// 1..=49.
    pub blocks: Vec<YearBlock>,
    /// `permutation[i-1]` is the 1-based historical block feeding simulated
    /// year `i`; always a bijection on 1..=49.
    pub permutation: Vec<usize>,
    pub seed: u64,
}

/// Uniform random permutation of 1..=n by Fisher-Yates.
fn draw_permutation(rng: &mut ChaCha12Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

fn validate_inputs(blocks: &[YearBlock], stats: &CityClimateStats) -> Result<(), ClimateError> {
    if blocks.len() != HISTORY_YEARS {
        return Err(ClimateError::WrongBlockCount {
            expected: HISTORY_YEARS,
            found: blocks.len(),
        });
    }
    for (variable, value) in [("tmax", stats.var_tmax), ("tmin", stats.var_tmin)] {
        if value < 0.0 {
            return Err(ClimateError::NegativeVariance { variable, value });
        }
    }
    Ok(())
}

/// Builds one climate path from the 49 historical blocks.
///
/// For simulated year `i` drawing historical block `p = 𝒫(i)`:
///
/// * tmax gets the scalar shift `−𝒯·p + (W·i/49 + s·z) + 𝒯·49` applied to
///   all 365 days, with `z` a standard normal draw and `s` the perturbation
///   scale derived from the historical variance; tmin analogously;
/// * rain gets the scalar shift `𝒯_rain·(49 − p + i)` and is then clamped
///   at zero day by day.
pub fn build_climate_path(
    blocks: &[YearBlock],
    stats: &CityClimateStats,
    scenario: &ClimateScenario,
    seed: u64,
    opts: &ClimateOptions,
) -> Result<ClimatePath, ClimateError> {
    validate_inputs(blocks, stats)?;
    let n = HISTORY_YEARS;
    let n_f = n as f64;
    let sd_tmax = opts.perturb_scale.stddev(stats.var_tmax);
    let sd_tmin = opts.perturb_scale.stddev(stats.var_tmin);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let permutation = draw_permutation(&mut rng, n);

    let mut sim_blocks = Vec::with_capacity(n);
    for (idx, &p) in permutation.iter().enumerate() {
        let i = idx + 1;
        let source = &blocks[p - 1];
        let warming_mean = f64::from(scenario.warming_c) * i as f64 / n_f;
        let z_tmax: f64 = rng.sample(StandardNormal);
        let z_tmin: f64 = rng.sample(StandardNormal);

        let shift_tmax = -stats.trend_tmax * p as f64
            + (warming_mean + sd_tmax * z_tmax)
            + stats.trend_tmax * n_f;
        let shift_tmin = -stats.trend_tmin * p as f64
            + (warming_mean + sd_tmin * z_tmin)
            + stats.trend_tmin * n_f;
        let shift_rain = stats.trend_rain * (n_f - p as f64 + i as f64);

        let tmax: Vec<f64> = source.tmax().iter().map(|v| v + shift_tmax).collect();
        let tmin: Vec<f64> = source.tmin().iter().map(|v| v + shift_tmin).collect();
        let rain: Vec<f64> = source
            .rain()
            .iter()
            .map(|v| (v + shift_rain).max(0.0))
            .collect();

        sim_blocks
            .push(YearBlock::new(i as i32, tmax, tmin, rain).expect("clamped rain is nonnegative"));
    }

    Ok(ClimatePath {
        city_index: stats.city_index,
        scenario: *scenario,
        blocks: sim_blocks,
        permutation,
        seed,
    })
}

/// Generates `n_paths` independent paths; path `p` is built from the child
/// seed of `(master_seed, p)`. Paths are evaluated in parallel but returned
/// in index order, identical to sequential evaluation.
pub fn generate_realization(
    blocks: &[YearBlock],
    stats: &CityClimateStats,
    scenario: &ClimateScenario,
    master_seed: u64,
    n_paths: usize,
    opts: &ClimateOptions,
) -> Result<Vec<ClimatePath>, ClimateError> {
    if n_paths == 0 {
        return Err(ClimateError::NoPaths);
    }
    validate_inputs(blocks, stats)?;
    (0..n_paths)
        .into_par_iter()
        .map(|p| {
            build_climate_path(
                blocks,
                stats,
                scenario,
                child_seed(master_seed, p as u64),
                opts,
            )
        })
        .collect()
}
