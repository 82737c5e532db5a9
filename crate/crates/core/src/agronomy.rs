//! Growing seasons from rainfall rules, corn heat unit accumulation, and the
//! historical yield regression with its projection to simulated years.

use thiserror::Error;

use crate::ingest::YearBlock;
use crate::DAYS_PER_YEAR;

/// Planting anchor: day-of-year of June 1 on the 365-day no-leap calendar.
pub const PLANTING_ANCHOR: usize = 152;
/// Harvest anchor: day-of-year of October 25 on the 365-day calendar.
pub const HARVEST_ANCHOR: usize = 298;
/// Half-width of the search window around each anchor, in days.
pub const SEASON_WINDOW: usize = 15;

#[derive(Debug, Error)]
pub enum AgronomyError {
    #[error("need at least {min} observations to fit the yield model, found {found}")]
    TooFewPoints { min: usize, found: usize },
    #[error("input lengths differ: years {years}, chu {chu}, yields {yields}")]
    LengthMismatch {
        years: usize,
        chu: usize,
        yields: usize,
    },
    #[error("rank-deficient design: {0}")]
    RankDeficient(&'static str),
    #[error("{what} day {day} outside its window [{lo}, {hi}]")]
    DayOutsideWindow {
        what: &'static str,
        day: usize,
        lo: usize,
        hi: usize,
    },
    #[error("harvest day {harvest} does not follow planting day {planting}")]
    SeasonOrder { planting: usize, harvest: usize },
}

/// Flags steering the season rules and CHU accumulation.
#[derive(Debug, Clone, Copy)]
pub struct AgronomyOptions {
    /// Floor negative daily CHU at zero before summation (agronomic
    /// convention). Off by default: the raw summand may go negative on cold
    /// days.
    pub chu_floor_zero: bool,
    /// Rainfall above this is "strictly positive" for planting; at or below
    /// it counts as a zero-rain day for harvest. 0 mm by default.
    pub rain_threshold_mm: f64,
}

impl Default for AgronomyOptions {
    fn default() -> Self {
        Self {
            chu_floor_zero: false,
            rain_threshold_mm: 0.0,
        }
    }
}

/// Planting-to-harvest interval of one simulated or historical year.
/// Days are 1-based day-of-year indices on the 365-day calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowingSeason {
    pub year_index: usize,
    pub planting_day: usize,
    pub harvest_day: usize,
}

impl GrowingSeason {
    pub fn new(
        year_index: usize,
        planting_day: usize,
        harvest_day: usize,
    ) -> Result<Self, AgronomyError> {
        let check = |what, day, anchor| {
            let (lo, hi) = (anchor - SEASON_WINDOW, anchor + SEASON_WINDOW);
            if day < lo || day > hi {
                Err(AgronomyError::DayOutsideWindow { what, day, lo, hi })
            } else {
                Ok(())
            }
        };
        check("planting", planting_day, PLANTING_ANCHOR)?;
        check("harvest", harvest_day, HARVEST_ANCHOR)?;
        if harvest_day <= planting_day {
            return Err(AgronomyError::SeasonOrder {
                planting: planting_day,
                harvest: harvest_day,
            });
        }
        Ok(Self {
            year_index,
            planting_day,
            harvest_day,
        })
    }

    pub fn length_days(&self) -> usize {
        self.harvest_day - self.planting_day + 1
    }
}

/// Day after the first triple of consecutive days satisfying `pred` whose
/// triple lies within the window and completes strictly before the fallback
/// day `anchor + 15`; the fallback day otherwise.
fn season_boundary(rain: &[f64], anchor: usize, pred: impl Fn(f64) -> bool) -> usize {
    let window_start = anchor - SEASON_WINDOW;
    let fallback = anchor + SEASON_WINDOW;
    for last in window_start + 2..fallback {
        if pred(rain[last - 3]) && pred(rain[last - 2]) && pred(rain[last - 1]) {
            return last + 1;
        }
    }
    fallback
}

/// Applies the rainfall rules to one year of daily rain.
///
/// Planting starts the day after the first triple of consecutive
/// strictly-positive-rain days around the June 1 anchor, defaulting to
/// anchor+15; harvest analogously with zero-rain triples around the
/// October 25 anchor.
pub fn determine_growing_season(
    rain: &[f64],
    year_index: usize,
    options: &AgronomyOptions,
) -> GrowingSeason {
    assert_eq!(
        rain.len(),
        DAYS_PER_YEAR,
        "season rules need 365 daily rain values"
    );
    let threshold = options.rain_threshold_mm;
    let planting_day = season_boundary(rain, PLANTING_ANCHOR, |r| r > threshold);
    let harvest_day = season_boundary(rain, HARVEST_ANCHOR, |r| r <= threshold);
    GrowingSeason::new(year_index, planting_day, harvest_day)
        .expect("boundaries are inside their windows by construction")
}

/// Daily corn heat units from the day's temperature extremes:
/// `½·[1.8(Tmin − 4.4) + 3.3(Tmax − 10) − 0.084(Tmax − 10)²]`.
///
/// Not floored at zero; see [`AgronomyOptions::chu_floor_zero`].
pub fn daily_chu(tmin: f64, tmax: f64) -> f64 {
    let dx = tmax - 10.0;
    0.5 * (1.8 * (tmin - 4.4) + 3.3 * dx - 0.084 * dx * dx)
}

/// Sum of daily CHU over the growing season, planting through harvest
/// inclusive.
pub fn season_chu(block: &YearBlock, season: &GrowingSeason, floor_zero: bool) -> f64 {
    let lo = season.planting_day - 1;
    let hi = season.harvest_day;
    block.tmin()[lo..hi]
        .iter()
        .zip(&block.tmax()[lo..hi])
        .map(|(&tn, &tx)| {
            let h = daily_chu(tn, tx);
            if floor_zero {
                h.max(0.0)
            } else {
                h
            }
        })
        .sum()
}

/// Per-city CHU values keyed by year label.
#[derive(Debug, Clone, PartialEq)]
pub struct ChuSeries {
    pub city_index: usize,
    pub values: Vec<(i32, f64)>,
}

/// Historical yield regression `Y = C0 + C1·h + C2·H` and its goodness of
/// fit (R², in [0, 1] up to rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldModel {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub gof: f64,
}

/// Least-squares fit of yields on year index and seasonal CHU.
///
/// Solved on centered variables for conditioning; errors when the design is
/// rank deficient (constant CHU, constant year index, or collinear columns).
pub fn fit_yield_model(
    year_indices: &[f64],
    chu: &[f64],
    yields: &[f64],
) -> Result<YieldModel, AgronomyError> {
    let n = year_indices.len();
    if chu.len() != n || yields.len() != n {
        return Err(AgronomyError::LengthMismatch {
            years: n,
            chu: chu.len(),
            yields: yields.len(),
        });
    }
    if n < 4 {
        return Err(AgronomyError::TooFewPoints { min: 4, found: n });
    }

    let h_bar = crate::stats::mean(year_indices);
    let g_bar = crate::stats::mean(chu);
    let y_bar = crate::stats::mean(yields);

    let (mut s_hh, mut s_gg, mut s_hg, mut s_hy, mut s_gy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let dh = year_indices[k] - h_bar;
        let dg = chu[k] - g_bar;
        let dy = yields[k] - y_bar;
        s_hh += dh * dh;
        s_gg += dg * dg;
        s_hg += dh * dg;
        s_hy += dh * dy;
        s_gy += dg * dy;
    }

    if s_hh == 0.0 {
        return Err(AgronomyError::RankDeficient("year indices are constant"));
    }
    if s_gg == 0.0 {
        return Err(AgronomyError::RankDeficient("CHU values are constant"));
    }
    let det = s_hh * s_gg - s_hg * s_hg;
    if det.abs() <= 1e-12 * s_hh * s_gg {
        return Err(AgronomyError::RankDeficient(
            "year index and CHU columns are collinear",
        ));
    }

    let c1 = (s_hy * s_gg - s_gy * s_hg) / det;
    let c2 = (s_gy * s_hh - s_hy * s_hg) / det;
    let c0 = y_bar - c1 * h_bar - c2 * g_bar;

    let sst: f64 = yields.iter().map(|y| (y - y_bar).powi(2)).sum();
    let sse: f64 = (0..n)
        .map(|k| (yields[k] - (c0 + c1 * year_indices[k] + c2 * chu[k])).powi(2))
        .sum();
    let gof = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };

    Ok(YieldModel { c0, c1, c2, gof })
}

/// A projected yield; `clamped` marks a negative raw projection floored at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedYield {
    pub t_per_ha: f64,
    pub clamped: bool,
}

/// Projects yield for a simulated year from its seasonal CHU: `C0 + C2·H`.
/// The technology-trend term is deliberately excluded; negative projections
/// clamp to zero and are flagged for diagnostics.
pub fn project_yield(model: &YieldModel, h_chu: f64) -> ProjectedYield {
    let raw = model.c0 + model.c2 * h_chu;
    if raw < 0.0 {
        ProjectedYield {
            t_per_ha: 0.0,
            clamped: true,
        }
    } else {
        ProjectedYield {
            t_per_ha: raw,
            clamped: false,
        }
    }
}
