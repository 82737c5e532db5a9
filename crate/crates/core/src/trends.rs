//! Annual means, least-squares linear fits, and per-city historical climate
//! trends/variances feeding the path simulator.

use thiserror::Error;

use crate::ingest::YearBlock;
use crate::stats::{mean, sample_variance};
use crate::HISTORY_YEARS;

#[derive(Debug, Error)]
pub enum TrendsError {
    #[error("need at least {min} points for a linear fit, found {found}")]
    TooFewPoints { min: usize, found: usize },
    #[error("xs and ys lengths differ ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("singular design: xs are all equal")]
    ConstantXs,
    #[error("expected exactly {expected} year blocks, found {found}")]
    WrongBlockCount { expected: usize, found: usize },
}

/// Arithmetic means of the three weather variables over one 365-day block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnualMeans {
    pub tmax_mean: f64,
    pub tmin_mean: f64,
    pub rain_mean: f64,
}

/// Simple linear regression result, `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Per-city yearly trends (°C/yr, mm/yr) and variances (°C², mm²) of the
/// annual means over the 49-year historical record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityClimateStats {
    pub city_index: usize,
    pub trend_tmax: f64,
    pub trend_tmin: f64,
    pub trend_rain: f64,
    pub var_tmax: f64,
    pub var_tmin: f64,
    pub var_rain: f64,
}

pub fn annual_means(block: &YearBlock) -> AnnualMeans {
    AnnualMeans {
        tmax_mean: mean(block.tmax()),
        tmin_mean: mean(block.tmin()),
        rain_mean: mean(block.rain()),
    }
}

/// Ordinary least squares fit of `ys` on `xs`.
///
/// `r_squared = 1 − SSE/SST`, defined as 1 when the targets are constant
/// (SST = 0, the fit is exact). Errors on fewer than 3 points or constant xs.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, TrendsError> {
    if xs.len() != ys.len() {
        return Err(TrendsError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(TrendsError::TooFewPoints {
            min: 3,
            found: xs.len(),
        });
    }
    let x_bar = mean(xs);
    let y_bar = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TrendsError::ConstantXs);
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;

    let sst: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };

    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Estimates per-city trends and variances from exactly 49 year blocks.
///
/// Trends are the OLS slopes of the annual means against the year index
/// 1..=49; variances are the sample (n−1) variances of the same means.
pub fn estimate_city_climate_stats(
    blocks: &[YearBlock],
    city_index: usize,
) -> Result<CityClimateStats, TrendsError> {
    if blocks.len() != HISTORY_YEARS {
        return Err(TrendsError::WrongBlockCount {
            expected: HISTORY_YEARS,
            found: blocks.len(),
        });
    }
    let means: Vec<AnnualMeans> = blocks.iter().map(annual_means).collect();
    let year_indices: Vec<f64> = (1..=HISTORY_YEARS).map(|i| i as f64).collect();

    let tmax: Vec<f64> = means.iter().map(|m| m.tmax_mean).collect();
    let tmin: Vec<f64> = means.iter().map(|m| m.tmin_mean).collect();
    let rain: Vec<f64> = means.iter().map(|m| m.rain_mean).collect();

    Ok(CityClimateStats {
        city_index,
        trend_tmax: ols_fit(&year_indices, &tmax)?.slope,
        trend_tmin: ols_fit(&year_indices, &tmin)?.slope,
        trend_rain: ols_fit(&year_indices, &rain)?.slope,
        var_tmax: sample_variance(&tmax),
        var_tmin: sample_variance(&tmin),
        var_rain: sample_variance(&rain),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::YearBlock;
    use approx::assert_relative_eq;

    fn constant_block(year: i32, tmax: f64, tmin: f64, rain: f64) -> YearBlock {
        YearBlock::new(year, vec![tmax; 365], vec![tmin; 365], vec![rain; 365]).unwrap()
    }

    #[test]
    fn means_of_constant_block() {
        let m = annual_means(&constant_block(1970, 20.0, 8.0, 1.0));
        assert_relative_eq!(m.tmax_mean, 20.0);
        assert_relative_eq!(m.rain_mean, 1.0);
    }

    #[test]
    fn means_of_alternating_block() {
        // 183 days at 20 and 182 at 10; the direct summation oracle gives
        // (183*20 + 182*10)/365.
        let tmax: Vec<f64> = (0..365)
            .map(|d| if d % 2 == 0 { 20.0 } else { 10.0 })
            .collect();
        let block = YearBlock::new(1970, tmax, vec![5.0; 365], vec![0.0; 365]).unwrap();
        let expected = (183.0 * 20.0 + 182.0 * 10.0) / 365.0;
        assert_relative_eq!(annual_means(&block).tmax_mean, expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 15.0137, epsilon = 1e-4);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = ols_fit(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ols_matches_normal_equations_hand_oracle() {
        let fit = ols_fit(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_relative_eq!(fit.slope, 0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn ols_constant_targets_define_r_squared_one() {
        let fit = ols_fit(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_relative_eq!(fit.slope, 0.0);
        assert_relative_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn ols_rejects_constant_xs_and_short_input() {
        assert!(matches!(
            ols_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            TrendsError::ConstantXs
        ));
        assert!(matches!(
            ols_fit(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            TrendsError::TooFewPoints { .. }
        ));
    }

    #[test]
    fn ols_residuals_orthogonal_to_xs() {
        let xs: Vec<f64> = (1..=49).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x + (x * 1.7).sin()).collect();
        let fit = ols_fit(&xs, &ys).unwrap();
        let x_bar = mean(&xs);
        let dot: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - x_bar) * (y - (fit.slope * x + fit.intercept)))
            .sum();
        assert!(dot.abs() < 1e-9, "residual/x correlation {dot}");
    }

    fn ramp_blocks(slope_tmax: f64) -> Vec<YearBlock> {
        (1..=49)
            .map(|i| constant_block(1969 + i, 10.0 + slope_tmax * i as f64, 2.0, 1.5))
            .collect()
    }

    #[test]
    fn city_stats_recover_linear_ramp() {
        let stats = estimate_city_climate_stats(&ramp_blocks(0.1), 1).unwrap();
        assert_relative_eq!(stats.trend_tmax, 0.1, epsilon = 1e-12);
        assert_relative_eq!(stats.trend_tmin, 0.0, epsilon = 1e-12);
        assert_relative_eq!(stats.trend_rain, 0.0, epsilon = 1e-12);
        // Sample variance of an arithmetic progression with step s over n
        // terms is s²·n(n+1)/12.
        let expected_var = 0.1f64.powi(2) * 49.0 * 50.0 / 12.0;
        assert_relative_eq!(stats.var_tmax, expected_var, epsilon = 1e-9);
        assert_relative_eq!(stats.var_tmin, 0.0);
    }

    #[test]
    fn city_stats_on_identical_blocks_are_zero() {
        let blocks: Vec<YearBlock> = (0..49)
            .map(|i| constant_block(1970 + i, 18.0, 6.0, 2.0))
            .collect();
        let stats = estimate_city_climate_stats(&blocks, 3).unwrap();
        assert_eq!(
            (stats.trend_tmax, stats.trend_tmin, stats.trend_rain),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(
            (stats.var_tmax, stats.var_tmin, stats.var_rain),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn city_stats_require_49_blocks() {
        let blocks = ramp_blocks(0.1)[..48].to_vec();
        assert!(matches!(
            estimate_city_climate_stats(&blocks, 1).unwrap_err(),
            TrendsError::WrongBlockCount {
                expected: 49,
                found: 48
            }
        ));
    }

    #[test]
    fn brockville_level_trend_is_recovered() {
        // A ramp rising 0.0456 °C/yr (0.456 in tenths, the Brockville level)
        // comes back exactly as the fitted trend.
        let stats = estimate_city_climate_stats(&ramp_blocks(0.0456), 1).unwrap();
        assert_relative_eq!(stats.trend_tmax, 0.0456, epsilon = 1e-12);
    }

    #[test]
    fn fergus_level_trend_times_49_is_about_1_2_degrees() {
        // Realized warming over the record: trend × 49 ≈ 1.2 °C at the
        // Fergus level of 0.0246 °C/yr.
        let stats = estimate_city_climate_stats(&ramp_blocks(0.0246), 3).unwrap();
        assert_relative_eq!(stats.trend_tmax * 49.0, 1.2, epsilon = 0.01);
    }

    #[test]
    fn reversing_year_order_flips_trend_sign_keeps_variance() {
        let blocks = ramp_blocks(0.07);
        let mut reversed = blocks.clone();
        reversed.reverse();
        let fwd = estimate_city_climate_stats(&blocks, 1).unwrap();
        let rev = estimate_city_climate_stats(&reversed, 1).unwrap();
        assert_relative_eq!(fwd.trend_tmax, -rev.trend_tmax, epsilon = 1e-12);
        assert_relative_eq!(fwd.var_tmax, rev.var_tmax, epsilon = 1e-12);
    }
}
