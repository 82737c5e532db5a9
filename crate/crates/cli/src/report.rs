//! Report consolidation: stability tables per scenario and the income
//! variation table, rebuilt purely from the simulate outputs.

use std::collections::BTreeMap;
use std::path::Path;

use cornsim::stats::{stability_report, GevParams};

use crate::{csvio, CliError};

#[derive(Debug)]
pub struct ReportSummary {
    pub stability_files: usize,
    pub income_variations: usize,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<String>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    Ok(names)
}

/// `gev_{city}_{w}.csv` → (city slug, w); the scenario is the digit block
/// after the last underscore, so slugs may themselves contain underscores.
fn parse_gev_name(name: &str) -> Option<(String, u8)> {
    let stem = name.strip_prefix("gev_")?.strip_suffix(".csv")?;
    let (slug, w) = stem.rsplit_once('_')?;
    if slug.is_empty() {
        return None;
    }
    Some((slug.to_string(), w.parse().ok()?))
}

fn parse_income_name(name: &str) -> Option<u8> {
    name.strip_prefix("income_")?
        .strip_suffix(".csv")?
        .parse()
        .ok()
}

pub fn run_report(output_dir: &Path) -> Result<ReportSummary, CliError> {
    let names = read_dir_sorted(output_dir)?;
    let gev_files: Vec<(String, String, u8)> = names
        .iter()
        .filter_map(|n| parse_gev_name(n).map(|(slug, w)| (n.clone(), slug, w)))
        .collect();
    let income_files: Vec<(String, u8)> = names
        .iter()
        .filter_map(|n| parse_income_name(n).map(|w| (n.clone(), w)))
        .collect();

    if gev_files.is_empty() || income_files.is_empty() {
        let mut missing = Vec::new();
        if gev_files.is_empty() {
            missing.push("gev_{city}_{W}.csv");
        }
        if income_files.is_empty() {
            missing.push("income_{W}.csv");
        }
        return Err(CliError::Data(format!(
            "missing intermediate files in {}: {}; rerun `cornsim simulate`",
            output_dir.display(),
            missing.join(", ")
        )));
    }

    let gev_scenarios: Vec<u8> = {
        let mut ws: Vec<u8> = gev_files.iter().map(|(_, _, w)| *w).collect();
        ws.sort_unstable();
        ws.dedup();
        ws
    };
    for &w in &gev_scenarios {
        if !income_files.iter().any(|(_, iw)| *iw == w) {
            return Err(CliError::Data(format!(
                "missing intermediate file income_{w}.csv in {}; rerun `cornsim simulate`",
                output_dir.display()
            )));
        }
    }

    // Stability per scenario, cities sorted by slug.
    let mut stability_files = 0usize;
    for &w in &gev_scenarios {
        let mut rows = Vec::new();
        for (name, slug, _) in gev_files.iter().filter(|(_, _, fw)| *fw == w) {
            let path = output_dir.join(name);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            let parsed = csvio::parse_gev_csv(&text, name)?;

            let mut by_realization: BTreeMap<usize, Vec<(usize, GevParams)>> = BTreeMap::new();
            for (year, realization, params) in parsed {
                by_realization
                    .entry(realization)
                    .or_default()
                    .push((year, params));
            }
            let realizations: Vec<Vec<GevParams>> = by_realization
                .into_values()
                .map(|mut years| {
                    years.sort_by_key(|(year, _)| *year);
                    years.into_iter().map(|(_, p)| p).collect()
                })
                .collect();
            let report = stability_report(&realizations)
                .map_err(|e| CliError::Numeric(format!("{name}: {e}")))?;
            rows.push((slug.clone(), report));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let path = output_dir.join(format!("stability_{w}.csv"));
        std::fs::write(&path, csvio::stability_csv(&rows))
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        stability_files += 1;
    }

    // Income variation: last-year minus first-year mean income per (city, W).
    let mut variation_rows: Vec<(String, u8, f64)> = Vec::new();
    for (name, w) in &income_files {
        let path = output_dir.join(name);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let rows = csvio::parse_income_csv(&text, name)?;
        let mut per_city: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
        for (slug, year, income) in rows {
            per_city.entry(slug).or_default().insert(year, income);
        }
        for (slug, by_year) in per_city {
            let first = by_year.values().next().copied().unwrap_or(0.0);
            let last = by_year.values().next_back().copied().unwrap_or(0.0);
            variation_rows.push((slug, *w, last - first));
        }
    }
    variation_rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let n_variations = variation_rows.len();
    let path = output_dir.join("income_variation.csv");
    std::fs::write(&path, csvio::income_variation_csv(&variation_rows))
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;

    Ok(ReportSummary {
        stability_files,
        income_variations: n_variations,
    })
}
