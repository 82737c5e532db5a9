//! Deterministic Monte-Carlo engine for corn farm income forecasts.
//!
//! The pipeline runs from historical daily weather and county corn yields to
//! per-scenario income reports:
//!
//! 1. [`ingest`] parses and normalizes daily weather, yield, and market CSVs,
//!    fills observation gaps, and slices the record into 365-day year blocks.
//! 2. [`trends`] estimates per-city historical climate trends and variances
//!    from the annual means of those blocks.
//! 3. [`climate`] generates block-bootstrap climate paths under a warming
//!    scenario, with seeded, reproducible randomness.
//! 4. [`agronomy`] derives rainfall-driven growing seasons, accumulates corn
//!    heat units, and fits/projects the yield model.
//! 5. [`stats`] fits generalized extreme value distributions to the simulated
//!    yield ensembles and measures their stability across realizations.
//! 6. [`econ`] converts yields into farm income and income-variation reports.
//!
//! Every random decision flows from a single master seed through documented
//! [`seed`] mixing, so identical inputs and seeds reproduce identical output.

pub mod agronomy;
pub mod climate;
pub mod econ;
pub mod ingest;
pub mod optim;
pub mod seed;
pub mod stats;
pub mod trends;

/// Length of the historical record and of every simulated horizon, in years.
pub const HISTORY_YEARS: usize = 49;

/// Days per year block; February 29 is dropped on ingest.
pub const DAYS_PER_YEAR: usize = 365;
