use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    choice_difference_pct, mean, paired_t_test, student_t_test, welch_t_test, StatsError, TTest,
};
use crate::fleet::{IncidentId, VehicleId};

/// One incident's HIST and AUCT figures.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedOutcome {
    pub incident: IncidentId,
    pub hist_vehicle: VehicleId,
    pub auct_vehicle: VehicleId,
    pub hist_travel_s: f64,
    pub auct_travel_s: f64,
    pub hist_response_s: f64,
    pub auct_response_s: f64,
}

impl PairedOutcome {
    pub fn choice_differs(&self) -> bool {
        self.hist_vehicle != self.auct_vehicle
    }
}

/// Why incidents left a condition sample, by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExclusionTally {
    /// Historical vehicle not idle inside the neighbourhood.
    pub hist_outside: usize,
    pub no_candidate: usize,
    pub no_response: usize,
    pub unroutable: usize,
    pub other: usize,
}

impl ExclusionTally {
    pub fn total(&self) -> usize {
        self.hist_outside + self.no_candidate + self.no_response + self.unroutable + self.other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestVariant {
    /// Unequal variances, Welch–Satterthwaite df.
    #[default]
    Welch,
    /// Pooled variance.
    Student,
}

impl TestVariant {
    pub fn run(&self, a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
        match self {
            TestVariant::Welch => welch_t_test(a, b),
            TestVariant::Student => student_t_test(a, b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Engine or profile label, e.g. `emergency`.
    pub profile: String,
    pub test: TestVariant,
    /// Unknown when rebuilding from a decision log alone.
    pub exclusions: Option<ExclusionTally>,
    pub hist_distribution: Option<String>,
    pub auct_distribution: Option<String>,
}

/// One row of the HIST vs AUCT comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub condition: String,
    pub profile: String,
    pub test: TestVariant,
    pub n: usize,
    pub excluded_count: Option<usize>,
    pub excluded_hist_outside: Option<usize>,
    pub excluded_no_candidate: Option<usize>,
    pub excluded_no_response: Option<usize>,
    pub excluded_unroutable: Option<usize>,
    pub excluded_other: Option<usize>,
    pub mean_hist_s: f64,
    pub mean_auct_s: f64,
    pub t_statistic: f64,
    pub df: f64,
    /// Two-tailed.
    pub p_value: f64,
    /// Paired test on per-incident differences; not part of the original
    /// table, empty when degenerate.
    pub paired_t_statistic: Option<f64>,
    pub paired_p_value: Option<f64>,
    pub pct_choice_differs: f64,
    pub mean_hist_response_s: f64,
    pub mean_auct_response_s: f64,
    pub hist_distribution: Option<String>,
    pub auct_distribution: Option<String>,
}

/// Compares HIST (`a`) against AUCT (`b`) travel times.
pub fn build_report(
    condition: &str,
    outcomes: &[PairedOutcome],
    opts: &ReportOptions,
) -> Result<ComparisonReport, StatsError> {
    if outcomes.is_empty() {
        return Err(StatsError::InsufficientPairs { needed: 2, got: 0 });
    }
    let hist: Vec<f64> = outcomes.iter().map(|o| o.hist_travel_s).collect();
    let auct: Vec<f64> = outcomes.iter().map(|o| o.auct_travel_s).collect();
    let hist_resp: Vec<f64> = outcomes.iter().map(|o| o.hist_response_s).collect();
    let auct_resp: Vec<f64> = outcomes.iter().map(|o| o.auct_response_s).collect();
    let differs: Vec<bool> = outcomes.iter().map(PairedOutcome::choice_differs).collect();

    let test = opts.test.run(&hist, &auct)?;
    let paired = paired_t_test(&hist, &auct).ok();
    let ex = opts.exclusions;
    Ok(ComparisonReport {
        condition: condition.to_owned(),
        profile: opts.profile.clone(),
        test: opts.test,
        n: outcomes.len(),
        excluded_count: ex.map(|e| e.total()),
        excluded_hist_outside: ex.map(|e| e.hist_outside),
        excluded_no_candidate: ex.map(|e| e.no_candidate),
        excluded_no_response: ex.map(|e| e.no_response),
        excluded_unroutable: ex.map(|e| e.unroutable),
        excluded_other: ex.map(|e| e.other),
        mean_hist_s: mean(&hist),
        mean_auct_s: mean(&auct),
        t_statistic: test.t,
        df: test.df,
        p_value: test.p,
        paired_t_statistic: paired.map(|p| p.t),
        paired_p_value: paired.map(|p| p.p),
        pct_choice_differs: choice_difference_pct(&differs)?,
        mean_hist_response_s: mean(&hist_resp),
        mean_auct_response_s: mean(&auct_resp),
        hist_distribution: opts.hist_distribution.clone(),
        auct_distribution: opts.auct_distribution.clone(),
    })
}

pub fn write_reports<W: Write>(out: W, reports: &[ComparisonReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports(path: impl AsRef<Path>) -> csv::Result<Vec<ComparisonReport>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

/// Writes `incident_id,travel_time_s` rows for one policy.
pub fn write_distribution(
    path: impl AsRef<Path>,
    values: impl IntoIterator<Item = (IncidentId, f64)>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["incident_id", "travel_time_s"])?;
    for (id, t) in values {
        w.write_record([id.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
