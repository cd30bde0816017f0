//! Evaluation statistics and comparison reports.
//!
//! All two-sample tests use the `a − b` convention: a positive statistic
//! means `a` has the larger mean. Reports pass historical travel times as
//! `a` and auction travel times as `b`.

mod benchmark;
mod report;
pub mod special;

pub use benchmark::{
    run_benchmark, write_benchmark, write_journeys, BenchmarkError, BenchmarkJourney,
    BenchmarkReport,
};
pub use report::{
    build_report, read_reports, write_distribution, write_reports, ComparisonReport,
    ExclusionTally, PairedOutcome, ReportOptions, TestVariant,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("empty sample")]
    Empty,
    #[error("need at least {needed} paired incidents, got {got}")]
    InsufficientPairs { needed: usize, got: usize },
    #[error("non-finite value in sample")]
    NonFinite,
}

/// Result of a t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-tailed p-value.
    pub p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n − 1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn check_sample(xs: &[f64], name: &str) -> Result<f64, StatsError> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if xs.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "sample {name} has {} value(s), need at least 2",
            xs.len()
        )));
    }
    let var = variance(xs);
    if var <= 0.0 {
        return Err(StatsError::Degenerate(format!(
            "sample {name} has zero variance"
        )));
    }
    Ok(var)
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    let va = check_sample(a, "a")? / a.len() as f64;
    let vb = check_sample(b, "b")? / b.len() as f64;
    let se2 = va + vb;
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    Ok(TTest {
        t,
        df,
        p: special::student_t_two_tailed(t, df),
    })
}

/// Student's pooled-variance t-test.
pub fn student_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    let va = check_sample(a, "a")?;
    let vb = check_sample(b, "b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let t = (mean(a) - mean(b)) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TTest {
        t,
        df,
        p: special::student_t_two_tailed(t, df),
    })
}

/// Paired t-test on `a[i] − b[i]`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::Degenerate(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let var = check_sample(&d, "a - b")?;
    let n = d.len() as f64;
    let t = mean(&d) / (var / n).sqrt();
    let df = n - 1.0;
    Ok(TTest {
        t,
        df,
        p: special::student_t_two_tailed(t, df),
    })
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// First Wasserstein distance between the empirical distributions of `a` and `b`.
///
/// Equal sizes use the mean absolute difference of the sorted samples;
/// otherwise `∫ |F_a(x) − F_b(x)| dx` is integrated exactly over the merged
/// support, which equals the quantile-function form.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let a = sorted(a);
    let b = sorted(b);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }

    let mut all: Vec<f64> = a.iter().chain(&b).copied().collect();
    all.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut total = 0.0;
    for w in all.windows(2) {
        while ia < a.len() && a[ia] <= w[0] {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= w[0] {
            ib += 1;
        }
        total += (ia as f64 / na - ib as f64 / nb).abs() * (w[1] - w[0]);
    }
    Ok(total)
}

/// Percentage of pairs where the auction chose a different vehicle.
pub fn choice_difference_pct(differs: &[bool]) -> Result<f64, StatsError> {
    if differs.is_empty() {
        return Err(StatsError::Empty);
    }
    let count = differs.iter().filter(|&&d| d).count();
    Ok(100.0 * count as f64 / differs.len() as f64)
}
