use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset};
use crate::fleet::{Category, CcgId, Incident};

pub const DEFAULT_SAMPLE_SIZE: usize = 100;

/// Calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthKey {
    pub year: i32,
    pub month: u32,
}

impl MonthKey {
    pub fn of_timestamp(secs: i64) -> Self {
        let dt = DateTime::from_timestamp(secs, 0).unwrap_or_default();
        Self {
            year: dt.year(),
            month: dt.month(),
        }
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// `self` plus `n` months.
    pub fn advance(self, n: u32) -> Self {
        (0..n).fold(self, |m, _| m.next())
    }
}

impl fmt::Display for MonthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionName {
    OneMonthOneCcg,
    TwelveMonthsOneCcg,
    OneMonthAllCcgs,
    TwelveMonthsAllCcgs,
}

impl ConditionName {
    pub const ALL: [ConditionName; 4] = [
        ConditionName::OneMonthOneCcg,
        ConditionName::TwelveMonthsOneCcg,
        ConditionName::OneMonthAllCcgs,
        ConditionName::TwelveMonthsAllCcgs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionName::OneMonthOneCcg => "1M-1C",
            ConditionName::TwelveMonthsOneCcg => "12M-1C",
            ConditionName::OneMonthAllCcgs => "1M-nC",
            ConditionName::TwelveMonthsAllCcgs => "12M-nC",
        }
    }

    pub fn months(&self) -> u32 {
        match self {
            ConditionName::OneMonthOneCcg | ConditionName::OneMonthAllCcgs => 1,
            _ => 12,
        }
    }

    pub fn single_ccg(&self) -> bool {
        matches!(
            self,
            ConditionName::OneMonthOneCcg | ConditionName::TwelveMonthsOneCcg
        )
    }
}

impl fmt::Display for ConditionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                format!("unknown condition `{s}` (expected 1M-1C, 12M-1C, 1M-nC or 12M-nC)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CategoryFilter {
    /// A_red1 and A_red2.
    #[default]
    CategoryA,
    All,
}

impl CategoryFilter {
    pub fn accepts(&self, c: Category) -> bool {
        match self {
            CategoryFilter::CategoryA => c.is_category_a(),
            CategoryFilter::All => true,
        }
    }
}

/// A temporal and geographic range plus sampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCondition {
    pub name: ConditionName,
    /// Inclusive month range.
    pub first_month: MonthKey,
    pub last_month: MonthKey,
    /// `None` admits every CCG.
    pub ccgs: Option<BTreeSet<CcgId>>,
    pub sample_size: usize,
    pub category_filter: CategoryFilter,
    pub seed: u64,
}

impl ExperimentCondition {
    /// Derives the ranges for `name` from the data.
    ///
    /// The period starts at the first month containing a matching incident.
    /// Single-CCG conditions use the CCG with the most matching incidents in
    /// that month, ties going to the smaller id.
    pub fn resolve(name: ConditionName, dataset: &Dataset, seed: u64) -> Result<Self, DataError> {
        let filter = CategoryFilter::default();
        let first_month = dataset
            .incidents()
            .iter()
            .filter(|i| filter.accepts(i.category))
            .map(|i| MonthKey::of_timestamp(i.call_time))
            .min()
            .ok_or(DataError::Shortfall {
                needed: DEFAULT_SAMPLE_SIZE,
                available: 0,
            })?;
        let ccgs = if name.single_ccg() {
            let mut counts: BTreeMap<CcgId, usize> = BTreeMap::new();
            for inc in dataset.incidents() {
                if filter.accepts(inc.category)
                    && MonthKey::of_timestamp(inc.call_time) == first_month
                {
                    *counts.entry(inc.ccg).or_default() += 1;
                }
            }
            let busiest = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&c, _)| c)
                .expect("first month has a matching incident");
            Some(BTreeSet::from([busiest]))
        } else {
            None
        };
        Ok(Self {
            name,
            first_month,
            last_month: first_month.advance(name.months() - 1),
            ccgs,
            sample_size: DEFAULT_SAMPLE_SIZE,
            category_filter: filter,
            seed,
        })
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.sample_size < 1 {
            return Err(DataError::Validation(
                "sample_size must be at least 1".into(),
            ));
        }
        if self.last_month < self.first_month {
            return Err(DataError::Validation(format!(
                "empty month range {}..{}",
                self.first_month, self.last_month
            )));
        }
        if self.ccgs.as_ref().is_some_and(|c| c.is_empty()) {
            return Err(DataError::Validation("empty CCG set".into()));
        }
        Ok(())
    }

    pub fn matches(&self, inc: &Incident) -> bool {
        let month = MonthKey::of_timestamp(inc.call_time);
        self.category_filter.accepts(inc.category)
            && (self.first_month..=self.last_month).contains(&month)
            && self.ccgs.as_ref().is_none_or(|c| c.contains(&inc.ccg))
    }
}

/// Uniform sample without replacement of the incidents matching `cond`,
/// returned in id order.
pub fn sample_condition(
    dataset: &Dataset,
    cond: &ExperimentCondition,
) -> Result<Vec<Incident>, DataError> {
    cond.validate()?;
    let population: Vec<&Incident> = dataset
        .incidents()
        .iter()
        .filter(|i| cond.matches(i))
        .collect();
    if population.len() < cond.sample_size {
        return Err(DataError::Shortfall {
            needed: cond.sample_size,
            available: population.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cond.seed);
    let mut picked =
        rand::seq::index::sample(&mut rng, population.len(), cond.sample_size).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|ix| population[ix].clone())
        .collect())
}
