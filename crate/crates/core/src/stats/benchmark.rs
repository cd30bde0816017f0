//! Observed journey times against both routing profiles.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{mean, wasserstein_1d, StatsError};
use crate::data::{DataError, Dataset};
use crate::fleet::IncidentId;
use crate::roadnet::{estimate_travel_time, RoadGraph, VehicleClass};

#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkJourney {
    pub incident_id: IncidentId,
    pub observed_s: f64,
    pub emergency_s: f64,
    pub civilian_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub sample: usize,
    pub n: usize,
    /// Journeys with no route under one of the profiles.
    pub excluded: usize,
    pub mean_observed_s: f64,
    pub mean_emergency_s: f64,
    pub mean_civilian_s: f64,
    pub w1_emergency_s: f64,
    pub w1_civilian_s: f64,
}

/// Re-routes `sample` randomly chosen historical journeys under the
/// emergency and civilian profiles, departing at the recorded dispatch time,
/// and compares each with the observed travel times.
pub fn run_benchmark(
    dataset: &Dataset,
    graph: &RoadGraph,
    sample: usize,
    seed: u64,
) -> Result<(BenchmarkReport, Vec<BenchmarkJourney>), BenchmarkError> {
    let population: Vec<_> = dataset.first_responses().values().collect();
    if sample == 0 || population.len() < sample {
        return Err(DataError::Shortfall {
            needed: sample.max(1),
            available: population.len(),
        }
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, population.len(), sample).into_vec();
    picked.sort_unstable();

    let routed: Vec<Option<BenchmarkJourney>> = picked
        .par_iter()
        .map(|&ix| {
            let r = population[ix];
            let inc = dataset.incident(r.incident_id)?;
            let t = r.dispatch_time as f64;
            let time = |class| {
                estimate_travel_time(graph, &r.dispatch_point, &inc.position, t, class).ok()
            };
            Some(BenchmarkJourney {
                incident_id: r.incident_id,
                observed_s: r.observed_travel_time_s,
                emergency_s: time(VehicleClass::Emergency)?,
                civilian_s: time(VehicleClass::Civilian)?,
            })
        })
        .collect();
    let journeys: Vec<BenchmarkJourney> = routed.into_iter().flatten().collect();
    if journeys.is_empty() {
        return Err(StatsError::Empty.into());
    }

    let observed: Vec<f64> = journeys.iter().map(|j| j.observed_s).collect();
    let emergency: Vec<f64> = journeys.iter().map(|j| j.emergency_s).collect();
    let civilian: Vec<f64> = journeys.iter().map(|j| j.civilian_s).collect();
    let report = BenchmarkReport {
        seed,
        sample,
        n: journeys.len(),
        excluded: sample - journeys.len(),
        mean_observed_s: mean(&observed),
        mean_emergency_s: mean(&emergency),
        mean_civilian_s: mean(&civilian),
        w1_emergency_s: wasserstein_1d(&observed, &emergency)?,
        w1_civilian_s: wasserstein_1d(&observed, &civilian)?,
    };
    Ok((report, journeys))
}

pub fn write_benchmark<W: Write>(out: W, report: &BenchmarkReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(report)?;
    w.flush()?;
    Ok(())
}

pub fn write_journeys<W: Write>(out: W, journeys: &[BenchmarkJourney]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for j in journeys {
        w.serialize(j)?;
    }
    w.flush()?;
    Ok(())
}
