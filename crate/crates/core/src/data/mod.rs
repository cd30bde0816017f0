//! Record ingestion, experimental conditions and synthetic datasets.

mod condition;
mod records;
mod synth;

pub use condition::{
    sample_condition, CategoryFilter, ConditionName, ExperimentCondition, MonthKey,
    DEFAULT_SAMPLE_SIZE,
};
pub use records::{
    ingest, ingest_dir, write_dataset, Dataset, IncidentRecord, ResponseRecord, VehicleRecord,
    INCIDENTS_FILE, RESPONSES_FILE, VEHICLES_FILE,
};
pub use synth::{
    generate_synthetic, synthesize, GeneratorConfig, Manifest, SyntheticData, MANIFEST_FILE,
};

use std::path::PathBuf;

use crate::roadnet::{GraphError, GridPoint};

/// Grid precision that record coordinates are quantized to, in metres.
pub const GRID_PRECISION_M: f64 = 100.0;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: u64,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("response references unknown incident {0}")]
    OrphanResponse(u64),
    #[error("only {available} incidents match the condition, {needed} requested")]
    Shortfall { needed: usize, available: usize },
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DataError {
        let path = path.into();
        move |source| DataError::Io { path, source }
    }
}

/// Rounds each coordinate to the nearest multiple of 100 m, halves rounding up.
pub fn quantize_location(easting: f64, northing: f64) -> Result<GridPoint, DataError> {
    if !easting.is_finite() || !northing.is_finite() {
        return Err(DataError::Validation(format!(
            "non-finite coordinate ({easting}, {northing})"
        )));
    }
    let q = |x: f64| (x / GRID_PRECISION_M + 0.5).floor() * GRID_PRECISION_M;
    let p = GridPoint::new(q(easting) + 0.0, q(northing) + 0.0);
    if !p.is_valid() {
        return Err(DataError::Validation(format!(
            "coordinate ({easting}, {northing}) quantizes outside the grid"
        )));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(
            quantize_location(12345.6, 200.0).unwrap(),
            GridPoint::new(12300.0, 200.0)
        );
        assert_eq!(
            quantize_location(12350.0, 450.0).unwrap(),
            GridPoint::new(12400.0, 500.0)
        );
        let p = quantize_location(530_100.0, 181_900.0).unwrap();
        assert_eq!(quantize_location(p.easting, p.northing).unwrap(), p);
        assert_eq!(
            quantize_location(-10.0, 49.9).unwrap(),
            GridPoint::new(0.0, 0.0)
        );
        assert!(quantize_location(f64::NAN, 0.0).is_err());
        assert!(quantize_location(0.0, f64::INFINITY).is_err());
        assert!(quantize_location(-60.0, 0.0).is_err());
    }
}
