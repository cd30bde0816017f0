//! Road network model and time-dependent routing.
//!
//! A [`RoadGraph`] is a directed graph on a planar metre grid. Every edge
//! carries two hour-of-week speed profiles, one for emergency vehicles and
//! one for civilian traffic, and an access rule. Routes are planned with a
//! label-setting search where each edge's speed is fixed by the hour of
//! week at which the vehicle enters it (frozen-link travel time).

mod graph;
mod io;
mod route;

pub use graph::{GraphBuilder, RoadEdge, RoadGraph, RoadNode};
pub use io::{load_graph, save_graph, EDGES_FILE, NODES_FILE, PROFILES_FILE};
pub(crate) use route::route_between;
pub use route::{estimate_travel_time, plan_route, position_along_route, Route};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

/// Number of hourly slots in a speed profile.
pub const HOURS_PER_WEEK: usize = 168;

/// Upper bound on any profile speed, in metres per second.
pub const MAX_SPEED_MPS: f64 = 60.0;

/// A planar grid coordinate in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GridPoint {
    pub easting: f64,
    pub northing: f64,
}

impl GridPoint {
    pub const fn new(easting: f64, northing: f64) -> Self {
        Self { easting, northing }
    }

    pub fn distance(&self, other: &GridPoint) -> f64 {
        (self.easting - other.easting).hypot(self.northing - other.northing)
    }

    pub fn distance_sq(&self, other: &GridPoint) -> f64 {
        let de = self.easting - other.easting;
        let dn = self.northing - other.northing;
        de * de + dn * dn
    }

    /// Linear interpolation; `frac` in `[0, 1]`.
    pub fn lerp(&self, other: &GridPoint, frac: f64) -> GridPoint {
        GridPoint {
            easting: self.easting + (other.easting - self.easting) * frac,
            northing: self.northing + (other.northing - self.northing) * frac,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.easting.is_finite()
            && self.northing.is_finite()
            && self.easting >= 0.0
            && self.northing >= 0.0
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.easting, self.northing)
    }
}

/// External node identifier as it appears in `nodes.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which speed profile and access rules a route is planned under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Emergency,
    Civilian,
}

impl VehicleClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            VehicleClass::Emergency => "emergency",
            VehicleClass::Civilian => "civilian",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emergency" => Ok(VehicleClass::Emergency),
            "civilian" => Ok(VehicleClass::Civilian),
            other => Err(format!("unknown vehicle class `{other}`")),
        }
    }
}

/// Edge access rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Access {
    All,
    EmergencyOnly,
}

impl Access {
    pub fn permits(&self, class: VehicleClass) -> bool {
        match self {
            Access::All => true,
            Access::EmergencyOnly => class == VehicleClass::Emergency,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Access::All => "ALL",
            Access::EmergencyOnly => "EMERGENCY",
        }
    }
}

/// Hourly speed table, Monday 00:00 first.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub id: String,
    pub speeds: [f64; HOURS_PER_WEEK],
}

impl SpeedProfile {
    pub fn constant(id: impl Into<String>, speed: f64) -> Self {
        Self {
            id: id.into(),
            speeds: [speed; HOURS_PER_WEEK],
        }
    }

    pub fn speed_at(&self, time: f64) -> f64 {
        self.speeds[hour_of_week(time)]
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(0.0, f64::max)
    }
}

/// Hour-of-week slot (0 = Monday 00:00 UTC) for a Unix timestamp in seconds.
pub fn hour_of_week(time: f64) -> usize {
    // 1970-01-01 was a Thursday, 72 hours after the start of its week.
    let hours = (time / 3600.0).floor() as i64;
    (hours + 72).rem_euclid(HOURS_PER_WEEK as i64) as usize
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: u64,
        message: String,
    },
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("edge references unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("duplicate profile id `{0}`")]
    DuplicateProfile(String),
    #[error("edge {from} -> {to} has non-positive length {length}")]
    NonPositiveLength {
        from: NodeId,
        to: NodeId,
        length: f64,
    },
    #[error("profile `{profile}` hour {hour}: speed {speed} outside (0, {max}] m/s", max = MAX_SPEED_MPS)]
    InvalidSpeed {
        profile: String,
        hour: usize,
        speed: f64,
    },
    #[error("node {0} has an invalid position")]
    InvalidPosition(NodeId),
    #[error("graph has no nodes")]
    Empty,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("no {class} route from node {origin} to node {dest}")]
    NoRoute {
        origin: NodeId,
        dest: NodeId,
        class: VehicleClass,
    },
}
