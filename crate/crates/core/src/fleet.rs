//! Incidents, vehicles and the mission they form.
//!
//! The record data only says where a vehicle was when it completed an
//! assignment and where it was when next dispatched. Between those two
//! instants the vehicle is idle, and its position is reconstructed by
//! driving an emergency-class route from the first point to the second,
//! starting at the completion time and stopping on arrival.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::roadnet::{self, GridPoint, RoadGraph, RouteError, VehicleClass};

/// Default neighbourhood searched for idle vehicles, in square kilometres.
pub const DEFAULT_AREA_KM2: f64 = 20.0;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident($inner:ty)) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub $inner);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

id_type!(IncidentId(u64));
id_type!(VehicleId(u64));
id_type!(
    /// Administrative sub-region identifier.
    CcgId(u32)
);

/// Pre-2017 call categories. Category A is `ARed1` and `ARed2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    ARed1,
    ARed2,
    CGreen1,
    CGreen2,
    CGreen3,
    CGreen4,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::ARed1,
        Category::ARed2,
        Category::CGreen1,
        Category::CGreen2,
        Category::CGreen3,
        Category::CGreen4,
    ];

    pub fn is_category_a(&self) -> bool {
        matches!(self, Category::ARed1 | Category::ARed2)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::ARed1 => "A_red1",
            Category::ARed2 => "A_red2",
            Category::CGreen1 => "C_green1",
            Category::CGreen2 => "C_green2",
            Category::CGreen3 => "C_green3",
            Category::CGreen4 => "C_green4",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// A call requiring a response: the task being auctioned.
#[derive(Debug, Clone, PartialEq)]
pub struct Incident {
    pub id: IncidentId,
    /// Seconds since epoch at which the call was answered.
    pub call_time: i64,
    pub position: GridPoint,
    pub category: Category,
    pub ccg: CcgId,
    pub required_responses: u32,
    pub dispatch_time: Option<i64>,
    pub type_determined_time: Option<i64>,
}

impl Incident {
    pub fn new(id: u64, call_time: i64, position: GridPoint, category: Category, ccg: u32) -> Self {
        Self {
            id: IncidentId(id),
            call_time,
            position,
            category,
            ccg: CcgId(ccg),
            required_responses: 1,
            dispatch_time: None,
            type_determined_time: None,
        }
    }

    pub fn validate(&self) -> Result<(), FleetError> {
        let bad = |what: &str| FleetError::InvalidIncident {
            incident: self.id,
            reason: what.to_owned(),
        };
        if self.required_responses < 1 {
            return Err(bad("required_responses must be at least 1"));
        }
        if !self.position.is_valid() {
            return Err(bad("invalid position"));
        }
        if self.dispatch_time.is_some_and(|t| t < self.call_time) {
            return Err(bad("dispatch_time precedes call_time"));
        }
        if self
            .type_determined_time
            .is_some_and(|t| t < self.call_time)
        {
            return Err(bad("type_determined_time precedes call_time"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleType {
    /// Accident and emergency unit: transport-capable ambulance.
    Aeu,
    /// Fast response unit.
    Fru,
}

impl VehicleType {
    pub fn as_str(&self) -> &'static str {
        match self {
            VehicleType::Aeu => "AEU",
            VehicleType::Fru => "FRU",
        }
    }
}

impl FromStr for VehicleType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AEU" => Ok(VehicleType::Aeu),
            "FRU" => Ok(VehicleType::Fru),
            other => Err(format!("unknown vehicle type `{other}`")),
        }
    }
}

/// A timestamped location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub time: i64,
    pub point: GridPoint,
}

impl Waypoint {
    pub const fn new(time: i64, point: GridPoint) -> Self {
        Self { time, point }
    }
}

/// One idle interval: from completing an assignment to the next dispatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleWindow {
    pub prev_completion: Waypoint,
    pub next_dispatch: Option<Waypoint>,
}

impl IdleWindow {
    pub fn contains(&self, t: f64) -> bool {
        self.prev_completion.time as f64 <= t
            && self.next_dispatch.is_none_or(|n| t <= n.time as f64)
    }
}

/// A vehicle as seen during one idle window.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub vtype: VehicleType,
    pub home_ccg: CcgId,
    pub prev_completion: Waypoint,
    pub next_dispatch: Option<Waypoint>,
}

impl Vehicle {
    pub fn window(&self) -> IdleWindow {
        IdleWindow {
            prev_completion: self.prev_completion,
            next_dispatch: self.next_dispatch,
        }
    }
}

/// All idle windows of one vehicle, ordered by completion time.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTimeline {
    pub id: VehicleId,
    pub vtype: VehicleType,
    pub home_ccg: CcgId,
    pub windows: Vec<IdleWindow>,
}

impl VehicleTimeline {
    /// Checks window ordering: each window is non-empty, windows do not overlap,
    /// and only the last may be open-ended.
    pub fn validate(&self) -> Result<(), FleetError> {
        let bad = |reason: String| FleetError::InvalidTimeline {
            vehicle: self.id,
            reason,
        };
        if self.windows.is_empty() {
            return Err(bad("no idle windows".into()));
        }
        for (i, w) in self.windows.iter().enumerate() {
            match w.next_dispatch {
                Some(next) if next.time <= w.prev_completion.time => {
                    return Err(bad(format!(
                        "window {i}: next dispatch at {} not after completion at {}",
                        next.time, w.prev_completion.time
                    )))
                }
                None if i + 1 != self.windows.len() => {
                    return Err(bad(format!("window {i} is open-ended but not last")))
                }
                _ => {}
            }
            if let (Some(next), Some(following)) = (w.next_dispatch, self.windows.get(i + 1)) {
                if following.prev_completion.time < next.time {
                    return Err(bad(format!("window {} overlaps window {i}", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// The vehicle's idle snapshot at `t`, if it is idle then.
    pub fn idle_at(&self, t: f64) -> Option<Vehicle> {
        let after = self
            .windows
            .partition_point(|w| w.prev_completion.time as f64 <= t);
        let w = self.windows[..after].last()?;
        w.contains(t).then_some(Vehicle {
            id: self.id,
            vtype: self.vtype,
            home_ccg: self.home_ccg,
            prev_completion: w.prev_completion,
            next_dispatch: w.next_dispatch,
        })
    }
}

/// Map, tasks, team and starting configuration.
#[derive(Debug, Clone)]
pub struct Mission {
    pub graph: Arc<RoadGraph>,
    pub tasks: Vec<Incident>,
    pub vehicles: Vec<VehicleTimeline>,
    pub starting_configuration: BTreeMap<VehicleId, GridPoint>,
}

impl Mission {
    /// Builds a mission; the starting configuration is each vehicle's first
    /// completion point.
    pub fn new(
        graph: Arc<RoadGraph>,
        tasks: Vec<Incident>,
        vehicles: Vec<VehicleTimeline>,
    ) -> Result<Self, FleetError> {
        let mut seen = BTreeSet::new();
        for task in &tasks {
            task.validate()?;
            if !seen.insert(task.id) {
                return Err(FleetError::DuplicateIncident(task.id));
            }
        }
        let mut starting_configuration = BTreeMap::new();
        for v in &vehicles {
            v.validate()?;
            let start = v.windows[0].prev_completion.point;
            if !start.is_valid() {
                return Err(FleetError::InvalidTimeline {
                    vehicle: v.id,
                    reason: "invalid starting position".into(),
                });
            }
            if starting_configuration.insert(v.id, start).is_some() {
                return Err(FleetError::DuplicateVehicle(v.id));
            }
        }
        Ok(Self {
            graph,
            tasks,
            vehicles,
            starting_configuration,
        })
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&VehicleTimeline> {
        self.vehicles.iter().find(|v| v.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FleetError {
    #[error("vehicle {vehicle} is not idle at {t} (window {start}..{end:?})")]
    OutOfWindow {
        vehicle: VehicleId,
        t: f64,
        start: i64,
        end: Option<i64>,
    },
    #[error("neighbourhood area must be positive, got {0} km²")]
    InvalidArea(f64),
    #[error("incident {incident}: {reason}")]
    InvalidIncident {
        incident: IncidentId,
        reason: String,
    },
    #[error("vehicle {vehicle}: {reason}")]
    InvalidTimeline { vehicle: VehicleId, reason: String },
    #[error("duplicate incident id {0}")]
    DuplicateIncident(IncidentId),
    #[error("duplicate vehicle id {0}")]
    DuplicateVehicle(VehicleId),
    #[error(transparent)]
    Route(#[from] RouteError),
}

/// Position of an idle vehicle at time `t`.
///
/// The vehicle leaves its completion point at the completion time and drives
/// an emergency-class route towards its next dispatch point, waiting there
/// once it arrives. Without a next dispatch it stays at the completion point.
pub fn interpolate_idle_position(
    v: &Vehicle,
    t: f64,
    graph: &RoadGraph,
) -> Result<GridPoint, FleetError> {
    if !v.window().contains(t) {
        return Err(FleetError::OutOfWindow {
            vehicle: v.id,
            t,
            start: v.prev_completion.time,
            end: v.next_dispatch.map(|n| n.time),
        });
    }
    let Some(next) = v.next_dispatch else {
        return Ok(v.prev_completion.point);
    };
    let route = idle_route(v, &next, graph)?;
    Ok(roadnet::position_along_route(
        &route,
        graph,
        t - v.prev_completion.time as f64,
    ))
}

fn idle_route(
    v: &Vehicle,
    next: &Waypoint,
    graph: &RoadGraph,
) -> Result<roadnet::Route, RouteError> {
    let from = graph.snap_ix(&v.prev_completion.point);
    let to = graph.snap_ix(&next.point);
    roadnet::route_between(
        graph,
        from,
        to,
        v.prev_completion.time as f64,
        VehicleClass::Emergency,
    )
}

/// An idle vehicle inside an incident's neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct IdleCandidate {
    pub vehicle: VehicleId,
    pub position: GridPoint,
}

/// Radius in metres of a disc with the given area in km².
pub fn neighbourhood_radius_m(area_km2: f64) -> f64 {
    (area_km2 / std::f64::consts::PI).sqrt() * 1000.0
}

/// Vehicles idle at the incident's call time whose reconstructed position lies
/// within a disc of `area_km2` centred on the incident, ordered by vehicle id.
///
/// A vehicle whose idle route cannot be planned is placed at its completion
/// point.
pub fn idle_vehicles_near(
    mission: &Mission,
    inc: &Incident,
    area_km2: f64,
) -> Result<Vec<IdleCandidate>, FleetError> {
    if !(area_km2 > 0.0 && area_km2.is_finite()) {
        return Err(FleetError::InvalidArea(area_km2));
    }
    let radius = neighbourhood_radius_m(area_km2);
    let t = inc.call_time as f64;
    let mut out: Vec<IdleCandidate> = mission
        .vehicles
        .iter()
        .filter_map(|timeline| timeline.idle_at(t))
        .filter_map(|v| {
            let position = match interpolate_idle_position(&v, t, &mission.graph) {
                Ok(p) => p,
                Err(FleetError::Route(_)) => v.prev_completion.point,
                Err(_) => return None,
            };
            (position.distance(&inc.position) <= radius).then_some(IdleCandidate {
                vehicle: v.id,
                position,
            })
        })
        .collect();
    out.sort_by_key(|c| c.vehicle);
    Ok(out)
}
