//! Historical replay and auction dispatch of single incidents.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auction::{run_ssi_auction, BidPolicy, Bidder, RoundRecord};
use crate::data::{DataError, ResponseRecord};
use crate::fleet::{
    idle_vehicles_near, Category, FleetError, Incident, IncidentId, Mission, VehicleId,
    DEFAULT_AREA_KM2,
};
use crate::roadnet::{self, GridPoint, RoadGraph, Route, VehicleClass};
use crate::stats::{ExclusionTally, PairedOutcome};

/// Clock-start grace period after the call is answered, seconds.
pub const CLOCK_START_GRACE_S: i64 = 240;

pub const DECISION_LOG_HEADER: &str =
    "incident_id,policy,vehicle_id,travel_time_s,response_time_s,clock_start_s,choice_differs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "HIST")]
    Hist,
    #[serde(rename = "AUCT")]
    Auct,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Hist => "HIST",
            Policy::Auct => "AUCT",
        })
    }
}

/// When the response-time clock starts for `inc`.
///
/// A_red1 starts at the call. Other categories start at the earliest of the
/// first dispatch, the type determination and 240 s after the call.
pub fn clock_start_time(inc: &Incident) -> i64 {
    if inc.category == Category::ARed1 {
        return inc.call_time;
    }
    [inc.dispatch_time, inc.type_determined_time]
        .into_iter()
        .flatten()
        .fold(inc.call_time + CLOCK_START_GRACE_S, i64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchDecision {
    pub incident: IncidentId,
    pub policy: Policy,
    pub vehicle: VehicleId,
    pub origin: GridPoint,
    pub route: Route,
    pub simulated_travel_time: f64,
    pub clock_start: i64,
    /// Arrival time minus clock start.
    pub response_time: f64,
}

impl DispatchDecision {
    fn new(
        inc: &Incident,
        policy: Policy,
        vehicle: VehicleId,
        origin: GridPoint,
        route: Route,
        clock_start: i64,
    ) -> Self {
        let travel = route.total_travel_time_s;
        Self {
            incident: inc.id,
            policy,
            vehicle,
            origin,
            response_time: route.departure_time + travel - clock_start as f64,
            simulated_travel_time: travel,
            route,
            clock_start,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    MissingResponse,
    /// The historical vehicle was not idle inside the neighbourhood.
    HistNotCandidate,
    NoCandidate,
    Unroutable,
    UnsupportedMultiResponse,
    InvalidInput,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::MissingResponse => "missing historical response",
            SkipReason::HistNotCandidate => "historical vehicle outside neighbourhood",
            SkipReason::NoCandidate => "no idle vehicle in neighbourhood",
            SkipReason::Unroutable => "no route",
            SkipReason::UnsupportedMultiResponse => "multiple responses required",
            SkipReason::InvalidInput => "invalid input",
        })
    }
}

/// An incident excluded from a comparison.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("incident {incident} skipped, {reason}: {detail}")]
pub struct SkipError {
    pub incident: IncidentId,
    pub reason: SkipReason,
    pub detail: String,
}

fn skip(inc: &Incident, reason: SkipReason, detail: impl fmt::Display) -> SkipError {
    SkipError {
        incident: inc.id,
        reason,
        detail: detail.to_string(),
    }
}

/// The recorded first response to an incident.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoricalDispatch {
    pub vehicle: VehicleId,
    pub dispatch_time: i64,
    pub dispatch_point: GridPoint,
}

impl From<&ResponseRecord> for HistoricalDispatch {
    fn from(r: &ResponseRecord) -> Self {
        Self {
            vehicle: r.vehicle_id,
            dispatch_time: r.dispatch_time,
            dispatch_point: r.dispatch_point,
        }
    }
}

fn route_points(
    graph: &RoadGraph,
    from: &GridPoint,
    to: &GridPoint,
    departure: f64,
    class: VehicleClass,
) -> Result<Route, roadnet::RouteError> {
    roadnet::route_between(
        graph,
        graph.snap_ix(from),
        graph.snap_ix(to),
        departure,
        class,
    )
}

/// Routes the historical vehicle from its recorded dispatch point to the
/// incident, leaving at the recorded dispatch time.
pub fn replay_historical(
    inc: &Incident,
    hist: &HistoricalDispatch,
    graph: &RoadGraph,
    class: VehicleClass,
) -> Result<DispatchDecision, SkipError> {
    let route = route_points(
        graph,
        &hist.dispatch_point,
        &inc.position,
        hist.dispatch_time as f64,
        class,
    )
    .map_err(|e| skip(inc, SkipReason::Unroutable, e))?;
    let mut timed = inc.clone();
    timed.dispatch_time = Some(hist.dispatch_time);
    Ok(DispatchDecision::new(
        inc,
        Policy::Hist,
        hist.vehicle,
        hist.dispatch_point,
        route,
        clock_start_time(&timed),
    ))
}

/// A vehicle bidding from a fixed position, leaving at the task's call time.
///
/// Supported factors: `travel_time_s` (planned drive time) and `distance_m`
/// (planned route length).
pub struct RouteBidder<'a> {
    pub vehicle: VehicleId,
    pub position: GridPoint,
    graph: &'a RoadGraph,
    class: VehicleClass,
    factors: &'a [String],
}

impl<'a> RouteBidder<'a> {
    pub fn new(
        vehicle: VehicleId,
        position: GridPoint,
        graph: &'a RoadGraph,
        class: VehicleClass,
        policy: &'a BidPolicy,
    ) -> Self {
        Self {
            vehicle,
            position,
            graph,
            class,
            factors: policy.factor_names(),
        }
    }

    pub fn route_to(&self, task: &Incident) -> Result<Route, roadnet::RouteError> {
        route_points(
            self.graph,
            &self.position,
            &task.position,
            task.call_time as f64,
            self.class,
        )
    }
}

impl Bidder for RouteBidder<'_> {
    fn id(&self) -> VehicleId {
        self.vehicle
    }

    fn bid_factors(&self, task: &Incident) -> Result<Vec<f64>, String> {
        let route = self.route_to(task).map_err(|e| e.to_string())?;
        self.factors
            .iter()
            .map(|name| match name.as_str() {
                "travel_time_s" => Ok(route.total_travel_time_s),
                "distance_m" => Ok(route.total_length_m),
                other => Err(format!("unknown bid factor `{other}`")),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub class: VehicleClass,
    pub area_km2: f64,
    pub policy: BidPolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            class: VehicleClass::Emergency,
            area_km2: DEFAULT_AREA_KM2,
            policy: BidPolicy::travel_time(),
        }
    }
}

fn fleet_skip(inc: &Incident, e: FleetError) -> SkipError {
    match e {
        FleetError::Route(r) => skip(inc, SkipReason::Unroutable, r),
        other => skip(inc, SkipReason::InvalidInput, other),
    }
}

/// Auctions `inc` among idle vehicles in its neighbourhood. The winner is
/// dispatched at the call time, so its response time equals its travel time.
pub fn auction_dispatch(
    mission: &Mission,
    inc: &Incident,
    cfg: &EvalConfig,
) -> Result<(DispatchDecision, Vec<RoundRecord>), SkipError> {
    if inc.required_responses != 1 {
        return Err(skip(
            inc,
            SkipReason::UnsupportedMultiResponse,
            format!("{} responses requested", inc.required_responses),
        ));
    }
    let candidates =
        idle_vehicles_near(mission, inc, cfg.area_km2).map_err(|e| fleet_skip(inc, e))?;
    auction_among(mission, inc, cfg, &candidates)
}

fn auction_among(
    mission: &Mission,
    inc: &Incident,
    cfg: &EvalConfig,
    candidates: &[crate::fleet::IdleCandidate],
) -> Result<(DispatchDecision, Vec<RoundRecord>), SkipError> {
    if candidates.is_empty() {
        return Err(skip(inc, SkipReason::NoCandidate, "empty neighbourhood"));
    }
    let graph = mission.graph.as_ref();
    let mut bidders: Vec<RouteBidder<'_>> = candidates
        .iter()
        .map(|c| RouteBidder::new(c.vehicle, c.position, graph, cfg.class, &cfg.policy))
        .collect();
    let outcome = run_ssi_auction(std::slice::from_ref(inc), &mut bidders, &cfg.policy);
    let Some(&winner) = outcome.awards.get(&inc.id) else {
        let reason = outcome
            .unallocated
            .get(&inc.id)
            .cloned()
            .unwrap_or_default();
        return Err(skip(inc, SkipReason::Unroutable, reason));
    };
    let bidder = bidders
        .iter()
        .find(|b| b.vehicle == winner)
        .expect("winner is a bidder");
    let route = bidder
        .route_to(inc)
        .map_err(|e| skip(inc, SkipReason::Unroutable, e))?;
    let decision = DispatchDecision::new(
        inc,
        Policy::Auct,
        winner,
        bidder.position,
        route,
        inc.call_time,
    );
    Ok((decision, outcome.round_log))
}

/// HIST and AUCT decisions for one incident.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentPair {
    pub hist: DispatchDecision,
    pub auct: DispatchDecision,
    pub choice_differs: bool,
    pub round_log: Vec<RoundRecord>,
}

impl IncidentPair {
    pub fn to_paired(&self) -> PairedOutcome {
        PairedOutcome {
            incident: self.hist.incident,
            hist_vehicle: self.hist.vehicle,
            auct_vehicle: self.auct.vehicle,
            hist_travel_s: self.hist.simulated_travel_time,
            auct_travel_s: self.auct.simulated_travel_time,
            hist_response_s: self.hist.response_time,
            auct_response_s: self.auct.response_time,
        }
    }
}

/// Replays the historical response and runs the auction.
///
/// The incident is skipped when the historical vehicle is not among the
/// auction's candidates, so every kept pair compares the auction winner with
/// an option it was offered.
pub fn evaluate_incident_pair(
    mission: &Mission,
    inc: &Incident,
    hist: Option<&HistoricalDispatch>,
    cfg: &EvalConfig,
) -> Result<IncidentPair, SkipError> {
    if inc.required_responses != 1 {
        return Err(skip(
            inc,
            SkipReason::UnsupportedMultiResponse,
            format!("{} responses requested", inc.required_responses),
        ));
    }
    let hist = hist.ok_or_else(|| skip(inc, SkipReason::MissingResponse, "no response record"))?;
    let candidates =
        idle_vehicles_near(mission, inc, cfg.area_km2).map_err(|e| fleet_skip(inc, e))?;
    if candidates.is_empty() {
        return Err(skip(inc, SkipReason::NoCandidate, "empty neighbourhood"));
    }
    if !candidates.iter().any(|c| c.vehicle == hist.vehicle) {
        return Err(skip(
            inc,
            SkipReason::HistNotCandidate,
            format!("vehicle {}", hist.vehicle),
        ));
    }
    let hist_decision = replay_historical(inc, hist, &mission.graph, cfg.class)?;
    let (auct, round_log) = auction_among(mission, inc, cfg, &candidates)?;
    Ok(IncidentPair {
        choice_differs: auct.vehicle != hist_decision.vehicle,
        hist: hist_decision,
        auct,
        round_log,
    })
}

/// All kept pairs, in incident order, plus the exclusions.
#[derive(Debug, Clone, Default)]
pub struct ConditionRun {
    pub pairs: Vec<IncidentPair>,
    pub skipped: Vec<SkipError>,
}

impl ConditionRun {
    pub fn tally(&self) -> ExclusionTally {
        let mut t = ExclusionTally::default();
        for s in &self.skipped {
            match s.reason {
                SkipReason::HistNotCandidate => t.hist_outside += 1,
                SkipReason::NoCandidate => t.no_candidate += 1,
                SkipReason::MissingResponse => t.no_response += 1,
                SkipReason::Unroutable => t.unroutable += 1,
                SkipReason::UnsupportedMultiResponse | SkipReason::InvalidInput => t.other += 1,
            }
        }
        t
    }

    pub fn paired(&self) -> Vec<PairedOutcome> {
        self.pairs.iter().map(IncidentPair::to_paired).collect()
    }

    /// Every auction round, one JSON object per line.
    pub fn write_round_log<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for pair in &self.pairs {
            for round in &pair.round_log {
                serde_json::to_writer(
                    &mut out,
                    &RoundLine {
                        incident: pair.hist.incident,
                        round,
                    },
                )?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct RoundLine<'a> {
    incident: IncidentId,
    #[serde(flatten)]
    round: &'a RoundRecord,
}

/// Evaluates incidents independently and in parallel; output order follows
/// `incidents`.
pub fn evaluate_condition(
    mission: &Mission,
    incidents: &[Incident],
    hist: &BTreeMap<IncidentId, HistoricalDispatch>,
    cfg: &EvalConfig,
) -> ConditionRun {
    let results: Vec<Result<IncidentPair, SkipError>> = incidents
        .par_iter()
        .map(|inc| evaluate_incident_pair(mission, inc, hist.get(&inc.id), cfg))
        .collect();
    let mut run = ConditionRun::default();
    for r in results {
        match r {
            Ok(p) => run.pairs.push(p),
            Err(s) => run.skipped.push(s),
        }
    }
    run
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DecisionRow {
    incident_id: IncidentId,
    policy: Policy,
    vehicle_id: VehicleId,
    travel_time_s: f64,
    response_time_s: f64,
    clock_start_s: i64,
    choice_differs: bool,
}

impl DecisionRow {
    fn of(d: &DispatchDecision, choice_differs: bool) -> Self {
        Self {
            incident_id: d.incident,
            policy: d.policy,
            vehicle_id: d.vehicle,
            travel_time_s: d.simulated_travel_time,
            response_time_s: d.response_time,
            clock_start_s: d.clock_start,
            choice_differs,
        }
    }
}

/// Writes a HIST row then an AUCT row per pair.
pub fn write_decision_log<W: Write>(out: W, pairs: &[IncidentPair]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(DECISION_LOG_HEADER.split(','))?;
    for p in pairs {
        w.serialize(DecisionRow::of(&p.hist, p.choice_differs))?;
        w.serialize(DecisionRow::of(&p.auct, p.choice_differs))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a decision log back into per-incident pairs.
pub fn read_decision_log(path: impl AsRef<Path>) -> Result<Vec<PairedOutcome>, DataError> {
    let path = path.as_ref();
    let parse = |line: u64, message: String| DataError::Parse {
        file: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse(0, e.to_string()))?;
    let header = reader.headers().map_err(|e| parse(1, e.to_string()))?;
    if header.iter().ne(DECISION_LOG_HEADER.split(',')) {
        return Err(parse(1, format!("expected header `{DECISION_LOG_HEADER}`")));
    }
    let mut hist: BTreeMap<IncidentId, DecisionRow> = BTreeMap::new();
    let mut auct: BTreeMap<IncidentId, DecisionRow> = BTreeMap::new();
    for row in reader.deserialize::<DecisionRow>() {
        let row = row.map_err(|e| parse(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let side = match row.policy {
            Policy::Hist => &mut hist,
            Policy::Auct => &mut auct,
        };
        if let Some(dup) = side.insert(row.incident_id, row) {
            return Err(DataError::Validation(format!(
                "duplicate {} row for incident {}",
                dup.policy, dup.incident_id
            )));
        }
    }
    if hist.len() != auct.len() || hist.keys().ne(auct.keys()) {
        return Err(DataError::Validation(
            "every incident needs exactly one HIST and one AUCT row".into(),
        ));
    }
    Ok(hist
        .into_values()
        .zip(auct.into_values())
        .map(|(h, a)| PairedOutcome {
            incident: h.incident_id,
            hist_vehicle: h.vehicle_id,
            auct_vehicle: a.vehicle_id,
            hist_travel_s: h.travel_time_s,
            auct_travel_s: a.travel_time_s,
            hist_response_s: h.response_time_s,
            auct_response_s: a.response_time_s,
        })
        .collect())
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HIST" => Ok(Policy::Hist),
            "AUCT" => Ok(Policy::Auct),
            _ => Err(format!("unknown policy `{s}`")),
        }
    }
}
