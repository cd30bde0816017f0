//! Flat-file record schemas and dataset ingestion.
//!
//! * `incidents.csv`: `incident_id,call_time,category,easting_m,northing_m,ccg_id,type_determined_time`
//! * `responses.csv`: `incident_id,vehicle_id,dispatch_time,dispatch_easting_m,dispatch_northing_m,arrival_time,observed_travel_time_s`
//! * `vehicles.csv`: one row per idle window,
//!   `vehicle_id,vehicle_type,home_ccg,completion_time,completion_easting_m,completion_northing_m,next_dispatch_time,next_dispatch_easting_m,next_dispatch_northing_m`
//!
//! Timestamps are integer seconds since the Unix epoch. Optional fields are
//! empty. Coordinates are quantized to the 100 m grid on ingestion.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use csv::StringRecord;

use super::{quantize_location, DataError};
use crate::fleet::{
    Category, CcgId, FleetError, IdleWindow, Incident, IncidentId, Mission, VehicleId,
    VehicleTimeline, VehicleType, Waypoint,
};
use crate::roadnet::{GridPoint, RoadGraph};

pub const INCIDENTS_FILE: &str = "incidents.csv";
pub const RESPONSES_FILE: &str = "responses.csv";
pub const VEHICLES_FILE: &str = "vehicles.csv";

const INCIDENT_HEADER: [&str; 7] = [
    "incident_id",
    "call_time",
    "category",
    "easting_m",
    "northing_m",
    "ccg_id",
    "type_determined_time",
];
const RESPONSE_HEADER: [&str; 7] = [
    "incident_id",
    "vehicle_id",
    "dispatch_time",
    "dispatch_easting_m",
    "dispatch_northing_m",
    "arrival_time",
    "observed_travel_time_s",
];
const VEHICLE_HEADER: [&str; 9] = [
    "vehicle_id",
    "vehicle_type",
    "home_ccg",
    "completion_time",
    "completion_easting_m",
    "completion_northing_m",
    "next_dispatch_time",
    "next_dispatch_easting_m",
    "next_dispatch_northing_m",
];

#[derive(Debug, Clone, PartialEq)]
pub struct IncidentRecord {
    pub incident_id: IncidentId,
    pub call_time: i64,
    pub category: Category,
    pub position: GridPoint,
    pub ccg_id: CcgId,
    pub type_determined_time: Option<i64>,
}

/// Historical first-response row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRecord {
    pub incident_id: IncidentId,
    pub vehicle_id: VehicleId,
    pub dispatch_time: i64,
    pub dispatch_point: GridPoint,
    pub arrival_time: i64,
    pub observed_travel_time_s: f64,
}

/// One idle window of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRecord {
    pub vehicle_id: VehicleId,
    pub vehicle_type: VehicleType,
    pub home_ccg: CcgId,
    pub completion: Waypoint,
    pub next_dispatch: Option<Waypoint>,
}

fn opt_to_string<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl IncidentRecord {
    fn to_row(&self) -> Vec<String> {
        vec![
            self.incident_id.to_string(),
            self.call_time.to_string(),
            self.category.to_string(),
            self.position.easting.to_string(),
            self.position.northing.to_string(),
            self.ccg_id.to_string(),
            opt_to_string(self.type_determined_time),
        ]
    }

    fn from_row(row: &Row<'_>) -> Result<Self, DataError> {
        Ok(Self {
            incident_id: row.parse(0, "incident_id")?,
            call_time: row.parse(1, "call_time")?,
            category: row.parse(2, "category")?,
            position: row.point(3, 4)?,
            ccg_id: row.parse(5, "ccg_id")?,
            type_determined_time: row.parse_opt(6, "type_determined_time")?,
        })
    }
}

impl ResponseRecord {
    fn to_row(&self) -> Vec<String> {
        vec![
            self.incident_id.to_string(),
            self.vehicle_id.to_string(),
            self.dispatch_time.to_string(),
            self.dispatch_point.easting.to_string(),
            self.dispatch_point.northing.to_string(),
            self.arrival_time.to_string(),
            self.observed_travel_time_s.to_string(),
        ]
    }

    fn from_row(row: &Row<'_>) -> Result<Self, DataError> {
        let rec = Self {
            incident_id: row.parse(0, "incident_id")?,
            vehicle_id: row.parse(1, "vehicle_id")?,
            dispatch_time: row.parse(2, "dispatch_time")?,
            dispatch_point: row.point(3, 4)?,
            arrival_time: row.parse(5, "arrival_time")?,
            observed_travel_time_s: row.parse(6, "observed_travel_time_s")?,
        };
        if rec.arrival_time < rec.dispatch_time {
            return Err(row.error("arrival_time precedes dispatch_time".into()));
        }
        if !(rec.observed_travel_time_s >= 0.0 && rec.observed_travel_time_s.is_finite()) {
            return Err(row.error("observed_travel_time_s must be finite and non-negative".into()));
        }
        Ok(rec)
    }
}

impl VehicleRecord {
    fn to_row(&self) -> Vec<String> {
        vec![
            self.vehicle_id.to_string(),
            self.vehicle_type.as_str().to_owned(),
            self.home_ccg.to_string(),
            self.completion.time.to_string(),
            self.completion.point.easting.to_string(),
            self.completion.point.northing.to_string(),
            opt_to_string(self.next_dispatch.map(|w| w.time)),
            opt_to_string(self.next_dispatch.map(|w| w.point.easting)),
            opt_to_string(self.next_dispatch.map(|w| w.point.northing)),
        ]
    }

    fn from_row(row: &Row<'_>) -> Result<Self, DataError> {
        let next_time: Option<i64> = row.parse_opt(6, "next_dispatch_time")?;
        let next_e: Option<f64> = row.parse_opt(7, "next_dispatch_easting_m")?;
        let next_n: Option<f64> = row.parse_opt(8, "next_dispatch_northing_m")?;
        let next_dispatch = match (next_time, next_e, next_n) {
            (None, None, None) => None,
            (Some(t), Some(e), Some(n)) => Some(Waypoint::new(
                t,
                quantize_location(e, n).map_err(|e| row.error(e.to_string()))?,
            )),
            _ => {
                return Err(row.error(
                    "next dispatch time and coordinates must be all present or all empty".into(),
                ))
            }
        };
        let completion = Waypoint::new(row.parse(3, "completion_time")?, row.point(4, 5)?);
        if next_dispatch.is_some_and(|n| n.time <= completion.time) {
            return Err(row.error("next dispatch must come after completion".into()));
        }
        Ok(Self {
            vehicle_id: row.parse(0, "vehicle_id")?,
            vehicle_type: row.parse(1, "vehicle_type")?,
            home_ccg: row.parse(2, "home_ccg")?,
            completion,
            next_dispatch,
        })
    }
}

struct Row<'a> {
    path: &'a Path,
    line: u64,
    record: &'a StringRecord,
}

impl Row<'_> {
    fn error(&self, message: String) -> DataError {
        DataError::Parse {
            file: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn str(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T, DataError>
    where
        T::Err: std::fmt::Display,
    {
        self.str(i)
            .parse()
            .map_err(|e| self.error(format!("bad {what} `{}`: {e}", self.str(i))))
    }

    fn parse_opt<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<Option<T>, DataError>
    where
        T::Err: std::fmt::Display,
    {
        if self.str(i).is_empty() {
            Ok(None)
        } else {
            self.parse(i, what).map(Some)
        }
    }

    fn point(&self, e: usize, n: usize) -> Result<GridPoint, DataError> {
        let easting: f64 = self.parse(e, "easting")?;
        let northing: f64 = self.parse(n, "northing")?;
        quantize_location(easting, northing).map_err(|err| self.error(err.to_string()))
    }
}

fn read_csv<T>(
    path: &Path,
    header: &[&str],
    parse: impl Fn(&Row<'_>) -> Result<T, DataError>,
) -> Result<Vec<T>, DataError> {
    let file = File::open(path).map_err(DataError::io(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let csv_err = |e: csv::Error| DataError::Parse {
        file: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let found = reader.headers().map_err(csv_err)?;
    if found.iter().ne(header.iter().copied()) {
        return Err(DataError::Parse {
            file: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut record = StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_err)? {
        let line = record.position().map_or(0, |p| p.line());
        out.push(parse(&Row {
            path,
            line,
            record: &record,
        })?);
    }
    Ok(out)
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), DataError> {
    let to_io = |e: csv::Error| DataError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(DataError::io(path))
}

/// A cross-referenced, validated record set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub incident_records: Vec<IncidentRecord>,
    pub response_records: Vec<ResponseRecord>,
    pub vehicle_records: Vec<VehicleRecord>,
    incidents: Vec<Incident>,
    first_responses: BTreeMap<IncidentId, ResponseRecord>,
    vehicles: Vec<VehicleTimeline>,
}

impl Dataset {
    /// Validates and cross-references raw records.
    pub fn from_records(
        incident_records: Vec<IncidentRecord>,
        response_records: Vec<ResponseRecord>,
        vehicle_records: Vec<VehicleRecord>,
    ) -> Result<Self, DataError> {
        let mut by_id: HashMap<IncidentId, usize> = HashMap::new();
        let mut incidents = Vec::with_capacity(incident_records.len());
        for rec in &incident_records {
            if by_id.insert(rec.incident_id, incidents.len()).is_some() {
                return Err(DataError::Validation(format!(
                    "duplicate incident id {}",
                    rec.incident_id
                )));
            }
            let mut inc = Incident::new(
                rec.incident_id.0,
                rec.call_time,
                rec.position,
                rec.category,
                rec.ccg_id.0,
            );
            inc.type_determined_time = rec.type_determined_time;
            incidents.push(inc);
        }

        let mut timelines: BTreeMap<VehicleId, VehicleTimeline> = BTreeMap::new();
        for rec in &vehicle_records {
            let tl = timelines
                .entry(rec.vehicle_id)
                .or_insert_with(|| VehicleTimeline {
                    id: rec.vehicle_id,
                    vtype: rec.vehicle_type,
                    home_ccg: rec.home_ccg,
                    windows: Vec::new(),
                });
            if tl.vtype != rec.vehicle_type || tl.home_ccg != rec.home_ccg {
                return Err(DataError::Validation(format!(
                    "vehicle {} has inconsistent type or home CCG",
                    rec.vehicle_id
                )));
            }
            tl.windows.push(IdleWindow {
                prev_completion: rec.completion,
                next_dispatch: rec.next_dispatch,
            });
        }
        let mut vehicles: Vec<VehicleTimeline> = timelines.into_values().collect();
        for tl in &mut vehicles {
            tl.windows.sort_by_key(|w| w.prev_completion.time);
            tl.validate()
                .map_err(|e| DataError::Validation(e.to_string()))?;
        }
        let known_vehicles: HashSet<VehicleId> = vehicles.iter().map(|v| v.id).collect();

        let mut first_responses: BTreeMap<IncidentId, ResponseRecord> = BTreeMap::new();
        for rec in &response_records {
            let &ix = by_id
                .get(&rec.incident_id)
                .ok_or(DataError::OrphanResponse(rec.incident_id.0))?;
            if !known_vehicles.contains(&rec.vehicle_id) {
                return Err(DataError::Validation(format!(
                    "response to incident {} references unknown vehicle {}",
                    rec.incident_id, rec.vehicle_id
                )));
            }
            if rec.dispatch_time < incidents[ix].call_time {
                return Err(DataError::Validation(format!(
                    "incident {}: dispatch precedes the call",
                    rec.incident_id
                )));
            }
            let earlier = |cur: &ResponseRecord| {
                (rec.dispatch_time, rec.vehicle_id) < (cur.dispatch_time, cur.vehicle_id)
            };
            match first_responses.get(&rec.incident_id) {
                Some(cur) if !earlier(cur) => {}
                _ => {
                    first_responses.insert(rec.incident_id, rec.clone());
                }
            }
        }
        for (id, rec) in &first_responses {
            incidents[by_id[id]].dispatch_time = Some(rec.dispatch_time);
        }
        for inc in &incidents {
            inc.validate()
                .map_err(|e| DataError::Validation(e.to_string()))?;
        }
        incidents.sort_by_key(|i| i.id);

        Ok(Self {
            incident_records,
            response_records,
            vehicle_records,
            incidents,
            first_responses,
            vehicles,
        })
    }

    /// Incidents ordered by id.
    pub fn incidents(&self) -> &[Incident] {
        &self.incidents
    }

    pub fn incident(&self, id: IncidentId) -> Option<&Incident> {
        self.incidents
            .binary_search_by_key(&id, |i| i.id)
            .ok()
            .map(|ix| &self.incidents[ix])
    }

    /// Earliest-dispatched response per incident.
    pub fn first_responses(&self) -> &BTreeMap<IncidentId, ResponseRecord> {
        &self.first_responses
    }

    pub fn first_response(&self, id: IncidentId) -> Option<&ResponseRecord> {
        self.first_responses.get(&id)
    }

    /// Vehicle timelines ordered by id.
    pub fn vehicles(&self) -> &[VehicleTimeline] {
        &self.vehicles
    }

    /// Mission over all incidents and vehicles on `graph`.
    pub fn mission(&self, graph: Arc<RoadGraph>) -> Result<Mission, FleetError> {
        Mission::new(graph, self.incidents.clone(), self.vehicles.clone())
    }
}

/// Reads and validates the three record files.
pub fn ingest(
    incidents: impl AsRef<Path>,
    responses: impl AsRef<Path>,
    vehicles: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    let incident_records = read_csv(
        incidents.as_ref(),
        &INCIDENT_HEADER,
        IncidentRecord::from_row,
    )?;
    let response_records = read_csv(
        responses.as_ref(),
        &RESPONSE_HEADER,
        ResponseRecord::from_row,
    )?;
    let vehicle_records = read_csv(vehicles.as_ref(), &VEHICLE_HEADER, VehicleRecord::from_row)?;
    Dataset::from_records(incident_records, response_records, vehicle_records)
}

/// [`ingest`] using the standard file names inside `dir`.
pub fn ingest_dir(dir: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let dir = dir.as_ref();
    ingest(
        dir.join(INCIDENTS_FILE),
        dir.join(RESPONSES_FILE),
        dir.join(VEHICLES_FILE),
    )
}

/// Writes the dataset's records in file order.
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<(), DataError> {
    let dir = dir.as_ref();
    let path = |name: &str| -> PathBuf { dir.join(name) };
    write_csv(
        &path(INCIDENTS_FILE),
        &INCIDENT_HEADER,
        dataset.incident_records.iter().map(IncidentRecord::to_row),
    )?;
    write_csv(
        &path(RESPONSES_FILE),
        &RESPONSE_HEADER,
        dataset.response_records.iter().map(ResponseRecord::to_row),
    )?;
    write_csv(
        &path(VEHICLES_FILE),
        &VEHICLE_HEADER,
        dataset.vehicle_records.iter().map(VehicleRecord::to_row),
    )
}
