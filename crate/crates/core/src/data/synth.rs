//! Seeded synthetic city: grid road network, fleet timelines, Poisson
//! incidents and an imperfect historical dispatcher.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::{
    quantize_location, write_dataset, DataError, Dataset, IncidentRecord, ResponseRecord,
    VehicleRecord,
};
use crate::fleet::{Category, CcgId, IncidentId, VehicleId, VehicleType, Waypoint};
use crate::roadnet::{
    self, save_graph, Access, GraphBuilder, GridPoint, RoadGraph, SpeedProfile, VehicleClass,
    HOURS_PER_WEEK, MAX_SPEED_MPS,
};

pub const MANIFEST_FILE: &str = "manifest.json";

const EMERGENCY_RESIDENTIAL: &str = "emergency_residential";
const EMERGENCY_ARTERIAL: &str = "emergency_arterial";
const CIVILIAN_RESIDENTIAL: &str = "civilian_residential";
const CIVILIAN_ARTERIAL: &str = "civilian_arterial";

/// Generator parameters. Read from a flat `key = value` TOML file; missing
/// keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub spacing_m: f64,
    pub origin_easting_m: f64,
    pub origin_northing_m: f64,
    /// Every n-th row and column is an arterial road.
    pub arterial_every: usize,
    /// Probability that a grid cell gets an emergency-only diagonal.
    pub emergency_link_fraction: f64,
    pub civilian_residential_mps: f64,
    pub civilian_arterial_mps: f64,
    pub emergency_residential_mps: f64,
    pub emergency_arterial_mps: f64,
    pub ccg_cols: usize,
    pub ccg_rows: usize,
    pub hospitals: usize,
    pub vehicles: usize,
    pub fru_fraction: f64,
    pub start_time: i64,
    pub days: u32,
    pub incidents_per_day: f64,
    /// Exact incident count; overrides the Poisson rate when set.
    pub incident_count: Option<usize>,
    pub category_a_fraction: f64,
    /// Share of category A incidents that are A_red1.
    pub red1_fraction: f64,
    pub type_determined_probability: f64,
    pub type_determined_min_s: i64,
    pub type_determined_max_s: i64,
    pub dispatch_delay_min_s: i64,
    pub dispatch_delay_max_s: i64,
    pub on_scene_min_s: i64,
    pub on_scene_max_s: i64,
    pub conveyance_probability: f64,
    pub conveyance_speed_mps: f64,
    /// The historical dispatcher ranks idle vehicles by a noisy time estimate
    /// and takes the k-th (1 = best).
    pub hist_rank: usize,
    pub hist_noise_s: f64,
    pub hist_estimate_speed_mps: f64,
    /// Log-scale sigma of observed over simulated travel time.
    pub observed_noise_sigma: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            grid_cols: 100,
            grid_rows: 100,
            spacing_m: 100.0,
            origin_easting_m: 500_000.0,
            origin_northing_m: 150_000.0,
            arterial_every: 10,
            emergency_link_fraction: 0.15,
            civilian_residential_mps: 9.0,
            civilian_arterial_mps: 14.0,
            emergency_residential_mps: 12.0,
            emergency_arterial_mps: 20.0,
            ccg_cols: 2,
            ccg_rows: 2,
            hospitals: 4,
            vehicles: 40,
            fru_fraction: 0.3,
            start_time: 1_451_606_400,
            days: 366,
            incidents_per_day: 30.0,
            incident_count: None,
            category_a_fraction: 0.75,
            red1_fraction: 0.1,
            type_determined_probability: 0.8,
            type_determined_min_s: 30,
            type_determined_max_s: 200,
            dispatch_delay_min_s: 20,
            dispatch_delay_max_s: 120,
            on_scene_min_s: 900,
            on_scene_max_s: 2700,
            conveyance_probability: 0.6,
            conveyance_speed_mps: 10.0,
            hist_rank: 1,
            hist_noise_s: 90.0,
            hist_estimate_speed_mps: 12.0,
            observed_noise_sigma: 0.12,
        }
    }
}

impl GeneratorConfig {
    /// Smallest useful city: 2×2 grid, one vehicle, one incident.
    pub fn tiny() -> Self {
        Self {
            grid_cols: 2,
            grid_rows: 2,
            ccg_cols: 1,
            ccg_rows: 1,
            hospitals: 1,
            vehicles: 1,
            days: 1,
            incident_count: Some(1),
            ..Self::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, DataError> {
        let cfg: Self = toml::from_str(s).map_err(|e| DataError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        Self::from_toml_str(&fs::read_to_string(path).map_err(DataError::io(path))?)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |msg: &str| Err(DataError::Config(msg.to_owned()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let speed = |x: f64| x > 0.0 && x <= MAX_SPEED_MPS;
        if self.grid_cols < 2 || self.grid_rows < 2 {
            return fail("grid must be at least 2×2");
        }
        if !(self.spacing_m > 0.0 && self.spacing_m.is_finite()) {
            return fail("spacing_m must be positive");
        }
        if !(self.origin_easting_m >= 0.0 && self.origin_northing_m >= 0.0)
            || !(self.origin_easting_m.is_finite() && self.origin_northing_m.is_finite())
        {
            return fail("origin must be finite and non-negative");
        }
        if self.arterial_every == 0 {
            return fail("arterial_every must be at least 1");
        }
        if ![
            self.emergency_link_fraction,
            self.fru_fraction,
            self.category_a_fraction,
            self.red1_fraction,
            self.type_determined_probability,
            self.conveyance_probability,
        ]
        .into_iter()
        .all(unit)
        {
            return fail("fractions and probabilities must lie in [0, 1]");
        }
        if ![
            self.civilian_residential_mps,
            self.civilian_arterial_mps,
            self.emergency_residential_mps,
            self.emergency_arterial_mps,
        ]
        .into_iter()
        .all(speed)
        {
            return fail("road speeds must lie in (0, 60] m/s");
        }
        if self.emergency_residential_mps < self.civilian_residential_mps
            || self.emergency_arterial_mps < self.civilian_arterial_mps
        {
            return fail("emergency speeds must not be below civilian speeds");
        }
        if self.ccg_cols == 0
            || self.ccg_rows == 0
            || self.ccg_cols > self.grid_cols
            || self.ccg_rows > self.grid_rows
        {
            return fail("CCG tiling must be non-empty and no finer than the grid");
        }
        if self.hospitals == 0 || self.vehicles == 0 || self.days == 0 {
            return fail("hospitals, vehicles and days must be positive");
        }
        if self.incident_count.is_none()
            && !(self.incidents_per_day > 0.0 && self.incidents_per_day.is_finite())
        {
            return fail("incidents_per_day must be positive");
        }
        let range_ok = |lo: i64, hi: i64| lo >= 0 && lo <= hi;
        if !range_ok(self.type_determined_min_s, self.type_determined_max_s)
            || !range_ok(self.dispatch_delay_min_s, self.dispatch_delay_max_s)
            || !range_ok(self.on_scene_min_s, self.on_scene_max_s)
        {
            return fail("delay ranges must satisfy 0 ≤ min ≤ max");
        }
        if !(self.conveyance_speed_mps > 0.0 && self.conveyance_speed_mps.is_finite())
            || !(self.hist_estimate_speed_mps > 0.0 && self.hist_estimate_speed_mps.is_finite())
        {
            return fail("estimate speeds must be positive");
        }
        if self.hist_rank == 0 {
            return fail("hist_rank must be at least 1");
        }
        if !(self.hist_noise_s >= 0.0 && self.hist_noise_s.is_finite())
            || !(self.observed_noise_sigma >= 0.0 && self.observed_noise_sigma.is_finite())
        {
            return fail("noise parameters must be finite and non-negative");
        }
        Ok(())
    }

    fn ccg_count(&self) -> usize {
        self.ccg_cols * self.ccg_rows
    }

    fn ccg_of(&self, row: usize, col: usize) -> u32 {
        let tr = row * self.ccg_rows / self.grid_rows;
        let tc = col * self.ccg_cols / self.grid_cols;
        (tr * self.ccg_cols + tc + 1) as u32
    }

    fn node_id(&self, row: usize, col: usize) -> u64 {
        (row * self.grid_cols + col + 1) as u64
    }

    fn node_point(&self, row: usize, col: usize) -> GridPoint {
        GridPoint::new(
            self.origin_easting_m + col as f64 * self.spacing_m,
            self.origin_northing_m + row as f64 * self.spacing_m,
        )
    }
}

/// Exact counts describing a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
    pub profiles: usize,
    pub ccgs: usize,
    pub hospitals: usize,
    pub vehicles: usize,
    pub idle_windows: usize,
    pub incidents: usize,
    pub incidents_by_category: BTreeMap<String, usize>,
    pub responses: usize,
    pub unanswered_incidents: usize,
    pub start_time: i64,
    pub end_time: i64,
    pub config: GeneratorConfig,
}

/// Generated graph, records and manifest, held in memory.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub graph: RoadGraph,
    pub dataset: Dataset,
    pub manifest: Manifest,
}

/// Multiplier on free-flow civilian speed for an hour of the week.
fn congestion(hour: usize) -> f64 {
    let (day, hod) = (hour / 24, hour % 24);
    if day < 5 {
        match hod {
            7..=9 | 16..=18 => 0.55,
            10..=15 => 0.8,
            0..=5 => 1.0,
            _ => 0.9,
        }
    } else {
        match hod {
            10..=18 => 0.85,
            _ => 1.0,
        }
    }
}

fn profiles(cfg: &GeneratorConfig) -> Vec<SpeedProfile> {
    let make = |id: &str, base: f64, emergency: bool| {
        let mut p = SpeedProfile::constant(id, base);
        for h in 0..HOURS_PER_WEEK {
            let c = congestion(h);
            // sirens recover part of the congestion loss
            let f = if emergency { 1.0 - 0.4 * (1.0 - c) } else { c };
            p.speeds[h] = base * f;
        }
        p
    };
    vec![
        make(CIVILIAN_RESIDENTIAL, cfg.civilian_residential_mps, false),
        make(CIVILIAN_ARTERIAL, cfg.civilian_arterial_mps, false),
        make(EMERGENCY_RESIDENTIAL, cfg.emergency_residential_mps, true),
        make(EMERGENCY_ARTERIAL, cfg.emergency_arterial_mps, true),
    ]
}

fn build_graph(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<RoadGraph, DataError> {
    let mut b = GraphBuilder::new();
    for p in profiles(cfg) {
        b.profile(p);
    }
    let (rows, cols) = (cfg.grid_rows, cfg.grid_cols);
    for r in 0..rows {
        for c in 0..cols {
            let p = cfg.node_point(r, c);
            b.node(cfg.node_id(r, c), p.easting, p.northing);
        }
    }
    let road = |arterial: bool| {
        if arterial {
            (EMERGENCY_ARTERIAL, CIVILIAN_ARTERIAL)
        } else {
            (EMERGENCY_RESIDENTIAL, CIVILIAN_RESIDENTIAL)
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let here = cfg.node_id(r, c);
            if c + 1 < cols {
                let (pe, pc) = road(r % cfg.arterial_every == 0);
                b.road(
                    here,
                    cfg.node_id(r, c + 1),
                    cfg.spacing_m,
                    pe,
                    pc,
                    Access::All,
                );
            }
            if r + 1 < rows {
                let (pe, pc) = road(c % cfg.arterial_every == 0);
                b.road(
                    here,
                    cfg.node_id(r + 1, c),
                    cfg.spacing_m,
                    pe,
                    pc,
                    Access::All,
                );
            }
            if r + 1 < rows && c + 1 < cols && rng.random::<f64>() < cfg.emergency_link_fraction {
                b.road(
                    here,
                    cfg.node_id(r + 1, c + 1),
                    cfg.spacing_m * std::f64::consts::SQRT_2,
                    EMERGENCY_RESIDENTIAL,
                    CIVILIAN_RESIDENTIAL,
                    Access::EmergencyOnly,
                );
            }
        }
    }
    Ok(b.build()?)
}

struct Site {
    row: usize,
    col: usize,
}

fn random_site(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Site {
    Site {
        row: rng.random_range(0..cfg.grid_rows),
        col: rng.random_range(0..cfg.grid_cols),
    }
}

fn point_of(cfg: &GeneratorConfig, site: &Site) -> Result<GridPoint, DataError> {
    let p = cfg.node_point(site.row, site.col);
    quantize_location(p.easting, p.northing)
}

struct FleetState {
    id: VehicleId,
    vtype: VehicleType,
    home_ccg: CcgId,
    station: GridPoint,
    completion: Waypoint,
    windows: Vec<VehicleRecord>,
}

impl FleetState {
    /// Where the control room believes the vehicle is: straight-line
    /// progress home at the estimate speed.
    fn believed_position(&self, t: i64, speed: f64) -> GridPoint {
        let d = self.completion.point.distance(&self.station);
        if d == 0.0 {
            return self.station;
        }
        let frac = ((t - self.completion.time) as f64 * speed / d).clamp(0.0, 1.0);
        self.completion.point.lerp(&self.station, frac)
    }

    fn window(&self, next: Option<Waypoint>) -> VehicleRecord {
        VehicleRecord {
            vehicle_id: self.id,
            vehicle_type: self.vtype,
            home_ccg: self.home_ccg,
            completion: self.completion,
            next_dispatch: next,
        }
    }
}

fn uniform_i64(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.random_range(lo..=hi)
}

/// Builds a synthetic dataset in memory.
pub fn synthesize(cfg: &GeneratorConfig, seed: u64) -> Result<SyntheticData, DataError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = build_graph(cfg, &mut rng)?;

    let hospitals: Vec<GridPoint> = (0..cfg.hospitals)
        .map(|_| point_of(cfg, &random_site(cfg, &mut rng)))
        .collect::<Result<_, _>>()?;

    let start = cfg.start_time;
    let end = start + i64::from(cfg.days) * 86_400;
    let mut fleet = Vec::with_capacity(cfg.vehicles);
    for i in 0..cfg.vehicles {
        let ccg = i % cfg.ccg_count();
        let (tr, tc) = (ccg / cfg.ccg_cols, ccg % cfg.ccg_cols);
        let site = Site {
            row: rng.random_range(
                tr * cfg.grid_rows / cfg.ccg_rows..(tr + 1) * cfg.grid_rows / cfg.ccg_rows,
            ),
            col: rng.random_range(
                tc * cfg.grid_cols / cfg.ccg_cols..(tc + 1) * cfg.grid_cols / cfg.ccg_cols,
            ),
        };
        let station = point_of(cfg, &site)?;
        let vtype = if rng.random::<f64>() < cfg.fru_fraction {
            VehicleType::Fru
        } else {
            VehicleType::Aeu
        };
        fleet.push(FleetState {
            id: VehicleId(i as u64 + 1),
            vtype,
            home_ccg: CcgId(cfg.ccg_of(site.row, site.col)),
            station,
            completion: Waypoint::new(start - 3600, station),
            windows: Vec::new(),
        });
    }

    let mut call_times: Vec<i64> = match cfg.incident_count {
        Some(n) => (0..n).map(|_| rng.random_range(start..end)).collect(),
        None => {
            let gap = Exp::new(cfg.incidents_per_day / 86_400.0)
                .map_err(|e| DataError::Config(e.to_string()))?;
            let mut out = Vec::new();
            let mut t = start as f64;
            loop {
                t += gap.sample(&mut rng);
                if t >= end as f64 {
                    break;
                }
                out.push(t.floor() as i64);
            }
            out
        }
    };
    call_times.sort_unstable();

    let mut incident_records = Vec::with_capacity(call_times.len());
    let mut sites = Vec::with_capacity(call_times.len());
    for (i, &call_time) in call_times.iter().enumerate() {
        let category = if rng.random::<f64>() < cfg.category_a_fraction {
            if rng.random::<f64>() < cfg.red1_fraction {
                Category::ARed1
            } else {
                Category::ARed2
            }
        } else {
            Category::ALL[2 + rng.random_range(0..4)]
        };
        let site = random_site(cfg, &mut rng);
        let type_determined_time = (category != Category::ARed1
            && rng.random::<f64>() < cfg.type_determined_probability)
            .then(|| {
                call_time
                    + uniform_i64(
                        &mut rng,
                        cfg.type_determined_min_s,
                        cfg.type_determined_max_s,
                    )
            });
        incident_records.push(IncidentRecord {
            incident_id: IncidentId(i as u64 + 1),
            call_time,
            category,
            position: point_of(cfg, &site)?,
            ccg_id: CcgId(cfg.ccg_of(site.row, site.col)),
            type_determined_time,
        });
        sites.push(site);
    }

    let noise = Normal::new(0.0, cfg.hist_noise_s).map_err(|e| DataError::Config(e.to_string()))?;
    let observed = LogNormal::new(0.0, cfg.observed_noise_sigma)
        .map_err(|e| DataError::Config(e.to_string()))?;
    let route_err =
        |e: roadnet::RouteError| DataError::Validation(format!("generator routing: {e}"));
    let mut response_records = Vec::new();
    for inc in &incident_records {
        let t = inc.call_time;
        let mut ranked: Vec<(f64, usize)> = fleet
            .iter()
            .enumerate()
            .filter(|(_, v)| v.completion.time < t)
            .map(|(ix, v)| {
                let d = v
                    .believed_position(t, cfg.hist_estimate_speed_mps)
                    .distance(&inc.position);
                (d / cfg.hist_estimate_speed_mps + noise.sample(&mut rng), ix)
            })
            .collect();
        if ranked.is_empty() {
            continue;
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let chosen = ranked[(cfg.hist_rank - 1).min(ranked.len() - 1)].1;
        let dispatch_time =
            t + uniform_i64(&mut rng, cfg.dispatch_delay_min_s, cfg.dispatch_delay_max_s);

        let v = &mut fleet[chosen];
        let home = roadnet::route_between(
            &graph,
            graph.snap_ix(&v.completion.point),
            graph.snap_ix(&v.station),
            v.completion.time as f64,
            VehicleClass::Emergency,
        )
        .map_err(route_err)?;
        let here = roadnet::position_along_route(
            &home,
            &graph,
            (dispatch_time - v.completion.time) as f64,
        );
        let dispatch_point = quantize_location(here.easting, here.northing)?;
        let drive = roadnet::route_between(
            &graph,
            graph.snap_ix(&dispatch_point),
            graph.snap_ix(&inc.position),
            dispatch_time as f64,
            VehicleClass::Emergency,
        )
        .map_err(route_err)?;
        let observed_s = (drive.total_travel_time_s * observed.sample(&mut rng)).round();
        let arrival_time = dispatch_time + observed_s as i64;
        response_records.push(ResponseRecord {
            incident_id: inc.incident_id,
            vehicle_id: v.id,
            dispatch_time,
            dispatch_point,
            arrival_time,
            observed_travel_time_s: observed_s,
        });

        let next = Waypoint::new(dispatch_time, dispatch_point);
        let record = v.window(Some(next));
        v.windows.push(record);
        let on_scene = uniform_i64(&mut rng, cfg.on_scene_min_s, cfg.on_scene_max_s);
        let done = arrival_time + on_scene;
        v.completion = if rng.random::<f64>() < cfg.conveyance_probability {
            let hospital = *hospitals
                .iter()
                .min_by(|a, b| {
                    a.distance(&inc.position)
                        .total_cmp(&b.distance(&inc.position))
                })
                .expect("at least one hospital");
            let convey = (hospital.distance(&inc.position) / cfg.conveyance_speed_mps).round();
            Waypoint::new(done + convey as i64, hospital)
        } else {
            Waypoint::new(done, inc.position)
        };
    }

    let mut vehicle_records = Vec::new();
    for v in &mut fleet {
        let last = v.window(None);
        v.windows.push(last);
        vehicle_records.append(&mut v.windows);
    }

    let mut incidents_by_category = BTreeMap::new();
    for inc in &incident_records {
        *incidents_by_category
            .entry(inc.category.to_string())
            .or_insert(0) += 1;
    }
    let manifest = Manifest {
        seed,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        profiles: graph.profiles().len(),
        ccgs: cfg.ccg_count(),
        hospitals: hospitals.len(),
        vehicles: fleet.len(),
        idle_windows: vehicle_records.len(),
        incidents: incident_records.len(),
        incidents_by_category,
        responses: response_records.len(),
        unanswered_incidents: incident_records.len() - response_records.len(),
        start_time: start,
        end_time: end,
        config: cfg.clone(),
    };
    let dataset = Dataset::from_records(incident_records, response_records, vehicle_records)?;
    Ok(SyntheticData {
        graph,
        dataset,
        manifest,
    })
}

/// Generates a dataset and writes graph files, record files and
/// `manifest.json` into `out`.
pub fn generate_synthetic(
    cfg: &GeneratorConfig,
    seed: u64,
    out: impl AsRef<Path>,
) -> Result<Manifest, DataError> {
    let out = out.as_ref();
    let data = synthesize(cfg, seed)?;
    fs::create_dir_all(out).map_err(DataError::io(out))?;
    save_graph(&data.graph, out)?;
    write_dataset(&data.dataset, out)?;
    let path = out.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&data.manifest)
        .map_err(|e| DataError::Validation(e.to_string()))?;
    json.push('\n');
    fs::write(&path, json).map_err(DataError::io(&path))?;
    Ok(data.manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ingest_dir;
    use crate::roadnet::{hour_of_week, load_graph};

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            grid_cols: 12,
            grid_rows: 10,
            arterial_every: 4,
            vehicles: 6,
            days: 3,
            incidents_per_day: 20.0,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn tiny_config_loads() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_synthetic(&GeneratorConfig::tiny(), 1, dir.path()).unwrap();
        assert_eq!((m.nodes, m.vehicles, m.incidents), (4, 1, 1));
        let g = load_graph(dir.path()).unwrap();
        let ds = ingest_dir(dir.path()).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(ds.incidents().len(), 1);
        assert_eq!(ds.response_records.len(), m.responses);
    }

    #[test]
    fn emergency_never_slower_than_civilian() {
        let ps = profiles(&GeneratorConfig::default());
        for h in 0..HOURS_PER_WEEK {
            assert!(ps[2].speeds[h] >= ps[0].speeds[h]);
            assert!(ps[3].speeds[h] >= ps[1].speeds[h]);
        }
        // Monday 08:00 is rush hour
        assert_eq!(ps[0].speeds[8], 9.0 * 0.55);
        assert_eq!(hour_of_week(1_451_865_600.0 + 8.0 * 3600.0), 8);
    }

    #[test]
    fn records_are_consistent() {
        let data = synthesize(&small(), 5).unwrap();
        let ds = &data.dataset;
        assert_eq!(ds.incidents().len(), data.manifest.incidents);
        assert_eq!(
            data.manifest.incidents_by_category.values().sum::<usize>(),
            data.manifest.incidents
        );
        for r in &ds.response_records {
            let inc = ds.incident(r.incident_id).unwrap();
            assert!(r.dispatch_time >= inc.call_time);
            assert_eq!(
                r.arrival_time - r.dispatch_time,
                r.observed_travel_time_s as i64
            );
            let v = ds.vehicles().iter().find(|v| v.id == r.vehicle_id).unwrap();
            assert!(v.idle_at(inc.call_time as f64).is_some());
        }
        for inc in ds.incidents() {
            if inc.category == Category::ARed1 {
                assert_eq!(inc.type_determined_time, None);
            }
        }
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg = GeneratorConfig::from_toml_str("grid_cols = 5\nvehicles = 3\n").unwrap();
        assert_eq!((cfg.grid_cols, cfg.vehicles, cfg.grid_rows), (5, 3, 100));
        assert!(matches!(
            GeneratorConfig::from_toml_str("grid_colls = 5"),
            Err(DataError::Config(_))
        ));
        assert!(matches!(
            GeneratorConfig::from_toml_str("emergency_residential_mps = 5.0"),
            Err(DataError::Config(_))
        ));
        assert!(matches!(
            GeneratorConfig::from_toml_str("grid_rows = 1"),
            Err(DataError::Config(_))
        ));
        let bad = GeneratorConfig {
            dispatch_delay_min_s: 50,
            dispatch_delay_max_s: 10,
            ..GeneratorConfig::tiny()
        };
        assert!(synthesize(&bad, 0).is_err());
    }
}
