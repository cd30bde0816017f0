#![allow(dead_code)]

use std::collections::HashMap;
use std::ops::Range;

use dispatch_core::roadnet::{Access, GraphBuilder, NodeId, RoadGraph, SpeedProfile, VehicleClass};
use rand::Rng;

/// Random graph with constant-speed profiles. Each edge is `stretch` times
/// the straight-line distance between its ends.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    nodes: usize,
    edges: usize,
    stretch: Range<f64>,
) -> RoadGraph {
    random_graph_with(rng, nodes, edges, stretch, false)
}

/// As [`random_graph`], optionally with random hourly speeds.
pub fn random_graph_with<R: Rng>(
    rng: &mut R,
    nodes: usize,
    edges: usize,
    stretch: Range<f64>,
    hourly: bool,
) -> RoadGraph {
    let mut b = GraphBuilder::new();
    let mut pos = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (e, n) = (rng.random_range(0.0..5000.0), rng.random_range(0.0..5000.0));
        pos.push((e, n));
        b.node(i as u64 + 1, e, n);
    }
    let profiles = 4;
    for p in 0..profiles {
        let mut profile = SpeedProfile::constant(format!("p{p}"), rng.random_range(1.0..60.0));
        if hourly {
            for v in profile.speeds.iter_mut() {
                *v = rng.random_range(1.0..60.0);
            }
        }
        b.profile(profile);
    }
    for _ in 0..edges {
        let a = rng.random_range(0..nodes);
        let z = rng.random_range(0..nodes);
        if a == z {
            continue;
        }
        let straight = ((pos[a].0 - pos[z].0).powi(2) + (pos[a].1 - pos[z].1).powi(2)).sqrt();
        let length = (straight * rng.random_range(stretch.clone())).max(1.0);
        let access = if rng.random_bool(0.2) {
            Access::EmergencyOnly
        } else {
            Access::All
        };
        b.edge(
            a as u64 + 1,
            z as u64 + 1,
            length,
            &format!("p{}", rng.random_range(0..profiles)),
            &format!("p{}", rng.random_range(0..profiles)),
            access,
        );
    }
    b.build().unwrap()
}

/// Bellman–Ford earliest arrival times from `origin` under frozen-link
/// costs; unreachable nodes are absent.
pub fn oracle_arrivals(
    graph: &RoadGraph,
    origin: NodeId,
    departure: f64,
    class: VehicleClass,
) -> HashMap<NodeId, f64> {
    let speeds: HashMap<&str, &[f64]> = graph
        .profiles()
        .iter()
        .map(|p| (p.id.as_str(), &p.speeds[..]))
        .collect();
    // hour 0 is Monday 00:00; the epoch fell on a Thursday
    let hour = |t: f64| ((t / 3600.0).floor() as i64 + 72).rem_euclid(168) as usize;
    let mut dist: HashMap<NodeId, f64> = HashMap::new();
    dist.insert(origin, departure);
    for _ in 0..graph.node_count() {
        let mut changed = false;
        for e in graph.edges() {
            if e.access == Access::EmergencyOnly && class == VehicleClass::Civilian {
                continue;
            }
            let Some(&d) = dist.get(&e.from) else {
                continue;
            };
            let profile = match class {
                VehicleClass::Emergency => &e.profile_emergency,
                VehicleClass::Civilian => &e.profile_civilian,
            };
            let t = d + e.length_m / speeds[profile.as_str()][hour(d)];
            if dist.get(&e.to).is_none_or(|&cur| t < cur) {
                dist.insert(e.to, t);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Travel times from `origin` over constant profiles.
pub fn oracle_times(
    graph: &RoadGraph,
    origin: NodeId,
    class: VehicleClass,
) -> HashMap<NodeId, f64> {
    oracle_arrivals(graph, origin, 0.0, class)
}
