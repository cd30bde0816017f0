use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{GridPoint, NodeId, RoadGraph, RouteError, VehicleClass};

/// A planned journey. Times are seconds since the Unix epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub origin: NodeId,
    pub destination: NodeId,
    pub class: VehicleClass,
    /// Edge indices into [`RoadGraph::edges`], in travel order.
    pub edges: Vec<usize>,
    pub departure_time: f64,
    /// Time at which each edge is entered; `entry_times[0] == departure_time`.
    pub entry_times: Vec<f64>,
    pub total_length_m: f64,
    pub total_travel_time_s: f64,
}

impl Route {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn arrival_time(&self) -> f64 {
        self.departure_time + self.total_travel_time_s
    }

    /// Exit time of edge `i`.
    fn exit_time(&self, i: usize) -> f64 {
        self.entry_times
            .get(i + 1)
            .copied()
            .unwrap_or_else(|| self.arrival_time())
    }
}

#[derive(PartialEq)]
struct Label {
    key: f64,
    time: f64,
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (key, node)
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Earliest-arrival route from `origin` to `dest` departing at `departure`.
///
/// Each edge costs `length / speed(hour-of-week at entry)` for the given
/// vehicle class; edges the class may not use are skipped. Labels are settled
/// in order of arrival time plus a straight-line lower bound on the time
/// still needed, so the result is exact whenever arriving earlier at a node
/// never leads to arriving later downstream (always true for constant
/// profiles).
pub fn plan_route(
    graph: &RoadGraph,
    origin: NodeId,
    dest: NodeId,
    departure: f64,
    class: VehicleClass,
) -> Result<Route, RouteError> {
    let src = graph
        .node_ix(origin)
        .ok_or(RouteError::UnknownNode(origin))?;
    let dst = graph.node_ix(dest).ok_or(RouteError::UnknownNode(dest))?;
    route_between(graph, src, dst, departure, class)
}

pub(crate) fn route_between(
    graph: &RoadGraph,
    src: usize,
    dst: usize,
    departure: f64,
    class: VehicleClass,
) -> Result<Route, RouteError> {
    let origin = graph.node_at(src).id;
    let destination = graph.node_at(dst).id;
    let empty = |edges, entry_times, total_length_m, total_travel_time_s| Route {
        origin,
        destination,
        class,
        edges,
        departure_time: departure,
        entry_times,
        total_length_m,
        total_travel_time_s,
    };
    if src == dst {
        return Ok(empty(Vec::new(), Vec::new(), 0.0, 0.0));
    }

    let n = graph.node_count();
    let mut arrival = vec![f64::INFINITY; n];
    let mut pred_edge = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let target = graph.node_at(dst).position;
    arrival[src] = departure;
    heap.push(Label {
        key: departure + graph.time_lower_bound(src, &target),
        time: departure,
        node: src,
    });

    while let Some(Label { time, node, .. }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == dst {
            break;
        }
        for &e in graph.out_edges(node) {
            let edge = graph.edge(e);
            if !edge.access.permits(class) || settled[edge.to_ix] {
                continue;
            }
            let t = time + graph.traversal_time(e, class, time);
            if t < arrival[edge.to_ix] {
                arrival[edge.to_ix] = t;
                pred_edge[edge.to_ix] = e;
                heap.push(Label {
                    key: t + graph.time_lower_bound(edge.to_ix, &target),
                    time: t,
                    node: edge.to_ix,
                });
            }
        }
    }

    if !settled[dst] {
        return Err(RouteError::NoRoute {
            origin,
            dest: destination,
            class,
        });
    }

    let mut edges = Vec::new();
    let mut cur = dst;
    while cur != src {
        let e = pred_edge[cur];
        edges.push(e);
        cur = graph.edge(e).from_ix;
    }
    edges.reverse();

    let entry_times: Vec<f64> = edges
        .iter()
        .map(|&e| arrival[graph.edge(e).from_ix])
        .collect();
    let total_length_m = edges.iter().map(|&e| graph.edge(e).length_m).sum();
    Ok(empty(
        edges,
        entry_times,
        total_length_m,
        arrival[dst] - departure,
    ))
}

/// Snaps both points to the graph and returns the planned drive time.
pub fn estimate_travel_time(
    graph: &RoadGraph,
    origin: &GridPoint,
    dest: &GridPoint,
    departure: f64,
    class: VehicleClass,
) -> Result<f64, RouteError> {
    let src = graph.snap_ix(origin);
    let dst = graph.snap_ix(dest);
    route_between(graph, src, dst, departure, class).map(|r| r.total_travel_time_s)
}

/// Where a vehicle following `route` is after `elapsed` seconds.
///
/// Within an edge the position is interpolated linearly between its end
/// nodes; from `total_travel_time_s` onward the destination is returned.
pub fn position_along_route(route: &Route, graph: &RoadGraph, elapsed: f64) -> GridPoint {
    let dest = graph
        .node(route.destination)
        .map(|n| n.position)
        .unwrap_or_default();
    if route.is_empty() || elapsed >= route.total_travel_time_s {
        return dest;
    }
    let elapsed = elapsed.max(0.0);
    let now = route.departure_time + elapsed;
    for (i, &e) in route.edges.iter().enumerate() {
        let exit = route.exit_time(i);
        if now < exit {
            let edge = graph.edge(e);
            let entry = route.entry_times[i];
            let frac = ((now - entry) / (exit - entry)).clamp(0.0, 1.0);
            let a = graph.node_at(edge.from_ix).position;
            let b = graph.node_at(edge.to_ix).position;
            return a.lerp(&b, frac);
        }
    }
    dest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::{Access, GraphBuilder, SpeedProfile};

    fn line3() -> RoadGraph {
        let mut b = GraphBuilder::new();
        b.node(1, 0.0, 0.0)
            .node(2, 100.0, 0.0)
            .node(3, 200.0, 0.0)
            .profile(SpeedProfile::constant("p", 10.0))
            .road(1, 2, 100.0, "p", "p", Access::All)
            .road(2, 3, 100.0, "p", "p", Access::All);
        b.build().unwrap()
    }

    #[test]
    fn identity_route() {
        let g = line3();
        let r = plan_route(&g, NodeId(2), NodeId(2), 50.0, VehicleClass::Civilian).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.total_travel_time_s, 0.0);
        assert_eq!(r.total_length_m, 0.0);
        assert_eq!(
            position_along_route(&r, &g, 10.0),
            GridPoint::new(100.0, 0.0)
        );
    }

    #[test]
    fn three_node_line() {
        let g = line3();
        let r = plan_route(&g, NodeId(1), NodeId(3), 0.0, VehicleClass::Emergency).unwrap();
        assert_eq!(r.total_travel_time_s, 20.0);
        assert_eq!(r.total_length_m, 200.0);
        assert_eq!(r.entry_times, vec![0.0, 10.0]);
        assert_eq!(position_along_route(&r, &g, 0.0), GridPoint::new(0.0, 0.0));
        assert_eq!(
            position_along_route(&r, &g, 15.0),
            GridPoint::new(150.0, 0.0)
        );
        assert_eq!(
            position_along_route(&r, &g, 20.0),
            GridPoint::new(200.0, 0.0)
        );
        assert_eq!(
            position_along_route(&r, &g, 1e9),
            GridPoint::new(200.0, 0.0)
        );
    }

    #[test]
    fn unknown_and_unreachable() {
        let g = line3();
        assert_eq!(
            plan_route(&g, NodeId(1), NodeId(42), 0.0, VehicleClass::Emergency),
            Err(RouteError::UnknownNode(NodeId(42)))
        );
        let mut b = GraphBuilder::new();
        b.node(1, 0.0, 0.0)
            .node(2, 100.0, 0.0)
            .profile(SpeedProfile::constant("p", 10.0))
            .edge(1, 2, 100.0, "p", "p", Access::EmergencyOnly);
        let g = b.build().unwrap();
        assert!(matches!(
            plan_route(&g, NodeId(2), NodeId(1), 0.0, VehicleClass::Emergency),
            Err(RouteError::NoRoute { .. })
        ));
        assert!(matches!(
            plan_route(&g, NodeId(1), NodeId(2), 0.0, VehicleClass::Civilian),
            Err(RouteError::NoRoute { .. })
        ));
        assert!(plan_route(&g, NodeId(1), NodeId(2), 0.0, VehicleClass::Emergency).is_ok());
    }

    #[test]
    fn frozen_link_uses_entry_hour() {
        // Monday 00:00 2016-01-04; speed drops in hour 1.
        let monday = 1_451_865_600.0;
        let mut p = SpeedProfile::constant("p", 10.0);
        p.speeds[1] = 1.0;
        let mut b = GraphBuilder::new();
        b.node(1, 0.0, 0.0)
            .node(2, 100.0, 0.0)
            .node(3, 200.0, 0.0)
            .profile(p)
            .road(1, 2, 100.0, "p", "p", Access::All)
            .road(2, 3, 100.0, "p", "p", Access::All);
        let g = b.build().unwrap();
        // first edge entered at 3595 (hour 0) is frozen at 10 m/s even though it
        // ends in hour 1; the second edge starts in hour 1 at 1 m/s
        let r = plan_route(
            &g,
            NodeId(1),
            NodeId(3),
            monday + 3595.0,
            VehicleClass::Emergency,
        )
        .unwrap();
        assert_eq!(r.entry_times, vec![monday + 3595.0, monday + 3605.0]);
        assert!((r.total_travel_time_s - 110.0).abs() < 1e-9);
    }

    #[test]
    fn emergency_shortcut() {
        let mut b = GraphBuilder::new();
        b.node(1, 0.0, 0.0)
            .node(2, 1000.0, 0.0)
            .node(3, 500.0, 2000.0)
            .profile(SpeedProfile::constant("p", 10.0))
            .road(1, 2, 1000.0, "p", "p", Access::EmergencyOnly)
            .road(1, 3, 2100.0, "p", "p", Access::All)
            .road(3, 2, 2100.0, "p", "p", Access::All);
        let g = b.build().unwrap();
        let a = GridPoint::new(10.0, 0.0);
        let z = GridPoint::new(990.0, 10.0);
        let em = estimate_travel_time(&g, &a, &z, 0.0, VehicleClass::Emergency).unwrap();
        let civ = estimate_travel_time(&g, &a, &z, 0.0, VehicleClass::Civilian).unwrap();
        assert_eq!(em, 100.0);
        assert_eq!(civ, 420.0);
        assert_eq!(
            estimate_travel_time(
                &g,
                &a,
                &GridPoint::new(0.0, 1.0),
                0.0,
                VehicleClass::Civilian
            )
            .unwrap(),
            0.0
        );
    }
}
