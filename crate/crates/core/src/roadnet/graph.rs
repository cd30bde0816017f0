use std::collections::HashMap;

use super::{
    Access, GraphError, GridPoint, NodeId, SpeedProfile, VehicleClass, HOURS_PER_WEEK,
    MAX_SPEED_MPS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNode {
    pub id: NodeId,
    pub position: GridPoint,
}

/// A directed road segment. An undirected road is two edges.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub profile_emergency: String,
    pub profile_civilian: String,
    pub access: Access,
    pub(super) from_ix: usize,
    pub(super) to_ix: usize,
    pub(super) emergency_ix: usize,
    pub(super) civilian_ix: usize,
}

/// Immutable, validated road network.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    nodes: Vec<RoadNode>,
    node_index: HashMap<NodeId, usize>,
    edges: Vec<RoadEdge>,
    // CSR adjacency: out-edges of node i are adjacency[offsets[i]..offsets[i + 1]]
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
    profiles: Vec<SpeedProfile>,
    max_speed: f64,
    // seconds per straight-line metre that no route can beat
    min_pace: f64,
}

impl RoadGraph {
    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn profiles(&self) -> &[SpeedProfile] {
        &self.profiles
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&RoadNode> {
        self.node_index.get(&id).map(|&ix| &self.nodes[ix])
    }

    pub(crate) fn node_ix(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    pub(crate) fn node_at(&self, ix: usize) -> &RoadNode {
        &self.nodes[ix]
    }

    pub fn edge(&self, ix: usize) -> &RoadEdge {
        &self.edges[ix]
    }

    /// Indices of the edges leaving `ix`, in edge-list order.
    pub(crate) fn out_edges(&self, ix: usize) -> &[usize] {
        &self.adjacency[self.offsets[ix]..self.offsets[ix + 1]]
    }

    /// Largest speed in any profile; bounds how far a vehicle can move per second.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    /// Lower bound on travel time from node `ix` to `target`, from the
    /// straight-line distance, the fastest speed and the smallest ratio of
    /// edge length to endpoint distance.
    pub(crate) fn time_lower_bound(&self, ix: usize, target: &GridPoint) -> f64 {
        self.min_pace * self.nodes[ix].position.distance(target)
    }

    /// Frozen-link traversal time of edge `ix` entered at `entry_time`.
    pub fn traversal_time(&self, ix: usize, class: VehicleClass, entry_time: f64) -> f64 {
        let edge = &self.edges[ix];
        let profile = match class {
            VehicleClass::Emergency => edge.emergency_ix,
            VehicleClass::Civilian => edge.civilian_ix,
        };
        edge.length_m / self.profiles[profile].speed_at(entry_time)
    }

    /// Node nearest to `p` by Euclidean distance; ties go to the smallest id.
    pub fn snap_to_node(&self, p: &GridPoint) -> NodeId {
        self.nodes[self.snap_ix(p)].id
    }

    pub(crate) fn snap_ix(&self, p: &GridPoint) -> usize {
        let mut best = 0;
        let mut best_d = self.nodes[0].position.distance_sq(p);
        for (ix, node) in self.nodes.iter().enumerate().skip(1) {
            let d = node.position.distance_sq(p);
            if d < best_d || (d == best_d && node.id < self.nodes[best].id) {
                best = ix;
                best_d = d;
            }
        }
        best
    }
}

/// Collects nodes, profiles and edges, then validates them into a [`RoadGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<RoadNode>,
    profiles: Vec<SpeedProfile>,
    edges: Vec<(NodeId, NodeId, f64, String, String, Access)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, id: u64, easting: f64, northing: f64) -> &mut Self {
        self.nodes.push(RoadNode {
            id: NodeId(id),
            position: GridPoint::new(easting, northing),
        });
        self
    }

    pub fn profile(&mut self, profile: SpeedProfile) -> &mut Self {
        self.profiles.push(profile);
        self
    }

    pub fn edge(
        &mut self,
        from: u64,
        to: u64,
        length_m: f64,
        profile_emergency: &str,
        profile_civilian: &str,
        access: Access,
    ) -> &mut Self {
        self.edges.push((
            NodeId(from),
            NodeId(to),
            length_m,
            profile_emergency.to_owned(),
            profile_civilian.to_owned(),
            access,
        ));
        self
    }

    /// Adds a pair of opposing edges sharing profiles and access.
    pub fn road(
        &mut self,
        a: u64,
        b: u64,
        length_m: f64,
        profile_emergency: &str,
        profile_civilian: &str,
        access: Access,
    ) -> &mut Self {
        self.edge(a, b, length_m, profile_emergency, profile_civilian, access);
        self.edge(b, a, length_m, profile_emergency, profile_civilian, access)
    }

    pub fn build(&self) -> Result<RoadGraph, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut node_index = HashMap::with_capacity(self.nodes.len());
        for (ix, node) in self.nodes.iter().enumerate() {
            if !node.position.is_valid() {
                return Err(GraphError::InvalidPosition(node.id));
            }
            if node_index.insert(node.id, ix).is_some() {
                return Err(GraphError::DuplicateNode(node.id));
            }
        }

        let mut profile_index = HashMap::with_capacity(self.profiles.len());
        let mut max_speed: f64 = 0.0;
        for (ix, profile) in self.profiles.iter().enumerate() {
            for hour in 0..HOURS_PER_WEEK {
                let speed = profile.speeds[hour];
                if !(speed > 0.0 && speed <= MAX_SPEED_MPS) {
                    return Err(GraphError::InvalidSpeed {
                        profile: profile.id.clone(),
                        hour,
                        speed,
                    });
                }
            }
            max_speed = max_speed.max(profile.max_speed());
            if profile_index.insert(profile.id.clone(), ix).is_some() {
                return Err(GraphError::DuplicateProfile(profile.id.clone()));
            }
        }

        let lookup_profile = |id: &str| {
            profile_index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::UnknownProfile(id.to_owned()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (from, to, length_m, pe, pc, access) in &self.edges {
            let from_ix = *node_index.get(from).ok_or(GraphError::UnknownNode(*from))?;
            let to_ix = *node_index.get(to).ok_or(GraphError::UnknownNode(*to))?;
            if !(*length_m > 0.0 && length_m.is_finite()) {
                return Err(GraphError::NonPositiveLength {
                    from: *from,
                    to: *to,
                    length: *length_m,
                });
            }
            edges.push(RoadEdge {
                from: *from,
                to: *to,
                length_m: *length_m,
                profile_emergency: pe.clone(),
                profile_civilian: pc.clone(),
                access: *access,
                from_ix,
                to_ix,
                emergency_ix: lookup_profile(pe)?,
                civilian_ix: lookup_profile(pc)?,
            });
        }

        let mut detour: f64 = 1.0;
        for edge in &edges {
            let straight = self.nodes[edge.from_ix]
                .position
                .distance(&self.nodes[edge.to_ix].position);
            if straight > 0.0 {
                detour = detour.min(edge.length_m / straight);
            }
        }
        let min_pace = if max_speed > 0.0 {
            detour / max_speed
        } else {
            0.0
        };

        let mut offsets = vec![0usize; self.nodes.len() + 1];
        for edge in &edges {
            offsets[edge.from_ix + 1] += 1;
        }
        for i in 0..self.nodes.len() {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut adjacency = vec![0usize; edges.len()];
        for (ix, edge) in edges.iter().enumerate() {
            adjacency[cursor[edge.from_ix]] = ix;
            cursor[edge.from_ix] += 1;
        }

        Ok(RoadGraph {
            nodes: self.nodes.clone(),
            node_index,
            edges,
            offsets,
            adjacency,
            profiles: self.profiles.clone(),
            max_speed,
            min_pace,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> GraphBuilder {
        let mut b = GraphBuilder::new();
        b.node(1, 0.0, 0.0)
            .node(2, 100.0, 0.0)
            .profile(SpeedProfile::constant("p", 10.0))
            .edge(1, 2, 100.0, "p", "p", Access::All);
        b
    }

    #[test]
    fn minimal_graph() {
        let g = line().build().unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out_edges(0), &[0]);
        assert!(g.out_edges(1).is_empty());
        assert_eq!(g.max_speed(), 10.0);
    }

    #[test]
    fn dangling_endpoint_is_named() {
        let mut b = line();
        b.edge(2, 9, 10.0, "p", "p", Access::All);
        let err = b.build().unwrap_err();
        assert!(matches!(err, GraphError::UnknownNode(NodeId(9))));
        assert!(err.to_string().contains('9'));
    }

    #[test]
    fn rejects_bad_lengths_and_speeds() {
        let mut b = line();
        b.edge(2, 1, 0.0, "p", "p", Access::All);
        assert!(matches!(
            b.build(),
            Err(GraphError::NonPositiveLength { .. })
        ));

        let mut b = line();
        b.profile(SpeedProfile::constant("fast", 61.0));
        assert!(matches!(b.build(), Err(GraphError::InvalidSpeed { .. })));

        let mut b = line();
        let mut p = SpeedProfile::constant("z", 5.0);
        p.speeds[17] = 0.0;
        b.profile(p);
        assert!(matches!(
            b.build(),
            Err(GraphError::InvalidSpeed { hour: 17, .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let mut b = line();
        b.node(1, 5.0, 5.0);
        assert!(matches!(
            b.build(),
            Err(GraphError::DuplicateNode(NodeId(1)))
        ));
        assert!(matches!(
            GraphBuilder::new().build(),
            Err(GraphError::Empty)
        ));
        let mut b = line();
        b.edge(1, 2, 5.0, "p", "nope", Access::All);
        assert!(matches!(b.build(), Err(GraphError::UnknownProfile(_))));
    }

    #[test]
    fn snap_exact_and_ties() {
        let mut b = GraphBuilder::new();
        b.node(7, 200.0, 0.0)
            .node(3, 0.0, 0.0)
            .node(5, 100.0, 100.0)
            .profile(SpeedProfile::constant("p", 10.0));
        let g = b.build().unwrap();
        assert_eq!(g.snap_to_node(&GridPoint::new(100.0, 100.0)), NodeId(5));
        // equidistant between 3 and 7
        assert_eq!(g.snap_to_node(&GridPoint::new(100.0, -0.0)), NodeId(3));
    }
}
