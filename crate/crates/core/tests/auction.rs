use std::cell::Cell;

use dispatch_core::auction::{run_ssi_auction, BidPolicy, Bidder};
use dispatch_core::fleet::{Category, Incident, IncidentId, VehicleId};
use dispatch_core::roadnet::GridPoint;
use proptest::prelude::*;

fn tasks(n: u64) -> Vec<Incident> {
    (1..=n)
        .map(|i| Incident::new(i, 0, GridPoint::new(0.0, 0.0), Category::ARed2, 1))
        .collect()
}

/// Bids `base[task] + load`, where load grows by `penalty` per won task.
struct Loaded {
    id: u64,
    base: Vec<f64>,
    penalty: f64,
    load: Cell<f64>,
}

impl Bidder for Loaded {
    fn id(&self) -> VehicleId {
        VehicleId(self.id)
    }

    fn bid_factors(&self, task: &Incident) -> Result<Vec<f64>, String> {
        Ok(vec![self.base[task.id.0 as usize - 1] + self.load.get()])
    }

    fn commit(&mut self, _task: &Incident) {
        self.load.set(self.load.get() + self.penalty);
    }
}

fn loaded(matrix: &[Vec<f64>], penalty: f64) -> Vec<Loaded> {
    matrix
        .iter()
        .enumerate()
        .map(|(i, row)| Loaded {
            id: i as u64 + 1,
            base: row.clone(),
            penalty,
            load: Cell::new(0.0),
        })
        .collect()
}

/// Independent greedy: repeatedly take the cheapest (bid, vehicle, task).
fn greedy(matrix: &[Vec<f64>], penalty: f64) -> Vec<(u64, u64)> {
    let mut load = vec![0.0; matrix.len()];
    let mut open: Vec<usize> = (0..matrix[0].len()).collect();
    let mut out = Vec::new();
    while !open.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None;
        for (v, row) in matrix.iter().enumerate() {
            for &t in &open {
                let cand = (row[t] + load[v], v, t);
                if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                    best = Some(cand);
                }
            }
        }
        let (_, v, t) = best.unwrap();
        load[v] += penalty;
        open.retain(|&x| x != t);
        out.push((t as u64 + 1, v as u64 + 1));
    }
    out
}

#[test]
fn three_by_four_matches_greedy() {
    let matrix = vec![
        vec![120.0, 300.0, 80.0, 410.0],
        vec![90.0, 310.0, 200.0, 150.0],
        vec![400.0, 95.0, 85.0, 160.0],
    ];
    for penalty in [0.0, 50.0, 1000.0] {
        let mut bidders = loaded(&matrix, penalty);
        let out = run_ssi_auction(&tasks(4), &mut bidders, &BidPolicy::travel_time());
        let order: Vec<(u64, u64)> = out
            .round_log
            .iter()
            .filter_map(|r| r.award.as_ref())
            .map(|a| (a.task.0, a.bidder.0))
            .collect();
        assert_eq!(order, greedy(&matrix, penalty), "penalty {penalty}");
        assert_eq!(out.round_log.len(), 4);
        assert!(out.unallocated.is_empty());
    }
    // without load, vehicle 1 takes task 3 first
    let mut bidders = loaded(&matrix, 0.0);
    let out = run_ssi_auction(&tasks(4), &mut bidders, &BidPolicy::travel_time());
    assert_eq!(out.round_log[0].award.as_ref().unwrap().task, IncidentId(3));
}

struct Fixed(u64, f64);

impl Bidder for Fixed {
    fn id(&self) -> VehicleId {
        VehicleId(self.0)
    }

    fn bid_factors(&self, _task: &Incident) -> Result<Vec<f64>, String> {
        Ok(vec![self.1])
    }
}

fn winner(bids: &[(u64, f64)], policy: &BidPolicy) -> Option<VehicleId> {
    let mut bidders: Vec<Fixed> = bids.iter().map(|&(id, v)| Fixed(id, v)).collect();
    run_ssi_auction(&tasks(1), &mut bidders, policy)
        .awards
        .get(&IncidentId(1))
        .copied()
}

fn bids_strategy() -> impl Strategy<Value = Vec<(u64, f64)>> {
    // few distinct integer values force ties
    prop::collection::btree_map(1u64..1000, 0u32..20, 2..=30).prop_map(|m| {
        m.into_iter()
            .map(|(id, v)| (id, f64::from(v) * 10.0))
            .collect()
    })
}

proptest! {
    #[test]
    fn award_is_lexicographic_argmin(bids in bids_strategy()) {
        let expected = bids
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|&(id, _)| VehicleId(id));
        prop_assert_eq!(winner(&bids, &BidPolicy::travel_time()), expected);
    }

    #[test]
    fn bidder_order_does_not_matter(bids in bids_strategy(), rot in 0usize..30) {
        let mut shuffled = bids.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let policy = BidPolicy::travel_time();
        prop_assert_eq!(winner(&bids, &policy), winner(&shuffled, &policy));
    }

    #[test]
    fn positive_weight_scaling_keeps_winner(bids in bids_strategy(), c in 0.001f64..1000.0) {
        let policy = BidPolicy::travel_time();
        prop_assert_eq!(winner(&bids, &policy), winner(&bids, &policy.scaled(c)));
    }

    #[test]
    fn greedy_equivalence_random(
        matrix in prop::collection::vec(prop::collection::vec(0u32..50, 4), 3),
        penalty in 0u32..40,
    ) {
        let m: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|&x| f64::from(x)).collect()).collect();
        let mut bidders = loaded(&m, f64::from(penalty));
        let out = run_ssi_auction(&tasks(4), &mut bidders, &BidPolicy::travel_time());
        let order: Vec<(u64, u64)> = out
            .round_log
            .iter()
            .filter_map(|r| r.award.as_ref())
            .map(|a| (a.task.0, a.bidder.0))
            .collect();
        prop_assert_eq!(order, greedy(&m, f64::from(penalty)));
    }
}
