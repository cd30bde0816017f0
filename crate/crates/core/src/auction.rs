//! Sequential single-item (SSI) auction.
//!
//! Each round the auctioneer announces every unallocated task, every bidder
//! prices every announced task, and the single lowest bid overall wins. An
//! awarded bidder is told about its new commitment through
//! [`Bidder::commit`], so its later bids may reflect it. Rounds continue
//! until all tasks are allocated or no valid bid remains.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::fleet::{Incident, IncidentId, VehicleId};

/// Weights for a linear bid over named factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidPolicy {
    factor_names: Vec<String>,
    weights: Vec<f64>,
}

impl BidPolicy {
    pub fn new(factor_names: Vec<String>, weights: Vec<f64>) -> Result<Self, BidError> {
        if factor_names.len() != weights.len() {
            return Err(BidError::FactorCount {
                expected: factor_names.len(),
                got: weights.len(),
            });
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(BidError::NonFiniteWeight { index });
        }
        Ok(Self {
            factor_names,
            weights,
        })
    }

    /// A single factor, estimated travel time in seconds, with weight 1.
    pub fn travel_time() -> Self {
        Self {
            factor_names: vec!["travel_time_s".to_owned()],
            weights: vec![1.0],
        }
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Same factors with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            factor_names: self.factor_names.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BidError {
    #[error("expected {expected} bid factors, got {got}")]
    FactorCount { expected: usize, got: usize },
    #[error("bid factor {index} is not finite")]
    NonFiniteFactor { index: usize },
    #[error("weight {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("bid value is not finite")]
    NonFiniteValue,
}

/// `Σ wᵢ·fᵢ` over the policy's factors.
pub fn compute_bid(policy: &BidPolicy, factors: &[f64]) -> Result<f64, BidError> {
    if factors.len() != policy.weights.len() {
        return Err(BidError::FactorCount {
            expected: policy.weights.len(),
            got: factors.len(),
        });
    }
    if let Some(index) = factors.iter().position(|f| !f.is_finite()) {
        return Err(BidError::NonFiniteFactor { index });
    }
    let value: f64 = policy.weights.iter().zip(factors).map(|(w, f)| w * f).sum();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(BidError::NonFiniteValue)
    }
}

/// A participant that prices tasks.
pub trait Bidder {
    fn id(&self) -> VehicleId;

    /// Bid factors for `task`, one per policy factor. An error means the
    /// bidder failed to answer this round.
    fn bid_factors(&self, task: &Incident) -> Result<Vec<f64>, String>;

    /// Called when this bidder wins `task`.
    fn commit(&mut self, _task: &Incident) {}
}

impl<B: Bidder + ?Sized> Bidder for Box<B> {
    fn id(&self) -> VehicleId {
        (**self).id()
    }

    fn bid_factors(&self, task: &Incident) -> Result<Vec<f64>, String> {
        (**self).bid_factors(task)
    }

    fn commit(&mut self, task: &Incident) {
        (**self).commit(task)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bid {
    pub bidder: VehicleId,
    pub task: IncidentId,
    pub factors: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedBid {
    pub bidder: VehicleId,
    pub task: IncidentId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Award {
    pub task: IncidentId,
    pub bidder: VehicleId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unallocated {
    pub task: IncidentId,
    pub reason: String,
}

/// Audit record of one auction round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub announced: Vec<IncidentId>,
    pub bids: Vec<Bid>,
    pub rejected: Vec<RejectedBid>,
    pub award: Option<Award>,
    pub unallocated: Vec<Unallocated>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub awards: BTreeMap<IncidentId, VehicleId>,
    pub unallocated: BTreeMap<IncidentId, String>,
    pub round_log: Vec<RoundRecord>,
    /// Wall-clock seconds spent computing the allocation.
    pub deliberation_time: f64,
}

impl AuctionOutcome {
    /// Writes the round log as JSON lines, one round per line.
    pub fn write_round_log<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for round in &self.round_log {
            serde_json::to_writer(&mut out, round)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs announce, collect and award steps, logging each round.
pub struct Auctioneer<'a> {
    policy: &'a BidPolicy,
    tasks: Vec<&'a Incident>,
    open: Vec<usize>,
    outcome: AuctionOutcome,
}

impl<'a> Auctioneer<'a> {
    pub fn new(tasks: &'a [Incident], policy: &'a BidPolicy) -> Self {
        Self {
            policy,
            tasks: tasks.iter().collect(),
            open: (0..tasks.len()).collect(),
            outcome: AuctionOutcome {
                awards: BTreeMap::new(),
                unallocated: BTreeMap::new(),
                round_log: Vec::new(),
                deliberation_time: 0.0,
            },
        }
    }

    pub fn is_done(&self) -> bool {
        self.open.is_empty()
    }

    /// Opens a new round announcing all unallocated tasks.
    pub fn announce(&mut self) -> &[usize] {
        let announced = self.open.iter().map(|&i| self.tasks[i].id).collect();
        self.outcome.round_log.push(RoundRecord {
            round: self.outcome.round_log.len() + 1,
            announced,
            bids: Vec::new(),
            rejected: Vec::new(),
            award: None,
            unallocated: Vec::new(),
        });
        &self.open
    }

    /// Collects one bid per (bidder, announced task) into the current round.
    pub fn collect<B: Bidder>(&mut self, bidders: &[B]) {
        let round = self
            .outcome
            .round_log
            .last_mut()
            .expect("collect called before announce");
        for bidder in bidders {
            for &i in &self.open {
                let task = self.tasks[i];
                let reject = |reason: String| RejectedBid {
                    bidder: bidder.id(),
                    task: task.id,
                    reason,
                };
                let factors = match bidder.bid_factors(task) {
                    Ok(f) => f,
                    Err(reason) => {
                        round
                            .rejected
                            .push(reject(format!("bidder failed: {reason}")));
                        continue;
                    }
                };
                match compute_bid(self.policy, &factors) {
                    Ok(value) if value >= 0.0 => round.bids.push(Bid {
                        bidder: bidder.id(),
                        task: task.id,
                        factors,
                        value,
                    }),
                    Ok(value) => round.rejected.push(reject(format!("negative bid {value}"))),
                    Err(e) => round.rejected.push(reject(e.to_string())),
                }
            }
        }
    }

    /// Awards the lowest bid of the current round; ties go to the lower
    /// vehicle id, then the lower task id. Tasks without a valid bid are
    /// closed as unallocated. Returns the award, if any.
    pub fn award(&mut self) -> Option<Award> {
        let round = self
            .outcome
            .round_log
            .last_mut()
            .expect("award called before announce");
        let best = round.bids.iter().min_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.bidder.cmp(&b.bidder))
                .then(a.task.cmp(&b.task))
        });
        let award = best.map(|b| Award {
            task: b.task,
            bidder: b.bidder,
            value: b.value,
        });

        let tasks = &self.tasks;
        let mut closed = Vec::new();
        self.open.retain(|&i| {
            let id = tasks[i].id;
            if award.as_ref().is_some_and(|a| a.task == id) {
                return false;
            }
            if round.bids.iter().any(|b| b.task == id) {
                return true;
            }
            closed.push(Unallocated {
                task: id,
                reason: "no valid bids".into(),
            });
            false
        });
        for u in &closed {
            self.outcome.unallocated.insert(u.task, u.reason.clone());
        }
        round.unallocated = closed;
        if let Some(a) = &award {
            self.outcome.awards.insert(a.task, a.bidder);
        }
        round.award = award.clone();
        award
    }

    pub fn task(&self, id: IncidentId) -> Option<&'a Incident> {
        self.tasks.iter().copied().find(|t| t.id == id)
    }

    pub fn finish(self, deliberation_time: f64) -> AuctionOutcome {
        AuctionOutcome {
            deliberation_time,
            ..self.outcome
        }
    }
}

/// Allocates `tasks` among `bidders`, one task per round.
pub fn run_ssi_auction<B: Bidder>(
    tasks: &[Incident],
    bidders: &mut [B],
    policy: &BidPolicy,
) -> AuctionOutcome {
    let started = Instant::now();
    let mut auctioneer = Auctioneer::new(tasks, policy);
    loop {
        auctioneer.announce();
        auctioneer.collect(bidders);
        let Some(award) = auctioneer.award() else {
            break;
        };
        let task = auctioneer.task(award.task).expect("awarded task exists");
        if let Some(winner) = bidders.iter_mut().find(|b| b.id() == award.bidder) {
            winner.commit(task);
        }
        if auctioneer.is_done() {
            break;
        }
    }
    auctioneer.finish(started.elapsed().as_secs_f64())
}
