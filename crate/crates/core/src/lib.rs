//! Auction-based emergency vehicle dispatch simulation.
//!
//! Vehicles bid their estimated travel time to an incident over a
//! time-dependent road network; a sequential single-item auction awards the
//! incident to the lowest bidder. The resulting travel times are compared
//! with a replay of the historically dispatched vehicle.
//!
//! * [`roadnet`]: road graph, time-dependent routing, route interpolation
//! * [`fleet`]: incidents, vehicles, idle-position reconstruction
//! * [`auction`]: bid policies and the sequential single-item auction
//! * [`dispatch`]: historical replay vs auction dispatch, clock rules
//! * [`data`]: record ingestion, condition sampling, synthetic datasets
//! * [`stats`]: Welch's t-test, 1-D Wasserstein distance, reports

pub mod auction;
pub mod data;
pub mod dispatch;
pub mod fleet;
pub mod roadnet;
pub mod stats;
