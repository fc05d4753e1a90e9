//! Incentive mechanism for federated learning over a cellular uplink.
//!
//! Sellers (mobile users) price their participation by solving an
//! energy-minimisation problem under a training deadline ([`bid_solver`]);
//! the buyer (base station) runs a primal-dual greedy combinatorial auction
//! with critical-value payments ([`auction`]). [`baselines`] holds the exact,
//! LP-relaxation and fixed-price reference mechanisms.

pub mod auction;
pub mod baselines;
pub mod bid_solver;
pub mod error;
pub mod fl_model;
pub mod lp;
pub mod model;

pub use error::{Error, Result};
pub use model::{AuctionInstance, Bid, BidSolution, SystemConfig, UserId, UserProfile};
