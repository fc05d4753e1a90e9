use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain of {op}")]
    Domain {
        op: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("uplink unreachable: rate is zero with a single antenna")]
    UnreachableUplink,

    #[error("bid infeasible at this bundle: {0}")]
    BundleInfeasible(&'static str),

    #[error("no feasible accuracy: max slack {max_slack:e} s is below comm time {comm_time:e} s")]
    NoFeasibleAccuracy { max_slack: f64, comm_time: f64 },

    #[error("user cannot meet deadline with bundle (A={antennas}, b={subchannels})")]
    DeadlineUnreachable { antennas: u32, subchannels: u32 },

    #[error(
        "approximation bound undefined: capacity weight {upsilon} <= largest bid size {max_size}"
    )]
    BoundUndefined { upsilon: f64, max_size: f64 },

    #[error("instance too large for exact solve: node budget {budget} exceeded")]
    ExactBudgetExceeded { budget: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
