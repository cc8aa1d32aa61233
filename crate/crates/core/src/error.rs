use alloc::string::String;
use core::fmt;

/// Errors produced by validation and estimation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A CTR profile failed validation (too short, out of range, or not
    /// strictly decreasing).
    InvalidCtrProfile(String),
    /// A bid was negative or not finite.
    InvalidBid { bidder: usize, bid: f64 },
    /// Two aligned collections had different lengths.
    LengthMismatch { expected: usize, got: usize },
    /// A window does not satisfy 1 <= first <= last <= T.
    InvalidWindow { first: usize, last: usize, rounds: usize },
    /// An empty grid, set, or sequence where at least one element is required.
    Empty(&'static str),
    /// Ranked bids were not in decreasing order.
    NotSorted,
    /// The perturbation QP has no feasible point (only possible with zero bids).
    InfeasibleQp,
    /// Records passed to a combiner refer to different bidders.
    BidderMismatch,
    /// A quantity that must be positive was not.
    NonPositive(&'static str),
    /// Correlation of a sequence with zero variance.
    ZeroVariance,
    /// A replay agent ran out of logged bids.
    ReplayExhausted { bidder: usize, round: usize },
    /// A bidder index outside 0..n.
    UnknownBidder { bidder: usize, bidders: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCtrProfile(msg) => write!(f, "invalid CTR profile: {msg}"),
            Error::InvalidBid { bidder, bid } => {
                write!(f, "invalid bid {bid} for bidder {bidder}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::InvalidWindow { first, last, rounds } => {
                write!(f, "invalid window {first}:{last} for {rounds} auctions")
            }
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::NotSorted => write!(f, "bids must be in decreasing order"),
            Error::InfeasibleQp => write!(f, "perturbation QP is infeasible"),
            Error::BidderMismatch => write!(f, "estimate records refer to different bidders"),
            Error::NonPositive(what) => write!(f, "{what} must be positive"),
            Error::ZeroVariance => write!(f, "correlation undefined for zero-variance input"),
            Error::ReplayExhausted { bidder, round } => {
                write!(f, "replay source for bidder {bidder} exhausted at round {round}")
            }
            Error::UnknownBidder { bidder, bidders } => {
                write!(f, "bidder index {bidder} out of range (n = {bidders})")
            }
        }
    }
}

impl core::error::Error for Error {}
