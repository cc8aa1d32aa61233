//! Time-indexed bid logs and analysis windows.

use alloc::vec::Vec;

use crate::auction::validate_bids;
use crate::error::Error;

/// The observed bid profiles `(b^t)_t`, auction indices 1..=T.
///
/// This is the universal input to every analysis: regret reports, regret
/// curves, and all estimators consume a `BidSequence` plus a [`Window`].
#[derive(Debug, Clone, PartialEq)]
pub struct BidSequence {
    profiles: Vec<Vec<f64>>,
    bidders: usize,
}

impl BidSequence {
    pub fn from_profiles(profiles: Vec<Vec<f64>>) -> Result<Self, Error> {
        let first = profiles.first().ok_or(Error::Empty("bid sequence"))?;
        let bidders = first.len();
        if bidders == 0 {
            return Err(Error::Empty("bid profile"));
        }
        for profile in &profiles {
            if profile.len() != bidders {
                return Err(Error::LengthMismatch { expected: bidders, got: profile.len() });
            }
            validate_bids(profile)?;
        }
        Ok(BidSequence { profiles, bidders })
    }

    /// Number of auctions T.
    pub fn rounds(&self) -> usize {
        self.profiles.len()
    }

    /// Number of bidders n.
    pub fn bidders(&self) -> usize {
        self.bidders
    }

    /// Bid profile of 1-based auction index `t`.
    pub fn profile(&self, t: usize) -> &[f64] {
        &self.profiles[t - 1]
    }

    /// Bid of bidder `i` (0-based) at 1-based auction index `t`.
    pub fn bid(&self, t: usize, i: usize) -> f64 {
        self.profiles[t - 1][i]
    }

    /// Profiles of a validated window, in time order.
    pub fn window_profiles(&self, window: Window) -> impl Iterator<Item = &[f64]> {
        self.profiles[window.first() - 1..window.last()].iter().map(Vec::as_slice)
    }

    pub fn check_bidder(&self, i: usize) -> Result<(), Error> {
        if i < self.bidders {
            Ok(())
        } else {
            Err(Error::UnknownBidder { bidder: i, bidders: self.bidders })
        }
    }
}

/// Inclusive range of 1-based auction indices to analyze.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    first: usize,
    last: usize,
}

impl Window {
    pub fn new(first: usize, last: usize) -> Result<Self, Error> {
        if first == 0 || first > last {
            return Err(Error::InvalidWindow { first, last, rounds: 0 });
        }
        Ok(Window { first, last })
    }

    /// The second half of a T-auction game, the default analysis window
    /// (751..=1500 for T = 1500).
    pub fn second_half(rounds: usize) -> Result<Self, Error> {
        Window::new(rounds / 2 + 1, rounds)
    }

    pub fn full(rounds: usize) -> Result<Self, Error> {
        Window::new(1, rounds)
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self, seq: &BidSequence) -> Result<(), Error> {
        if self.last > seq.rounds() {
            return Err(Error::InvalidWindow {
                first: self.first,
                last: self.last,
                rounds: seq.rounds(),
            });
        }
        Ok(())
    }
}
