//! Deterministic mechanics of a single position auction.
//!
//! Positions are awarded by decreasing bid, ties broken by ascending bidder
//! identity, so identical inputs always produce identical outcomes. Payments
//! follow next-bid pricing for GSP and the standard position-auction
//! externality rule for VCG. With n bidders and n slots the lowest-ranked
//! bidder always wins the last slot and pays nothing under both rules.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::Error;

/// Auction payment rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mechanism {
    /// Generalized second price: slot k pays the (k+1)-th highest bid per click.
    Gsp,
    /// Vickrey-Clarke-Groves: each slot pays the externality it imposes.
    Vcg,
}

impl Mechanism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Gsp => "gsp",
            Mechanism::Vcg => "vcg",
        }
    }
}

impl core::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "gsp" | "GSP" => Ok(Mechanism::Gsp),
            "vcg" | "VCG" => Ok(Mechanism::Vcg),
            other => Err(Error::InvalidCtrProfile(format!(
                "unknown mechanism `{other}` (expected gsp or vcg)"
            ))),
        }
    }
}

/// Click-through rates by position, top slot first.
///
/// Rates must be strictly decreasing so that every incremental-cost
/// denominator `a[k-1] - a[k]` is positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CtrProfile {
    rates: Vec<f64>,
}

impl CtrProfile {
    pub fn new(rates: Vec<f64>) -> Result<Self, Error> {
        if rates.len() < 2 {
            return Err(Error::InvalidCtrProfile("need at least 2 positions".to_string()));
        }
        for (k, &r) in rates.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 || r > 1.0 {
                return Err(Error::InvalidCtrProfile(format!(
                    "rate {r} at position {} outside (0, 1]",
                    k + 1
                )));
            }
        }
        if rates.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidCtrProfile("rates must be strictly decreasing".to_string()));
        }
        Ok(CtrProfile { rates })
    }

    /// The 5-slot profile used throughout: (0.38, 0.29, 0.20, 0.11, 0.02).
    pub fn experiment_default() -> Self {
        CtrProfile { rates: alloc::vec![0.38, 0.29, 0.20, 0.11, 0.02] }
    }

    /// Number of slots (equals the number of bidders supported).
    pub fn slots(&self) -> usize {
        self.rates.len()
    }

    /// CTR of a 1-based position.
    #[inline]
    pub fn rate(&self, position: usize) -> f64 {
        self.rates[position - 1]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

/// One round's bids in bidder-identity order.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile {
    bids: Vec<f64>,
}

impl BidProfile {
    pub fn new(bids: Vec<f64>) -> Result<Self, Error> {
        validate_bids(&bids)?;
        if bids.is_empty() {
            return Err(Error::Empty("bid profile"));
        }
        Ok(BidProfile { bids })
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }
}

impl Deref for BidProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.bids
    }
}

pub(crate) fn validate_bids(bids: &[f64]) -> Result<(), Error> {
    for (i, &b) in bids.iter().enumerate() {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidBid { bidder: i, bid: b });
        }
    }
    Ok(())
}

/// Result of resolving one auction round.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuctionOutcome {
    /// 1-based position per bidder; always a permutation of 1..n.
    pub positions: Vec<usize>,
    /// Coins paid per bidder.
    pub expenditures: Vec<f64>,
    /// Coins gained per bidder: ctr(position) * value - expenditure.
    pub utilities: Vec<f64>,
    /// Total welfare: sum of ctr(position_i) * value_i.
    pub welfare: f64,
}

/// Bidder indices ordered by rank: highest bid first, ties by ascending
/// identity.
pub fn ranked_indices(bids: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| bids[b].partial_cmp(&bids[a]).unwrap().then(a.cmp(&b)));
    order
}

/// 1-based position per bidder: the k-th highest bid gets position k.
pub fn allocate(bids: &[f64]) -> Vec<usize> {
    let order = ranked_indices(bids);
    let mut positions = alloc::vec![0usize; bids.len()];
    for (rank, &bidder) in order.iter().enumerate() {
        positions[bidder] = rank + 1;
    }
    positions
}

/// Expenditure per position for bids already sorted in decreasing order.
///
/// GSP: position k pays `ctr_k * b_(k+1)` with `b_(n+1) = 0`.
/// VCG: position k pays `sum_{j>k} b_(j) * (ctr_{j-1} - ctr_j)`.
pub fn payments(mechanism: Mechanism, ranked_bids: &[f64], ctrs: &CtrProfile) -> Vec<f64> {
    debug_assert!(ranked_bids.windows(2).all(|w| w[0] >= w[1]));
    let n = ranked_bids.len();
    let mut pay = alloc::vec![0.0; n];
    for k in 1..=n {
        pay[k - 1] = payment_below(mechanism, ctrs, k, &ranked_bids[k..]);
    }
    pay
}

/// Payment of the bidder at 1-based `position` given the ranked bids below him.
///
/// Shared by [`payments`] and [`counterfactual_outcome`] so that both paths
/// produce bit-identical floating point results.
fn payment_below(mechanism: Mechanism, ctrs: &CtrProfile, position: usize, below: &[f64]) -> f64 {
    match mechanism {
        Mechanism::Gsp => ctrs.rate(position) * below.first().copied().unwrap_or(0.0),
        Mechanism::Vcg => {
            let mut total = 0.0;
            for (offset, &b) in below.iter().enumerate() {
                let j = position + offset + 1;
                total += b * (ctrs.rate(j - 1) - ctrs.rate(j));
            }
            total
        }
    }
}

/// Position and expenditure of `bidder` when his logged bid in `profile` is
/// replaced by `bid`, everyone else unchanged. The bidder keeps his identity
/// for tie-breaking.
pub fn counterfactual_outcome(
    mechanism: Mechanism,
    ctrs: &CtrProfile,
    profile: &[f64],
    bidder: usize,
    bid: f64,
) -> (usize, f64) {
    let mut position = 1;
    let mut below: Vec<f64> = Vec::with_capacity(profile.len() - 1);
    for (j, &b) in profile.iter().enumerate() {
        if j == bidder {
            continue;
        }
        if b > bid || (b == bid && j < bidder) {
            position += 1;
        } else {
            below.push(b);
        }
    }
    below.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let pay = payment_below(mechanism, ctrs, position, &below);
    (position, pay)
}

/// Utility of `bidder` with per-click value `value` when bidding `bid`
/// against the other entries of `profile`: `ctr(position) * value - payment`.
pub fn counterfactual_utility(
    mechanism: Mechanism,
    ctrs: &CtrProfile,
    profile: &[f64],
    bidder: usize,
    bid: f64,
    value: f64,
) -> f64 {
    let (position, pay) = counterfactual_outcome(mechanism, ctrs, profile, bidder, bid);
    ctrs.rate(position) * value - pay
}

/// Resolve one auction: allocation, payments, utilities, and welfare.
pub fn resolve(
    mechanism: Mechanism,
    bids: &[f64],
    ctrs: &CtrProfile,
    values: &[f64],
) -> Result<AuctionOutcome, Error> {
    validate_bids(bids)?;
    if bids.len() != ctrs.slots() {
        return Err(Error::LengthMismatch { expected: ctrs.slots(), got: bids.len() });
    }
    if values.len() != bids.len() {
        return Err(Error::LengthMismatch { expected: bids.len(), got: values.len() });
    }
    let order = ranked_indices(bids);
    let ranked_bids: Vec<f64> = order.iter().map(|&i| bids[i]).collect();
    let pay_by_position = payments(mechanism, &ranked_bids, ctrs);

    let n = bids.len();
    let mut positions = alloc::vec![0usize; n];
    let mut expenditures = alloc::vec![0.0; n];
    let mut utilities = alloc::vec![0.0; n];
    for (rank, &bidder) in order.iter().enumerate() {
        let position = rank + 1;
        positions[bidder] = position;
        expenditures[bidder] = pay_by_position[rank];
        utilities[bidder] = ctrs.rate(position) * values[bidder] - pay_by_position[rank];
    }
    let mut welfare = 0.0;
    for i in 0..n {
        welfare += ctrs.rate(positions[i]) * values[i];
    }
    Ok(AuctionOutcome { positions, expenditures, utilities, welfare })
}
