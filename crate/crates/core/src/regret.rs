//! Hindsight-regret analysis of a bid sequence.
//!
//! Regret compares the utility a bidder actually collected over a window with
//! the best he could have done by playing one fixed grid bid throughout. The
//! logged bid is always replayed raw (never snapped to the grid); only the
//! optimal-fixed-bid search is grid-restricted.
//!
//! All sums run left-to-right over the window so results are bit-stable and
//! reproducible against an independent per-round re-simulation.

use alloc::vec::Vec;

use crate::auction::{counterfactual_outcome, CtrProfile, Mechanism};
use crate::error::Error;
use crate::grid::Grid;
use crate::sequence::{BidSequence, Window};

/// Mechanism and CTR profile shared by every analysis entry point.
#[derive(Debug, Clone, Copy)]
pub struct AuctionContext<'a> {
    pub mechanism: Mechanism,
    pub ctrs: &'a CtrProfile,
}

/// Regret of one bidder at one candidate valuation over one window.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegretReport {
    /// Utility collected with the logged bids, in coins.
    pub actual: f64,
    /// Best fixed-grid-bid utility in hindsight, in coins.
    pub opt: f64,
    /// `opt - actual`. Negative regret is possible with time-varying bids.
    pub regret: f64,
    /// `regret / opt`, absent when `opt <= 0`.
    pub relative: Option<f64>,
    /// Every grid bid attaining `opt`.
    pub opt_bids: Vec<f64>,
}

/// Regret of a bidder set, aggregated additively.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupRegret {
    pub actual: f64,
    pub opt: f64,
    pub regret: f64,
    /// `regret / opt`, absent when the summed opt is not positive.
    pub relative: Option<f64>,
}

/// One block of the momentary-regret series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentaryBlock {
    pub window: Window,
    /// True for a short final block.
    pub partial: bool,
    pub group: GroupRegret,
}

/// Regret of bidder `i` as a function of his hypothetical valuation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegretCurve {
    pub bidder: usize,
    pub points: Vec<RegretPoint>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegretPoint {
    pub value: f64,
    pub report: RegretReport,
}

impl RegretCurve {
    pub fn report_at(&self, value: f64) -> Option<&RegretReport> {
        self.points.iter().find(|p| p.value == value).map(|p| &p.report)
    }
}

fn check(seq: &BidSequence, i: usize, window: Window) -> Result<(), Error> {
    seq.check_bidder(i)?;
    window.validate(seq)
}

/// Summed utility of bidder `i`'s logged bids over the window, evaluated as
/// if his value were `value`.
pub fn actual_utility(
    seq: &BidSequence,
    i: usize,
    value: f64,
    window: Window,
    ctx: AuctionContext,
) -> Result<f64, Error> {
    check(seq, i, window)?;
    let mut total = 0.0;
    for profile in seq.window_profiles(window) {
        let (pos, pay) = counterfactual_outcome(ctx.mechanism, ctx.ctrs, profile, i, profile[i]);
        total += ctx.ctrs.rate(pos) * value - pay;
    }
    Ok(total)
}

/// Summed utility of one fixed bid replayed over the window.
pub fn fixed_bid_utility(
    seq: &BidSequence,
    i: usize,
    bid: f64,
    value: f64,
    window: Window,
    ctx: AuctionContext,
) -> Result<f64, Error> {
    check(seq, i, window)?;
    let mut total = 0.0;
    for profile in seq.window_profiles(window) {
        let (pos, pay) = counterfactual_outcome(ctx.mechanism, ctx.ctrs, profile, i, bid);
        total += ctx.ctrs.rate(pos) * value - pay;
    }
    Ok(total)
}

/// Maximum over the bid grid of the fixed-bid utility, together with the full
/// set of maximizing bids.
pub fn optimal_fixed_utility(
    seq: &BidSequence,
    i: usize,
    value: f64,
    window: Window,
    bids: &Grid,
    ctx: AuctionContext,
) -> Result<(f64, Vec<f64>), Error> {
    check(seq, i, window)?;
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for b in bids.points() {
        let total = fixed_bid_utility(seq, i, b, value, window, ctx)?;
        if total > best {
            best = total;
            arg.clear();
            arg.push(b);
        } else if total == best {
            arg.push(b);
        }
    }
    Ok((best, arg))
}

fn report_from(actual: f64, opt: f64, opt_bids: Vec<f64>) -> RegretReport {
    let regret = opt - actual;
    let relative = if opt > 0.0 { Some(regret / opt) } else { None };
    RegretReport { actual, opt, regret, relative, opt_bids }
}

/// Regret of bidder `i` at valuation `value` over the window.
pub fn regret(
    seq: &BidSequence,
    i: usize,
    value: f64,
    window: Window,
    bids: &Grid,
    ctx: AuctionContext,
) -> Result<RegretReport, Error> {
    let actual = actual_utility(seq, i, value, window, ctx)?;
    let (opt, opt_bids) = optimal_fixed_utility(seq, i, value, window, bids, ctx)?;
    Ok(report_from(actual, opt, opt_bids))
}

/// Additive regret of a set of bidders: sum of regrets over sum of optima.
pub fn group_relative_regret(
    seq: &BidSequence,
    members: &[usize],
    values: &[f64],
    window: Window,
    bids: &Grid,
    ctx: AuctionContext,
) -> Result<GroupRegret, Error> {
    if members.is_empty() {
        return Err(Error::Empty("bidder set"));
    }
    if members.len() != values.len() {
        return Err(Error::LengthMismatch { expected: members.len(), got: values.len() });
    }
    let mut actual = 0.0;
    let mut opt = 0.0;
    for (&i, &v) in members.iter().zip(values) {
        let report = regret(seq, i, v, window, bids, ctx)?;
        actual += report.actual;
        opt += report.opt;
    }
    let total = opt - actual;
    let relative = if opt > 0.0 { Some(total / opt) } else { None };
    Ok(GroupRegret { actual, opt, regret: total, relative })
}

/// Group relative regret per consecutive block of `block_len` auctions, with
/// the optimal fixed bid recomputed inside each block. The last block may be
/// short and is kept, flagged as partial.
pub fn momentary_regret_series(
    seq: &BidSequence,
    members: &[usize],
    values: &[f64],
    block_len: usize,
    bids: &Grid,
    ctx: AuctionContext,
) -> Result<Vec<MomentaryBlock>, Error> {
    if block_len == 0 {
        return Err(Error::NonPositive("block length"));
    }
    let rounds = seq.rounds();
    let mut blocks = Vec::new();
    let mut first = 1;
    while first <= rounds {
        let last = (first + block_len - 1).min(rounds);
        let window = Window::new(first, last)?;
        let group = group_relative_regret(seq, members, values, window, bids, ctx)?;
        blocks.push(MomentaryBlock { window, partial: window.len() < block_len, group });
        first = last + 1;
    }
    Ok(blocks)
}

/// The full regret-vs-value curve of bidder `i`: for each candidate valuation
/// `v` in `values`, the regret had his value been `v`.
///
/// Equivalent to calling [`regret`] per grid value, but the per-round
/// position and payment of each candidate bid are computed once and shared
/// across valuations. Per-round utilities are identical floats either way, so
/// the curve is bit-for-bit the same as the naive double loop.
pub fn regret_curve(
    seq: &BidSequence,
    i: usize,
    values: &Grid,
    bids: &Grid,
    window: Window,
    ctx: AuctionContext,
) -> Result<RegretCurve, Error> {
    check(seq, i, window)?;
    let profiles: Vec<&[f64]> = seq.window_profiles(window).collect();

    // (ctr, payment) per round for the logged bid and for every grid bid
    let own: Vec<(f64, f64)> = profiles
        .iter()
        .map(|p| {
            let (pos, pay) = counterfactual_outcome(ctx.mechanism, ctx.ctrs, p, i, p[i]);
            (ctx.ctrs.rate(pos), pay)
        })
        .collect();
    let bid_points: Vec<f64> = bids.to_vec();
    let fixed: Vec<Vec<(f64, f64)>> = bid_points
        .iter()
        .map(|&b| {
            profiles
                .iter()
                .map(|p| {
                    let (pos, pay) = counterfactual_outcome(ctx.mechanism, ctx.ctrs, p, i, b);
                    (ctx.ctrs.rate(pos), pay)
                })
                .collect()
        })
        .collect();

    let mut points = Vec::with_capacity(values.len());
    for v in values.points() {
        let mut actual = 0.0;
        for &(rate, pay) in &own {
            actual += rate * v - pay;
        }
        let mut opt = f64::NEG_INFINITY;
        let mut opt_bids = Vec::new();
        for (outcomes, &b) in fixed.iter().zip(&bid_points) {
            let mut total = 0.0;
            for &(rate, pay) in outcomes {
                total += rate * v - pay;
            }
            if total > opt {
                opt = total;
                opt_bids.clear();
                opt_bids.push(b);
            } else if total == opt {
                opt_bids.push(b);
            }
        }
        points.push(RegretPoint { value: v, report: report_from(actual, opt, opt_bids) });
    }
    Ok(RegretCurve { bidder: i, points })
}
