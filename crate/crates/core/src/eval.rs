//! Accuracy metrics, rank-based bias correction, welfare series, and
//! correlations.
//!
//! Everything here needs ground-truth valuations, so it applies to synthetic
//! logs (or any log where values are known); the bias-correction table is the
//! in-sample construction that bounds what an out-of-sample correction could
//! achieve.

use alloc::vec::Vec;

use crate::auction::{allocate, CtrProfile};
use crate::error::Error;
use crate::sequence::{BidSequence, Window};

/// `|v - v_hat| / v`; the true value must be positive.
pub fn relative_error(value: f64, estimate: f64) -> Result<f64, Error> {
    if !(value > 0.0) {
        return Err(Error::NonPositive("true value"));
    }
    Ok((value - estimate).abs() / value)
}

/// Root mean square of a nonempty error set.
pub fn rms_error(errors: &[f64]) -> Result<f64, Error> {
    if errors.is_empty() {
        return Err(Error::Empty("error set"));
    }
    Ok(libm::sqrt(errors.iter().map(|&e| e * e).sum::<f64>() / errors.len() as f64))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    libm::sqrt(xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// The bidder's most frequent allocated position over the window (1-based).
/// The boolean is true when the mode was tied; ties take the better rank.
pub fn modal_position(
    seq: &BidSequence,
    i: usize,
    window: Window,
) -> Result<(usize, bool), Error> {
    seq.check_bidder(i)?;
    window.validate(seq)?;
    let n = seq.bidders();
    let mut counts = alloc::vec![0usize; n];
    for profile in seq.window_profiles(window) {
        counts[allocate(profile)[i] - 1] += 1;
    }
    let best = *counts.iter().max().unwrap();
    let modal = counts.iter().position(|&c| c == best).unwrap();
    let tied = counts.iter().filter(|&&c| c == best).count() > 1;
    Ok((modal + 1, tied))
}

/// Per-modal-rank multiplicative bias: `factor(rank) = mean(v_hat / v)` over
/// bidders whose modal rank is `rank`. Ranks with no bidders carry `None`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiasTable {
    /// Index k = rank k+1.
    pub factors: Vec<Option<f64>>,
}

impl BiasTable {
    pub fn factor(&self, rank: usize) -> Option<f64> {
        self.factors.get(rank - 1).copied().flatten()
    }
}

/// Build the in-sample bias table from estimates, true values, and modal
/// ranks (all aligned per bidder).
pub fn bias_factors(
    estimates: &[f64],
    values: &[f64],
    modal_ranks: &[usize],
    ranks: usize,
) -> Result<BiasTable, Error> {
    if estimates.len() != values.len() || estimates.len() != modal_ranks.len() {
        return Err(Error::LengthMismatch { expected: values.len(), got: estimates.len() });
    }
    let mut sums = alloc::vec![0.0; ranks];
    let mut counts = alloc::vec![0usize; ranks];
    for k in 0..estimates.len() {
        if !(values[k] > 0.0) {
            return Err(Error::NonPositive("true value"));
        }
        let rank = modal_ranks[k];
        if rank == 0 || rank > ranks {
            return Err(Error::UnknownBidder { bidder: rank, bidders: ranks });
        }
        sums[rank - 1] += estimates[k] / values[k];
        counts[rank - 1] += 1;
    }
    let factors = (0..ranks)
        .map(|r| (counts[r] > 0).then(|| sums[r] / counts[r] as f64))
        .collect();
    Ok(BiasTable { factors })
}

/// Divide the estimate by its rank's bias factor.
pub fn unbias(estimate: f64, factor: f64) -> Result<f64, Error> {
    if !(factor > 0.0) {
        return Err(Error::NonPositive("bias factor"));
    }
    Ok(estimate / factor)
}

/// Per-block mean of normalized social welfare
/// `(SW - SW_worst) / (SW_best - SW_worst)`, where best/worst pair sorted
/// values with sorted CTRs in matching/opposing order. `Ok(None)` when all
/// values are equal and the scale degenerates. The final block may be
/// shorter.
pub fn welfare_series(
    seq: &BidSequence,
    values: &[f64],
    ctrs: &CtrProfile,
    block_len: usize,
) -> Result<Option<Vec<f64>>, Error> {
    if values.len() != seq.bidders() || ctrs.slots() != seq.bidders() {
        return Err(Error::LengthMismatch { expected: seq.bidders(), got: values.len() });
    }
    if block_len == 0 {
        return Err(Error::Empty("welfare block"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rates = ctrs.rates(); // already strictly decreasing
    let n = rates.len();
    let best: f64 = (0..n).map(|k| sorted[n - 1 - k] * rates[k]).sum();
    let worst: f64 = (0..n).map(|k| sorted[k] * rates[k]).sum();
    if best == worst {
        return Ok(None);
    }
    let mut blocks = Vec::new();
    let mut acc = 0.0;
    let mut in_block = 0usize;
    for profile in seq.window_profiles(Window::full(seq.rounds())?) {
        let positions = allocate(profile);
        let sw: f64 = (0..n).map(|i| values[i] * rates[positions[i] - 1]).sum();
        acc += (sw - worst) / (best - worst);
        in_block += 1;
        if in_block == block_len {
            blocks.push(acc / in_block as f64);
            acc = 0.0;
            in_block = 0;
        }
    }
    if in_block > 0 {
        blocks.push(acc / in_block as f64);
    }
    Ok(Some(blocks))
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::Empty("correlation input"));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for k in 0..x.len() {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

/// Average ranks, ties sharing the mean of their rank span.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut k = 0;
    while k < order.len() {
        let mut j = k;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[k]] {
            j += 1;
        }
        let shared = (k + j) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=j] {
            ranks[idx] = shared;
        }
        k = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// One bidder's evaluation row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BidderEval {
    pub bidder: usize,
    pub value: f64,
    pub estimate: f64,
    pub relative_error: f64,
    /// Modal allocated rank over the evaluation window.
    pub modal_rank: usize,
    pub modal_rank_tied: bool,
    /// In-sample rank-corrected estimate and its error.
    pub unbiased_estimate: f64,
    pub unbiased_error: f64,
}

/// Accuracy summary for one set of estimates against known values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub bidders: Vec<BidderEval>,
    pub rms: f64,
    pub mean_error: f64,
    pub sd_error: f64,
    /// (true value, RMS over bidders with that value), ascending by value.
    pub by_type: Vec<(f64, f64)>,
    /// RMS per modal rank 1..n; `None` for unoccupied ranks.
    pub by_rank: Vec<Option<f64>>,
    pub bias: BiasTable,
    /// RMS after in-sample rank correction.
    pub unbiased_rms: f64,
}

/// Evaluate estimates (aligned per bidder) against ground truth, including
/// the in-sample bias-corrected variant.
pub fn evaluate(
    seq: &BidSequence,
    values: &[f64],
    estimates: &[f64],
    window: Window,
) -> Result<EvaluationReport, Error> {
    let n = seq.bidders();
    if values.len() != n || estimates.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: estimates.len() });
    }
    let mut modal_ranks = Vec::with_capacity(n);
    let mut ties = Vec::with_capacity(n);
    for i in 0..n {
        let (rank, tied) = modal_position(seq, i, window)?;
        modal_ranks.push(rank);
        ties.push(tied);
    }
    let bias = bias_factors(estimates, values, &modal_ranks, n)?;

    let mut bidders = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut unbiased_errors = Vec::with_capacity(n);
    for i in 0..n {
        let err = relative_error(values[i], estimates[i])?;
        let factor = bias.factor(modal_ranks[i]).expect("bidder's own rank is occupied");
        let fixed = unbias(estimates[i], factor)?;
        let fixed_err = relative_error(values[i], fixed)?;
        errors.push(err);
        unbiased_errors.push(fixed_err);
        bidders.push(BidderEval {
            bidder: i,
            value: values[i],
            estimate: estimates[i],
            relative_error: err,
            modal_rank: modal_ranks[i],
            modal_rank_tied: ties[i],
            unbiased_estimate: fixed,
            unbiased_error: fixed_err,
        });
    }

    let mut types: Vec<f64> = values.to_vec();
    types.sort_by(f64::total_cmp);
    types.dedup();
    let by_type = types
        .into_iter()
        .map(|v| {
            let group: Vec<f64> = (0..n).filter(|&i| values[i] == v).map(|i| errors[i]).collect();
            Ok((v, rms_error(&group)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let by_rank = (1..=n)
        .map(|rank| {
            let group: Vec<f64> =
                (0..n).filter(|&i| modal_ranks[i] == rank).map(|i| errors[i]).collect();
            if group.is_empty() { Ok(None) } else { rms_error(&group).map(Some) }
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(EvaluationReport {
        rms: rms_error(&errors)?,
        mean_error: mean(&errors),
        sd_error: population_sd(&errors),
        by_type,
        by_rank,
        bias,
        unbiased_rms: rms_error(&unbiased_errors)?,
        bidders,
    })
}
