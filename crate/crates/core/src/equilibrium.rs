//! Equilibrium-based valuation estimators for GSP logs.
//!
//! Two classic methods are implemented as comparison baselines:
//!
//! - VCG-like-NE: assumes every auction's bids sit at the symmetric Nash
//!   equilibrium that yields the VCG prices, recovers per-position values
//!   from incremental costs per click (ICC), and resolves inconsistent
//!   auctions by minimally perturbing each bidder's next-ranked bid via a
//!   small quadratic program.
//! - Best-Response: assumes each bidder's (average) bid maximizes his
//!   expected utility against the empirical distribution of opponent bids,
//!   and inverts the empirical best-response correspondence on a grid, or
//!   through the first-order condition.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::auction::{counterfactual_outcome, ranked_indices, CtrProfile};
use crate::error::Error;
use crate::estimators::{EstimateRecord, Method};
use crate::grid::Grid;
use crate::regret::AuctionContext;
use crate::sequence::{BidSequence, Window};

/// Feasibility tolerance for the SNE chain and the perturbation QP.
pub const SNE_TOLERANCE: f64 = 1e-9;

/// Per-position value estimates recovered from one auction's ranked bids.
///
/// `values[0]` is `f64::INFINITY`: the equilibrium inequalities give the top
/// bidder no upper bound; a top rule replaces it later.
#[derive(Debug, Clone, PartialEq)]
pub struct IccProfile {
    pub values: Vec<f64>,
}

impl IccProfile {
    /// True when the recovered values satisfy the SNE chain
    /// `v_2 >= v_3 >= ... >= v_n >= b_n` within [`SNE_TOLERANCE`].
    pub fn is_consistent(&self, ranked_bids: &[f64]) -> bool {
        let n = self.values.len();
        for p in 1..n.saturating_sub(1) {
            if self.values[p] < self.values[p + 1] - SNE_TOLERANCE {
                return false;
            }
        }
        self.values[n - 1] >= ranked_bids[n - 1] - SNE_TOLERANCE
    }
}

fn ensure_sorted(ranked_bids: &[f64]) -> Result<(), Error> {
    if ranked_bids.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NotSorted);
    }
    Ok(())
}

/// Incremental-cost-per-click values from one auction's bids, sorted
/// decreasing: `v_k = (a_{k-1} b_k - a_k b_{k+1}) / (a_{k-1} - a_k)` for
/// interior positions and `v_n = a_{n-1} b_n / (a_{n-1} - a_n)` for the last,
/// with the top position unbounded.
pub fn icc_values(ranked_bids: &[f64], ctrs: &CtrProfile) -> Result<IccProfile, Error> {
    ensure_sorted(ranked_bids)?;
    let n = ranked_bids.len();
    if n != ctrs.slots() {
        return Err(Error::LengthMismatch { expected: ctrs.slots(), got: n });
    }
    let a = ctrs.rates();
    let mut values = alloc::vec![f64::INFINITY; n];
    for p in 1..n - 1 {
        values[p] = (a[p - 1] * ranked_bids[p] - a[p] * ranked_bids[p + 1]) / (a[p - 1] - a[p]);
    }
    values[n - 1] = a[n - 2] * ranked_bids[n - 1] / (a[n - 2] - a[n - 1]);
    Ok(IccProfile { values })
}

/// Multiplicative perturbation factors making an auction SNE-consistent,
/// minimizing `sum_i (d_i - 1)^2` with `d_1 = d_n = 1` fixed.
///
/// Each interior bidder's next-ranked bid `b_{i+1}` is scaled by `d_i`. The
/// free variables are `d_2 .. d_{n-1}`; the QP is solved exactly by
/// enumerating active sets of the (n-2)-constraint system, which for the
/// 5-bidder experiment is a 3-variable problem.
pub fn minimal_perturbations(ranked_bids: &[f64], ctrs: &CtrProfile) -> Result<Vec<f64>, Error> {
    ensure_sorted(ranked_bids)?;
    let n = ranked_bids.len();
    if n != ctrs.slots() {
        return Err(Error::LengthMismatch { expected: ctrs.slots(), got: n });
    }
    let m = n.saturating_sub(2); // free variables d_2..d_{n-1}
    if m == 0 {
        return Ok(alloc::vec![1.0; n]);
    }
    let a = ctrs.rates();
    // v_p(d_p) = icc_a[p] - icc_b[p] * d_p on 0-based positions 1..n-1;
    // the last position carries no perturbation term (b_{n+1} = 0)
    let mut icc_a = alloc::vec![0.0; n];
    let mut icc_b = alloc::vec![0.0; n];
    for p in 1..n {
        icc_a[p] = a[p - 1] * ranked_bids[p] / (a[p - 1] - a[p]);
        if p + 1 < n {
            icc_b[p] = a[p] * ranked_bids[p + 1] / (a[p - 1] - a[p]);
        }
    }
    // constraints k = 0..m-1, position p = k+1: v_p(d_p) >= v_{p+1}(d_{p+1}),
    // written as rows g.x >= c over x = (d_2, ..., d_{n-1})
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for k in 0..m {
        let p = k + 1;
        let mut g = alloc::vec![0.0; m];
        g[k] = -icc_b[p];
        if k + 1 < m {
            g[k + 1] = icc_b[p + 1];
        }
        rows.push(g);
        rhs.push(icc_a[p + 1] - icc_a[p]);
    }

    // constraints whose coefficients vanish (zero bids) are constants
    let mut usable: Vec<usize> = Vec::new();
    for k in 0..m {
        if rows[k].iter().all(|&g| g.abs() < 1e-15) {
            if rhs[k] > SNE_TOLERANCE {
                return Err(Error::InfeasibleQp);
            }
        } else {
            usable.push(k);
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << usable.len()) {
        let active: Vec<usize> =
            (0..usable.len()).filter(|&j| mask & (1 << j) != 0).map(|j| usable[j]).collect();
        let Some(x) = solve_equality_qp(&rows, &rhs, &active, m) else { continue };
        if usable.iter().any(|&k| dot(&rows[k], &x) < rhs[k] - SNE_TOLERANCE) {
            continue;
        }
        let objective: f64 = x.iter().map(|&d| (d - 1.0) * (d - 1.0)).sum();
        if best.as_ref().is_none_or(|(obj, _)| objective < *obj) {
            best = Some((objective, x));
        }
    }
    let (_, x) = best.ok_or(Error::InfeasibleQp)?;
    let mut d = alloc::vec![1.0; n];
    d[1..1 + m].copy_from_slice(&x);
    Ok(d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `||x - 1||^2` subject to the given rows holding with equality:
/// `x = 1 + G' lambda` with `(G G') lambda = c - G 1`.
fn solve_equality_qp(
    rows: &[Vec<f64>],
    rhs: &[f64],
    active: &[usize],
    m: usize,
) -> Option<Vec<f64>> {
    let ones = alloc::vec![1.0; m];
    if active.is_empty() {
        return Some(ones);
    }
    let s = active.len();
    let mut gram = alloc::vec![alloc::vec![0.0; s]; s];
    let mut b = alloc::vec![0.0; s];
    for (r, &k) in active.iter().enumerate() {
        for (c, &l) in active.iter().enumerate() {
            gram[r][c] = dot(&rows[k], &rows[l]);
        }
        b[r] = rhs[k] - dot(&rows[k], &ones);
    }
    let lambda = solve_linear(&mut gram, &mut b)?;
    let mut x = ones;
    for (r, &k) in active.iter().enumerate() {
        for j in 0..m {
            x[j] += rows[k][j] * lambda[r];
        }
    }
    Some(x)
}

/// Gaussian elimination with partial pivoting; None on a (near-)singular
/// system.
fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// How to bound the top-ranked bidder's otherwise unbounded estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopRule {
    /// Use the second-highest recovered value.
    #[default]
    SecondValue,
    /// Use the maximum of the second-highest value and the top bidder's own
    /// bid.
    MaxSecondOwn,
}

/// Whether per-auction values are averaged back onto bidder identities or
/// onto ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeAggregation {
    /// Track the rank-to-identity map each auction; values belong to bidders.
    #[default]
    ByIdentity,
    /// Average the k-th ranked value per auction into slot k.
    ByRank,
}

#[derive(Debug, Clone, Default)]
pub struct VcgNeOptions {
    /// Solve the perturbation QP for inconsistent auctions. Off = raw-ICC
    /// variant.
    pub perturb: bool,
    pub top_rule: TopRule,
    pub aggregation: NeAggregation,
}

impl VcgNeOptions {
    pub fn standard() -> Self {
        VcgNeOptions { perturb: true, ..Default::default() }
    }

    pub fn raw() -> Self {
        VcgNeOptions { perturb: false, ..Default::default() }
    }
}

/// Output of the VCG-like-NE estimator.
#[derive(Debug, Clone)]
pub struct VcgNeReport {
    pub estimates: Vec<EstimateRecord>,
    /// Per included auction: mean absolute deviation `(1/n) sum |d_i - 1|`
    /// (only populated when perturbing).
    pub deviations: Vec<f64>,
    /// Auctions already satisfying the SNE chain without perturbation.
    pub consistent: usize,
    /// Auctions dropped because the QP was infeasible (zero bids only).
    pub excluded: usize,
    /// Auctions in the window.
    pub auctions: usize,
}

impl VcgNeReport {
    pub fn consistency_rate(&self) -> f64 {
        self.consistent as f64 / self.auctions as f64
    }
}

/// VCG-like-NE estimation: per auction, recover ICC values (perturbing
/// minimally when inconsistent), set the top value by the top rule, then
/// average per bidder over the window.
pub fn estimate_vcg_like_ne(
    seq: &BidSequence,
    ctrs: &CtrProfile,
    window: Window,
    opts: &VcgNeOptions,
) -> Result<VcgNeReport, Error> {
    window.validate(seq)?;
    let n = seq.bidders();
    if n != ctrs.slots() {
        return Err(Error::LengthMismatch { expected: ctrs.slots(), got: n });
    }
    let a = ctrs.rates();
    let mut sums = alloc::vec![0.0; n];
    let mut deviations = Vec::new();
    let mut consistent = 0usize;
    let mut excluded = 0usize;
    let mut included = 0usize;

    for profile in seq.window_profiles(window) {
        let order = ranked_indices(profile);
        let ranked: Vec<f64> = order.iter().map(|&i| profile[i]).collect();
        let icc = icc_values(&ranked, ctrs)?;
        let mut values = icc.values.clone();
        if icc.is_consistent(&ranked) {
            consistent += 1;
            if opts.perturb {
                deviations.push(0.0);
            }
        } else if opts.perturb {
            let d = match minimal_perturbations(&ranked, ctrs) {
                Ok(d) => d,
                Err(Error::InfeasibleQp) => {
                    excluded += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for p in 1..n - 1 {
                values[p] =
                    (a[p - 1] * ranked[p] - a[p] * ranked[p + 1] * d[p]) / (a[p - 1] - a[p]);
            }
            // last position keeps the raw formula: it has no next bid to scale
            deviations.push(d.iter().map(|&di| (di - 1.0).abs()).sum::<f64>() / n as f64);
        }
        values[0] = match opts.top_rule {
            TopRule::SecondValue => values[1],
            TopRule::MaxSecondOwn => values[1].max(ranked[0]),
        };
        match opts.aggregation {
            NeAggregation::ByIdentity => {
                for (rank, &bidder) in order.iter().enumerate() {
                    sums[bidder] += values[rank];
                }
            }
            NeAggregation::ByRank => {
                for (rank, v) in values.iter().enumerate() {
                    sums[rank] += v;
                }
            }
        }
        included += 1;
    }

    if included == 0 {
        return Err(Error::Empty("no auctions survived the SNE feasibility check"));
    }
    let method = if opts.perturb { Method::VcgLikeNe } else { Method::VcgLikeNeRaw };
    let mut shared_flags: Vec<String> = Vec::new();
    if excluded > 0 {
        shared_flags.push(format!("excluded-infeasible:{excluded}"));
    }
    if opts.aggregation == NeAggregation::ByRank {
        shared_flags.push("aggregated-by-rank".to_string());
    }
    let estimates = (0..n)
        .map(|i| EstimateRecord {
            bidder: i,
            method,
            estimate: sums[i] / included as f64,
            window,
            flags: shared_flags.clone(),
        })
        .collect();
    Ok(VcgNeReport { estimates, deviations, consistent, excluded, auctions: window.len() })
}

/// Empirical response of one bidder to the logged opponent bids: for each
/// grid bid, the expected CTR `Q(b)` and expected expenditure `TE(b)`
/// averaged over the window.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResponseCurves {
    pub bids: Vec<f64>,
    pub q: Vec<f64>,
    pub te: Vec<f64>,
}

impl ResponseCurves {
    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    fn index_of(&self, bid: f64) -> Option<usize> {
        self.bids.iter().position(|&b| b == bid)
    }

    pub fn q_at(&self, bid: f64) -> Option<f64> {
        self.index_of(bid).map(|k| self.q[k])
    }

    pub fn te_at(&self, bid: f64) -> Option<f64> {
        self.index_of(bid).map(|k| self.te[k])
    }
}

/// Counterfactual replay of every grid bid against the logged opponents.
pub fn response_curves(
    seq: &BidSequence,
    i: usize,
    bids: &Grid,
    window: Window,
    ctx: AuctionContext,
) -> Result<ResponseCurves, Error> {
    seq.check_bidder(i)?;
    window.validate(seq)?;
    let count = window.len() as f64;
    let bid_points: Vec<f64> = bids.to_vec();
    let mut q = alloc::vec![0.0; bid_points.len()];
    let mut te = alloc::vec![0.0; bid_points.len()];
    for profile in seq.window_profiles(window) {
        for (k, &b) in bid_points.iter().enumerate() {
            let (pos, pay) = counterfactual_outcome(ctx.mechanism, ctx.ctrs, profile, i, b);
            q[k] += ctx.ctrs.rate(pos);
            te[k] += pay;
        }
    }
    for k in 0..bid_points.len() {
        q[k] /= count;
        te[k] /= count;
    }
    Ok(ResponseCurves { bids: bid_points, q, te })
}

/// All grid bids maximizing `Q(b) * v - TE(b)`, ties kept.
pub fn best_response_set(curves: &ResponseCurves, value: f64) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for k in 0..curves.len() {
        let u = curves.q[k] * value - curves.te[k];
        if u > best {
            best = u;
            arg.clear();
            arg.push(curves.bids[k]);
        } else if u == best {
            arg.push(curves.bids[k]);
        }
    }
    arg
}

/// Statistic summarizing the bidder's own bids over the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BidStat {
    #[default]
    Mean,
    /// Mean after dropping bids more than two standard deviations from the
    /// window mean.
    MeanExcludingOutliers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BrSolver {
    /// Invert the best-response correspondence by direct grid search.
    #[default]
    GridSearch,
    /// First-order condition `v = dTE/dQ`, symmetric difference with step 1.
    Foc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BrAggregation {
    /// One inversion of the pooled bid statistic.
    #[default]
    Pooled,
    /// Invert each auction's own bid, then average the per-auction values.
    PerAuction,
}

#[derive(Debug, Clone)]
pub struct BestResponseOptions {
    pub window: Window,
    pub bid_stat: BidStat,
    pub solver: BrSolver,
    pub aggregation: BrAggregation,
}

impl BestResponseOptions {
    /// The default configuration: second-half window, plain mean,
    /// grid search, pooled.
    pub fn standard(window: Window) -> Self {
        BestResponseOptions {
            window,
            bid_stat: BidStat::Mean,
            solver: BrSolver::GridSearch,
            aggregation: BrAggregation::Pooled,
        }
    }
}

fn method_for(opts: &BestResponseOptions, rounds: usize) -> Method {
    match (opts.aggregation, opts.solver, opts.bid_stat) {
        (BrAggregation::PerAuction, _, _) => Method::BrAvgValue,
        (_, BrSolver::Foc, BidStat::MeanExcludingOutliers) => Method::BrFocOutliers,
        (_, BrSolver::Foc, _) => Method::BrFoc,
        _ if opts.window.first() == 1 && opts.window.last() == rounds => Method::BrFullGame,
        _ => Method::BestResponse,
    }
}

fn bid_statistic(bids: &[f64], stat: BidStat, flags: &mut Vec<String>) -> f64 {
    let mean = bids.iter().sum::<f64>() / bids.len() as f64;
    match stat {
        BidStat::Mean => mean,
        BidStat::MeanExcludingOutliers => {
            let var = bids.iter().map(|&b| (b - mean) * (b - mean)).sum::<f64>() / bids.len() as f64;
            let sd = libm::sqrt(var);
            if sd == 0.0 {
                return mean;
            }
            let kept: Vec<f64> =
                bids.iter().copied().filter(|&b| (b - mean).abs() <= 2.0 * sd).collect();
            let removed = bids.len() - kept.len();
            if removed > 0 {
                flags.push(format!("outliers-removed:{removed}"));
            }
            if kept.is_empty() {
                mean
            } else {
                kept.iter().sum::<f64>() / kept.len() as f64
            }
        }
    }
}

/// Invert the grid best-response correspondence at a target bid.
fn invert_grid(
    curves: &ResponseCurves,
    values: &Grid,
    target: f64,
    flags: &mut Vec<String>,
) -> f64 {
    let value_points: Vec<f64> = values.to_vec();
    let ranges: Vec<(f64, f64)> = value_points
        .iter()
        .map(|&v| {
            let br = best_response_set(curves, v);
            (br[0], *br.last().unwrap())
        })
        .collect();
    // values whose best-response span contains the target
    let hits: Vec<usize> = (0..value_points.len())
        .filter(|&k| ranges[k].0 <= target && target <= ranges[k].1)
        .collect();
    if !hits.is_empty() {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &k in &hits {
            match runs.last_mut() {
                Some(run) if k == run.1 + 1 => run.1 = k,
                _ => runs.push((k, k)),
            }
        }
        if runs.len() > 1 {
            flags.push("noncontiguous-value-range".to_string());
        }
        let (lo, hi) = runs[0];
        if hi > lo {
            flags.push("value-range-midpoint".to_string());
        }
        return (value_points[lo] + value_points[hi]) / 2.0;
    }
    if target > ranges.last().unwrap().1 {
        flags.push("grid-ceiling".to_string());
        return values.max_value();
    }
    if target < ranges.first().unwrap().0 {
        flags.push("grid-floor".to_string());
        return values.min_value();
    }
    // bracket between adjacent values v, v+1 with max BR(v) < target < min BR(v+1)
    for k in 0..value_points.len() - 1 {
        if target > ranges[k].1 && target < ranges[k + 1].0 {
            flags.push("bracketed".to_string());
            return (value_points[k] + value_points[k + 1]) / 2.0;
        }
    }
    // best-response spans were not monotone around the target; fall back to
    // the value whose span is closest
    flags.push("nonmonotone-fallback".to_string());
    let k = (0..value_points.len())
        .min_by(|&a, &b| {
            let da = (ranges[a].0 - target).abs().min((ranges[a].1 - target).abs());
            let db = (ranges[b].0 - target).abs().min((ranges[b].1 - target).abs());
            da.total_cmp(&db)
        })
        .unwrap();
    value_points[k]
}

fn invert_foc(
    curves: &ResponseCurves,
    values: &Grid,
    bids: &Grid,
    target: f64,
    flags: &mut Vec<String>,
) -> f64 {
    let center = bids.round_to(target);
    let lo = (center - 1.0).max(bids.min_value());
    let hi = (center + 1.0).min(bids.max_value());
    if lo == center || hi == center {
        flags.push("foc-onesided".to_string());
    }
    let dq = curves.q_at(hi).unwrap() - curves.q_at(lo).unwrap();
    if dq == 0.0 {
        flags.push("foc-degenerate-grid-fallback".to_string());
        return invert_grid(curves, values, target, flags);
    }
    let dte = curves.te_at(hi).unwrap() - curves.te_at(lo).unwrap();
    dte / dq
}

/// Best-Response estimation for one bidder, with the variant selected by
/// `opts` (window, bid statistic, solver, aggregation).
pub fn estimate_best_response(
    seq: &BidSequence,
    i: usize,
    values: &Grid,
    bids: &Grid,
    opts: &BestResponseOptions,
    ctx: AuctionContext,
) -> Result<EstimateRecord, Error> {
    let curves = response_curves(seq, i, bids, opts.window, ctx)?;
    let mut flags = Vec::new();
    let estimate = match opts.aggregation {
        BrAggregation::Pooled => {
            let own: Vec<f64> = seq.window_profiles(opts.window).map(|p| p[i]).collect();
            let target = bid_statistic(&own, opts.bid_stat, &mut flags);
            match opts.solver {
                BrSolver::GridSearch => invert_grid(&curves, values, target, &mut flags),
                BrSolver::Foc => invert_foc(&curves, values, bids, target, &mut flags),
            }
        }
        BrAggregation::PerAuction => {
            let mut sum = 0.0;
            let mut per_auction_flags: Vec<String> = Vec::new();
            for profile in seq.window_profiles(opts.window) {
                let target = profile[i];
                sum += match opts.solver {
                    BrSolver::GridSearch => {
                        invert_grid(&curves, values, target, &mut per_auction_flags)
                    }
                    BrSolver::Foc => {
                        invert_foc(&curves, values, bids, target, &mut per_auction_flags)
                    }
                };
            }
            per_auction_flags.sort();
            per_auction_flags.dedup();
            flags.extend(per_auction_flags);
            sum / opts.window.len() as f64
        }
    };
    Ok(EstimateRecord {
        bidder: i,
        method: method_for(opts, seq.rounds()),
        estimate,
        window: opts.window,
        flags,
    })
}
