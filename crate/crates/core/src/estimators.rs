//! Valuation estimators driven by the regret curve, plus the average-bid
//! baseline and estimate combination.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::regret::RegretCurve;
use crate::sequence::{BidSequence, Window};

/// Zero-regret tolerance for the regret-weighted estimator, in coins.
pub const ZERO_REGRET_TOLERANCE: f64 = 1e-9;

/// Estimation method identifier, matching the CLI `--method` names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    RegretMin,
    AvgBid,
    RegretWeighted,
    Combined,
    #[cfg_attr(feature = "serde", serde(rename = "vcg-ne"))]
    VcgLikeNe,
    #[cfg_attr(feature = "serde", serde(rename = "vcg-ne-raw"))]
    VcgLikeNeRaw,
    BestResponse,
    BrFoc,
    BrFocOutliers,
    BrFullGame,
    BrAvgValue,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RegretMin => "regret-min",
            Method::AvgBid => "avg-bid",
            Method::RegretWeighted => "regret-weighted",
            Method::Combined => "combined",
            Method::VcgLikeNe => "vcg-ne",
            Method::VcgLikeNeRaw => "vcg-ne-raw",
            Method::BestResponse => "best-response",
            Method::BrFoc => "br-foc",
            Method::BrFocOutliers => "br-foc-outliers",
            Method::BrFullGame => "br-full-game",
            Method::BrAvgValue => "br-avg-value",
        }
    }

    pub fn all() -> &'static [Method] {
        &[
            Method::RegretMin,
            Method::AvgBid,
            Method::RegretWeighted,
            Method::Combined,
            Method::VcgLikeNe,
            Method::VcgLikeNeRaw,
            Method::BestResponse,
            Method::BrFoc,
            Method::BrFocOutliers,
            Method::BrFullGame,
            Method::BrAvgValue,
        ]
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::all()
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or(Error::Empty("unknown estimation method"))
    }
}

/// Which objective the argmin estimator minimizes.
///
/// Absolute regret is the default; relative regret normalizes each candidate
/// by its attainable optimum, discounting values with little at stake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Absolute,
    Relative,
}

/// A per-bidder valuation estimate with provenance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateRecord {
    /// 0-based bidder index.
    pub bidder: usize,
    pub method: Method,
    /// Estimated per-click value in coins.
    pub estimate: f64,
    pub window: Window,
    /// Diagnostics: tie handling, fallbacks, exclusions.
    pub flags: Vec<String>,
}

/// Indices of the minimizing entries, grouped into runs of consecutive grid
/// values. Returns (chosen run, number of runs).
///
/// Membership uses the zero-regret tolerance rather than exact float
/// equality: regret plateaus are exact ties in real arithmetic, but summation
/// rounding can leave a boundary point a few ulps above the rest, and exact
/// comparison would then clip the plateau and shift its midpoint.
fn argmin_runs(values: &[f64], objective: &[f64]) -> (Vec<usize>, usize) {
    let mut min = f64::INFINITY;
    for &x in objective {
        if x < min {
            min = x;
        }
    }
    let cutoff = min + ZERO_REGRET_TOLERANCE;
    let arg: Vec<usize> = (0..objective.len()).filter(|&k| objective[k] <= cutoff).collect();
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for &k in &arg {
        match runs.last_mut() {
            Some(run) if values[k] == values[*run.last().unwrap()] + 1.0 => run.push(k),
            _ => runs.push(alloc::vec![k]),
        }
    }
    let count = runs.len();
    // non-contiguous argmin: keep the smallest-valued run
    (runs.into_iter().next().unwrap_or_default(), count)
}

fn run_midpoint(values: &[f64], run: &[usize]) -> f64 {
    (values[run[0]] + values[*run.last().unwrap()]) / 2.0
}

/// Regret-Minimization: the candidate valuation minimizing the regret curve.
/// A flat minimum over a contiguous range resolves to the range midpoint.
pub fn estimate_regret_min(curve: &RegretCurve, window: Window, objective: Objective) -> EstimateRecord {
    let mut flags = Vec::new();
    let values: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
    let scores: Vec<f64> = match objective {
        Objective::Absolute => curve.points.iter().map(|p| p.report.regret).collect(),
        Objective::Relative => {
            let mut skipped = 0usize;
            let s = curve
                .points
                .iter()
                .map(|p| {
                    p.report.relative.unwrap_or_else(|| {
                        skipped += 1;
                        f64::INFINITY
                    })
                })
                .collect();
            if skipped > 0 {
                flags.push(alloc::format!("relative-undefined-skipped:{skipped}"));
            }
            s
        }
    };
    let (run, run_count) = argmin_runs(&values, &scores);
    if run.len() > 1 {
        flags.push("flat-minimum".to_string());
    }
    if run_count > 1 {
        flags.push("noncontiguous-argmin".to_string());
    }
    let estimate = run_midpoint(&values, &run);
    EstimateRecord { bidder: curve.bidder, method: Method::RegretMin, estimate, window, flags }
}

/// Average-Bid: the arithmetic mean of the bidder's raw logged bids over the
/// window, the least-squares fit of the truthful-plus-noise model.
pub fn estimate_average_bid(
    seq: &BidSequence,
    i: usize,
    window: Window,
) -> Result<EstimateRecord, Error> {
    seq.check_bidder(i)?;
    window.validate(seq)?;
    let mut sum = 0.0;
    for profile in seq.window_profiles(window) {
        sum += profile[i];
    }
    Ok(EstimateRecord {
        bidder: i,
        method: Method::AvgBid,
        estimate: sum / window.len() as f64,
        window,
        flags: Vec::new(),
    })
}

/// Regret-weighted average: mean of the candidate valuations weighted by
/// inverse regret. When any regret is within [`ZERO_REGRET_TOLERANCE`] of
/// zero (or below it) the formula's limit applies: the midpoint of the
/// near-zero set.
pub fn estimate_regret_weighted(curve: &RegretCurve, window: Window) -> EstimateRecord {
    let mut flags = Vec::new();
    let values: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
    let zero: Vec<usize> = (0..curve.points.len())
        .filter(|&k| curve.points[k].report.regret <= ZERO_REGRET_TOLERANCE)
        .collect();
    let estimate = if !zero.is_empty() {
        flags.push("zero-regret-limit".to_string());
        let mut runs: Vec<Vec<usize>> = Vec::new();
        for &k in &zero {
            match runs.last_mut() {
                Some(run) if values[k] == values[*run.last().unwrap()] + 1.0 => run.push(k),
                _ => runs.push(alloc::vec![k]),
            }
        }
        if runs.len() > 1 {
            flags.push("noncontiguous-zero-set".to_string());
        }
        run_midpoint(&values, &runs[0])
    } else {
        let mut num = 0.0;
        let mut den = 0.0;
        for p in &curve.points {
            let w = 1.0 / p.report.regret;
            num += p.value * w;
            den += w;
        }
        num / den
    };
    EstimateRecord { bidder: curve.bidder, method: Method::RegretWeighted, estimate, window, flags }
}

/// Unweighted mean of two or more estimates for the same bidder.
pub fn combine_mean(records: &[EstimateRecord]) -> Result<EstimateRecord, Error> {
    let first = records.first().ok_or(Error::Empty("estimate records"))?;
    if records.len() < 2 {
        return Err(Error::Empty("need at least two records to combine"));
    }
    if records.iter().any(|r| r.bidder != first.bidder) {
        return Err(Error::BidderMismatch);
    }
    let mut sum = 0.0;
    let mut parts = String::new();
    for (k, r) in records.iter().enumerate() {
        sum += r.estimate;
        if k > 0 {
            parts.push('+');
        }
        parts.push_str(r.method.as_str());
    }
    Ok(EstimateRecord {
        bidder: first.bidder,
        method: Method::Combined,
        estimate: sum / records.len() as f64,
        window: first.window,
        flags: alloc::vec![alloc::format!("combines:{parts}")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::{RegretPoint, RegretReport};
    use alloc::vec;

    fn curve_from(regrets: &[(f64, f64)]) -> RegretCurve {
        RegretCurve {
            bidder: 0,
            points: regrets
                .iter()
                .map(|&(value, regret)| RegretPoint {
                    value,
                    report: RegretReport {
                        actual: 10.0 - regret,
                        opt: 10.0,
                        regret,
                        relative: Some(regret / 10.0),
                        opt_bids: vec![value],
                    },
                })
                .collect(),
        }
    }

    fn window() -> Window {
        Window::new(1, 1).unwrap()
    }

    #[test]
    fn argmin_unique_minimum() {
        let c = curve_from(&[(26.0, 3.0), (27.0, 1.0), (28.0, 2.0)]);
        let r = estimate_regret_min(&c, window(), Objective::Absolute);
        assert_eq!(r.estimate, 27.0);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn argmin_flat_range_midpoint() {
        // flat minimum over {49..52} resolves to 50.5
        let c = curve_from(&[
            (48.0, 2.0),
            (49.0, 1.0),
            (50.0, 1.0),
            (51.0, 1.0),
            (52.0, 1.0),
            (53.0, 4.0),
        ]);
        let r = estimate_regret_min(&c, window(), Objective::Absolute);
        assert_eq!(r.estimate, 50.5);
        assert!(r.flags.contains(&"flat-minimum".to_string()));
    }

    #[test]
    fn argmin_noncontiguous_takes_lowest_run() {
        let c = curve_from(&[(10.0, 1.0), (11.0, 2.0), (12.0, 1.0)]);
        let r = estimate_regret_min(&c, window(), Objective::Absolute);
        assert_eq!(r.estimate, 10.0);
        assert!(r.flags.contains(&"noncontiguous-argmin".to_string()));
    }

    #[test]
    fn average_bid_examples() {
        let seq = BidSequence::from_profiles(vec![vec![10.0], vec![20.0], vec![30.0]]).unwrap();
        let r = estimate_average_bid(&seq, 0, Window::full(3).unwrap()).unwrap();
        assert_eq!(r.estimate, 20.0);
        let seq = BidSequence::from_profiles(vec![vec![45.0]; 8]).unwrap();
        let r = estimate_average_bid(&seq, 0, Window::full(8).unwrap()).unwrap();
        assert_eq!(r.estimate, 45.0);
    }

    #[test]
    fn weighted_symmetric_curve() {
        let c = curve_from(&[(1.0, 2.0), (2.0, 1.0), (3.0, 2.0)]);
        let r = estimate_regret_weighted(&c, window());
        assert!((r.estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_uniform_regrets_gives_grid_midpoint() {
        let points: Vec<(f64, f64)> = (1..=60).map(|v| (v as f64, 7.0)).collect();
        let c = curve_from(&points);
        let r = estimate_regret_weighted(&c, window());
        assert!((r.estimate - 30.5).abs() < 1e-9);
    }

    #[test]
    fn weighted_exact_zero_is_limiting_case() {
        let c = curve_from(&[(32.0, 1.0), (33.0, 0.0), (34.0, 1.0)]);
        let r = estimate_regret_weighted(&c, window());
        assert_eq!(r.estimate, 33.0);
        assert!(r.flags.contains(&"zero-regret-limit".to_string()));
    }

    #[test]
    fn scale_invariance_of_both_curve_estimators() {
        let base = [(30.0, 4.0), (31.0, 1.5), (32.0, 2.0), (33.0, 6.0)];
        let c1 = curve_from(&base);
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(v, r)| (v, r * 3.5)).collect();
        let c2 = curve_from(&scaled);
        let m1 = estimate_regret_min(&c1, window(), Objective::Absolute).estimate;
        let m2 = estimate_regret_min(&c2, window(), Objective::Absolute).estimate;
        assert_eq!(m1, m2);
        let w1 = estimate_regret_weighted(&c1, window()).estimate;
        let w2 = estimate_regret_weighted(&c2, window()).estimate;
        assert!((w1 - w2).abs() < 1e-12);
    }

    #[test]
    fn combine_mean_examples() {
        let mk = |bidder, estimate| EstimateRecord {
            bidder,
            method: Method::RegretMin,
            estimate,
            window: window(),
            flags: vec![],
        };
        assert_eq!(combine_mean(&[mk(0, 30.0), mk(0, 36.0)]).unwrap().estimate, 33.0);
        assert_eq!(combine_mean(&[mk(0, 27.0), mk(0, 27.0)]).unwrap().estimate, 27.0);
        assert_eq!(
            combine_mean(&[mk(0, 21.0), mk(0, 45.0), mk(0, 33.0)]).unwrap().estimate,
            33.0
        );
        assert!(combine_mean(&[mk(0, 30.0), mk(1, 36.0)]).is_err());
        assert!(combine_mean(&[mk(0, 30.0)]).is_err());
    }
}
