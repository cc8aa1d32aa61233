//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use auctionkit::equilibrium::{
    estimate_best_response, estimate_vcg_like_ne, response_curves, BestResponseOptions, BidStat,
    BrAggregation, BrSolver, NeAggregation, TopRule, VcgNeOptions,
};
use auctionkit::estimators::{
    combine_mean, estimate_average_bid, estimate_regret_min, estimate_regret_weighted,
    EstimateRecord, Method, Objective,
};
use auctionkit::eval::{
    evaluate as score_estimates, pearson, spearman, welfare_series, EvaluationReport,
};
use auctionkit::regret::{
    group_relative_regret, momentary_regret_series, regret as regret_report, regret_curve,
    AuctionContext,
};
use auctionkit::{BidSequence, CtrProfile, Grid, Mechanism, Window};

use crate::io::{
    csv_output, fmt6, json_output, load_bid_log, load_bid_log_wide, load_values, write_atomic,
};
use crate::manifest::RunManifest;
use crate::{EstimateArgs, EvaluateArgs, LogArgs, RegretArgs, ReportArgs, SimulateArgs};

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

fn parse_pair(text: &str, what: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("{what} must be `first:last`, got `{text}`"))?;
    let lo: usize = a.trim().parse().with_context(|| format!("bad {what} `{text}`"))?;
    let hi: usize = b.trim().parse().with_context(|| format!("bad {what} `{text}`"))?;
    Ok((lo, hi))
}

fn parse_window(raw: &Option<String>, rounds: usize) -> anyhow::Result<Window> {
    let window = match raw {
        Some(text) => {
            let (first, last) = parse_pair(text, "window")?;
            Window::new(first, last).map_err(|e| anyhow!("{e}"))?
        }
        None => Window::second_half(rounds).map_err(|e| anyhow!("{e}"))?,
    };
    Ok(window)
}

fn parse_grid(raw: &Option<String>) -> anyhow::Result<Grid> {
    match raw {
        Some(text) => {
            let (lo, hi) = parse_pair(text, "grid")?;
            let lo = u32::try_from(lo).map_err(|_| anyhow!("grid bound {lo} too large"))?;
            let hi = u32::try_from(hi).map_err(|_| anyhow!("grid bound {hi} too large"))?;
            Grid::new(lo, hi).map_err(|e| anyhow!("{e}"))
        }
        None => Ok(Grid::default()),
    }
}

/// Parsed common inputs of the log-consuming commands.
struct LogInputs {
    seq: BidSequence,
    mechanism: Mechanism,
    window: Window,
    grid: Grid,
    ctrs: CtrProfile,
}

impl LogInputs {
    fn load(args: &LogArgs) -> anyhow::Result<Self> {
        let seq = if args.wide {
            load_bid_log_wide(&args.bids)?
        } else {
            load_bid_log(&args.bids)?
        };
        let mechanism: Mechanism =
            args.mechanism.parse().map_err(|e| anyhow!("{e}: `{}`", args.mechanism))?;
        let window = parse_window(&args.window, seq.rounds())?;
        window.validate(&seq).map_err(|e| anyhow!("{e}"))?;
        let grid = parse_grid(&args.grid)?;
        let ctrs = if seq.bidders() == CtrProfile::experiment_default().slots() {
            CtrProfile::experiment_default()
        } else {
            bail!(
                "bid log has {} bidders; built-in click-through rates cover 5",
                seq.bidders()
            );
        };
        Ok(LogInputs { seq, mechanism, window, grid, ctrs })
    }

    fn ctx(&self) -> AuctionContext<'_> {
        AuctionContext { mechanism: self.mechanism, ctrs: &self.ctrs }
    }

    /// Canonical argument list for the manifest.
    fn canonical_args(args: &LogArgs, window: Window, grid: &Grid) -> Vec<String> {
        let mut out = vec!["--bids".into(), path_arg(&args.bids)];
        if args.wide {
            out.push("--wide".into());
        }
        out.push("--mechanism".into());
        out.push(args.mechanism.clone());
        out.push("--window".into());
        out.push(format!("{}:{}", window.first(), window.last()));
        out.push("--grid".into());
        out.push(format!("{}:{}", grid.min_value() as u32, grid.max_value() as u32));
        out
    }
}

fn relative_cell(relative: Option<f64>) -> String {
    relative.map(fmt6).unwrap_or_default()
}

fn flags_cell(flags: &[String]) -> String {
    flags.join(";")
}

pub fn simulate(args: SimulateArgs, recorded: Option<RunManifest>) -> anyhow::Result<()> {
    let seed_override = match args.seed {
        Some(seed) => Some(seed),
        None => match std::env::var("AUCTIONKIT_SEED") {
            Ok(text) => Some(
                text.trim()
                    .parse::<u64>()
                    .map_err(|e| anyhow!("bad AUCTIONKIT_SEED `{text}`: {e}"))?,
            ),
            Err(_) => None,
        },
    };
    let config = crate::config::load_session(&args.config, seed_override)?;
    let manifest = recorded.unwrap_or_else(|| {
        RunManifest::new(
            "simulate",
            vec![
                "--config".into(),
                path_arg(&args.config),
                "--out-dir".into(),
                path_arg(&args.out_dir),
                "--seed".into(),
                config.seed.to_string(),
            ],
        )
    });
    let log = auctionkit::sim::run_session(&config).map_err(|e| anyhow!("{e}"))?;

    let mut bid_rows = Vec::new();
    for t in 1..=log.sequence.rounds() {
        for (i, &bid) in log.sequence.profile(t).iter().enumerate() {
            bid_rows.push(format!("{t},{},{}", i + 1, fmt6(bid)));
        }
    }
    write_atomic(
        &args.out_dir.join("bids.csv"),
        &csv_output(&manifest, "auction_index,bidder_id,bid", &bid_rows),
    )?;

    let value_rows: Vec<String> = log
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{},{}", i + 1, fmt6(v)))
        .collect();
    write_atomic(
        &args.out_dir.join("values.csv"),
        &csv_output(&manifest, "bidder_id,value", &value_rows),
    )?;

    let mut outcome_rows = Vec::new();
    for (t0, outcome) in log.outcomes.iter().enumerate() {
        for i in 0..log.sequence.bidders() {
            outcome_rows.push(format!(
                "{},{},{},{},{},{}",
                t0 + 1,
                i + 1,
                outcome.positions[i],
                fmt6(outcome.expenditures[i]),
                fmt6(outcome.utilities[i]),
                fmt6(outcome.welfare),
            ));
        }
    }
    write_atomic(
        &args.out_dir.join("outcomes.csv"),
        &csv_output(
            &manifest,
            "auction_index,bidder_id,position,expenditure,utility,welfare",
            &outcome_rows,
        ),
    )?;
    Ok(())
}

fn regret_cmd_args(args: &RegretArgs, inputs: &LogInputs) -> Vec<String> {
    let mut out = LogInputs::canonical_args(&args.log, inputs.window, &inputs.grid);
    out.extend([
        "--values".into(),
        path_arg(&args.values),
        "--block-len".into(),
        args.block_len.to_string(),
        "--out-dir".into(),
        path_arg(&args.out_dir),
    ]);
    out
}

pub fn regret(args: RegretArgs, recorded: Option<RunManifest>) -> anyhow::Result<()> {
    let inputs = LogInputs::load(&args.log)?;
    let values = load_values(&args.values, inputs.seq.bidders())?;
    let manifest =
        recorded.unwrap_or_else(|| RunManifest::new("regret", regret_cmd_args(&args, &inputs)));

    let mut curve_rows = Vec::new();
    for i in 0..inputs.seq.bidders() {
        let curve = regret_curve(
            &inputs.seq,
            i,
            &inputs.grid,
            &inputs.grid,
            inputs.window,
            inputs.ctx(),
        )
        .map_err(|e| anyhow!("{e}"))?;
        for point in &curve.points {
            curve_rows.push(format!(
                "{},{},{},{},{},{}",
                i + 1,
                fmt6(point.value),
                fmt6(point.report.actual),
                fmt6(point.report.opt),
                fmt6(point.report.regret),
                relative_cell(point.report.relative),
            ));
        }
    }
    write_atomic(
        &args.out_dir.join("curves.csv"),
        &csv_output(&manifest, "bidder_id,value,actual,opt,regret,relative", &curve_rows),
    )?;

    let mut total_rows = Vec::new();
    for (i, &value) in values.iter().enumerate() {
        let report =
            regret_report(&inputs.seq, i, value, inputs.window, &inputs.grid, inputs.ctx())
                .map_err(|e| anyhow!("{e}"))?;
        total_rows.push(format!(
            "{},{},{},{},{},{}",
            i + 1,
            fmt6(value),
            fmt6(report.actual),
            fmt6(report.opt),
            fmt6(report.regret),
            relative_cell(report.relative),
        ));
    }
    let members: Vec<usize> = (0..inputs.seq.bidders()).collect();
    let group = group_relative_regret(
        &inputs.seq,
        &members,
        &values,
        inputs.window,
        &inputs.grid,
        inputs.ctx(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    total_rows.push(format!(
        "group,,{},{},{},{}",
        fmt6(group.actual),
        fmt6(group.opt),
        fmt6(group.regret),
        relative_cell(group.relative),
    ));
    write_atomic(
        &args.out_dir.join("totals.csv"),
        &csv_output(&manifest, "bidder_id,value,actual,opt,regret,relative", &total_rows),
    )?;

    let blocks = momentary_regret_series(
        &inputs.seq,
        &members,
        &values,
        args.block_len,
        &inputs.grid,
        inputs.ctx(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let momentary_rows: Vec<String> = blocks
        .iter()
        .enumerate()
        .map(|(k, block)| {
            format!(
                "{},{},{},{},{},{},{},{}",
                k + 1,
                block.window.first(),
                block.window.last(),
                block.partial,
                fmt6(block.group.actual),
                fmt6(block.group.opt),
                fmt6(block.group.regret),
                relative_cell(block.group.relative),
            )
        })
        .collect();
    write_atomic(
        &args.out_dir.join("momentary.csv"),
        &csv_output(
            &manifest,
            "block_index,first,last,partial,actual,opt,regret,relative",
            &momentary_rows,
        ),
    )?;
    Ok(())
}

/// Run one estimation method over every bidder. Returns the records plus,
/// for the perturbing equilibrium estimator, the per-auction deviations.
fn run_method(
    inputs: &LogInputs,
    method: Method,
    objective: Objective,
    top_rule: TopRule,
    by_rank: bool,
) -> anyhow::Result<(Vec<EstimateRecord>, Option<Vec<f64>>)> {
    let seq = &inputs.seq;
    let n = seq.bidders();
    let window = if method == Method::BrFullGame {
        Window::full(seq.rounds()).map_err(|e| anyhow!("{e}"))?
    } else {
        inputs.window
    };
    let grid = &inputs.grid;
    let ctx = inputs.ctx();
    let mut deviations = None;
    let mut records = Vec::with_capacity(n);
    match method {
        Method::RegretMin | Method::RegretWeighted | Method::Combined => {
            for i in 0..n {
                let curve = regret_curve(seq, i, grid, grid, window, ctx)
                    .map_err(|e| anyhow!("{e}"))?;
                let record = match method {
                    Method::RegretMin => estimate_regret_min(&curve, window, objective),
                    Method::RegretWeighted => estimate_regret_weighted(&curve, window),
                    _ => {
                        let rm = estimate_regret_min(&curve, window, objective);
                        let ab = estimate_average_bid(seq, i, window)
                            .map_err(|e| anyhow!("{e}"))?;
                        combine_mean(&[rm, ab]).map_err(|e| anyhow!("{e}"))?
                    }
                };
                records.push(record);
            }
        }
        Method::AvgBid => {
            for i in 0..n {
                records
                    .push(estimate_average_bid(seq, i, window).map_err(|e| anyhow!("{e}"))?);
            }
        }
        Method::VcgLikeNe | Method::VcgLikeNeRaw => {
            let opts = VcgNeOptions {
                perturb: method == Method::VcgLikeNe,
                top_rule,
                aggregation: if by_rank {
                    NeAggregation::ByRank
                } else {
                    NeAggregation::ByIdentity
                },
            };
            let report = estimate_vcg_like_ne(seq, &inputs.ctrs, window, &opts)
                .map_err(|e| anyhow!("{e}"))?;
            records = report.estimates;
            if inputs.mechanism == Mechanism::Vcg {
                for record in &mut records {
                    record.flags.push("mechanism-mismatch".to_string());
                }
            }
            if opts.perturb {
                deviations = Some(report.deviations);
            }
        }
        Method::BestResponse
        | Method::BrFoc
        | Method::BrFocOutliers
        | Method::BrFullGame
        | Method::BrAvgValue => {
            let mut opts = BestResponseOptions::standard(window);
            match method {
                Method::BrFoc => opts.solver = BrSolver::Foc,
                Method::BrFocOutliers => {
                    opts.solver = BrSolver::Foc;
                    opts.bid_stat = BidStat::MeanExcludingOutliers;
                }
                Method::BrAvgValue => opts.aggregation = BrAggregation::PerAuction,
                _ => {}
            }
            for i in 0..n {
                records.push(
                    estimate_best_response(seq, i, grid, grid, &opts, ctx)
                        .map_err(|e| anyhow!("{e}"))?,
                );
            }
        }
    }
    Ok((records, deviations))
}

fn estimate_rows(records: &[EstimateRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.bidder + 1,
                r.method.as_str(),
                fmt6(r.estimate),
                r.window.first(),
                r.window.last(),
                flags_cell(&r.flags),
            )
        })
        .collect()
}

pub fn estimate(args: EstimateArgs, recorded: Option<RunManifest>) -> anyhow::Result<()> {
    let inputs = LogInputs::load(&args.log)?;
    let method: Method = args
        .method
        .parse()
        .map_err(|_| anyhow!("unknown method `{}`", args.method))?;
    let objective = if args.relative_objective { Objective::Relative } else { Objective::Absolute };
    let top_rule = match args.top_rule.as_str() {
        "second" => TopRule::SecondValue,
        "max-second-own" => TopRule::MaxSecondOwn,
        other => bail!("unknown top rule `{other}` (expected second | max-second-own)"),
    };
    let manifest = recorded.unwrap_or_else(|| {
        let mut a = LogInputs::canonical_args(&args.log, inputs.window, &inputs.grid);
        a.extend(["--method".into(), method.as_str().to_string()]);
        if args.relative_objective {
            a.push("--relative-objective".into());
        }
        a.extend(["--top-rule".into(), args.top_rule.clone()]);
        if args.by_rank {
            a.push("--by-rank".into());
        }
        a.extend(["--out".into(), path_arg(&args.out)]);
        if let Some(p) = &args.out_curves {
            a.extend(["--out-curves".into(), path_arg(p)]);
        }
        if let Some(p) = &args.out_deviations {
            a.extend(["--out-deviations".into(), path_arg(p)]);
        }
        RunManifest::new("estimate", a)
    });

    let (records, deviations) = run_method(&inputs, method, objective, top_rule, args.by_rank)?;
    write_atomic(
        &args.out,
        &csv_output(
            &manifest,
            "bidder_id,method,estimate,window_first,window_last,flags",
            &estimate_rows(&records),
        ),
    )?;

    if let Some(path) = &args.out_curves {
        let window = records.first().map(|r| r.window).unwrap_or(inputs.window);
        let mut rows = Vec::new();
        for i in 0..inputs.seq.bidders() {
            let curves = response_curves(&inputs.seq, i, &inputs.grid, window, inputs.ctx())
                .map_err(|e| anyhow!("{e}"))?;
            for k in 0..curves.len() {
                rows.push(format!(
                    "{},{},{},{}",
                    i + 1,
                    fmt6(curves.bids[k]),
                    fmt6(curves.q[k]),
                    fmt6(curves.te[k]),
                ));
            }
        }
        write_atomic(path, &csv_output(&manifest, "bidder_id,bid,q,te", &rows))?;
    }

    if let Some(path) = &args.out_deviations {
        let Some(deviations) = deviations else {
            bail!("--out-deviations requires --method vcg-ne");
        };
        let rows: Vec<String> = deviations
            .iter()
            .enumerate()
            .map(|(k, &d)| format!("{},{}", k + 1, fmt6(d)))
            .collect();
        write_atomic(
            path,
            &csv_output(&manifest, "auction_offset,mean_abs_deviation", &rows),
        )?;
    }
    Ok(())
}

/// Read back an estimates CSV, grouped per method in file order.
fn load_estimates(
    path: &PathBuf,
    bidders: usize,
) -> anyhow::Result<Vec<(Method, Vec<f64>)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut groups: Vec<(Method, Vec<Option<f64>>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bidder: usize = record
            .get(0)
            .ok_or_else(|| anyhow!("line {line}: missing bidder_id"))?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad bidder_id: {e}"))?;
        let method: Method = record
            .get(1)
            .ok_or_else(|| anyhow!("line {line}: missing method"))?
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {line}: unknown method"))?;
        let estimate: f64 = record
            .get(2)
            .ok_or_else(|| anyhow!("line {line}: missing estimate"))?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad estimate: {e}"))?;
        if bidder == 0 || bidder > bidders {
            bail!("line {line}: bidder_id {bidder} out of range 1..{bidders}");
        }
        let slot = match groups.iter_mut().find(|(m, _)| *m == method) {
            Some((_, slots)) => slots,
            None => {
                groups.push((method, vec![None; bidders]));
                &mut groups.last_mut().unwrap().1
            }
        };
        if slot[bidder - 1].is_some() {
            bail!("duplicate estimate for bidder {bidder}, method {}", method.as_str());
        }
        slot[bidder - 1] = Some(estimate);
    }
    groups
        .into_iter()
        .map(|(method, slots)| {
            let estimates = slots
                .into_iter()
                .enumerate()
                .map(|(i, e)| {
                    e.ok_or_else(|| {
                        anyhow!("method {} is missing bidder {}", method.as_str(), i + 1)
                    })
                })
                .collect::<anyhow::Result<Vec<f64>>>()?;
            Ok((method, estimates))
        })
        .collect()
}

fn evaluation_json(method: Method, report: &EvaluationReport) -> serde_json::Value {
    serde_json::json!({
        "method": method.as_str(),
        "report": report,
    })
}

pub fn evaluate_cmd(args: EvaluateArgs, recorded: Option<RunManifest>) -> anyhow::Result<()> {
    let inputs = LogInputs::load(&args.log)?;
    let values = load_values(&args.values, inputs.seq.bidders())?;
    let groups = load_estimates(&args.estimates, inputs.seq.bidders())?;
    if groups.is_empty() {
        bail!("no estimates found in {}", args.estimates.display());
    }
    let manifest = recorded.unwrap_or_else(|| {
        let mut a = LogInputs::canonical_args(&args.log, inputs.window, &inputs.grid);
        a.extend([
            "--estimates".into(),
            path_arg(&args.estimates),
            "--values".into(),
            path_arg(&args.values),
            "--out".into(),
            path_arg(&args.out),
        ]);
        if let Some(p) = &args.out_csv {
            a.extend(["--out-csv".into(), path_arg(p)]);
        }
        RunManifest::new("evaluate", a)
    });

    let mut reports = Vec::new();
    for (method, estimates) in &groups {
        let report = score_estimates(&inputs.seq, &values, estimates, inputs.window)
            .map_err(|e| anyhow!("{e}"))?;
        reports.push((*method, report));
    }

    let body = serde_json::json!({
        "window": { "first": inputs.window.first(), "last": inputs.window.last() },
        "evaluations": reports
            .iter()
            .map(|(m, r)| evaluation_json(*m, r))
            .collect::<Vec<_>>(),
    });
    write_atomic(&args.out, &json_output(&manifest, body)?)?;

    if let Some(path) = &args.out_csv {
        let mut rows = Vec::new();
        for (method, report) in &reports {
            for b in &report.bidders {
                rows.push(format!(
                    "{},{},{},{},{},{},{},{},{}",
                    method.as_str(),
                    b.bidder + 1,
                    fmt6(b.value),
                    fmt6(b.estimate),
                    fmt6(b.relative_error),
                    b.modal_rank,
                    b.modal_rank_tied,
                    fmt6(b.unbiased_estimate),
                    fmt6(b.unbiased_error),
                ));
            }
        }
        write_atomic(
            path,
            &csv_output(
                &manifest,
                "method,bidder_id,value,estimate,relative_error,modal_rank,modal_rank_tied,unbiased_estimate,unbiased_error",
                &rows,
            ),
        )?;
    }
    Ok(())
}

pub fn report(args: ReportArgs, recorded: Option<RunManifest>) -> anyhow::Result<()> {
    let inputs = LogInputs::load(&args.log)?;
    let values = load_values(&args.values, inputs.seq.bidders())?;
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|m| {
            m.trim()
                .parse::<Method>()
                .map_err(|_| anyhow!("unknown method `{}`", m.trim()))
        })
        .collect::<anyhow::Result<_>>()?;
    if methods.is_empty() {
        bail!("--methods must list at least one method");
    }
    let manifest = recorded.unwrap_or_else(|| {
        let mut a = LogInputs::canonical_args(&args.log, inputs.window, &inputs.grid);
        a.extend([
            "--values".into(),
            path_arg(&args.values),
            "--methods".into(),
            methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
            "--block-len".into(),
            args.block_len.to_string(),
            "--out".into(),
            path_arg(&args.out),
        ]);
        RunManifest::new("report", a)
    });

    let members: Vec<usize> = (0..inputs.seq.bidders()).collect();
    let mut bidder_regret = Vec::new();
    let mut relative_regret = Vec::new();
    for (i, &value) in values.iter().enumerate() {
        let r = regret_report(&inputs.seq, i, value, inputs.window, &inputs.grid, inputs.ctx())
            .map_err(|e| anyhow!("{e}"))?;
        relative_regret.push(r.relative.unwrap_or(0.0));
        bidder_regret.push(serde_json::json!({
            "bidder_id": i + 1,
            "value": value,
            "actual": r.actual,
            "opt": r.opt,
            "regret": r.regret,
            "relative": r.relative,
        }));
    }
    let group = group_relative_regret(
        &inputs.seq,
        &members,
        &values,
        inputs.window,
        &inputs.grid,
        inputs.ctx(),
    )
    .map_err(|e| anyhow!("{e}"))?;

    let blocks = momentary_regret_series(
        &inputs.seq,
        &members,
        &values,
        args.block_len,
        &inputs.grid,
        inputs.ctx(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let momentary: Vec<serde_json::Value> = blocks
        .iter()
        .map(|b| {
            serde_json::json!({
                "first": b.window.first(),
                "last": b.window.last(),
                "partial": b.partial,
                "regret": b.group.regret,
                "relative": b.group.relative,
            })
        })
        .collect();

    let welfare = welfare_series(&inputs.seq, &values, &inputs.ctrs, args.block_len)
        .map_err(|e| anyhow!("{e}"))?;

    let mut estimates = serde_json::Map::new();
    let mut evaluations = serde_json::Map::new();
    let mut estimate_corr = serde_json::Map::new();
    for &method in &methods {
        let (records, _) =
            run_method(&inputs, method, Objective::Absolute, TopRule::SecondValue, false)?;
        let point_estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
        estimates.insert(
            method.as_str().to_string(),
            serde_json::Value::Array(
                records
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "bidder_id": r.bidder + 1,
                            "estimate": r.estimate,
                            "flags": r.flags,
                        })
                    })
                    .collect(),
            ),
        );
        let report = score_estimates(&inputs.seq, &values, &point_estimates, inputs.window)
            .map_err(|e| anyhow!("{e}"))?;
        evaluations.insert(
            method.as_str().to_string(),
            serde_json::to_value(&report)?,
        );
        estimate_corr.insert(
            method.as_str().to_string(),
            serde_json::json!({
                "pearson": pearson(&values, &point_estimates).ok(),
                "spearman": spearman(&values, &point_estimates).ok(),
            }),
        );
    }

    let body = serde_json::json!({
        "mechanism": inputs.mechanism.as_str(),
        "window": { "first": inputs.window.first(), "last": inputs.window.last() },
        "block_len": args.block_len,
        "regret": { "bidders": bidder_regret, "group": {
            "actual": group.actual,
            "opt": group.opt,
            "regret": group.regret,
            "relative": group.relative,
        }},
        "momentary": momentary,
        "welfare": welfare,
        "estimates": estimates,
        "evaluations": evaluations,
        "correlations": {
            "value_vs_relative_regret": {
                "pearson": pearson(&values, &relative_regret).ok(),
                "spearman": spearman(&values, &relative_regret).ok(),
            },
            "value_vs_estimate": estimate_corr,
        },
    });
    write_atomic(&args.out, &json_output(&manifest, body)?)?;
    Ok(())
}

pub use evaluate_cmd as evaluate;
