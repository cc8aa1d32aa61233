//! File formats: long- and wide-form bid logs, values files, atomic writes,
//! and fixed-precision number formatting.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use auctionkit::BidSequence;

use crate::manifest::RunManifest;

/// All numeric CSV output uses 6 decimal places for diff-stable files.
pub fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

/// Round to 6 decimal places for JSON embedding.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Recursively round every number in a JSON tree to 6 decimals.
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.as_i64().is_none() && n.as_u64().is_none() {
                    if let Some(r) = serde_json::Number::from_f64(round6(x)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut tmp = PathBuf::from(dir);
    let name = path.file_name().ok_or_else(|| anyhow!("output path has no file name"))?;
    tmp.push(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming into place: {}", path.display()))?;
    Ok(())
}

/// Assemble a CSV output: manifest comment line, header, rows.
pub fn csv_output(manifest: &RunManifest, header: &str, rows: &[String]) -> String {
    let mut out = String::new();
    out.push_str("# manifest: ");
    out.push_str(&manifest.to_line());
    out.push('\n');
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

/// JSON output with the manifest embedded and all floats rounded.
pub fn json_output(
    manifest: &RunManifest,
    body: serde_json::Value,
) -> anyhow::Result<String> {
    let mut root = serde_json::json!({
        "schema_version": 1,
        "manifest": manifest,
    });
    let serde_json::Value::Object(map) = &mut root else { unreachable!() };
    let serde_json::Value::Object(fields) = body else {
        bail!("json body must be an object");
    };
    for (k, mut v) in fields {
        round_json(&mut v);
        map.insert(k, v);
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&root)?))
}

fn reader(path: &Path) -> anyhow::Result<csv::Reader<fs::File>> {
    let file =
        fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

/// Load a long-form bid log: header `auction_index,bidder_id,bid`, auction
/// indices contiguous from 1, bidder ids 1..n, every pair present exactly
/// once.
pub fn load_bid_log(path: &Path) -> anyhow::Result<BidSequence> {
    let mut rdr = reader(path)?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_auction = 0usize;
    let mut max_bidder = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |k: usize, what: &str| -> anyhow::Result<&str> {
            record.get(k).ok_or_else(|| anyhow!("line {line}: missing {what} column"))
        };
        let auction: usize = parse(0, "auction_index")?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad auction_index: {e}"))?;
        let bidder: usize = parse(1, "bidder_id")?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad bidder_id: {e}"))?;
        let bid: f64 = parse(2, "bid")?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad bid: {e}"))?;
        if auction == 0 || bidder == 0 {
            bail!("line {line}: auction_index and bidder_id are 1-based");
        }
        if !bid.is_finite() || bid < 0.0 {
            bail!("line {line}: invalid bid {bid} (must be finite and nonnegative)");
        }
        max_auction = max_auction.max(auction);
        max_bidder = max_bidder.max(bidder);
        entries.push((auction, bidder, bid));
    }
    if entries.is_empty() {
        bail!("bid log {} is empty", path.display());
    }
    let mut grid: Vec<Vec<Option<f64>>> = vec![vec![None; max_bidder]; max_auction];
    for (auction, bidder, bid) in entries {
        let cell = &mut grid[auction - 1][bidder - 1];
        if cell.is_some() {
            bail!("duplicate entry for auction {auction}, bidder {bidder}");
        }
        *cell = Some(bid);
    }
    let mut profiles = Vec::with_capacity(max_auction);
    for (t0, row) in grid.into_iter().enumerate() {
        let t = t0 + 1;
        let profile: Vec<f64> = row
            .into_iter()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| anyhow!("incomplete profile at auction {t}"))?;
        profiles.push(profile);
    }
    BidSequence::from_profiles(profiles).map_err(|e| anyhow!("{e}"))
}

/// Load a wide-form bid log: header `auction_index,bidder_1,...,bidder_n`,
/// one row per auction in order.
pub fn load_bid_log_wide(path: &Path) -> anyhow::Result<BidSequence> {
    let mut rdr = reader(path)?;
    let mut profiles = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let auction: usize = record
            .get(0)
            .ok_or_else(|| anyhow!("line {line}: missing auction_index"))?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad auction_index: {e}"))?;
        if auction != row + 1 {
            bail!("line {line}: auction_index {auction} out of order (expected {})", row + 1);
        }
        let mut profile = Vec::with_capacity(record.len() - 1);
        for k in 1..record.len() {
            let bid: f64 = record
                .get(k)
                .unwrap()
                .trim()
                .parse()
                .map_err(|e| anyhow!("line {line}: bad bid in column {}: {e}", k + 1))?;
            profile.push(bid);
        }
        profiles.push(profile);
    }
    BidSequence::from_profiles(profiles).map_err(|e| anyhow!("{e}"))
}

/// Load a values file: header `bidder_id,value`, ids 1..n each present once.
pub fn load_values(path: &Path, bidders: usize) -> anyhow::Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    let mut values: Vec<Option<f64>> = vec![None; bidders];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bidder: usize = record
            .get(0)
            .ok_or_else(|| anyhow!("line {line}: missing bidder_id"))?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad bidder_id: {e}"))?;
        let value: f64 = record
            .get(1)
            .ok_or_else(|| anyhow!("line {line}: missing value"))?
            .trim()
            .parse()
            .map_err(|e| anyhow!("line {line}: bad value: {e}"))?;
        if bidder == 0 || bidder > bidders {
            bail!("line {line}: bidder_id {bidder} out of range 1..{bidders}");
        }
        if values[bidder - 1].is_some() {
            bail!("duplicate value for bidder {bidder}");
        }
        values[bidder - 1] = Some(value);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| anyhow!("missing value for bidder {}", i + 1)))
        .collect()
}

/// Read the manifest back out of an output file (CSV comment line or JSON
/// field).
pub fn manifest_from_output(path: &Path) -> anyhow::Result<RunManifest> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(rest) = text.strip_prefix("# manifest: ") {
        let line = rest.lines().next().unwrap_or_default();
        return RunManifest::from_line(line);
    }
    if text.trim_start().starts_with('{') {
        let root: serde_json::Value = serde_json::from_str(&text)?;
        if let Some(m) = root.get("manifest") {
            return Ok(serde_json::from_value(m.clone())?);
        }
    }
    bail!("{} does not contain an embedded manifest", path.display())
}
