//! Result table emission: the compact benchmark layout (seconds for the
//! serial baseline row, speedups for everything else) and a round-trippable
//! CSV of raw records.

use std::collections::BTreeSet;

use crate::runner::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    #[value(name = "paper")]
    Paper,
    #[value(name = "csv")]
    Csv,
}

/// Row order mirrors the benchmark convention: serial baseline first.
const ALGO_ORDER: [&str; 8] = ["sr4", "pr4", "pr2", "btn", "oet", "gsd", "gvr", "ger"];

fn algo_rank(name: &str) -> usize {
    ALGO_ORDER
        .iter()
        .position(|&a| a == name)
        .unwrap_or(ALGO_ORDER.len())
}

/// Problem-size aliases: nM means n·1024·10³ keys.
pub fn n_label(n: usize) -> String {
    match n {
        8_192_000 => "8M".to_string(),
        32_768_000 => "32M".to_string(),
        131_072_000 => "128M".to_string(),
        other => other.to_string(),
    }
}

/// Parses a key count, accepting the aliased sizes.
pub fn parse_n(text: &str) -> Result<usize, String> {
    match text {
        "8M" => Ok(8_192_000),
        "32M" => Ok(32_768_000),
        "128M" => Ok(131_072_000),
        other => other
            .parse::<usize>()
            .map_err(|e| format!("invalid key count '{other}': {e}")),
    }
}

pub fn emit_table(records: &[RunRecord], format: TableFormat) -> String {
    match format {
        TableFormat::Paper => emit_paper(records),
        TableFormat::Csv => emit_csv(records),
    }
}

/// One row per (algo, p), one column per n, averaged over repetitions.
/// The sr4 row shows seconds to three decimals; other rows show speedup
/// over sr4 to two decimals.
pub fn emit_paper(records: &[RunRecord]) -> String {
    let ns: Vec<usize> = records
        .iter()
        .map(|r| r.n)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rows: Vec<(String, usize)> = records
        .iter()
        .map(|r| (r.algo.clone(), r.p))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    rows.sort_by_key(|(algo, p)| (algo_rank(algo), *p));

    let cell = |algo: &str, p: usize, n: usize| -> String {
        let matching: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.algo == algo && r.p == p && r.n == n)
            .collect();
        if matching.is_empty() {
            return "-".to_string();
        }
        if algo == "sr4" {
            let mean = matching.iter().map(|r| r.wall_seconds).sum::<f64>() / matching.len() as f64;
            format!("{mean:.3}")
        } else {
            let mean = matching.iter().map(|r| r.speedup).sum::<f64>() / matching.len() as f64;
            format!("{mean:.2}")
        }
    };

    let mut grid: Vec<Vec<String>> = Vec::with_capacity(rows.len() + 1);
    let mut header = vec!["algo".to_string(), "p".to_string()];
    header.extend(ns.iter().map(|&n| n_label(n)));
    grid.push(header);
    for (algo, p) in &rows {
        let mut row = vec![algo.to_uppercase(), p.to_string()];
        row.extend(ns.iter().map(|&n| cell(algo, *p, n)));
        grid.push(row);
    }

    let columns = grid[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &grid {
        let mut line = String::new();
        for (c, text) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            if c == 0 {
                line.push_str(&format!("{:<width$}", text, width = widths[c]));
            } else {
                line.push_str(&format!("{:>width$}", text, width = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub const CSV_HEADER: &str =
    "algo,n,p,rep,seed,wall_seconds,speedup,predicted_speedup,verified,max_bucket";

/// One line per record. Floats are written in shortest round-trip form so
/// parsing the CSV back reproduces the records exactly.
pub fn emit_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algo,
            r.n,
            r.p,
            r.rep,
            r.seed,
            r.wall_seconds,
            r.speedup,
            r.predicted_speedup,
            r.verified,
            r.max_bucket
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        Some(other) => return Err(format!("unexpected csv header: {other}")),
        None => return Err("empty csv".to_string()),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(format!(
                "line {}: expected 10 fields, got {}",
                i + 2,
                fields.len()
            ));
        }
        let parse_err =
            |what: &str, e: &dyn std::fmt::Display| format!("line {}: bad {what}: {e}", i + 2);
        records.push(RunRecord {
            algo: fields[0].to_string(),
            n: fields[1].parse().map_err(|e| parse_err("n", &e))?,
            p: fields[2].parse().map_err(|e| parse_err("p", &e))?,
            rep: fields[3].parse().map_err(|e| parse_err("rep", &e))?,
            seed: fields[4].parse().map_err(|e| parse_err("seed", &e))?,
            wall_seconds: fields[5]
                .parse()
                .map_err(|e| parse_err("wall_seconds", &e))?,
            speedup: fields[6].parse().map_err(|e| parse_err("speedup", &e))?,
            predicted_speedup: fields[7]
                .parse()
                .map_err(|e| parse_err("predicted_speedup", &e))?,
            verified: fields[8].parse().map_err(|e| parse_err("verified", &e))?,
            max_bucket: fields[9].parse().map_err(|e| parse_err("max_bucket", &e))?,
        });
    }
    Ok(records)
}
