use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use isaclab_core::patterns::{sensing_overhead, Pattern, PatternFile};
use serde::Serialize;

const BUNDLED: &[(&str, &str)] = &[
    ("full", include_str!("../patterns/full.json")),
    ("fig13", include_str!("../patterns/fig13.json")),
    ("fig16a", include_str!("../patterns/fig16a.json")),
    ("fig17", include_str!("../patterns/fig17.json")),
    ("fig18", include_str!("../patterns/fig18.json")),
    ("fig21a", include_str!("../patterns/fig21a.json")),
    ("fig22", include_str!("../patterns/fig22.json")),
];

/// Extra rows for patterns whose subcarrier count is read two ways: the
/// figure's grid of 13 subcarriers and the 14 needed to hold offset 13.
const ALT_N: &[(&str, usize)] = &[("fig22", 13)];

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Pattern files; each needs "N" unless --n is given.
    pub patterns: Vec<PathBuf>,
    /// Use the bundled example patterns.
    #[arg(long)]
    pub bundled: bool,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverheadRow {
    pub pattern: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// Dedicated sensing REs; combs count `N / S_sub` per symbol.
    pub res: f64,
    pub span: u32,
    pub overhead_pct: f64,
}

/// One row; `n` may be smaller than the pattern needs, in which case the RE
/// count and span come from the smallest valid realization.
pub fn row(label: &str, pattern: &Pattern, n: usize) -> Result<OverheadRow> {
    let valid_n = match pattern {
        Pattern::Irregular(p) => n.max(p.max_offset().map_or(1, |d| d as usize + 1)),
        _ => n,
    };
    let irr = pattern.to_irregular(valid_n)?;
    let span = irr.span_symbols();
    let res = match pattern {
        Pattern::Irregular(p) => p.re_count() as f64,
        _ => sensing_overhead(pattern, n)? * (n as f64 * span as f64),
    };
    Ok(OverheadRow { pattern: label.to_string(), n, res, span, overhead_pct: 100.0 * res / (n as f64 * span as f64) })
}

pub fn bundled_rows() -> Result<Vec<OverheadRow>> {
    let mut rows = Vec::new();
    for (label, text) in BUNDLED {
        let file = PatternFile::from_json(text)?;
        let n = file.n.expect("bundled patterns carry N");
        for (alt_label, alt_n) in ALT_N.iter().filter(|(l, _)| l == label) {
            rows.push(row(&format!("{alt_label} (N={alt_n})"), &file.pattern, *alt_n)?);
        }
        let name = if ALT_N.iter().any(|(l, _)| l == label) { format!("{label} (N={n})") } else { label.to_string() };
        rows.push(row(&name, &file.pattern, n)?);
    }
    Ok(rows)
}

pub fn table(rows: &[OverheadRow]) -> String {
    let mut out = format!("{:<16} {:>5} {:>8} {:>5} {:>10}\n", "pattern", "N", "REs", "span", "overhead");
    for r in rows {
        out.push_str(&format!("{:<16} {:>5} {:>8.2} {:>5} {:>9.2}%\n", r.pattern, r.n, r.res, r.span, r.overhead_pct));
    }
    out.pop();
    out
}

pub fn run(a: &BenchArgs) -> Result<i32> {
    let mut rows = if a.bundled || a.patterns.is_empty() { bundled_rows()? } else { Vec::new() };
    for path in &a.patterns {
        let file = crate::read_pattern(path)?;
        let Some(n) = a.n.or(file.n) else { bail!("{} has no N; pass --n", path.display()) };
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        rows.push(row(&label, &file.pattern, n)?);
    }
    let text = if a.json { serde_json::to_string_pretty(&rows)? } else { table(&rows) };
    crate::emit(&text, a.out.as_ref())?;
    Ok(0)
}
