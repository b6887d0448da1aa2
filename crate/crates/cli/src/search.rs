use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use isaclab_core::checker::{search_patterns, SearchConstraints};
use isaclab_core::patterns::PatternDoc;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Comb,
    Synthesized,
    Irregular,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "comb")]
    pub family: FamilyArg,
    #[arg(long = "s-sub", default_value_t = 4)]
    pub s_sub: u32,
    #[arg(long = "s-sym", default_value_t = 1)]
    pub s_sym: u32,
    /// Largest number of comb symbols.
    #[arg(long = "max-m", default_value_t = 4)]
    pub max_m: usize,
    /// PTRS symbols and tones for the synthesized family.
    #[arg(long, default_value_t = 1)]
    pub u: u32,
    #[arg(long = "u-f", default_value_t = 2)]
    pub u_f: u32,
    /// Grid bounds for the irregular family.
    #[arg(long = "max-symbols", default_value_t = 4)]
    pub max_symbols: u32,
    #[arg(long = "max-offset", default_value_t = 4)]
    pub max_offset: u32,
    #[arg(long = "max-res", default_value_t = 4)]
    pub max_res: usize,
    /// Report every level instead of stopping at the smallest RE count.
    #[arg(long)]
    pub all: bool,
    /// Keep at most this many results.
    #[arg(long, default_value_t = 50)]
    pub limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Ranked {
    rank: usize,
    res: usize,
    span: u32,
    pattern: PatternDoc,
}

pub fn constraints(a: &SearchArgs) -> SearchConstraints {
    let mut c = match a.family {
        FamilyArg::Comb => SearchConstraints::comb(a.s_sub..=a.s_sub, a.s_sym..=a.s_sym, a.max_m),
        FamilyArg::Synthesized => SearchConstraints::synthesized(a.s_sub..=a.s_sub, 1..=a.max_m, a.u..=a.u, a.u_f..=a.u_f),
        FamilyArg::Irregular => SearchConstraints::irregular(a.max_symbols, a.max_offset, a.max_res),
    };
    c.minimal_only = !a.all;
    c
}

/// Infeasible constraints print an empty list and still exit 0.
pub fn run(a: &SearchArgs) -> Result<i32> {
    let hits = search_patterns(&constraints(a));
    let ranked: Vec<Ranked> = hits
        .into_iter()
        .take(a.limit)
        .enumerate()
        .map(|(i, h)| Ranked { rank: i + 1, res: h.res, span: h.span, pattern: PatternDoc::from_pattern(&h.pattern, None) })
        .collect();
    crate::emit(&serde_json::to_string_pretty(&ranked)?, a.out.as_ref())?;
    Ok(0)
}
