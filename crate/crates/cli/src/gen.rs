use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use isaclab_core::patterns::{full_sweep_cycle, make_scheme, Pattern, PatternFile, Scheme};

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Staggering scheme: A, B, C, D or E.
    #[arg(long)]
    pub scheme: Scheme,
    #[arg(long = "s-sub")]
    pub s_sub: u32,
    #[arg(long = "s-sym", default_value_t = 1)]
    pub s_sym: u32,
    /// Comb symbols (default: one full staggering cycle).
    #[arg(long)]
    pub m: Option<usize>,
    /// Scheme D slope.
    #[arg(long)]
    pub p: Option<u32>,
    /// Subcarrier count recorded in the file.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Write the expanded irregular form instead (needs --n).
    #[arg(long)]
    pub irregular: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn generate(a: &GenArgs) -> Result<PatternFile> {
    if a.p.is_some() && a.scheme != Scheme::D {
        bail!("--p only applies to Scheme D");
    }
    let m = a.m.unwrap_or_else(|| match a.scheme {
        Scheme::C => full_sweep_cycle(a.s_sub).map_or(a.s_sub as usize, |c| c.len()),
        _ => a.s_sub as usize,
    });
    let comb = make_scheme(a.scheme, a.s_sub, a.s_sym, m, a.p)?;
    let pattern = if a.irregular {
        let Some(n) = a.n else { bail!("--irregular needs --n") };
        Pattern::Irregular(Pattern::Comb(comb).to_irregular(n)?)
    } else {
        Pattern::Comb(comb)
    };
    Ok(PatternFile { pattern, n: a.n })
}

pub fn run(a: &GenArgs) -> Result<i32> {
    let file = generate(a)?;
    crate::emit(&file.to_json()?, a.out.as_ref())?;
    Ok(0)
}
