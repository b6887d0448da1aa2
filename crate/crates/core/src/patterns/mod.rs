//! Reference-signal pattern types, scheme generators and grid realization.
//!
//! Three parameterizations are supported. A [`CombPattern`] places every
//! `S_sub`-th subcarrier on `M` symbols spaced `S_sym` apart, with a per-symbol
//! staggering offset. A [`SynthesizedPattern`] adds a PTRS-like component on
//! top of a comb. An [`IrregularPattern`] lists arbitrary `(symbol, offsets)`
//! rows and is the canonical form every other module consumes.

mod io;
mod scramble;

pub use io::{PatternDoc, PatternFile};
pub use scramble::{zadoff_chu, Scrambling};

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// OFDM numerology: subcarrier count, CP length and subcarrier spacing.
///
/// All durations derive from these three values; the CP-added symbol holds
/// exactly `n + n_cp` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmNumerology {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_cp")]
    pub n_cp: usize,
    pub scs_hz: f64,
}

impl OfdmNumerology {
    pub fn new(n: usize, n_cp: usize, scs_hz: f64) -> Result<Self> {
        let numerology = Self { n, n_cp, scs_hz };
        numerology.check()?;
        Ok(numerology)
    }

    /// 15 kHz spacing with a CP of `n / 16` samples.
    pub fn with_default_cp(n: usize) -> Result<Self> {
        Self::new(n, n / 16, 15e3)
    }

    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("N must be >= 2, got {}", self.n)));
        }
        if self.n_cp >= self.n {
            return Err(Error::InvalidArgument(format!(
                "N_cp ({}) must be smaller than N ({})",
                self.n_cp, self.n
            )));
        }
        if !(self.scs_hz.is_finite() && self.scs_hz > 0.0) {
            return Err(Error::InvalidArgument("subcarrier spacing must be positive".into()));
        }
        Ok(())
    }

    /// Effective symbol duration `T_s = 1 / Δf`.
    pub fn ts(&self) -> f64 {
        1.0 / self.scs_hz
    }

    /// CP duration `T_cp = N_cp T_s / N`.
    pub fn t_cp(&self) -> f64 {
        self.n_cp as f64 * self.ts() / self.n as f64
    }

    /// CP-added symbol duration `T = T_cp + T_s`.
    pub fn t(&self) -> f64 {
        self.samples_per_symbol() as f64 * self.ts() / self.n as f64
    }

    /// `N' = N + N_cp`.
    pub fn samples_per_symbol(&self) -> usize {
        self.n + self.n_cp
    }

    pub fn sample_rate(&self) -> f64 {
        self.n as f64 * self.scs_hz
    }
}

/// Comb pattern with per-symbol staggering offsets `F_0..F_{M-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombPattern {
    pub s_sub: u32,
    pub s_sym: u32,
    pub offsets: Vec<u32>,
}

impl CombPattern {
    pub fn new(s_sub: u32, s_sym: u32, offsets: Vec<u32>) -> Result<Self> {
        let comb = Self { s_sub, s_sym, offsets };
        let violations = comb.violations();
        if violations.is_empty() {
            Ok(comb)
        } else {
            Err(Error::InvalidPattern(violations.join("; ")))
        }
    }

    /// Number of RS symbols `M`.
    pub fn m(&self) -> usize {
        self.offsets.len()
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.s_sub < 2 {
            out.push(format!("comb size S_sub must be >= 2, got {}", self.s_sub));
        }
        if self.s_sym < 1 {
            out.push("symbol spacing S_sym must be >= 1".to_string());
        }
        if self.offsets.is_empty() {
            out.push("empty pattern: M must be >= 1".to_string());
        }
        for (i, &f) in self.offsets.iter().enumerate() {
            if f >= self.s_sub {
                out.push(format!("offset out of range: F_{i} = {f} >= S_sub = {}", self.s_sub));
            }
        }
        out
    }
}

/// A comb combined with a PTRS-like component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SynthesizedPattern {
    pub comb: CombPattern,
    /// Frequency offset of the first PTRS RE (`C_1`).
    pub c1: u32,
    /// Symbol index of the first PTRS symbol (`C_2`).
    pub c2: u32,
    /// PTRS frequency spacing (`S_F`).
    pub s_f: u32,
    /// PTRS symbol spacing (`S_PT`).
    pub s_pt: u32,
    /// PTRS tones per symbol (`U_F`).
    pub u_f: u32,
    /// PTRS symbol count (`U`).
    pub u: u32,
}

impl SynthesizedPattern {
    fn violations(&self) -> Vec<String> {
        let mut out = self.comb.violations();
        if self.u_f < 1 {
            out.push("U_F must be >= 1".to_string());
        }
        if self.u_f >= 2 && self.s_f < 1 {
            out.push("S_F must be >= 1 when U_F >= 2".to_string());
        }
        if self.u >= 2 && self.s_pt < 1 {
            out.push("S_PT must be >= 1 when U >= 2".to_string());
        }
        out
    }

    /// `(symbol, subcarrier)` cells of the PTRS-like component.
    pub fn ptrs_cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.u).flat_map(move |u| {
            let symbol = self.c2 + u * self.s_pt;
            (0..self.u_f).map(move |l| (symbol, self.c1 + l * self.s_f))
        })
    }
}

/// One RS symbol of an irregular pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RsSymbol {
    /// Symbol index `S_g`.
    #[serde(rename = "S")]
    pub index: u32,
    /// Sorted subcarrier offsets `d_{g,1..K_g}`.
    #[serde(rename = "d")]
    pub offsets: Vec<u32>,
}

/// General irregular pattern; symbols sorted by index, offsets strictly
/// increasing within each symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IrregularPattern {
    pub symbols: Vec<RsSymbol>,
}

impl IrregularPattern {
    pub fn new(symbols: Vec<RsSymbol>) -> Result<Self> {
        let irr = Self { symbols };
        let violations = irr.violations();
        if violations.is_empty() {
            Ok(irr)
        } else {
            Err(Error::InvalidPattern(violations.join("; ")))
        }
    }

    /// Builds a pattern from `(symbol, offset)` cells in any order.
    pub fn from_cells(cells: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut rows: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (symbol, offset) in cells {
            let row = rows.entry(symbol).or_default();
            if row.contains(&offset) {
                return Err(Error::Collision { symbol, subcarrier: offset });
            }
            row.push(offset);
        }
        let symbols = rows
            .into_iter()
            .map(|(index, mut offsets)| {
                offsets.sort_unstable();
                RsSymbol { index, offsets }
            })
            .collect();
        Self::new(symbols)
    }

    /// Number of RS symbols `G`.
    pub fn g(&self) -> usize {
        self.symbols.len()
    }

    pub fn re_count(&self) -> usize {
        self.symbols.iter().map(|s| s.offsets.len()).sum()
    }

    /// `S_G - S_1 + 1`.
    pub fn span_symbols(&self) -> u32 {
        match (self.symbols.first(), self.symbols.last()) {
            (Some(first), Some(last)) => last.index - first.index + 1,
            _ => 0,
        }
    }

    pub fn max_offset(&self) -> Option<u32> {
        self.symbols.iter().filter_map(|s| s.offsets.last().copied()).max()
    }

    /// Cells in vectorization order: symbol-major, ascending offsets.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.symbols
            .iter()
            .flat_map(|s| s.offsets.iter().map(move |&d| (s.index, d)))
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.symbols.is_empty() {
            out.push("empty pattern: G must be >= 1".to_string());
        }
        for pair in self.symbols.windows(2) {
            if pair[0].index >= pair[1].index {
                out.push(format!(
                    "symbol indices must be strictly increasing ({} then {})",
                    pair[0].index, pair[1].index
                ));
            }
        }
        for s in &self.symbols {
            if s.offsets.is_empty() {
                out.push(format!("symbol {} has no resource elements", s.index));
            }
            if s.offsets.windows(2).any(|w| w[0] >= w[1]) {
                out.push(format!("offsets of symbol {} must be strictly increasing", s.index));
            }
        }
        out
    }
}

/// Any of the three pattern parameterizations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Comb(CombPattern),
    Synthesized(SynthesizedPattern),
    Irregular(IrregularPattern),
}

impl Pattern {
    pub fn kind(&self) -> &'static str {
        match self {
            Pattern::Comb(_) => "comb",
            Pattern::Synthesized(_) => "synthesized",
            Pattern::Irregular(_) => "irregular",
        }
    }

    /// Canonical irregular form over `n` subcarriers.
    pub fn to_irregular(&self, n: usize) -> Result<IrregularPattern> {
        to_irregular(self, n)
    }

    pub fn validate(&self) -> Vec<String> {
        validate(self)
    }
}

impl From<CombPattern> for Pattern {
    fn from(c: CombPattern) -> Self {
        Pattern::Comb(c)
    }
}

impl From<SynthesizedPattern> for Pattern {
    fn from(s: SynthesizedPattern) -> Self {
        Pattern::Synthesized(s)
    }
}

impl From<IrregularPattern> for Pattern {
    fn from(p: IrregularPattern) -> Self {
        Pattern::Irregular(p)
    }
}

/// Staggering schemes for comb patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Constant offset, no staggering.
    A,
    /// Alternating half-comb staggering (partial PRS).
    B,
    /// Full-sweep PRS staggering.
    C,
    /// Linear slope coprime to the comb size.
    D,
    /// Stored offset tuple that is free of super-resolution aliasing.
    E,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::A => "A",
            Scheme::B => "B",
            Scheme::C => "C",
            Scheme::D => "D",
            Scheme::E => "E",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Scheme::A),
            "B" => Ok(Scheme::B),
            "C" => Ok(Scheme::C),
            "D" => Ok(Scheme::D),
            "E" | "E-EXAMPLE" => Ok(Scheme::E),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Full-sweep staggering cycle used by Scheme C.
///
/// Combs 2, 4, 6 and 12 follow the PRS cycles; comb 8 uses the bit-reversed
/// sweep, which extends the same construction.
pub fn full_sweep_cycle(s_sub: u32) -> Option<&'static [u32]> {
    match s_sub {
        2 => Some(&[0, 1]),
        4 => Some(&[0, 2, 1, 3]),
        6 => Some(&[0, 3, 1, 4, 2, 5]),
        8 => Some(&[0, 4, 2, 6, 1, 5, 3, 7]),
        12 => Some(&[0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11]),
        _ => None,
    }
}

/// Generates a comb pattern for one of the staggering schemes.
///
/// `slope` is the Scheme D slope `p` (default 1); Scheme D offsets are
/// `F_i = (p i + F_0) mod S_sub` with `F_0 = 0`. Scheme E ignores `m` when it
/// is smaller than the stored tuple and otherwise returns the stored tuple.
pub fn make_scheme(
    scheme: Scheme,
    s_sub: u32,
    s_sym: u32,
    m: usize,
    slope: Option<u32>,
) -> Result<CombPattern> {
    if s_sub < 2 {
        return Err(Error::InvalidArgument(format!("S_sub must be >= 2, got {s_sub}")));
    }
    if m == 0 && scheme != Scheme::E {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    let offsets: Vec<u32> = match scheme {
        Scheme::A => vec![0; m],
        Scheme::B => {
            if s_sub % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "Scheme B needs an even comb size, got {s_sub}"
                )));
            }
            (0..m as u32).map(|i| (i % 2) * (s_sub / 2)).collect()
        }
        Scheme::C => {
            let cycle = full_sweep_cycle(s_sub).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "Scheme C is defined for comb sizes 2, 4, 6, 8 and 12, got {s_sub}"
                ))
            })?;
            (0..m).map(|i| cycle[i % cycle.len()]).collect()
        }
        Scheme::D => {
            let p = slope.unwrap_or(1);
            if p.gcd(&s_sub) != 1 {
                return Err(Error::InvalidArgument(format!(
                    "Scheme D slope p = {p} is not coprime to S_sub = {s_sub}"
                )));
            }
            (0..m as u64)
                .map(|i| ((p as u64 * i) % s_sub as u64) as u32)
                .collect()
        }
        Scheme::E => scheme_e_offsets(s_sub, s_sym)?,
    };
    CombPattern::new(s_sub, s_sym, offsets)
}

/// Known-good Scheme E tuples; other comb sizes fall back to the minimal
/// passing tuple found by exhaustive search.
fn scheme_e_offsets(s_sub: u32, s_sym: u32) -> Result<Vec<u32>> {
    if s_sub == 4 {
        return Ok(vec![0, 3, 1]);
    }
    let mut constraints = crate::checker::SearchConstraints::comb(s_sub..=s_sub, s_sym..=s_sym, s_sub as usize);
    constraints.minimal_only = true;
    crate::checker::search_patterns(&constraints)
        .into_iter()
        .find_map(|hit| match hit.pattern {
            Pattern::Comb(c) => Some(c.offsets),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidArgument(format!("no Scheme E tuple exists for S_sub = {s_sub}")))
}

/// Expands a pattern into its irregular form over `n` subcarriers.
///
/// Comb symbol `i` sits at symbol `i S_sym` with offsets `F_i + k S_sub < n`;
/// PTRS symbol `u` sits at `C_2 + u S_PT` with offsets `C_1 + l S_F`.
pub fn to_irregular(pattern: &Pattern, n: usize) -> Result<IrregularPattern> {
    match pattern {
        Pattern::Comb(comb) => IrregularPattern::from_cells(comb_cells(comb, n)?),
        Pattern::Synthesized(synth) => {
            let mut cells = comb_cells(&synth.comb, n)?;
            for (symbol, offset) in synth.ptrs_cells() {
                if offset as usize >= n {
                    return Err(Error::OutOfBand { offset, n });
                }
                cells.push((symbol, offset));
            }
            IrregularPattern::from_cells(cells)
        }
        Pattern::Irregular(irr) => {
            let checked = IrregularPattern::new(irr.symbols.clone())?;
            if let Some(max) = checked.max_offset() {
                if max as usize >= n {
                    return Err(Error::OutOfBand { offset: max, n });
                }
            }
            Ok(checked)
        }
    }
}

fn comb_cells(comb: &CombPattern, n: usize) -> Result<Vec<(u32, u32)>> {
    let violations = comb.violations();
    if !violations.is_empty() {
        return Err(Error::InvalidPattern(violations.join("; ")));
    }
    let mut cells = Vec::new();
    for (i, &f) in comb.offsets.iter().enumerate() {
        if f as usize >= n {
            return Err(Error::OutOfBand { offset: f, n });
        }
        let symbol = i as u32 * comb.s_sym;
        cells.extend((f as usize..n).step_by(comb.s_sub as usize).map(|k| (symbol, k as u32)));
    }
    Ok(cells)
}

/// Concrete resource grid: `span_symbols x N` mask with scrambling values.
///
/// Rows are absolute symbol indices `0..=S_G`.
#[derive(Debug, Clone)]
pub struct PatternGrid {
    pub numerology: OfdmNumerology,
    pub pattern: IrregularPattern,
    pub span_symbols: usize,
    pub mask: Vec<bool>,
    pub values: Vec<Complex64>,
}

impl PatternGrid {
    pub fn is_rs(&self, symbol: usize, subcarrier: usize) -> bool {
        self.mask[symbol * self.numerology.n + subcarrier]
    }

    pub fn value(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.values[symbol * self.numerology.n + subcarrier]
    }

    pub fn row(&self, symbol: usize) -> &[Complex64] {
        let n = self.numerology.n;
        &self.values[symbol * n..(symbol + 1) * n]
    }

    /// Same geometry with every RS value replaced by zero.
    pub fn zeroed(&self) -> Self {
        let mut grid = self.clone();
        grid.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        grid
    }
}

/// Places a pattern on the grid and fills its REs from `scramble`.
pub fn realize_grid(
    pattern: &IrregularPattern,
    numerology: OfdmNumerology,
    scramble: &Scrambling,
) -> Result<PatternGrid> {
    numerology.check()?;
    let pattern = IrregularPattern::new(pattern.symbols.clone())?;
    let n = numerology.n;
    if let Some(max) = pattern.max_offset() {
        if max as usize >= n {
            return Err(Error::OutOfBand { offset: max, n });
        }
    }
    let span_symbols = pattern.symbols.last().map_or(0, |s| s.index as usize + 1);
    let mut mask = vec![false; span_symbols * n];
    let mut values = vec![Complex64::new(0.0, 0.0); span_symbols * n];
    for (row, symbol) in pattern.symbols.iter().enumerate() {
        let seq = scramble.sequence(row, symbol.offsets.len());
        for (&d, x) in symbol.offsets.iter().zip(seq) {
            let idx = symbol.index as usize * n + d as usize;
            mask[idx] = true;
            values[idx] = x;
        }
    }
    Ok(PatternGrid { numerology, pattern, span_symbols, mask, values })
}

/// RS REs divided by `N (S_G - S_1 + 1)`.
pub fn overhead(pattern: &IrregularPattern, n: usize) -> f64 {
    let span = pattern.span_symbols() as f64;
    if span == 0.0 || n == 0 {
        return 0.0;
    }
    pattern.re_count() as f64 / (n as f64 * span)
}

/// Dedicated sensing overhead.
///
/// Comb components are counted at their nominal density `N / S_sub` per
/// symbol and PTRS-like components are treated as reused communication RS,
/// so they contribute to the time span but not to the RE count. Irregular
/// patterns fall back to [`overhead`].
pub fn sensing_overhead(pattern: &Pattern, n: usize) -> Result<f64> {
    let irr = to_irregular(pattern, n)?;
    let span = irr.span_symbols() as f64;
    let res = match pattern {
        Pattern::Comb(c) => c.m() as f64 * n as f64 / c.s_sub as f64,
        Pattern::Synthesized(s) => s.comb.m() as f64 * n as f64 / s.comb.s_sub as f64,
        Pattern::Irregular(_) => irr.re_count() as f64,
    };
    Ok(res / (n as f64 * span))
}

/// Lists every invariant the pattern violates; empty when valid.
pub fn validate(pattern: &Pattern) -> Vec<String> {
    match pattern {
        Pattern::Comb(c) => c.violations(),
        Pattern::Synthesized(s) => {
            let mut out = s.violations();
            if out.is_empty() {
                // A PTRS cell that lands on a comb cell is a collision for any N
                // large enough to hold both.
                let n = s.comb.s_sub as usize * 2
                    + s.ptrs_cells().map(|(_, d)| d as usize + 1).max().unwrap_or(0);
                if let Err(e) = to_irregular(pattern, n) {
                    out.push(e.to_string());
                }
            }
            out
        }
        Pattern::Irregular(irr) => irr.violations(),
    }
}
