//! Exhaustive search for minimal passing patterns.

use std::ops::RangeInclusive;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check;
use crate::patterns::{CombPattern, IrregularPattern, Pattern, SynthesizedPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Comb,
    Synthesized,
    Irregular,
}

/// Enumeration bounds. All patterns are canonical: `F_0 = 0` for combs and
/// minimum symbol and offset zero for irregular patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConstraints {
    pub family: Family,
    pub s_sub: RangeInclusive<u32>,
    pub s_sym: RangeInclusive<u32>,
    /// Comb symbols `M`.
    pub m: RangeInclusive<usize>,
    /// PTRS symbols `U` and tones `U_F`.
    pub u: RangeInclusive<u32>,
    pub u_f: RangeInclusive<u32>,
    /// Symbol indices stay below this bound.
    pub max_symbols: u32,
    /// Offsets stay at or below this bound (PTRS and irregular cells).
    pub max_offset: u32,
    /// Irregular patterns hold at most this many REs.
    pub max_res: usize,
    /// Subcarrier count used to count REs.
    pub n: usize,
    /// Stop after the first RE count that yields a hit.
    pub minimal_only: bool,
}

impl SearchConstraints {
    pub fn comb(s_sub: RangeInclusive<u32>, s_sym: RangeInclusive<u32>, max_m: usize) -> Self {
        let n = s_sub.clone().fold(1usize, |acc, s| acc.lcm(&(s as usize))) * 2;
        Self {
            family: Family::Comb,
            s_sub,
            s_sym,
            m: 1..=max_m,
            u: 0..=0,
            u_f: 1..=1,
            max_symbols: 16,
            max_offset: 15,
            max_res: 0,
            n,
            minimal_only: false,
        }
    }

    pub fn synthesized(s_sub: RangeInclusive<u32>, m: RangeInclusive<usize>, u: RangeInclusive<u32>, u_f: RangeInclusive<u32>) -> Self {
        let base = Self::comb(s_sub, 1..=1, 1);
        Self { family: Family::Synthesized, m, u, u_f, max_symbols: 6, max_offset: 5, n: base.n.max(6), ..base }
    }

    pub fn irregular(max_symbols: u32, max_offset: u32, max_res: usize) -> Self {
        Self {
            family: Family::Irregular,
            max_symbols,
            max_offset,
            max_res,
            n: max_offset as usize + 1,
            ..Self::comb(2..=2, 1..=1, 1)
        }
    }
}

/// A passing pattern with its RE count over `n` subcarriers and its span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub pattern: Pattern,
    pub res: usize,
    pub span: u32,
}

/// Enumerates the constrained family and keeps passing patterns sorted by
/// RE count, then span, then enumeration order.
pub fn search_patterns(c: &SearchConstraints) -> Vec<SearchHit> {
    let levels: Vec<Vec<Pattern>> = match c.family {
        Family::Comb => c
            .m
            .clone()
            .map(|m| comb_level(c, m).into_iter().map(Pattern::Comb).collect())
            .collect(),
        Family::Synthesized => vec![synth_candidates(c)],
        Family::Irregular => (2..=c.max_res).map(|size| irregular_level(c, size)).collect(),
    };
    let mut hits: Vec<(usize, SearchHit)> = Vec::new();
    let mut order = 0usize;
    for level in levels {
        let base = order;
        order += level.len();
        let found: Vec<(usize, SearchHit)> = level
            .into_par_iter()
            .enumerate()
            .filter_map(|(i, pattern)| {
                let irr = pattern.to_irregular(c.n).ok()?;
                let result = check(&pattern).ok()?;
                result.pass.then(|| (base + i, SearchHit { res: irr.re_count(), span: irr.span_symbols(), pattern }))
            })
            .collect();
        let done = c.minimal_only && !found.is_empty();
        hits.extend(found);
        if done {
            break;
        }
    }
    hits.sort_by_key(|(order, h)| (h.res, h.span, *order));
    if c.minimal_only {
        if let Some(min) = hits.first().map(|(_, h)| h.res) {
            hits.retain(|(_, h)| h.res == min);
        }
    }
    hits.into_iter().map(|(_, h)| h).collect()
}

fn offset_tuples(s_sub: u32, m: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32]];
    for _ in 1..m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..s_sub).map(move |f| {
                    let mut t = t.clone();
                    t.push(f);
                    t
                })
            })
            .collect();
    }
    out
}

fn comb_level(c: &SearchConstraints, m: usize) -> Vec<CombPattern> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    for s_sub in c.s_sub.clone() {
        for s_sym in c.s_sym.clone() {
            out.extend(offset_tuples(s_sub, m).into_iter().map(|offsets| CombPattern { s_sub, s_sym, offsets }));
        }
    }
    out
}

fn synth_candidates(c: &SearchConstraints) -> Vec<Pattern> {
    let mut out = Vec::new();
    for m in c.m.clone().filter(|&m| m >= 1) {
        for comb in comb_level(c, m) {
            if (m as u32 - 1) * comb.s_sym >= c.max_symbols {
                continue;
            }
            for u in c.u.clone() {
                for u_f in c.u_f.clone().filter(|&v| v >= 1) {
                    let s_pts: Vec<u32> = if u >= 2 { (1..c.max_symbols).collect() } else { vec![1] };
                    let s_fs: Vec<u32> = if u_f >= 2 { (1..=c.max_offset).collect() } else { vec![1] };
                    let (c1s, c2s) = if u == 0 { (0..=0, 0..=0) } else { (0..=c.max_offset, 0..=c.max_symbols - 1) };
                    for s_pt in &s_pts {
                        for s_f in &s_fs {
                            for c2 in c2s.clone() {
                                if u >= 1 && c2 + (u - 1) * s_pt >= c.max_symbols {
                                    continue;
                                }
                                for c1 in c1s.clone() {
                                    if c1 + (u_f - 1) * s_f > c.max_offset {
                                        continue;
                                    }
                                    out.push(Pattern::Synthesized(SynthesizedPattern {
                                        comb: comb.clone(),
                                        c1,
                                        c2,
                                        s_f: *s_f,
                                        s_pt: *s_pt,
                                        u_f,
                                        u,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Canonical irregular patterns with exactly `size` REs.
fn irregular_level(c: &SearchConstraints, size: usize) -> Vec<Pattern> {
    let cells: Vec<(u32, u32)> = (0..c.max_symbols)
        .flat_map(|s| (0..=c.max_offset).map(move |d| (s, d)))
        .collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(size);
    fn rec(cells: &[(u32, u32)], start: usize, size: usize, chosen: &mut Vec<(u32, u32)>, out: &mut Vec<Pattern>) {
        if chosen.len() == size {
            let min_s = chosen.iter().map(|c| c.0).min();
            let min_d = chosen.iter().map(|c| c.1).min();
            if min_s == Some(0) && min_d == Some(0) {
                if let Ok(p) = IrregularPattern::from_cells(chosen.iter().copied()) {
                    out.push(Pattern::Irregular(p));
                }
            }
            return;
        }
        for i in start..cells.len() {
            if cells.len() - i < size - chosen.len() {
                break;
            }
            chosen.push(cells[i]);
            rec(cells, i + 1, size, chosen, out);
            chosen.pop();
        }
    }
    rec(&cells, 0, size, &mut chosen, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_minimum_is_three_symbols() {
        let hits = search_patterns(&SearchConstraints::comb(4..=4, 1..=1, 4));
        assert!(!hits.is_empty());
        let first_m = match &hits[0].pattern {
            Pattern::Comb(c) => c.m(),
            _ => unreachable!(),
        };
        assert_eq!(first_m, 3);
        assert!(hits.iter().any(|h| matches!(&h.pattern, Pattern::Comb(c) if c.offsets == vec![0, 3, 1])));
        assert!(search_patterns(&SearchConstraints::comb(2..=6, 1..=2, 2)).is_empty());
    }

    #[test]
    fn synth_search_finds_single_tone_ptrs_layout() {
        let c = SearchConstraints::synthesized(2..=2, 1..=1, 1..=3, 1..=1);
        let hits = search_patterns(&c);
        let fig17 = SynthesizedPattern {
            comb: CombPattern { s_sub: 2, s_sym: 1, offsets: vec![0] },
            c1: 1,
            c2: 1,
            s_f: 1,
            s_pt: 1,
            u_f: 1,
            u: 3,
        };
        assert!(hits.iter().any(|h| h.pattern == Pattern::Synthesized(fig17.clone())));
    }

    #[test]
    fn irregular_minimum_has_three_res() {
        let mut c = SearchConstraints::irregular(3, 3, 4);
        c.minimal_only = true;
        let hits = search_patterns(&c);
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|h| h.res == 3));
    }

    #[test]
    fn search_is_deterministic() {
        let c = SearchConstraints::comb(3..=5, 1..=2, 3);
        assert_eq!(search_patterns(&c), search_patterns(&c));
    }
}
