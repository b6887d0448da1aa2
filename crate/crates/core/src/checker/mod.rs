//! Exact anti-condition checks for super-resolution sensing.
//!
//! Every check reduces aliasing of two delay-Doppler hypotheses to a finite
//! integer search over `(κ_a, κ_b)`. A witness maps back to the implied
//! collision `x = (τ' - τ) / T_s`, `y = (f' - f) T`. The brute-force
//! [`collision_oracle`] enumerates the same collisions without any of the
//! reductions and is used to cross-check every rule.

mod oracle;
mod search;

pub use oracle::{
    collision_oracle, collision_oracle_window, cross_validate, oracle_pattern, oracle_window, Collision,
    CollisionSet, CrossCheck,
};
pub use search::{search_patterns, Family, SearchConstraints, SearchHit};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::patterns::{CombPattern, IrregularPattern, Pattern, SynthesizedPattern};
use crate::{Error, Result};

pub type Rational = Ratio<i64>;

/// Serializes exact rationals as `{"num": .., "den": ..}`.
pub mod rational_serde {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Repr { num: *r.numer(), den: *r.denom() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = Repr::deserialize(d)?;
        if repr.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(repr.num, repr.den))
    }
}

/// Anti-condition rule that produced a [`CheckResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    CombSuper,
    SynthMultiComb,
    SynthOneCombMultiPtrs,
    SynthOneCombOnePtrs,
    IrregularMultiTone,
    IrregularHopping,
    InsufficientStructure,
}

impl Rule {
    /// Names of the two witness indices.
    pub fn kappa_names(&self) -> [&'static str; 2] {
        match self {
            Rule::SynthOneCombMultiPtrs => ["kappa_1", "kappa_3"],
            Rule::SynthOneCombOnePtrs => ["kappa_1", "kappa_4"],
            Rule::InsufficientStructure => ["a", "b"],
            _ => ["kappa_1", "kappa_2"],
        }
    }
}

/// Outcome of an anti-condition check; `pass` iff `witness` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implied_collision: Option<Collision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CheckResult {
    fn passed(rule: Rule) -> Self {
        Self { pass: true, rule, witness: None, implied_collision: None, reason: None }
    }

    fn failed(rule: Rule, kappa: [i64; 2], x: Rational, y: Rational) -> Self {
        let reason = match kappa {
            [0, _] => "pure Doppler alias (first index is zero)",
            [_, 0] => "pure delay alias (second index is zero)",
            _ => "joint delay-Doppler alias",
        };
        Self {
            pass: false,
            rule,
            witness: Some(kappa),
            implied_collision: Some(Collision { x, y }),
            reason: Some(reason.to_string()),
        }
    }
}

/// Quantities derived from an irregular pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularDerived {
    /// Minimum in-symbol offset difference over symbols with `K_g >= 2`.
    pub d_star: Option<i64>,
    /// `gcd(S_2 - S_1, .., S_G - S_1)`.
    pub s_star: Option<i64>,
    /// Smallest cross-determinant over distinct-slope pairs of single-RE symbols.
    pub s_star_mn: Option<i64>,
    /// 1-based symbol indices `(m*, n*)` of the chosen pair.
    pub pair: Option<(usize, usize)>,
}

/// First nonzero `(k1, k2)` in `[0, n1) x [0, n2)` (k1 outer) with `pred`.
fn first_solution(n1: i64, n2: i64, mut pred: impl FnMut(i64, i64) -> bool) -> Option<(i64, i64)> {
    (0..n1)
        .flat_map(|k1| (0..n2).map(move |k2| (k1, k2)))
        .filter(|&(k1, k2)| k1 != 0 || k2 != 0)
        .find(|&(k1, k2)| pred(k1, k2))
}

fn rel_offsets(comb: &CombPattern) -> Vec<i64> {
    let f0 = comb.offsets[0] as i64;
    comb.offsets.iter().map(|&f| f as i64 - f0).collect()
}

fn comb_condition(rel: &[i64], s_sub: i64, k1: i64, k2: i64) -> bool {
    rel.iter()
        .enumerate()
        .all(|(i, &df)| (i as i64 * k2 - df * k1).rem_euclid(s_sub) == 0)
}

/// Comb-only check over one Doppler period `[0, 1 / (S_sym T))`.
///
/// The condition depends on `κ_2` only modulo `S_sub`, so `κ_2` ranges over
/// `[0, S_sub)` and maps to `y = κ_2 / (S_sym S_sub)`.
pub fn check_comb_super(comb: &CombPattern) -> CheckResult {
    let s_sub = comb.s_sub as i64;
    let s_sym = comb.s_sym as i64;
    let rel = rel_offsets(comb);
    match first_solution(s_sub, s_sub, |k1, k2| comb_condition(&rel, s_sub, k1, k2)) {
        None => CheckResult::passed(Rule::CombSuper),
        Some((k1, k2)) => CheckResult::failed(
            Rule::CombSuper,
            [k1, k2],
            Rational::new(k1, s_sub),
            Rational::new(k2, s_sym * s_sub),
        ),
    }
}

/// PTRS anti-condition for every `(u, l)` of the synthesized component.
fn ptrs_condition(s: &SynthesizedPattern, k1: i64, k2: i64) -> bool {
    let f0 = s.comb.offsets[0] as i64;
    let s_sym = s.comb.s_sym as i64;
    let modulus = s_sym * s.comb.s_sub as i64;
    (0..s.u as i64).all(|u| {
        let sym = s.c2 as i64 + u * s.s_pt as i64;
        (0..s.u_f as i64).all(|l| {
            let d = s.c1 as i64 + l * s.s_f as i64 - f0;
            (sym * k2 - d * s_sym * k1).rem_euclid(modulus) == 0
        })
    })
}

/// Reduced form of the PTRS anti-condition, valid for `U >= 1`.
fn ptrs_condition_fast(s: &SynthesizedPattern, k1: i64, k2: i64) -> bool {
    let f0 = s.comb.offsets[0] as i64;
    let s_sub = s.comb.s_sub as i64;
    let s_sym = s.comb.s_sym as i64;
    let modulus = s_sym * s_sub;
    let base = (s.c2 as i64 * k2 - (s.c1 as i64 - f0) * s_sym * k1).rem_euclid(modulus) == 0;
    let time = s.u < 2 || (s.s_pt as i64 * k2).rem_euclid(modulus) == 0;
    let freq = s.u_f < 2 || (s.s_f as i64 * k1).rem_euclid(s_sub) == 0;
    base && time && freq
}

fn synth_multi_comb(s: &SynthesizedPattern, fast: bool) -> CheckResult {
    let s_sub = s.comb.s_sub as i64;
    let s_sym = s.comb.s_sym as i64;
    let rel = rel_offsets(&s.comb);
    let hit = first_solution(s_sub, s_sym * s_sub, |k1, k2| {
        comb_condition(&rel, s_sub, k1, k2)
            && (s.u == 0
                || if fast { ptrs_condition_fast(s, k1, k2) } else { ptrs_condition(s, k1, k2) })
    });
    match hit {
        None => CheckResult::passed(Rule::SynthMultiComb),
        Some((k1, k2)) => CheckResult::failed(
            Rule::SynthMultiComb,
            [k1, k2],
            Rational::new(k1, s_sub),
            Rational::new(k2, s_sym * s_sub),
        ),
    }
}

/// At least two comb symbols plus a PTRS-like component (`U = 0` allowed).
pub fn check_synth_multi_comb(s: &SynthesizedPattern) -> CheckResult {
    synth_multi_comb(s, true)
}

/// Same as [`check_synth_multi_comb`] without the case reductions.
pub fn check_synth_multi_comb_direct(s: &SynthesizedPattern) -> CheckResult {
    synth_multi_comb(s, false)
}

/// One comb symbol with at least two PTRS symbols.
pub fn check_synth_one_comb_multi_ptrs(s: &SynthesizedPattern) -> CheckResult {
    let s_sub = s.comb.s_sub as i64;
    let s_pt = s.s_pt.max(1) as i64;
    let c1 = s.c1 as i64 - s.comb.offsets[0] as i64;
    let c2 = s.c2 as i64;
    let hit = first_solution(s_sub, s_pt, |k1, k3| {
        let t = Rational::new(c2 * k3, s_pt) - Rational::new(c1 * k1, s_sub);
        t.is_integer() && (s.u_f < 2 || Rational::new(s.s_f as i64 * k1, s_sub).is_integer())
    });
    match hit {
        None => CheckResult::passed(Rule::SynthOneCombMultiPtrs),
        Some((k1, k3)) => CheckResult::failed(
            Rule::SynthOneCombMultiPtrs,
            [k1, k3],
            Rational::new(k1, s_sub),
            Rational::new(k3, s_pt),
        ),
    }
}

fn one_comb_one_ptrs(s: &SynthesizedPattern) -> CheckResult {
    let s_sub = s.comb.s_sub as i64;
    let c1 = s.c1 as i64 - s.comb.offsets[0] as i64;
    let c2 = s.c2 as i64;
    let freq_ok = |k1: i64| s.u_f < 2 || (s.s_f as i64 * k1).rem_euclid(s_sub) == 0;
    if c2 == 0 {
        // PTRS shares the comb symbol: nothing constrains Doppler.
        let mut r = CheckResult::failed(Rule::SynthOneCombOnePtrs, [0, 1], Rational::from_integer(0), Rational::new(1, s_sub));
        r.reason = Some("PTRS symbol coincides with the comb symbol; Doppler is unconstrained".into());
        return r;
    }
    let hit = first_solution(s_sub, c2 * s_sub, |k1, k4| freq_ok(k1) && (k4 - c1 * k1).rem_euclid(s_sub) == 0);
    match hit {
        None => CheckResult::passed(Rule::SynthOneCombOnePtrs),
        Some((k1, k4)) => CheckResult::failed(
            Rule::SynthOneCombOnePtrs,
            [k1, k4],
            Rational::new(k1, s_sub),
            Rational::new(k4, c2 * s_sub),
        ),
    }
}

/// One comb symbol with one multi-tone PTRS symbol. Needs `U_F >= 2`.
pub fn check_synth_one_comb_one_ptrs(s: &SynthesizedPattern) -> Result<CheckResult> {
    if s.u_f < 2 {
        return Err(Error::StructurallyAmbiguous(format!(
            "one comb symbol with one PTRS symbol needs U_F >= 2, got {}",
            s.u_f
        )));
    }
    Ok(one_comb_one_ptrs(s))
}

/// Relative cells `(Δd, ΔS)` from the first RE of the first symbol.
pub(crate) fn relative_cells(irr: &IrregularPattern) -> Vec<(i64, i64)> {
    let mut cells = irr.cells();
    let Some((s1, d11)) = cells.next() else { return Vec::new() };
    std::iter::once((s1, d11))
        .chain(cells)
        .map(|(s, d)| (d as i64 - d11 as i64, s as i64 - s1 as i64))
        .collect()
}

/// Computes `d*`, `S*` and the hopping pair of an irregular pattern.
pub fn irregular_derived(irr: &IrregularPattern) -> IrregularDerived {
    let d_star = irr
        .symbols
        .iter()
        .filter(|s| s.offsets.len() >= 2)
        .flat_map(|s| s.offsets.windows(2).map(|w| (w[1] - w[0]) as i64))
        .min();
    let s1 = irr.symbols.first().map_or(0, |s| s.index as i64);
    let s_star = irr
        .symbols
        .iter()
        .skip(1)
        .map(|s| s.index as i64 - s1)
        .fold(None, |acc: Option<i64>, v| Some(acc.map_or(v, |a| a.gcd(&v))));
    let mut best: Option<(i64, (usize, usize))> = None;
    if irr.symbols.iter().all(|s| s.offsets.len() == 1) && irr.g() >= 3 {
        let d1 = irr.symbols[0].offsets[0] as i64;
        let v: Vec<(i64, i64)> = irr
            .symbols
            .iter()
            .map(|s| (s.offsets[0] as i64 - d1, s.index as i64 - s1))
            .collect();
        for m in 1..v.len() {
            for n in m + 1..v.len() {
                let det = (v[m].0 * v[n].1 - v[m].1 * v[n].0).abs();
                if det > 0 && best.is_none_or(|(b, _)| det < b) {
                    best = Some((det, (m + 1, n + 1)));
                }
            }
        }
    }
    IrregularDerived { d_star, s_star, s_star_mn: best.map(|b| b.0), pair: best.map(|b| b.1) }
}

fn insufficient(irr: &IrregularPattern, reason: &str) -> CheckResult {
    let set = collision_oracle(irr, false);
    let (p, _) = set.lattice_bounds;
    let c = set.collisions.first().copied().unwrap_or(Collision {
        x: Rational::from_integer(0),
        y: Rational::new(1, 2),
    });
    let kappa = [(c.x * p).to_integer(), (c.y * p).to_integer()];
    CheckResult {
        pass: false,
        rule: Rule::InsufficientStructure,
        witness: Some(kappa),
        implied_collision: Some(c),
        reason: Some(reason.to_string()),
    }
}

/// General irregular pattern check.
///
/// With some multi-RE symbol the search runs over `[0, d*) x [0, S* d*)`;
/// with single-RE symbols only it runs over `[0, S*_mn)^2` for the
/// distinct-slope pair with the smallest cross-determinant.
pub fn check_irregular(irr: &IrregularPattern) -> CheckResult {
    let derived = irregular_derived(irr);
    let rel = relative_cells(irr);
    let multi_tone = irr.symbols.iter().any(|s| s.offsets.len() >= 2);
    if multi_tone {
        let (Some(d_star), Some(s_star)) = (derived.d_star, derived.s_star) else {
            return insufficient(irr, "insufficient structure: a multi-tone pattern needs G >= 2");
        };
        let modulus = s_star * d_star;
        let hit = first_solution(d_star, modulus, |k1, k2| {
            rel.iter().all(|&(dd, ds)| (ds * k2 - dd * s_star * k1).rem_euclid(modulus) == 0)
        });
        return match hit {
            None => CheckResult::passed(Rule::IrregularMultiTone),
            Some((k1, k2)) => CheckResult::failed(
                Rule::IrregularMultiTone,
                [k1, k2],
                Rational::new(k1, d_star),
                Rational::new(k2, modulus),
            ),
        };
    }
    if irr.g() < 3 {
        return insufficient(irr, "insufficient structure: single-RE symbols need G >= 3");
    }
    let Some(det) = derived.s_star_mn else {
        return insufficient(irr, "collinear hopping: all offsets lie on one slope");
    };
    let hit = first_solution(det, det, |k1, k2| {
        rel.iter().all(|&(dd, ds)| (ds * k2 - dd * k1).rem_euclid(det) == 0)
    });
    match hit {
        None => CheckResult::passed(Rule::IrregularHopping),
        Some((k1, k2)) => {
            CheckResult::failed(Rule::IrregularHopping, [k1, k2], Rational::new(k1, det), Rational::new(k2, det))
        }
    }
}

/// Dispatches to the checker matching the pattern's structure.
pub fn check(pattern: &Pattern) -> Result<CheckResult> {
    let violations = pattern.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidPattern(violations.join("; ")));
    }
    Ok(match pattern {
        Pattern::Comb(c) => check_comb_super(c),
        Pattern::Synthesized(s) => {
            if s.comb.m() >= 2 {
                check_synth_multi_comb(s)
            } else if s.u >= 2 {
                check_synth_one_comb_multi_ptrs(s)
            } else if s.u == 1 {
                one_comb_one_ptrs(s)
            } else {
                check_comb_super(&s.comb)
            }
        }
        Pattern::Irregular(irr) => check_irregular(irr),
    })
}
