//! Brute-force steering-collision oracle.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check, rational_serde, relative_cells, CheckResult, Rational};
use crate::patterns::{IrregularPattern, Pattern};
use crate::Result;

/// An aliasing offset `x = (τ' - τ) / T_s`, `y = (f' - f) T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Collision {
    #[serde(with = "rational_serde")]
    pub x: Rational,
    #[serde(with = "rational_serde")]
    pub y: Rational,
}

/// Sorted, deduplicated collisions and the lattice denominators used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionSet {
    pub collisions: Vec<Collision>,
    pub lattice_bounds: (i64, i64),
}

impl CollisionSet {
    pub fn is_empty(&self) -> bool {
        self.collisions.is_empty()
    }

    pub fn contains(&self, x: Rational, y: Rational) -> bool {
        self.collisions.binary_search(&Collision { x, y }).is_ok()
    }
}

/// Collisions in `x ∈ [0, 1)`, `y ∈ [0, 1)` minus the origin.
pub fn collision_oracle(irr: &IrregularPattern, include_boundary: bool) -> CollisionSet {
    collision_oracle_window(irr, Rational::from_integer(1), include_boundary)
}

/// Collisions in `x ∈ [0, 1)`, `y ∈ [0, y_max)` minus the origin; with
/// `include_boundary` both upper ends are closed.
///
/// Every cell `(S_g, d_gk)` must satisfy `ΔS y - Δd x ∈ ℤ`. When the
/// relative cells span the plane, any pair with nonzero cross-determinant
/// `D` confines collisions to `(1/D) ℤ²`, so the grid with the smallest such
/// `D` is complete. Otherwise the collisions form lines and a grid fine
/// enough to hit them inside the window is used.
pub fn collision_oracle_window(irr: &IrregularPattern, y_max: Rational, include_boundary: bool) -> CollisionSet {
    let rel = relative_cells(irr);
    let p = lattice_denominator(&rel, y_max);
    let (ym_num, ym_den) = (*y_max.numer() as i128, *y_max.denom() as i128);
    let pi = p as i128;
    let a_max = if include_boundary { p } else { p - 1 };
    let in_y = |b: i64| {
        // b / p < y_max  <=>  b * den < p * num
        let (l, r) = (b as i128 * ym_den, pi * ym_num);
        if include_boundary { l <= r } else { l < r }
    };
    let mut b_max = 0i64;
    while in_y(b_max + 1) {
        b_max += 1;
    }
    let mut collisions: Vec<Collision> = (0..=a_max)
        .into_par_iter()
        .flat_map_iter(|a| {
            let rel = &rel;
            (0..=b_max).filter_map(move |b| {
                if a == 0 && b == 0 {
                    return None;
                }
                let hit = rel
                    .iter()
                    .all(|&(dd, ds)| (ds as i128 * b as i128 - dd as i128 * a as i128).rem_euclid(pi) == 0);
                hit.then(|| Collision { x: Rational::new(a, p), y: Rational::new(b, p) })
            })
        })
        .collect();
    collisions.sort_unstable();
    collisions.dedup();
    CollisionSet { collisions, lattice_bounds: (p, p) }
}

fn lattice_denominator(rel: &[(i64, i64)], y_max: Rational) -> i64 {
    let mut best: Option<i64> = None;
    for (i, u) in rel.iter().enumerate() {
        for v in &rel[i + 1..] {
            let det = (u.0 * v.1 - u.1 * v.0).abs();
            if det > 0 && best.is_none_or(|b| det < b) {
                best = Some(det);
            }
        }
    }
    if let Some(det) = best {
        return det;
    }
    // rank <= 1: all cells lie on multiples of one primitive direction
    let r = (*y_max.denom() + *y_max.numer() - 1) / *y_max.numer();
    let Some(&first) = rel.iter().find(|v| **v != (0, 0)) else {
        return 2 * r.max(1);
    };
    let g0 = first.0.gcd(&first.1);
    let (a0, b0) = (first.0 / g0, first.1 / g0);
    let g = rel
        .iter()
        .map(|v| if a0 != 0 { v.0 / a0 } else { v.1 / b0 })
        .fold(0i64, |acc, c| acc.gcd(&c))
        .max(1);
    2 * r.max(1) * g * a0.abs().max(1) * b0.abs().max(1)
}

/// Doppler window the oracle uses for a pattern: one comb Doppler period
/// `1 / S_sym` for comb-only patterns, `1` otherwise.
pub fn oracle_window(pattern: &Pattern) -> Rational {
    match pattern {
        Pattern::Comb(c) => Rational::new(1, c.s_sym as i64),
        _ => Rational::from_integer(1),
    }
}

/// Irregular realization the oracle runs on.
///
/// Two REs per comb symbol already carry every comb constraint, so combs use
/// `N = 2 S_sub`; synthesized patterns grow `N` to hold the PTRS tones.
pub fn oracle_pattern(pattern: &Pattern) -> Result<IrregularPattern> {
    let n = match pattern {
        Pattern::Comb(c) => 2 * c.s_sub as usize,
        Pattern::Synthesized(s) => {
            let top = s.ptrs_cells().map(|(_, d)| d as usize + 1).max().unwrap_or(0);
            (2 * s.comb.s_sub as usize).max(top)
        }
        Pattern::Irregular(p) => p.max_offset().map_or(1, |d| d as usize + 1),
    };
    pattern.to_irregular(n)
}

/// Checker verdict next to the oracle's collision set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub check: CheckResult,
    pub oracle: CollisionSet,
    pub agree: bool,
}

/// Runs the matching checker and the oracle; they agree when the check
/// passes exactly when the oracle finds no collision, and any witness the
/// checker reports is itself an oracle collision.
pub fn cross_validate(pattern: &Pattern) -> Result<CrossCheck> {
    let check = check(pattern)?;
    let irr = oracle_pattern(pattern)?;
    let oracle = collision_oracle_window(&irr, oracle_window(pattern), false);
    let witness_ok = match &check.implied_collision {
        Some(c) => {
            let rel = relative_cells(&irr);
            rel.iter().all(|&(dd, ds)| (c.y * ds - c.x * dd).is_integer())
        }
        None => true,
    };
    let agree = check.pass == oracle.is_empty() && witness_ok;
    Ok(CrossCheck { check, oracle, agree })
}
