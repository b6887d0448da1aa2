use nalgebra::DMatrix;

use isaclab_core::patterns::{make_scheme, realize_grid, OfdmNumerology, Pattern, Scheme, Scrambling};
use isaclab_core::sensing::{build_dictionary, iaa_2d, steering_entry, DelayDopplerGrid, IaaInit, IaaOptions};
use isaclab_core::waveform::{apply_channel_freq, apply_channel_time, extended_gi_front_end, modulate, Target};
use isaclab_core::Complex64;

fn comb_grid(scheme: Scheme, s_sub: u32, m: usize, n: usize) -> isaclab_core::patterns::PatternGrid {
    let num = OfdmNumerology::with_default_cp(n).unwrap();
    let comb = make_scheme(scheme, s_sub, 1, m, None).unwrap();
    let irr = Pattern::Comb(comb).to_irregular(n).unwrap();
    realize_grid(&irr, num, &Scrambling::Qpsk { seed: 7 }).unwrap()
}

#[test]
fn parseval_per_symbol() {
    for scheme in [Scheme::A, Scheme::C] {
        let grid = comb_grid(scheme, 4, 4, 128);
        let num = grid.numerology;
        let sig = modulate(&grid);
        let np = num.samples_per_symbol();
        for s in 0..grid.span_symbols {
            let freq: f64 = grid.row(s).iter().map(|v| v.norm_sqr()).sum();
            let time: f64 = sig.samples[s * np + num.n_cp..(s + 1) * np].iter().map(|v| v.norm_sqr()).sum();
            // unnormalized inverse DFT
            let expect = freq * num.n as f64;
            assert!((time - expect).abs() <= 1e-10 * expect, "symbol {s}: {time} vs {expect}");
        }
    }
}

#[test]
fn comb_subsets_repeat_with_phase() {
    let s_sub = 4u32;
    let grid = comb_grid(Scheme::C, s_sub, 4, 128);
    let num = grid.numerology;
    let sig = modulate(&grid);
    let np = num.samples_per_symbol();
    let seg = num.n / s_sub as usize;
    for s in 0..grid.span_symbols {
        let f = (0..num.n).find(|&k| grid.is_rs(s, k)).unwrap() as f64;
        let y = &sig.samples[s * np + num.n_cp..(s + 1) * np];
        let scale: f64 = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for l in 0..s_sub as usize {
            let rot = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * l as f64 / s_sub as f64);
            for n in 0..seg {
                let err = (y[n + l * seg] - y[n] * rot).norm();
                assert!(err <= 1e-10 * scale, "symbol {s} l {l} n {n}: {err}");
            }
        }
    }
}

#[test]
fn time_and_frequency_backends_agree() {
    let grid = comb_grid(Scheme::C, 4, 4, 128);
    let num = grid.numerology;
    let targets = [
        Target::at_sample(3, 700.0, Complex64::new(0.8, 0.3), &num),
        Target::at_sample(num.n_cp, -1200.0, Complex64::new(-0.2, 0.5), &num),
    ];
    let rx = apply_channel_time(&modulate(&grid), &num, &targets, None).unwrap();
    let time = extended_gi_front_end(&rx, &grid, 0, 4).unwrap();
    let freq = apply_channel_freq(&grid, &targets).unwrap();
    let err = time.relative_error(&freq);
    assert!(err < 1e-10, "relative error {err}");
}

#[test]
fn single_target_snapshot_is_rank_one() {
    let grid = comb_grid(Scheme::A, 4, 6, 64);
    let num = grid.numerology;
    let snap = apply_channel_freq(&grid, &[Target::new(1.3 * num.ts() / 64.0, 910.0, Complex64::new(0.6, -0.4))]).unwrap();
    let m = DMatrix::from_fn(snap.n, snap.columns.len(), |r, c| snap.columns[c][r]);
    let sv = m.singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    assert!(v[1] / v[0] < 1e-9, "{v:?}");
}

#[test]
fn iaa_first_iteration_matches_matched_filter() {
    let grid = comb_grid(Scheme::C, 4, 4, 32);
    let num = grid.numerology;
    let t = num.t();
    let targets = [
        Target::new(5.0 * num.ts() / 32.0, 0.25 / t, Complex64::new(1.0, 0.0)),
        Target::new(11.0 * num.ts() / 32.0, -0.5 / t, Complex64::new(0.4, 0.2)),
    ];
    let snap = apply_channel_freq(&grid, &targets).unwrap();
    let dd = DelayDopplerGrid::uniform(num.ts() / 64.0, 64, 1.0 / (16.0 * t), -1.0 / t, 1.0 / t).unwrap();
    let dict = build_dictionary(&grid.pattern, &num, &dd);
    let out = iaa_2d(&snap, &dict, &IaaOptions { iterations: 1, loading: 1e-6, init: IaaInit::MatchedFilter }).unwrap();
    let a = nalgebra::DVector::from_vec(snap.vectorize());
    let mf: Vec<f64> = (0..dd.len()).map(|k| dict.vectors.column(k).dotc(&a).norm_sqr()).collect();
    let mf_arg = (0..mf.len()).fold(0, |b, k| if mf[k] > mf[b] { k } else { b });
    let (i, j) = out.spectrum.argmax();
    assert_eq!(i * dd.freqs.len() + j, mf_arg);
}

#[test]
fn aliased_columns_are_collinear() {
    let num = OfdmNumerology::with_default_cp(64).unwrap();
    let t = num.t();
    for (scheme, alias) in [
        (Scheme::A, (num.ts() / 4.0, 0.0)),
        (Scheme::B, (num.ts() / 4.0, 0.5 / t)),
        (Scheme::D, (num.ts() / 4.0, 0.25 / t)),
        (Scheme::C, (0.0, 1.0 / t)),
    ] {
        let comb = make_scheme(scheme, 4, 1, 8, None).unwrap();
        let irr = Pattern::Comb(comb).to_irregular(64).unwrap();
        let column = |tau: f64, f: f64| -> Vec<Complex64> { irr.cells().map(|(s, d)| steering_entry(s, d, tau, f, &num)).collect() };
        let (w0, w1) = (column(0.0, 0.0), column(alias.0, alias.1));
        let (w0, w1) = (nalgebra::DVector::from_vec(w0), nalgebra::DVector::from_vec(w1));
        let inner = w0.dotc(&w1).norm();
        let norm2 = w0.norm_squared();
        assert!((inner - norm2).abs() <= 1e-8 * norm2, "{scheme}: {inner} vs {norm2}");
    }
}
