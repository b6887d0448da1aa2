use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use isaclab_core::eap::{local_maxima, unambiguous_regions, EapReport, PeakKind, SidePeak};
use isaclab_core::patterns::{realize_grid, sensing_overhead, OfdmNumerology, Pattern, PatternGrid, Scrambling};
use isaclab_core::sensing::{
    build_dictionary, delay_sum_af, iaa_2d, music_2d, periodogram_2dfft, DelayDopplerGrid, IaaInit, IaaOptions,
    PeriodogramOptions, Spectrum2D,
};
use isaclab_core::waveform::{
    apply_channel_freq, apply_channel_time, extended_gi_front_end, isi_free_limit, modulate, NoiseSpec, Scene,
    SnapshotMatrix, Target,
};
use isaclab_core::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Algo, NumerologyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Time domain when every delay is an integer sample, else frequency.
    Auto,
    Time,
    Freq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScramblingArg {
    Zc,
    Qpsk,
    Ones,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub pattern: PathBuf,
    /// Scene JSON: a target list or {"targets": [...], "snr_db": ..}.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[command(flatten)]
    pub numerology: NumerologyArgs,
    #[arg(long, value_enum, default_value = "fft2d")]
    pub algo: Algo,
    /// Extended guard interval index `l`.
    #[arg(long = "gi-l", default_value_t = 0)]
    pub gi_l: usize,
    /// Delay grid step in seconds (default T_s / 4N).
    #[arg(long = "grid-tau-step")]
    pub grid_tau_step: Option<f64>,
    /// Doppler grid step in Hz (default 1 / (4 M S_sym T)).
    #[arg(long = "grid-f-step")]
    pub grid_f_step: Option<f64>,
    /// Doppler window in Hz (default one period centred on zero).
    #[arg(long = "f-lo", allow_negative_numbers = true)]
    pub f_lo: Option<f64>,
    #[arg(long = "f-hi", allow_negative_numbers = true)]
    pub f_hi: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the scene SNR.
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub backend: Backend,
    #[arg(long, value_enum, default_value = "zc")]
    pub scrambling: ScramblingArg,
    /// Peak threshold relative to the spectrum maximum.
    #[arg(long = "threshold-db", default_value_t = -13.0, allow_negative_numbers = true)]
    pub threshold_db: f64,
    #[arg(long = "iaa-iterations", default_value_t = 15)]
    pub iaa_iterations: usize,
    #[arg(long = "music-snapshots", default_value_t = 8)]
    pub music_snapshots: usize,
    /// MUSIC signal subspace size (default: number of targets).
    #[arg(long = "model-order")]
    pub model_order: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Everything that determines a run, echoed to `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub pattern: PathBuf,
    pub scene: Option<PathBuf>,
    pub numerology: OfdmNumerology,
    pub algorithm: Algo,
    pub gi_l: usize,
    pub grid_tau_step_s: f64,
    pub grid_f_step_hz: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub backend: Backend,
    pub scrambling: ScramblingArg,
    pub threshold_db: f64,
    pub iaa_iterations: usize,
    pub music_snapshots: usize,
    pub model_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub tau_s: f64,
    pub doppler_hz: f64,
    pub detected: bool,
    pub peak: Option<SidePeak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub algorithm: Algo,
    pub backend: Backend,
    pub gi_l: usize,
    pub isi_free_delay_samples: usize,
    /// Relative error of the noiseless front-end output against the ideal
    /// frequency-domain model (time backend only).
    pub model_error: Option<f64>,
    pub targets: Vec<TargetOutcome>,
    pub missed: usize,
    /// Side peaks at the level of the weakest detected target or above.
    pub equal_power_side_peaks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iaa_convergence: Option<Vec<f64>>,
    pub eap: EapReport,
}

/// Spectrum header written next to the CSV.
#[derive(Debug, Serialize)]
struct SpectrumHeader<'a> {
    algorithm: &'a str,
    scale: &'a str,
    normalized: bool,
    raw_peak: f64,
    tau_periodic: bool,
    n_tau: usize,
    tau_step_s: f64,
    n_f: usize,
    f_lo_hz: f64,
    f_step_hz: f64,
}

pub struct SimOutput {
    pub config: RunConfig,
    pub spectrum: Spectrum2D,
    pub report: SimReport,
    pub log: Vec<String>,
}

/// Independent seed for one pipeline stage.
fn stage_seed(seed: u64, stage: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng.next_u64()
}

const STAGE_SCRAMBLE: u64 = 1;
const STAGE_NOISE: u64 = 2;
const STAGE_SNAPSHOTS: u64 = 3;

fn comb_s_sub(pattern: &Pattern) -> Option<u32> {
    match pattern {
        Pattern::Comb(c) => Some(c.s_sub),
        Pattern::Synthesized(s) => Some(s.comb.s_sub),
        Pattern::Irregular(_) => None,
    }
}

/// Number of symbols the Doppler resolution is based on.
fn doppler_symbols(pattern: &Pattern, span: u32) -> usize {
    match pattern {
        Pattern::Comb(c) => c.m() * c.s_sym as usize,
        Pattern::Synthesized(s) => s.comb.m() * s.comb.s_sym as usize,
        Pattern::Irregular(_) => span as usize,
    }
}

pub fn config_from_args(a: &SimulateArgs, pattern: &Pattern, scene: &Scene) -> Result<RunConfig> {
    let num = a.numerology.build()?;
    let irr = pattern.to_irregular(num.n)?;
    let t = num.t();
    let tau_step = a.grid_tau_step.unwrap_or(num.ts() / (4.0 * num.n as f64));
    let f_step = a.grid_f_step.unwrap_or(1.0 / (4.0 * doppler_symbols(pattern, irr.span_symbols()) as f64 * t));
    if !(tau_step > 0.0 && f_step > 0.0) {
        bail!("grid steps must be positive");
    }
    let f_lo = a.f_lo.unwrap_or(-0.5 / t);
    let f_hi = a.f_hi.unwrap_or(0.5 / t - f_step);
    if f_hi < f_lo {
        bail!("--f-hi is below --f-lo");
    }
    Ok(RunConfig {
        pattern: a.pattern.clone(),
        scene: a.scene.clone(),
        numerology: num,
        algorithm: a.algo,
        gi_l: a.gi_l,
        grid_tau_step_s: tau_step,
        grid_f_step_hz: f_step,
        f_lo_hz: f_lo,
        f_hi_hz: f_hi,
        seed: a.seed,
        snr_db: a.snr_db.or(scene.snr_db),
        backend: a.backend,
        scrambling: a.scrambling,
        threshold_db: a.threshold_db,
        iaa_iterations: a.iaa_iterations,
        music_snapshots: a.music_snapshots,
        model_order: a.model_order,
    })
}

fn freq_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let q_lo = (lo / step - 1e-9).ceil() as i64;
    let q_hi = (hi / step + 1e-9).floor() as i64;
    (q_lo..=q_hi).map(|q| q as f64 * step).collect()
}

struct Receiver<'a> {
    cfg: &'a RunConfig,
    grid: &'a PatternGrid,
    s_sub: Option<u32>,
    backend: Backend,
}

impl Receiver<'_> {
    fn snapshot(&self, targets: &[Target], noise: Option<NoiseSpec>) -> Result<SnapshotMatrix> {
        let num = &self.cfg.numerology;
        match self.backend {
            Backend::Time => {
                let rx = apply_channel_time(&modulate(self.grid), num, targets, noise)?;
                let s_sub = match (self.s_sub, self.cfg.gi_l) {
                    (_, 0) => self.s_sub.unwrap_or(1),
                    (Some(s), _) => s,
                    (None, _) => bail!("the extended guard interval needs a comb-based pattern"),
                };
                Ok(extended_gi_front_end(&rx, self.grid, self.cfg.gi_l, s_sub)?)
            }
            _ => {
                let mut snap = apply_channel_freq(self.grid, targets)?;
                if let Some(ns) = noise {
                    snap.add_noise(ns.snr_db, ns.seed);
                }
                Ok(snap)
            }
        }
    }
}

/// Runs the whole pipeline without touching the file system.
pub fn simulate(cfg: &RunConfig, pattern: &Pattern, scene: &Scene) -> Result<SimOutput> {
    let num = cfg.numerology;
    let mut log = Vec::new();
    let irr = pattern.to_irregular(num.n)?;
    let scrambling = match cfg.scrambling {
        ScramblingArg::Zc => Scrambling::default(),
        ScramblingArg::Qpsk => Scrambling::Qpsk { seed: stage_seed(cfg.seed, STAGE_SCRAMBLE) },
        ScramblingArg::Ones => Scrambling::Ones,
    };
    let grid = realize_grid(&irr, num, &scrambling)?;
    let s_sub = comb_s_sub(pattern);
    let targets = &scene.targets;
    let backend = match cfg.backend {
        Backend::Auto if targets.iter().all(|t| t.delay_samples(&num).is_some()) => Backend::Time,
        Backend::Auto => Backend::Freq,
        b => b,
    };
    if backend == Backend::Freq && cfg.gi_l > 0 {
        log.push("frequency backend has no ISI; --gi-l only affects the time backend".to_string());
    }
    let isi_limit = isi_free_limit(&num, cfg.gi_l, s_sub.unwrap_or(1));
    log.push(format!(
        "pattern {} with {} REs over {} symbols; backend {:?}; ISI-free up to {} samples",
        pattern.kind(),
        irr.re_count(),
        irr.span_symbols(),
        backend,
        isi_limit
    ));
    for (h, t) in targets.iter().enumerate() {
        if let Some(d) = t.delay_samples(&num) {
            if backend == Backend::Time && d > isi_limit {
                log.push(format!("target {h} at {d} samples exceeds the ISI-free delay"));
            }
        }
    }
    let noise = cfg.snr_db.map(|snr_db| NoiseSpec { snr_db, seed: stage_seed(cfg.seed, STAGE_NOISE) });
    let rx = Receiver { cfg, grid: &grid, s_sub, backend };

    let mut model_error = None;
    let mut iaa_convergence = None;
    let tau_periodic;
    let spectrum = match cfg.algorithm {
        Algo::DelaySum => {
            log.push("Delay-and-Sum reports the ambiguity function of the transmitted signal; the scene is not used".into());
            let fs = num.sample_rate();
            let step = ((cfg.grid_tau_step_s * fs).round() as usize).max(1);
            let taus: Vec<f64> = (0..num.n).step_by(step).map(|d| d as f64 / fs).collect();
            let dd = DelayDopplerGrid::new(taus, freq_axis(cfg.f_lo_hz, cfg.f_hi_hz, cfg.grid_f_step_hz))?;
            let rs: Vec<u32> = irr.symbols.iter().map(|s| s.index).collect();
            tau_periodic = false;
            delay_sum_af(&modulate(&grid), &num, &rs, &dd)?
        }
        algo => {
            if backend == Backend::Time && !targets.is_empty() {
                let clean = rx.snapshot(targets, None)?;
                let ideal = apply_channel_freq(&grid, targets)?;
                let err = clean.relative_error(&ideal);
                log.push(format!("front-end model error {err:.3e}"));
                model_error = Some(err);
            }
            let snap = rx.snapshot(targets, noise)?;
            tau_periodic = true;
            let n_tau = ((num.ts() / cfg.grid_tau_step_s).round() as usize).max(1);
            match algo {
                Algo::Fft2d => {
                    let pad_tau = (n_tau as f64 / num.n as f64).round().max(1.0) as usize;
                    let bins = (1.0 / (cfg.grid_f_step_hz * num.t())).round() as usize;
                    let opts = PeriodogramOptions { pad_tau, doppler_bins: bins, f_lo: cfg.f_lo_hz, f_hi: cfg.f_hi_hz };
                    periodogram_2dfft(&snap, &num, &opts)?
                }
                Algo::Iaa => {
                    let dd = DelayDopplerGrid::uniform(num.ts() / n_tau as f64, n_tau, cfg.grid_f_step_hz, cfg.f_lo_hz, cfg.f_hi_hz)?;
                    let dict = build_dictionary(&irr, &num, &dd);
                    let opts = IaaOptions { iterations: cfg.iaa_iterations, loading: 1e-6, init: IaaInit::MatchedFilter };
                    let out = iaa_2d(&snap, &dict, &opts)?;
                    log.push(format!("IAA final relative change {:.3e}", out.convergence.last().copied().unwrap_or(0.0)));
                    iaa_convergence = Some(out.convergence);
                    out.spectrum
                }
                Algo::Music => {
                    let dd = DelayDopplerGrid::uniform(num.ts() / n_tau as f64, n_tau, cfg.grid_f_step_hz, cfg.f_lo_hz, cfg.f_hi_hz)?;
                    let dict = build_dictionary(&irr, &num, &dd);
                    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, STAGE_SNAPSHOTS));
                    let mut snaps = vec![snap];
                    for k in 1..cfg.music_snapshots.max(1) {
                        // repeated periods with independent target phases
                        let shifted: Vec<Target> = targets
                            .iter()
                            .map(|t| Target { alpha: t.alpha * Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU), ..*t })
                            .collect();
                        let ns = noise.map(|n| NoiseSpec { seed: stage_seed(n.seed, k as u64), ..n });
                        snaps.push(rx.snapshot(&shifted, ns)?);
                    }
                    let order = cfg.model_order.unwrap_or(targets.len().max(1));
                    music_2d(&snaps, &dict, order, 1e-6)?
                }
                Algo::DelaySum => unreachable!(),
            }
        }
    };
    let mut spectrum = spectrum.normalize();
    spectrum.tau_periodic = tau_periodic;

    let detections = match local_maxima(&spectrum, cfg.threshold_db) {
        Ok(p) => p,
        Err(_) => {
            log.push("spectrum is flat; no peaks".into());
            Vec::new()
        }
    };
    // Delay-and-Sum has its mainlobe at the origin
    let reference: Vec<Target> = match cfg.algorithm {
        Algo::DelaySum => vec![Target::new(0.0, 0.0, Complex64::new(1.0, 0.0))],
        _ => targets.clone(),
    };
    let (dt, df) = (spectrum.grid.tau_step(), spectrum.grid.f_step());
    let tau_dist = |a: f64, b: f64| {
        let d = (a - b).abs();
        if tau_periodic {
            let d = d.rem_euclid(num.ts());
            d.min(num.ts() - d)
        } else {
            d
        }
    };
    let mut used = vec![false; detections.len()];
    let mut outcomes = Vec::new();
    for t in &reference {
        let best = detections
            .iter()
            .enumerate()
            .filter(|(k, p)| !used[*k] && tau_dist(p.tau, t.tau) <= dt * 1.001 && (p.doppler - t.doppler).abs() <= df * 1.001)
            .min_by(|(_, a), (_, b)| {
                let da = tau_dist(a.tau, t.tau) / dt + (a.doppler - t.doppler).abs() / df;
                let db = tau_dist(b.tau, t.tau) / dt + (b.doppler - t.doppler).abs() / df;
                da.total_cmp(&db)
            })
            .map(|(k, p)| (k, *p));
        if let Some((k, _)) = best {
            used[k] = true;
        }
        outcomes.push(TargetOutcome { tau_s: t.tau, doppler_hz: t.doppler, detected: best.is_some(), peak: best.map(|b| b.1) });
    }
    let mainlobes: Vec<SidePeak> = outcomes.iter().filter_map(|o| o.peak).collect();
    let side_peaks: Vec<SidePeak> = detections.iter().zip(&used).filter(|(_, u)| !**u).map(|(p, _)| *p).collect();
    let missed = outcomes.iter().filter(|o| !o.detected).count();
    let weakest = mainlobes.iter().map(|p| p.level).fold(1.0, f64::min);
    let equal_power = side_peaks.iter().filter(|p| p.level >= weakest * (1.0 - 1e-6)).count();
    for (h, o) in outcomes.iter().enumerate() {
        if !o.detected {
            log.push(format!("target {h} at ({:.6e} s, {:.3} Hz) not detected", o.tau_s, o.doppler_hz));
        }
    }
    log.push(format!("{} detections, {} side peaks, {} at mainlobe level", detections.len(), side_peaks.len(), equal_power));

    let mainlobe = mainlobes
        .iter()
        .chain(detections.iter())
        .copied()
        .max_by(|a, b| a.level.total_cmp(&b.level))
        .unwrap_or(SidePeak { tau: 0.0, doppler: 0.0, level: 1.0, kind: PeakKind::Measured });
    let offsets: Vec<SidePeak> = side_peaks
        .iter()
        .map(|p| SidePeak { tau: (p.tau - mainlobe.tau).rem_euclid(num.ts()), doppler: p.doppler - mainlobe.doppler, ..*p })
        .collect();
    let regions = unambiguous_regions(
        &offsets,
        1.0 - 1e-6,
        tau_periodic.then_some(num.ts()),
        num.ts(),
        0.5 * (cfg.f_hi_hz - cfg.f_lo_hz + cfg.grid_f_step_hz),
    );
    let eap = EapReport {
        algorithm: format!("{:?}", cfg.algorithm).to_lowercase(),
        overhead: sensing_overhead(pattern, num.n)?,
        mainlobe,
        side_peaks,
        regions,
        comparison: None,
    };
    let report = SimReport {
        algorithm: cfg.algorithm,
        backend,
        gi_l: cfg.gi_l,
        isi_free_delay_samples: isi_limit,
        model_error,
        targets: outcomes,
        missed,
        equal_power_side_peaks: equal_power,
        iaa_convergence,
        eap,
    };
    Ok(SimOutput { config: cfg.clone(), spectrum, report, log })
}

pub fn write_outputs(out: &Path, sim: &SimOutput) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write = |name: &str, text: String| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("config.json", serde_json::to_string_pretty(&sim.config)? + "\n")?;
    write("report.json", serde_json::to_string_pretty(&sim.report)? + "\n")?;
    write("spectrum.csv", sim.spectrum.to_csv())?;
    let s = &sim.spectrum;
    let header = SpectrumHeader {
        algorithm: &s.algorithm,
        scale: match s.scale {
            isaclab_core::sensing::Scale::Power => "power",
            isaclab_core::sensing::Scale::Magnitude => "magnitude",
        },
        normalized: s.normalized,
        raw_peak: s.raw_peak,
        tau_periodic: s.tau_periodic,
        n_tau: s.grid.taus.len(),
        tau_step_s: s.grid.tau_step(),
        n_f: s.grid.freqs.len(),
        f_lo_hz: s.grid.freqs.first().copied().unwrap_or(0.0),
        f_step_hz: s.grid.f_step(),
    };
    write("spectrum.json", serde_json::to_string_pretty(&header)? + "\n")?;
    let mut log = String::new();
    for line in &sim.log {
        let _ = writeln!(log, "{line}");
    }
    write("log.txt", log)?;
    Ok(())
}

/// Exit code 1 when a target is missed.
pub fn run(a: &SimulateArgs) -> Result<i32> {
    let pattern = crate::read_pattern(&a.pattern)?.pattern;
    let scene = match &a.scene {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Scene::from_json(&text)?
        }
        None => Scene::default(),
    };
    let cfg = config_from_args(a, &pattern, &scene)?;
    let sim = simulate(&cfg, &pattern, &scene)?;
    write_outputs(&a.out, &sim)?;
    eprintln!(
        "{} targets, {} missed, {} side peaks; outputs in {}",
        sim.report.targets.len(),
        sim.report.missed,
        sim.report.eap.side_peaks.len(),
        a.out.display()
    );
    Ok(if sim.report.missed > 0 { 1 } else { 0 })
}
