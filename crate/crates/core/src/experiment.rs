//! Experiment runners behind the CLI presets and the acceptance checks.
//!
//! Every Monte-Carlo trial draws from its own `(seed, trial, purpose)` stream and
//! results are collected in trial order, so output does not depend on the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{assemble_channel, ChannelMode, ChannelTensor};
use crate::config::{build_carrier_grid, validate_config, ModeSet, SbsPlacement, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_positions_with, make_pilots, synth_uplink_training, EstimationReport, EstimatorOptions, PilotKind,
};
use crate::link::{
    ber_monte_carlo, circuit_power, noise_for_snr, qpsk_ber_awgn, radiated_power,
    sinr_table, spectral_efficiency, BerCount, SinrTable, ZfBaseline,
};
use crate::oam::{build_mode_transform, effective_oam_channel, EffectiveOamChannel, ModeTransform};
use crate::precoding::{build_precoder, PrecodingSet};
use crate::rng::{purpose, stream};

/// One output value. `None` in `user`/`mode` means pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub snr_db: f64,
    /// Name of the swept parameter other than SNR ("" when none).
    pub param: String,
    pub param_value: String,
    pub user: Option<usize>,
    pub mode: Option<i32>,
    pub metric: String,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Record {
    fn new(snr_db: f64, param: &str, param_value: String, metric: &str, value: f64, trials: usize, seed: u64) -> Self {
        Self {
            snr_db,
            param: param.into(),
            param_value,
            user: None,
            mode: None,
            metric: metric.into(),
            value,
            trials,
            seed,
        }
    }

    fn user(mut self, p: usize) -> Self {
        self.user = Some(p);
        self
    }

    fn mode(mut self, l: i32) -> Self {
        self.mode = Some(l);
        self
    }
}

/// Ring whose arrays carry the uplink training (the outermost).
pub fn training_ring(config: &SystemConfig) -> usize {
    config.ring_count() - 1
}

/// Replace the data and/or training mode lists by centered blocks of the given
/// sizes; T_t follows Ũ.
pub fn with_mode_counts(config: &SystemConfig, data: Option<usize>, training: Option<usize>) -> Result<SystemConfig> {
    let mut c = config.clone();
    if let Some(u) = data {
        c.modes.data_modes = ModeSet::centered(u);
    }
    if let Some(u) = training {
        c.modes.training_modes = ModeSet::centered(u);
        c.training_symbols = u;
    }
    validate_config(&c)
}

/// Replace W̃.
pub fn with_training_subcarriers(config: &SystemConfig, count: usize) -> Result<SystemConfig> {
    let mut c = config.clone();
    let g = &config.carriers;
    c.carriers = build_carrier_grid(g.base_frequency, g.spacing, g.data_count, count)?;
    validate_config(&c)
}

/// Synthesize training at `snr_db` for `trial` and estimate every position.
/// The report is labelled against the configured truth.
pub fn estimation_trial(
    config: &SystemConfig,
    snr_db: Option<f64>,
    mode: ChannelMode,
    opts: &EstimatorOptions,
    seed: u64,
    trial: u64,
) -> Result<EstimationReport> {
    let truth = config.placements();
    let mut pilot_rng = stream(seed, trial, purpose::PILOTS);
    let pilots =
        make_pilots(PilotKind::Unit, config.modes.training_modes.len(), config.carriers.training_count, &mut pilot_rng);
    let mut noise_rng = stream(seed, trial, purpose::TRAINING_NOISE);
    let obs = synth_uplink_training(config, &truth, &pilots, snr_db, mode, training_ring(config), &mut noise_rng)?;
    Ok(estimate_positions_with(config, &obs, opts)?.score(&truth))
}

/// True downlink channel plus the matching ideal precoder.
#[derive(Clone, Debug)]
pub struct Downlink {
    pub config: SystemConfig,
    pub channel: ChannelTensor,
    pub transform: ModeTransform,
    /// Fᴴ H F of the true channel.
    pub effective: EffectiveOamChannel,
    /// Precoder built from the true positions.
    pub ideal: PrecodingSet,
    /// Per-element power of the detected component at unit symbol power, U/M².
    pub reference_power: f64,
}

impl Downlink {
    pub fn new(config: &SystemConfig, mode: ChannelMode) -> Result<Self> {
        let channel = assemble_channel(config, &config.placements(), mode)?;
        let transform = build_mode_transform(&config.modes.data_modes, config.rx_elements(), config.user_count(), config.ring_count())?;
        let effective = effective_oam_channel(&channel, &transform)?;
        let ideal = if mode == ChannelMode::Farfield {
            build_precoder(&effective)?
        } else {
            precoder_for(config, &transform, &config.placements())?
        };
        let reference_power = in_span_power(transform.mode_count(), transform.elements);
        Ok(Self { config: config.clone(), channel, transform, effective, ideal, reference_power })
    }

    /// Precoder built from the far-field model at `placements`.
    pub fn precoder_from(&self, placements: &[SbsPlacement]) -> Result<PrecodingSet> {
        precoder_for(&self.config, &self.transform, placements)
    }

    pub fn identity(&self) -> PrecodingSet {
        PrecodingSet::identity(self.config.user_count(), self.transform.block(), self.channel.subcarriers())
    }

    /// Per-element noise variance for receive SNR `snr_db` at unit symbol power.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        noise_for_snr(self.reference_power, snr_db)
    }

    pub fn sinr(&self, set: &PrecodingSet, symbol_power: f64, noise_variance: f64) -> Result<SinrTable> {
        sinr_table(&self.effective, set, symbol_power, noise_variance, self.transform.elements, self.transform.rings)
    }

    /// Spectral efficiency at unit symbol power and receive SNR `snr_db`.
    pub fn spectral_efficiency(&self, set: &PrecodingSet, snr_db: f64) -> Result<f64> {
        let table = self.sinr(set, 1.0, self.noise_variance(snr_db))?;
        Ok(spectral_efficiency(&table, self.config.training_overhead_factor()))
    }

    /// Mean radiated power per subcarrier of `set` at unit symbol power.
    pub fn mean_radiated_power(&self, set: &PrecodingSet) -> f64 {
        let r = radiated_power(set, &self.transform);
        r.iter().sum::<f64>() / r.len() as f64
    }
}

/// Per-element power U/M² of y = F_U s / M, the received vector that
/// despiralizes to s with unit symbol power. This is the signal power behind
/// every receive SNR in this module.
pub fn in_span_power(modes: usize, elements: usize) -> f64 {
    modes as f64 / (elements * elements) as f64
}

fn precoder_for(config: &SystemConfig, t: &ModeTransform, placements: &[SbsPlacement]) -> Result<PrecodingSet> {
    let model = assemble_channel(config, placements, ChannelMode::Farfield)?;
    build_precoder(&effective_oam_channel(&model, t)?)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One point of an estimation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationPoint {
    pub snr_db: f64,
    pub training_modes: usize,
    pub training_subcarriers: usize,
    /// Per-trial estimates `[trial][user]`; failed trials are absent.
    pub estimates: Vec<Vec<SbsPlacement>>,
    /// Per-trial NMSE `[trial][user]` as (range, elevation, azimuth).
    pub nmse: Vec<Vec<[f64; 3]>>,
    pub failures: usize,
}

impl EstimationPoint {
    /// Median NMSE over trials per user, (range, elevation, azimuth).
    pub fn median_nmse(&self) -> Vec<[f64; 3]> {
        let users = self.nmse.first().map_or(0, |t| t.len());
        (0..users)
            .map(|p| {
                let mut out = [0.0; 3];
                for (k, o) in out.iter_mut().enumerate() {
                    let mut v: Vec<f64> = self.nmse.iter().map(|t| t[p][k]).collect();
                    *o = median(&mut v);
                }
                out
            })
            .collect()
    }

    /// Mean NMSE over trials per user.
    pub fn mean_nmse(&self) -> Vec<[f64; 3]> {
        let users = self.nmse.first().map_or(0, |t| t.len());
        let n = self.nmse.len().max(1) as f64;
        (0..users)
            .map(|p| {
                let mut out = [0.0; 3];
                for t in &self.nmse {
                    for k in 0..3 {
                        out[k] += t[p][k] / n;
                    }
                }
                out
            })
            .collect()
    }
}

/// Estimation grid: every combination of SNR, Ũ and W̃, `trials` each.
#[derive(Clone, Debug)]
pub struct EstimationSweep {
    pub snr_db: Vec<f64>,
    pub training_modes: Vec<usize>,
    pub training_subcarriers: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelMode,
    pub options: EstimatorOptions,
}

impl EstimationSweep {
    pub fn run(&self, base: &SystemConfig) -> Result<Vec<EstimationPoint>> {
        let modes = if self.training_modes.is_empty() { vec![None] } else { self.training_modes.iter().map(|&u| Some(u)).collect() };
        let carriers =
            if self.training_subcarriers.is_empty() { vec![None] } else { self.training_subcarriers.iter().map(|&w| Some(w)).collect() };
        let mut configs = Vec::new();
        for &u in &modes {
            for &w in &carriers {
                let mut c = with_mode_counts(base, None, u)?;
                if let Some(w) = w {
                    c = with_training_subcarriers(&c, w)?;
                }
                let (u, w) = (c.modes.training_modes.len(), c.carriers.training_count);
                for &snr in &self.snr_db {
                    configs.push((snr, u, w, c.clone()));
                }
            }
        }
        let jobs: Vec<(usize, u64)> =
            (0..configs.len()).flat_map(|i| (0..self.trials as u64).map(move |t| (i, t))).collect();
        let results: Vec<Result<EstimationReport>> = jobs
            .par_iter()
            .map(|&(i, t)| estimation_trial(&configs[i].3, Some(configs[i].0), self.channel, &self.options, self.seed, t))
            .collect();
        let mut points: Vec<EstimationPoint> = configs
            .iter()
            .map(|(snr, u, w, _)| EstimationPoint {
                snr_db: *snr,
                training_modes: *u,
                training_subcarriers: *w,
                estimates: vec![],
                nmse: vec![],
                failures: 0,
            })
            .collect();
        for (&(i, _), r) in jobs.iter().zip(results) {
            match r {
                Ok(rep) => {
                    let n = rep.nmse.clone().unwrap_or_default();
                    points[i].nmse.push(n.iter().map(|x| [x.range, x.elevation, x.azimuth]).collect());
                    points[i].estimates.push(rep.estimates);
                }
                Err(Error::Estimation(_)) => points[i].failures += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(points)
    }

    /// Flatten points into records: per-trial estimates when there is one
    /// point, summary NMSE always.
    pub fn records(&self, base: &SystemConfig, points: &[EstimationPoint]) -> Vec<Record> {
        let truth = base.placements();
        let mut out = Vec::new();
        let (param, value): (&str, fn(&EstimationPoint) -> String) = if self.training_modes.len() > 1 {
            ("training_modes", |p| p.training_modes.to_string())
        } else if self.training_subcarriers.len() > 1 {
            ("training_subcarriers", |p| p.training_subcarriers.to_string())
        } else {
            ("", |_| String::new())
        };
        for pt in points {
            let n = pt.nmse.len();
            let rec = |metric: &str, v: f64| Record::new(pt.snr_db, param, value(pt), metric, v, n, self.seed);
            if points.len() == 1 {
                for (t, est) in pt.estimates.iter().enumerate() {
                    for (p, e) in est.iter().enumerate() {
                        let tr = |m: &str, v: f64| {
                            let mut r = rec(m, v).user(p);
                            r.param = "trial".into();
                            r.param_value = t.to_string();
                            r
                        };
                        out.push(tr("range_m", e.range));
                        out.push(tr("elevation_deg", e.elevation.to_degrees()));
                        out.push(tr("azimuth_deg", e.azimuth.to_degrees()));
                    }
                }
                for (p, tp) in truth.iter().enumerate() {
                    out.push(rec("true_range_m", tp.range).user(p));
                    out.push(rec("true_elevation_deg", tp.elevation.to_degrees()).user(p));
                    out.push(rec("true_azimuth_deg", tp.azimuth.to_degrees()).user(p));
                }
            }
            for (p, m) in pt.median_nmse().iter().enumerate() {
                out.push(rec("median_nmse_range", m[0]).user(p));
                out.push(rec("median_nmse_elevation", m[1]).user(p));
                out.push(rec("median_nmse_azimuth", m[2]).user(p));
            }
            for (p, m) in pt.mean_nmse().iter().enumerate() {
                out.push(rec("mean_nmse_range", m[0]).user(p));
                out.push(rec("mean_nmse_elevation", m[1]).user(p));
                out.push(rec("mean_nmse_azimuth", m[2]).user(p));
            }
            out.push(rec("failed_trials", pt.failures as f64));
        }
        out
    }
}

/// Precoders built from estimates of `trials` training rounds at `snr_db`.
/// Failed estimations fall back to nothing (the trial is skipped).
fn estimated_precoders(
    link: &Downlink,
    estimation_config: &SystemConfig,
    snr_db: f64,
    trials: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<Vec<PrecodingSet>> {
    let sets: Vec<Result<Option<PrecodingSet>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| match estimation_trial(estimation_config, Some(snr_db), link.channel.mode, opts, seed, t) {
            Ok(rep) => link.precoder_from(&rep.estimates).map(Some),
            Err(Error::Estimation(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut out = Vec::new();
    for s in sets {
        match s {
            Ok(Some(p)) => out.push(p),
            Ok(None) => {}
            Err(Error::IllConditioned { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Data and training mode counts for one SE/BER curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeCase {
    pub data_modes: usize,
    pub training_modes: usize,
}

impl ModeCase {
    pub fn label(&self) -> String {
        format!("{}/{}", self.data_modes, self.training_modes)
    }

    /// The mode counts of `config`.
    pub fn of(config: &SystemConfig) -> Self {
        Self { data_modes: config.modes.data_modes.len(), training_modes: config.modes.training_modes.len() }
    }
}

/// Configs for each case; an empty list keeps `base` unchanged.
fn case_configs(base: &SystemConfig, cases: &[ModeCase]) -> Result<Vec<(ModeCase, SystemConfig)>> {
    if cases.is_empty() {
        return Ok(vec![(ModeCase::of(base), base.clone())]);
    }
    cases
        .iter()
        .map(|c| Ok((*c, with_mode_counts(base, Some(c.data_modes), Some(c.training_modes))?)))
        .collect()
}

/// BER-vs-SNR sweep with true and estimated positions.
#[derive(Clone, Debug)]
pub struct BerSweep {
    pub snr_db: Vec<f64>,
    pub cases: Vec<ModeCase>,
    /// OFDM symbols per estimation trial (each spans every user, stream and
    /// subcarrier); the true-position chain gets `trials` times as many.
    pub ofdm_symbols: usize,
    /// Estimation rounds per SNR point.
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelMode,
    pub options: EstimatorOptions,
}

/// BER results at one SNR for one mode case.
#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub case: ModeCase,
    pub snr_db: f64,
    pub ideal: BerCount,
    pub estimated: BerCount,
    /// Mean of Q(√SINR) over the ideal chain's streams.
    pub analytic_ideal: f64,
}

impl BerSweep {
    pub fn run(&self, base: &SystemConfig) -> Result<Vec<BerPoint>> {
        let mut out = Vec::new();
        for (case, cfg) in case_configs(base, &self.cases)? {
            let case = &case;
            let link = Downlink::new(&cfg, self.channel)?;
            let per_snr: Vec<Result<BerPoint>> = self
                .snr_db
                .par_iter()
                .enumerate()
                .map(|(i, &snr)| {
                    let noise = link.noise_variance(snr);
                    let ideal = ber_monte_carlo(
                        &link.ideal,
                        &link.transform,
                        &link.channel,
                        noise,
                        self.ofdm_symbols * self.trials.max(1),
                        self.seed,
                        i as u64,
                    )?;
                    let sets = estimated_precoders(&link, &cfg, snr, self.trials, self.seed, &self.options)?;
                    let mut estimated = BerCount::default();
                    for (t, set) in sets.iter().enumerate() {
                        let trial = ((t + 1) * self.snr_db.len() + i) as u64;
                        let c = ber_monte_carlo(set, &link.transform, &link.channel, noise, self.ofdm_symbols, self.seed, trial)?;
                        estimated.merge(&c);
                    }
                    let table = link.sinr(&link.ideal, 1.0, noise)?;
                    let all: Vec<f64> = table.values.iter().flatten().flatten().map(|&s| qpsk_ber_awgn(s)).collect();
                    let analytic_ideal = all.iter().sum::<f64>() / all.len() as f64;
                    Ok(BerPoint { case: *case, snr_db: snr, ideal, estimated, analytic_ideal })
                })
                .collect();
            for p in per_snr {
                out.push(p?);
            }
        }
        Ok(out)
    }

    pub fn records(&self, points: &[BerPoint]) -> Vec<Record> {
        let mut out = Vec::new();
        for pt in points {
            let trials = self.trials;
            let rec = |m: &str, v: f64| Record::new(pt.snr_db, "data_modes/training_modes", pt.case.label(), m, v, trials, self.seed);
            for (name, c) in [("ber_true", &pt.ideal), ("ber_estimated", &pt.estimated)] {
                out.push(rec(name, c.pooled()));
                for p in 0..c.errors.len() {
                    out.push(rec(name, c.ber(p)).user(p));
                }
                out.push(rec(&format!("{name}_bits"), c.bits.iter().sum::<u64>() as f64));
            }
            out.push(rec("ber_analytic_true", pt.analytic_ideal));
        }
        out
    }
}

/// SE-vs-SNR sweep: ideal, estimated and identity precoders, plus the ZF
/// baseline when requested.
#[derive(Clone, Debug)]
pub struct SeSweep {
    pub snr_db: Vec<f64>,
    pub cases: Vec<ModeCase>,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelMode,
    pub options: EstimatorOptions,
    pub baseline: bool,
}

/// SE results at one SNR for one mode case.
#[derive(Clone, Debug, PartialEq)]
pub struct SePoint {
    pub case: ModeCase,
    pub snr_db: f64,
    pub ideal: f64,
    /// Mean over successful estimation trials.
    pub estimated: f64,
    pub identity: f64,
    pub baseline: Option<f64>,
    pub modes: Vec<i32>,
    /// Mean SINR per data mode with estimated positions (linear).
    pub mode_sinr: Vec<f64>,
    pub estimated_trials: usize,
}

impl SeSweep {
    pub fn run(&self, base: &SystemConfig) -> Result<Vec<SePoint>> {
        let mut out = Vec::new();
        for (case, cfg) in case_configs(base, &self.cases)? {
            let case = &case;
            let link = Downlink::new(&cfg, self.channel)?;
            let zf = if self.baseline { Some(ZfBaseline::new(&link.channel)?) } else { None };
            let identity = link.identity();
            let u = cfg.modes.data_modes.len();
            for &snr in &self.snr_db {
                let sets = estimated_precoders(&link, &cfg, snr, self.trials, self.seed, &self.options)?;
                let noise = link.noise_variance(snr);
                let mut estimated = 0.0;
                let mut mode_sinr = vec![0.0; u];
                for set in &sets {
                    let table = link.sinr(set, 1.0, noise)?;
                    estimated += spectral_efficiency(&table, cfg.training_overhead_factor());
                    for (k, s) in table.mean_per_stream().iter().enumerate() {
                        mode_sinr[k % u] += s / (sets.len() * cfg.ring_count()) as f64;
                    }
                }
                let n = sets.len().max(1) as f64;
                let baseline = zf.as_ref().map(|z| z.evaluate(1.0, 1.0 / 10f64.powf(snr / 10.0), cfg.coherence_symbols).se);
                out.push(SePoint {
                    case: *case,
                    snr_db: snr,
                    ideal: link.spectral_efficiency(&link.ideal, snr)?,
                    estimated: estimated / n,
                    identity: link.spectral_efficiency(&identity, snr)?,
                    baseline,
                    modes: cfg.modes.data_modes.clone(),
                    mode_sinr,
                    estimated_trials: sets.len(),
                });
            }
        }
        Ok(out)
    }

    pub fn records(&self, points: &[SePoint]) -> Vec<Record> {
        let mut out = Vec::new();
        for pt in points {
            let rec = |m: &str, v: f64| Record::new(pt.snr_db, "data_modes/training_modes", pt.case.label(), m, v, pt.estimated_trials, self.seed);
            out.push(rec("se_true", pt.ideal));
            out.push(rec("se_estimated", pt.estimated));
            out.push(rec("se_identity", pt.identity));
            if let Some(b) = pt.baseline {
                out.push(rec("se_zf_baseline", b));
            }
            for (l, s) in pt.modes.iter().zip(&pt.mode_sinr) {
                out.push(rec("sinr_estimated_db", 10.0 * s.log10()).mode(*l));
            }
        }
        out
    }
}

/// EE-vs-transmit-power sweep at fixed absolute noise.
#[derive(Clone, Debug)]
pub struct EeSweep {
    /// Transmit power per subcarrier and ring, W.
    pub transmit_power: Vec<f64>,
    pub cases: Vec<ModeCase>,
    /// Receive SNR of the ideal chain at 1 W, which fixes the noise power.
    pub reference_snr_db: f64,
    /// SNR of the training used for the estimated precoders.
    pub training_snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelMode,
    pub options: EstimatorOptions,
    pub baseline: bool,
}

/// EE and SE at one transmit power.
#[derive(Clone, Debug, PartialEq)]
pub struct EePoint {
    pub case: ModeCase,
    pub transmit_power: f64,
    pub se: f64,
    pub ee: f64,
    pub baseline: Option<(f64, f64)>,
    pub circuit_power: f64,
}

impl EeSweep {
    pub fn run(&self, base: &SystemConfig) -> Result<Vec<EePoint>> {
        let mut out = Vec::new();
        for (case, cfg) in case_configs(base, &self.cases)? {
            let case = &case;
            let link = Downlink::new(&cfg, self.channel)?;
            let sets = estimated_precoders(&link, &cfg, self.training_snr_db, self.trials, self.seed, &self.options)?;
            let rings = cfg.ring_count();
            let (users, m, w) = (cfg.user_count(), cfg.rx_elements(), cfg.carriers.data_count);
            let ideal_radiated = link.mean_radiated_power(&link.ideal);
            // Noise fixed so that the ideal chain sees the reference SNR at 1 W.
            let noise = link.noise_variance(self.reference_snr_db) * rings as f64 / ideal_radiated;
            let zf = if self.baseline { Some(ZfBaseline::new(&link.channel)?) } else { None };
            let pc = circuit_power(&cfg.power, users, m, rings);
            for &pt in &self.transmit_power {
                let mut se = 0.0;
                for set in &sets {
                    let es = pt * rings as f64 / link.mean_radiated_power(set);
                    let table = link.sinr(set, es, noise)?;
                    se += spectral_efficiency(&table, cfg.training_overhead_factor());
                }
                se /= sets.len().max(1) as f64;
                let den = (w * rings) as f64 * pt / cfg.power.pa_efficiency + pc;
                let baseline = zf.as_ref().map(|z| {
                    let es = pt * rings as f64 / z.mean_radiated_power();
                    let b = z.evaluate(es, noise, cfg.coherence_symbols);
                    (b.se, cfg.power.bandwidth * b.se / den)
                });
                out.push(EePoint {
                    case: *case,
                    transmit_power: pt,
                    se,
                    ee: cfg.power.bandwidth * se / den,
                    baseline,
                    circuit_power: pc,
                });
            }
        }
        Ok(out)
    }

    pub fn records(&self, points: &[EePoint]) -> Vec<Record> {
        let mut out = Vec::new();
        for pt in points {
            let rec = |m: &str, v: f64| {
                let mut r =
                    Record::new(self.reference_snr_db, "transmit_power_w", pt.transmit_power.to_string(), m, v, self.trials, self.seed);
                r.metric = format!("{m}[{}]", pt.case.label());
                r
            };
            out.push(rec("se", pt.se));
            out.push(rec("ee", pt.ee));
            out.push(rec("circuit_power_w", pt.circuit_power));
            if let Some((se, ee)) = pt.baseline {
                out.push(rec("se_zf_baseline", se));
                out.push(rec("ee_zf_baseline", ee));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
