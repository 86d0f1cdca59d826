//! Multi-user range and angle-of-arrival estimation from OAM training.
//!
//! Pipeline: normalize the combined mode samples, detect users on the
//! subcarrier-axis FFT, refine (r, θ, φ) against the far-field model, then
//! estimate elevations per transmit element from the zero-mode samples and
//! average them.

pub mod model;
pub mod refine;
pub mod solve;
pub mod spectrum;
pub mod synth;
pub mod xi;

use serde::{Deserialize, Serialize};

use crate::config::{wrap_angle, SbsPlacement, SystemConfig};
use crate::error::{Error, Result};
use crate::oam::i_pow;
use crate::{CMat, C64};
use model::{KGrid, LinkGeometry};
use refine::{AngleGrid, InitSettings, ModeFit};
pub use solve::LmOptions;
pub use synth::{make_pilots, synth_uplink_training, PilotKind, TrainingObservation};

/// How per-element elevations are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ElevationMethod {
    /// Fit θⁿ_p of all users at each element against the far-field zero-mode model.
    #[default]
    ModelRefined,
    /// Delay peaks ξⁿ_p, arcsine candidates and least-squares pairing.
    XiArcsine,
}

/// Estimator knobs.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorOptions {
    /// Zero-padding factor of every FFT.
    pub zero_pad: usize,
    /// Upper end of the coarse elevation grid, radians.
    pub theta_max: f64,
    /// Coarse elevation step, radians.
    pub theta_step: f64,
    /// Coarse azimuth points per 2π/M sector.
    pub psi_points: usize,
    /// Run the unit-gain carrier-phase stage.
    pub carrier_phase: bool,
    /// Whole-cycle range offsets tried per user in that stage. With 0 the
    /// cycle nearest the free-gain range is kept.
    pub cycle_search: i32,
    pub elevation: ElevationMethod,
    /// Elements with |cos(φ̂_p − φ_n)| below this are skipped for user p.
    pub min_projection: f64,
    /// Elements whose residual exceeds this multiple of the median are dropped.
    pub outlier_factor: f64,
    /// Golden-section tolerance of the ξ refinement, meters.
    pub xi_tolerance: f64,
    pub lm: LmOptions,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            zero_pad: 16,
            theta_max: 80f64.to_radians(),
            theta_step: 0.25f64.to_radians(),
            psi_points: 24,
            carrier_phase: true,
            cycle_search: 0,
            elevation: ElevationMethod::ModelRefined,
            min_projection: 0.3,
            outlier_factor: 5.0,
            xi_tolerance: 1e-5,
            lm: LmOptions::default(),
        }
    }
}

/// NMSE triple of one user.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nmse {
    pub range: f64,
    pub elevation: f64,
    pub azimuth: f64,
}

/// Estimation output.
#[derive(Clone, Debug)]
pub struct EstimationReport {
    /// (r̂_p, θ̂_p, φ̂_p).
    pub estimates: Vec<SbsPlacement>,
    /// θ̂ⁿ_p indexed [user][element]; None where masked.
    pub element_elevations: Vec<Vec<Option<f64>>>,
    /// Per-element residual of the elevation stage.
    pub element_residuals: Vec<f64>,
    /// Residual energy of the mode-domain fit.
    pub fit_residual: f64,
    /// False when a detection stage found fewer separable peaks than users.
    pub resolved: bool,
    /// Filled by [`EstimationReport::score`].
    pub nmse: Option<Vec<Nmse>>,
}

/// Squared error normalized by the squared truth; plain squared error at zero truth.
pub fn normalized_error(est: f64, truth: f64) -> f64 {
    let e = (est - truth).powi(2);
    if truth.abs() < 1e-12 {
        e
    } else {
        e / (truth * truth)
    }
}

fn nmse_of(est: &SbsPlacement, truth: &SbsPlacement) -> Nmse {
    let dphi = wrap_angle(est.azimuth - truth.azimuth);
    Nmse {
        range: normalized_error(est.range, truth.range),
        elevation: normalized_error(est.elevation, truth.elevation),
        azimuth: normalized_error(truth.azimuth + dphi, truth.azimuth),
    }
}

impl EstimationReport {
    /// Relabel estimates to the ground-truth users (smallest total NMSE) and fill NMSE.
    pub fn score(mut self, truth: &[SbsPlacement]) -> Self {
        let p = truth.len().min(self.estimates.len());
        let cost = |perm: &[usize]| -> f64 {
            perm.iter().enumerate().map(|(i, &j)| {
                let n = nmse_of(&self.estimates[j], &truth[i]);
                n.range + n.elevation + n.azimuth
            }).sum()
        };
        let order: Vec<usize> = if p <= 7 {
            use itertools::Itertools;
            (0..self.estimates.len())
                .permutations(p)
                .min_by(|a, b| cost(a).partial_cmp(&cost(b)).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or_default()
        } else {
            let mut used = vec![false; self.estimates.len()];
            (0..p)
                .map(|i| {
                    let j = (0..self.estimates.len())
                        .filter(|&j| !used[j])
                        .min_by(|&a, &b| {
                            let ca = nmse_of(&self.estimates[a], &truth[i]);
                            let cb = nmse_of(&self.estimates[b], &truth[i]);
                            (ca.range + ca.azimuth).partial_cmp(&(cb.range + cb.azimuth)).unwrap_or(std::cmp::Ordering::Equal)
                        })
                        .unwrap_or(0);
                    used[j] = true;
                    j
                })
                .collect()
        };
        self.estimates = order.iter().map(|&j| self.estimates[j]).collect();
        self.element_elevations = order.iter().map(|&j| self.element_elevations[j].clone()).collect();
        self.nmse = Some(self.estimates.iter().zip(truth).map(|(e, t)| nmse_of(e, t)).collect());
        self
    }
}

/// X̃(u,w) = x'_t(ℓ_u,k_w)/|σ(ℓ_u,k_w)| · conj(s')/|s'| · i^{ℓ_u}, |σ| = MN|β|/(2k_w).
pub fn normalize_mode_samples(combined: &CMat, pilots: &CMat, wave_numbers: &[f64], modes: &[i32], m: usize, n: usize, beta: f64) -> Result<CMat> {
    if beta == 0.0 {
        return Err(Error::InvalidParameter("beta must be nonzero to normalize".into()));
    }
    let mut out = CMat::zeros(combined.nrows(), combined.ncols());
    for u in 0..combined.nrows() {
        for w in 0..combined.ncols() {
            let s = pilots[(u, w)];
            if s.norm() == 0.0 {
                return Err(Error::ZeroPilot { mode_index: u, subcarrier: w });
            }
            let sigma = (m * n) as f64 * beta.abs() / (2.0 * wave_numbers[w]);
            out[(u, w)] = combined[(u, w)] / sigma * (s.conj() / s.norm()) * i_pow(modes[u]);
        }
    }
    Ok(out)
}

/// Zero-mode samples scaled by 2k_w/(M|β|) with the pilot phase removed.
pub fn normalize_zero_mode(zero: &CMat, pilots: &[C64], wave_numbers: &[f64], m: usize, beta: f64) -> Result<CMat> {
    if beta == 0.0 {
        return Err(Error::InvalidParameter("beta must be nonzero to normalize".into()));
    }
    let mut out = zero.clone();
    for w in 0..zero.ncols() {
        let s = pilots[w];
        if s.norm() == 0.0 {
            return Err(Error::ZeroPilot { mode_index: 0, subcarrier: w });
        }
        let scale = 2.0 * wave_numbers[w] / (m as f64 * beta.abs()) * s.conj() / s.norm();
        for n in 0..zero.nrows() {
            out[(n, w)] *= scale;
        }
    }
    Ok(out)
}

/// Users' (r̂, φ̂) together with the joint fit state.
#[derive(Clone, Debug)]
pub struct RangeAzimuth {
    /// (r̂, θ̂, φ̂) per user from the mode-domain fit, ordered by detection.
    pub params: Vec<[f64; 3]>,
    pub fit_residual: f64,
    pub resolved: bool,
}

impl RangeAzimuth {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.params.iter().map(|p| (p[0], p[2])).collect()
    }
}

fn link_geometries(config: &SystemConfig, ring: usize) -> Result<Vec<LinkGeometry>> {
    let geos: Vec<LinkGeometry> = (0..config.user_count()).map(|p| LinkGeometry::from_config(config, p, ring)).collect();
    for g in &geos[1..] {
        if g.rr != geos[0].rr || g.rx_az != geos[0].rx_az {
            return Err(Error::InvalidParameter("estimation requires identical SBS arrays".into()));
        }
    }
    Ok(geos)
}

/// Detect every user on the subcarrier FFT of X̃ and refine (r, θ, φ) jointly.
pub fn estimate_range_azimuth(
    x: &CMat,
    geos: &[LinkGeometry],
    grid: &KGrid,
    modes: &[i32],
    opts: &EstimatorOptions,
) -> RangeAzimuth {
    let fit = ModeFit { x, geos, grid: *grid, modes };
    let settings = InitSettings {
        pad: opts.zero_pad,
        angles: AngleGrid { theta_max: opts.theta_max, theta_step: opts.theta_step, psi_points: opts.psi_points },
        lm: opts.lm,
    };
    let (mut params, resolved) = refine::initial_fit(&fit, geos.len(), settings);
    let mut cost = fit.cost(&params, false);
    if opts.carrier_phase && params.len() == 3 * geos.len() {
        let (p, c) = refine::carrier_fit(&fit, &params, opts.cycle_search, opts.lm);
        params = p;
        cost = c;
    }
    RangeAzimuth { params: params.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(), fit_residual: cost, resolved }
}

/// Full pipeline with default options.
pub fn estimate_positions(config: &SystemConfig, obs: &TrainingObservation) -> Result<EstimationReport> {
    estimate_positions_with(config, obs, &EstimatorOptions::default())
}

/// Full pipeline: normalize, detect and refine, per-element elevations, average.
pub fn estimate_positions_with(config: &SystemConfig, obs: &TrainingObservation, opts: &EstimatorOptions) -> Result<EstimationReport> {
    let geos = link_geometries(config, obs.ring)?;
    let m = geos[0].m();
    let n = geos[0].n();
    let x = normalize_mode_samples(&obs.combined, &obs.pilots, &obs.wave_numbers, &obs.modes, m, n, config.beta)?;
    let grid = KGrid::from_slice(&obs.wave_numbers);
    let ra = estimate_range_azimuth(&x, &geos, &grid, &obs.modes, opts);
    let users = config.user_count();
    if ra.params.len() < users {
        return Err(Error::Estimation(format!("found {} of {users} users", ra.params.len())));
    }
    let flat: Vec<f64> = ra.params.iter().flatten().cloned().collect();
    let mut resolved = ra.resolved;
    let (element_elevations, element_residuals, averaged) = match (&obs.zero_mode, config.estimate_elevation) {
        (Some(zero), true) => {
            let u0 = obs.modes.iter().position(|&l| l == 0).ok_or(Error::MissingZeroMode)?;
            let pilots: Vec<C64> = obs.pilots.row(u0).iter().cloned().collect();
            let zm = normalize_zero_mode(zero, &pilots, &obs.wave_numbers, m, config.beta)?;
            match opts.elevation {
                ElevationMethod::ModelRefined => {
                    let ef = refine::element_elevations(&zm, &geos, &grid, &flat, opts.min_projection, opts.lm);
                    let avg = refine::average_elements(&ef.theta, &ef.residual, opts.outlier_factor);
                    (ef.theta, ef.residual, avg)
                }
                ElevationMethod::XiArcsine => {
                    let est = ra.pairs();
                    let ranges: Vec<f64> = est.iter().map(|e| e.0).collect();
                    let mut theta = vec![vec![None; n]; users];
                    let mut residuals = vec![f64::NAN; n];
                    let mut matches = Vec::with_capacity(n);
                    for el in 0..n {
                        let y: Vec<C64> = zm.row(el).iter().cloned().collect();
                        let xe = xi::estimate_xi(&y, &grid, users, opts.zero_pad, opts.xi_tolerance);
                        resolved &= xe.resolvable;
                        let cands = xi::elevation_candidates(&xe.xi, &est, geos[0].rt, geos[0].tx_az[el], opts.min_projection);
                        let mt = xi::match_element(&y, &grid, &xe.xi, &cands, &ranges, geos[0].rr);
                        if let Some(mm) = &mt {
                            residuals[el] = mm.residual;
                            for p in 0..users {
                                theta[p][el] = mm.theta[p];
                            }
                        }
                        matches.push(mt);
                    }
                    let avg = xi::match_and_average(&matches, users, opts.outlier_factor);
                    (theta, residuals, avg)
                }
            }
        }
        _ => (vec![vec![]; users], vec![], ra.params.iter().map(|p| Some(p[1])).collect()),
    };
    let mut estimates = Vec::with_capacity(users);
    for (p, par) in ra.params.iter().enumerate() {
        let theta = averaged[p].ok_or_else(|| Error::Estimation(format!("no usable element for user {p}")))?;
        let mut q = [par[0], theta, par[2]];
        refine::canonical(&mut q);
        estimates.push(refine::placement_of(&q));
    }
    Ok(EstimationReport {
        estimates,
        element_elevations,
        element_residuals,
        fit_residual: ra.fit_residual,
        resolved,
        nmse: None,
    })
}
