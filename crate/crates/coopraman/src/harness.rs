//! Monte Carlo experiment runner: single trials, parameter sweeps, and
//! machine-readable outputs.
//!
//! Determinism contract: trial `t` of a run seeded with `s` always consumes
//! the ChaCha stream `(s, t + 1)`; stream `(s, 0)` is reserved for the fixed
//! vasculature draw. Trials are embarrassingly parallel and results are
//! reduced in trial order, so the outputs are byte-identical at any worker
//! count.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_power, expected_channel, PowerAllocation};
use crate::channel::AttenuationModel;
use crate::error::{Error, Result};
use crate::photonics::{sense_all, DetectionMode, PhotonMatrix};
use crate::reconstruction::{centralized_estimate, distributed_estimate, score, ReconstructionReport};
use crate::scenario::{place_sensors, SystemConfig};
use crate::spectrum::SpectrumVector;
use crate::vasculature::{sample_particles, sample_vessels, BeamScene, VesselSegment};

/// Stream reserved for the shared vasculature draw.
const VESSEL_STREAM: u64 = 0;

/// Independent RNG for one logical stream of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One vessel realization per (sensor, sub-band) beam.
pub type VesselField = Vec<Vec<VesselSegment>>;

/// Draw vessels for every beam in row-major (sensor, sub-band) order.
pub fn draw_vessel_field(cfg: &SystemConfig, rng: &mut ChaCha8Rng) -> VesselField {
    (0..cfg.n_s * cfg.n_f)
        .map(|_| sample_vessels(cfg, rng))
        .collect()
}

/// Populate scenes for one trial, reusing `fixed` vessels when provided.
pub fn build_scenes(
    cfg: &SystemConfig,
    fixed: Option<&VesselField>,
    rng: &mut ChaCha8Rng,
) -> Vec<BeamScene> {
    match fixed {
        Some(field) => field
            .iter()
            .map(|vessels| sample_particles(cfg, vessels, rng))
            .collect(),
        None => (0..cfg.n_s * cfg.n_f)
            .map(|_| {
                let vessels = sample_vessels(cfg, rng);
                sample_particles(cfg, &vessels, rng)
            })
            .collect(),
    }
}

/// Reports from both estimators for one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialOutput {
    pub centralized: ReconstructionReport,
    pub distributed: ReconstructionReport,
}

/// Run the full sensing chain once: scenes, photon counts, both estimators,
/// scores. Deterministic given the RNG state.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    cfg: &SystemConfig,
    truth: &SpectrumVector,
    model: &AttenuationModel,
    h: &crate::allocation::ExpectedChannel,
    alloc: &PowerAllocation,
    fixed: Option<&VesselField>,
    fading: bool,
    thresholds: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutput> {
    let layout = place_sensors(cfg);
    let scenes = build_scenes(cfg, fixed, rng);
    let counts = sense_all(
        cfg,
        &layout,
        &scenes,
        truth,
        alloc,
        model,
        DetectionMode::Poisson,
        fading,
        rng,
    )?;
    trial_from_counts(cfg, truth, h, alloc, &counts, thresholds)
}

/// Estimator and scoring stage, split out so dumped photon matrices can be
/// re-analyzed offline.
pub fn trial_from_counts(
    cfg: &SystemConfig,
    truth: &SpectrumVector,
    h: &crate::allocation::ExpectedChannel,
    alloc: &PowerAllocation,
    counts: &PhotonMatrix,
    thresholds: &[f64],
) -> Result<TrialOutput> {
    let central = centralized_estimate(counts, h, alloc, cfg)?;
    let mut centralized = score(&central.eta, truth, cfg, thresholds)?;
    centralized.no_data_bands = central.no_data.iter().filter(|&&f| f).count();
    centralized.active_per_band = central.active;

    let dist = distributed_estimate(counts, h, alloc, truth, cfg)?;
    let mut distributed = score(&dist.eta, truth, cfg, thresholds)?;
    distributed.active_per_band = dist.participants;

    Ok(TrialOutput {
        centralized,
        distributed,
    })
}

/// Run `trials` independent trials of one configuration.
pub fn run_point(
    cfg: &SystemConfig,
    truth: &SpectrumVector,
    model: &AttenuationModel,
    fading: bool,
    thresholds: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialOutput>> {
    let h = expected_channel(cfg, model, fading)?;
    let alloc = allocate_power(&h, cfg.per_sensor_power())?;
    let fixed = if cfg.fixed_vasculature {
        Some(draw_vessel_field(cfg, &mut stream_rng(seed, VESSEL_STREAM)))
    } else {
        None
    };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64 + 1);
            run_trial(
                cfg,
                truth,
                model,
                &h,
                &alloc,
                fixed.as_ref(),
                fading,
                thresholds,
                &mut rng,
            )
        })
        .collect()
}

/// Which estimators a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSet {
    Centralized,
    Distributed,
    Both,
}

impl EstimatorSet {
    fn names(self) -> &'static [&'static str] {
        match self {
            EstimatorSet::Centralized => &["centralized"],
            EstimatorSet::Distributed => &["distributed"],
            EstimatorSet::Both => &["centralized", "distributed"],
        }
    }
}

/// Declarative description of one parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// A scenario field name; see [`apply_parameter`].
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub estimators: EstimatorSet,
    #[serde(default = "default_thresholds")]
    pub outage_thresholds: Vec<f64>,
    #[serde(default)]
    pub output: Option<std::path::PathBuf>,
}

fn default_trials() -> usize {
    200
}

fn default_thresholds() -> Vec<f64> {
    vec![1.5, 3.0]
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("sweep needs at least one trial".into()));
        }
        if self.outage_thresholds.is_empty() {
            return Err(Error::Config("sweep needs at least one outage threshold".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Return a copy of `cfg` with one numeric field replaced. Integer fields
/// demand integral values; the patched config is re-validated so an invalid
/// sweep fails before any trial runs.
pub fn apply_parameter(cfg: &SystemConfig, name: &str, value: f64) -> Result<SystemConfig> {
    let mut out = cfg.clone();
    let as_count = |v: f64| -> Result<usize> {
        if v.fract() == 0.0 && v >= 1.0 && v < 1e9 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("{name} must be a positive integer, got {v}")))
        }
    };
    match name {
        "lambda_b" => out.lambda_b = value,
        "lambda_0" => out.lambda_0 = value,
        "u" => out.u = value,
        "r_f" => out.r_f = value,
        "r_b" => out.r_b = value,
        "h_c" => out.h_c = value,
        "alpha" => out.alpha = value,
        "s_l" => out.s_l = value,
        "s_u" => out.s_u = value,
        "n_s" => out.n_s = as_count(value)?,
        "n_f" => {
            out.n_f = as_count(value)?;
            // Re-bin the existing span so the axis invariant survives.
            let lo = out.shift_axis[0];
            let hi = *out.shift_axis.last().unwrap();
            let step = (hi - lo) / out.n_f as f64;
            out.shift_axis = (0..=out.n_f).map(|i| lo + step * i as f64).collect();
        }
        "p_t" => out.p_t = value,
        "p_t_dbm" => out.p_t = crate::constants::dbm_to_watts(value),
        "g_t" => out.g_t = value,
        "g_r" => out.g_r = value,
        "sigma_m" => out.sigma_m = value,
        "sigma_c" => out.sigma_c = value,
        "upsilon" => out.upsilon = value,
        "delta_t" => out.delta_t = value,
        "lambda_exc" => out.lambda_exc = value,
        "p_prior" => out.p_prior = Some(value),
        "k_groups" => out.k_groups = as_count(value)?,
        _ => return Err(Error::SweepParameter(name.to_string())),
    }
    out.validate()?;
    Ok(out)
}

/// One output row: a (parameter value, estimator, threshold) cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub estimator: String,
    pub tau_t: f64,
    pub outage: f64,
    pub se: f64,
    pub mean_mse: f64,
    pub median_mse: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// Wall time per swept value, seconds.
    pub wall_time_s: Vec<f64>,
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Binomial standard error sqrt(p(1-p)/n).
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Execute a sweep: for each value, patch the scenario, run the trials, and
/// reduce outage and MSE statistics per estimator and threshold.
pub fn run_sweep(
    spec: &SweepSpec,
    base: &SystemConfig,
    truth: &SpectrumVector,
    model: &AttenuationModel,
    fading: bool,
    seed: u64,
) -> Result<SweepResult> {
    spec.validate()?;
    // Fail on a bad parameter before any trial runs.
    for &value in &spec.values {
        apply_parameter(base, &spec.parameter, value)?;
    }
    let mut rows = Vec::new();
    let mut wall_time_s = Vec::new();
    for &value in &spec.values {
        let cfg = apply_parameter(base, &spec.parameter, value)?;
        let started = Instant::now();
        let outputs = run_point(
            &cfg,
            truth,
            model,
            fading,
            &spec.outage_thresholds,
            spec.trials,
            seed,
        )?;
        wall_time_s.push(started.elapsed().as_secs_f64());
        for &name in spec.estimators.names() {
            let mses: Vec<f64> = outputs
                .iter()
                .map(|o| match name {
                    "centralized" => o.centralized.mse,
                    _ => o.distributed.mse,
                })
                .collect();
            let mean = mses.iter().sum::<f64>() / mses.len() as f64;
            let med = median(&mut mses.clone());
            for &tau in &spec.outage_thresholds {
                let exceed = mses.iter().filter(|&&m| m > tau).count();
                let outage = exceed as f64 / mses.len() as f64;
                rows.push(SweepRow {
                    param_value: value,
                    estimator: name.to_string(),
                    tau_t: tau,
                    outage,
                    se: binomial_se(outage, mses.len()),
                    mean_mse: mean,
                    median_mse: med,
                    trials: mses.len(),
                });
            }
        }
    }
    Ok(SweepResult {
        parameter: spec.parameter.clone(),
        rows,
        wall_time_s,
    })
}

/// Render the sweep as CSV with a fixed column order.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("param_value,estimator,tau_t,outage,se,mean_mse,median_mse,trials\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.param_value, r.estimator, r.tau_t, r.outage, r.se, r.mean_mse, r.median_mse, r.trials
        ));
    }
    out
}

/// Everything needed to reproduce a run, serialized next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub version: &'static str,
    pub seed: u64,
    pub fading: bool,
    pub config: &'a SystemConfig,
    pub parameter: Option<&'a str>,
    pub values: Option<&'a [f64]>,
    pub trials: usize,
    pub wall_time_s: Option<&'a [f64]>,
}

impl<'a> RunManifest<'a> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is serializable")
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
