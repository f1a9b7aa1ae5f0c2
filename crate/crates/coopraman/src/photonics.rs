//! Received-signal composition and photon counting.
//!
//! A detector's noiseless received power is the sum over excited particles of
//! transmit power, antenna gains, the two-leg link gain, and the particle's
//! noisy scattering coefficient. Power converts to a photon rate through the
//! per-photon energy at the sub-band wavelength, and the count in one
//! detection interval is Poisson with mean (rate + dark) * delta_t.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::allocation::PowerAllocation;
use crate::channel::{faded_link_gain, AttenuationModel, Band};
use crate::constants::photon_energy;
use crate::error::{Error, Result};
use crate::scenario::{SensorLayout, SystemConfig};
use crate::spectrum::SpectrumVector;
use crate::vasculature::BeamScene;

/// Whether photon counts are drawn from the Poisson law or fixed at its mean.
/// The mean mode exists for deterministic forward/inverse checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    Poisson,
    Mean,
}

/// One detector's output for a single interval.
#[derive(Debug, Clone, Copy)]
pub struct DetectorReading {
    /// Received power plus the dark-current power equivalent, W.
    pub y_power: f64,
    /// Photon count; integer-valued except in mean mode.
    pub count: f64,
    pub sensor: usize,
    pub sub_band: usize,
}

/// Photon counts for every (sensor, sub-band) pair.
///
/// Counts are stored as f64 so the deterministic mean mode can carry
/// fractional values; Poisson-mode matrices are always integer-valued.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonMatrix {
    pub n_s: usize,
    pub n_f: usize,
    counts: Vec<f64>,
}

impl PhotonMatrix {
    pub fn zeros(n_s: usize, n_f: usize) -> Self {
        PhotonMatrix {
            n_s,
            n_f,
            counts: vec![0.0; n_s * n_f],
        }
    }

    pub fn get(&self, sensor: usize, sub_band: usize) -> f64 {
        self.counts[sensor * self.n_f + sub_band]
    }

    pub fn set(&mut self, sensor: usize, sub_band: usize, value: f64) {
        self.counts[sensor * self.n_f + sub_band] = value;
    }

    pub fn column(&self, sub_band: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_s).map(move |i| self.get(i, sub_band))
    }

    pub fn is_integral(&self) -> bool {
        self.counts.iter().all(|c| c.fract() == 0.0)
    }

    /// CSV export: one row per sensor, one column per sub-band.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n_s {
            let row: Vec<String> = (0..self.n_f).map(|j| format!("{}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, cfg: &SystemConfig) -> Result<Self> {
        let mut counts = Vec::with_capacity(cfg.n_s * cfg.n_f);
        let mut rows = 0;
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad photon CSV: {e}")))?;
            if row.len() != cfg.n_f {
                return Err(Error::Dimension(format!(
                    "photon CSV row has {} columns, scenario has {} sub-bands",
                    row.len(),
                    cfg.n_f
                )));
            }
            counts.extend(row);
            rows += 1;
        }
        if rows != cfg.n_s {
            return Err(Error::Dimension(format!(
                "photon CSV has {rows} rows, scenario has {} sensors",
                cfg.n_s
            )));
        }
        Ok(PhotonMatrix {
            n_s: cfg.n_s,
            n_f: cfg.n_f,
            counts,
        })
    }
}

/// Apply multiplicative molecular noise: eta * max(0, 1 + kappa) with
/// kappa ~ N(0, sigma_m^2). The clamp keeps the effective coefficient
/// physical when the noise would drive it negative.
pub fn molecular_noise(eta: f64, sigma_m: f64, rng: &mut impl Rng) -> f64 {
    if sigma_m == 0.0 {
        return eta;
    }
    let kappa = Normal::new(0.0, sigma_m)
        .expect("positive sigma")
        .sample(rng);
    eta * (1.0 + kappa).max(0.0)
}

/// Noiseless-composition received power: the sum over particles of
/// P_t * G_t * g_k * eta_k * G_r with a fresh two-leg faded gain per particle.
#[allow(clippy::too_many_arguments)]
pub fn received_power(
    scene: &BeamScene,
    eta_eff: &[f64],
    p_t_j: f64,
    cfg: &SystemConfig,
    model: &AttenuationModel,
    sub_band: usize,
    fading: bool,
    rng: &mut impl Rng,
) -> Result<f64> {
    if eta_eff.len() != scene.particles.len() {
        return Err(Error::Dimension(format!(
            "{} effective coefficients for {} particles",
            eta_eff.len(),
            scene.particles.len()
        )));
    }
    let mut total = 0.0;
    for (particle, &eta) in scene.particles.iter().zip(eta_eff) {
        let link = faded_link_gain(
            model,
            Band::Excitation,
            Band::Sub(sub_band),
            particle.depth,
            particle.depth,
            cfg.sigma_c,
            fading,
            rng,
        )?;
        total += p_t_j * cfg.g_t * link.gain * eta * cfg.g_r;
    }
    Ok(total)
}

/// Poisson mean for one detection interval: (power/E_p + dark) * delta_t.
pub fn expected_photon_count(received_w: f64, upsilon: f64, delta_t: f64, lambda_m: f64) -> f64 {
    (received_w / photon_energy(lambda_m) + upsilon) * delta_t
}

/// Above this mean the count collapses to the mean instead of sampling.
/// The rejection sampler's accept test cancels terms of order mean*ln(mean),
/// which loses all significance well before 2^53; at 1e12 the skipped
/// Poisson spread is one part in 1e6 of the count, far below every other
/// noise source in the chain.
const MAX_SAMPLED_COUNT: f64 = 1e12;

/// Draw the photon count for one interval.
pub fn photon_count(
    received_w: f64,
    upsilon: f64,
    delta_t: f64,
    lambda_m: f64,
    rng: &mut impl Rng,
) -> u64 {
    let gamma = expected_photon_count(received_w, upsilon, delta_t, lambda_m);
    if gamma <= 0.0 {
        return 0;
    }
    if gamma >= MAX_RESOLVED_COUNT {
        return gamma as u64;
    }
    Poisson::new(gamma).expect("positive finite mean").sample(rng) as u64
}

/// Sense one beam: molecular noise per particle, power composition, then the
/// photon draw (or its mean).
#[allow(clippy::too_many_arguments)]
pub fn sense_one(
    cfg: &SystemConfig,
    model: &AttenuationModel,
    scene: &BeamScene,
    eta_j: f64,
    p_t_j: f64,
    sensor: usize,
    sub_band: usize,
    mode: DetectionMode,
    fading: bool,
    rng: &mut impl Rng,
) -> Result<DetectorReading> {
    let eta_eff: Vec<f64> = scene
        .particles
        .iter()
        .map(|_| molecular_noise(eta_j, cfg.sigma_m, rng))
        .collect();
    let power = received_power(scene, &eta_eff, p_t_j, cfg, model, sub_band, fading, rng)?;
    let lambda = cfg.bin_wavelength(sub_band);
    let count = match mode {
        DetectionMode::Poisson => photon_count(power, cfg.upsilon, cfg.delta_t, lambda, rng) as f64,
        DetectionMode::Mean => expected_photon_count(power, cfg.upsilon, cfg.delta_t, lambda),
    };
    Ok(DetectorReading {
        y_power: power + cfg.upsilon * photon_energy(lambda),
        count,
        sensor,
        sub_band,
    })
}

/// Fill the full count matrix. `scenes` holds one beam scene per
/// (sensor, sub-band) pair in row-major order; adjacent beams are assumed
/// time-slotted, so scenes are independent.
#[allow(clippy::too_many_arguments)]
pub fn sense_all(
    cfg: &SystemConfig,
    layout: &SensorLayout,
    scenes: &[BeamScene],
    spectrum: &SpectrumVector,
    alloc: &PowerAllocation,
    model: &AttenuationModel,
    mode: DetectionMode,
    fading: bool,
    rng: &mut impl Rng,
) -> Result<PhotonMatrix> {
    if layout.n_s != cfg.n_s || layout.n_f != cfg.n_f {
        return Err(Error::Dimension("layout does not match the scenario".into()));
    }
    if scenes.len() != cfg.n_s * cfg.n_f {
        return Err(Error::Dimension(format!(
            "{} scenes for {} beams",
            scenes.len(),
            cfg.n_s * cfg.n_f
        )));
    }
    if spectrum.len() != cfg.n_f || alloc.per_band().len() != cfg.n_f {
        return Err(Error::Dimension(
            "spectrum or allocation does not match the sub-band count".into(),
        ));
    }
    let mut matrix = PhotonMatrix::zeros(cfg.n_s, cfg.n_f);
    for sensor in 0..cfg.n_s {
        for sub_band in 0..cfg.n_f {
            let scene = &scenes[sensor * cfg.n_f + sub_band];
            let reading = sense_one(
                cfg,
                model,
                scene,
                spectrum.as_slice()[sub_band],
                alloc.per_band()[sub_band],
                sensor,
                sub_band,
                mode,
                fading,
                rng,
            )?;
            matrix.set(sensor, sub_band, reading.count);
        }
    }
    Ok(matrix)
}
