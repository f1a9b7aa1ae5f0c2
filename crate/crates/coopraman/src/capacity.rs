//! Mutual information and ergodic capacity of the binary-input Poisson
//! photon channel, per sub-band and for the whole ring.
//!
//! The closed form is the small-slot approximation built from the three
//! xi functions; `transition_probs` exposes the underlying on/off detection
//! probabilities so the exact mutual information can be evaluated against it.

use rand::Rng;
use serde::Serialize;

use crate::allocation::PowerAllocation;
use crate::channel::{faded_link_gain, AttenuationModel, Band};
use crate::constants::photon_energy;
use crate::error::Result;
use crate::scenario::SystemConfig;
use crate::spectrum::SpectrumVector;
use crate::vasculature::{sample_particles, sample_vessels};

/// Rates and source statistics of one sub-band channel at one realization.
///
/// `signal_rate` aggregates the particle terms sum_k h_k * P * eta and
/// `noise_rate` the molecular-noise terms; both are photon rates once the
/// caller applies its unit convention. `slot` only matters for the exact
/// transition-probability route.
#[derive(Debug, Clone, Copy)]
pub struct ChannelPoint {
    pub signal_rate: f64,
    pub noise_rate: f64,
    pub dark_rate: f64,
    pub prior: f64,
    pub slot: f64,
}

impl ChannelPoint {
    pub fn new(signal_rate: f64, noise_rate: f64, dark_rate: f64, prior: f64, slot: f64) -> Self {
        debug_assert!(signal_rate >= 0.0);
        debug_assert!(dark_rate >= 0.0);
        debug_assert!(prior > 0.0 && prior < 1.0);
        debug_assert!(slot > 0.0);
        ChannelPoint {
            signal_rate,
            noise_rate,
            dark_rate,
            prior,
            slot,
        }
    }
}

/// Probability of detecting exactly one photon given "0" or "1" was sent:
/// r*delta * exp(-r*delta) with r the total rate under each hypothesis.
/// Both probabilities stay within [0, 1/e].
pub fn transition_probs(pt: &ChannelPoint) -> (f64, f64) {
    let off = (pt.noise_rate + pt.dark_rate) * pt.slot;
    let on = (pt.signal_rate + pt.noise_rate + pt.dark_rate) * pt.slot;
    (off * (-off).exp(), on * (-on).exp())
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// xi_1(x1, x2, x3) = -(x1 + x2 + x3) ln(x1 + x2 + x3), with 0 ln 0 = 0.
pub fn xi1(x1: f64, x2: f64, x3: f64) -> f64 {
    -xlnx(x1 + x2 + x3)
}

/// xi_2(x1, x2, x3, x4) = x1 (x2 + x3 + x4) ln(x2 + x3 + x4).
pub fn xi2(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    x1 * xlnx(x2 + x3 + x4)
}

/// xi_3(x1, x2) = (1 - x1) x2 ln(x2).
pub fn xi3(x1: f64, x2: f64) -> f64 {
    (1.0 - x1) * xlnx(x2)
}

/// Small-slot capacity in nats per unit time, before clamping.
pub fn subband_capacity_raw(pt: &ChannelPoint) -> f64 {
    let (a, b, v, p) = (pt.signal_rate, pt.noise_rate, pt.dark_rate, pt.prior);
    xi1(p * a, b, v) + xi2(p, a, b, v) + xi3(p, b + v)
}

/// Small-slot capacity clamped at zero. The approximation can dip slightly
/// negative outside its validity region; callers that care count clamps via
/// [`subband_capacity_raw`].
pub fn subband_capacity(pt: &ChannelPoint) -> f64 {
    subband_capacity_raw(pt).max(0.0)
}

/// Deterministic system capacity: the sum of per-(sensor, sub-band) values.
pub fn system_capacity_from_points(points: &[ChannelPoint]) -> f64 {
    points.iter().map(subband_capacity).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct BandCapacity {
    pub mean: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of the ring capacity.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityEstimate {
    /// Per-sub-band expected capacity of a single sensor, nats per unit time.
    pub per_band: Vec<BandCapacity>,
    /// Ring total: n_s identical sensors times the per-band sum.
    pub total: f64,
    pub total_standard_error: f64,
    /// How many sampled points the approximation clamped at zero.
    pub clamped: usize,
    pub samples: usize,
}

/// Estimate expected sub-band capacities by Monte Carlo over vessels,
/// particles, fading, and molecular noise.
///
/// Rates are physical photon rates: the particle term is
/// P_j G_t G_r g eta / E_p(lambda_j); the molecular term applies the clamped
/// multiplicative noise per particle and is floored at -dark_rate so both
/// hypotheses keep non-negative rates.
pub fn estimate_system_capacity(
    cfg: &SystemConfig,
    model: &AttenuationModel,
    alloc: &PowerAllocation,
    spectrum: &SpectrumVector,
    samples: usize,
    fading: bool,
    rng: &mut impl Rng,
) -> Result<CapacityEstimate> {
    let prior = cfg
        .p_prior
        .unwrap_or_else(|| spectrum.fraction_above_mean())
        .clamp(1e-6, 1.0 - 1e-6);
    let mut per_band = Vec::with_capacity(cfg.n_f);
    let mut clamped = 0;
    let mut total = 0.0;
    let mut total_var = 0.0;
    for j in 0..cfg.n_f {
        let eta = spectrum.as_slice()[j];
        let p_j = alloc.per_band()[j];
        let energy = photon_energy(cfg.bin_wavelength(j));
        let scale = p_j * cfg.g_t * cfg.g_r / energy;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let vessels = sample_vessels(cfg, rng);
            let scene = sample_particles(cfg, &vessels, rng);
            let mut signal = 0.0;
            let mut noise = 0.0;
            for particle in &scene.particles {
                let gain = faded_link_gain(
                    model,
                    Band::Excitation,
                    Band::Sub(j),
                    particle.depth,
                    particle.depth,
                    cfg.sigma_c,
                    fading,
                    rng,
                )?
                .gain;
                let eta_eff = crate::photonics::molecular_noise(eta, cfg.sigma_m, rng);
                signal += scale * gain * eta;
                noise += scale * gain * (eta_eff - eta);
            }
            let noise = noise.max(-cfg.upsilon);
            let pt = ChannelPoint::new(signal, noise, cfg.upsilon, prior, cfg.delta_t);
            let raw = subband_capacity_raw(&pt);
            if raw < 0.0 {
                clamped += 1;
            }
            let c = raw.max(0.0);
            sum += c;
            sum_sq += c * c;
        }
        let mean = sum / samples as f64;
        let var = (sum_sq / samples as f64 - mean * mean).max(0.0) / samples.max(1) as f64;
        per_band.push(BandCapacity {
            mean,
            standard_error: var.sqrt(),
        });
        total += mean;
        total_var += var;
    }
    Ok(CapacityEstimate {
        per_band,
        total: cfg.n_s as f64 * total,
        total_standard_error: cfg.n_s as f64 * total_var.sqrt(),
        clamped,
        samples,
    })
}
