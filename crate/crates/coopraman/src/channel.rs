//! Optical power gain from emitter to particle and particle to detector.
//!
//! Large-scale attenuation follows exp(-mu(f) * d) with a per-band lumped
//! coefficient mu loaded from a calibration file; multipath enters as one
//! multiplicative Rayleigh amplitude factor per leg.

use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

/// A frequency selector: the excitation line or one Raman sub-band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Excitation,
    Sub(usize),
}

/// Exponential attenuation model with one lumped coefficient per band.
#[derive(Debug, Clone)]
pub struct AttenuationModel {
    mu_excitation: f64,
    mu_sub: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BandRef {
    Name(String),
    CenterCm1(f64),
}

/// Calibration file entry: a band (the string "excitation" or a shift-axis
/// position in cm^-1) and its attenuation coefficient in 1/m.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationEntry {
    bin: BandRef,
    mu: f64,
}

impl AttenuationModel {
    /// Flat coefficient across the excitation line and all sub-bands.
    pub fn flat(mu: f64, n_f: usize) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Config(format!("mu must be non-negative, got {mu}")));
        }
        Ok(AttenuationModel {
            mu_excitation: mu,
            mu_sub: vec![mu; n_f],
        })
    }

    /// Flat coefficient chosen so one leg of length `distance` loses `loss_db`.
    pub fn flat_with_loss(loss_db: f64, distance: f64, n_f: usize) -> Result<Self> {
        if distance <= 0.0 {
            return Err(Error::Config("calibration distance must be positive".into()));
        }
        Self::flat(loss_db * std::f64::consts::LN_10 / (10.0 * distance), n_f)
    }

    /// Default tissue figure: one leg across the full cone height loses 30 dB.
    pub fn default_for(cfg: &SystemConfig) -> Self {
        Self::flat_with_loss(30.0, cfg.h_c, cfg.n_f).expect("valid default calibration")
    }

    /// Load a calibration table. Sub-band coefficients are interpolated
    /// linearly between the provided shift positions, which must bracket the
    /// whole axis; an "excitation" entry is required.
    pub fn from_calibration_json(text: &str, cfg: &SystemConfig) -> Result<Self> {
        let entries: Vec<CalibrationEntry> = serde_json::from_str(text)?;
        let mut mu_excitation = None;
        let mut points: Vec<(f64, f64)> = Vec::new();
        for e in entries {
            if !(e.mu >= 0.0 && e.mu.is_finite()) {
                return Err(Error::Config(format!("mu must be non-negative, got {}", e.mu)));
            }
            match e.bin {
                BandRef::Name(name) if name == "excitation" => mu_excitation = Some(e.mu),
                BandRef::Name(name) => {
                    return Err(Error::UnknownBand(name));
                }
                BandRef::CenterCm1(center) => points.push((center, e.mu)),
            }
        }
        let mu_excitation = mu_excitation
            .ok_or_else(|| Error::Config("calibration must include an \"excitation\" entry".into()))?;
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let centers = cfg.bin_centers();
        let mu_sub = centers
            .iter()
            .map(|&c| interpolate(&points, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(AttenuationModel {
            mu_excitation,
            mu_sub,
        })
    }

    pub fn mu(&self, band: Band) -> Result<f64> {
        match band {
            Band::Excitation => Ok(self.mu_excitation),
            Band::Sub(j) => self
                .mu_sub
                .get(j)
                .copied()
                .ok_or_else(|| Error::UnknownBand(format!("sub-band {j}"))),
        }
    }

    pub fn n_sub_bands(&self) -> usize {
        self.mu_sub.len()
    }

    /// One-leg power gain exp(-mu(f) * d); equals 1 at d = 0 and is monotone
    /// non-increasing in distance.
    pub fn path_gain(&self, band: Band, distance: f64) -> Result<f64> {
        debug_assert!(distance >= 0.0, "negative propagation distance");
        Ok((-self.mu(band)? * distance).exp())
    }

    /// Bump one sub-band's coefficient; used for sensitivity checks.
    pub fn with_sub_band_mu(mut self, j: usize, mu: f64) -> Result<Self> {
        if j >= self.mu_sub.len() {
            return Err(Error::UnknownBand(format!("sub-band {j}")));
        }
        self.mu_sub[j] = mu;
        Ok(self)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Config("calibration table has no sub-band entries".into()));
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if x < first.0 || x > last.0 {
        return Err(Error::UnknownBand(format!(
            "bin center {x} cm^-1 outside the calibrated range [{}, {}]",
            first.0, last.0
        )));
    }
    match points.iter().position(|p| p.0 >= x) {
        Some(0) => Ok(points[0].1),
        Some(i) => {
            let (x0, y0) = points[i - 1];
            let (x1, y1) = points[i];
            Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
        }
        None => Ok(last.1),
    }
}

/// Two-leg gain from emitter to particle to detector.
#[derive(Debug, Clone, Copy)]
pub struct LinkGain {
    /// Dimensionless power gain, fading included.
    pub gain: f64,
    pub d_ep: f64,
    pub d_pd: f64,
}

/// Draw a Rayleigh amplitude with scale `sigma` by inverse transform.
pub fn rayleigh_amplitude(sigma: f64, rng: &mut impl Rng) -> f64 {
    // 1 - U in (0, 1] keeps the log argument positive.
    sigma * (-2.0 * (1.0 - rng.gen::<f64>()).ln()).sqrt()
}

/// Compose both propagation legs with one independent Rayleigh amplitude per
/// leg. With fading disabled the gain is the deterministic product of the two
/// path gains, which never exceeds 1 in a passive medium.
#[allow(clippy::too_many_arguments)]
pub fn faded_link_gain(
    model: &AttenuationModel,
    band_in: Band,
    band_out: Band,
    d_ep: f64,
    d_pd: f64,
    sigma_c: f64,
    fading: bool,
    rng: &mut impl Rng,
) -> Result<LinkGain> {
    let deterministic = model.path_gain(band_in, d_ep)? * model.path_gain(band_out, d_pd)?;
    let gain = if fading {
        deterministic * rayleigh_amplitude(sigma_c, rng) * rayleigh_amplitude(sigma_c, rng)
    } else {
        deterministic
    };
    Ok(LinkGain { gain, d_ep, d_pd })
}

/// Mean of the per-link Rayleigh amplitude product: E{R1*R2} = pi * sigma^2 / 2.
pub fn fading_power_moment(sigma_c: f64, fading: bool) -> f64 {
    if fading {
        std::f64::consts::PI * sigma_c * sigma_c / 2.0
    } else {
        1.0
    }
}
