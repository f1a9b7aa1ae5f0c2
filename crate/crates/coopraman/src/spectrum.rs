//! Discretized Raman spectra: synthesis from peak lists, intensity
//! conversion, and peak detection.

use serde::{Deserialize, Serialize};

use crate::constants::{LIGHT_SPEED, PLANCK};
use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

/// Scattering-coefficient vector over the configured shift axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVector {
    values: Vec<f64>,
}

impl SpectrumVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "spectrum entries must be finite and non-negative".into(),
            ));
        }
        Ok(SpectrumVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }

    /// Fraction of bins strictly above the mean; the default binary-source
    /// prior when none is configured.
    pub fn fraction_above_mean(&self) -> f64 {
        let mean = self.mean();
        let above = self.values.iter().filter(|v| **v > mean).count();
        above as f64 / self.values.len().max(1) as f64
    }

    /// Write as CSV with columns `shift_cm1,value`.
    pub fn to_csv(&self, centers: &[f64]) -> String {
        let mut out = String::from("shift_cm1,value\n");
        for (c, v) in centers.iter().zip(&self.values) {
            out.push_str(&format!("{c},{v}\n"));
        }
        out
    }

    /// Parse the CSV form; the shift column must match the config's bin
    /// centers.
    pub fn from_csv(text: &str, cfg: &SystemConfig) -> Result<Self> {
        let centers = cfg.bin_centers();
        let mut values = Vec::with_capacity(centers.len());
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 && line.trim() == "shift_cm1,value" {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let shift: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad CSV line {}", idx + 1)))?;
            let value: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad CSV line {}", idx + 1)))?;
            let k = values.len();
            if k >= centers.len() || (shift - centers[k]).abs() > 1e-6 {
                return Err(Error::Config(format!(
                    "CSV shift axis does not match the scenario at row {}",
                    idx + 1
                )));
            }
            values.push(value);
        }
        if values.len() != centers.len() {
            return Err(Error::Dimension(format!(
                "spectrum CSV has {} rows, scenario has {} bins",
                values.len(),
                centers.len()
            )));
        }
        SpectrumVector::new(values)
    }
}

/// One Lorentzian line of a synthetic reference spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Peak {
    pub center_cm1: f64,
    pub height: f64,
    pub fwhm_cm1: f64,
}

/// Reference molecule description: a baseline plus a list of lines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakList {
    pub baseline: f64,
    pub peaks: Vec<Peak>,
}

impl PeakList {
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        let lo = cfg.shift_axis[0];
        let hi = *cfg.shift_axis.last().unwrap();
        if self.baseline < 0.0 {
            return Err(Error::Config("baseline must be non-negative".into()));
        }
        for p in &self.peaks {
            if p.height <= 0.0 || p.fwhm_cm1 <= 0.0 {
                return Err(Error::Config(
                    "peak heights and widths must be positive".into(),
                ));
            }
            if p.center_cm1 < lo || p.center_cm1 > hi {
                return Err(Error::Config(format!(
                    "peak at {} cm^-1 outside the shift axis [{lo}, {hi}]",
                    p.center_cm1
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Reference analyte: 1,2-bis(4-pyridyl)-ethylene reporter lines at
/// 1013, 1200, 1342, 1608, and 1636 cm^-1, unit heights, 15 cm^-1 width,
/// 0.05 baseline.
pub fn bpe_reference() -> PeakList {
    let line = |center_cm1: f64| Peak {
        center_cm1,
        height: 1.0,
        fwhm_cm1: 15.0,
    };
    PeakList {
        baseline: 0.05,
        peaks: vec![
            line(1013.0),
            line(1200.0),
            line(1342.0),
            line(1608.0),
            line(1636.0),
        ],
    }
}

fn lorentzian(x: f64, center: f64, height: f64, fwhm: f64) -> f64 {
    let hw2 = (fwhm / 2.0) * (fwhm / 2.0);
    height * hw2 / ((x - center) * (x - center) + hw2)
}

/// Evaluate the peak list on the scenario's bin centers.
pub fn synth_spectrum(peaks: &PeakList, cfg: &SystemConfig) -> Result<SpectrumVector> {
    peaks.validate(cfg)?;
    let values = cfg
        .bin_centers()
        .iter()
        .map(|&x| {
            peaks.baseline
                + peaks
                    .peaks
                    .iter()
                    .map(|p| lorentzian(x, p.center_cm1, p.height, p.fwhm_cm1))
                    .sum::<f64>()
        })
        .collect();
    SpectrumVector::new(values)
}

/// Convert a scattering-coefficient vector to Raman intensity:
/// `I[j]` = P_exp * `eta[j]` * lambda_j / (h * c).
pub fn to_intensity(eta: &SpectrumVector, p_exp: f64, cfg: &SystemConfig) -> Result<Vec<f64>> {
    if p_exp <= 0.0 {
        return Err(Error::Config(format!("P_exp must be positive, got {p_exp}")));
    }
    if eta.len() != cfg.n_f {
        return Err(Error::Dimension(format!(
            "spectrum has {} bins, scenario has {}",
            eta.len(),
            cfg.n_f
        )));
    }
    Ok(eta
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &v)| p_exp * v * cfg.bin_wavelength(j) / (PLANCK * LIGHT_SPEED))
        .collect())
}

/// Indices of local maxima with topographic prominence at or above the
/// threshold. Plateaus count once, at their middle sample.
pub fn peak_indices(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let mut maxima = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if values[i] > values[i - 1] {
            // Scan a possible plateau starting at i.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                maxima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    maxima
        .into_iter()
        .filter(|&p| prominence(values, p) >= min_prominence)
        .collect()
}

/// Topographic prominence of the local maximum at `p`: its height above the
/// higher of the two valley floors separating it from taller terrain.
fn prominence(values: &[f64], p: usize) -> f64 {
    let peak = values[p];
    let mut left_base = peak;
    for i in (0..p).rev() {
        if values[i] > peak {
            break;
        }
        left_base = left_base.min(values[i]);
    }
    let mut right_base = peak;
    for &v in &values[p + 1..] {
        if v > peak {
            break;
        }
        right_base = right_base.min(v);
    }
    peak - left_base.max(right_base)
}

/// Bin centers (cm^-1) of the detected peaks, sorted by shift.
pub fn find_peaks(spec: &SpectrumVector, cfg: &SystemConfig, min_prominence: f64) -> Vec<f64> {
    let centers = cfg.bin_centers();
    peak_indices(spec.as_slice(), min_prominence)
        .into_iter()
        .map(|i| centers[i])
        .collect()
}
