//! Spectrum recovery from photon counts and reconstruction scoring.
//!
//! Both estimators invert the forward model through one shared constant per
//! sub-band: the expected photon count per unit scattering coefficient,
//! `H[j] * P[j] * G_t * G_r` * delta_t / E_p(lambda_j). The centralized path
//! fuses raw counts across sensors; the distributed path quantizes each
//! sensor's local estimate to one bit against group thresholds and fuses the
//! bits.

use serde::Serialize;

use crate::allocation::{ExpectedChannel, PowerAllocation};
use crate::constants::photon_energy;
use crate::error::{Error, Result};
use crate::photonics::PhotonMatrix;
use crate::scenario::SystemConfig;
use crate::spectrum::{to_intensity, SpectrumVector};

/// Fraction of an estimated spectrum's dynamic range a bump must clear to be
/// reported as a peak.
pub const PEAK_PROMINENCE_FRACTION: f64 = 0.3;

/// Photon-rate maximum-likelihood estimate of the received signal from one
/// count. The likelihood of a Poisson count peaks at the count itself; the
/// Stirling route in [`stirling_signal_estimate`] differs by exp(-1/(2N)) and
/// is kept only as a reference.
pub fn ml_signal_estimate(count: f64) -> f64 {
    count
}

/// Stirling-approximation form exp(ln N - 1/(2N)); approaches the exact MLE
/// as the count grows.
pub fn stirling_signal_estimate(count: f64) -> f64 {
    if count <= 0.0 {
        0.0
    } else {
        (count.ln() - 1.0 / (2.0 * count)).exp()
    }
}

/// Diagnostic expected-square-error series of the count-based signal
/// estimate: sum over integer rates y of e^-y y^N / N! * (y - N)^2.
///
/// The summand is sharply peaked around y = N with width sqrt(N); the sum
/// runs over a window wide enough that the skipped tails fall below 1e-9 of
/// the total.
pub fn ml_estimate_square_error(count: u64) -> f64 {
    let n = count as f64;
    let ln_n_factorial = ln_factorial(count);
    let window = 14.0 * (n.sqrt() + 1.0) + 30.0;
    let y_start = (n - window).max(0.0) as u64;
    let mut total = 0.0;
    let mut y = y_start;
    loop {
        let yf = y as f64;
        let log_term = if y == 0 {
            if count == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -yf + n * yf.ln() - ln_n_factorial
        };
        let term = log_term.exp() * (yf - n) * (yf - n);
        total += term;
        if yf > n + window && (term < 1e-12 * total || total == 0.0) {
            return total;
        }
        y += 1;
    }
}

/// ln(n!) exactly for small n, by the Stirling series beyond.
fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
    }
}

/// Expected photon counts per unit scattering coefficient, one per sub-band.
#[derive(Debug, Clone)]
pub struct CountScale {
    counts_per_eta: Vec<f64>,
}

impl CountScale {
    /// Bind the forward model's constants for this scenario. Fails on any
    /// sub-band whose expected channel or allocated power vanishes.
    pub fn new(cfg: &SystemConfig, h: &ExpectedChannel, alloc: &PowerAllocation) -> Result<Self> {
        if h.len() != cfg.n_f || alloc.per_band().len() != cfg.n_f {
            return Err(Error::Dimension(
                "expected channel or allocation does not match the sub-band count".into(),
            ));
        }
        let counts_per_eta = (0..cfg.n_f)
            .map(|j| {
                let scale = h.per_band()[j] * alloc.per_band()[j] * cfg.g_t * cfg.g_r * cfg.delta_t
                    / photon_energy(cfg.bin_wavelength(j));
                if scale > 0.0 && scale.is_finite() {
                    Ok(scale)
                } else {
                    Err(Error::SubbandUnreachable { index: j })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CountScale { counts_per_eta })
    }

    pub fn per_band(&self) -> &[f64] {
        &self.counts_per_eta
    }
}

/// Centralized fusion output with per-band diagnostics.
#[derive(Debug, Clone)]
pub struct CentralizedEstimate {
    pub eta: SpectrumVector,
    /// Sensors counted per band: those with count - dark >= 0.
    pub active: Vec<usize>,
    /// Bands where no sensor qualified; their estimate is zero.
    pub no_data: Vec<bool>,
}

/// Fuse raw counts: `eta[j] = sum_i (y_i - dark)^+ / (active_j * scale_j)`,
/// where dark = upsilon * delta_t and active_j counts sensors with
/// y_i - dark >= 0 (ties count).
pub fn centralized_estimate(
    counts: &PhotonMatrix,
    h: &ExpectedChannel,
    alloc: &PowerAllocation,
    cfg: &SystemConfig,
) -> Result<CentralizedEstimate> {
    if counts.n_s != cfg.n_s || counts.n_f != cfg.n_f {
        return Err(Error::Dimension("photon matrix does not match the scenario".into()));
    }
    let scale = CountScale::new(cfg, h, alloc)?;
    let dark = cfg.upsilon * cfg.delta_t;
    let mut eta = Vec::with_capacity(cfg.n_f);
    let mut active = Vec::with_capacity(cfg.n_f);
    let mut no_data = Vec::with_capacity(cfg.n_f);
    for j in 0..cfg.n_f {
        let mut sum = 0.0;
        let mut qualified = 0usize;
        for i in 0..cfg.n_s {
            let excess = ml_signal_estimate(counts.get(i, j)) - dark;
            if excess >= 0.0 {
                qualified += 1;
                sum += excess;
            }
        }
        if qualified == 0 {
            eta.push(0.0);
            no_data.push(true);
        } else {
            eta.push(sum / (qualified as f64 * scale.per_band()[j]));
            no_data.push(false);
        }
        active.push(qualified);
    }
    Ok(CentralizedEstimate {
        eta: SpectrumVector::new(eta)?,
        active,
        no_data,
    })
}

/// Per-sensor binary quantizers for the distributed path.
///
/// Sensor `i` belongs to group `group[i]` (1-based, round-robin) and carries
/// thresholds `tau[i][k] = k * T_i / K` for k = 0..=K, where T_i is the
/// sensor's quantization cap. Group k quantizes against `tau[i][k-1]` and the
/// fusion weight for group k spans `tau[i][k+1] - tau[i][k-1]` with the upper
/// index clamped at K.
#[derive(Debug, Clone)]
pub struct QuantizerBank {
    pub groups: usize,
    pub group: Vec<usize>,
    pub thresholds: Vec<Vec<f64>>,
}

impl QuantizerBank {
    /// Build from per-sensor caps; caps are clamped at zero.
    pub fn new(caps: &[f64], groups: usize) -> Result<Self> {
        if groups == 0 {
            return Err(Error::Config("quantizer needs at least one group".into()));
        }
        if caps.len() < groups {
            return Err(Error::Config(format!(
                "{} sensors cannot fill {groups} quantizer groups",
                caps.len()
            )));
        }
        let thresholds = caps
            .iter()
            .map(|&cap| {
                let cap = cap.max(0.0);
                (0..=groups).map(|k| k as f64 * cap / groups as f64).collect()
            })
            .collect();
        Ok(QuantizerBank {
            groups,
            group: (0..caps.len()).map(|i| i % groups + 1).collect(),
            thresholds,
        })
    }

    /// The threshold sensor `i` quantizes against: `tau[i][g-1]` for group g.
    pub fn bit_threshold(&self, sensor: usize) -> f64 {
        self.thresholds[sensor][self.group[sensor] - 1]
    }

    /// Fusion weight contributed by sensor `i` inside its group g:
    /// `tau[i][min(g+1, K)] - tau[i][g-1]`.
    pub fn fusion_weight(&self, sensor: usize) -> f64 {
        let g = self.group[sensor];
        let upper = (g + 1).min(self.groups);
        self.thresholds[sensor][upper] - self.thresholds[sensor][g - 1]
    }
}

/// Distributed fusion output.
#[derive(Debug, Clone)]
pub struct DistributedEstimate {
    pub eta: SpectrumVector,
    /// Per-sensor quantization caps T_i.
    pub caps: Vec<f64>,
    /// Per-band count of sensors participating in the fusion (nonzero counts).
    pub participants: Vec<usize>,
}

/// One-bit distributed estimation.
///
/// Each sensor forms local estimates (y - dark) / scale_j, caps its quantizer
/// at max(reference) + mean of its own local estimates, and sends one bit per
/// band. The fusion averages bits within each threshold group over the
/// sensors whose count is nonzero and sums the groups' weighted averages with
/// an overall 1/4 factor.
pub fn distributed_estimate(
    counts: &PhotonMatrix,
    h: &ExpectedChannel,
    alloc: &PowerAllocation,
    reference: &SpectrumVector,
    cfg: &SystemConfig,
) -> Result<DistributedEstimate> {
    if counts.n_s != cfg.n_s || counts.n_f != cfg.n_f {
        return Err(Error::Dimension("photon matrix does not match the scenario".into()));
    }
    if reference.len() != cfg.n_f {
        return Err(Error::Dimension("reference spectrum does not match the scenario".into()));
    }
    if cfg.k_groups > cfg.n_s {
        return Err(Error::Config(format!(
            "k_groups {} exceeds the sensor count {}",
            cfg.k_groups, cfg.n_s
        )));
    }
    let scale = CountScale::new(cfg, h, alloc)?;
    let dark = cfg.upsilon * cfg.delta_t;
    let ref_max = reference.max();

    // Local estimation stage, one sensor at a time.
    let mut locals = vec![0.0; cfg.n_s * cfg.n_f];
    let mut caps = Vec::with_capacity(cfg.n_s);
    for i in 0..cfg.n_s {
        let mut mean = 0.0;
        for j in 0..cfg.n_f {
            let local =
                (ml_signal_estimate(counts.get(i, j)) - dark) / scale.per_band()[j];
            locals[i * cfg.n_f + j] = local;
            mean += local;
        }
        mean /= cfg.n_f as f64;
        caps.push(ref_max + mean);
    }
    let bank = QuantizerBank::new(&caps, cfg.k_groups)?;

    // Fusion stage at the data fusion center.
    let mut eta = Vec::with_capacity(cfg.n_f);
    let mut participants = Vec::with_capacity(cfg.n_f);
    for j in 0..cfg.n_f {
        let mut group_sum = vec![0.0; cfg.k_groups];
        let mut group_members = vec![0usize; cfg.k_groups];
        for i in 0..cfg.n_s {
            if counts.get(i, j) == 0.0 {
                continue;
            }
            let g = bank.group[i] - 1;
            group_members[g] += 1;
            if locals[i * cfg.n_f + j] >= bank.bit_threshold(i) {
                group_sum[g] += bank.fusion_weight(i);
            }
        }
        let mut value = 0.0;
        for g in 0..cfg.k_groups {
            if group_members[g] > 0 {
                value += group_sum[g] / group_members[g] as f64;
            }
        }
        eta.push(0.25 * value);
        participants.push(group_members.iter().sum());
    }
    Ok(DistributedEstimate {
        eta: SpectrumVector::new(eta)?,
        caps,
        participants,
    })
}

/// Mean-normalized mean square error between two intensity vectors. When the
/// estimate is identically zero its normalized form is defined as all-zero
/// and the comparison is flagged degenerate.
pub fn normalized_mse(estimate: &[f64], truth: &[f64]) -> (f64, bool) {
    assert_eq!(estimate.len(), truth.len());
    let n = truth.len() as f64;
    let mean_t = truth.iter().sum::<f64>() / n;
    let mean_e = estimate.iter().sum::<f64>() / n;
    let degenerate = mean_e == 0.0;
    let mse = estimate
        .iter()
        .zip(truth)
        .map(|(&e, &t)| {
            let en = if degenerate { 0.0 } else { e / mean_e };
            let tn = if mean_t == 0.0 { 0.0 } else { t / mean_t };
            (en - tn) * (en - tn)
        })
        .sum::<f64>()
        / n;
    (mse, degenerate)
}

#[derive(Debug, Clone, Serialize)]
pub struct OutageFlag {
    pub threshold: f64,
    pub exceeded: bool,
}

/// Quality report for one reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub eta_hat: SpectrumVector,
    pub mse: f64,
    pub outage: Vec<OutageFlag>,
    pub peaks_cm1: Vec<f64>,
    pub degenerate: bool,
    /// Per-band qualified-sensor counts from the estimator, when available.
    pub active_per_band: Vec<usize>,
    /// Bands the centralized estimator flagged as having no usable sensor.
    pub no_data_bands: usize,
}

/// Convert both spectra to intensity, normalize each by its own mean, score
/// the mean square error, flag outages, and report detected peaks.
pub fn score(
    eta_hat: &SpectrumVector,
    eta_true: &SpectrumVector,
    cfg: &SystemConfig,
    thresholds: &[f64],
) -> Result<ReconstructionReport> {
    if eta_hat.len() != eta_true.len() {
        return Err(Error::Dimension("spectra must have equal length".into()));
    }
    let intensity_hat = to_intensity(eta_hat, 1.0, cfg)?;
    let intensity_true = to_intensity(eta_true, 1.0, cfg)?;
    let (mse, degenerate) = normalized_mse(&intensity_hat, &intensity_true);
    let outage = thresholds
        .iter()
        .map(|&t| OutageFlag {
            threshold: t,
            exceeded: mse > t,
        })
        .collect();
    let range = intensity_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - intensity_hat.iter().copied().fold(f64::INFINITY, f64::min);
    let centers = cfg.bin_centers();
    let peaks_cm1 = crate::spectrum::peak_indices(
        &intensity_hat,
        PEAK_PROMINENCE_FRACTION * range.max(0.0),
    )
    .into_iter()
    .map(|i| centers[i])
    .collect();
    Ok(ReconstructionReport {
        eta_hat: eta_hat.clone(),
        mse,
        outage,
        peaks_cm1,
        degenerate,
        active_per_band: Vec::new(),
        no_data_bands: 0,
    })
}
