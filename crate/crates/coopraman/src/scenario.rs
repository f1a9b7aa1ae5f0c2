//! Scenario configuration, ring geometry, and sensor placement.
//!
//! A [`SystemConfig`] holds every parameter of one experiment in linear SI
//! units and is immutable once built. Scenario files accept dBm/dBi at the
//! boundary and are parsed strictly: unknown keys are rejected so that a
//! scenario file is an exact record of an experiment.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::constants::{dbi_to_linear, dbm_to_watts};
use crate::error::{Error, Result};

/// Which analytic vessel-aggregation rule the expected-power path uses.
///
/// `Paper` keeps the sub-region vessel count divided by 2*r_f^2; it is the
/// published form but carries units of 1/m^2. `AreaConsistent` drops that
/// divisor so the per-region counts integrate to the per-beam Poisson mean
/// used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VesselModel {
    #[default]
    Paper,
    AreaConsistent,
}

/// Full description of one sensing experiment, all linear SI units.
#[derive(Debug, Clone, Serialize)]
pub struct SystemConfig {
    /// Blood-vessel areal density, 1/m^2.
    pub lambda_b: f64,
    /// Particle arrival density per unit vessel cross-section, 1/(s*m^2).
    pub lambda_0: f64,
    /// Blood velocity, m/s.
    pub u: f64,
    /// Finger radius, m.
    pub r_f: f64,
    /// Bone radius, m.
    pub r_b: f64,
    /// Beam cone height, m.
    pub h_c: f64,
    /// Beam full angle, radians.
    pub alpha: f64,
    /// Minimum vessel cross-section, m^2.
    pub s_l: f64,
    /// Maximum vessel cross-section, m^2.
    pub s_u: f64,
    /// Nanosensor count on the ring.
    pub n_s: usize,
    /// Sub-band count per nanosensor.
    pub n_f: usize,
    /// Total ring transmit power, W.
    pub p_t: f64,
    /// Emitter gain, linear.
    pub g_t: f64,
    /// Detector gain, linear.
    pub g_r: f64,
    /// Molecular noise standard deviation, relative to the scattering coefficient.
    pub sigma_m: f64,
    /// Rayleigh fading amplitude scale.
    pub sigma_c: f64,
    /// Dark current rate, photons/s.
    pub upsilon: f64,
    /// Detection interval, s.
    pub delta_t: f64,
    /// Excitation wavelength, m.
    pub lambda_exc: f64,
    /// Raman-shift bin edges, cm^-1; length n_f + 1, strictly increasing.
    pub shift_axis: Vec<f64>,
    /// Prior probability of "transmit 1"; derived from the reference spectrum
    /// when absent.
    pub p_prior: Option<f64>,
    /// Quantizer group count for distributed sensing.
    pub k_groups: usize,
    /// RNG seed.
    pub seed: u64,
    /// Analytic vessel-aggregation variant.
    pub analytic_vessel_model: VesselModel,
    /// Reuse one vessel realization across trials (vessels are fixed anatomy;
    /// particles, fading, and noise stay random per trial).
    pub fixed_vasculature: bool,
}

/// On-disk scenario document. Accepts dBm/dBm at the boundary and fills the
/// documented defaults for optional fields.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    lambda_b: f64,
    lambda_0: f64,
    u: f64,
    r_f: f64,
    r_b: f64,
    h_c: f64,
    alpha: f64,
    s_l: f64,
    s_u: f64,
    n_s: usize,
    n_f: usize,
    p_t_dbm: f64,
    g_t_dbi: f64,
    g_r_dbi: f64,
    sigma_m: f64,
    sigma_c: f64,
    upsilon: f64,
    #[serde(default = "default_delta_t")]
    delta_t: f64,
    #[serde(default = "default_lambda_exc")]
    lambda_exc: f64,
    /// Bin edges in cm^-1 (n_f + 1 values). Defaults to n_f equal bins over
    /// the default shift range.
    #[serde(default)]
    shift_axis: Option<Vec<f64>>,
    #[serde(default)]
    p_prior: Option<f64>,
    k_groups: usize,
    seed: u64,
    #[serde(default)]
    analytic_vessel_model: VesselModel,
    #[serde(default = "default_true")]
    fixed_vasculature: bool,
}

fn default_delta_t() -> f64 {
    1e-3
}

fn default_lambda_exc() -> f64 {
    785e-9
}

fn default_true() -> bool {
    true
}

/// Default Raman-shift axis: bins of 10 cm^-1 spanning 400 to 400 + 10*n_f.
/// With the reference 148 sub-bands this covers 400-1880 cm^-1, enough to
/// resolve every reporter line used here.
pub fn default_shift_axis(n_f: usize) -> Vec<f64> {
    (0..=n_f).map(|i| 400.0 + 10.0 * i as f64).collect()
}

impl SystemConfig {
    /// Parse and validate a scenario JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let cfg = SystemConfig {
            lambda_b: file.lambda_b,
            lambda_0: file.lambda_0,
            u: file.u,
            r_f: file.r_f,
            r_b: file.r_b,
            h_c: file.h_c,
            alpha: file.alpha,
            s_l: file.s_l,
            s_u: file.s_u,
            n_s: file.n_s,
            n_f: file.n_f,
            p_t: dbm_to_watts(file.p_t_dbm),
            g_t: dbi_to_linear(file.g_t_dbi),
            g_r: dbi_to_linear(file.g_r_dbi),
            sigma_m: file.sigma_m,
            sigma_c: file.sigma_c,
            upsilon: file.upsilon,
            delta_t: file.delta_t,
            lambda_exc: file.lambda_exc,
            shift_axis: file
                .shift_axis
                .unwrap_or_else(|| default_shift_axis(file.n_f)),
            p_prior: file.p_prior,
            k_groups: file.k_groups,
            seed: file.seed,
            analytic_vessel_model: file.analytic_vessel_model,
            fixed_vasculature: file.fixed_vasculature,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Check every scenario invariant; called on every file load.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be strictly positive, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be non-negative, got {v}")))
            }
        }
        positive("lambda_b", self.lambda_b)?;
        positive("lambda_0", self.lambda_0)?;
        positive("u", self.u)?;
        positive("r_f", self.r_f)?;
        positive("r_b", self.r_b)?;
        positive("h_c", self.h_c)?;
        positive("alpha", self.alpha)?;
        positive("s_l", self.s_l)?;
        positive("s_u", self.s_u)?;
        positive("p_t", self.p_t)?;
        positive("g_t", self.g_t)?;
        positive("g_r", self.g_r)?;
        positive("sigma_c", self.sigma_c)?;
        non_negative("sigma_m", self.sigma_m)?;
        non_negative("upsilon", self.upsilon)?;
        positive("delta_t", self.delta_t)?;
        positive("lambda_exc", self.lambda_exc)?;
        if self.alpha >= std::f64::consts::PI {
            return Err(Error::Config(format!(
                "alpha must be below pi, got {}",
                self.alpha
            )));
        }
        if self.r_b >= self.r_f {
            return Err(Error::Config(format!(
                "bone radius {} must be smaller than finger radius {}",
                self.r_b, self.r_f
            )));
        }
        if self.s_l >= self.s_u {
            return Err(Error::Config(format!(
                "s_l {} must be smaller than s_u {}",
                self.s_l, self.s_u
            )));
        }
        if self.n_s == 0 || self.n_f == 0 {
            return Err(Error::Config("n_s and n_f must be at least 1".into()));
        }
        if self.k_groups == 0 {
            return Err(Error::Config("k_groups must be at least 1".into()));
        }
        if self.n_s < self.k_groups {
            return Err(Error::Config(format!(
                "n_s {} must be at least k_groups {}",
                self.n_s, self.k_groups
            )));
        }
        if self.shift_axis.len() != self.n_f + 1 {
            return Err(Error::Config(format!(
                "shift_axis must have n_f + 1 = {} edges, got {}",
                self.n_f + 1,
                self.shift_axis.len()
            )));
        }
        if !self.shift_axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Config("shift_axis must be strictly increasing".into()));
        }
        if self.shift_axis[0] <= 0.0 {
            return Err(Error::Config("shift_axis must start above zero".into()));
        }
        // The scattered wavenumber must stay positive for every bin.
        let max_shift = *self.shift_axis.last().unwrap();
        if max_shift * 100.0 >= 1.0 / self.lambda_exc {
            return Err(Error::Config(format!(
                "maximum shift {max_shift} cm^-1 exceeds the excitation wavenumber"
            )));
        }
        if let Some(p) = self.p_prior {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Config(format!("p_prior must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    /// tan(alpha / 2), the cone half-angle slope used throughout the geometry.
    pub fn tan_half_angle(&self) -> f64 {
        (self.alpha / 2.0).tan()
    }

    /// Mean vessel count inside a single beam cone: areal density times the
    /// axial cross-section triangle area 0.5 * h_c^2 * tan(alpha/2).
    pub fn beam_vessel_mean(&self) -> f64 {
        0.5 * self.lambda_b * self.h_c * self.h_c * self.tan_half_angle()
    }

    /// Bin centers of the Raman-shift axis, cm^-1.
    pub fn bin_centers(&self) -> Vec<f64> {
        self.shift_axis
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Scattered wavelength of sub-band `j`, m.
    pub fn bin_wavelength(&self, j: usize) -> f64 {
        let center = 0.5 * (self.shift_axis[j] + self.shift_axis[j + 1]);
        crate::constants::shifted_wavelength(self.lambda_exc, center)
    }

    /// Per-nanosensor power budget: the ring total split equally.
    pub fn per_sensor_power(&self) -> f64 {
        self.p_t / self.n_s as f64
    }

    /// Reference scenario: ring of 30 sensors, 148 sub-bands, 10 dBm ring
    /// budget, 30 dBi gains, finger-scale geometry.
    pub fn reference() -> Self {
        let n_f = 148;
        SystemConfig {
            lambda_b: 1e6,
            lambda_0: 2.6e10,
            u: 0.45,
            r_f: 5e-3,
            r_b: 2.5e-3,
            h_c: 2.5e-3,
            alpha: std::f64::consts::PI / 36.0,
            s_l: 3e-9,
            s_u: 3e-7,
            n_s: 30,
            n_f,
            p_t: dbm_to_watts(10.0),
            g_t: dbi_to_linear(30.0),
            g_r: dbi_to_linear(30.0),
            sigma_m: 1.0,
            sigma_c: 1.0,
            upsilon: 1.0,
            delta_t: 1e-3,
            lambda_exc: 785e-9,
            shift_axis: default_shift_axis(n_f),
            p_prior: None,
            k_groups: 4,
            seed: 20_260_401,
            analytic_vessel_model: VesselModel::Paper,
            fixed_vasculature: true,
        }
    }
}

/// Angular positions of every emitter/detector pair on the ring.
///
/// Entry `(i, j)` is the angle of sensor `i`'s sub-band-`j` pair. The whole
/// multiset is invariant under rotation by 2*pi/(n_s*n_f), so the ring works
/// identically no matter how it is worn.
#[derive(Debug, Clone, Serialize)]
pub struct SensorLayout {
    pub n_s: usize,
    pub n_f: usize,
    angles: Vec<f64>,
}

impl SensorLayout {
    pub fn angle(&self, sensor: usize, sub_band: usize) -> f64 {
        self.angles[sensor * self.n_f + sub_band]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Deterministic homogeneous placement: sensor `i` (0-based) of sub-band `n`
/// (0-based) sits at 2*pi*i/n_s + 2*pi*n/(n_s*n_f).
pub fn place_sensors(cfg: &SystemConfig) -> SensorLayout {
    let n_s = cfg.n_s;
    let n_f = cfg.n_f;
    let tau = 2.0 * std::f64::consts::PI;
    let mut angles = Vec::with_capacity(n_s * n_f);
    for i in 0..n_s {
        for n in 0..n_f {
            angles.push(tau * i as f64 / n_s as f64 + tau * n as f64 / (n_s as f64 * n_f as f64));
        }
    }
    SensorLayout { n_s, n_f, angles }
}

/// Probability that no vessel crosses any of the `n_s` beams serving one
/// sub-band: exp(-0.5 * lambda_b * n_s * h_c^2 * tan(alpha/2)).
pub fn prob_no_vessel(cfg: &SystemConfig) -> f64 {
    prob_no_vessel_at(cfg, cfg.n_s)
}

/// Same probability evaluated at an arbitrary sensor count.
pub fn prob_no_vessel_at(cfg: &SystemConfig, n_s: usize) -> f64 {
    (-0.5 * cfg.lambda_b * n_s as f64 * cfg.h_c * cfg.h_c * cfg.tan_half_angle()).exp()
}

/// Minimum number of sensors keeping the no-vessel probability at or below
/// `tau_b`: ceil(-2 ln(tau_b) / (lambda_b * h_c^2 * tan(alpha/2))).
pub fn min_sensor_count(cfg: &SystemConfig, tau_b: f64) -> Result<u64> {
    if !(tau_b > 0.0 && tau_b <= 1.0) {
        return Err(Error::Config(format!(
            "tau_b must lie in (0, 1], got {tau_b}"
        )));
    }
    let denom = cfg.lambda_b * cfg.h_c * cfg.h_c * cfg.tan_half_angle();
    Ok((-2.0 * tau_b.ln() / denom).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn placement_single_sensor_first_band_at_zero() {
        let mut cfg = SystemConfig::reference();
        cfg.n_s = 1;
        cfg.n_f = 8;
        cfg.shift_axis = default_shift_axis(8);
        let layout = place_sensors(&cfg);
        assert_eq!(layout.angle(0, 0), 0.0);
    }

    #[test]
    fn placement_two_sensors_second_band() {
        let mut cfg = SystemConfig::reference();
        cfg.n_s = 2;
        cfg.n_f = 8;
        cfg.k_groups = 2;
        cfg.shift_axis = default_shift_axis(8);
        let layout = place_sensors(&cfg);
        // Direct evaluation of the placement rule for sub-band 2 of 8.
        assert!((layout.angle(0, 1) - PI / 8.0).abs() < 1e-15);
        assert!((layout.angle(1, 1) - (PI + PI / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn placement_uniform_spacing_and_rotation_invariance() {
        let mut cfg = SystemConfig::reference();
        cfg.n_s = 3;
        cfg.n_f = 8;
        cfg.k_groups = 3;
        cfg.shift_axis = default_shift_axis(8);
        let layout = place_sensors(&cfg);
        let mut all: Vec<f64> = layout.angles().to_vec();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(all.len(), 24);
        let step = 2.0 * PI / 24.0;
        for (k, a) in all.iter().enumerate() {
            assert!((a - k as f64 * step).abs() < 1e-12, "angle {k} = {a}");
        }
        // Rotating the whole multiset by one step reproduces it.
        let tau = 2.0 * PI;
        let mut rotated: Vec<f64> = all
            .iter()
            .map(|a| {
                let r = (a + step).rem_euclid(tau);
                if (r - tau).abs() < 1e-9 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        rotated.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in all.iter().zip(rotated.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn placement_increasing_in_sub_band() {
        let cfg = SystemConfig::reference();
        let layout = place_sensors(&cfg);
        for i in 0..cfg.n_s {
            for j in 1..cfg.n_f {
                assert!(layout.angle(i, j) > layout.angle(i, j - 1));
            }
        }
    }

    #[test]
    fn min_sensor_count_reference_values() {
        let cfg = SystemConfig::reference();
        // -2 ln(0.1) / (1e6 * (2.5e-3)^2 * tan(pi/72)) = 16.88 -> 17
        assert_eq!(min_sensor_count(&cfg, 0.1).unwrap(), 17);
        // -2 ln(0.01) / denom = 33.75 -> 34
        assert_eq!(min_sensor_count(&cfg, 0.01).unwrap(), 34);
        // ln(1) = 0
        assert_eq!(min_sensor_count(&cfg, 1.0).unwrap(), 0);
    }

    #[test]
    fn min_sensor_count_rejects_bad_tau() {
        let cfg = SystemConfig::reference();
        assert!(min_sensor_count(&cfg, 0.0).is_err());
        assert!(min_sensor_count(&cfg, -0.2).is_err());
        assert!(min_sensor_count(&cfg, 1.5).is_err());
    }

    #[test]
    fn prob_no_vessel_reference_value() {
        let cfg = SystemConfig::reference();
        let p = prob_no_vessel(&cfg);
        // mean = 0.5 * 1e6 * 30 * (2.5e-3)^2 * tan(pi/72) = 4.0932
        assert!((p - 0.0167).abs() < 2e-4, "p = {p}");
    }

    #[test]
    fn prob_no_vessel_zero_density() {
        let mut cfg = SystemConfig::reference();
        cfg.lambda_b = 0.0;
        assert_eq!(prob_no_vessel(&cfg), 1.0);
    }

    #[test]
    fn prob_no_vessel_doubling_sensors_squares() {
        let cfg = SystemConfig::reference();
        let p30 = prob_no_vessel_at(&cfg, 30);
        let p60 = prob_no_vessel_at(&cfg, 60);
        assert!((p60 - p30 * p30).abs() < 1e-12);
    }

    #[test]
    fn prob_no_vessel_strictly_decreasing() {
        let base = SystemConfig::reference();
        let p0 = prob_no_vessel(&base);
        for field in ["lambda_b", "h_c", "alpha"] {
            let mut cfg = base.clone();
            match field {
                "lambda_b" => cfg.lambda_b *= 1.5,
                "h_c" => cfg.h_c *= 1.5,
                "alpha" => cfg.alpha *= 1.5,
                _ => unreachable!(),
            }
            assert!(prob_no_vessel(&cfg) < p0, "not decreasing in {field}");
        }
        assert!(prob_no_vessel_at(&base, 31) < p0);
    }

    #[test]
    fn min_sensor_count_is_smallest_satisfying_bound() {
        // Cross-check against the no-vessel probability over several targets.
        let cfg = SystemConfig::reference();
        for tau in [0.5, 0.2, 0.1, 0.05, 0.01, 0.001] {
            let n = min_sensor_count(&cfg, tau).unwrap();
            assert!(prob_no_vessel_at(&cfg, n as usize) <= tau + 1e-12);
            if n > 0 {
                assert!(prob_no_vessel_at(&cfg, n as usize - 1) > tau);
            }
        }
    }

    #[test]
    fn scenario_file_round_trip_and_strictness() {
        let text = r#"{
            "lambda_b": 1e6, "lambda_0": 2.6e10, "u": 0.45,
            "r_f": 5e-3, "r_b": 2.5e-3, "h_c": 2.5e-3,
            "alpha": 0.08726646259971647,
            "s_l": 3e-9, "s_u": 3e-7,
            "n_s": 30, "n_f": 148,
            "p_t_dbm": 10.0, "g_t_dbi": 30.0, "g_r_dbi": 30.0,
            "sigma_m": 1.0, "sigma_c": 1.0, "upsilon": 1.0,
            "k_groups": 4, "seed": 7
        }"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        assert!((cfg.p_t - 0.01).abs() < 1e-15);
        assert!((cfg.g_t - 1000.0).abs() < 1e-9);
        assert_eq!(cfg.shift_axis.len(), 149);
        assert!(cfg.fixed_vasculature);

        // Unknown keys are rejected.
        let bad = text.replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        assert!(SystemConfig::from_json(&bad).is_err());
    }

    #[test]
    fn validation_rejects_inverted_geometry() {
        let mut cfg = SystemConfig::reference();
        cfg.r_b = cfg.r_f;
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::reference();
        cfg.s_l = cfg.s_u;
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::reference();
        cfg.k_groups = cfg.n_s + 1;
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::reference();
        cfg.shift_axis[5] = cfg.shift_axis[4];
        assert!(cfg.validate().is_err());
    }
}
