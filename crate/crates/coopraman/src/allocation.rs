//! Analytic expected detected power and capacity-equalizing power allocation.
//!
//! The expected channel aggregates each cone sub-region's equivalent vessel:
//! expected particle count times the two-leg gain at the region's center
//! depth, times the Rayleigh product moment when fading is on. Power is then
//! spread inversely to the expected channel so every sub-band carries the
//! same product `H[j] * P[j]`. This is the opposite of water-filling, which
//! would starve exactly the sub-bands whose estimates need power the most.

use serde::Serialize;

use crate::channel::{fading_power_moment, AttenuationModel, Band};
use crate::error::{Error, Result};
use crate::scenario::SystemConfig;
use crate::vasculature::{equivalent_vessel_in_region, sub_regions};

/// Expected summed two-leg gain per sub-band, fading moment included.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedChannel {
    h: Vec<f64>,
}

impl ExpectedChannel {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "expected channel gains must be finite and non-negative".into(),
            ));
        }
        Ok(ExpectedChannel { h })
    }

    pub fn per_band(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Per-sub-band transmit power, W.
#[derive(Debug, Clone, Serialize)]
pub struct PowerAllocation {
    p: Vec<f64>,
}

impl PowerAllocation {
    pub fn uniform(p_each: f64, n_f: usize) -> Self {
        PowerAllocation {
            p: vec![p_each; n_f],
        }
    }

    pub fn per_band(&self) -> &[f64] {
        &self.p
    }

    pub fn budget(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Expected sum of two-leg gains for one sub-band:
/// fading moment * sum over sub-regions of E{N_p} * g(exc, d_n) * g(j, d_n),
/// with both legs evaluated at the region's center depth.
pub fn subband_expected_gain(
    cfg: &SystemConfig,
    model: &AttenuationModel,
    sub_band: usize,
    fading: bool,
) -> Result<f64> {
    let moment = fading_power_moment(cfg.sigma_c, fading);
    let mut total = 0.0;
    for region in sub_regions(cfg) {
        let ev = equivalent_vessel_in_region(cfg, region.center, region.height);
        let two_leg = model.path_gain(Band::Excitation, region.center)?
            * model.path_gain(Band::Sub(sub_band), region.center)?;
        total += ev.expected_particles(cfg) * two_leg;
    }
    Ok(moment * total)
}

/// Expected detected power of sub-band `j` at transmit power `p_t_j` and
/// scattering coefficient `eta`.
pub fn expected_detected_power(
    cfg: &SystemConfig,
    model: &AttenuationModel,
    sub_band: usize,
    p_t_j: f64,
    eta: f64,
    fading: bool,
) -> Result<f64> {
    Ok(subband_expected_gain(cfg, model, sub_band, fading)? * p_t_j * cfg.g_t * eta * cfg.g_r)
}

/// Expected channel for every sub-band. Independent of any transmit power or
/// scattering coefficient by construction.
pub fn expected_channel(
    cfg: &SystemConfig,
    model: &AttenuationModel,
    fading: bool,
) -> Result<ExpectedChannel> {
    let h = (0..cfg.n_f)
        .map(|j| subband_expected_gain(cfg, model, j, fading))
        .collect::<Result<Vec<_>>>()?;
    ExpectedChannel::new(h)
}

/// Inverse-channel power allocation under a total budget:
/// `P[j] = P_s * (1/H[j]) / sum_m(1/H[m])`.
///
/// This equalizes `H[j] * P[j]` across sub-bands and conserves the budget
/// simultaneously. Any vanishing `H[j]` admits no finite equalizing power.
pub fn allocate_power(h: &ExpectedChannel, p_s: f64) -> Result<PowerAllocation> {
    if p_s <= 0.0 || !p_s.is_finite() {
        return Err(Error::Config(format!("power budget must be positive, got {p_s}")));
    }
    if let Some(index) = h.per_band().iter().position(|&v| v <= 0.0) {
        return Err(Error::SubbandUnreachable { index });
    }
    let inv_sum: f64 = h.per_band().iter().map(|v| 1.0 / v).sum();
    let level = p_s / inv_sum;
    Ok(PowerAllocation {
        p: h.per_band().iter().map(|v| level / v).collect(),
    })
}
