//! Random blood-vessel scenes inside a beam cone and particle arrivals,
//! plus the analytic equivalent-vessel quantities used by power allocation.
//!
//! The simulated truth draws vessels per beam from a Poisson law whose mean is
//! the beam's axial cross-section triangle area times the areal density. The
//! analytic path aggregates vessels per horizontal sub-region into a single
//! equivalent vessel; see [`equivalent_vessel`].

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{SystemConfig, VesselModel};

/// One straight vessel chord crossing a beam cone.
#[derive(Debug, Clone, Serialize)]
pub struct VesselSegment {
    /// Distance from the emitter along the beam axis, m.
    pub depth: f64,
    /// Length of the vessel inside the cone at that depth, m.
    pub chord: f64,
    /// Vessel cross-section area, m^2.
    pub cross_section: f64,
}

/// A particle excited inside a beam; it inherits its host vessel's depth
/// because every particle on one horizontal plane of the cone is equidistant
/// from the emitter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Particle {
    pub depth: f64,
    pub vessel: usize,
}

/// Everything random inside one emitter/detector beam cone.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BeamScene {
    pub vessels: Vec<VesselSegment>,
    pub particles: Vec<Particle>,
}

fn poisson_draw(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Sample a chord length at depth `depth`: the transverse offset is uniform
/// over the half-width, giving chord 2*sqrt(w^2 - x^2) with w = depth*tan(alpha/2).
pub fn sample_chord(depth: f64, tan_half_angle: f64, rng: &mut impl Rng) -> f64 {
    let half_width = depth * tan_half_angle;
    let offset = half_width * rng.gen::<f64>();
    2.0 * (half_width * half_width - offset * offset).max(0.0).sqrt()
}

/// Draw the vessels crossing one beam cone.
///
/// Count ~ Poisson(0.5 * lambda_b * h_c^2 * tan(alpha/2)); each vessel gets a
/// depth uniform on (0, h_c], a cross-section uniform on [s_l, s_u], and a
/// chord from [`sample_chord`].
pub fn sample_vessels(cfg: &SystemConfig, rng: &mut impl Rng) -> Vec<VesselSegment> {
    let count = poisson_draw(cfg.beam_vessel_mean(), rng);
    let tan_half = cfg.tan_half_angle();
    (0..count)
        .map(|_| {
            // 1 - U in (0, 1] keeps the depth strictly positive.
            let depth = cfg.h_c * (1.0 - rng.gen::<f64>());
            VesselSegment {
                depth,
                chord: sample_chord(depth, tan_half, rng),
                cross_section: cfg.s_l + (cfg.s_u - cfg.s_l) * rng.gen::<f64>(),
            }
        })
        .collect()
}

/// Populate vessels with particles: per vessel the count is
/// Poisson(lambda_0 * s_b * l / u), all assigned the vessel's depth.
pub fn sample_particles(
    cfg: &SystemConfig,
    vessels: &[VesselSegment],
    rng: &mut impl Rng,
) -> BeamScene {
    let mut particles = Vec::new();
    for (idx, vessel) in vessels.iter().enumerate() {
        let mean = cfg.lambda_0 * vessel.cross_section * vessel.chord / cfg.u;
        let count = poisson_draw(mean, rng);
        particles.extend((0..count).map(|_| Particle {
            depth: vessel.depth,
            vessel: idx,
        }));
    }
    BeamScene {
        vessels: vessels.to_vec(),
        particles,
    }
}

/// Analytic aggregation of all vessels in one sub-region into a single
/// equivalent vessel at depth `d`.
#[derive(Debug, Clone, Copy)]
pub struct EquivalentVessel {
    /// Average chord length at this depth: pi * d * tan(alpha/2) / 2.
    pub mean_chord: f64,
    /// Expected vessel count in the sub-region (model-variant dependent).
    pub vessel_count: f64,
    /// Equivalent vessel length: mean_chord * vessel_count.
    pub length: f64,
    /// Equivalent cross-section: midpoint of the uniform law, (s_u + s_l)/2.
    pub cross_section: f64,
}

impl EquivalentVessel {
    /// Expected particle count hosted by the equivalent vessel.
    pub fn expected_particles(&self, cfg: &SystemConfig) -> f64 {
        cfg.lambda_0 * self.cross_section * self.length / cfg.u
    }
}

/// Height of one analytic sub-region: the largest vessel cross-section
/// diameter, 2*sqrt(s_u/pi).
pub fn sub_region_height(cfg: &SystemConfig) -> f64 {
    2.0 * (cfg.s_u / std::f64::consts::PI).sqrt()
}

/// Equivalent vessel of the sub-region of nominal height centered at depth `d`.
pub fn equivalent_vessel(cfg: &SystemConfig, d: f64) -> Result<EquivalentVessel> {
    if !(d > 0.0 && d <= cfg.h_c) {
        return Err(Error::Config(format!(
            "depth {d} outside the beam cone (0, {}]",
            cfg.h_c
        )));
    }
    Ok(equivalent_vessel_in_region(cfg, d, sub_region_height(cfg)))
}

/// Equivalent vessel with an explicit region height; the sub-region
/// decomposition uses this so the final, possibly truncated region keeps the
/// region heights summing to h_c.
pub fn equivalent_vessel_in_region(cfg: &SystemConfig, d: f64, height: f64) -> EquivalentVessel {
    let tan_half = cfg.tan_half_angle();
    let mean_chord = std::f64::consts::PI * d * tan_half / 2.0;
    let vessel_count = match cfg.analytic_vessel_model {
        VesselModel::Paper => cfg.lambda_b * d * height * tan_half / (2.0 * cfg.r_f * cfg.r_f),
        VesselModel::AreaConsistent => cfg.lambda_b * d * height * tan_half,
    };
    EquivalentVessel {
        mean_chord,
        vessel_count,
        length: mean_chord * vessel_count,
        cross_section: 0.5 * (cfg.s_u + cfg.s_l),
    }
}

/// One horizontal slice of the beam cone used by the analytic path.
#[derive(Debug, Clone, Copy)]
pub struct SubRegion {
    pub center: f64,
    pub height: f64,
}

/// Slice the cone into ceil(h_c / sub_region_height) regions; the last one is
/// truncated at h_c so the heights always sum to the cone height.
pub fn sub_regions(cfg: &SystemConfig) -> Vec<SubRegion> {
    let dh = sub_region_height(cfg);
    let count = (cfg.h_c / dh).ceil().max(1.0) as usize;
    (0..count)
        .map(|n| {
            let lo = n as f64 * dh;
            let hi = ((n + 1) as f64 * dh).min(cfg.h_c);
            SubRegion {
                center: 0.5 * (lo + hi),
                height: hi - lo,
            }
        })
        .collect()
}
