//! Cooperative Raman spectroscopy simulation and estimation.
//!
//! This crate models a ring of nanosensors that jointly excite reporter
//! nanoparticles flowing through blood vessels and reconstruct the particles'
//! Raman spectrum from photon counts. The pipeline is:
//!
//! 1. **Scene generation** (`scenario`, `vasculature`): deterministic sensor
//!    placement on the ring; random vessels and particle arrivals inside each
//!    emitter/detector beam cone.
//! 2. **Optical channel** (`channel`): per-band exponential attenuation with
//!    per-leg Rayleigh fading.
//! 3. **Sensing** (`spectrum`, `photonics`): synthetic reference spectra,
//!    molecular noise, power composition at each detector, and Poisson photon
//!    counting with dark current.
//! 4. **Information and power** (`capacity`, `allocation`): binary-input
//!    Poisson-channel capacity per sub-band and the inverse-channel power
//!    allocation that equalizes it under a ring power budget.
//! 5. **Reconstruction** (`reconstruction`): centralized fusion of raw counts
//!    and distributed fusion of one-bit quantized local estimates, scored by
//!    mean-normalized MSE and outage.
//! 6. **Experiments** (`harness`): seeded, reproducible Monte Carlo trials
//!    and parameter sweeps with CSV/JSON outputs.

pub mod allocation;
pub mod capacity;
pub mod channel;
pub mod constants;
pub mod error;
pub mod harness;
pub mod photonics;
pub mod reconstruction;
pub mod scenario;
pub mod spectrum;
pub mod vasculature;

pub use allocation::{allocate_power, expected_channel, ExpectedChannel, PowerAllocation};
pub use channel::{AttenuationModel, Band, LinkGain};
pub use error::{Error, Result};
pub use harness::{run_point, run_sweep, SweepSpec, TrialOutput};
pub use photonics::{DetectionMode, PhotonMatrix};
pub use reconstruction::{
    centralized_estimate, distributed_estimate, score, ReconstructionReport,
};
pub use scenario::{place_sensors, SensorLayout, SystemConfig, VesselModel};
pub use spectrum::{bpe_reference, synth_spectrum, SpectrumVector};
pub use vasculature::{sample_particles, sample_vessels, BeamScene};
