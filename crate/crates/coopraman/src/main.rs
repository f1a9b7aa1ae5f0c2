//! Command-line front end: single runs, parameter sweeps, capacity and
//! allocation tables. Errors print one JSON object on stderr and exit
//! nonzero so callers can script against the tool.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use coopraman::allocation::{allocate_power, expected_channel};
use coopraman::capacity::estimate_system_capacity;
use coopraman::channel::AttenuationModel;
use coopraman::error::{Error, Result};
use coopraman::harness::{
    self, build_scenes, run_sweep, stream_rng, RunManifest, SweepSpec, TrialOutput,
};
use coopraman::photonics::{sense_all, DetectionMode, PhotonMatrix};
use coopraman::scenario::{place_sensors, SystemConfig};
use coopraman::spectrum::{bpe_reference, synth_spectrum, PeakList, SpectrumVector};

#[derive(Parser)]
#[command(
    name = "coopraman",
    version,
    about = "Cooperative Raman spectroscopy simulator and estimator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonInputs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Reference spectrum: a peak-list JSON or a spectrum CSV. Defaults to
    /// the built-in BPE reporter lines.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Channel calibration JSON. Defaults to a flat 30 dB loss per leg
    /// across the cone height.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Disable Rayleigh fading for deterministic channels.
    #[arg(long)]
    no_fading: bool,
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more full sensing trials and report reconstruction quality.
    Run {
        #[command(flatten)]
        common: CommonInputs,
        /// Number of independent trials.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Outage thresholds, comma separated.
        #[arg(long, default_value = "1.5,3", value_delimiter = ',')]
        thresholds: Vec<f64>,
        /// Write the report JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the first trial's photon counts as CSV.
        #[arg(long)]
        dump_photons: Option<PathBuf>,
        /// Dump the first trial's beam scenes as JSON.
        #[arg(long)]
        dump_scenes: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a sweep-spec JSON file.
    Sweep {
        #[command(flatten)]
        common: CommonInputs,
        /// Sweep specification JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Override the sweep file's output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the run manifest here (default: alongside the CSV).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Estimate per-sub-band ergodic capacities by Monte Carlo.
    Capacity {
        #[command(flatten)]
        common: CommonInputs,
        /// Monte Carlo samples per sub-band.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the capacity-equalizing power allocation.
    Allocate {
        #[command(flatten)]
        common: CommonInputs,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the spectrum from a photon-count matrix (or from one
    /// freshly simulated trial) and score it against the reference.
    Reconstruct {
        #[command(flatten)]
        common: CommonInputs,
        /// Photon-count CSV from `run --dump-photons`; omitted: simulate one
        /// trial first.
        #[arg(long)]
        photons: Option<PathBuf>,
        /// Outage thresholds, comma separated.
        #[arg(long, default_value = "1.5,3", value_delimiter = ',')]
        thresholds: Vec<f64>,
        /// Write the estimated spectra CSV here instead of stdout.
        #[arg(long)]
        out_spectrum: Option<PathBuf>,
        /// Write the report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Inputs {
    cfg: SystemConfig,
    truth: SpectrumVector,
    model: AttenuationModel,
    fading: bool,
    seed: u64,
}

fn load_inputs(common: &CommonInputs) -> Result<Inputs> {
    let mut cfg = SystemConfig::from_file(&common.scenario)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let truth = match &common.spectrum {
        None => synth_spectrum(&bpe_reference(), &cfg)?,
        Some(path) => load_spectrum(path, &cfg)?,
    };
    let model = match &common.channel {
        None => AttenuationModel::default_for(&cfg),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            AttenuationModel::from_calibration_json(&text, &cfg)?
        }
    };
    let seed = cfg.seed;
    Ok(Inputs {
        cfg,
        truth,
        model,
        fading: !common.no_fading,
        seed,
    })
}

fn load_spectrum(path: &Path, cfg: &SystemConfig) -> Result<SpectrumVector> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => SpectrumVector::from_csv(&text, cfg),
        _ => synth_spectrum(&PeakList::from_json(&text)?, cfg),
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(p, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn install_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn cmd_run(
    common: CommonInputs,
    trials: usize,
    thresholds: Vec<f64>,
    out: Option<PathBuf>,
    dump_photons: Option<PathBuf>,
    dump_scenes: Option<PathBuf>,
) -> Result<()> {
    install_pool(common.jobs)?;
    let inputs = load_inputs(&common)?;
    let cfg = &inputs.cfg;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }

    if dump_photons.is_some() || dump_scenes.is_some() {
        dump_first_trial(&inputs, &dump_photons, &dump_scenes)?;
    }

    let outputs = harness::run_point(
        cfg,
        &inputs.truth,
        &inputs.model,
        inputs.fading,
        &thresholds,
        trials,
        inputs.seed,
    )?;
    let report = RunReport::new(cfg, &outputs, inputs.seed, inputs.fading);
    write_or_print(&out, &serde_json::to_string_pretty(&report)?)?;
    if out.is_some() {
        eprintln!("wrote report for {trials} trial(s)");
    } else {
        println!();
    }
    Ok(())
}

/// Reproduce trial 0's intermediate products for inspection.
fn dump_first_trial(
    inputs: &Inputs,
    photons: &Option<PathBuf>,
    scenes_out: &Option<PathBuf>,
) -> Result<()> {
    let cfg = &inputs.cfg;
    let h = expected_channel(cfg, &inputs.model, inputs.fading)?;
    let alloc = allocate_power(&h, cfg.per_sensor_power())?;
    let fixed = if cfg.fixed_vasculature {
        Some(harness::draw_vessel_field(cfg, &mut stream_rng(inputs.seed, 0)))
    } else {
        None
    };
    let mut rng = stream_rng(inputs.seed, 1);
    let scenes = build_scenes(cfg, fixed.as_ref(), &mut rng);
    if let Some(path) = scenes_out {
        let dump: Vec<serde_json::Value> = scenes
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                serde_json::json!({
                    "sensor": idx / cfg.n_f,
                    "sub_band": idx % cfg.n_f,
                    "vessels": s.vessels,
                    "particles": s.particles,
                })
            })
            .collect();
        write_or_print(&Some(path.clone()), &serde_json::to_string_pretty(&dump)?)?;
    }
    if let Some(path) = photons {
        let layout = place_sensors(cfg);
        let counts: PhotonMatrix = sense_all(
            cfg,
            &layout,
            &scenes,
            &inputs.truth,
            &alloc,
            &inputs.model,
            DetectionMode::Poisson,
            inputs.fading,
            &mut rng,
        )?;
        write_or_print(&Some(path.clone()), &counts.to_csv())?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct RunReport<'a> {
    version: &'static str,
    seed: u64,
    fading: bool,
    trials: usize,
    centralized_median_mse: f64,
    distributed_median_mse: f64,
    config: &'a SystemConfig,
    per_trial: &'a [TrialOutput],
}

impl<'a> RunReport<'a> {
    fn new(cfg: &'a SystemConfig, outputs: &'a [TrialOutput], seed: u64, fading: bool) -> Self {
        let mut central: Vec<f64> = outputs.iter().map(|o| o.centralized.mse).collect();
        let mut dist: Vec<f64> = outputs.iter().map(|o| o.distributed.mse).collect();
        central.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else if v.len() % 2 == 1 {
                v[v.len() / 2]
            } else {
                0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
            }
        };
        RunReport {
            version: harness::VERSION,
            seed,
            fading,
            trials: outputs.len(),
            centralized_median_mse: med(&central),
            distributed_median_mse: med(&dist),
            config: cfg,
            per_trial: outputs,
        }
    }
}

fn cmd_sweep(
    common: CommonInputs,
    spec_path: PathBuf,
    out: Option<PathBuf>,
    manifest_path: Option<PathBuf>,
) -> Result<()> {
    install_pool(common.jobs)?;
    let inputs = load_inputs(&common)?;
    let spec = SweepSpec::from_json(&std::fs::read_to_string(&spec_path)?)?;
    let result = run_sweep(
        &spec,
        &inputs.cfg,
        &inputs.truth,
        &inputs.model,
        inputs.fading,
        inputs.seed,
    )?;
    let csv_path = out.or_else(|| spec.output.clone());
    write_or_print(&csv_path, &harness::sweep_csv(&result))?;
    let manifest = RunManifest {
        version: harness::VERSION,
        seed: inputs.seed,
        fading: inputs.fading,
        config: &inputs.cfg,
        parameter: Some(&spec.parameter),
        values: Some(&spec.values),
        trials: spec.trials,
        wall_time_s: Some(&result.wall_time_s),
    }
    .to_json();
    let manifest_path = manifest_path.or_else(|| {
        csv_path
            .as_ref()
            .map(|p| p.with_extension("manifest.json"))
    });
    if let Some(p) = manifest_path {
        write_or_print(&Some(p), &manifest)?;
    }
    Ok(())
}

fn cmd_capacity(common: CommonInputs, samples: usize, out: Option<PathBuf>) -> Result<()> {
    install_pool(common.jobs)?;
    let inputs = load_inputs(&common)?;
    let cfg = &inputs.cfg;
    let h = expected_channel(cfg, &inputs.model, inputs.fading)?;
    let alloc = allocate_power(&h, cfg.per_sensor_power())?;
    let mut rng = stream_rng(inputs.seed, 1);
    let estimate = estimate_system_capacity(
        cfg,
        &inputs.model,
        &alloc,
        &inputs.truth,
        samples,
        inputs.fading,
        &mut rng,
    )?;
    let centers = cfg.bin_centers();
    let mut csv = String::from("sub_band,shift_cm1,capacity_nats,se\n");
    for (j, band) in estimate.per_band.iter().enumerate() {
        csv.push_str(&format!(
            "{j},{},{},{}\n",
            centers[j], band.mean, band.standard_error
        ));
    }
    write_or_print(&out, &csv)?;
    eprintln!(
        "{}",
        serde_json::json!({
            "system_capacity_nats": estimate.total,
            "standard_error": estimate.total_standard_error,
            "clamped_samples": estimate.clamped,
            "samples_per_band": samples,
        })
    );
    Ok(())
}

fn cmd_reconstruct(
    common: CommonInputs,
    photons: Option<PathBuf>,
    thresholds: Vec<f64>,
    out_spectrum: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let inputs = load_inputs(&common)?;
    let cfg = &inputs.cfg;
    let h = expected_channel(cfg, &inputs.model, inputs.fading)?;
    let alloc = allocate_power(&h, cfg.per_sensor_power())?;
    let counts = match photons {
        Some(path) => PhotonMatrix::from_csv(&std::fs::read_to_string(path)?, cfg)?,
        None => {
            let fixed = if cfg.fixed_vasculature {
                Some(harness::draw_vessel_field(cfg, &mut stream_rng(inputs.seed, 0)))
            } else {
                None
            };
            let mut rng = stream_rng(inputs.seed, 1);
            let scenes = build_scenes(cfg, fixed.as_ref(), &mut rng);
            sense_all(
                cfg,
                &place_sensors(cfg),
                &scenes,
                &inputs.truth,
                &alloc,
                &inputs.model,
                DetectionMode::Poisson,
                inputs.fading,
                &mut rng,
            )?
        }
    };
    let trial = harness::trial_from_counts(cfg, &inputs.truth, &h, &alloc, &counts, &thresholds)?;

    let centers = cfg.bin_centers();
    let mut csv = String::from("shift_cm1,centralized,distributed\n");
    for (j, &c) in centers.iter().enumerate() {
        csv.push_str(&format!(
            "{c},{},{}\n",
            trial.centralized.eta_hat.as_slice()[j],
            trial.distributed.eta_hat.as_slice()[j]
        ));
    }
    write_or_print(&out_spectrum, &csv)?;

    let report = serde_json::json!({
        "version": harness::VERSION,
        "seed": inputs.seed,
        "fading": inputs.fading,
        "centralized": trial.centralized,
        "distributed": trial.distributed,
    });
    if let Some(path) = out {
        write_or_print(&Some(path), &serde_json::to_string_pretty(&report)?)?;
    } else if out_spectrum.is_some() {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(())
}

fn cmd_allocate(common: CommonInputs, out: Option<PathBuf>) -> Result<()> {
    let inputs = load_inputs(&common)?;
    let cfg = &inputs.cfg;
    let h = expected_channel(cfg, &inputs.model, inputs.fading)?;
    let alloc = allocate_power(&h, cfg.per_sensor_power())?;
    let centers = cfg.bin_centers();
    let mut csv = String::from("sub_band,shift_cm1,power_w\n");
    for (j, &p) in alloc.per_band().iter().enumerate() {
        csv.push_str(&format!("{j},{},{p}\n", centers[j]));
    }
    write_or_print(&out, &csv)?;
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            common,
            trials,
            thresholds,
            out,
            dump_photons,
            dump_scenes,
        } => cmd_run(common, trials, thresholds, out, dump_photons, dump_scenes),
        Command::Sweep {
            common,
            spec,
            out,
            manifest,
        } => cmd_sweep(common, spec, out, manifest),
        Command::Capacity {
            common,
            samples,
            out,
        } => cmd_capacity(common, samples, out),
        Command::Allocate { common, out } => cmd_allocate(common, out),
        Command::Reconstruct {
            common,
            photons,
            thresholds,
            out_spectrum,
            out,
        } => cmd_reconstruct(common, photons, thresholds, out_spectrum, out),
    }
}

fn main() {
    if let Err(err) = run() {
        let kind = match &err {
            Error::Config(_) | Error::Json(_) | Error::SweepParameter(_) => "config",
            Error::UnknownBand(_) => "channel",
            Error::SubbandUnreachable { .. } => "allocation",
            Error::Dimension(_) => "dimension",
            Error::Io(_) => "io",
        };
        eprintln!(
            "{}",
            serde_json::json!({ "error": { "kind": kind, "message": err.to_string() } })
        );
        std::process::exit(2);
    }
}
