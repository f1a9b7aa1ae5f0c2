use coopraman::scenario::{SystemConfig, VesselModel};
use coopraman::channel::AttenuationModel;
use coopraman::spectrum::{bpe_reference, synth_spectrum};

fn dense_cfg() -> SystemConfig {
    let mut cfg = SystemConfig::reference();
    cfg.analytic_vessel_model = VesselModel::AreaConsistent;
    cfg.lambda_b = 1e7;
    cfg.s_l = 1.5e-7;
    cfg.alpha = std::f64::consts::PI / 18.0;
    cfg.seed = 3;
    cfg
}

#[test]
fn diag() {
    let json_cfg = SystemConfig::from_file(std::path::Path::new(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/dense_vasculature.json"),
    ))
    .unwrap();
    let test_cfg = dense_cfg();
    let pairs = [
        ("lambda_b", json_cfg.lambda_b, test_cfg.lambda_b),
        ("lambda_0", json_cfg.lambda_0, test_cfg.lambda_0),
        ("u", json_cfg.u, test_cfg.u),
        ("r_f", json_cfg.r_f, test_cfg.r_f),
        ("r_b", json_cfg.r_b, test_cfg.r_b),
        ("h_c", json_cfg.h_c, test_cfg.h_c),
        ("alpha", json_cfg.alpha, test_cfg.alpha),
        ("s_l", json_cfg.s_l, test_cfg.s_l),
        ("s_u", json_cfg.s_u, test_cfg.s_u),
        ("p_t", json_cfg.p_t, test_cfg.p_t),
        ("g_t", json_cfg.g_t, test_cfg.g_t),
        ("g_r", json_cfg.g_r, test_cfg.g_r),
        ("sigma_m", json_cfg.sigma_m, test_cfg.sigma_m),
        ("sigma_c", json_cfg.sigma_c, test_cfg.sigma_c),
        ("upsilon", json_cfg.upsilon, test_cfg.upsilon),
        ("delta_t", json_cfg.delta_t, test_cfg.delta_t),
        ("lambda_exc", json_cfg.lambda_exc, test_cfg.lambda_exc),
    ];
    for (name, a, b) in pairs {
        if a.to_bits() != b.to_bits() {
            println!("FIELD {name} differs: {a:?} vs {b:?}");
        }
    }
    assert_eq!(json_cfg.n_s, test_cfg.n_s);
    assert_eq!(json_cfg.seed, test_cfg.seed);
    assert_eq!(json_cfg.k_groups, test_cfg.k_groups);
    assert_eq!(json_cfg.shift_axis, test_cfg.shift_axis);

    // Channel comparison: calibration file vs flat()
    let from_file = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &json_cfg,
    )
    .unwrap();
    let flat = AttenuationModel::flat(276.3102111592855, json_cfg.n_f).unwrap();
    for j in 0..json_cfg.n_f {
        let a = from_file.mu(coopraman::channel::Band::Sub(j)).unwrap();
        let b = flat.mu(coopraman::channel::Band::Sub(j)).unwrap();
        if a.to_bits() != b.to_bits() {
            println!("MU band {j}: {a:?} vs {b:?}");
            break;
        }
    }

    // Run one n_s=5 point both ways and compare.
    let truth = synth_spectrum(&bpe_reference(), &json_cfg).unwrap();
    let patched_json = coopraman::harness::apply_parameter(&json_cfg, "n_s", 5.0).unwrap();
    let patched_test = coopraman::harness::apply_parameter(&test_cfg, "n_s", 5.0).unwrap();
    let o1 = coopraman::harness::run_point(&patched_json, &truth, &from_file, true, &[1.5], 200, 3).unwrap();
    let o2 = coopraman::harness::run_point(&patched_test, &truth, &flat, true, &[1.5], 200, 3).unwrap();
    let d1 = o1.iter().filter(|t| t.distributed.mse > 1.5).count();
    let d2 = o2.iter().filter(|t| t.distributed.mse > 1.5).count();
    println!("outage json-config {d1}/200 vs test-config {d2}/200");
}

#[test]
fn diag2() {
    let cfg = SystemConfig::from_file(std::path::Path::new(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/dense_vasculature.json"),
    ))
    .unwrap();
    let model = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &cfg,
    )
    .unwrap();
    let truth = synth_spectrum(&bpe_reference(), &cfg).unwrap();
    let spec = coopraman::harness::SweepSpec::from_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../sweeps/sensor_count.json"
        ))
        .unwrap(),
    )
    .unwrap();
    let result = coopraman::harness::run_sweep(&spec, &cfg, &truth, &model, true, cfg.seed).unwrap();
    for r in &result.rows {
        if r.estimator == "distributed" && r.tau_t == 1.5 && r.param_value == 5.0 {
            println!("run_sweep distributed outage at n_s=5: {}", r.outage);
        }
    }
}

#[test]
fn diag3() {
    let cfg = SystemConfig::from_file(std::path::Path::new("/tmp/dense5.json")).unwrap();
    let model = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &cfg,
    )
    .unwrap();
    let truth = synth_spectrum(&bpe_reference(), &cfg).unwrap();
    let outputs =
        coopraman::harness::run_point(&cfg, &truth, &model, true, &[1.5, 3.0], 200, cfg.seed)
            .unwrap();
    let d: Vec<f64> = outputs.iter().map(|t| t.distributed.mse).collect();
    println!("in-process exceed 1.5: {} /200", d.iter().filter(|m| **m > 1.5).count());
    println!(
        "first five: {:?}",
        d.iter().take(5).map(|m| (m * 1e6).round() / 1e6).collect::<Vec<_>>()
    );
}

#[test]
fn diag4() {
    let cfg = SystemConfig::from_file(std::path::Path::new("/tmp/dense5.json")).unwrap();
    let model = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &cfg,
    )
    .unwrap();
    let h = coopraman::allocation::expected_channel(&cfg, &model, true).unwrap();
    let alloc = coopraman::allocation::allocate_power(&h, cfg.per_sensor_power()).unwrap();
    println!("in-process P[0] = {}", alloc.per_band()[0]);
    println!("in-process P[1] = {}", alloc.per_band()[1]);
    println!("in-process H[0] = {}", h.per_band()[0]);
}

#[test]
fn diag5() {
    use coopraman::harness::{build_scenes, draw_vessel_field, stream_rng};
    use coopraman::photonics::{sense_all, DetectionMode};
    let cfg = SystemConfig::from_file(std::path::Path::new("/tmp/dense5.json")).unwrap();
    let model = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &cfg,
    )
    .unwrap();
    let truth = synth_spectrum(&bpe_reference(), &cfg).unwrap();
    let h = coopraman::allocation::expected_channel(&cfg, &model, true).unwrap();
    let alloc = coopraman::allocation::allocate_power(&h, cfg.per_sensor_power()).unwrap();
    let fixed = draw_vessel_field(&cfg, &mut stream_rng(cfg.seed, 0));
    let mut rng = stream_rng(cfg.seed, 1);
    let scenes = build_scenes(&cfg, Some(&fixed), &mut rng);
    let counts = sense_all(
        &cfg,
        &coopraman::scenario::place_sensors(&cfg),
        &scenes,
        &truth,
        &alloc,
        &model,
        DetectionMode::Poisson,
        true,
        &mut rng,
    )
    .unwrap();
    std::fs::write("/tmp/ph_test.csv", counts.to_csv()).unwrap();
    println!("wrote /tmp/ph_test.csv");
}

#[test]
fn diag6() {
    use coopraman::harness::{build_scenes, draw_vessel_field, stream_rng};
    let cfg = SystemConfig::from_file(std::path::Path::new("/tmp/dense5.json")).unwrap();
    let fixed = draw_vessel_field(&cfg, &mut stream_rng(cfg.seed, 0));
    let mut rng = stream_rng(cfg.seed, 1);
    let scenes = build_scenes(&cfg, Some(&fixed), &mut rng);
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
    std::fs::write(
        "/tmp/scenes_test.json",
        serde_json::to_string_pretty(&dump).unwrap(),
    )
    .unwrap();
    println!("wrote scenes");
}

#[test]
fn diag7() {
    use coopraman::harness::{build_scenes, draw_vessel_field, stream_rng};
    let cfg = SystemConfig::from_file(std::path::Path::new("/tmp/dense5.json")).unwrap();
    let model = AttenuationModel::from_calibration_json(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../channels/flat_diffuse.json"
        ))
        .unwrap(),
        &cfg,
    )
    .unwrap();
    let truth = synth_spectrum(&bpe_reference(), &cfg).unwrap();
    let h = coopraman::allocation::expected_channel(&cfg, &model, true).unwrap();
    let alloc = coopraman::allocation::allocate_power(&h, cfg.per_sensor_power()).unwrap();
    let fixed = draw_vessel_field(&cfg, &mut stream_rng(cfg.seed, 0));
    let mut rng = stream_rng(cfg.seed, 1);
    let scenes = build_scenes(&cfg, Some(&fixed), &mut rng);
    let mut out = String::new();
    for sensor in 0..cfg.n_s {
        for band in 0..cfg.n_f {
            let reading = coopraman::photonics::sense_one(
                &cfg,
                &model,
                &scenes[sensor * cfg.n_f + band],
                truth.as_slice()[band],
                alloc.per_band()[band],
                sensor,
                band,
                coopraman::photonics::DetectionMode::Mean,
                true,
                &mut rng,
            )
            .unwrap();
            out.push_str(&format!("{} {:016x}\n", reading.count, reading.y_power.to_bits()));
        }
    }
    std::fs::write(std::env::var("POWDUMP").unwrap(), out).unwrap();
    println!("dumped");
}
