//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Run with `cargo test --release --test acceptance` for representative
//! timings; the two runtime-limited criteria are calibrated for release
//! builds but hold in debug on typical hardware too.

use edgediff::color::{cielab_f, table, xyz_to_cielab, WhitePoint, CIELAB_DELTA};
use edgediff::csf::{build_csf_raster, CsfKind, CsfModel, FrequencyGrid};
use edgediff::filtering::{
    bilateral_direct, bilateral_fast, edge_aware_csf_filter, frequency_filter, BilateralParams,
};
use edgediff::harness::{run_sweep, synthetic_scene, tonemap_reinhard, SceneKind, SweepSpec};
use edgediff::metrics::{difference_maps, minkowski_pool};
use edgediff::pipeline::{run_model, ModelKind, PipelineConfig};
use edgediff::{ChannelPlane, OpponentImage, Space, TristimulusImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn random_plane(w: usize, h: usize, rng: &mut ChaCha8Rng) -> ChannelPlane {
    ChannelPlane::from_fn(w, h, |_, _| rng.gen_range(0.0..100.0))
}

#[test]
fn criterion_1_fast_bilateral_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let sigma_s = 3.0;
    let sigma_r = 10.0;
    let ks = [4usize, 8, 16, 32, 64];
    let mut mean_err_by_k = vec![0.0f64; ks.len()];
    let mut worst_rel_err_k32 = 0.0f64;

    for _ in 0..20 {
        let plane = random_plane(64, 64, &mut rng);
        let (lo, hi) = plane.min_max();
        let range = hi - lo;
        let direct = bilateral_direct(
            &plane,
            &plane,
            &BilateralParams::new(sigma_s, sigma_r, 2, 1e-6).unwrap(),
        )
        .unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let fast = bilateral_fast(
                &plane,
                &plane,
                &BilateralParams::new(sigma_s, sigma_r, k, 1e-6).unwrap(),
            )
            .unwrap();
            let err = fast.max_abs_diff(&direct);
            mean_err_by_k[i] += err / 20.0;
            if k == 32 {
                worst_rel_err_k32 = worst_rel_err_k32.max(err / range);
            }
        }
    }

    let within_tolerance = worst_rel_err_k32 <= 0.02;
    let monotone = mean_err_by_k.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let elapsed = start.elapsed();
    let in_time = elapsed.as_secs_f64() < 30.0;
    report(
        "1 (fast-bilateral oracle)",
        within_tolerance && monotone && in_time,
        &format!(
            "worst K=32 error {:.4}% of range, mean errors by K {:?}, runtime {:.1?}",
            100.0 * worst_rel_err_k32,
            mean_err_by_k
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>(),
            elapsed
        ),
    );
}

#[test]
fn criterion_2_edge_aware_linear_limit() {
    let (w, h) = (128usize, 128usize);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let img = OpponentImage::from_fn(w, h, Space::Acc, |_, _| {
        [
            rng.gen_range(0.0..1.0),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
        ]
    });
    let grid = FrequencyGrid::new(2 * w, 2 * h, 60.0).unwrap();
    let rasters = [
        build_csf_raster(&CsfModel::achromatic_default(), &grid, true),
        build_csf_raster(&CsfModel::red_green_default(), &grid, false),
        build_csf_raster(&CsfModel::blue_yellow_default(), &grid, false),
    ];
    let guide = img.channel(0);
    let params = BilateralParams::new(2.0, 1e6, 32, 1e-6).unwrap();
    let edge = edge_aware_csf_filter(&img, &guide, &rasters, &params).unwrap();
    let mut worst = 0.0f64;
    for ch in 0..3 {
        let plain = frequency_filter(&img.channel(ch), &rasters[ch]).unwrap();
        worst = worst.max(edge.channel(ch).max_abs_diff(&plain));
    }
    report(
        "2 (edge-aware linear limit)",
        worst < 1e-3,
        &format!("max abs deviation from plain frequency filter {worst:.3e}"),
    );
}

#[test]
fn criterion_3_color_science_exactness() {
    // CIELAB of the reference white.
    let white = WhitePoint::d65();
    let lab = xyz_to_cielab(
        &TristimulusImage::constant(1, 1, white.as_array(), 100.0),
        &white,
    )
    .unwrap();
    let p = lab.pixel(0, 0);
    let white_ok =
        (p[0] - 100.0).abs() < 1e-9 && p[1].abs() < 1e-9 && p[2].abs() < 1e-9;

    // Branch continuity of the compressive nonlinearity.
    let d3 = CIELAB_DELTA.powi(3);
    let gap = (cielab_f(d3 * (1.0 + 1e-12)) - cielab_f(d3 * (1.0 - 1e-12))).abs();
    let continuity_ok = gap < 1e-9;

    // Round trip of every matrix in the embedded table.
    let mut worst_rt = 0.0f64;
    for name in table().matrix_names() {
        let m = table().matrix(name).unwrap();
        let inv = m.inverse();
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let rt = inv.apply(m.apply(e));
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst_rt = worst_rt.max((rt[j] - expect).abs());
            }
        }
    }
    let round_trip_ok = worst_rt < 1e-9;

    // Hue difference at C1 = C2 = 10, delta h = pi/3.
    let c = 10.0;
    let h1 = 1.2f64;
    let h2 = h1 - std::f64::consts::PI / 3.0;
    let a = OpponentImage::from_fn(1, 1, Space::OkLab, |_, _| {
        [50.0, c * h1.cos(), c * h1.sin()]
    });
    let b = OpponentImage::from_fn(1, 1, Space::OkLab, |_, _| {
        [50.0, c * h2.cos(), c * h2.sin()]
    });
    let dh = difference_maps(&a, &b).unwrap().delta_h.get(0, 0);
    let hue_ok = (dh - 10.0).abs() < 1e-9;

    report(
        "3 (color-science exactness)",
        white_ok && continuity_ok && round_trip_ok && hue_ok,
        &format!(
            "white ({:.2e},{:.2e},{:.2e}), continuity gap {gap:.2e}, worst round trip {worst_rt:.2e}, delta-H error {:.2e}",
            (p[0] - 100.0).abs(),
            p[1].abs(),
            p[2].abs(),
            (dh - 10.0).abs()
        ),
    );
}

#[test]
fn criterion_4_csf_contract() {
    let model = CsfModel::achromatic_default();
    let grid = FrequencyGrid::new(256, 256, 60.0).unwrap();
    let raster = build_csf_raster(&model, &grid, true);
    let dc_exact = raster.dc_gain() == 1.0;
    let max_ok = (raster.max_gain() - 1.0).abs() < 1e-6;

    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for i in 0..1000 {
        let f = 30.0 * i as f64 / 999.0;
        let v = model.eval(f).unwrap();
        if v > prev + 1e-12 {
            monotone = false;
        }
        prev = v;
    }

    let peak = match model.kind {
        CsfKind::Movshon { .. } => model.peak_frequency(),
        _ => unreachable!(),
    };
    let peak_ok = (peak - 4.0).abs() < 1e-3;

    report(
        "4 (CSF contract)",
        dc_exact && max_ok && monotone && peak_ok,
        &format!(
            "DC gain {} (exact), max gain {:.9}, monotone {monotone}, peak {peak} cpd",
            raster.dc_gain(),
            raster.max_gain()
        ),
    );
}

#[test]
fn criterion_5_zero_difference_axiom() {
    let start = Instant::now();
    let mut all_zero = true;
    for kind in SceneKind::all() {
        let hdr = synthetic_scene(kind, 256, 256);
        let img = tonemap_reinhard(&hdr, 0.25).unwrap();
        for model in [ModelKind::Icam02, ModelKind::Idiff, ModelKind::Icamdiff] {
            for cfg in [PipelineConfig::baseline(model), PipelineConfig::edge_aware(model)] {
                let result = run_model(&img, &img, &cfg).unwrap();
                let zero = result.delta_e.data().iter().all(|&v| v == 0.0)
                    && result.delta_i.data().iter().all(|&v| v == 0.0)
                    && result.delta_c.data().iter().all(|&v| v == 0.0)
                    && result.delta_h.data().iter().all(|&v| v == 0.0)
                    && result.agg_e == 0.0
                    && result.agg_i == 0.0
                    && result.agg_c == 0.0
                    && result.agg_h == 0.0;
                if !zero {
                    all_zero = false;
                    eprintln!(
                        "non-zero self-difference: scene {:?} model {} variant {}",
                        kind,
                        cfg.model.name(),
                        cfg.variant_name()
                    );
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed.as_secs_f64() < 60.0;
    report(
        "5 (zero-difference axiom)",
        all_zero && in_time,
        &format!("6 model/variant combos x 3 scenes at 256x256 in {elapsed:.1?}"),
    );
}

fn desaturation_sweep_curves(
    configs: &[PipelineConfig],
) -> Vec<(String, String, String, Vec<(f64, f64)>)> {
    let scenes: Vec<(String, TristimulusImage)> = SceneKind::all()
        .into_iter()
        .map(|k| (k.name().to_string(), synthetic_scene(k, 256, 256)))
        .collect();
    let sweep = SweepSpec {
        values: vec![0.25, 0.5, 0.75],
        ..SweepSpec::desaturation_default()
    };
    let report = run_sweep(&scenes, &sweep, configs, None).unwrap();
    assert!(report.rows.iter().all(|r| r.error.is_none()));
    report
        .curves()
        .into_iter()
        .map(|((m, v, s), c)| (m, v, s, c))
        .collect()
}

#[test]
fn criterion_6_desaturation_monotonicity() {
    let configs = vec![
        PipelineConfig::edge_aware(ModelKind::Icamdiff),
        PipelineConfig::baseline(ModelKind::Icamdiff),
    ];
    let curves = desaturation_sweep_curves(&configs);

    let mut edge_monotone = true;
    let mut detail = String::new();
    for (model, variant, scene, curve) in &curves {
        let strictly_increasing = curve.windows(2).all(|w| w[1].1 > w[0].1);
        if variant == "edge_aware" {
            if !strictly_increasing {
                edge_monotone = false;
            }
            detail.push_str(&format!(
                "{model}/{variant}/{scene}: {:?}; ",
                curve.iter().map(|(_, e)| format!("{e:.4}")).collect::<Vec<_>>()
            ));
        } else {
            // Recorded, not asserted: whether the baseline violates
            // monotonicity on any scene.
            println!(
                "RECORD criterion 6: baseline icamdiff on {scene}: {} ({:?})",
                if strictly_increasing {
                    "monotone"
                } else {
                    "violates monotonicity"
                },
                curve.iter().map(|(_, e)| format!("{e:.4}")).collect::<Vec<_>>()
            );
        }
    }
    report(
        "6 (edge-aware desaturation monotonicity)",
        edge_monotone,
        &detail,
    );
}

#[test]
fn criterion_7_contrast_variation_reduction() {
    let scenes: Vec<(String, TristimulusImage)> = SceneKind::all()
        .into_iter()
        .map(|k| (k.name().to_string(), synthetic_scene(k, 256, 256)))
        .collect();
    let sweep = SweepSpec {
        values: vec![10.0, 100.0, 10000.0],
        ..SweepSpec::contrast_default()
    };
    let configs = vec![
        PipelineConfig::edge_aware(ModelKind::Icamdiff),
        PipelineConfig::baseline(ModelKind::Icamdiff),
    ];
    let result = run_sweep(&scenes, &sweep, &configs, None).unwrap();
    assert!(result.rows.iter().all(|r| r.error.is_none()));

    let std_of = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
    };
    let mut mean_std = std::collections::BTreeMap::new();
    for ((_, variant, scene), curve) in result.curves() {
        let scores: Vec<f64> = curve.iter().map(|(_, e)| *e).collect();
        println!(
            "RECORD criterion 7: {scene} {variant}: agg_e over contrast {:?}",
            scores.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()
        );
        mean_std
            .entry(variant)
            .or_insert_with(Vec::new)
            .push(std_of(&scores));
    }
    let edge_mean = mean_std["edge_aware"].iter().sum::<f64>() / 3.0;
    let base_mean = mean_std["baseline"].iter().sum::<f64>() / 3.0;
    report(
        "7 (contrast variation reduction)",
        edge_mean < base_mean,
        &format!(
            "mean per-scene std of aggregate error: edge-aware {edge_mean:.5} vs baseline {base_mean:.5}"
        ),
    );
}

#[test]
fn criterion_8_pooling() {
    let map = ChannelPlane::new(4, 1, vec![0.0, 0.0, 0.0, 2.0]).unwrap();
    let pooled = minkowski_pool(&map, 3.0).unwrap();
    let exact_ok = (pooled - 2f64.powf(1.0 / 3.0)).abs() < 1e-9;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut order_ok = true;
    for _ in 0..100 {
        let map = ChannelPlane::from_fn(16, 16, |_, _| rng.gen_range(0.0..10.0));
        let p1 = minkowski_pool(&map, 1.0).unwrap();
        let p3 = minkowski_pool(&map, 3.0).unwrap();
        if p3 < p1 - 1e-12 {
            order_ok = false;
        }
    }
    report(
        "8 (Minkowski pooling)",
        exact_ok && order_ok,
        &format!(
            "pool([0,0,0,2], 3) = {pooled:.12} (expected {:.12}), power-mean ordering on 100 maps: {order_ok}",
            2f64.powf(1.0 / 3.0)
        ),
    );
}

#[test]
fn criterion_9_performance_envelope() {
    let hdr = synthetic_scene(SceneKind::NightStreet, 512, 512);
    let reference = tonemap_reinhard(&hdr, 0.0).unwrap();
    let test = tonemap_reinhard(&hdr, 0.5).unwrap();
    let cfg = PipelineConfig::edge_aware(ModelKind::Icamdiff);

    let single_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let t0 = Instant::now();
    let result = single_pool
        .install(|| run_model(&reference, &test, &cfg))
        .unwrap();
    let single = t0.elapsed();
    assert!(result.agg_e > 0.0);

    // Diagnostic, non-blocking: per-bin parallel speedup at 8 workers. On a
    // single-core host this cannot exceed 1.
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let t1 = Instant::now();
    let _ = pool8.install(|| run_model(&reference, &test, &cfg)).unwrap();
    let multi = t1.elapsed();
    let speedup = single.as_secs_f64() / multi.as_secs_f64();
    println!(
        "RECORD criterion 9: speedup at 8 workers = {speedup:.2}x (host exposes {} core(s)); diagnostic only",
        std::thread::available_parallelism().map_or(1, |n| n.get())
    );

    report(
        "9 (performance envelope)",
        single.as_secs_f64() < 10.0,
        &format!("512x512 edge-aware combined model single-threaded in {single:.2?}"),
    );
}
