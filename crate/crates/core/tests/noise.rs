use photogemm::device::MrmModel;
use photogemm::funcsim::{dot_product, DotProductOptions, NoiseConfig, QuantizedVector};
use photogemm::linkbudget::p_output;
use photogemm::params::{dbm_to_mw, load_platform, Platform};

#[test]
fn empirical_noise_matches_analytic_rms() {
    let params = load_platform(Platform::Sin, None).unwrap();
    let n = 16;
    let full_scale_power_w = dbm_to_mw(p_output(n, &params).unwrap()).unwrap() * 1e-3;
    let a = QuantizedVector::new((0..64).map(|i| (i % 31) - 15).collect(), 4, 1.0).unwrap();
    let b = QuantizedVector::new((0..64).map(|i| 15 - (i * 7) % 31).collect(), 4, 1.0).unwrap();
    let model = MrmModel::default();
    let clean = dot_product(&a, &b, n, &model, 20, &DotProductOptions::default()).unwrap();

    let trials = 10_000;
    let mut sum_sq = 0.0;
    let mut predicted = 0.0;
    for seed in 0..trials {
        let opts = DotProductOptions {
            noise: Some(NoiseConfig {
                full_scale_power_w,
                dr_sps: 1e9,
                params: params.clone(),
                seed,
            }),
            ..Default::default()
        };
        let r = dot_product(&a, &b, n, &model, 20, &opts).unwrap();
        sum_sq += (r.analog - clean.analog).powi(2);
        predicted = r.noise_rms;
    }
    let empirical = (sum_sq / trials as f64).sqrt();
    assert!(predicted > 0.0);
    assert!(
        ((empirical - predicted) / predicted).abs() < 0.10,
        "empirical {empirical:e}, analytic {predicted:e}"
    );
}

#[test]
fn same_seed_same_noise() {
    let params = load_platform(Platform::Soi, None).unwrap();
    let a = QuantizedVector::new(vec![3, -7, 15, 1], 4, 1.0).unwrap();
    let opts = DotProductOptions {
        noise: Some(NoiseConfig {
            full_scale_power_w: 1e-5,
            dr_sps: 5e9,
            params,
            seed: 42,
        }),
        ..Default::default()
    };
    let m = MrmModel::default();
    let r1 = dot_product(&a, &a, 2, &m, 12, &opts).unwrap();
    let r2 = dot_product(&a, &a, 2, &m, 12, &opts).unwrap();
    assert_eq!(r1, r2);
}
