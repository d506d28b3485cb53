use photogemm::archsim::{schedule_gemm, AcceleratorConfig, TpcConfig};
use photogemm::device::MrmModel;
use photogemm::funcsim::{dot_product, required_adc_bits, DotProductOptions, QuantizedVector};
use photogemm::linkbudget::{optimal_n, optimal_n_bisect, PrecisionQuery};
use photogemm::params::{dbm_to_mw, mw_to_dbm, Platform, PlatformParams};
use photogemm::workload::{im2col, GemmOp, LayerKind, LayerSpec};
use proptest::prelude::*;

fn dot(a: &[i64], b: &[i64], n: usize) -> photogemm::funcsim::DotProductResult {
    let qa = QuantizedVector::new(a.to_vec(), 4, 1.0).unwrap();
    let qb = QuantizedVector::new(b.to_vec(), 4, 1.0).unwrap();
    dot_product(
        &qa,
        &qb,
        n,
        &MrmModel::default(),
        required_adc_bits(a.len(), 4, 4),
        &DotProductOptions::default(),
    )
    .unwrap()
}

fn vec_pair(max_len: usize) -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (1..=max_len).prop_flat_map(|len| {
        (
            prop::collection::vec(-15i64..=15, len),
            prop::collection::vec(-15i64..=15, len),
        )
    })
}

fn platform_params() -> impl Strategy<Value = PlatformParams> {
    (
        prop::bool::ANY,
        0.0..20.0f64,
        0.0..3.0f64,
        0.0..3.0f64,
        0.0..0.2f64,
        0.0..0.05f64,
        0.0..0.05f64,
        1e-4..1.0f64,
        0.0..5.0f64,
    )
        .prop_map(|(sin, laser, coupling, wg, inc, obl, split, d, mrm)| {
            let mut p = PlatformParams::defaults(if sin { Platform::Sin } else { Platform::Soi });
            p.p_laser_dbm = laser;
            p.p_coupling_db = coupling;
            p.wg_loss_db_per_cm = wg;
            p.p_inc_db_per_cm_per_lambda = inc;
            p.mrm_obl_db = obl;
            p.mrr_obl_db = obl;
            p.splitter_il_db = split;
            p.d_mrr_cm = d;
            p.mrm_il_db = mrm;
            p
        })
}

proptest! {
    #[test]
    fn dbm_round_trip(p in -100.0..30.0f64) {
        let back = mw_to_dbm(dbm_to_mw(p).unwrap()).unwrap();
        prop_assert!((back - p).abs() <= 1e-9);
    }

    #[test]
    fn chunking_does_not_change_result((a, b) in vec_pair(256), n1 in 1usize..64, n2 in 1usize..64) {
        let (r1, r2) = (dot(&a, &b, n1), dot(&a, &b, n2));
        prop_assert_eq!(r1.value, r2.value);
        prop_assert!((r1.analog - r2.analog).abs() <= 1e-9 * a.len() as f64);
    }

    #[test]
    fn sign_symmetry((a, b) in vec_pair(128), n in 1usize..48) {
        let neg: Vec<i64> = a.iter().map(|x| -x).collect();
        prop_assert_eq!(dot(&neg, &b, n).value, -dot(&a, &b, n).value);
        prop_assert_eq!(dot(&b, &a, n).value, dot(&a, &b, n).value);
    }

    #[test]
    fn linear_in_second_operand((a, b) in vec_pair(128), seed in any::<u64>(), n in 1usize..48) {
        // c chosen so that b + c stays representable
        let c: Vec<i64> = b
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let room = (15 - x.abs()).max(0);
                let r = ((seed >> (i % 60)) as i64) % (room + 1);
                if x < 0 { -r } else { r }
            })
            .collect();
        let bc: Vec<i64> = b.iter().zip(&c).map(|(x, y)| x + y).collect();
        let (rb, rc, rbc) = (dot(&a, &b, n), dot(&a, &c, n), dot(&a, &bc, n));
        prop_assert_eq!(rb.value + rc.value, rbc.value);
        prop_assert!((rb.analog + rc.analog - rbc.analog).abs() <= 1e-9 * a.len() as f64);
    }

    #[test]
    fn permutation_invariance((a, b) in vec_pair(128), n in 1usize..48, rot in 0usize..128) {
        let k = rot % a.len();
        let mut pa = a.clone();
        let mut pb = b.clone();
        pa.rotate_left(k);
        pb.rotate_left(k);
        pa.reverse();
        pb.reverse();
        prop_assert_eq!(dot(&pa, &pb, n).value, dot(&a, &b, n).value);
    }

    #[test]
    fn im2col_matches_closed_form(
        h in 1usize..40, w in 1usize..40, c in 1usize..16, k in 1usize..16,
        r in 1usize..6, s in 1usize..6, stride in 1usize..4, pad in 0usize..3, g in 1usize..4,
    ) {
        let layer = LayerSpec {
            name: "l".into(),
            kind: LayerKind::Conv,
            input: [h, w, c * g],
            kernel: [r, s],
            out_channels: k * g,
            stride,
            padding: pad,
            groups: g,
        };
        match im2col(&layer) {
            Ok(ops) => {
                let p = (h + 2 * pad - r) / stride + 1;
                let q = (w + 2 * pad - s) / stride + 1;
                prop_assert_eq!(ops.len(), g);
                for op in &ops {
                    prop_assert_eq!((op.rows, op.inner, op.cols), (k, c * r * s, p * q));
                }
                let macs: u64 = ops.iter().map(|o| o.mac_count).sum();
                prop_assert_eq!(macs, (k * g * c * r * s * p * q) as u64);
            }
            Err(_) => prop_assert!(h + 2 * pad < r || w + 2 * pad < s),
        }
    }

    #[test]
    fn more_tpcs_never_more_cycles(
        rows in 1usize..256, inner in 1usize..2048, cols in 1usize..512, n in 1usize..64, count in 2usize..200,
    ) {
        let op = GemmOp::new(rows, inner, cols, "x").unwrap();
        let tpc = TpcConfig { n, m: n, bits: 4, dr_sps: 1e9, platform: Platform::Sin };
        let a = schedule_gemm(&op, &AcceleratorConfig::new(tpc, count).unwrap()).unwrap();
        let b = schedule_gemm(&op, &AcceleratorConfig::new(tpc, count + 2).unwrap()).unwrap();
        prop_assert!(b.compute_cycles <= a.compute_cycles);
        prop_assert_eq!(a.macs, op.mac_count);
        prop_assert!(a.compute_cycles * (count / 2 * n * n) as u64 >= op.mac_count);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bisection_matches_exhaustive(p in platform_params(), bits in 1u32..=6, dr_idx in 0usize..3) {
        let q = PrecisionQuery::new(bits, [1e9, 5e9, 10e9][dr_idx]).unwrap();
        match (optimal_n(&q, &p, 512), optimal_n_bisect(&q, &p, 512)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "exhaustive {:?} vs bisection {:?}", a, b),
        }
    }

    #[test]
    fn n_opt_nonincreasing_in_bits_and_rate(p in platform_params(), bits in 1u32..=5) {
        let n = |b, dr| optimal_n_bisect(&PrecisionQuery::new(b, dr).unwrap(), &p, 512).map(|r| r.n_opt).unwrap_or(0);
        for dr in [1e9, 5e9, 10e9] {
            prop_assert!(n(bits + 1, dr) <= n(bits, dr));
        }
        prop_assert!(n(bits, 10e9) <= n(bits, 5e9));
        prop_assert!(n(bits, 5e9) <= n(bits, 1e9));
    }
}
