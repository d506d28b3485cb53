//! One signed 4-bit dot product pushed through the optical datapath, cycle by cycle,
//! then again with receiver noise switched on.
//!
//! ```text
//! cargo run --example funcsim_dot_product
//! ```

use photogemm::device::MrmModel;
use photogemm::funcsim::{
    dot_product, required_adc_bits, write_trace_csv, DotProductOptions, NoiseConfig,
    QuantizedVector,
};
use photogemm::linkbudget::p_output;
use photogemm::params::{dbm_to_mw, load_platform, Platform};

fn main() -> photogemm::Result<()> {
    let a = QuantizedVector::new(vec![3, -7, 15, 0, 9, -2, 11, -15, 4, 6], 4, 0.05)?;
    let b = QuantizedVector::new(vec![-5, 2, 15, 8, -1, -13, 7, 15, 0, 3], 4, 0.1)?;
    let exact: i64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let model = MrmModel::default();
    let n = 4;
    let adc_bits = required_adc_bits(a.len(), 4, 4);

    let opts = DotProductOptions {
        record_trace: true,
        ..Default::default()
    };
    let r = dot_product(&a, &b, n, &model, adc_bits, &opts)?;
    println!(
        "integer oracle {exact}, optical result {} ({} cycles on N = {n})",
        r.value, r.cycles
    );
    println!("rescaled: {:.4}", r.real_value(&a, &b));
    write_trace_csv(std::io::stdout().lock(), &r.trace).expect("stdout");

    let sin = load_platform(Platform::Sin, None)?;
    let noisy = DotProductOptions {
        noise: Some(NoiseConfig {
            full_scale_power_w: dbm_to_mw(p_output(n, &sin)?)? * 1e-3,
            dr_sps: 1e9,
            params: sin,
            seed: 7,
        }),
        ..Default::default()
    };
    let rn = dot_product(&a, &b, n, &model, adc_bits, &noisy)?;
    println!(
        "\nwith noise: result {}, analog {:.6} vs {:.6} (predicted rms {:.2e})",
        rn.value, rn.analog, r.analog, rn.noise_rms
    );
    Ok(())
}
