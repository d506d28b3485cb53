//! Largest TPC size each platform supports across bit precisions and data rates.
//!
//! ```text
//! cargo run --example scalability_sweep
//! ```

use photogemm::archsim::DATA_RATES_SPS;
use photogemm::linkbudget::{optimal_n_bisect, PrecisionQuery, DEFAULT_N_MAX};
use photogemm::params::{load_platform, Platform};

fn main() -> photogemm::Result<()> {
    for id in Platform::ALL {
        let params = load_platform(id, None)?;
        println!("{id} (ring pitch {:.4} cm)", params.d_mrr_cm);
        println!("  bits  {:>8} {:>8} {:>8}", "1 GS/s", "5 GS/s", "10 GS/s");
        for bits in 1..=4 {
            let row: Vec<String> = DATA_RATES_SPS
                .iter()
                .map(|&dr| {
                    let q = PrecisionQuery::new(bits, dr)?;
                    Ok(format!(
                        "{:>8}",
                        optimal_n_bisect(&q, &params, DEFAULT_N_MAX)?.n_opt
                    ))
                })
                .collect::<photogemm::Result<_>>()?;
            println!("  {bits:>4}  {}", row.join(" "));
        }
    }

    let sin = load_platform(Platform::Sin, None)?;
    let r = optimal_n_bisect(&PrecisionQuery::new(4, 1e9)?, &sin, DEFAULT_N_MAX)?;
    println!(
        "\nSiN, 4 bit, 1 GS/s: sensitivity {:.2} dBm, received {:.2} dBm at N = {}, margin {:.3} dB",
        r.pd_sensitivity_dbm, r.p_output_dbm, r.n_opt, r.ef_db
    );
    Ok(())
}
