//! TPC counts under a shared area budget, compared with the published counts.
//!
//! ```text
//! cargo run --example area_proportionate [budget-mm2]
//! ```

use photogemm::archsim::{
    area_per_tpc_mm2, area_proportionate_counts, published_tpc, AreaMode, TpcConfig, DATA_RATES_SPS,
};
use photogemm::params::{PeripheralParams, Platform};

fn main() -> photogemm::Result<()> {
    let budget: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(150.0);
    let pp = PeripheralParams::default();
    let mut variants = Vec::new();
    for id in Platform::ALL {
        for dr in DATA_RATES_SPS {
            let (n, _) = published_tpc(id, dr).expect("published design point");
            variants.push(TpcConfig {
                n,
                m: n,
                bits: 4,
                dr_sps: dr,
                platform: id,
            });
        }
    }
    let published = area_proportionate_counts(&variants, AreaMode::PassThrough, &pp)?;
    let fitted = area_proportionate_counts(&variants, AreaMode::Budget(budget), &pp)?;
    println!("budget {budget} mm²");
    println!(
        "{:<5} {:>5} {:>4} {:>10} {:>10} {:>10}",
        "plat", "GS/s", "N", "mm²/TPC", "published", "budget"
    );
    for ((v, p), f) in variants.iter().zip(&published).zip(&fitted) {
        println!(
            "{:<5} {:>5} {:>4} {:>10.4} {:>10} {:>10}",
            v.platform.to_string(),
            v.dr_sps / 1e9,
            v.n,
            area_per_tpc_mm2(v, &pp)?,
            p,
            f
        );
    }
    Ok(())
}
