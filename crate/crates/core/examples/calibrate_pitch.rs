//! Fits the effective ring pitch of each platform to the published TPC sizes
//! and reports the per-target residuals.
//!
//! ```text
//! cargo run --release --example calibrate_pitch
//! ```

use photogemm::linkbudget::{
    calibrate_d_mrr, published_size_targets, CalibrationGrid, DEFAULT_N_MAX,
};
use photogemm::params::PlatformParams;

fn main() -> photogemm::Result<()> {
    let fits = calibrate_d_mrr(
        &published_size_targets(),
        CalibrationGrid::default(),
        PlatformParams::defaults,
        DEFAULT_N_MAX,
    )?;
    for fit in &fits {
        println!(
            "{}: d_mrr = {:.4} cm, total |residual| = {}, plausible pitch: {}",
            fit.platform, fit.d_mrr_cm, fit.total_abs_residual, fit.physically_plausible
        );
        for r in &fit.residuals {
            println!(
                "  B={} DR={:>4.0} GS/s  expected {:>3}  got {:>3}  ({:+})",
                r.target.bits,
                r.target.dr_sps / 1e9,
                r.target.expected_n,
                r.n_opt,
                r.residual
            );
        }
    }
    Ok(())
}
