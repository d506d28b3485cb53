//! Lowers the bundled CNNs to GEMMs and prints the largest ones.
//!
//! ```text
//! cargo run --example im2col_workload [model-name-or-path]
//! ```

use photogemm::workload::{resolve_model, Step};

fn main() -> photogemm::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "googlenet".into());
    let model = resolve_model(&name)?;
    let s = model.summary()?;
    println!(
        "{}: {} layers, {} GEMMs, {:.3} GMAC, widest reduction {}",
        model.name,
        model.layers.len(),
        s.gemm_count,
        s.total_macs as f64 / 1e9,
        s.max_inner
    );

    let mut gemms: Vec<_> = model
        .steps()?
        .into_iter()
        .filter_map(|st| match st {
            Step::Gemm { layer, ops } => Some((layer.name.clone(), ops)),
            _ => None,
        })
        .collect();
    gemms.sort_by_key(|(_, ops)| std::cmp::Reverse(ops.iter().map(|o| o.mac_count).sum::<u64>()));
    println!(
        "\n{:<28} {:>6} {:>7} {:>7} {:>7} {:>10}",
        "layer", "groups", "rows", "inner", "cols", "MMAC"
    );
    for (name, ops) in gemms.iter().take(10) {
        let o = &ops[0];
        let macs: u64 = ops.iter().map(|o| o.mac_count).sum();
        println!(
            "{name:<28} {:>6} {:>7} {:>7} {:>7} {:>10.2}",
            ops.len(),
            o.rows,
            o.inner,
            o.cols,
            macs as f64 / 1e6
        );
    }
    Ok(())
}
