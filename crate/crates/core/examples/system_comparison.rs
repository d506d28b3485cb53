//! SOI vs SiN accelerators on the bundled CNNs: FPS, FPS/W and where the
//! time and energy go.
//!
//! ```text
//! cargo run --release --example system_comparison
//! ```

use photogemm::archsim::{
    normalize_report, simulate_model, AcceleratorConfig, SimReport, DATA_RATES_SPS,
};
use photogemm::params::Platform;
use photogemm::workload::bundled_model;

fn main() -> photogemm::Result<()> {
    let models = ["resnet50", "googlenet", "shufflenetv2"];
    let mut reports = Vec::new();
    for id in Platform::ALL {
        for dr in DATA_RATES_SPS {
            let cfg = AcceleratorConfig::published(id, dr)?;
            for m in models {
                let cost = simulate_model(&bundled_model(m)?, &cfg)?;
                reports.push(SimReport::new(id.accelerator_name(), m, &cfg, cost));
            }
        }
    }

    let table = normalize_report(&reports)?;
    println!(
        "{:<8} {:>6}  {:>9} {:>9}",
        "arch", "GS/s", "norm FPS", "norm FPS/W"
    );
    for g in &table.gmean {
        println!(
            "{:<8} {:>6}  {:>9.3} {:>9.3}",
            g.key.arch,
            g.key.dr_sps / 1_000_000_000,
            g.norm_fps,
            g.norm_fps_per_watt
        );
    }
    for dr in DATA_RATES_SPS {
        let (soi, sin) = (
            table.gmean_for("SOIPhAR", dr).unwrap(),
            table.gmean_for("SiNPhAR", dr).unwrap(),
        );
        println!(
            "{:>2} GS/s: SiN/SOI FPS x{:.2}, FPS/W x{:.2}",
            dr / 1e9,
            sin.fps / soi.fps,
            sin.fps_per_watt / soi.fps_per_watt
        );
    }

    let r = reports
        .iter()
        .find(|r| {
            r.key.arch == "SiNPhAR" && r.key.model == "resnet50" && r.key.dr_sps == 1_000_000_000
        })
        .unwrap();
    let c = &r.cost;
    println!(
        "\nSiNPhAR / resnet50 / 1 GS/s: {:.2} FPS at {:.2} W",
        c.fps,
        c.average_power_w()
    );
    println!(
        "latency: compute {:.3} ms, buffer {:.3} ms, peripheral {:.3} ms",
        c.latency.compute_s * 1e3,
        c.latency.buffer_s * 1e3,
        c.latency.peripheral_s * 1e3
    );
    for (name, e) in c.energy.parts() {
        println!(
            "  {name:<10} {:>8.2} mJ ({:>4.1} %)",
            e * 1e3,
            100.0 * e / c.energy.total_j
        );
    }
    Ok(())
}
