use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cost::CostBreakdown;
use super::AcceleratorConfig;
use crate::error::{Error, Result};

pub const BASELINE_ARCH: &str = "SOIPhAR";
pub const BASELINE_MODEL: &str = "resnet50";
pub const BASELINE_DR_SPS: f64 = 10e9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReportKey {
    pub arch: String,
    pub model: String,
    /// Data rate in S/s, kept integral so keys order and compare exactly.
    pub dr_sps: u64,
}

/// One simulated (accelerator, model, data rate) point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub key: ReportKey,
    pub tpc_n: usize,
    pub tpc_count: usize,
    pub cost: CostBreakdown,
}

impl SimReport {
    pub fn new(arch: &str, model: &str, cfg: &AcceleratorConfig, cost: CostBreakdown) -> Self {
        SimReport {
            key: ReportKey {
                arch: arch.to_string(),
                model: model.to_string(),
                dr_sps: cfg.tpc.dr_sps.round() as u64,
            },
            tpc_n: cfg.tpc.n,
            tpc_count: cfg.tpc_count,
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedRow {
    pub key: ReportKey,
    pub fps: f64,
    pub fps_per_watt: f64,
    pub norm_fps: f64,
    pub norm_fps_per_watt: f64,
}

/// Per-point rows plus one geometric-mean row per (arch, data rate), whose
/// model field is `gmean`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedTable {
    pub rows: Vec<NormalizedRow>,
    pub gmean: Vec<NormalizedRow>,
}

impl NormalizedTable {
    pub fn gmean_for(&self, arch: &str, dr_sps: f64) -> Option<&NormalizedRow> {
        self.gmean
            .iter()
            .find(|r| r.key.arch == arch && r.key.dr_sps == dr_sps.round() as u64)
    }
}

pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("geometric mean of no values".into()));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput(
            "geometric mean needs positive finite values".into(),
        ));
    }
    Ok((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

/// Normalizes FPS and FPS/W to the SOIPhAR / resnet50 / 10 GS/s point.
pub fn normalize_report(reports: &[SimReport]) -> Result<NormalizedTable> {
    let base = reports
        .iter()
        .find(|r| {
            r.key.arch == BASELINE_ARCH
                && r.key.model == BASELINE_MODEL
                && r.key.dr_sps == BASELINE_DR_SPS as u64
        })
        .ok_or_else(|| {
            Error::MissingRecord(format!(
                "baseline {BASELINE_ARCH} / {BASELINE_MODEL} at {BASELINE_DR_SPS:e} S/s"
            ))
        })?;
    let (bf, bw) = (base.cost.fps, base.cost.fps_per_watt);

    let mut rows: Vec<NormalizedRow> = reports
        .iter()
        .map(|r| NormalizedRow {
            key: r.key.clone(),
            fps: r.cost.fps,
            fps_per_watt: r.cost.fps_per_watt,
            norm_fps: r.cost.fps / bf,
            norm_fps_per_watt: r.cost.fps_per_watt / bw,
        })
        .collect();
    rows.sort_by(|a, b| a.key.cmp(&b.key));

    let mut groups: BTreeMap<(String, u64), Vec<&NormalizedRow>> = BTreeMap::new();
    for r in &rows {
        groups
            .entry((r.key.arch.clone(), r.key.dr_sps))
            .or_default()
            .push(r);
    }
    let mut gmean = Vec::new();
    for ((arch, dr), members) in groups {
        let col = |f: fn(&NormalizedRow) -> f64| -> Result<f64> {
            geometric_mean(&members.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        gmean.push(NormalizedRow {
            key: ReportKey {
                arch,
                model: "gmean".into(),
                dr_sps: dr,
            },
            fps: col(|r| r.fps)?,
            fps_per_watt: col(|r| r.fps_per_watt)?,
            norm_fps: col(|r| r.norm_fps)?,
            norm_fps_per_watt: col(|r| r.norm_fps_per_watt)?,
        });
    }
    Ok(NormalizedTable { rows, gmean })
}

pub const AGGREGATE_CSV_HEADER: &str =
    "model,arch,dr_sps,fps,fps_per_watt,norm_fps,norm_fps_per_watt";

pub fn aggregate_csv(table: &NormalizedTable) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_CSV_HEADER);
    out.push('\n');
    for r in table.rows.iter().chain(&table.gmean) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.key.model,
            r.key.arch,
            r.key.dr_sps,
            r.fps,
            r.fps_per_watt,
            r.norm_fps,
            r.norm_fps_per_watt
        ));
    }
    out
}

pub fn write_aggregate_csv(path: &Path, table: &NormalizedTable) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(aggregate_csv(table).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(arch: &str, model: &str, dr: u64, fps: f64, fpw: f64) -> SimReport {
        SimReport {
            key: ReportKey {
                arch: arch.into(),
                model: model.into(),
                dr_sps: dr,
            },
            tpc_n: 1,
            tpc_count: 2,
            cost: CostBreakdown {
                fps,
                fps_per_watt: fpw,
                ..Default::default()
            },
        }
    }

    #[test]
    fn gmean_of_known_values() {
        assert!((geometric_mean(&[1.0, 4.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((geometric_mean(&[2.0, 8.0, 4.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!(geometric_mean(&[]).is_err());
        assert!(geometric_mean(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn baseline_normalizes_to_one() {
        let t = normalize_report(&[
            report("SOIPhAR", "resnet50", 10_000_000_000, 50.0, 10.0),
            report("SiNPhAR", "resnet50", 10_000_000_000, 100.0, 40.0),
            report("SiNPhAR", "googlenet", 10_000_000_000, 400.0, 10.0),
        ])
        .unwrap();
        let base = t.rows.iter().find(|r| r.key.arch == "SOIPhAR").unwrap();
        assert_eq!(base.norm_fps, 1.0);
        assert_eq!(base.norm_fps_per_watt, 1.0);
        let g = t.gmean_for("SiNPhAR", 10e9).unwrap();
        assert!((g.norm_fps - 4.0).abs() < 1e-12);
        assert!((g.norm_fps_per_watt - 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_baseline() {
        let r = normalize_report(&[report("SiNPhAR", "resnet50", 10_000_000_000, 1.0, 1.0)]);
        assert!(matches!(r, Err(Error::MissingRecord(_))));
    }
}
