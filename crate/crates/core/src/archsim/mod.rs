//! System-level latency and energy model of a photonic GEMM accelerator.
//!
//! GEMMs run output-stationary on a fleet of TPCs, each holding `M` DPEs of `N`
//! multipliers. TPCs run at 4-bit precision and are paired with shift-and-add
//! recombination to reach 8 bits, so only `⌊count/2⌋` TPC groups compute
//! independent outputs. Every output element stays in its DPE's integrating
//! receiver for `⌈inner/N⌉` cycles and is sampled once by the ADC.

mod area;
mod cost;
mod report;
mod schedule;

pub use area::{area_per_tpc_mm2, area_proportionate_counts, AreaMode};
pub use cost::{
    cost_gemm, simulate_model, CostBreakdown, EnergyBreakdown, LatencyBreakdown, OpCounts,
};
pub use report::{
    aggregate_csv, geometric_mean, normalize_report, write_aggregate_csv, NormalizedRow,
    NormalizedTable, ReportKey, SimReport,
};
pub use schedule::{schedule_gemm, Schedule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{PeripheralParams, Platform};

pub const DATA_RATES_SPS: [f64; 3] = [1e9, 5e9, 10e9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpcConfig {
    /// Multipliers per DPE.
    pub n: usize,
    /// DPEs per TPC.
    pub m: usize,
    /// Native precision of one TPC.
    pub bits: u32,
    pub dr_sps: f64,
    pub platform: Platform,
}

impl TpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidInput("TPC dimensions must be >= 1".into()));
        }
        if self.n != self.m {
            return Err(Error::InvalidInput(format!(
                "square TPC required (N = M), got N = {}, M = {}",
                self.n, self.m
            )));
        }
        if !(1..=8).contains(&self.bits) {
            return Err(Error::InvalidInput(format!(
                "TPC bits must be in 1..=8, got {}",
                self.bits
            )));
        }
        if !(self.dr_sps.is_finite() && self.dr_sps > 0.0) {
            return Err(Error::InvalidInput("data rate must be positive".into()));
        }
        Ok(())
    }
}

/// Published TPC size and area-matched TPC count for 4-bit TPCs.
pub fn published_tpc(platform: Platform, dr_sps: f64) -> Option<(usize, usize)> {
    let gs = (dr_sps / 1e9).round() as u32;
    if (dr_sps - f64::from(gs) * 1e9).abs() > 1.0 {
        return None;
    }
    match (platform, gs) {
        (Platform::Soi, 1) => Some((22, 132)),
        (Platform::Soi, 5) => Some((15, 155)),
        (Platform::Soi, 10) => Some((13, 162)),
        (Platform::Sin, 1) => Some((47, 50)),
        (Platform::Sin, 5) => Some((28, 95)),
        (Platform::Sin, 10) => Some((22, 116)),
        _ => None,
    }
}

/// How costs that the component tables leave open are charged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostPolicy {
    /// Fraction of eDRAM access latency hidden behind compute, in [0, 1].
    pub buffer_overlap: f64,
    /// IO interface draws its power for the whole frame.
    pub io_always_on: bool,
    /// Tile-level (bus, router, pooling, activation) and TPC-level (reduction)
    /// CMOS peripherals draw their power for the whole frame instead of only
    /// while busy.
    pub peripherals_always_on: bool,
}

impl Default for CostPolicy {
    fn default() -> Self {
        CostPolicy {
            buffer_overlap: 0.0,
            io_always_on: true,
            peripherals_always_on: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorConfig {
    pub tpc: TpcConfig,
    pub tpc_count: usize,
    /// Each tile hosts 4 TPCs.
    pub tiles: usize,
    pub peripheral: PeripheralParams,
    pub laser_mw_per_lambda: f64,
    /// Precision reached by slicing across TPCs.
    pub target_bits: u32,
    pub policy: CostPolicy,
}

pub const TPCS_PER_TILE: usize = 4;

impl AcceleratorConfig {
    pub fn new(tpc: TpcConfig, tpc_count: usize) -> Result<Self> {
        let cfg = AcceleratorConfig {
            tpc,
            tpc_count,
            tiles: tpc_count.div_ceil(TPCS_PER_TILE),
            peripheral: PeripheralParams::default(),
            laser_mw_per_lambda: 10.0,
            target_bits: 8,
            policy: CostPolicy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The published 4-bit design point for `platform` at `dr_sps`.
    pub fn published(platform: Platform, dr_sps: f64) -> Result<Self> {
        let (n, count) = published_tpc(platform, dr_sps).ok_or_else(|| {
            Error::MissingRecord(format!(
                "published TPC size for {platform} at {dr_sps:e} S/s"
            ))
        })?;
        Self::new(
            TpcConfig {
                n,
                m: n,
                bits: 4,
                dr_sps,
                platform,
            },
            count,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.tpc.validate()?;
        if self.target_bits < self.tpc.bits || !self.target_bits.is_multiple_of(self.tpc.bits) {
            return Err(Error::InvalidInput(format!(
                "target precision {} must be a multiple of TPC precision {}",
                self.target_bits, self.tpc.bits
            )));
        }
        if self.tpc_count < self.slices() {
            return Err(Error::InvalidInput(format!(
                "{} TPCs cannot form one {}-way group",
                self.tpc_count,
                self.slices()
            )));
        }
        if self.tiles * TPCS_PER_TILE < self.tpc_count {
            return Err(Error::InvalidInput(format!(
                "{} tiles cannot host {} TPCs",
                self.tiles, self.tpc_count
            )));
        }
        if !(0.0..=1.0).contains(&self.policy.buffer_overlap) {
            return Err(Error::OutOfRange {
                what: "buffer_overlap",
                value: self.policy.buffer_overlap,
                min: 0.0,
                max: 1.0,
            });
        }
        if self.laser_mw_per_lambda.is_nan() || self.laser_mw_per_lambda < 0.0 {
            return Err(Error::InvalidInput("laser power must be >= 0".into()));
        }
        self.peripheral.adc(self.tpc.dr_sps)?;
        Ok(())
    }

    /// TPCs combined per output to reach the target precision.
    pub fn slices(&self) -> usize {
        (self.target_bits / self.tpc.bits) as usize
    }

    /// Independent TPC groups computing distinct outputs.
    pub fn groups(&self) -> usize {
        self.tpc_count / self.slices()
    }

    /// Output elements in flight per pass.
    pub fn parallel_outputs(&self) -> u64 {
        (self.groups() * self.tpc.m) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_counts() {
        assert_eq!(published_tpc(Platform::Soi, 1e9), Some((22, 132)));
        assert_eq!(published_tpc(Platform::Sin, 1e9), Some((47, 50)));
        assert_eq!(published_tpc(Platform::Sin, 10e9), Some((22, 116)));
        assert_eq!(published_tpc(Platform::Sin, 2e9), None);
    }

    #[test]
    fn pairing() {
        let c = AcceleratorConfig::published(Platform::Soi, 5e9).unwrap();
        assert_eq!(c.slices(), 2);
        assert_eq!(c.groups(), 77);
        assert_eq!(c.tiles, 39);
    }

    #[test]
    fn invalid_configs() {
        let tpc = TpcConfig {
            n: 8,
            m: 8,
            bits: 4,
            dr_sps: 1e9,
            platform: Platform::Sin,
        };
        assert!(AcceleratorConfig::new(tpc, 1).is_err());
        assert!(AcceleratorConfig::new(TpcConfig { m: 4, ..tpc }, 4).is_err());
        assert!(AcceleratorConfig::new(TpcConfig { dr_sps: 2e9, ..tpc }, 4).is_err());
        let mut c = AcceleratorConfig::new(tpc, 8).unwrap();
        c.tiles = 1;
        assert!(c.validate().is_err());
        c.tiles = 2;
        c.policy.buffer_overlap = 1.5;
        assert!(c.validate().is_err());
    }
}
