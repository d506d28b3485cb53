use serde::{Deserialize, Serialize};

use super::{published_tpc, TpcConfig};
use crate::error::{Error, Result};
use crate::params::PeripheralParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaMode {
    /// Use the published area-matched counts verbatim.
    PassThrough,
    /// Fill a fixed total TPC area budget, mm².
    Budget(f64),
}

/// Estimated TPC area: per DPE two MRM banks, an N-wide DAC bank and one ADC,
/// plus the TPC's reduction network.
pub fn area_per_tpc_mm2(tpc: &TpcConfig, pp: &PeripheralParams) -> Result<f64> {
    tpc.validate()?;
    let n = tpc.n as f64;
    let per_dpe = 2.0 * n * pp.mrm_area_mm2 + n * pp.dac.area_mm2 + pp.adc(tpc.dr_sps)?.area_mm2;
    Ok(tpc.m as f64 * per_dpe + pp.reduction_network.area_mm2)
}

pub fn area_proportionate_counts(
    variants: &[TpcConfig],
    mode: AreaMode,
    pp: &PeripheralParams,
) -> Result<Vec<usize>> {
    if variants.is_empty() {
        return Err(Error::InvalidInput("no TPC variants given".into()));
    }
    match mode {
        AreaMode::PassThrough => variants
            .iter()
            .map(|v| match published_tpc(v.platform, v.dr_sps) {
                Some((n, count)) if n == v.n && v.bits == 4 => Ok(count),
                _ => Err(Error::MissingRecord(format!(
                    "published count for {} N={} at {:e} S/s",
                    v.platform, v.n, v.dr_sps
                ))),
            })
            .collect(),
        AreaMode::Budget(budget) => {
            if !(budget > 0.0 && budget.is_finite()) {
                return Err(Error::InvalidInput("area budget must be positive".into()));
            }
            variants
                .iter()
                .map(|v| Ok((budget / area_per_tpc_mm2(v, pp)?).floor() as usize))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Platform;

    fn tpc(platform: Platform, n: usize, dr: f64) -> TpcConfig {
        TpcConfig {
            n,
            m: n,
            bits: 4,
            dr_sps: dr,
            platform,
        }
    }

    #[test]
    fn pass_through_counts() {
        let pp = PeripheralParams::default();
        let c = area_proportionate_counts(
            &[tpc(Platform::Soi, 22, 1e9), tpc(Platform::Sin, 47, 1e9)],
            AreaMode::PassThrough,
            &pp,
        )
        .unwrap();
        assert_eq!(c, vec![132, 50]);
        assert!(area_proportionate_counts(
            &[tpc(Platform::Sin, 30, 1e9)],
            AreaMode::PassThrough,
            &pp
        )
        .is_err());
    }

    #[test]
    fn identical_variants_identical_counts() {
        let pp = PeripheralParams::default();
        let v = tpc(Platform::Sin, 28, 5e9);
        let c = area_proportionate_counts(&[v, v], AreaMode::Budget(100.0), &pp).unwrap();
        assert_eq!(c[0], c[1]);
    }

    #[test]
    fn budget_errors() {
        let pp = PeripheralParams::default();
        let v = tpc(Platform::Sin, 28, 5e9);
        assert!(area_proportionate_counts(&[v], AreaMode::Budget(0.0), &pp).is_err());
        assert!(area_proportionate_counts(&[], AreaMode::Budget(1.0), &pp).is_err());
    }
}
