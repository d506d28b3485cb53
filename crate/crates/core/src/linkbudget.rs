//! Optical link budget and TPC scalability search.
//!
//! Achievable bit precision at the photodiode follows the usual ENOB relation
//! `B = (SNR_dB - 1.76) / 6.02`, where the SNR compares the signal photocurrent
//! against shot, thermal and RIN noise of the signal diode plus shot and
//! thermal noise of the balancing diode, over a noise bandwidth of `DR/√2`.
//! The received power is a pure dB budget: laser power minus every loss the
//! wavelength meets on its way to the detector.
//!
//! The optimal TPC size is the largest `N` (with `M = N`) for which the
//! received power still meets the sensitivity, i.e. the `N` where the
//! margin `P_output(N) - P_sensitivity` is the smallest nonnegative value.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Platform, PlatformParams, PHYSICAL};

/// Search bracket for the photodiode sensitivity, dBm.
pub const SENSITIVITY_BRACKET_DBM: (f64, f64) = (-60.0, 10.0);
const SENSITIVITY_TOL_DB: f64 = 1e-9;
pub const DEFAULT_N_MAX: usize = 512;
/// Wavelength count above which the per-wavelength loss surcharge applies.
pub const P_INC_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionQuery {
    pub bits: u32,
    pub dr_sps: f64,
}

impl PrecisionQuery {
    pub fn new(bits: u32, dr_sps: f64) -> Result<Self> {
        let q = PrecisionQuery { bits, dr_sps };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.bits) {
            return Err(Error::InvalidInput(format!(
                "bit precision must be in 1..=8, got {}",
                self.bits
            )));
        }
        if !(self.dr_sps.is_finite() && self.dr_sps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "data rate must be positive, got {}",
                self.dr_sps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalabilityResult {
    pub platform_id: Platform,
    pub query: PrecisionQuery,
    pub n_opt: usize,
    pub pd_sensitivity_dbm: f64,
    pub p_output_dbm: f64,
    pub ef_db: f64,
    /// `n_opt` hit the search bound; the true optimum may be larger.
    pub bound_reached: bool,
}

/// Real-valued bit precision supported by `p_pd_dbm` of optical power at the detector.
pub fn bits_from_power(p_pd_dbm: f64, dr_sps: f64, params: &PlatformParams) -> f64 {
    let q = PHYSICAL.q;
    let kt4_over_rl = 4.0 * PHYSICAL.k_b * params.temperature_k / params.load_resistance_ohm;
    let p_w = 10f64.powf(p_pd_dbm / 10.0) * 1e-3;
    let signal = params.responsivity * p_w;
    let id = params.dark_current_a;

    let signal_noise =
        (2.0 * q * (signal + id) + kt4_over_rl + signal * signal * params.rin_linear()).sqrt();
    let balance_noise = (2.0 * q * id + kt4_over_rl).sqrt();
    let bandwidth = (dr_sps / std::f64::consts::SQRT_2).sqrt();

    (20.0 * (signal / ((signal_noise + balance_noise) * bandwidth)).log10() - 1.76) / 6.02
}

/// Optical power (dBm) the detector needs to resolve `query.bits` at `query.dr_sps`.
pub fn pd_sensitivity(query: &PrecisionQuery, params: &PlatformParams) -> Result<f64> {
    query.validate()?;
    let target = f64::from(query.bits);
    let f = |p: f64| bits_from_power(p, query.dr_sps, params) - target;
    let (mut lo, mut hi) = SENSITIVITY_BRACKET_DBM;
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Infeasible(format!(
            "{}-bit precision at {:e} S/s is not reachable in [{lo}, {hi}] dBm",
            query.bits, query.dr_sps
        )));
    }
    while hi - lo > SENSITIVITY_TOL_DB {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Optical power (dBm) reaching the detector in a TPC of size `n` (`M = N`).
pub fn p_output(n: usize, params: &PlatformParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput("TPC size must be >= 1".into()));
    }
    let nf = n as f64;
    let d = params.d_mrr_cm;
    let inc = if n > P_INC_THRESHOLD {
        params.p_inc_db_per_cm_per_lambda * d * (n - P_INC_THRESHOLD) as f64
    } else {
        0.0
    };
    Ok(params.p_laser_dbm
        - params.p_smf_db
        - params.p_coupling_db
        - params.wg_loss_db_per_cm * d * nf
        - inc
        - params.splitter_il_db * nf.log2()
        - params.mrm_il_db
        - params.mrr_il_db
        - (nf - 1.0) * params.mrm_obl_db
        - (nf - 1.0) * params.mrr_obl_db
        - params.penalty_db)
}

/// Power margin at the detector, dB.
pub fn error_function(n: usize, query: &PrecisionQuery, params: &PlatformParams) -> Result<f64> {
    Ok(p_output(n, params)? - pd_sensitivity(query, params)?)
}

fn result_for(
    n_opt: usize,
    n_max: usize,
    sens: f64,
    query: &PrecisionQuery,
    params: &PlatformParams,
) -> Result<ScalabilityResult> {
    let p_out = p_output(n_opt, params)?;
    Ok(ScalabilityResult {
        platform_id: params.platform_id,
        query: *query,
        n_opt,
        pd_sensitivity_dbm: sens,
        p_output_dbm: p_out,
        ef_db: p_out - sens,
        bound_reached: n_opt == n_max,
    })
}

fn check_feasible(
    sens: f64,
    n_max: usize,
    query: &PrecisionQuery,
    params: &PlatformParams,
) -> Result<()> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    if p_output(1, params)? - sens < 0.0 {
        return Err(Error::Infeasible(format!(
            "{} platform cannot close the link even for N = 1 at {} bits, {:e} S/s",
            params.platform_id, query.bits, query.dr_sps
        )));
    }
    Ok(())
}

/// Exhaustive scan for the largest `N ≤ n_max` with a nonnegative margin.
pub fn optimal_n(
    query: &PrecisionQuery,
    params: &PlatformParams,
    n_max: usize,
) -> Result<ScalabilityResult> {
    let sens = pd_sensitivity(query, params)?;
    check_feasible(sens, n_max, query, params)?;
    let mut best = 1;
    for n in 1..=n_max {
        if p_output(n, params)? - sens >= 0.0 {
            best = n;
        }
    }
    result_for(best, n_max, sens, query, params)
}

/// Same answer as [`optimal_n`], by bisection on the monotone margin.
pub fn optimal_n_bisect(
    query: &PrecisionQuery,
    params: &PlatformParams,
    n_max: usize,
) -> Result<ScalabilityResult> {
    let sens = pd_sensitivity(query, params)?;
    check_feasible(sens, n_max, query, params)?;
    let n_opt = largest_feasible(sens, params, n_max)?;
    result_for(n_opt, n_max, sens, query, params)
}

fn largest_feasible(sens: f64, params: &PlatformParams, n_max: usize) -> Result<usize> {
    // invariant: margin(lo) >= 0; margin(hi + 1) < 0 or hi == n_max
    let (mut lo, mut hi) = (1usize, n_max);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if p_output(mid, params)? - sens >= 0.0 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationTarget {
    pub platform: Platform,
    pub bits: u32,
    pub dr_sps: f64,
    pub expected_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResidual {
    pub target: CalibrationTarget,
    pub n_opt: usize,
    pub residual: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlatformCalibration {
    pub platform: Platform,
    pub d_mrr_cm: f64,
    pub total_abs_residual: u64,
    pub residuals: Vec<CalibrationResidual>,
    /// Fitted pitch lies in the 5–50 µm window expected of a ring pitch.
    pub physically_plausible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationGrid {
    pub min_cm: f64,
    pub max_cm: f64,
    pub step_cm: f64,
}

impl Default for CalibrationGrid {
    /// 1 µm steps over [1 µm, 2 cm].
    fn default() -> Self {
        CalibrationGrid {
            min_cm: 1e-4,
            max_cm: 2.0,
            step_cm: 1e-4,
        }
    }
}

pub const PLAUSIBLE_D_MRR_CM: (f64, f64) = (5e-4, 5e-3);

/// Published TPC sizes: 4-bit at 1/5/10 GS/s for both platforms, plus the 3-bit, 1 GS/s pair.
pub fn published_size_targets() -> Vec<CalibrationTarget> {
    let t = |platform, bits, dr_sps, expected_n| CalibrationTarget {
        platform,
        bits,
        dr_sps,
        expected_n,
    };
    vec![
        t(Platform::Soi, 4, 1e9, 22),
        t(Platform::Soi, 4, 5e9, 15),
        t(Platform::Soi, 4, 10e9, 13),
        t(Platform::Sin, 4, 1e9, 47),
        t(Platform::Sin, 4, 5e9, 28),
        t(Platform::Sin, 4, 10e9, 22),
        t(Platform::Sin, 3, 1e9, 52),
        t(Platform::Soi, 3, 1e9, 35),
    ]
}

/// Grid search for the ring pitch minimizing total |n_opt − expected|, per platform.
///
/// Ties go to the smaller pitch. `base` supplies every other parameter of each platform.
pub fn calibrate_d_mrr(
    targets: &[CalibrationTarget],
    grid: CalibrationGrid,
    base: impl Fn(Platform) -> PlatformParams,
    n_max: usize,
) -> Result<Vec<PlatformCalibration>> {
    if targets.is_empty() {
        return Err(Error::InvalidInput(
            "calibration needs at least one target".into(),
        ));
    }
    if !(grid.min_cm > 0.0 && grid.max_cm >= grid.min_cm && grid.step_cm > 0.0) {
        return Err(Error::InvalidInput(
            "calibration range must be positive".into(),
        ));
    }
    let mut by_platform: BTreeMap<Platform, Vec<CalibrationTarget>> = BTreeMap::new();
    for t in targets {
        by_platform.entry(t.platform).or_default().push(*t);
    }
    let steps = ((grid.max_cm - grid.min_cm) / grid.step_cm + 1e-9).floor() as usize;

    by_platform
        .into_iter()
        .map(|(platform, targets)| {
            let mut params = base(platform);
            let sens = targets
                .iter()
                .map(|t| pd_sensitivity(&PrecisionQuery::new(t.bits, t.dr_sps)?, &params))
                .collect::<Result<Vec<_>>>()?;

            let mut best: Option<(u64, f64)> = None;
            for i in 0..=steps {
                params.d_mrr_cm = grid.min_cm + grid.step_cm * i as f64;
                let mut total = 0u64;
                for (t, &s) in targets.iter().zip(&sens) {
                    total += n_opt_or_zero(s, &params, n_max)?.abs_diff(t.expected_n) as u64;
                }
                if best.is_none_or(|(b, _)| total < b) {
                    best = Some((total, params.d_mrr_cm));
                }
            }
            let (total_abs_residual, d_mrr_cm) = best.expect("grid has at least one point");
            params.d_mrr_cm = d_mrr_cm;
            let residuals = targets
                .iter()
                .zip(&sens)
                .map(|(t, &s)| {
                    let n_opt = n_opt_or_zero(s, &params, n_max)?;
                    Ok(CalibrationResidual {
                        target: *t,
                        n_opt,
                        residual: n_opt as i64 - t.expected_n as i64,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PlatformCalibration {
                platform,
                d_mrr_cm,
                total_abs_residual,
                residuals,
                physically_plausible: (PLAUSIBLE_D_MRR_CM.0..=PLAUSIBLE_D_MRR_CM.1)
                    .contains(&d_mrr_cm),
            })
        })
        .collect()
}

/// `n_opt`, or 0 when even a single multiplier cannot close the link.
fn n_opt_or_zero(sens: f64, params: &PlatformParams, n_max: usize) -> Result<usize> {
    if p_output(1, params)? < sens {
        return Ok(0);
    }
    largest_feasible(sens, params, n_max)
}
