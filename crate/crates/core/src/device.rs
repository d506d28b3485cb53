//! Electro-optic model of the ITO-clad SiN microring modulator.
//!
//! The voltage → resonance-shift curve is the measured six-point table,
//! interpolated piecewise-linearly. The through port is modeled as a Lorentzian
//! all-pass notch whose depth is set by the extinction ratio and whose width is
//! set by the loaded Q.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItoStatePoint {
    pub carrier_conc_cm3: f64,
    pub re_n_ito: f64,
    pub im_n_ito: f64,
    pub re_n_eff: f64,
    pub im_n_eff: f64,
    pub voltage_v: f64,
    /// Blue shift of the resonance, pm.
    pub res_shift_pm: f64,
}

const fn pt(
    n19: f64,
    re_ito: f64,
    im_ito: f64,
    re_eff: f64,
    im_eff: f64,
    v: f64,
    shift: f64,
) -> ItoStatePoint {
    ItoStatePoint {
        carrier_conc_cm3: n19 * 1e19,
        re_n_ito: re_ito,
        im_n_ito: im_ito,
        re_n_eff: re_eff,
        im_n_eff: im_eff,
        voltage_v: v,
        res_shift_pm: shift,
    }
}

/// Measured ITO accumulation-layer characterization.
pub const ITO_TABLE: [ItoStatePoint; 6] = [
    pt(1.0, 1.9556, 0.0100, 1.9735, 0.0001, 0.0, 0.0),
    pt(5.0, 1.9111, 0.0403, 1.9724, 0.0003, 1.8, 830.0),
    pt(9.0, 1.8667, 0.0896, 1.9712, 0.0006, 3.7, 1580.0),
    pt(13.0, 1.8222, 0.1289, 1.9701, 0.0011, 5.5, 2470.0),
    pt(17.0, 1.7778, 0.1582, 1.9692, 0.0017, 7.3, 3210.0),
    pt(20.0, 1.7333, 0.1874, 1.9680, 0.0022, 9.2, 4000.0),
];

pub const MAX_WEIGHT_BITS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrmModel {
    pub resonance_nm: f64,
    pub q_loaded: f64,
    pub fsr_nm: f64,
    /// Through-port insertion loss; consumed by the link budget, not by the notch shape.
    pub il_db: f64,
    /// Notch depth.
    pub er_db: f64,
    pub tuning_pm_per_v: f64,
    /// Smallest resonance displacement the drive electronics can resolve.
    pub shift_resolution_pm: f64,
    pub shift_curve: Vec<ItoStatePoint>,
}

impl Default for MrmModel {
    fn default() -> Self {
        MrmModel {
            resonance_nm: 1600.0,
            q_loaded: 2000.0,
            fsr_nm: 18.0,
            il_db: 0.235,
            er_db: 8.2,
            tuning_pm_per_v: 450.0,
            shift_resolution_pm: 1.0,
            shift_curve: ITO_TABLE.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightLevel {
    pub transmission: f64,
    pub shift_pm: f64,
    pub voltage_v: f64,
}

impl MrmModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("resonance_nm", self.resonance_nm),
            ("q_loaded", self.q_loaded),
            ("fsr_nm", self.fsr_nm),
            ("er_db", self.er_db),
            ("tuning_pm_per_v", self.tuning_pm_per_v),
            ("shift_resolution_pm", self.shift_resolution_pm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "`{name}` must be positive, got {v}"
                )));
            }
        }
        if self.shift_curve.len() < 2 {
            return Err(Error::InvalidInput(
                "shift curve needs at least two points".into(),
            ));
        }
        let first = &self.shift_curve[0];
        if first.voltage_v != 0.0 || first.res_shift_pm != 0.0 {
            return Err(Error::InvalidInput(
                "shift curve must start at (0 V, 0 pm)".into(),
            ));
        }
        for w in self.shift_curve.windows(2) {
            if !(w[1].voltage_v > w[0].voltage_v && w[1].res_shift_pm > w[0].res_shift_pm) {
                return Err(Error::InvalidInput(
                    "shift curve must be strictly increasing in voltage and shift".into(),
                ));
            }
        }
        let derived = self.max_shift_pm() / self.max_voltage_v();
        if ((derived - self.tuning_pm_per_v) / self.tuning_pm_per_v).abs() > 0.10 {
            return Err(Error::InvalidInput(format!(
                "curve tuning efficiency {derived:.1} pm/V disagrees with {:.1} pm/V by more than 10%",
                self.tuning_pm_per_v
            )));
        }
        Ok(())
    }

    pub fn max_voltage_v(&self) -> f64 {
        self.shift_curve.last().map_or(0.0, |p| p.voltage_v)
    }

    pub fn max_shift_pm(&self) -> f64 {
        self.shift_curve.last().map_or(0.0, |p| p.res_shift_pm)
    }

    /// Half width at half maximum of the notch, nm.
    pub fn hwhm_nm(&self) -> f64 {
        self.resonance_nm / (2.0 * self.q_loaded)
    }

    /// On-resonance transmission floor.
    pub fn t_min(&self) -> f64 {
        10f64.powf(-self.er_db / 10.0)
    }

    /// Resonance shift at `v` volts (piecewise-linear through the curve).
    pub fn resonance_shift_at(&self, v: f64) -> Result<f64> {
        let v_max = self.max_voltage_v();
        if !(0.0..=v_max).contains(&v) {
            return Err(Error::OutOfRange {
                what: "voltage_v",
                value: v,
                min: 0.0,
                max: v_max,
            });
        }
        Ok(interpolate(
            &self.shift_curve,
            v,
            |p| p.voltage_v,
            |p| p.res_shift_pm,
        ))
    }

    /// Drive voltage producing `shift_pm`; inverse of [`Self::resonance_shift_at`].
    pub fn voltage_for_shift(&self, shift_pm: f64) -> Result<f64> {
        let s_max = self.max_shift_pm();
        if !(0.0..=s_max).contains(&shift_pm) {
            return Err(Error::OutOfRange {
                what: "shift_pm",
                value: shift_pm,
                min: 0.0,
                max: s_max,
            });
        }
        Ok(interpolate(
            &self.shift_curve,
            shift_pm,
            |p| p.res_shift_pm,
            |p| p.voltage_v,
        ))
    }

    /// Through-port power transmission at `lambda_nm` with the resonance blue-shifted by `shift_pm`.
    pub fn through_transmission(&self, lambda_nm: f64, shift_pm: f64) -> Result<f64> {
        if lambda_nm.is_nan() || (lambda_nm - self.resonance_nm).abs() > self.fsr_nm {
            return Err(Error::OutOfRange {
                what: "lambda_nm",
                value: lambda_nm,
                min: self.resonance_nm - self.fsr_nm,
                max: self.resonance_nm + self.fsr_nm,
            });
        }
        if !shift_pm.is_finite() {
            return Err(Error::InvalidInput("shift must be finite".into()));
        }
        let shifted = self.resonance_nm - shift_pm * 1e-3;
        let x = (lambda_nm - shifted) / self.hwhm_nm();
        Ok(lorentzian(self.t_min(), x))
    }

    /// Blue-side shift (pm) that brings the transmission at the rest resonance to `t`.
    pub fn shift_for_transmission(&self, t: f64) -> Result<f64> {
        let t_min = self.t_min();
        if !(t >= t_min && t < 1.0) {
            return Err(Error::OutOfRange {
                what: "transmission",
                value: t,
                min: t_min,
                max: 1.0,
            });
        }
        let x = ((1.0 - t_min) / (1.0 - t) - 1.0).max(0.0).sqrt();
        Ok(x * self.hwhm_nm() * 1e3)
    }

    /// `2^bits` transmission levels, uniform in linear power, probed at the rest resonance.
    pub fn weight_levels(&self, bits: u32) -> Result<Vec<WeightLevel>> {
        if !(1..=MAX_WEIGHT_BITS).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "bits must be in 1..={MAX_WEIGHT_BITS}, got {bits}"
            )));
        }
        let levels = self.levels_unchecked(bits)?;
        if !self.resolvable(&levels) {
            let max_feasible_bits = (1..bits)
                .rev()
                .find(|&b| self.levels_unchecked(b).is_ok_and(|l| self.resolvable(&l)))
                .unwrap_or(0);
            return Err(Error::Capability {
                bits,
                max_feasible_bits,
            });
        }
        Ok(levels)
    }

    fn levels_unchecked(&self, bits: u32) -> Result<Vec<WeightLevel>> {
        let count = 1usize << bits;
        let t_min = self.t_min();
        let s_max = self.max_shift_pm();
        let t_max = self.through_transmission(self.resonance_nm, s_max)?;
        let step = (t_max - t_min) / (count - 1) as f64;
        (0..count)
            .map(|i| {
                let (transmission, shift_pm) = if i == 0 {
                    (t_min, 0.0)
                } else if i == count - 1 {
                    (t_max, s_max)
                } else {
                    let t = t_min + step * i as f64;
                    (t, self.shift_for_transmission(t)?)
                };
                if shift_pm > s_max {
                    return Err(Error::Capability {
                        bits,
                        max_feasible_bits: 0,
                    });
                }
                Ok(WeightLevel {
                    transmission,
                    shift_pm,
                    voltage_v: self.voltage_for_shift(shift_pm)?,
                })
            })
            .collect()
    }

    fn resolvable(&self, levels: &[WeightLevel]) -> bool {
        levels
            .windows(2)
            .all(|w| w[1].shift_pm - w[0].shift_pm >= self.shift_resolution_pm)
    }

    /// Transmission at each wavelength (rows) for each shift (columns).
    pub fn spectrum(&self, wavelengths_nm: &[f64], shifts_pm: &[f64]) -> Result<Vec<Vec<f64>>> {
        wavelengths_nm
            .iter()
            .map(|&l| {
                shifts_pm
                    .iter()
                    .map(|&s| self.through_transmission(l, s))
                    .collect()
            })
            .collect()
    }
}

fn lorentzian(t_min: f64, x: f64) -> f64 {
    1.0 - (1.0 - t_min) / (1.0 + x * x)
}

fn interpolate(
    curve: &[ItoStatePoint],
    at: f64,
    key: impl Fn(&ItoStatePoint) -> f64,
    val: impl Fn(&ItoStatePoint) -> f64,
) -> f64 {
    let idx = curve
        .windows(2)
        .position(|w| at <= key(&w[1]))
        .unwrap_or(curve.len() - 2);
    let (a, b) = (&curve[idx], &curve[idx + 1]);
    if at == key(a) {
        return val(a);
    }
    if at == key(b) {
        return val(b);
    }
    let f = (at - key(a)) / (key(b) - key(a));
    val(a) + f * (val(b) - val(a))
}
