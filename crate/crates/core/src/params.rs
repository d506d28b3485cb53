//! Physical constants, unit conversions and the per-platform parameter sets.
//!
//! Every other module reads its physical inputs through the types here. The
//! link-budget constants come in two flavours: [`PlatformParams::defaults`]
//! (the published table values with the nominal 20 µm ring pitch) and
//! [`load_platform`], which additionally applies the calibrated values shipped
//! in `config/default.toml`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped defaults; currently the calibrated ring pitch per platform.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

/// Electron charge and Boltzmann constant. Not configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub q: f64,
    pub k_b: f64,
}

pub const PHYSICAL: PhysicalConstants = PhysicalConstants {
    q: 1.602_176_634e-19,
    k_b: 1.380_649e-23,
};

pub fn dbm_to_mw(p_dbm: f64) -> Result<f64> {
    finite("power_dbm", p_dbm)?;
    Ok(10f64.powf(p_dbm / 10.0))
}

pub fn mw_to_dbm(p_mw: f64) -> Result<f64> {
    if !(p_mw.is_finite() && p_mw > 0.0) {
        return Err(Error::InvalidInput(format!(
            "power must be positive and finite, got {p_mw} mW"
        )));
    }
    Ok(10.0 * p_mw.log10())
}

pub fn db_to_linear(x_db: f64) -> Result<f64> {
    finite("ratio_db", x_db)?;
    Ok(10f64.powf(x_db / 10.0))
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ratio must be positive and finite, got {x}"
        )));
    }
    Ok(10.0 * x.log10())
}

fn finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must be finite, got {x}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Soi,
    Sin,
}

impl Platform {
    pub const ALL: [Platform; 2] = [Platform::Soi, Platform::Sin];

    pub fn key(self) -> &'static str {
        match self {
            Platform::Soi => "soi",
            Platform::Sin => "sin",
        }
    }

    /// Name of the accelerator built on this platform.
    pub fn accelerator_name(self) -> &'static str {
        match self {
            Platform::Soi => "SOIPhAR",
            Platform::Sin => "SiNPhAR",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Platform::Soi => "SOI",
            Platform::Sin => "SiN",
        })
    }
}

impl FromStr for Platform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soi" | "soiphar" | "soi-mwa" => Ok(Platform::Soi),
            "sin" | "sinphar" => Ok(Platform::Sin),
            other => Err(Error::InvalidInput(format!("unknown platform `{other}`"))),
        }
    }
}

/// Link-budget and photodetector constants for one material platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformParams {
    pub platform_id: Platform,
    pub p_laser_dbm: f64,
    pub p_smf_db: f64,
    pub p_coupling_db: f64,
    pub wg_loss_db_per_cm: f64,
    /// Extra propagation loss per wavelength beyond 20 wavelengths.
    pub p_inc_db_per_cm_per_lambda: f64,
    pub splitter_il_db: f64,
    pub mrm_il_db: f64,
    pub mrr_il_db: f64,
    pub mrm_obl_db: f64,
    pub mrr_obl_db: f64,
    pub penalty_db: f64,
    /// A/W
    pub responsivity: f64,
    pub dark_current_a: f64,
    pub load_resistance_ohm: f64,
    pub temperature_k: f64,
    pub rin_db_per_hz: f64,
    pub d_mrr_cm: f64,
}

/// Ring pitch used when no calibration is applied (20 µm).
pub const NOMINAL_D_MRR_CM: f64 = 2e-3;

impl PlatformParams {
    /// Published table values, with the nominal ring pitch.
    pub fn defaults(id: Platform) -> Self {
        let (wg, inc, mrm) = match id {
            Platform::Soi => (1.5, 0.1, 4.0),
            Platform::Sin => (0.5, 0.01, 0.235),
        };
        PlatformParams {
            platform_id: id,
            p_laser_dbm: 10.0,
            p_smf_db: 0.0,
            p_coupling_db: 1.6,
            wg_loss_db_per_cm: wg,
            p_inc_db_per_cm_per_lambda: inc,
            splitter_il_db: 0.01,
            mrm_il_db: mrm,
            mrr_il_db: 0.01,
            mrm_obl_db: 0.01,
            mrr_obl_db: 0.01,
            penalty_db: 1.8,
            responsivity: 1.2,
            dark_current_a: 35e-9,
            load_resistance_ohm: 50.0,
            temperature_k: 300.0,
            rin_db_per_hz: -140.0,
            d_mrr_cm: NOMINAL_D_MRR_CM,
        }
    }

    /// Linearized RIN, 1/Hz.
    pub fn rin_linear(&self) -> f64 {
        10f64.powf(self.rin_db_per_hz / 10.0)
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "p_laser_dbm" => &mut self.p_laser_dbm,
            "p_smf_db" => &mut self.p_smf_db,
            "p_coupling_db" => &mut self.p_coupling_db,
            "wg_loss_db_per_cm" => &mut self.wg_loss_db_per_cm,
            "p_inc_db_per_cm_per_lambda" => &mut self.p_inc_db_per_cm_per_lambda,
            "splitter_il_db" => &mut self.splitter_il_db,
            "mrm_il_db" => &mut self.mrm_il_db,
            "mrr_il_db" => &mut self.mrr_il_db,
            "mrm_obl_db" => &mut self.mrm_obl_db,
            "mrr_obl_db" => &mut self.mrr_obl_db,
            "penalty_db" => &mut self.penalty_db,
            "responsivity" => &mut self.responsivity,
            "dark_current_a" => &mut self.dark_current_a,
            "load_resistance_ohm" => &mut self.load_resistance_ohm,
            "temperature_k" => &mut self.temperature_k,
            "rin_db_per_hz" => &mut self.rin_db_per_hz,
            "d_mrr_cm" => &mut self.d_mrr_cm,
            _ => return None,
        })
    }

    pub fn apply_overrides(&mut self, overrides: &Overrides) -> Result<()> {
        for (key, &value) in overrides {
            let slot = self
                .field_mut(key)
                .ok_or_else(|| Error::UnknownParameter(key.clone()))?;
            *slot = value;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let losses = [
            ("p_smf_db", self.p_smf_db),
            ("p_coupling_db", self.p_coupling_db),
            ("wg_loss_db_per_cm", self.wg_loss_db_per_cm),
            (
                "p_inc_db_per_cm_per_lambda",
                self.p_inc_db_per_cm_per_lambda,
            ),
            ("splitter_il_db", self.splitter_il_db),
            ("mrm_il_db", self.mrm_il_db),
            ("mrr_il_db", self.mrr_il_db),
            ("mrm_obl_db", self.mrm_obl_db),
            ("mrr_obl_db", self.mrr_obl_db),
            ("penalty_db", self.penalty_db),
        ];
        for (name, v) in losses {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "loss `{name}` must be a nonnegative number, got {v}"
                )));
            }
        }
        let positive = [
            ("responsivity", self.responsivity),
            ("load_resistance_ohm", self.load_resistance_ohm),
            ("temperature_k", self.temperature_k),
            ("d_mrr_cm", self.d_mrr_cm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "`{name}` must be positive, got {v}"
                )));
            }
        }
        if !(self.dark_current_a.is_finite() && self.dark_current_a >= 0.0) {
            return Err(Error::InvalidInput("dark current must be >= 0".into()));
        }
        finite("p_laser_dbm", self.p_laser_dbm)?;
        finite("rin_db_per_hz", self.rin_db_per_hz)
    }
}

/// Field-name → value overrides for [`PlatformParams`].
pub type Overrides = BTreeMap<String, f64>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShippedConfig {
    #[serde(default)]
    platform: BTreeMap<Platform, Overrides>,
}

/// Overrides baked into the shipped default config for `id`.
pub fn shipped_overrides(id: Platform) -> Overrides {
    // The embedded file is covered by tests; a parse failure here is a build defect.
    let cfg: ShippedConfig =
        toml::from_str(DEFAULT_CONFIG_TOML).expect("embedded default.toml is valid");
    cfg.platform.get(&id).cloned().unwrap_or_default()
}

/// Table defaults, then the shipped calibration, then caller overrides.
pub fn load_platform(id: Platform, overrides: Option<&Overrides>) -> Result<PlatformParams> {
    let mut p = PlatformParams::defaults(id);
    p.apply_overrides(&shipped_overrides(id))?;
    if let Some(o) = overrides {
        p.apply_overrides(o)?;
    }
    Ok(p)
}

/// Reads a flat `field = value` override file (TOML or JSON, chosen by extension).
pub fn read_overrides(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed: std::result::Result<Overrides, String> = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    let overrides = parsed.map_err(|message| Error::Schema {
        source_name: path.display().to_string(),
        message,
    })?;
    // reject unknown keys up front, before any platform is touched
    let mut probe = PlatformParams::defaults(Platform::Soi);
    for key in overrides.keys() {
        if probe.field_mut(key).is_none() {
            return Err(Error::UnknownParameter(key.clone()));
        }
    }
    Ok(overrides)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Latency {
    Seconds(f64),
    /// Electronic clock cycles; see [`PeripheralParams::clock_period_s`].
    Cycles(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub power_mw: f64,
    pub latency: Latency,
    pub area_mm2: f64,
}

impl ComponentRecord {
    const fn ns(power_mw: f64, latency_ns: f64, area_mm2: f64) -> Self {
        ComponentRecord {
            power_mw,
            latency: Latency::Seconds(latency_ns / 1e9),
            area_mm2,
        }
    }

    pub fn power_w(&self) -> f64 {
        self.power_mw * 1e-3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdcRecord {
    pub rate_sps: f64,
    pub record: ComponentRecord,
}

/// Electronic peripherals and per-device costs of the accelerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeripheralParams {
    pub reduction_network: ComponentRecord,
    pub activation_unit: ComponentRecord,
    pub io_interface: ComponentRecord,
    pub pooling_unit: ComponentRecord,
    pub edram: ComponentRecord,
    pub bus: ComponentRecord,
    pub router: ComponentRecord,
    pub dac: ComponentRecord,
    pub adcs: Vec<AdcRecord>,
    pub mrm_eo_energy_pj_per_bit: f64,
    pub mrm_area_mm2: f64,
    /// Period of the electronic clock that cycle-denominated latencies refer to.
    pub clock_period_s: f64,
}

impl Default for PeripheralParams {
    fn default() -> Self {
        PeripheralParams {
            reduction_network: ComponentRecord::ns(0.050, 3.125, 3.0e-5),
            activation_unit: ComponentRecord::ns(0.52, 0.78, 6.0e-5),
            io_interface: ComponentRecord::ns(140.18, 0.78, 2.44e-2),
            pooling_unit: ComponentRecord::ns(0.4, 3.125, 2.4e-4),
            edram: ComponentRecord::ns(41.1, 1.56, 1.66e-1),
            bus: ComponentRecord {
                power_mw: 7.0,
                latency: Latency::Cycles(5),
                area_mm2: 9.0e-3,
            },
            router: ComponentRecord {
                power_mw: 42.0,
                latency: Latency::Cycles(2),
                area_mm2: 1.5e-2,
            },
            dac: ComponentRecord::ns(12.5, 0.78, 2.5e-3),
            adcs: vec![
                AdcRecord {
                    rate_sps: 1e9,
                    record: ComponentRecord::ns(2.55, 0.78, 2e-3),
                },
                AdcRecord {
                    rate_sps: 5e9,
                    record: ComponentRecord::ns(11.0, 0.78, 21e-3),
                },
                AdcRecord {
                    rate_sps: 10e9,
                    record: ComponentRecord::ns(30.0, 0.78, 103e-3),
                },
            ],
            mrm_eo_energy_pj_per_bit: 1.4,
            mrm_area_mm2: 0.95e-4,
            clock_period_s: 0.78e-9,
        }
    }
}

impl PeripheralParams {
    /// ADC record for the given sample rate; unlisted rates are an error.
    pub fn adc(&self, rate_sps: f64) -> Result<&ComponentRecord> {
        self.adcs
            .iter()
            .find(|a| (a.rate_sps - rate_sps).abs() <= 1e-9 * rate_sps.abs())
            .map(|a| &a.record)
            .ok_or_else(|| Error::MissingRecord(format!("ADC at {rate_sps:e} S/s")))
    }

    pub fn latency_s(&self, rec: &ComponentRecord) -> f64 {
        match rec.latency {
            Latency::Seconds(s) => s,
            Latency::Cycles(c) => f64::from(c) * self.clock_period_s,
        }
    }

    /// Energy of one eDRAM access (power × access latency), joules.
    pub fn edram_access_energy_j(&self) -> f64 {
        self.edram.power_w() * self.latency_s(&self.edram)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn dbm_examples() {
        assert!(rel(dbm_to_mw(10.0).unwrap(), 10.0) < 1e-12);
        assert_eq!(dbm_to_mw(0.0).unwrap(), 1.0);
        assert!(rel(dbm_to_mw(-30.0).unwrap(), 1e-3) < 1e-12);
        assert!(dbm_to_mw(f64::NAN).is_err());
        assert!(dbm_to_mw(f64::INFINITY).is_err());
    }

    #[test]
    fn db_examples() {
        assert!((db_to_linear(3.0103).unwrap() - 2.0).abs() < 1e-4);
        assert_eq!(db_to_linear(0.0).unwrap(), 1.0);
        assert!(rel(db_to_linear(-140.0).unwrap(), 1e-14) < 1e-12);
        assert!(db_to_linear(f64::NAN).is_err());
    }

    #[test]
    fn constants_within_tolerance() {
        assert!(rel(PHYSICAL.q, 1.602e-19) < 5e-3);
        assert!(rel(PHYSICAL.k_b, 1.381e-23) < 5e-3);
    }

    #[test]
    fn table_defaults() {
        let soi = PlatformParams::defaults(Platform::Soi);
        let sin = PlatformParams::defaults(Platform::Sin);
        assert_eq!(soi.wg_loss_db_per_cm, 1.5);
        assert_eq!(sin.wg_loss_db_per_cm, 0.5);
        assert_eq!(soi.p_inc_db_per_cm_per_lambda, 0.1);
        assert_eq!(sin.p_inc_db_per_cm_per_lambda, 0.01);
        assert_eq!(soi.mrm_il_db, 4.0);
        assert_eq!(sin.mrm_il_db, 0.235);
        for p in [&soi, &sin] {
            assert_eq!(p.penalty_db, 1.8);
            assert_eq!(p.p_laser_dbm, 10.0);
            assert_eq!(p.p_smf_db, 0.0);
            assert_eq!(p.p_coupling_db, 1.6);
            assert_eq!(p.splitter_il_db, 0.01);
            assert_eq!(p.mrr_il_db, 0.01);
            assert_eq!(p.mrm_obl_db, 0.01);
            assert_eq!(p.mrr_obl_db, 0.01);
            assert_eq!(p.responsivity, 1.2);
            assert_eq!(p.dark_current_a, 35e-9);
            assert_eq!(p.load_resistance_ohm, 50.0);
            assert_eq!(p.temperature_k, 300.0);
            assert_eq!(p.rin_db_per_hz, -140.0);
            assert_eq!(p.d_mrr_cm, 2e-3);
            p.validate().unwrap();
        }
    }

    #[test]
    fn load_platform_examples() {
        let sin = load_platform(Platform::Sin, None).unwrap();
        assert_eq!(sin.wg_loss_db_per_cm, 0.5);
        let soi = load_platform(Platform::Soi, None).unwrap();
        assert_eq!(soi.mrm_il_db, 4.0);
        let o: Overrides = [("wg_loss_db_per_cm".to_string(), 3.0)].into();
        let soi = load_platform(Platform::Soi, Some(&o)).unwrap();
        assert_eq!(soi.wg_loss_db_per_cm, 3.0);
    }

    #[test]
    fn load_platform_applies_shipped_calibration() {
        for id in Platform::ALL {
            let shipped = shipped_overrides(id);
            let p = load_platform(id, None).unwrap();
            assert_eq!(p.d_mrr_cm, shipped["d_mrr_cm"]);
        }
    }

    #[test]
    fn override_errors() {
        let o: Overrides = [("wg_loss".to_string(), 3.0)].into();
        assert!(matches!(
            load_platform(Platform::Soi, Some(&o)),
            Err(Error::UnknownParameter(k)) if k == "wg_loss"
        ));
        let o: Overrides = [("mrm_il_db".to_string(), -1.0)].into();
        assert!(load_platform(Platform::Sin, Some(&o)).is_err());
    }

    #[test]
    fn deterministic_defaults() {
        assert_eq!(
            load_platform(Platform::Sin, None).unwrap(),
            load_platform(Platform::Sin, None).unwrap()
        );
    }

    #[test]
    fn read_override_files() {
        let dir = std::env::temp_dir().join(format!("photogemm-params-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let toml_path = dir.join("o.toml");
        std::fs::write(&toml_path, "wg_loss_db_per_cm = 3.0\nd_mrr_cm = 0.01\n").unwrap();
        let o = read_overrides(&toml_path).unwrap();
        assert_eq!(o["wg_loss_db_per_cm"], 3.0);

        let json_path = dir.join("o.json");
        std::fs::write(&json_path, r#"{"penalty_db": 2.0}"#).unwrap();
        assert_eq!(read_overrides(&json_path).unwrap()["penalty_db"], 2.0);

        std::fs::write(&json_path, r#"{"bogus": 2.0}"#).unwrap();
        assert!(matches!(
            read_overrides(&json_path),
            Err(Error::UnknownParameter(_))
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn peripheral_table() {
        let p = PeripheralParams::default();
        assert_eq!(p.edram.power_mw, 41.1);
        assert_eq!(p.edram.latency, Latency::Seconds(1.56e-9));
        assert_eq!(p.edram.area_mm2, 0.166);
        assert_eq!(p.dac.power_mw, 12.5);
        assert_eq!(p.adc(10e9).unwrap().power_mw, 30.0);
        assert_eq!(p.adc(1e9).unwrap().power_mw, 2.55);
        assert_eq!(p.adc(5e9).unwrap().power_mw, 11.0);
        assert_eq!(p.mrm_eo_energy_pj_per_bit, 1.4);
        assert_eq!(p.mrm_area_mm2, 0.95e-4);
        assert!(matches!(p.adc(2e9), Err(Error::MissingRecord(_))));
        assert!((p.edram_access_energy_j() - 64.116e-12).abs() < 1e-18);
    }
}
