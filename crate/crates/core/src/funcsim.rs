//! Bit-true functional model of one dot-product element.
//!
//! Each operand magnitude is mapped onto a modulator weight level, the two
//! through-port transmissions multiply, the product is steered to the positive
//! or negative lane by its sign, the balanced photodiodes subtract the lanes,
//! and the integrating receiver accumulates one N-wide partial dot product per
//! symbol cycle. Powers are normalized so that a full-scale product is 1.0.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::device::{MrmModel, WeightLevel};
use crate::error::{Error, Result};
use crate::params::{PlatformParams, PHYSICAL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedVector {
    pub values: Vec<i64>,
    /// Magnitude precision.
    pub bits: u32,
    /// Real value represented by one integer step.
    pub scale: f64,
}

impl QuantizedVector {
    pub fn new(values: Vec<i64>, bits: u32, scale: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "quantized vector must be nonempty".into(),
            ));
        }
        if !(1..=crate::device::MAX_WEIGHT_BITS).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "bits must be in 1..=8, got {bits}"
            )));
        }
        let max = max_magnitude(bits);
        if let Some(v) = values.iter().find(|v| v.abs() > max) {
            return Err(Error::InvalidInput(format!(
                "value {v} exceeds the {bits}-bit magnitude range ±{max}"
            )));
        }
        Ok(QuantizedVector {
            values,
            bits,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn max_magnitude(bits: u32) -> i64 {
    (1i64 << bits) - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lane {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalSymbol {
    pub power: f64,
    pub lane: Lane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccumulatorState {
    pub charge: f64,
    pub cycles_elapsed: u64,
    pub capacity: f64,
}

impl AccumulatorState {
    pub fn new(capacity: f64) -> Result<Self> {
        if capacity.is_nan() || capacity <= 0.0 {
            return Err(Error::InvalidInput(
                "accumulator capacity must be positive".into(),
            ));
        }
        Ok(AccumulatorState {
            charge: 0.0,
            cycles_elapsed: 0,
            capacity,
        })
    }

    /// Integrates one cycle of BPD output. Exceeding the capacity is an error, never a clip.
    pub fn accumulate(self, cycle_current: f64) -> Result<Self> {
        let charge = self.charge + cycle_current;
        if charge.abs() > self.capacity {
            return Err(Error::Saturation {
                cycle: self.cycles_elapsed,
                charge,
                capacity: self.capacity,
            });
        }
        Ok(AccumulatorState {
            charge,
            cycles_elapsed: self.cycles_elapsed + 1,
            capacity: self.capacity,
        })
    }
}

/// Normalized symbol powers for every magnitude of a `bits`-wide operand.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEncoder {
    bits: u32,
    levels: Vec<WeightLevel>,
    normalized: Vec<f64>,
}

impl SymbolEncoder {
    pub fn new(model: &MrmModel, bits: u32) -> Result<Self> {
        let levels = model.weight_levels(bits)?;
        let t0 = levels[0].transmission;
        let span = levels[levels.len() - 1].transmission - t0;
        let normalized = levels
            .iter()
            .map(|l| (l.transmission - t0) / span)
            .collect();
        Ok(SymbolEncoder {
            bits,
            levels,
            normalized,
        })
    }

    pub fn encode(&self, value: i64) -> Result<f64> {
        usize::try_from(value)
            .ok()
            .and_then(|i| self.normalized.get(i).copied())
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "value {value} outside 0..={} for {} bits",
                    max_magnitude(self.bits),
                    self.bits
                ))
            })
    }

    /// Inverse of [`Self::encode`] on the level grid.
    pub fn decode(&self, power: f64) -> Option<i64> {
        self.normalized
            .iter()
            .position(|&p| (p - power).abs() < 1e-9)
            .map(|i| i as i64)
    }

    pub fn levels(&self) -> &[WeightLevel] {
        &self.levels
    }
}

/// Normalized optical power of an input-encoding symbol.
pub fn encode_symbol(value: i64, bits: u32, model: &MrmModel) -> Result<f64> {
    SymbolEncoder::new(model, bits)?.encode(value)
}

/// Weighting a symbol: cascaded through ports multiply in power.
pub fn multiply_symbol(input_level: f64, weight_level: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&input_level) && (0.0..=1.0).contains(&weight_level));
    input_level * weight_level
}

pub fn route_sign(product_power: f64, sign: i8) -> Result<OpticalSymbol> {
    if product_power.is_nan() || product_power < 0.0 {
        return Err(Error::InvalidInput(format!(
            "optical power must be nonnegative, got {product_power}"
        )));
    }
    let lane = match sign {
        1 => Lane::Positive,
        -1 => Lane::Negative,
        s => return Err(Error::InvalidInput(format!("sign must be ±1, got {s}"))),
    };
    Ok(OpticalSymbol {
        power: product_power,
        lane,
    })
}

/// Lane sums for one cycle: (positive, negative).
pub fn lane_sums(symbols: &[OpticalSymbol]) -> (f64, f64) {
    symbols.iter().fold((0.0, 0.0), |(p, n), s| match s.lane {
        Lane::Positive => (p + s.power, n),
        Lane::Negative => (p, n + s.power),
    })
}

/// Balanced detection: responsivity × (positive lane − negative lane).
pub fn bpd_superpose(symbols: &[OpticalSymbol], responsivity: f64) -> f64 {
    let (p, n) = lane_sums(symbols);
    responsivity * (p - n)
}

/// Receiver noise injection, using the photodetector noise densities of the link budget.
#[derive(Debug, Clone)]
pub struct NoiseConfig {
    /// Optical power at the detector of one full-scale product symbol, W.
    pub full_scale_power_w: f64,
    pub dr_sps: f64,
    pub params: PlatformParams,
    pub seed: u64,
}

impl NoiseConfig {
    /// Variance (normalized-result units²) added by one cycle with the given lane powers.
    pub fn cycle_variance(&self, positive: f64, negative: f64) -> f64 {
        let p = &self.params;
        let q = PHYSICAL.q;
        let thermal = 4.0 * PHYSICAL.k_b * p.temperature_k / p.load_resistance_ohm;
        let rin = p.rin_linear();
        let density = |lane_power: f64| {
            let i = p.responsivity * lane_power * self.full_scale_power_w;
            2.0 * q * (i + p.dark_current_a) + thermal + i * i * rin
        };
        let bandwidth = self.dr_sps / std::f64::consts::SQRT_2;
        let var_current = (density(positive) + density(negative)) * bandwidth;
        let unit_current = p.responsivity * self.full_scale_power_w;
        var_current / (unit_current * unit_current)
    }
}

#[derive(Debug, Clone)]
pub struct DotProductOptions {
    pub responsivity: f64,
    /// Accumulator capacity in normalized-result units; defaults to the vector length.
    pub capacity: Option<f64>,
    pub noise: Option<NoiseConfig>,
    pub record_trace: bool,
}

impl Default for DotProductOptions {
    fn default() -> Self {
        DotProductOptions {
            responsivity: 1.2,
            capacity: None,
            noise: None,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub cycle: u64,
    pub positive_sum: f64,
    pub negative_sum: f64,
    pub bpd_current: f64,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DotProductResult {
    /// Integer dot product recovered after the ADC.
    pub value: i64,
    /// Pre-ADC result, normalized so that Σaᵢbᵢ maps to Σaᵢbᵢ / ((2^Ba − 1)(2^Bb − 1)).
    pub analog: f64,
    pub adc_code: i64,
    pub cycles: u64,
    /// Smallest ADC resolution that recovers every integer result of this shape exactly.
    pub required_adc_bits: u32,
    /// Analytic RMS of the injected noise on `analog`, zero when noiseless.
    pub noise_rms: f64,
    pub trace: Vec<TraceRow>,
}

impl DotProductResult {
    pub fn real_value(&self, a: &QuantizedVector, b: &QuantizedVector) -> f64 {
        self.value as f64 * a.scale * b.scale
    }
}

/// ADC bits needed to resolve every integer dot product of `len` terms exactly.
pub fn required_adc_bits(len: usize, bits_a: u32, bits_b: u32) -> u32 {
    let full_scale = len as u128 * max_magnitude(bits_a) as u128 * max_magnitude(bits_b) as u128;
    // sign bit + enough magnitude codes to give a 1-LSB step over ±full scale
    let mut bits = 2;
    while ((1u128 << (bits - 1)) - 1) < full_scale {
        bits += 1;
    }
    bits
}

/// Signed dot product on one DPE of size `n_per_cycle`, accumulated over ⌈len/N⌉ cycles.
pub fn dot_product(
    a: &QuantizedVector,
    b: &QuantizedVector,
    n_per_cycle: usize,
    model: &MrmModel,
    adc_bits: u32,
    options: &DotProductOptions,
) -> Result<DotProductResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if n_per_cycle < 1 {
        return Err(Error::InvalidInput("n_per_cycle must be >= 1".into()));
    }
    if !(2..=62).contains(&adc_bits) {
        return Err(Error::InvalidInput(format!(
            "adc_bits must be in 2..=62, got {adc_bits}"
        )));
    }
    let enc_a = SymbolEncoder::new(model, a.bits)?;
    let enc_b = if b.bits == a.bits {
        enc_a.clone()
    } else {
        SymbolEncoder::new(model, b.bits)?
    };
    let r = options.responsivity;
    let full_scale = a.len() as f64;
    let capacity = options.capacity.unwrap_or(full_scale) * r;
    let mut state = AccumulatorState::new(capacity)?;

    let mut rng = options
        .noise
        .as_ref()
        .map(|n| ChaCha8Rng::seed_from_u64(n.seed));
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise_var = 0.0;
    let mut trace = Vec::new();
    let mut symbols = Vec::with_capacity(n_per_cycle);

    for (ca, cb) in a
        .values
        .chunks(n_per_cycle)
        .zip(b.values.chunks(n_per_cycle))
    {
        symbols.clear();
        for (&x, &w) in ca.iter().zip(cb) {
            let product = multiply_symbol(enc_a.encode(x.abs())?, enc_b.encode(w.abs())?);
            let sign = if x.signum() * w.signum() < 0 { -1 } else { 1 };
            symbols.push(route_sign(product, sign)?);
        }
        let (pos, neg) = lane_sums(&symbols);
        let mut current = bpd_superpose(&symbols, r);
        if let (Some(cfg), Some(rng)) = (options.noise.as_ref(), rng.as_mut()) {
            let var = cfg.cycle_variance(pos, neg);
            noise_var += var;
            current += r * var.sqrt() * unit.sample(rng);
        }
        let cycle = state.cycles_elapsed;
        state = state.accumulate(current)?;
        if options.record_trace {
            trace.push(TraceRow {
                cycle,
                positive_sum: pos,
                negative_sum: neg,
                bpd_current: current,
                charge: state.charge,
            });
        }
    }

    let analog = state.charge / r;
    let int_scale = (max_magnitude(a.bits) * max_magnitude(b.bits)) as f64;
    let max_code = (1i64 << (adc_bits - 1)) - 1;
    let lsb = full_scale / max_code as f64;
    let adc_code = ((analog / lsb).round() as i64).clamp(-max_code, max_code);
    let value = (adc_code as f64 * lsb * int_scale).round() as i64;

    Ok(DotProductResult {
        value,
        analog,
        adc_code,
        cycles: state.cycles_elapsed,
        required_adc_bits: required_adc_bits(a.len(), a.bits, b.bits),
        noise_rms: noise_var.sqrt(),
        trace,
    })
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRow]) -> std::io::Result<()> {
    writeln!(out, "cycle,positive_sum,negative_sum,bpd_current,charge")?;
    for t in trace {
        writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e},{:.12e}",
            t.cycle, t.positive_sum, t.negative_sum, t.bpd_current, t.charge
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MrmModel {
        MrmModel::default()
    }

    fn qv(v: &[i64]) -> QuantizedVector {
        QuantizedVector::new(v.to_vec(), 4, 1.0).unwrap()
    }

    #[test]
    fn encode_examples() {
        let m = model();
        assert_eq!(encode_symbol(0, 4, &m).unwrap(), 0.0);
        assert_eq!(encode_symbol(15, 4, &m).unwrap(), 1.0);
        assert!((encode_symbol(5, 4, &m).unwrap() - 5.0 / 15.0).abs() < 1e-12);
        assert!(encode_symbol(16, 4, &m).is_err());
        assert!(encode_symbol(-1, 4, &m).is_err());
    }

    #[test]
    fn encode_decode_on_grid() {
        let enc = SymbolEncoder::new(&model(), 4).unwrap();
        for v in 0..=15 {
            assert_eq!(enc.decode(enc.encode(v).unwrap()), Some(v));
        }
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(multiply_symbol(1.0, 1.0), 1.0);
        assert_eq!(multiply_symbol(0.37, 0.0), 0.0);
        assert!((multiply_symbol(5.0 / 15.0, 3.0 / 15.0) - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn routing() {
        assert_eq!(
            route_sign(0.5, 1).unwrap(),
            OpticalSymbol {
                power: 0.5,
                lane: Lane::Positive
            }
        );
        assert_eq!(route_sign(0.5, -1).unwrap().lane, Lane::Negative);
        assert!(route_sign(0.5, 0).is_err());
        assert!(route_sign(-0.1, 1).is_err());
    }

    #[test]
    fn superposition_examples() {
        let zeros = vec![route_sign(0.0, 1).unwrap(); 4];
        assert_eq!(bpd_superpose(&zeros, 1.2), 0.0);
        let balanced = [route_sign(0.4, 1).unwrap(), route_sign(0.4, -1).unwrap()];
        assert_eq!(bpd_superpose(&balanced, 1.2), 0.0);
        let s = [
            route_sign(1.0 / 15.0, 1).unwrap(),
            route_sign(2.0 / 15.0, -1).unwrap(),
            route_sign(6.0 / 15.0, 1).unwrap(),
        ];
        assert!((bpd_superpose(&s, 1.2) - 5.0 / 15.0 * 1.2).abs() < 1e-15);
    }

    #[test]
    fn accumulation() {
        let mut s = AccumulatorState::new(100.0).unwrap();
        for _ in 0..16 {
            s = s.accumulate(1.0).unwrap();
        }
        assert_eq!(s.charge, 16.0);
        assert_eq!(s.cycles_elapsed, 16);

        let mut s = AccumulatorState::new(100.0).unwrap();
        for i in 0..10 {
            s = s.accumulate(if i % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        }
        assert_eq!(s.charge, 0.0);
    }

    #[test]
    fn saturation_reports_cycle() {
        let mut s = AccumulatorState::new(2.5).unwrap();
        s = s.accumulate(1.0).unwrap();
        s = s.accumulate(1.0).unwrap();
        match s.accumulate(1.0) {
            Err(Error::Saturation { cycle, .. }) => assert_eq!(cycle, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_dot_product() {
        let m = model();
        let r = dot_product(
            &qv(&[1, 2, 3]),
            &qv(&[1, -1, 2]),
            3,
            &m,
            16,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.value, 5);
        assert!((r.analog - 5.0 / 225.0).abs() < 1e-9);
        assert_eq!(r.cycles, 1);
    }

    #[test]
    fn zero_weights() {
        let r = dot_product(
            &qv(&[7, -3, 15, 2]),
            &qv(&[0, 0, 0, 0]),
            2,
            &model(),
            12,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0);
        assert_eq!(r.analog, 0.0);
        assert_eq!(r.cycles, 2);
    }

    #[test]
    fn chunked_equals_full() {
        let a = qv(&[3, -7, 15, 0, 9, -15, 4, 1]);
        let b = qv(&[-2, 5, 15, 8, -9, -15, 0, 3]);
        let full = dot_product(&a, &b, 8, &model(), 16, &Default::default()).unwrap();
        for n in 1..8 {
            let r = dot_product(&a, &b, n, &model(), 16, &Default::default()).unwrap();
            assert_eq!(r.value, full.value);
            assert!((r.analog - full.analog).abs() < 1e-12);
            assert_eq!(r.cycles, 8usize.div_ceil(n) as u64);
        }
    }

    #[test]
    fn errors() {
        let m = model();
        let o = DotProductOptions::default();
        assert!(dot_product(&qv(&[1, 2]), &qv(&[1]), 2, &m, 12, &o).is_err());
        assert!(dot_product(&qv(&[1]), &qv(&[1]), 0, &m, 12, &o).is_err());
        let tight = DotProductOptions {
            capacity: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            dot_product(&qv(&[15, 15]), &qv(&[15, 15]), 1, &m, 12, &tight),
            Err(Error::Saturation { cycle: 0, .. })
        ));
        assert!(QuantizedVector::new(vec![16], 4, 1.0).is_err());
        assert!(QuantizedVector::new(vec![], 4, 1.0).is_err());
    }

    #[test]
    fn adc_requirement() {
        assert_eq!(required_adc_bits(1, 1, 1), 2);
        // 256·225 = 57600 ≤ 2^16 − 1
        assert_eq!(required_adc_bits(256, 4, 4), 17);
    }

    #[test]
    fn coarse_adc_loses_exactness() {
        let a = qv(&[15; 16]);
        let b = qv(&[1; 16]);
        let r = dot_product(&a, &b, 4, &model(), 4, &Default::default()).unwrap();
        assert_ne!(r.value, 240);
        let r = dot_product(
            &a,
            &b,
            4,
            &model(),
            r.required_adc_bits,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.value, 240);
    }

    #[test]
    fn trace_recorded() {
        let o = DotProductOptions {
            record_trace: true,
            ..Default::default()
        };
        let r = dot_product(&qv(&[1, 2, 3, 4]), &qv(&[1, 1, -1, 1]), 2, &model(), 12, &o).unwrap();
        assert_eq!(r.trace.len(), 2);
        assert!((r.trace[0].charge / 1.2 * 225.0 - 3.0).abs() < 1e-9);
        assert!((r.trace[1].charge / 1.2 * 225.0 - 4.0).abs() < 1e-9);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &r.trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cycle,positive_sum,negative_sum,bpd_current,charge\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
