use serde::Serialize;

use super::schedule::{schedule_gemm, Schedule};
use super::AcceleratorConfig;
use crate::error::{Error, Result};
use crate::workload::{GemmOp, LayerSpec, Step, Workload};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LatencyBreakdown {
    pub compute_s: f64,
    pub buffer_s: f64,
    pub peripheral_s: f64,
    pub total_s: f64,
}

impl LatencyBreakdown {
    pub fn sum_parts(&self) -> f64 {
        self.compute_s + self.buffer_s + self.peripheral_s
    }

    fn add(&mut self, o: &Self) {
        self.compute_s += o.compute_s;
        self.buffer_s += o.buffer_s;
        self.peripheral_s += o.peripheral_s;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub laser_j: f64,
    pub mrm_eo_j: f64,
    pub dac_j: f64,
    pub adc_j: f64,
    pub edram_j: f64,
    pub bus_j: f64,
    pub router_j: f64,
    pub reduction_j: f64,
    pub activation_j: f64,
    pub pooling_j: f64,
    pub io_j: f64,
    pub total_j: f64,
}

impl EnergyBreakdown {
    pub fn parts(&self) -> [(&'static str, f64); 11] {
        [
            ("laser", self.laser_j),
            ("mrm_eo", self.mrm_eo_j),
            ("dac", self.dac_j),
            ("adc", self.adc_j),
            ("edram", self.edram_j),
            ("bus", self.bus_j),
            ("router", self.router_j),
            ("reduction", self.reduction_j),
            ("activation", self.activation_j),
            ("pooling", self.pooling_j),
            ("io", self.io_j),
        ]
    }

    pub fn sum_parts(&self) -> f64 {
        self.parts().iter().map(|(_, v)| v).sum()
    }

    fn add(&mut self, o: &Self) {
        self.laser_j += o.laser_j;
        self.mrm_eo_j += o.mrm_eo_j;
        self.dac_j += o.dac_j;
        self.adc_j += o.adc_j;
        self.edram_j += o.edram_j;
        self.bus_j += o.bus_j;
        self.router_j += o.router_j;
        self.reduction_j += o.reduction_j;
        self.activation_j += o.activation_j;
        self.pooling_j += o.pooling_j;
        self.io_j += o.io_j;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub gemm_ops: u64,
    pub macs: u64,
    pub compute_cycles: u64,
    pub buffer_accesses: u64,
    pub adc_samples: u64,
    pub modulated_symbols: u64,
}

impl OpCounts {
    fn add(&mut self, o: &Self) {
        self.gemm_ops += o.gemm_ops;
        self.macs += o.macs;
        self.compute_cycles += o.compute_cycles;
        self.buffer_accesses += o.buffer_accesses;
        self.adc_samples += o.adc_samples;
        self.modulated_symbols += o.modulated_symbols;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub latency: LatencyBreakdown,
    pub energy: EnergyBreakdown,
    pub counts: OpCounts,
    pub fps: f64,
    pub fps_per_watt: f64,
}

impl CostBreakdown {
    pub fn accumulate(&mut self, other: &CostBreakdown) {
        self.latency.add(&other.latency);
        self.energy.add(&other.energy);
        self.counts.add(&other.counts);
        self.finalize();
    }

    /// Recomputes totals from parts, then FPS (batch 1) and FPS/W.
    fn finalize(&mut self) {
        self.latency.total_s = self.latency.sum_parts();
        self.energy.total_j = self.energy.sum_parts();
        self.fps = if self.latency.total_s > 0.0 {
            1.0 / self.latency.total_s
        } else {
            0.0
        };
        self.fps_per_watt = if self.energy.total_j > 0.0 {
            1.0 / self.energy.total_j
        } else {
            0.0
        };
    }

    /// Average power over the frame, W.
    pub fn average_power_w(&self) -> f64 {
        if self.latency.total_s > 0.0 {
            self.energy.total_j / self.latency.total_s
        } else {
            0.0
        }
    }

    /// Largest relative mismatch between any total and the sum of its parts.
    pub fn accounting_error(&self) -> f64 {
        let rel = |total: f64, parts: f64| {
            if total == 0.0 && parts == 0.0 {
                0.0
            } else {
                ((total - parts) / total.abs().max(parts.abs())).abs()
            }
        };
        rel(self.latency.total_s, self.latency.sum_parts())
            .max(rel(self.energy.total_j, self.energy.sum_parts()))
    }
}

/// Latency and energy of one scheduled GEMM, excluding frame-level always-on power.
pub fn cost_gemm(
    op: &GemmOp,
    cfg: &AcceleratorConfig,
    schedule: &Schedule,
) -> Result<CostBreakdown> {
    let pp = &cfg.peripheral;
    let dr = cfg.tpc.dr_sps;
    let adc = pp.adc(dr)?;
    let policy = cfg.policy;

    let compute_s = schedule.compute_cycles as f64 / dr;
    let accesses = schedule.buffer_accesses();
    let buffer_s = accesses as f64 * pp.latency_s(&pp.edram) * (1.0 - policy.buffer_overlap);

    let t_red = pp.latency_s(&pp.reduction_network);
    let t_adc = pp.latency_s(adc);
    let t_bus = pp.latency_s(&pp.bus);
    let t_router = pp.latency_s(&pp.router);
    // one ADC sample and one shift-and-add per pass, then one result transfer per GEMM
    let peripheral_s = schedule.passes as f64 * (t_adc + t_red) + t_bus + t_router;

    let active_groups = (cfg.groups() as u64).min(schedule.outputs.div_ceil(cfg.tpc.m as u64));
    let (reduction_j, bus_j, router_j) = if policy.peripherals_always_on {
        (0.0, 0.0, 0.0)
    } else {
        (
            pp.reduction_network.power_w() * t_red * (schedule.passes * active_groups) as f64,
            pp.bus.power_w() * t_bus,
            pp.router.power_w() * t_router,
        )
    };

    let mut out = CostBreakdown {
        latency: LatencyBreakdown {
            compute_s,
            buffer_s,
            peripheral_s,
            total_s: 0.0,
        },
        energy: EnergyBreakdown {
            laser_j: schedule.active_wavelengths as f64
                * cfg.laser_mw_per_lambda
                * 1e-3
                * compute_s,
            mrm_eo_j: pp.mrm_eo_energy_pj_per_bit
                * 1e-12
                * f64::from(cfg.tpc.bits)
                * schedule.modulated_symbols as f64,
            dac_j: pp.dac.power_w() * schedule.modulated_symbols as f64 / dr,
            adc_j: adc.power_w() * schedule.adc_samples as f64 / dr,
            edram_j: accesses as f64 * pp.edram_access_energy_j(),
            bus_j,
            router_j,
            reduction_j,
            ..Default::default()
        },
        counts: OpCounts {
            gemm_ops: 1,
            macs: schedule.macs,
            compute_cycles: schedule.compute_cycles,
            buffer_accesses: accesses,
            adc_samples: schedule.adc_samples,
            modulated_symbols: schedule.modulated_symbols,
        },
        fps: 0.0,
        fps_per_watt: 0.0,
    };
    debug_assert_eq!(op.mac_count, schedule.macs);
    out.finalize();
    Ok(out)
}

fn vector_unit_cost(
    layer: &LayerSpec,
    cfg: &AcceleratorConfig,
    rec: &crate::params::ComponentRecord,
    is_pool: bool,
) -> CostBreakdown {
    let pp = &cfg.peripheral;
    let elements = layer.output_elements() as u64;
    let t = pp.latency_s(rec);
    let mut out = CostBreakdown::default();
    // one unit per tile, elements spread evenly
    out.latency.peripheral_s = elements.div_ceil(cfg.tiles as u64) as f64 * t;
    if !cfg.policy.peripherals_always_on {
        let e = rec.power_w() * t * elements as f64;
        if is_pool {
            out.energy.pooling_j = e;
        } else {
            out.energy.activation_j = e;
        }
    }
    out.finalize();
    out
}

/// Whole-frame cost of `workload` (batch 1, layers strictly sequential).
pub fn simulate_model(workload: &Workload, cfg: &AcceleratorConfig) -> Result<CostBreakdown> {
    cfg.validate()?;
    let steps = workload.steps()?;
    if steps.is_empty() {
        return Err(Error::InvalidInput("workload is empty".into()));
    }
    let pp = &cfg.peripheral;
    let mut total = CostBreakdown::default();
    for step in &steps {
        match step {
            Step::Gemm { ops, .. } => {
                for op in ops {
                    let s = schedule_gemm(op, cfg)?;
                    total.accumulate(&cost_gemm(op, cfg, &s)?);
                }
            }
            Step::Pool(l) => total.accumulate(&vector_unit_cost(l, cfg, &pp.pooling_unit, true)),
            Step::Activation(l) => {
                total.accumulate(&vector_unit_cost(l, cfg, &pp.activation_unit, false))
            }
        }
    }

    // input frame load through the IO interface
    let t_io = pp.latency_s(&pp.io_interface);
    let mut frame = CostBreakdown::default();
    frame.latency.peripheral_s = t_io;
    frame.finalize();
    total.accumulate(&frame);

    let frame_s = total.latency.total_s;
    let mut background = CostBreakdown::default();
    background.energy.io_j = pp.io_interface.power_w()
        * if cfg.policy.io_always_on {
            frame_s
        } else {
            t_io
        };
    if cfg.policy.peripherals_always_on {
        let tiles = cfg.tiles as f64;
        background.energy.bus_j = pp.bus.power_w() * tiles * frame_s;
        background.energy.router_j = pp.router.power_w() * tiles * frame_s;
        background.energy.pooling_j = pp.pooling_unit.power_w() * tiles * frame_s;
        background.energy.activation_j = pp.activation_unit.power_w() * tiles * frame_s;
        background.energy.reduction_j =
            pp.reduction_network.power_w() * cfg.tpc_count as f64 * frame_s;
    }
    total.accumulate(&background);
    Ok(total)
}
