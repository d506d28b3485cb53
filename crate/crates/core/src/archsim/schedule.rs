use serde::Serialize;

use super::AcceleratorConfig;
use crate::error::{Error, Result};
use crate::workload::GemmOp;

/// Cycle and access counts of one GEMM under output-stationary mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub outputs: u64,
    /// Accumulation cycles each output spends in its DPE.
    pub chunks_per_output: u64,
    /// Rounds of `groups × M` outputs.
    pub passes: u64,
    pub compute_cycles: u64,
    pub macs: u64,
    /// One N-element input chunk per DPE per cycle.
    pub input_reads: u64,
    /// One N-element weight chunk per DPE per cycle.
    pub weight_reads: u64,
    /// Finished outputs, written back N per access.
    pub output_writes: u64,
    pub adc_samples: u64,
    /// Modulated symbols (input and weight MRMs, all slices).
    pub modulated_symbols: u64,
    /// Wavelengths lit while this GEMM computes.
    pub active_wavelengths: u64,
}

impl Schedule {
    pub fn buffer_accesses(&self) -> u64 {
        self.input_reads + self.weight_reads + self.output_writes
    }
}

pub fn schedule_gemm(op: &GemmOp, cfg: &AcceleratorConfig) -> Result<Schedule> {
    if op.rows == 0 || op.inner == 0 || op.cols == 0 {
        return Err(Error::InvalidInput(format!(
            "GEMM `{}` has a zero dimension",
            op.source_layer
        )));
    }
    let n = cfg.tpc.n as u64;
    let m = cfg.tpc.m as u64;
    let slices = cfg.slices() as u64;
    let outputs = op.outputs();
    let chunks = (op.inner as u64).div_ceil(n);
    let passes = outputs.div_ceil(cfg.parallel_outputs());
    let active_groups = (cfg.groups() as u64).min(outputs.div_ceil(m));
    Ok(Schedule {
        outputs,
        chunks_per_output: chunks,
        passes,
        compute_cycles: passes * chunks,
        macs: outputs * op.inner as u64,
        input_reads: outputs * chunks,
        weight_reads: outputs * chunks,
        output_writes: outputs.div_ceil(n),
        adc_samples: outputs * slices,
        modulated_symbols: 2 * slices * outputs * op.inner as u64,
        active_wavelengths: active_groups * slices * n,
    })
}
