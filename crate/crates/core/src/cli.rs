//! Batch commands behind the `photogemm` binary.
//!
//! Every command writes its artifacts into one output directory together with
//! `manifest.json`, which lists each file with its SHA-256. Failures produce a
//! JSON error report on stderr (and in `error.json` when the output directory
//! is usable) and a process exit code from [`exit_code`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::archsim::{
    aggregate_csv, area_proportionate_counts, normalize_report, simulate_model, AcceleratorConfig,
    AreaMode, CostPolicy, SimReport, TpcConfig, DATA_RATES_SPS,
};
use crate::device::{MrmModel, ITO_TABLE};
use crate::error::{Error, Result};
use crate::funcsim::{
    dot_product, max_magnitude, required_adc_bits, DotProductOptions, NoiseConfig, QuantizedVector,
};
use crate::linkbudget::{
    calibrate_d_mrr, optimal_n_bisect, p_output, published_size_targets, CalibrationGrid,
    CalibrationTarget, PrecisionQuery, DEFAULT_N_MAX,
};
use crate::params::{
    dbm_to_mw, load_platform, Overrides, PeripheralParams, Platform, PlatformParams,
};
use crate::workload::resolve_model;

pub const OUT_DIR_ENV: &str = "PHOTOGEMM_OUT";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCALABILITY_HEADER: &str =
    "platform,bits,dr_sps,n_opt,pd_sensitivity_dbm,p_output_dbm,ef_db";

/// Exit status for each error class; success is 0.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_)
        | Error::OutOfRange { .. }
        | Error::UnknownParameter(_)
        | Error::Schema { .. }
        | Error::MissingRecord(_)
        | Error::Config(_) => 2,
        Error::Infeasible(_) | Error::Capability { .. } | Error::Saturation { .. } => 3,
        Error::Io { .. } => 4,
        Error::Verification(_) => 5,
    }
}

/// Machine-readable error report.
pub fn error_report(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
            "exit_code": exit_code(err),
        }
    })
    .to_string()
}

/// Integer list given as `1-4`, `1,3,5` or a mix such as `1-3,6`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntList(pub Vec<u32>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("`{x}`: {e}"));
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    if a > b {
                        return Err(format!("empty range `{part}`"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(parse(part)?),
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(IntList(out))
    }
}

impl<'de> Deserialize<'de> for IntList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<u32>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::List(v) => Ok(IntList(v)),
        }
    }
}

fn clap_defaults<T: Args + clap::FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults"));
    T::from_arg_matches(&cmd.get_matches_from(["defaults"])).expect("every flag has a default")
}

macro_rules! clap_default {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                clap_defaults()
            }
        }
    )*};
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraArgs {
    /// Weight precision whose levels are plotted.
    #[arg(long, default_value_t = 2)]
    pub bits: u32,
    #[arg(long, default_value_t = 1595.0)]
    pub start_nm: f64,
    #[arg(long, default_value_t = 1601.0)]
    pub stop_nm: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step_pm: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalabilityArgs {
    #[arg(long, value_delimiter = ',', default_value = "soi,sin")]
    pub platforms: Vec<Platform>,
    #[arg(long, default_value = "1-4")]
    pub bits: IntList,
    #[arg(long, value_delimiter = ',', default_value = "1e9,5e9,10e9")]
    pub rates: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuncsimArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub bits: u32,
    #[arg(long, default_value_t = 256)]
    pub max_len: usize,
    /// DPE widths to cycle through.
    #[arg(long, value_delimiter = ',', default_value = "8,47")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Inject receiver noise (SiN link at 1 GS/s) instead of checking exactness.
    #[arg(long)]
    pub noise: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "resnet50,googlenet,shufflenetv2"
    )]
    pub models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1e9,5e9,10e9")]
    pub rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "soi,sin")]
    pub platforms: Vec<Platform>,
    /// Total TPC area in mm²; without it the published TPC sizes and counts are used.
    #[arg(long)]
    pub area_budget_mm2: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub buffer_overlap: f64,
    /// Charge the IO interface only for its transfer time.
    #[arg(long)]
    pub io_gated: bool,
    /// Charge bus, router, pooling, activation and reduction units only while busy.
    #[arg(long)]
    pub peripherals_gated: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateArgs {
    /// CSV with columns platform,bits,dr_sps,expected_n; defaults to the published sizes.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub min_um: f64,
    #[arg(long, default_value_t = 20000.0)]
    pub max_um: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step_um: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
}

clap_default!(
    SpectraArgs,
    ScalabilityArgs,
    FuncsimArgs,
    SimulateArgs,
    CalibrateArgs
);

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Modulator through-port spectra, one column per weight level.
    Spectra(SpectraArgs),
    /// Optimal TPC size over a (platform, bits, data rate) grid.
    Scalability(ScalabilityArgs),
    /// Randomized bit-exactness check of the functional dot-product model.
    FuncsimVerify(FuncsimArgs),
    /// Full-model FPS and FPS/W for each accelerator and data rate.
    Simulate(SimulateArgs),
    /// Fit the ring pitch of each platform to target TPC sizes.
    Calibrate(CalibrateArgs),
    /// Regenerate every published table and figure dataset.
    ReproducePaper,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectra(_) => "spectra",
            Command::Scalability(_) => "scalability",
            Command::FuncsimVerify(_) => "funcsim-verify",
            Command::Simulate(_) => "simulate",
            Command::Calibrate(_) => "calibrate",
            Command::ReproducePaper => "reproduce-paper",
        }
    }
}

/// Everything one invocation needs. Also loadable from a TOML file, e.g.
///
/// ```toml
/// out_dir = "out"
/// workers = 4
/// [job]
/// command = "scalability"
/// bits = "1-4"
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    #[serde(default = "one")]
    pub workers: usize,
    /// Platform parameter overrides (TOML or JSON, `{soi = {...}, sin = {...}}`).
    #[serde(default)]
    pub platform_config: Option<PathBuf>,
    pub job: Command,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidInput("workers must be >= 1".into()));
        }
        let nonempty = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must not be empty")))
            }
        };
        match &self.job {
            Command::Scalability(a) => {
                nonempty(!a.platforms.is_empty(), "platforms")?;
                nonempty(!a.rates.is_empty(), "rates")
            }
            Command::Simulate(a) => {
                nonempty(!a.platforms.is_empty(), "platforms")?;
                nonempty(!a.models.is_empty(), "models")?;
                nonempty(!a.rates.is_empty(), "rates")
            }
            Command::FuncsimVerify(a) => {
                nonempty(!a.n.is_empty(), "n")?;
                nonempty(a.trials > 0, "trials")?;
                nonempty(a.max_len > 0, "max_len")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "photogemm",
    version,
    about = "Photonic GEMM accelerator design-space exploration"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, short, env = OUT_DIR_ENV, default_value = "photogemm-out", global = true)]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this value.
    #[arg(long, default_value_t = 1, global = true)]
    pub workers: usize,
    /// Platform parameter overrides file (TOML or JSON).
    #[arg(long, global = true)]
    pub platform_config: Option<PathBuf>,
    /// Read the whole run configuration from a TOML file; other flags are then ignored.
    #[arg(long)]
    pub run_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

impl Cli {
    pub fn into_run_config(self) -> Result<RunConfig> {
        if let Some(path) = &self.run_config {
            return RunConfig::from_toml_file(path);
        }
        let job = self
            .command
            .ok_or_else(|| Error::InvalidInput("no command given (see --help)".into()))?;
        Ok(RunConfig {
            out_dir: self.out,
            workers: self.workers,
            platform_config: self.platform_config,
            job,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub files: Vec<ManifestEntry>,
}

/// Collects output files in memory, then writes them and the manifest.
struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Artifacts {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        }
    }

    fn add(&mut self, name: &str, content: impl Into<Vec<u8>>) {
        self.files.insert(name.to_string(), content.into());
    }

    fn write(self, command: &str) -> Result<Manifest> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut entries = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            entries.push(ManifestEntry {
                path: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
                bytes: bytes.len() as u64,
            });
        }
        let manifest = Manifest {
            command: command.to_string(),
            files: entries,
        };
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

struct Ctx {
    pool: rayon::ThreadPool,
    overrides: BTreeMap<Platform, Overrides>,
}

impl Ctx {
    fn platform(&self, id: Platform) -> Result<PlatformParams> {
        load_platform(id, self.overrides.get(&id))
    }
}

fn read_platform_config(path: &Path) -> Result<BTreeMap<Platform, Overrides>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed: std::result::Result<BTreeMap<Platform, Overrides>, String> = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    let parsed = parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for (id, o) in &parsed {
        load_platform(*id, Some(o))?;
    }
    Ok(parsed)
}

/// Executes `config`, returning the manifest of the files it wrote.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let overrides = match &config.platform_config {
        Some(p) => read_platform_config(p)?,
        None => BTreeMap::new(),
    };
    let ctx = Ctx { pool, overrides };
    let mut out = Artifacts::new(&config.out_dir);
    match &config.job {
        Command::Spectra(a) => out.add("spectra.csv", spectra_csv(a)?),
        Command::Scalability(a) => out.add("scalability.csv", scalability_csv(&ctx, a, None)?),
        Command::FuncsimVerify(a) => out.add("funcsim_verify.csv", funcsim_verify_csv(&ctx, a)?),
        Command::Simulate(a) => simulate_files(&ctx, a, &mut out, None)?,
        Command::Calibrate(a) => calibrate_files(&ctx, a, &mut out)?,
        Command::ReproducePaper => reproduce_files(&ctx, &mut out)?,
    }
    out.write(config.job.name())
}

/// Writes the machine-readable error report to stderr and, if possible, to `error.json`.
pub fn report_failure(config_out_dir: Option<&Path>, err: &Error) -> i32 {
    let report = error_report(err);
    eprintln!("{report}");
    if let Some(dir) = config_out_dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{report}\n"));
        }
    }
    exit_code(err)
}

fn spectra_csv(a: &SpectraArgs) -> Result<String> {
    if !(a.step_pm > 0.0 && a.stop_nm > a.start_nm) {
        return Err(Error::InvalidInput(
            "spectrum range must be increasing with a positive step".into(),
        ));
    }
    let model = MrmModel::default();
    let levels = model.weight_levels(a.bits)?;
    let shifts: Vec<f64> = levels.iter().map(|l| l.shift_pm).collect();
    let count = ((a.stop_nm - a.start_nm) / (a.step_pm * 1e-3)).round() as usize + 1;
    let wavelengths: Vec<f64> = (0..count)
        .map(|i| a.start_nm + i as f64 * a.step_pm * 1e-3)
        .collect();
    let table = model.spectrum(&wavelengths, &shifts)?;

    let mut s = String::from("wavelength_nm");
    for l in &levels {
        write!(s, ",t_shift_{:.3}pm_{:.4}v", l.shift_pm, l.voltage_v).unwrap();
    }
    s.push('\n');
    for (w, row) in wavelengths.iter().zip(&table) {
        write!(s, "{w:.4}").unwrap();
        for t in row {
            write!(s, ",{t:.9}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

fn scalability_csv(ctx: &Ctx, a: &ScalabilityArgs, source: Option<&str>) -> Result<String> {
    let mut cells = Vec::new();
    for &p in &a.platforms {
        for &b in &a.bits.0 {
            for &dr in &a.rates {
                cells.push((p, b, dr));
            }
        }
    }
    let rows = ctx.pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, b, dr)| {
                let params = ctx.platform(p)?;
                let r = optimal_n_bisect(&PrecisionQuery::new(b, dr)?, &params, a.n_max)?;
                Ok(format!(
                    "{},{},{},{},{:.6},{:.6},{:.6}\n",
                    p.key(),
                    b,
                    dr,
                    r.n_opt,
                    r.pd_sensitivity_dbm,
                    r.p_output_dbm,
                    r.ef_db
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut s = source
        .map(|src| format!("# source: {src}\n"))
        .unwrap_or_default();
    s.push_str(SCALABILITY_HEADER);
    s.push('\n');
    s.extend(rows);
    Ok(s)
}

fn funcsim_verify_csv(ctx: &Ctx, a: &FuncsimArgs) -> Result<String> {
    let model = MrmModel::default();
    let max = max_magnitude(a.bits);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    // draw every trial up front so results do not depend on the worker count
    let trials: Vec<(usize, Vec<i64>, Vec<i64>, u64)> = (0..a.trials)
        .map(|i| {
            let len = rng.random_range(1..=a.max_len);
            let x = (0..len).map(|_| rng.random_range(-max..=max)).collect();
            let y = (0..len).map(|_| rng.random_range(-max..=max)).collect();
            (a.n[i % a.n.len()], x, y, rng.random())
        })
        .collect();
    let noise_params = if a.noise {
        Some(ctx.platform(Platform::Sin)?)
    } else {
        None
    };

    let rows = ctx.pool.install(|| {
        trials
            .par_iter()
            .enumerate()
            .map(|(i, (n, x, y, seed))| {
                let exact: i64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                let qa = QuantizedVector::new(x.clone(), a.bits, 1.0)?;
                let qb = QuantizedVector::new(y.clone(), a.bits, 1.0)?;
                let mut opts = DotProductOptions::default();
                if let Some(params) = &noise_params {
                    let p_mw = dbm_to_mw(p_output(*n, params)?)?;
                    opts.noise = Some(NoiseConfig {
                        full_scale_power_w: p_mw * 1e-3,
                        dr_sps: 1e9,
                        params: params.clone(),
                        seed: *seed,
                    });
                }
                let adc_bits = required_adc_bits(x.len(), a.bits, a.bits);
                let r = dot_product(&qa, &qb, *n, &model, adc_bits, &opts)?;
                Ok((i, x.len(), *n, exact, r.value, r.noise_rms))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut s = String::from("trial,len,n,exact,measured,match,noise_rms\n");
    let mut mismatches = 0;
    for (i, len, n, exact, got, rms) in &rows {
        mismatches += usize::from(exact != got);
        writeln!(s, "{i},{len},{n},{exact},{got},{},{rms:.6e}", exact == got).unwrap();
    }
    if !a.noise && mismatches > 0 {
        return Err(Error::Verification(format!(
            "{mismatches} of {} noiseless dot products differ from the integer oracle",
            rows.len()
        )));
    }
    Ok(s)
}

/// Accelerator configurations for every (platform, rate) pair, in input order.
fn accelerator_grid(ctx: &Ctx, a: &SimulateArgs) -> Result<Vec<AcceleratorConfig>> {
    let policy = CostPolicy {
        buffer_overlap: a.buffer_overlap,
        io_always_on: !a.io_gated,
        peripherals_always_on: !a.peripherals_gated,
    };
    let mut out = Vec::new();
    for &p in &a.platforms {
        for &dr in &a.rates {
            let mut cfg = match a.area_budget_mm2 {
                None => AcceleratorConfig::published(p, dr)?,
                Some(budget) => {
                    let params = ctx.platform(p)?;
                    let n = optimal_n_bisect(&PrecisionQuery::new(4, dr)?, &params, DEFAULT_N_MAX)?
                        .n_opt;
                    let tpc = TpcConfig {
                        n,
                        m: n,
                        bits: 4,
                        dr_sps: dr,
                        platform: p,
                    };
                    let count = area_proportionate_counts(
                        &[tpc],
                        AreaMode::Budget(budget),
                        &PeripheralParams::default(),
                    )?[0];
                    AcceleratorConfig::new(tpc, count)?
                }
            };
            cfg.policy = policy;
            cfg.validate()?;
            out.push(cfg);
        }
    }
    Ok(out)
}

fn simulate_reports(ctx: &Ctx, a: &SimulateArgs) -> Result<Vec<SimReport>> {
    let models = a
        .models
        .iter()
        .map(|m| resolve_model(m))
        .collect::<Result<Vec<_>>>()?;
    let accels = accelerator_grid(ctx, a)?;
    let cells: Vec<_> = accels
        .iter()
        .flat_map(|c| models.iter().map(move |m| (c, m)))
        .collect();
    ctx.pool.install(|| {
        cells
            .par_iter()
            .map(|(cfg, model)| {
                let cost = simulate_model(model, cfg)?;
                Ok(SimReport::new(
                    cfg.tpc.platform.accelerator_name(),
                    &model.name,
                    cfg,
                    cost,
                ))
            })
            .collect()
    })
}

fn simulate_files(
    ctx: &Ctx,
    a: &SimulateArgs,
    out: &mut Artifacts,
    source: Option<&str>,
) -> Result<()> {
    let reports = simulate_reports(ctx, a)?;
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
    out.add("simulate_report.json", json);
    match normalize_report(&reports) {
        Ok(table) => {
            let csv = aggregate_csv(&table);
            let text = match source {
                Some(src) => format!("# source: {src}\n{csv}"),
                None => csv,
            };
            out.add("normalized.csv", text);
            Ok(())
        }
        Err(Error::MissingRecord(_)) => {
            eprintln!("note: baseline accelerator not simulated; skipping normalized.csv");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

pub fn read_targets_csv(path: &Path) -> Result<Vec<CalibrationTarget>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_targets_csv(&text, &path.display().to_string())
}

pub fn parse_targets_csv(text: &str, source_name: &str) -> Result<Vec<CalibrationTarget>> {
    let schema = |line: usize, message: String| Error::Schema {
        source_name: source_name.to_string(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let expected = "platform,bits,dr_sps,expected_n";
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == expected => {}
        Some((i, h)) => {
            return Err(schema(
                i + 1,
                format!("header `{h}`, expected `{expected}`"),
            ))
        }
        None => return Err(schema(1, "empty file".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(schema(i + 1, format!("expected 4 fields, got {}", f.len())));
        }
        let bad = |what: &str, e: String| schema(i + 1, format!("{what}: {e}"));
        out.push(CalibrationTarget {
            platform: f[0]
                .parse()
                .map_err(|e: Error| bad("platform", e.to_string()))?,
            bits: f[1]
                .parse()
                .map_err(|e: std::num::ParseIntError| bad("bits", e.to_string()))?,
            dr_sps: f[2]
                .parse()
                .map_err(|e: std::num::ParseFloatError| bad("dr_sps", e.to_string()))?,
            expected_n: f[3]
                .parse()
                .map_err(|e: std::num::ParseIntError| bad("expected_n", e.to_string()))?,
        });
    }
    if out.is_empty() {
        return Err(schema(1, "no targets".into()));
    }
    Ok(out)
}

fn calibrate_files(ctx: &Ctx, a: &CalibrateArgs, out: &mut Artifacts) -> Result<()> {
    let targets = match &a.targets {
        Some(p) => read_targets_csv(p)?,
        None => published_size_targets(),
    };
    let grid = CalibrationGrid {
        min_cm: a.min_um * 1e-4,
        max_cm: a.max_um * 1e-4,
        step_cm: a.step_um * 1e-4,
    };
    let base = |id: Platform| {
        let mut p = PlatformParams::defaults(id);
        if let Some(o) = ctx.overrides.get(&id) {
            p.apply_overrides(o).expect("overrides validated on load");
        }
        p
    };
    let fits = calibrate_d_mrr(&targets, grid, base, a.n_max)?;

    let mut csv = String::from("platform,d_mrr_cm,bits,dr_sps,expected_n,n_opt,residual\n");
    let mut toml = String::from("# Ring pitch fitted by `photogemm calibrate`.\n");
    for fit in &fits {
        for r in &fit.residuals {
            writeln!(
                csv,
                "{},{:.4},{},{},{},{},{}",
                fit.platform.key(),
                fit.d_mrr_cm,
                r.target.bits,
                r.target.dr_sps,
                r.target.expected_n,
                r.n_opt,
                r.residual
            )
            .unwrap();
        }
        writeln!(
            toml,
            "# total |residual| = {}, pitch in 5-50 um window: {}\n[platform.{}]\nd_mrr_cm = {:.4}\n",
            fit.total_abs_residual,
            fit.physically_plausible,
            fit.platform.key(),
            fit.d_mrr_cm
        )
        .unwrap();
    }
    out.add("calibration.csv", csv);
    out.add("calibration.toml", toml);
    Ok(())
}

fn table1_check_csv() -> Result<String> {
    let model = MrmModel::default();
    let mut s = String::from(
        "# source: measured ITO modulator tuning table\nvoltage_v,published_shift_pm,model_shift_pm,abs_error_pm,kind\n",
    );
    for p in &ITO_TABLE {
        let m = model.resonance_shift_at(p.voltage_v)?;
        writeln!(
            s,
            "{},{},{:.6},{:.3e},table",
            p.voltage_v,
            p.res_shift_pm,
            m,
            (m - p.res_shift_pm).abs()
        )
        .unwrap();
    }
    for w in ITO_TABLE.windows(2) {
        let v = 0.5 * (w[0].voltage_v + w[1].voltage_v);
        let m = model.resonance_shift_at(v)?;
        let lin = 0.5 * (w[0].res_shift_pm + w[1].res_shift_pm);
        writeln!(s, "{v},{lin},{m:.6},{:.3e},midpoint", (m - lin).abs()).unwrap();
    }
    Ok(s)
}

fn table3_csv(ctx: &Ctx) -> Result<String> {
    let mut s = String::from(
        "# source: published TPC size and count table\nplatform,dr_sps,published_n,model_n,residual,tpc_count\n",
    );
    for p in Platform::ALL {
        let params = ctx.platform(p)?;
        for dr in DATA_RATES_SPS {
            let (n_pub, count) = crate::archsim::published_tpc(p, dr).expect("published grid");
            let n = optimal_n_bisect(&PrecisionQuery::new(4, dr)?, &params, DEFAULT_N_MAX)?.n_opt;
            writeln!(
                s,
                "{},{dr},{n_pub},{n},{},{count}",
                p.key(),
                n as i64 - n_pub as i64
            )
            .unwrap();
        }
    }
    Ok(s)
}

fn reproduce_files(ctx: &Ctx, out: &mut Artifacts) -> Result<()> {
    out.add("table1_check.csv", table1_check_csv()?);
    out.add(
        "fig5_n_opt.csv",
        scalability_csv(
            ctx,
            &ScalabilityArgs::default(),
            Some("supported TPC size vs bit precision and data rate figure"),
        )?,
    );
    out.add("table3.csv", table3_csv(ctx)?);
    let mut b3 =
        String::from("# source: 3-bit, 1 GS/s TPC sizes quoted with the scalability results\n");
    b3.push_str(&scalability_csv(
        ctx,
        &ScalabilityArgs {
            bits: IntList(vec![3]),
            rates: vec![1e9],
            ..Default::default()
        },
        None,
    )?);
    out.add("b3_1gsps.csv", b3);
    let mut sim = Artifacts::new(&out.dir);
    simulate_files(
        ctx,
        &SimulateArgs::default(),
        &mut sim,
        Some("normalized FPS and FPS/W comparison figure"),
    )?;
    for (name, bytes) in sim.files {
        out.add(&format!("fig8_{name}"), bytes);
    }
    Ok(())
}
