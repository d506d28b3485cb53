//! CNN model descriptions and their lowering to GEMM operations (im2col).
//!
//! Model files are JSON; see `models/SCHEMA.md`. Convolutions lower to
//! `K × (C·R·S) × (P·Q)` GEMMs, grouped convolutions to one GEMM per group,
//! fully-connected layers to `out × in × 1`. Pooling and activation layers
//! carry no GEMM but stay in the layer list for cost accounting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const BUNDLED_MODELS: [(&str, &str); 3] = [
    ("resnet50", include_str!("../models/resnet50.json")),
    ("googlenet", include_str!("../models/googlenet.json")),
    ("shufflenetv2", include_str!("../models/shufflenetv2.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv,
    Fc,
    Pool,
    Activation,
}

fn one() -> usize {
    1
}

fn unit_kernel() -> [usize; 2] {
    [1, 1]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    /// (H, W, C)
    pub input: [usize; 3],
    /// (R, S)
    #[serde(default = "unit_kernel")]
    pub kernel: [usize; 2],
    /// K for conv, output features for fc.
    #[serde(default)]
    pub out_channels: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub padding: usize,
    #[serde(default = "one")]
    pub groups: usize,
}

impl LayerSpec {
    pub fn conv(
        name: &str,
        input: [usize; 3],
        kernel: usize,
        out_channels: usize,
        stride: usize,
        padding: usize,
    ) -> Self {
        LayerSpec {
            name: name.to_string(),
            kind: LayerKind::Conv,
            input,
            kernel: [kernel, kernel],
            out_channels,
            stride,
            padding,
            groups: 1,
        }
    }

    pub fn fc(name: &str, in_features: usize, out_features: usize) -> Self {
        LayerSpec {
            name: name.to_string(),
            kind: LayerKind::Fc,
            input: [1, 1, in_features],
            kernel: [1, 1],
            out_channels: out_features,
            stride: 1,
            padding: 0,
            groups: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("layer `{}`: {msg}", self.name)));
        if self.input.contains(&0) {
            return bad("input dims must be positive".into());
        }
        if self.kernel.contains(&0) || self.stride == 0 || self.groups == 0 {
            return bad("kernel, stride and groups must be positive".into());
        }
        match self.kind {
            LayerKind::Conv | LayerKind::Fc => {
                if self.out_channels == 0 {
                    return bad("out_channels must be positive".into());
                }
            }
            LayerKind::Pool | LayerKind::Activation => {}
        }
        if self.kind == LayerKind::Conv
            && (!self.input[2].is_multiple_of(self.groups)
                || !self.out_channels.is_multiple_of(self.groups))
        {
            return bad(format!(
                "groups = {} must divide input ({}) and output ({}) channels",
                self.groups, self.input[2], self.out_channels
            ));
        }
        if self.kind != LayerKind::Activation {
            let [h, w, _] = self.input;
            if h + 2 * self.padding < self.kernel[0] || w + 2 * self.padding < self.kernel[1] {
                return bad("kernel larger than padded input".into());
            }
        }
        Ok(())
    }

    /// Output spatial size (P, Q).
    pub fn output_hw(&self) -> (usize, usize) {
        match self.kind {
            LayerKind::Activation | LayerKind::Fc => (self.input[0], self.input[1]),
            LayerKind::Conv | LayerKind::Pool => {
                let [h, w, _] = self.input;
                let [r, s] = self.kernel;
                (
                    (h + 2 * self.padding - r) / self.stride + 1,
                    (w + 2 * self.padding - s) / self.stride + 1,
                )
            }
        }
    }

    /// Number of output elements this layer produces.
    pub fn output_elements(&self) -> usize {
        let (p, q) = self.output_hw();
        match self.kind {
            LayerKind::Conv => p * q * self.out_channels,
            LayerKind::Fc => self.out_channels,
            LayerKind::Pool | LayerKind::Activation => p * q * self.input[2],
        }
    }

    pub fn is_gemm(&self) -> bool {
        matches!(self.kind, LayerKind::Conv | LayerKind::Fc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GemmOp {
    pub rows: usize,
    pub inner: usize,
    pub cols: usize,
    pub source_layer: String,
    pub mac_count: u64,
}

impl GemmOp {
    pub fn new(
        rows: usize,
        inner: usize,
        cols: usize,
        source_layer: impl Into<String>,
    ) -> Result<Self> {
        if rows == 0 || inner == 0 || cols == 0 {
            return Err(Error::InvalidInput("GEMM dimensions must be >= 1".into()));
        }
        Ok(GemmOp {
            rows,
            inner,
            cols,
            source_layer: source_layer.into(),
            mac_count: rows as u64 * inner as u64 * cols as u64,
        })
    }

    pub fn outputs(&self) -> u64 {
        self.rows as u64 * self.cols as u64
    }
}

/// Lowers one conv/fc layer; a grouped convolution yields one op per group.
pub fn im2col(layer: &LayerSpec) -> Result<Vec<GemmOp>> {
    layer.validate()?;
    match layer.kind {
        LayerKind::Conv => {
            let (p, q) = layer.output_hw();
            let [r, s] = layer.kernel;
            let g = layer.groups;
            let op = GemmOp::new(
                layer.out_channels / g,
                (layer.input[2] / g) * r * s,
                p * q,
                layer.name.clone(),
            )?;
            Ok(vec![op; g])
        }
        LayerKind::Fc => {
            let [h, w, c] = layer.input;
            Ok(vec![GemmOp::new(
                layer.out_channels,
                h * w * c,
                1,
                layer.name.clone(),
            )?])
        }
        LayerKind::Pool | LayerKind::Activation => Err(Error::InvalidInput(format!(
            "layer `{}` ({:?}) has no GEMM form",
            layer.name, layer.kind
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub layers: Vec<LayerSpec>,
}

/// A parsed model: its layers in execution order and their GEMM lowering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Workload {
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

/// One executable step of a workload, in execution order.
#[derive(Debug, Clone, PartialEq)]
pub enum Step<'a> {
    Gemm {
        layer: &'a LayerSpec,
        ops: Vec<GemmOp>,
    },
    Pool(&'a LayerSpec),
    Activation(&'a LayerSpec),
}

impl Workload {
    pub fn from_layers(name: impl Into<String>, layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("model has no layers".into()));
        }
        for l in &layers {
            l.validate()?;
        }
        Ok(Workload {
            name: name.into(),
            layers,
        })
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            source_name: source_name.to_string(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                source_name: source_name.to_string(),
                message: format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    file.schema_version
                ),
            });
        }
        if file.layers.is_empty() {
            return Err(Error::Schema {
                source_name: source_name.to_string(),
                message: "field `layers`: empty layer list".into(),
            });
        }
        for (i, l) in file.layers.iter().enumerate() {
            l.validate().map_err(|e| Error::Schema {
                source_name: source_name.to_string(),
                message: format!("layers[{i}]: {e}"),
            })?;
        }
        Ok(Workload {
            name: file.name,
            layers: file.layers,
        })
    }

    pub fn steps(&self) -> Result<Vec<Step<'_>>> {
        self.layers
            .iter()
            .map(|l| {
                Ok(match l.kind {
                    LayerKind::Conv | LayerKind::Fc => Step::Gemm {
                        layer: l,
                        ops: im2col(l)?,
                    },
                    LayerKind::Pool => Step::Pool(l),
                    LayerKind::Activation => Step::Activation(l),
                })
            })
            .collect()
    }

    pub fn gemm_ops(&self) -> Result<Vec<GemmOp>> {
        let mut out = Vec::new();
        for l in self.layers.iter().filter(|l| l.is_gemm()) {
            out.extend(im2col(l)?);
        }
        Ok(out)
    }

    pub fn summary(&self) -> Result<WorkloadSummary> {
        let ops = self.gemm_ops()?;
        Ok(WorkloadSummary {
            total_macs: ops.iter().map(|o| o.mac_count).sum(),
            gemm_count: ops.len(),
            max_inner: ops.iter().map(|o| o.inner).max().unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WorkloadSummary {
    pub total_macs: u64,
    pub gemm_count: usize,
    pub max_inner: usize,
}

pub fn load_model(path: &Path) -> Result<Workload> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Workload::parse(&text, &path.display().to_string())
}

/// One of the bundled models by name (`resnet50`, `googlenet`, `shufflenetv2`).
pub fn bundled_model(name: &str) -> Result<Workload> {
    let key = name.trim().to_ascii_lowercase().replace(['-', '_'], "");
    BUNDLED_MODELS
        .iter()
        .find(|(n, _)| *n == key)
        .ok_or_else(|| Error::InvalidInput(format!("no bundled model named `{name}`")))
        .and_then(|(n, text)| Workload::parse(text, &format!("bundled:{n}")))
}

/// A bundled model name, or otherwise a path to a model file.
pub fn resolve_model(name_or_path: &str) -> Result<Workload> {
    let path = Path::new(name_or_path);
    if path.exists() {
        load_model(path)
    } else {
        bundled_model(name_or_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn im2col_examples() {
        let small = LayerSpec::conv("c", [4, 4, 1], 3, 2, 1, 0);
        assert_eq!(
            im2col(&small).unwrap(),
            vec![GemmOp::new(2, 9, 4, "c").unwrap()]
        );

        let fc = LayerSpec::fc("fc", 512, 1000);
        assert_eq!(
            im2col(&fc).unwrap(),
            vec![GemmOp::new(1000, 512, 1, "fc").unwrap()]
        );

        let stem = LayerSpec::conv("conv1", [224, 224, 3], 7, 64, 2, 3);
        let ops = im2col(&stem).unwrap();
        assert_eq!((ops[0].rows, ops[0].inner, ops[0].cols), (64, 147, 12544));
        assert_eq!(ops[0].mac_count, 64 * 147 * 12544);
    }

    #[test]
    fn grouped_conv_splits_per_group() {
        let mut dw = LayerSpec::conv("dw", [28, 28, 116], 3, 116, 1, 1);
        dw.groups = 116;
        let ops = im2col(&dw).unwrap();
        assert_eq!(ops.len(), 116);
        assert!(ops
            .iter()
            .all(|o| o.rows == 1 && o.inner == 9 && o.cols == 784));
    }

    #[test]
    fn non_gemm_rejected() {
        let pool = LayerSpec {
            kind: LayerKind::Pool,
            ..LayerSpec::conv("p", [8, 8, 4], 2, 0, 2, 0)
        };
        assert!(im2col(&pool).is_err());
        assert_eq!(pool.output_elements(), 4 * 4 * 4);
    }

    #[test]
    fn bundled_resnet_stem() {
        let w = bundled_model("resnet50").unwrap();
        let first = w.layers.iter().find(|l| l.kind == LayerKind::Conv).unwrap();
        assert_eq!(first.kernel, [7, 7]);
        assert_eq!(first.out_channels, 64);
        assert_eq!(first.stride, 2);
    }

    #[test]
    fn resnet_macs_near_reference() {
        let s = bundled_model("resnet50").unwrap().summary().unwrap();
        let rel = (s.total_macs as f64 - 4.1e9).abs() / 4.1e9;
        assert!(rel < 0.02, "{}", s.total_macs);
    }

    #[test]
    fn summary_examples() {
        let w = Workload::from_layers(
            "one",
            vec![LayerSpec::conv("conv1", [224, 224, 3], 7, 64, 2, 3)],
        )
        .unwrap();
        assert_eq!(w.summary().unwrap().total_macs, 64 * 147 * 12544);
        let act = LayerSpec {
            name: "relu".into(),
            kind: LayerKind::Activation,
            input: [4, 4, 4],
            kernel: [1, 1],
            out_channels: 0,
            stride: 1,
            padding: 0,
            groups: 1,
        };
        let w = Workload::from_layers("none", vec![act]).unwrap();
        assert_eq!(
            w.summary().unwrap(),
            WorkloadSummary {
                total_macs: 0,
                gemm_count: 0,
                max_inner: 0
            }
        );
    }

    #[test]
    fn schema_errors() {
        let empty = r#"{"schema_version": 1, "name": "x", "layers": []}"#;
        assert!(matches!(
            Workload::parse(empty, "t"),
            Err(Error::Schema { .. })
        ));

        let bad_kind = r#"{"schema_version": 1, "name": "x", "layers": [
            {"name": "a", "kind": "deconv", "input": [4, 4, 1]}]}"#;
        let err = Workload::parse(bad_kind, "t").unwrap_err().to_string();
        assert!(err.contains("deconv"), "{err}");
        assert!(err.contains("line 2"), "{err}");

        let unknown_field = r#"{"schema_version": 1, "name": "x", "layers": [
            {"name": "a", "kind": "conv", "input": [4, 4, 1], "out_channels": 2, "dilation": 2}]}"#;
        assert!(Workload::parse(unknown_field, "t").is_err());

        let version = r#"{"schema_version": 9, "name": "x", "layers": []}"#;
        assert!(Workload::parse(version, "t")
            .unwrap_err()
            .to_string()
            .contains("schema_version"));
    }

    #[test]
    fn deterministic_reload() {
        for (name, _) in BUNDLED_MODELS {
            assert_eq!(bundled_model(name).unwrap(), bundled_model(name).unwrap());
        }
    }
}
