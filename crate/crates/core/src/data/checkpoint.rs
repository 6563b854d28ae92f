use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, ErrorCode, Result};
use crate::numerics::DenseMatrix;
use crate::policy::{Architecture, Policy};
use crate::state::FeatureMask;

pub const CHECKPOINT_FORMAT: &str = "gpal-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub alpha: f64,
    pub feature_mask: FeatureMask,
    pub training_graphs: Vec<String>,
    pub seed: u64,
    pub episodes: usize,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub policy: Policy,
    pub meta: CheckpointMeta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheckpoint {
    format: String,
    version: u32,
    architecture: String,
    alpha: f64,
    feature_mask: String,
    training_graphs: Vec<String>,
    seed: u64,
    episodes: usize,
    tensors: Vec<RawTensor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    name: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Weights are written with 17 significant digits, which round-trips
/// every finite `f64` exactly.
pub fn write_checkpoint(checkpoint: &Checkpoint) -> String {
    let meta = &checkpoint.meta;
    let arch = checkpoint.policy.architecture();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"format\": \"{CHECKPOINT_FORMAT}\",");
    let _ = writeln!(out, "  \"version\": {CHECKPOINT_VERSION},");
    let _ = writeln!(out, "  \"architecture\": \"{arch}\",");
    let _ = writeln!(out, "  \"alpha\": {},", float(meta.alpha));
    let _ = writeln!(out, "  \"feature_mask\": \"{}\",", meta.feature_mask);
    let _ = writeln!(
        out,
        "  \"training_graphs\": {},",
        serde_json::to_string(&meta.training_graphs).expect("strings serialize")
    );
    let _ = writeln!(out, "  \"seed\": {},", meta.seed);
    let _ = writeln!(out, "  \"episodes\": {},", meta.episodes);
    out.push_str("  \"tensors\": [\n");
    let names = Policy::tensor_names(arch);
    let tensors = checkpoint.policy.tensors();
    for (i, (name, t)) in names.iter().zip(&tensors).enumerate() {
        let values: Vec<String> = t.as_slice().iter().map(|&x| float(x)).collect();
        let _ = write!(
            out,
            "    {{\"name\": \"{name}\", \"rows\": {}, \"cols\": {}, \"values\": [{}]}}",
            t.rows(),
            t.cols(),
            values.join(", ")
        );
        out.push_str(if i + 1 < tensors.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

fn float(x: f64) -> String {
    assert!(x.is_finite(), "checkpoint values must be finite");
    format!("{x:.16e}")
}

/// Parses a checkpoint; with `expected`, a different architecture is an
/// error.
pub fn parse_checkpoint(text: &str, expected: Option<Architecture>) -> Result<Checkpoint> {
    let malformed = |msg: String| Error::data(ErrorCode::Malformed, msg);
    let raw: RawCheckpoint =
        serde_json::from_str(text).map_err(|e| malformed(format!("checkpoint line {}: {e}", e.line())))?;
    if raw.format != CHECKPOINT_FORMAT {
        return Err(malformed(format!("not a policy checkpoint (format '{}')", raw.format)));
    }
    if raw.version != CHECKPOINT_VERSION {
        return Err(Error::data(
            ErrorCode::Version,
            format!("checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})", raw.version),
        ));
    }
    let arch: Architecture = raw.architecture.parse()?;
    if let Some(want) = expected {
        if want != arch {
            return Err(Error::data(
                ErrorCode::ArchitectureMismatch,
                format!("checkpoint holds a {arch} policy, expected {want}"),
            ));
        }
    }
    let feature_mask: FeatureMask = raw
        .feature_mask
        .parse()
        .map_err(|e| malformed(format!("feature_mask: {e}")))?;
    if !(raw.alpha > 0.0 && raw.alpha.is_finite()) {
        return Err(malformed(format!("alpha {} must be positive", raw.alpha)));
    }

    let names = Policy::tensor_names(arch);
    if raw.tensors.len() != names.len() || raw.tensors.iter().zip(names).any(|(t, n)| t.name != *n) {
        let found: Vec<&str> = raw.tensors.iter().map(|t| t.name.as_str()).collect();
        return Err(Error::data(
            ErrorCode::ArchitectureMismatch,
            format!("{arch} policy needs tensors {names:?}, found {found:?}"),
        ));
    }
    let mut tensors = Vec::with_capacity(names.len());
    for t in raw.tensors {
        if t.values.len() != t.rows * t.cols {
            return Err(malformed(format!(
                "tensor {} declares {}x{} but holds {} values",
                t.name,
                t.rows,
                t.cols,
                t.values.len()
            )));
        }
        tensors.push(DenseMatrix::from_vec(t.rows, t.cols, t.values));
    }
    let policy = Policy::from_tensors(arch, tensors)?;
    Ok(Checkpoint {
        policy,
        meta: CheckpointMeta {
            alpha: raw.alpha,
            feature_mask,
            training_graphs: raw.training_graphs,
            seed: raw.seed,
            episodes: raw.episodes,
        },
    })
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_checkpoint(checkpoint)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>, expected: Option<Architecture>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text, expected).map_err(|e| match e {
        Error::Data { code, message } => Error::data(code, format!("{}: {message}", path.display())),
        other => other,
    })
}
