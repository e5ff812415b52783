//! Declarative sequential recipes.
//!
//! A recipe names an input file, an output file and an ordered list of
//! steps drawn from a closed registry of operations:
//!
//! ```yaml
//! input: study.obg
//! output: lambda_r.json
//! steps:
//!   - op: latlon_deg2m
//!   - op: psd_isotropic
//!     params: {reference: truth.obg}
//!   - op: resolved_scale
//! ```
//!
//! Parsing checks op names and parameters; [`preflight`] checks that value
//! kinds chain from the input file type to the last step without reading any
//! file. [`run_pipeline`] records a manifest with SHA-256 hashes of every
//! step's input and output.

mod presets;
mod registry;
mod yaml;

pub use presets::{
    gulfstream_recipe, ose_test_period, osse_nadir_split, run_gulfstream_osse, run_osse, OsseConfig, OsseOutcome, PRESETS,
};
pub use registry::{op_names, Kind};
pub use yaml::{parse as parse_yaml, Node};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::grid::{encode_grid, encode_track, read_grid, read_track, write_grid, write_track, AlongTrackSet, GriddedField};
use crate::spectral::{PsdScoreCurve, ResolvedScale, SpectrumResult};
use crate::{Error, Result};

/// A typed parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Param>),
    Map(BTreeMap<String, Param>),
}

impl Param {
    fn from_node(node: &Node) -> Param {
        match node {
            Node::Scalar(text, true) => Param::Str(text.clone()),
            Node::Scalar(text, false) => match text.as_str() {
                "" | "~" | "null" => Param::Null,
                "true" => Param::Bool(true),
                "false" => Param::Bool(false),
                t => {
                    if let Ok(i) = t.parse::<i64>() {
                        Param::Int(i)
                    } else if let Some(f) = t.parse::<f64>().ok().filter(|f| f.is_finite()) {
                        Param::Float(f)
                    } else {
                        Param::Str(t.to_string())
                    }
                }
            },
            Node::Seq(items) => Param::List(items.iter().map(Param::from_node).collect()),
            Node::Map(entries) => Param::Map(entries.iter().map(|(k, v)| (k.clone(), Param::from_node(v))).collect()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Param::Int(i) => Some(*i as f64),
            Param::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Param::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Param::Null => s.serialize_unit(),
            Param::Bool(b) => s.serialize_bool(*b),
            Param::Int(i) => s.serialize_i64(*i),
            Param::Float(f) => s.serialize_f64(*f),
            Param::Str(v) => s.serialize_str(v),
            Param::List(v) => v.serialize(s),
            Param::Map(m) => m.serialize(s),
        }
    }
}

pub type Params = BTreeMap<String, Param>;

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub op: String,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: String,
    pub output: String,
    pub steps: Vec<Step>,
}

fn scalar_field(node: &Node, path: &str) -> Result<String> {
    match node {
        Node::Scalar(s, _) if !s.is_empty() => Ok(s.clone()),
        other => Err(Error::config(path, format!("expected a non-empty string, found a {}", other.kind()))),
    }
}

/// Parses and validates a recipe (op names and parameters).
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let root = yaml::parse(text)?;
    let Node::Map(entries) = root else {
        return Err(Error::config("<root>", "expected a mapping with input, output and steps"));
    };
    let (mut input, mut output, mut steps) = (None, None, Vec::new());
    for (key, node) in &entries {
        match key.as_str() {
            "input" => input = Some(scalar_field(node, "input")?),
            "output" => output = Some(scalar_field(node, "output")?),
            "steps" => steps = parse_steps(node)?,
            other => return Err(Error::config(other, "unknown key")),
        }
    }
    Ok(PipelineConfig {
        input: input.ok_or_else(|| Error::config("input", "missing"))?,
        output: output.ok_or_else(|| Error::config("output", "missing"))?,
        steps,
    })
}

fn parse_steps(node: &Node) -> Result<Vec<Step>> {
    let items = match node {
        Node::Seq(items) => items.as_slice(),
        Node::Scalar(s, false) if s.is_empty() || s == "null" || s == "~" => &[],
        other => return Err(Error::config("steps", format!("expected a sequence, found a {}", other.kind()))),
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let path = format!("steps[{i}]");
            let Node::Map(entries) = item else {
                return Err(Error::config(&path, format!("expected a mapping, found a {}", item.kind())));
            };
            let mut op = None;
            let mut params = Params::new();
            for (key, value) in entries {
                match key.as_str() {
                    "op" => op = Some(scalar_field(value, &format!("{path}.op"))?),
                    "params" => match value {
                        Node::Map(kv) => {
                            params = kv.iter().map(|(k, v)| (k.clone(), Param::from_node(v))).collect();
                        }
                        Node::Scalar(s, false) if s.is_empty() || s == "null" => {}
                        other => {
                            return Err(Error::config(
                                format!("{path}.params"),
                                format!("expected a mapping, found a {}", other.kind()),
                            ))
                        }
                    },
                    other => return Err(Error::config(format!("{path}.{other}"), "unknown key")),
                }
            }
            let op = op.ok_or_else(|| Error::config(format!("{path}.op"), "missing"))?;
            registry::validate_params(&op, &params, &path)?;
            Ok(Step { op, params })
        })
        .collect()
}

/// A value flowing between steps.
#[derive(Debug, Clone)]
pub enum Value {
    Grid(GriddedField),
    Track(AlongTrackSet),
    Spectrum(SpectrumResult),
    Score(PsdScoreCurve),
    Scale(ResolvedScale),
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Grid(_) => Kind::Grid,
            Value::Track(_) => Kind::Track,
            Value::Spectrum(_) => Kind::Spectrum,
            Value::Score(_) => Kind::Score,
            Value::Scale(_) => Kind::Scale,
        }
    }

    /// Bytes that are hashed and written as output.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        match self {
            Value::Grid(g) => encode_grid(g),
            Value::Track(t) => encode_track(t),
            Value::Spectrum(s) => s.to_csv().into_bytes(),
            Value::Score(s) => s.to_csv().into_bytes(),
            Value::Scale(s) => {
                let mut v = serde_json::to_vec_pretty(s).expect("scale serializes");
                v.push(b'\n');
                v
            }
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.canonical_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub op: String,
    pub params: Params,
    pub in_hash: String,
    pub out_hash: String,
    pub ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Manifest {
    pub steps: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of a file judged by its extension.
pub fn kind_of_path(path: &str) -> Result<Kind> {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("obg") => Ok(Kind::Grid),
        Some("csv") => Ok(Kind::Track),
        _ => Err(Error::config("input", format!("cannot tell the kind of `{path}`; use .obg or .csv"))),
    }
}

/// Checks that kinds chain through every step. Reads no files.
pub fn preflight(cfg: &PipelineConfig) -> Result<Vec<Kind>> {
    let mut kind = kind_of_path(&cfg.input)?;
    let mut kinds = vec![kind];
    for (i, step) in cfg.steps.iter().enumerate() {
        kind = registry::output_kind(&step.op, &step.params, kind).ok_or_else(|| {
            Error::config(
                format!("steps[{i}].op"),
                format!("`{}` does not accept a {kind} input", step.op),
            )
        })?;
        kinds.push(kind);
    }
    Ok(kinds)
}

/// Paths in a recipe resolve against this directory.
#[derive(Debug, Clone)]
pub struct Context {
    pub base_dir: PathBuf,
}

impl Context {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        Context {
            base_dir: base_dir.into(),
        }
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn load(path: &Path, kind: Kind) -> Result<Value> {
    match kind {
        Kind::Grid => read_grid(path).map(Value::Grid),
        Kind::Track => read_track(path).map(Value::Track),
        other => Err(Error::InvalidArgument(format!("cannot read a {other} input"))),
    }
}

/// Applies the steps to an in-memory value.
pub fn run_steps(steps: &[Step], input: Value, ctx: &Context) -> Result<(Value, Manifest)> {
    let mut value = input;
    let mut manifest = Manifest::default();
    for (index, step) in steps.iter().enumerate() {
        let in_hash = value.hash();
        let start = Instant::now();
        let wrap = |e: Error| Error::Step {
            index,
            op: step.op.clone(),
            source: Box::new(e),
        };
        let (out, scalar) = registry::apply(&step.op, &step.params, value, ctx).map_err(wrap)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        log::info!("step {index} `{}` finished in {ms:.1} ms", step.op);
        manifest.steps.push(ManifestEntry {
            op: step.op.clone(),
            params: step.params.clone(),
            in_hash,
            out_hash: out.hash(),
            ms,
            value: scalar,
        });
        value = out;
    }
    Ok((value, manifest))
}

/// Runs a recipe: preflight, read the input, apply every step, write the
/// final value to `output` and the manifest next to it.
pub fn run_pipeline(cfg: &PipelineConfig, ctx: &Context) -> Result<(Value, Manifest)> {
    let kinds = preflight(cfg)?;
    let input = load(&ctx.resolve(&cfg.input), kinds[0])?;
    let (value, manifest) = run_steps(&cfg.steps, input, ctx)?;
    let out = ctx.resolve(&cfg.output);
    match &value {
        Value::Grid(g) => write_grid(g, &out)?,
        Value::Track(t) => write_track(t, &out)?,
        other => fs::write(&out, other.canonical_bytes())?,
    }
    fs::write(manifest_path(&out), manifest.to_json())?;
    Ok((value, manifest))
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
