//! Loading and validating JSON inputs before any computation runs.
//!
//! Arguments that take a document accept either a path or the JSON text
//! itself (anything starting with `{` or `[`).

use std::fs;
use std::path::{Path, PathBuf};

use realop_core::linalg::Mat;
use realop_core::{CBMap, OpSpace};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::CliError;

/// Where a document came from, used to prefix diagnostics and to resolve
/// relative paths inside it.
#[derive(Debug, Clone)]
pub struct Source {
    pub label: String,
    pub text: String,
    pub dir: PathBuf,
}

impl Source {
    pub fn open(arg: &str) -> Result<Self, CliError> {
        Self::open_relative(arg, Path::new("."))
    }

    fn open_relative(arg: &str, base: &Path) -> Result<Self, CliError> {
        let t = arg.trim_start();
        if t.starts_with('{') || t.starts_with('[') {
            return Ok(Source {
                label: "<inline>".into(),
                text: arg.to_string(),
                dir: base.to_path_buf(),
            });
        }
        let path = base.join(arg);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Input(format!("{}: cannot read: {e}", path.display())))?;
        Ok(Source {
            label: path.display().to_string(),
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            text,
        })
    }

    /// Deserializes with the failing field path and line/column in the error.
    pub fn parse<T: DeserializeOwned>(&self, what: &str) -> Result<T, CliError> {
        let mut de = serde_json::Deserializer::from_str(&self.text);
        let v = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CliError::Input(format!(
                "{}: invalid {what} at field `{field}`: {inner}",
                self.label
            ))
        })?;
        de.end().map_err(|e| {
            CliError::Input(format!("{}: trailing data after {what}: {e}", self.label))
        })?;
        Ok(v)
    }
}

pub fn load<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    Source::open(arg)?.parse(what)
}

pub fn load_space(arg: &str) -> Result<OpSpace, CliError> {
    load(arg, "operator space")
}

/// A plain coefficient vector, e.g. `[1, 0]`.
pub fn load_vector(arg: &str) -> Result<Vec<f64>, CliError> {
    load(arg, "coefficient vector")
}

/// A list of coefficient vectors; used for subspaces.
pub fn load_vectors(arg: &str) -> Result<Vec<Vec<f64>>, CliError> {
    load(arg, "list of coefficient vectors")
}

/// Map documents look like
/// `{"matrix": [[...]] | Mat, "domain": path | space, "codomain": path | space}`.
/// A missing domain falls back to `default_domain`, a missing codomain to the
/// domain.
pub fn load_map(arg: &str, default_domain: Option<&OpSpace>) -> Result<CBMap, CliError> {
    let src = Source::open(arg)?;
    let raw: MapDoc = src.parse("linear map")?;
    let matrix = match raw.matrix {
        Value::Array(_) => {
            let rows: Vec<Vec<f64>> = sub_parse(&src, "matrix", raw.matrix)?;
            Mat::from_rows(&rows)
                .map_err(|e| CliError::Input(format!("{}: field `matrix`: {e}", src.label)))?
        }
        other => sub_parse(&src, "matrix", other)?,
    };
    let domain = match raw.domain {
        Some(v) => space_ref(&src, "domain", v)?,
        None => default_domain
            .cloned()
            .ok_or_else(|| CliError::Input(format!("{}: missing field `domain`", src.label)))?,
    };
    let codomain = match raw.codomain {
        Some(v) => space_ref(&src, "codomain", v)?,
        None => domain.clone(),
    };
    CBMap::new(domain, codomain, matrix).map_err(|e| CliError::Input(format!("{}: {e}", src.label)))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    matrix: Value,
    #[serde(default)]
    domain: Option<Value>,
    #[serde(default)]
    codomain: Option<Value>,
}

fn sub_parse<T: DeserializeOwned>(src: &Source, field: &str, v: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." {
            field.to_string()
        } else {
            format!("{field}.{path}")
        };
        CliError::Input(format!(
            "{}: invalid field `{at}`: {}",
            src.label,
            e.into_inner()
        ))
    })
}

fn space_ref(src: &Source, field: &str, v: Value) -> Result<OpSpace, CliError> {
    match v {
        Value::String(p) => Source::open_relative(&p, &src.dir)?.parse("operator space"),
        other => sub_parse(src, field, other),
    }
}
