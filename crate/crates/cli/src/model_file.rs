//! Model-file loading: TOML or JSON descriptions of a kernel model.
//!
//! A file names the family and dimension, then supplies each weight
//! sequence either as a closed-form descriptor or as a plain list (list
//! entries beyond the end repeat the last value):
//!
//! ```toml
//! family = "weighted_korobov"
//! d = 2
//! r = { kind = "constant", c = 2.0 }
//! g = [1.0, 0.5, 0.25]
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use tractlab_core::{KernelModel, SequenceFamily};

use crate::UsageError;

/// A sequence slot in a model file: closed-form table or explicit values.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeqSpec {
    List(Vec<f64>),
    Family(SequenceFamily),
}

impl SeqSpec {
    fn into_family(self) -> SequenceFamily {
        match self {
            SeqSpec::List(values) => SequenceFamily::Tabulated { values },
            SeqSpec::Family(f) => f,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    family: String,
    d: usize,
    r: Option<SeqSpec>,
    g: Option<SeqSpec>,
    a: Option<SeqSpec>,
    b: Option<SeqSpec>,
    omega: Option<f64>,
}

fn require(slot: Option<SeqSpec>, field: &str, family: &str) -> Result<SequenceFamily> {
    slot.map(SeqSpec::into_family)
        .ok_or_else(|| anyhow!(UsageError(format!("model file: missing field `{field}` (required for family {family})"))))
}

fn forbid(slot: &Option<SeqSpec>, field: &str, family: &str) -> Result<()> {
    if slot.is_some() {
        bail!(UsageError(format!("model file: field `{field}` does not apply to family {family}")));
    }
    Ok(())
}

impl ModelFile {
    fn build(self) -> Result<KernelModel> {
        match self.family.as_str() {
            "weighted_korobov" => {
                forbid(&self.a, "a", "weighted_korobov")?;
                forbid(&self.b, "b", "weighted_korobov")?;
                if self.omega.is_some() {
                    bail!(UsageError(
                        "model file: field `omega` does not apply to family weighted_korobov".into()
                    ));
                }
                let r = require(self.r, "r", "weighted_korobov")?;
                let g = require(self.g, "g", "weighted_korobov")?;
                KernelModel::weighted_korobov(self.d, r, g)
                    .map_err(|e| anyhow!(UsageError(format!("invalid model: {e}"))))
            }
            "exp_korobov" => {
                forbid(&self.r, "r", "exp_korobov")?;
                forbid(&self.g, "g", "exp_korobov")?;
                let a = require(self.a, "a", "exp_korobov")?;
                let b = require(self.b, "b", "exp_korobov")?;
                let omega = self.omega.ok_or_else(|| {
                    anyhow!(UsageError(
                        "model file: missing field `omega` (required for family exp_korobov)".into()
                    ))
                })?;
                KernelModel::exp_korobov(self.d, a, b, omega)
                    .map_err(|e| anyhow!(UsageError(format!("invalid model: {e}"))))
            }
            other => bail!(UsageError(format!(
                "model file: unknown family `{other}` (expected weighted_korobov or exp_korobov)"
            ))),
        }
    }
}

/// Load and validate a model description from a TOML or JSON file.
pub fn load_model(path: &Path) -> Result<KernelModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model file {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let file: ModelFile = if is_json {
        serde_json::from_str(&text).map_err(|e| {
            anyhow!(UsageError(format!("model file {}: {e}", path.display())))
        })?
    } else {
        toml::from_str(&text).map_err(|e| {
            anyhow!(UsageError(format!("model file {}: {e}", path.display())))
        })?
    };
    file.build()
}
