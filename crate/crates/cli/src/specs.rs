//! JSON spec files. Every file carries a top-level `"kind"`.

use std::fs;
use std::path::Path;

use neuronlab::network::NetworkStructure;
use neuronlab::zeroset::NeuronParams;
use neuronlab::ScalarExpr;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Spec {
    Network {
        structure: NetworkStructure,
        values: Vec<f64>,
        activation: String,
        #[serde(default)]
        inputs: Vec<Vec<f64>>,
    },
    Embedding {
        small: NetworkStructure,
        big: NetworkStructure,
        assignment: Vec<Vec<usize>>,
        split: Vec<Vec<f64>>,
        #[serde(default)]
        values: Option<Vec<f64>>,
    },
    Family {
        functions: Vec<String>,
        #[serde(default)]
        interval: Option<(f64, f64)>,
        #[serde(default)]
        nodes: Option<usize>,
    },
    TwoLayer {
        predictor: Predictor,
        #[serde(default)]
        nonzero_at_origin: bool,
        neurons: Vec<NeuronParams>,
        #[serde(default)]
        activation: Option<String>,
        #[serde(default)]
        interval: Option<(f64, f64)>,
    },
    ThreeLayerTanh {
        w1: Vec<Vec<f64>>,
        w2: Vec<Vec<f64>>,
        #[serde(default)]
        interval: Option<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predictor {
    NobiasGeneric,
    BiasA,
    BiasB,
    BiasC,
}

impl Spec {
    pub fn kind(&self) -> &'static str {
        match self {
            Spec::Network { .. } => "network",
            Spec::Embedding { .. } => "embedding",
            Spec::Family { .. } => "family",
            Spec::TwoLayer { .. } => "two-layer",
            Spec::ThreeLayerTanh { .. } => "three-layer-tanh",
        }
    }
}

pub fn load(path: &Path) -> Result<Spec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Spec {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn expr(text: &str) -> Result<ScalarExpr, CliError> {
    text.parse().map_err(|e| CliError::Domain(format!("expression `{text}`: {e}")))
}

pub fn wrong_kind(want: &str, got: &Spec) -> CliError {
    CliError::Domain(format!("expected a spec of kind `{want}`, got `{}`", got.kind()))
}
