//! Input documents.

use mwumech_core::auction::{AlphaMode, AuctionInstance, Valuation};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `A` either as nested rows or as one row-major array of length `m * n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

/// `{"m", "n", "A", "b", "c"}` with optional solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixInput {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl MatrixInput {
    /// Dense rows after checking the declared shape.
    pub fn rows(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let (m, n) = (self.m, self.n);
        let rows = match &self.a {
            Matrix::Rows(rows) => rows.clone(),
            Matrix::Flat(flat) => {
                if flat.len() != m * n {
                    return Err(CliError::Input(format!(
                        "A has {} entries, expected m * n = {}",
                        flat.len(),
                        m * n
                    )));
                }
                flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect()
            }
        };
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Input(format!("A must have {m} rows of {n} entries")));
        }
        if self.b.len() != m {
            return Err(CliError::Input(format!("b has {} entries, expected {m}", self.b.len())));
        }
        if self.c.len() != n {
            return Err(CliError::Input(format!("c has {} entries, expected {n}", self.c.len())));
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlayerInput {
    SingleMinded { bundle: Vec<usize>, value: f64 },
    Additive { values: Vec<f64> },
}

impl From<&PlayerInput> for Valuation {
    fn from(p: &PlayerInput) -> Self {
        match p {
            PlayerInput::SingleMinded { bundle, value } => Valuation::SingleMinded {
                bundle: bundle.clone(),
                value: *value,
            },
            PlayerInput::Additive { values } => Valuation::Additive { values: values.clone() },
        }
    }
}

impl From<&Valuation> for PlayerInput {
    fn from(v: &Valuation) -> Self {
        match v {
            Valuation::SingleMinded { bundle, value } => PlayerInput::SingleMinded {
                bundle: bundle.clone(),
                value: *value,
            },
            Valuation::Additive { values } => PlayerInput::Additive { values: values.clone() },
        }
    }
}

/// Auction instance shared by `gen`, `mechanism` and `solve-pack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceInput {
    pub items: usize,
    pub players: Vec<PlayerInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceInput {
    pub fn instance(&self) -> Result<AuctionInstance, CliError> {
        Ok(AuctionInstance::new(
            self.items,
            self.players.iter().map(Valuation::from).collect(),
        )?)
    }

    pub fn from_instance(instance: &AuctionInstance) -> Self {
        Self {
            items: instance.num_items(),
            players: instance.players().iter().map(PlayerInput::from).collect(),
            epsilon0: None,
            epsilon: None,
            alpha_mode: None,
            seed: None,
        }
    }
}

/// `decompose` input: an auction domain, the point to decompose and the
/// verifier settings. Without `x_star` the fractional welfare optimum of
/// the players' values is used. Mechanism settings of an instance document
/// are accepted and ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeInput {
    pub items: usize,
    pub players: Vec<PlayerInput>,
    #[serde(default, alias = "x*")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alpha_mode: Option<String>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon0: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl DecomposeInput {
    pub fn instance(&self) -> Result<AuctionInstance, CliError> {
        Ok(AuctionInstance::new(
            self.items,
            self.players.iter().map(Valuation::from).collect(),
        )?)
    }
}

pub fn parse_alpha_mode(name: &str) -> Result<AlphaMode, CliError> {
    Ok(AlphaMode::parse(name)?)
}
