//! Input files read by the commands.

use std::collections::BTreeMap;
use std::path::Path;

use filtrations::bricks::{GlueMode, GluedChain, Mode};
use filtrations::coupling::{half_product_bound, UniformSteps};
use filtrations::split_words::{SplitWordsChain, SplitWordsSpec};
use filtrations::Execution;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

/// Reads a JSON file twice: as the typed input and as a raw value echoed
/// into the report.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let typed = serde_json::from_value(raw.clone()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((typed, raw))
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

/// `{"alphabet": 2, "lengths": [4, 2, 1]}`, lengths deepest first.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitWordsInput {
    pub alphabet: u32,
    pub lengths: Vec<u64>,
}

impl SplitWordsInput {
    pub fn build(&self) -> Result<SplitWordsSpec, CliError> {
        Ok(SplitWordsSpec::from_deepest_first(self.alphabet, &self.lengths)?)
    }
}

fn default_glue() -> GlueMode {
    GlueMode::ConstantQ
}

fn default_mode() -> Mode {
    Mode::Generator
}

/// `{"kind": "glued", "family": "matrix", "q": 8, "bricks": 3}` or
/// `{"kind": "split_words", "alphabet": 2, "lengths": [4, 2, 1]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainInput {
    Glued {
        family: String,
        q: u64,
        bricks: usize,
        #[serde(default = "default_glue")]
        glue: GlueMode,
        #[serde(default = "default_mode")]
        mode: Mode,
    },
    SplitWords {
        alphabet: u32,
        lengths: Vec<u64>,
    },
}

pub enum BuiltChain {
    Glued(GluedChain),
    SplitWords(SplitWordsChain),
}

impl BuiltChain {
    pub fn steps(&self) -> &dyn UniformSteps {
        match self {
            BuiltChain::Glued(c) => c,
            BuiltChain::SplitWords(c) => c,
        }
    }

    /// Lower bound on P[copies differ] at level −1 under an independent
    /// start, by depth.
    pub fn separation_bounds(&self) -> BTreeMap<u64, BigRational> {
        match self {
            BuiltChain::Glued(c) => BTreeMap::from([(1, half_product_bound(&c.alphas()))]),
            BuiltChain::SplitWords(_) => BTreeMap::new(),
        }
    }

    /// Per-step guaranteed separation factors, by depth.
    pub fn step_floors(&self) -> Vec<Option<BigRational>> {
        match self {
            BuiltChain::Glued(c) => c.step_floors(),
            BuiltChain::SplitWords(c) => vec![None; c.depth() as usize + 1],
        }
    }

    /// (deeper, shallower) pairs of consecutive odd depths.
    pub fn step_pairs(&self, start_depth: u64) -> Vec<(u64, u64)> {
        match self {
            BuiltChain::Glued(_) => (1..).step_by(2).take_while(|d| d + 2 <= start_depth).map(|d| (d + 2, d)).collect(),
            BuiltChain::SplitWords(_) => Vec::new(),
        }
    }
}

impl ChainInput {
    pub fn build(&self, budget: u64, exec: Execution) -> Result<BuiltChain, CliError> {
        match self {
            ChainInput::Glued { family, q, bricks, glue, mode } => {
                Ok(BuiltChain::Glued(GluedChain::build(family, *q, *bricks, *glue, *mode, budget, exec)?))
            }
            ChainInput::SplitWords { alphabet, lengths } => {
                let spec = SplitWordsSpec::from_deepest_first(*alphabet, lengths)?;
                Ok(BuiltChain::SplitWords(SplitWordsChain::new(spec)?))
            }
        }
    }
}
