//! Versioned forest model file: JSON with a format marker, the training
//! config, feature order, and the flat node arrays. Serialization is
//! byte-deterministic for a given forest.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{DecisionTree, Forest, ForestConfig};

const FORMAT: &str = "countyvax-forest";
const VERSION: u32 = 1;

#[derive(Serialize)]
struct ForestFileRef<'a> {
    format: &'static str,
    version: u32,
    config: &'a ForestConfig,
    feature_names: &'a [String],
    training_target_mean: f64,
    trees: &'a [DecisionTree],
}

#[derive(Deserialize)]
struct ForestFileOwned {
    format: String,
    version: u32,
    config: ForestConfig,
    feature_names: Vec<String>,
    training_target_mean: f64,
    trees: Vec<DecisionTree>,
}

impl Forest {
    fn file_view(&self) -> ForestFileRef<'_> {
        ForestFileRef {
            format: FORMAT,
            version: VERSION,
            config: self.config(),
            feature_names: self.feature_names(),
            training_target_mean: self.training_target_mean(),
            trees: self.trees(),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.file_view())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer(&mut writer, &self.file_view())?;
        use std::io::Write;
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Forest> {
        let parsed: ForestFileOwned = serde_json::from_str(text)?;
        rebuild(parsed)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parsed: ForestFileOwned = serde_json::from_reader(BufReader::new(file))?;
        rebuild(parsed)
    }
}

fn rebuild(parsed: ForestFileOwned) -> Result<Forest> {
    if parsed.format != FORMAT {
        return Err(Error::CorruptModel(format!(
            "unexpected format marker `{}`",
            parsed.format
        )));
    }
    if parsed.version != VERSION {
        return Err(Error::CorruptModel(format!(
            "unsupported model version {} (supported: {VERSION})",
            parsed.version
        )));
    }
    // Re-run the structural checks on the deserialized nodes.
    let mut trees = Vec::with_capacity(parsed.trees.len());
    for tree in parsed.trees {
        trees.push(DecisionTree::from_nodes(tree.nodes, tree.bootstrap_seed)?);
    }
    Forest::from_parts(
        trees,
        parsed.config,
        parsed.feature_names,
        parsed.training_target_mean,
    )
}
