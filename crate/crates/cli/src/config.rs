//! Run configuration: the key-value config file and the
//! flag > config-file > default resolution.

use std::fs;
use std::path::{Path, PathBuf};

use countyvax::data::Schema;
use countyvax::forest::ForestConfig;

/// CLI failure split by exit code: usage/config problems exit 2,
/// runtime problems exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Runtime(err)
    }
}

impl From<countyvax::Error> for CliError {
    fn from(err: countyvax::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(err))
    }
}

/// Optional settings read from `--config`; any flag overrides its entry.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trees: Option<usize>,
    pub min_node_size: Option<usize>,
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub test_fraction: Option<f64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<FileConfig, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|msg| {
            CliError::Usage(format!("config file {}: {msg}", path.display()))
        })
    }

    fn parse(text: &str) -> Result<FileConfig, String> {
        let mut out = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| format!("line {}: bad {what} `{value}`", lineno + 1);
            match key {
                "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "trees" => out.trees = Some(value.parse().map_err(|_| bad("trees"))?),
                "min_node_size" => {
                    out.min_node_size = Some(value.parse().map_err(|_| bad("min_node_size"))?)
                }
                "mtry" => out.mtry = Some(value.parse().map_err(|_| bad("mtry"))?),
                "max_depth" => {
                    out.max_depth = Some(value.parse().map_err(|_| bad("max_depth"))?)
                }
                "test_fraction" => {
                    out.test_fraction =
                        Some(value.parse().map_err(|_| bad("test_fraction"))?)
                }
                "threads" => out.threads = Some(value.parse().map_err(|_| bad("threads"))?),
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(out)
    }
}

/// Forest flags shared by `fit`, `evaluate`, and `bench`.
#[derive(Debug, Clone, clap::Args)]
pub struct ForestFlags {
    /// Number of trees (default 2000).
    #[arg(long)]
    pub trees: Option<usize>,

    /// Nodes with at most this many rows become leaves (default 5).
    #[arg(long = "min-node")]
    pub min_node: Option<usize>,

    /// Split candidates drawn per node (default ⌊√M⌋).
    #[arg(long)]
    pub mtry: Option<usize>,

    /// Depth cap (default unlimited).
    #[arg(long = "max-depth")]
    pub max_depth: Option<usize>,
}

/// Resolve the forest configuration from flags, config file, defaults.
pub fn resolve_forest_config(
    flags: &ForestFlags,
    file: &FileConfig,
    seed: u64,
) -> ForestConfig {
    let defaults = ForestConfig::default();
    ForestConfig {
        n_trees: flags.trees.or(file.trees).unwrap_or(defaults.n_trees),
        min_node_size: flags
            .min_node
            .or(file.min_node_size)
            .unwrap_or(defaults.min_node_size),
        mtry: flags.mtry.or(file.mtry),
        seed,
        max_depth: flags.max_depth.or(file.max_depth),
    }
}

pub fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> u64 {
    flag.or(file.seed).unwrap_or(0)
}

pub fn resolve_test_fraction(flag: Option<f64>, file: &FileConfig, default: f64) -> f64 {
    flag.or(file.test_fraction).unwrap_or(default)
}

/// Load `--schema` when given (a missing or malformed schema file is a
/// usage error), else the canonical default.
pub fn resolve_schema(path: &Option<PathBuf>) -> Result<Schema, CliError> {
    match path {
        None => Ok(Schema::default()),
        Some(p) => {
            if !p.exists() {
                return Err(CliError::Usage(format!(
                    "schema file {} does not exist",
                    p.display()
                )));
            }
            Schema::load(p).map_err(|e| CliError::Usage(format!("schema: {e}")))
        }
    }
}

/// Stream tags for deriving per-purpose sub-seeds from `--seed`.
pub mod seed_tags {
    pub const SPLIT: u64 = 1;
    pub const FOREST: u64 = 2;
    pub const BENCH_DATA: u64 = 3;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_config_file() {
        let cfg = FileConfig::parse("# comment\ntrees = 100\nseed=7\ntest_fraction = 0.2\n")
            .unwrap();
        assert_eq!(cfg.trees, Some(100));
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.test_fraction, Some(0.2));
        assert_eq!(cfg.mtry, None);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(FileConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn unset_everything_resolves_to_the_published_defaults() {
        let flags = ForestFlags {
            trees: None,
            min_node: None,
            mtry: None,
            max_depth: None,
        };
        let cfg = resolve_forest_config(&flags, &FileConfig::default(), 0);
        assert_eq!(cfg.n_trees, 2000);
        assert_eq!(cfg.min_node_size, 5);
        assert_eq!(cfg.mtry, None); // ⌊√M⌋ at train time
        assert_eq!(cfg.max_depth, None);
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let file = FileConfig {
            trees: Some(100),
            min_node_size: Some(9),
            ..FileConfig::default()
        };
        let flags = ForestFlags {
            trees: Some(50),
            min_node: None,
            mtry: None,
            max_depth: None,
        };
        let cfg = resolve_forest_config(&flags, &file, 3);
        assert_eq!(cfg.n_trees, 50); // flag wins
        assert_eq!(cfg.min_node_size, 9); // file wins
        assert_eq!(cfg.mtry, None); // default
        assert_eq!(cfg.seed, 3);
    }
}
