//! Experiment configuration files (TOML).
//!
//! ```toml
//! [dataset]
//! path = "SCADI.csv"          # relative to the config file
//! format = "csv"              # or "arff"
//! class_column = "Classes"    # name or zero-based index; default: last
//!
//! [protocol]
//! k = 10
//! repeats = 1
//! ttest_repeats = 10
//! seed = 42
//! alpha = 0.05
//!
//! [[models]]
//! name = "Random Forest"
//! algorithm = "rf"            # rf | svm | nb | ht | lwl
//! params = { n_trees = 100 }
//!
//! [selection]
//! max_runs = 100
//! p_value = 0.01
//! include_tentative = false
//!
//! [output]
//! directory = "results"
//! formats = ["json", "markdown"]
//! ```

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::boruta::BorutaConfig;
use crate::classifiers::{ForestParams, HoeffdingParams, LwlParams, ModelSpec, SmoParams};
use crate::dataset::{load_arff_with_class, load_csv, ClassColumn, CsvOptions, Dataset, DatasetError};
use crate::evaluation::{ModelEntry, Protocol, SelectionSettings};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Csv,
    Arff,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ClassColumnSpec {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    pub class_column: Option<ClassColumnSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rf,
    Svm,
    Nb,
    Ht,
    Lwl,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub algorithm: Algorithm,
    pub params: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub max_runs: usize,
    pub p_value: f64,
    /// Defaults to the protocol seed.
    pub seed: Option<u64>,
    pub include_tentative: bool,
    pub forest: ForestParams,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let b = BorutaConfig::default();
        Self {
            max_runs: b.max_runs,
            p_value: b.p_value,
            seed: None,
            include_tentative: false,
            forest: b.forest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("results"),
            formats: vec![OutputFormat::Json, OutputFormat::Markdown],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub protocol: Protocol,
    pub models: Vec<ModelConfig>,
    pub selection: Option<SelectionConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn params<T: serde::de::DeserializeOwned + Default>(
    index: usize,
    table: &Option<toml::Table>,
) -> Result<T, ConfigError> {
    match table {
        None => Ok(T::default()),
        Some(t) => toml::Value::Table(t.clone())
            .try_into()
            .map_err(|e: toml::de::Error| {
                ConfigError::invalid(format!("models[{index}].params"), e.message())
            }),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.models.is_empty() {
            return Err(ConfigError::invalid("models", "at least one model is required"));
        }
        let mut names = BTreeSet::new();
        for (i, m) in self.models.iter().enumerate() {
            if m.name.trim().is_empty() {
                return Err(ConfigError::invalid(
                    format!("models[{i}].name"),
                    "must not be empty",
                ));
            }
            if !names.insert(&m.name) {
                return Err(ConfigError::invalid(
                    format!("models[{i}].name"),
                    format!("duplicate name `{}`", m.name),
                ));
            }
        }
        self.model_entries()?;
        self.protocol
            .validate()
            .map_err(|e| ConfigError::invalid("protocol", e.to_string()))?;
        if let Some(s) = &self.selection {
            self.boruta_config(s)
                .validate()
                .map_err(|e| ConfigError::invalid("selection", e.to_string()))?;
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::invalid(
                "output.formats",
                "at least one format is required",
            ));
        }
        Ok(())
    }

    pub fn model_entries(&self) -> Result<Vec<ModelEntry>, ConfigError> {
        self.models
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let spec = match m.algorithm {
                    Algorithm::Rf => ModelSpec::RandomForest(params::<ForestParams>(i, &m.params)?),
                    Algorithm::Svm => ModelSpec::Svm(params::<SmoParams>(i, &m.params)?),
                    Algorithm::Ht => ModelSpec::HoeffdingTree(params::<HoeffdingParams>(i, &m.params)?),
                    Algorithm::Lwl => ModelSpec::Lwl(params::<LwlParams>(i, &m.params)?),
                    Algorithm::Nb => {
                        if m.params.as_ref().is_some_and(|t| !t.is_empty()) {
                            return Err(ConfigError::invalid(
                                format!("models[{i}].params"),
                                "naive Bayes takes no parameters",
                            ));
                        }
                        ModelSpec::NaiveBayes
                    }
                };
                Ok(ModelEntry::new(m.name.clone(), spec))
            })
            .collect()
    }

    fn boruta_config(&self, s: &SelectionConfig) -> BorutaConfig {
        BorutaConfig {
            max_runs: s.max_runs,
            p_value: s.p_value,
            forest: s.forest.clone(),
            seed: s.seed.unwrap_or(self.protocol.seed),
        }
    }

    pub fn selection_settings(&self) -> Option<SelectionSettings> {
        self.selection.as_ref().map(|s| SelectionSettings {
            boruta: self.boruta_config(s),
            include_tentative: s.include_tentative,
        })
    }

    /// Overrides the protocol seed and, unless set explicitly, the
    /// selection seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.protocol.seed = seed;
        if let Some(s) = &mut self.selection {
            s.seed = Some(seed);
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset, DatasetError> {
        let path = self.resolve(&self.dataset.path);
        let class = match &self.dataset.class_column {
            None => ClassColumn::Last,
            Some(ClassColumnSpec::Index(i)) => ClassColumn::Index(*i),
            Some(ClassColumnSpec::Name(n)) => ClassColumn::Name(n.clone()),
        };
        let reader = BufReader::new(File::open(&path)?);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        match self.dataset.format {
            DataFormat::Csv => load_csv(
                reader,
                &CsvOptions {
                    class_column: class,
                    name,
                    ..CsvOptions::default()
                },
            ),
            DataFormat::Arff => load_arff_with_class(reader, &class),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Neighbors;

    const MINIMAL: &str = r#"
[dataset]
path = "data.csv"

[[models]]
name = "nb"
algorithm = "nb"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.protocol, Protocol::default());
        assert_eq!(c.dataset.format, DataFormat::Csv);
        assert!(c.selection.is_none());
        assert_eq!(c.output.formats, vec![OutputFormat::Json, OutputFormat::Markdown]);
    }

    #[test]
    fn params_reach_the_models() {
        let text = format!(
            "{MINIMAL}\n[[models]]\nname = \"rf\"\nalgorithm = \"rf\"\nparams = {{ n_trees = 7, mtry = 2 }}\n\n[[models]]\nname = \"lwl\"\nalgorithm = \"lwl\"\nparams = {{ neighbors = 5 }}\n"
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        let entries = c.model_entries().unwrap();
        assert_eq!(
            entries[1].spec,
            ModelSpec::RandomForest(ForestParams {
                n_trees: 7,
                mtry: Some(2),
                ..Default::default()
            })
        );
        assert_eq!(
            entries[2].spec,
            ModelSpec::Lwl(LwlParams {
                neighbors: Neighbors::Count(5)
            })
        );
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse(
            &MINIMAL.replace("algorithm = \"nb\"", "algorithm = \"nb\"\nparams = { x = 1 }"),
        )
        .unwrap_err();
        assert!(e.to_string().contains("models[0].params"), "{e}");

        let e = ExperimentConfig::parse(&format!("{MINIMAL}\n[protocol]\nk = 1\n")).unwrap_err();
        assert!(e.to_string().contains("protocol"), "{e}");

        let e = ExperimentConfig::parse(&format!("{MINIMAL}\n[protocol]\nfolds = 3\n")).unwrap_err();
        assert!(e.to_string().contains("folds"), "{e}");

        let e = ExperimentConfig::parse("[[models]]\nname = \"a\"\nalgorithm = \"nb\"\n").unwrap_err();
        assert!(e.to_string().contains("dataset"), "{e}");

        let e = ExperimentConfig::parse(&format!(
            "{MINIMAL}\n[[models]]\nname = \"nb\"\nalgorithm = \"nb\"\n"
        ))
        .unwrap_err();
        assert!(e.to_string().contains("models[1].name"), "{e}");

        let e = ExperimentConfig::parse(&format!("{MINIMAL}\n[selection]\nmax_runs = 3\n")).unwrap_err();
        assert!(e.to_string().contains("selection"), "{e}");
    }

    #[test]
    fn seed_override_reaches_selection() {
        let mut c = ExperimentConfig::parse(&format!("{MINIMAL}\n[selection]\nseed = 5\n")).unwrap();
        assert_eq!(c.selection_settings().unwrap().boruta.seed, 5);
        c.override_seed(9);
        assert_eq!(c.protocol.seed, 9);
        assert_eq!(c.selection_settings().unwrap().boruta.seed, 9);
    }
}
