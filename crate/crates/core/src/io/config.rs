//! Run configuration, read from TOML.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! inputs = ["transcripts/joel"]
//! output_dir = "out"
//! child_speaker = "CHI"
//! mother_speaker = "MOT"
//! exclusion_markers = ["[+ imit]", "[+ I]", "[+ SR]", "[+ R]", "[+ rout]", "[+ PI]"]
//! unintelligible = ["xxx", "yyy", "www"]
//! punctuation = [".", "?", "!", ","]
//! mlu_ranges = ["[1,1.5]", "(1.5,2]", "(2,2.5]", "(2.5,3]", "(3,3.5]"]
//! window_size = 5
//! split_threshold = 10          # defaults to 2 * window_size
//! window_placement = "start"    # start | center | end
//! smoothing = 1                 # pooled moving-MLU width, 1 = off
//! self_loops = true
//! k = 10
//! hits_tolerance = 1e-10
//! hits_max_iterations = 1000
//! shift_words = ["a", "the"]
//! stage_plans = []              # pinned stage_plan.tsv files, matched by child
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::builder::BuildOptions;
use crate::centrality::HitsOptions;
use crate::corpus::{default_exclusion_markers, IngestConfig};
use crate::error::{Error, Result};
use crate::stages::{default_ranges, validate_ranges, MluRange, Placement, PlanOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub child_speaker: String,
    pub mother_speaker: String,
    pub exclusion_markers: Vec<String>,
    pub unintelligible: Vec<String>,
    pub punctuation: Vec<String>,
    pub mlu_ranges: Vec<MluRange>,
    pub window_size: usize,
    pub split_threshold: Option<usize>,
    pub window_placement: Placement,
    pub smoothing: usize,
    pub self_loops: bool,
    pub k: usize,
    pub hits_tolerance: f64,
    pub hits_max_iterations: usize,
    pub shift_words: Vec<String>,
    pub stage_plans: Vec<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ingest = IngestConfig::default();
        Self {
            inputs: Vec::new(),
            output_dir: PathBuf::from("lexnet-out"),
            child_speaker: "CHI".into(),
            mother_speaker: "MOT".into(),
            exclusion_markers: default_exclusion_markers(),
            unintelligible: ingest.unintelligible,
            punctuation: ingest.punctuation,
            mlu_ranges: default_ranges(),
            window_size: 5,
            split_threshold: None,
            window_placement: Placement::Start,
            smoothing: 1,
            self_loops: true,
            k: 10,
            hits_tolerance: 1e-10,
            hits_max_iterations: 1000,
            shift_words: vec!["a".into(), "the".into()],
            stage_plans: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file. Relative input, output and plan
    /// paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        if let Some(base) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            config.inputs.iter_mut().for_each(resolve);
            config.stage_plans.iter_mut().for_each(resolve);
            resolve(&mut config.output_dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        validate_ranges(&self.mlu_ranges)?;
        if self.window_size == 0 {
            return Err(Error::Config("window_size must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.hits_tolerance.is_nan() || self.hits_tolerance <= 0.0 {
            return Err(Error::Config("hits_tolerance must be positive".into()));
        }
        if self.hits_max_iterations == 0 {
            return Err(Error::Config("hits_max_iterations must be at least 1".into()));
        }
        if self.child_speaker.is_empty() || self.mother_speaker.is_empty() {
            return Err(Error::Config("speaker codes must not be empty".into()));
        }
        if self.child_speaker == self.mother_speaker {
            return Err(Error::Config("child and mother speaker codes must differ".into()));
        }
        self.plan_options().validate()
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            speakers: vec![self.mother_speaker.clone(), self.child_speaker.clone()],
            exclusion_markers: self.exclusion_markers.clone(),
            unintelligible: self.unintelligible.clone(),
            punctuation: self.punctuation.clone(),
        }
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            ranges: self.mlu_ranges.clone(),
            window_size: self.window_size,
            split_threshold: self.split_threshold.unwrap_or(2 * self.window_size),
            placement: self.window_placement,
            smoothing: self.smoothing,
        }
    }

    pub fn hits_options(&self) -> HitsOptions {
        HitsOptions {
            tolerance: self.hits_tolerance,
            max_iterations: self.hits_max_iterations,
        }
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            self_loops: self.self_loops,
        }
    }
}
