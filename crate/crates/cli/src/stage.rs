//! Stage-tagged errors: every failure exits with a code identifying the
//! pipeline stage that produced it.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Config,
    Sim,
    Preprocess,
    Detect,
    Track,
    Stats,
    Render,
    Baseline,
    Metrics,
    Save,
}

impl Stage {
    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Load => 10,
            Stage::Config => 11,
            Stage::Sim => 12,
            Stage::Preprocess => 13,
            Stage::Detect => 14,
            Stage::Track => 15,
            Stage::Stats => 16,
            Stage::Render => 17,
            Stage::Baseline => 18,
            Stage::Metrics => 19,
            Stage::Save => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Load => "load",
            Stage::Config => "config",
            Stage::Sim => "sim",
            Stage::Preprocess => "preprocess",
            Stage::Detect => "detect",
            Stage::Track => "track",
            Stage::Stats => "stats",
            Stage::Render => "render",
            Stage::Baseline => "baseline",
            Stage::Metrics => "metrics",
            Stage::Save => "save",
        }
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:#}", self.stage.name(), self.source)
    }
}

impl std::error::Error for StageError {}

/// Extension to tag any fallible step with its stage.
pub trait StageContext<T> {
    fn stage(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> StageContext<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}
