//! Flat key=value configuration with dotted keys. Precedence is
//! built-in defaults < config file < command-line flags; unknown keys are
//! rejected.

use std::fs;
use std::path::{Path, PathBuf};

use crate::alignment_filter::Thresholds;
use crate::codec::GenderTokenScheme;
use crate::error::{Error, Result};

/// All recognized keys with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub filter: Thresholds,
    /// Path to a serialized decision tree; when set, tree mode wins over
    /// thresholds.
    pub filter_tree: Option<PathBuf>,
    pub lex_doubly_transitive: Option<PathBuf>,
    pub lex_incomplete_verbs: Option<PathBuf>,
    pub lex_call_particles: Option<PathBuf>,
    pub tokens: GenderTokenScheme,
    pub trigger_patterns: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            filter: Thresholds::default(),
            filter_tree: None,
            lex_doubly_transitive: None,
            lex_incomplete_verbs: None,
            lex_call_particles: None,
            tokens: GenderTokenScheme::default(),
            trigger_patterns: None,
        }
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected key=value"))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|msg| Error::parse(path, idx + 1, msg))?;
        }
        config.tokens.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let real = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("expected a number for `{key}`, got `{v}`"))
        };
        match key {
            "filter.min_score" => self.filter.min_score = real(value)?,
            "filter.max_unaligned" => self.filter.max_unaligned = real(value)?,
            "filter.min_one_to_one" => self.filter.min_one_to_one = real(value)?,
            "filter.tree" => self.filter_tree = Some(PathBuf::from(value)),
            "lex.doubly_transitive" => self.lex_doubly_transitive = Some(PathBuf::from(value)),
            "lex.incomplete_verbs" => self.lex_incomplete_verbs = Some(PathBuf::from(value)),
            "lex.call_particles" => self.lex_call_particles = Some(PathBuf::from(value)),
            "tokens.speaker_m" => self.tokens.speaker_m = value.to_string(),
            "tokens.speaker_f" => self.tokens.speaker_f = value.to_string(),
            "tokens.listener_m" => self.tokens.listener_m = value.to_string(),
            "tokens.listener_f" => self.tokens.listener_f = value.to_string(),
            "trigger.patterns" => self.trigger_patterns = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown configuration key `{key}`")),
        }
        Ok(())
    }
}
