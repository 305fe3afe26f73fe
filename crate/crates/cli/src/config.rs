//! Run configuration: defaults, then a `key = value` file, then flags.

use std::fs;
use std::path::Path;

use heightlab::height_machine::EnvelopeConfig;
use heightlab::manin::MdConfig;
use heightlab::{Error, Precision, Result};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub precision: u32,
    pub factor_bound: u64,
    pub denominator_bound: u32,
    pub additivity_envelope: f64,
    pub growth_limit: f64,
    pub ratio_window: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let env = EnvelopeConfig::default();
        Config {
            precision: 50,
            factor_bound: 1_000_000,
            denominator_bound: 24,
            additivity_envelope: env.additivity,
            growth_limit: env.growth,
            ratio_window: MdConfig::default().ratio_window,
            seed: DEFAULT_SEED,
        }
    }
}

fn bad(key: &str, value: &str, line: usize) -> Error {
    Error::Parse(format!("config line {line}: bad value {value:?} for {key}"))
}

impl Config {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            let n = i + 1;
            match key {
                "precision" => c.precision = value.parse().map_err(|_| bad(key, value, n))?,
                "factor_bound" => c.factor_bound = value.parse().map_err(|_| bad(key, value, n))?,
                "denominator_bound" => c.denominator_bound = value.parse().map_err(|_| bad(key, value, n))?,
                "additivity_envelope" => c.additivity_envelope = value.parse().map_err(|_| bad(key, value, n))?,
                "growth_limit" => c.growth_limit = value.parse().map_err(|_| bad(key, value, n))?,
                "ratio_window" => c.ratio_window = value.parse().map_err(|_| bad(key, value, n))?,
                "seed" => c.seed = value.parse().map_err(|_| bad(key, value, n))?,
                _ => return Err(Error::Parse(format!("config line {n}: unknown key {key:?}"))),
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision < 10 {
            return Err(Error::Input(format!("precision must be at least 10, got {}", self.precision)));
        }
        if self.factor_bound < 2 || self.denominator_bound == 0 {
            return Err(Error::Input("bounds must be positive".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.additivity_envelope) || !positive(self.growth_limit) || !positive(self.ratio_window) {
            return Err(Error::Input("envelope thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn prec(&self) -> Precision {
        Precision(self.precision)
    }

    pub fn envelope(&self) -> EnvelopeConfig {
        EnvelopeConfig { additivity: self.additivity_envelope, growth: self.growth_limit }
    }

    pub fn md(&self) -> MdConfig {
        MdConfig { ratio_window: self.ratio_window }
    }
}
