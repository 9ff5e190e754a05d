//! Simulation parameters and their `key=value` text form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::snn::HyperParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// Updates collect in per-edge accumulators and land after the backward window.
    #[default]
    Accumulated,
    /// Every error spike changes the weight it crosses immediately.
    PerEvent,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::Accumulated => "accumulated",
            UpdateMode::PerEvent => "per_event",
        })
    }
}

impl FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accumulated" => Ok(UpdateMode::Accumulated),
            "per_event" => Ok(UpdateMode::PerEvent),
            other => Err(Error::Config(format!("unknown update_mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub theta_ff: f64,
    pub theta_bp: f64,
    pub eta: f64,
    pub r_max: f64,
    pub t_expl: usize,
    pub t_bp: usize,
    pub dt: f64,
    pub n_train: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
    pub n_h: usize,
    pub seed: u64,
    pub decay_factor: f64,
    pub decay_interval: usize,
    pub update_mode: UpdateMode,
    pub settle_steps: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            theta_ff: 1.0,
            theta_bp: 1.0,
            eta: 0.00005,
            r_max: 0.12,
            t_expl: 100,
            t_bp: 10,
            dt: 1.0,
            n_train: 10000,
            n_x: 100,
            n_y: 100,
            n_z: 100,
            n_a: 256,
            n_b: 256,
            n_c: 256,
            n_h: 128,
            seed: 1,
            decay_factor: 0.97,
            decay_interval: 1000,
            update_mode: UpdateMode::Accumulated,
            settle_steps: 0,
        }
    }
}

/// Field names in serialization order.
pub const CONFIG_KEYS: [&str; 20] = [
    "theta_ff",
    "theta_bp",
    "eta",
    "r_max",
    "t_expl",
    "t_bp",
    "dt",
    "n_train",
    "n_x",
    "n_y",
    "n_z",
    "n_a",
    "n_b",
    "n_c",
    "n_h",
    "seed",
    "decay_factor",
    "decay_interval",
    "update_mode",
    "settle_steps",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for `{key}`")))
}

impl SimulationConfig {
    /// Table I parameters with 100-neuron IO populations.
    pub fn addition() -> Self {
        Self::default()
    }

    /// Table I parameters with 784-neuron IO populations (28×28 pixels).
    pub fn xor() -> Self {
        Self { n_x: 784, n_y: 784, n_z: 784, ..Self::default() }
    }

    /// Population sizes in the order X, Y, Z, A, B, C, H.
    pub fn sizes(&self) -> [usize; 7] {
        [self.n_x, self.n_y, self.n_z, self.n_a, self.n_b, self.n_c, self.n_h]
    }

    pub fn set_sizes(&mut self, sizes: [usize; 7]) {
        [self.n_x, self.n_y, self.n_z, self.n_a, self.n_b, self.n_c, self.n_h] = sizes;
    }

    pub fn hyper_params(&self) -> Result<HyperParams> {
        HyperParams::new(self.theta_ff, self.theta_bp, self.eta, self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("theta_ff", self.theta_ff),
            ("theta_bp", self.theta_bp),
            ("eta", self.eta),
            ("r_max", self.r_max),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.t_expl == 0 || self.t_bp == 0 {
            return Err(Error::Config("t_expl and t_bp must be at least 1".into()));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::Config(format!("decay_factor must lie in (0, 1], got {}", self.decay_factor)));
        }
        if self.decay_interval == 0 {
            return Err(Error::Config("decay_interval must be positive".into()));
        }
        if self.sizes().contains(&0) {
            return Err(Error::Config("population sizes must be positive".into()));
        }
        Ok(())
    }

    /// Sets one field from its text form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "theta_ff" => self.theta_ff = parse(key, value)?,
            "theta_bp" => self.theta_bp = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "r_max" => self.r_max = parse(key, value)?,
            "t_expl" => self.t_expl = parse(key, value)?,
            "t_bp" => self.t_bp = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "n_train" => self.n_train = parse(key, value)?,
            "n_x" => self.n_x = parse(key, value)?,
            "n_y" => self.n_y = parse(key, value)?,
            "n_z" => self.n_z = parse(key, value)?,
            "n_a" => self.n_a = parse(key, value)?,
            "n_b" => self.n_b = parse(key, value)?,
            "n_c" => self.n_c = parse(key, value)?,
            "n_h" => self.n_h = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "decay_factor" => self.decay_factor = parse(key, value)?,
            "decay_interval" => self.decay_interval = parse(key, value)?,
            "update_mode" => self.update_mode = value.trim().parse()?,
            "settle_steps" => self.settle_steps = parse(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "theta_ff" => self.theta_ff.to_string(),
            "theta_bp" => self.theta_bp.to_string(),
            "eta" => self.eta.to_string(),
            "r_max" => self.r_max.to_string(),
            "t_expl" => self.t_expl.to_string(),
            "t_bp" => self.t_bp.to_string(),
            "dt" => self.dt.to_string(),
            "n_train" => self.n_train.to_string(),
            "n_x" => self.n_x.to_string(),
            "n_y" => self.n_y.to_string(),
            "n_z" => self.n_z.to_string(),
            "n_a" => self.n_a.to_string(),
            "n_b" => self.n_b.to_string(),
            "n_c" => self.n_c.to_string(),
            "n_h" => self.n_h.to_string(),
            "seed" => self.seed.to_string(),
            "decay_factor" => self.decay_factor.to_string(),
            "decay_interval" => self.decay_interval.to_string(),
            "update_mode" => self.update_mode.to_string(),
            "settle_steps" => self.settle_steps.to_string(),
            _ => unreachable!("CONFIG_KEYS is exhaustive"),
        }
    }

    /// One `key=value` line per field, in [`CONFIG_KEYS`] order. Floats use
    /// the shortest representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k}={}\n", self.value_of(k)))
            .collect()
    }
}
