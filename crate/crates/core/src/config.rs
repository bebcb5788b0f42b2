//! Tunable parameters shared by the simulator and the three strategies.

use thiserror::Error;

use crate::episodic::{EpisodicConfig, DEFAULT_CAPACITY, DEFAULT_DELTA_AMB};
use crate::global::{FormWeights, GlobalConfig, DEFAULT_DELTA_PLURAL};
use crate::kb::DEFAULT_HERE_RADIUS;
use crate::refexp::SurfaceForm;
use crate::world::SalienceWeights;

pub const DEFAULT_FPS: u32 = 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("expected KEY=VALUE, got `{0}`")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub fps: u32,
    pub capacity: usize,
    /// Defaults to `capacity` when unset.
    pub discourse_capacity: Option<usize>,
    pub delta_amb: f64,
    pub delta_plural: f64,
    pub form_weights: FormWeights,
    pub salience: SalienceWeights,
    pub fov: f64,
    pub range: f64,
    pub here_radius: f64,
    pub prune_below: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            fps: DEFAULT_FPS,
            capacity: DEFAULT_CAPACITY,
            discourse_capacity: None,
            delta_amb: DEFAULT_DELTA_AMB,
            delta_plural: DEFAULT_DELTA_PLURAL,
            form_weights: FormWeights::default(),
            salience: SalienceWeights::default(),
            fov: std::f64::consts::FRAC_PI_2,
            range: 50.0,
            here_radius: DEFAULT_HERE_RADIUS,
            prune_below: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "fps",
    "capacity",
    "discourse_capacity",
    "delta_amb",
    "delta_plural",
    "w_definite",
    "w_indefinite",
    "w_pronoun",
    "w_demonstrative",
    "w_one",
    "w_other",
    "w_size",
    "w_centre",
    "fov",
    "range",
    "here_radius",
    "prune_below",
];

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|e| bad(key, value, e))?;
    if !v.is_finite() {
        return Err(bad(key, value, "not finite"));
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = number(key, value)?;
    if v <= 0.0 {
        return Err(bad(key, value, "must be positive"));
    }
    Ok(v)
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = number(key, value)?;
    if v < 0.0 {
        return Err(bad(key, value, "must be non-negative"));
    }
    Ok(v)
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    match value.parse::<usize>() {
        Ok(0) => Err(bad(key, value, "must be positive")),
        Ok(n) => Ok(n),
        Err(e) => Err(bad(key, value, e)),
    }
}

fn pair(key: &str, value: &str) -> Result<(f64, f64), ConfigError> {
    let (a, b) = value
        .split_once(',')
        .ok_or_else(|| bad(key, value, "expected VISUAL,LINGUISTIC"))?;
    Ok((number(key, a)?, number(key, b)?))
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let form = match key {
            "w_definite" => Some(SurfaceForm::Definite),
            "w_indefinite" => Some(SurfaceForm::Indefinite),
            "w_pronoun" => Some(SurfaceForm::Pronoun),
            "w_demonstrative" => Some(SurfaceForm::Demonstrative),
            "w_one" => Some(SurfaceForm::OneAnaphora),
            "w_other" => Some(SurfaceForm::OtherAnaphora),
            _ => None,
        };
        if let Some(form) = form {
            let (v, l) = pair(key, value)?;
            return self.form_weights.set(form, v, l).map_err(|e| bad(key, value, e));
        }
        match key {
            "fps" => {
                self.fps = match value.parse::<u32>() {
                    Ok(0) => return Err(bad(key, value, "must be positive")),
                    Ok(n) => n,
                    Err(e) => return Err(bad(key, value, e)),
                }
            }
            "capacity" => self.capacity = count(key, value)?,
            "discourse_capacity" => self.discourse_capacity = Some(count(key, value)?),
            "delta_amb" => self.delta_amb = non_negative(key, value)?,
            "delta_plural" => self.delta_plural = non_negative(key, value)?,
            "w_size" | "w_centre" => {
                let v = non_negative(key, value)?;
                let (size, centre) = if key == "w_size" {
                    (v, self.salience.centre)
                } else {
                    (self.salience.size, v)
                };
                // a zero sum is allowed transiently while both weights are being set
                self.salience = SalienceWeights { size, centre };
            }
            "fov" => {
                let v = positive(key, value)?;
                if v > std::f64::consts::PI {
                    return Err(bad(key, value, "must not exceed pi"));
                }
                self.fov = v;
            }
            "range" => self.range = positive(key, value)?,
            "here_radius" => self.here_radius = positive(key, value)?,
            "prune_below" => self.prune_below = Some(positive(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` assignment.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Malformed(assignment.to_string()))?;
        self.set(k.trim(), v.trim())
    }

    /// Checks cross-field constraints that single assignments cannot.
    pub fn validate(&self) -> Result<(), ConfigError> {
        SalienceWeights::new(self.salience.size, self.salience.centre)
            .map(|_| ())
            .map_err(|e| {
                bad(
                    "w_size/w_centre",
                    &format!("{},{}", self.salience.size, self.salience.centre),
                    e,
                )
            })
    }

    pub fn episodic(&self) -> EpisodicConfig {
        EpisodicConfig {
            capacity: self.capacity,
            discourse_capacity: self.discourse_capacity.unwrap_or(self.capacity),
            delta_amb: self.delta_amb,
        }
    }

    pub fn global(&self) -> GlobalConfig {
        GlobalConfig {
            weights: self.form_weights,
            delta_amb: self.delta_amb,
            delta_plural: self.delta_plural,
            prune_below: self.prune_below,
        }
    }
}
