//! Model parameters and the operating point the process is centered on.
//!
//! The customer arrival rate is `lambda * r`, where `r` is the scaling
//! parameter of the system family. All other parameters are per-unit rates
//! and probabilities that do not depend on `r`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;

/// Full parameter vector of the invitation system.
///
/// Rates are per unit of simulated time. `gamma` and `epsilon` are the
/// feedback gains of the invitation scheme: `gamma` reacts to queue-length
/// *changes*, `epsilon` to the queue-length *level*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Per-unit-scale customer arrival rate; the actual arrival rate is `lambda * r`.
    pub lambda: f64,
    /// Scaling parameter (number of "units"); integer so it indexes a family, not a continuum.
    pub r: u64,
    /// Probability that an agent rejoins the agent queue after a service completion.
    pub alpha: f64,
    /// Invitation-acceptance rate (mean response delay `1/beta`).
    pub beta: f64,
    /// Service rate (mean service time `1/mu`).
    pub mu: f64,
    /// Customer abandonment rate (0 = infinitely patient customers).
    pub delta: f64,
    /// Agent abandonment rate (0 = infinitely patient agents).
    pub theta: f64,
    /// Feedback gain on queue-length changes.
    pub gamma: f64,
    /// Feedback gain on the queue-length level.
    pub epsilon: f64,
}

/// The nine recognized parameter keys, in declaration order.
pub const PARAM_KEYS: [&str; 9] = [
    "lambda", "r", "alpha", "beta", "mu", "delta", "theta", "gamma", "epsilon",
];

impl ModelParams {
    /// Checks every parameter constraint, reporting the first violation by name.
    pub fn validate(&self) -> Result<(), Error> {
        if !self.lambda.is_finite() {
            return Err(Error::NotFinite("lambda"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::NotPositive("lambda"));
        }
        if self.r < 1 {
            return Err(Error::ScaleTooSmall);
        }
        if !self.alpha.is_finite() || !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::AlphaOutOfRange);
        }
        for (name, value) in [("beta", self.beta), ("mu", self.mu)] {
            if !value.is_finite() {
                return Err(Error::NotFinite(name));
            }
            if value <= 0.0 {
                return Err(Error::NotPositive(name));
            }
        }
        for (name, value) in [("delta", self.delta), ("theta", self.theta)] {
            if !value.is_finite() {
                return Err(Error::NotFinite(name));
            }
            if value < 0.0 {
                return Err(Error::NegativeValue(name));
            }
        }
        for (name, value) in [("gamma", self.gamma), ("epsilon", self.epsilon)] {
            if !value.is_finite() {
                return Err(Error::NotFinite(name));
            }
            if value <= 0.0 {
                return Err(Error::NotPositive(name));
            }
        }
        Ok(())
    }

    /// Validates and returns the parameters unchanged.
    pub fn validated(self) -> Result<Self, Error> {
        self.validate()?;
        Ok(self)
    }

    /// Scaling parameter as a float.
    pub fn scale(&self) -> f64 {
        self.r as f64
    }

    /// Actual customer arrival rate `lambda * r`.
    pub fn arrival_rate(&self) -> f64 {
        self.lambda * self.scale()
    }

    /// Lower bound of the centered pending-agent coordinate, the image of
    /// "zero pending agents": `-lambda * (1 - alpha) / beta`.
    pub fn centered_floor(&self) -> f64 {
        -self.lambda * (1.0 - self.alpha) / self.beta
    }

    /// The target center of the raw process.
    pub fn operating_point(&self) -> OperatingPoint {
        OperatingPoint {
            pending: self.arrival_rate() * (1.0 - self.alpha) / self.beta,
            queue_diff: 0.0,
            in_service: self.arrival_rate() / self.mu,
        }
    }

    /// Parses a line-oriented `key = value` parameter file.
    ///
    /// Exactly the nine keys in [`PARAM_KEYS`] must appear, each once.
    /// Blank lines and lines starting with `#` are ignored. The result is
    /// validated before being returned.
    pub fn from_key_values(text: &str) -> Result<Self, Error> {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::MalformedParamLine(line.to_string()))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !PARAM_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownParamKey(key));
            }
            if seen.insert(key.clone(), value).is_some() {
                return Err(Error::DuplicateParamKey(key));
            }
        }
        Self::from_pairs(seen.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Assembles parameters from `(key, value)` pairs; all nine keys required.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, Error> {
        // Placeholder values; every field must be overwritten below.
        let mut params = ModelParams {
            lambda: f64::NAN,
            r: 0,
            alpha: f64::NAN,
            beta: f64::NAN,
            mu: f64::NAN,
            delta: f64::NAN,
            theta: f64::NAN,
            gamma: f64::NAN,
            epsilon: f64::NAN,
        };
        let mut present = [false; PARAM_KEYS.len()];
        for (key, value) in pairs {
            let idx = PARAM_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::UnknownParamKey(key.to_string()))?;
            if present[idx] {
                return Err(Error::DuplicateParamKey(key.to_string()));
            }
            present[idx] = true;
            params.set(key, value)?;
        }
        for (idx, key) in PARAM_KEYS.iter().enumerate() {
            if !present[idx] {
                return Err(Error::MissingParamKey(key));
            }
        }
        params.validated()
    }

    /// Sets one field from its textual value. Does not re-validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let invalid = || Error::InvalidParamValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        if key == "r" {
            self.r = value.trim().parse::<u64>().map_err(|_| invalid())?;
            return Ok(());
        }
        let parsed: f64 = value.trim().parse().map_err(|_| invalid())?;
        match key {
            "lambda" => self.lambda = parsed,
            "alpha" => self.alpha = parsed,
            "beta" => self.beta = parsed,
            "mu" => self.mu = parsed,
            "delta" => self.delta = parsed,
            "theta" => self.theta = parsed,
            "gamma" => self.gamma = parsed,
            "epsilon" => self.epsilon = parsed,
            other => return Err(Error::UnknownParamKey(other.to_string())),
        }
        Ok(())
    }

    /// Renders the parameters in the `key = value` file format.
    pub fn to_key_values(&self) -> String {
        format!(
            "lambda = {}\nr = {}\nalpha = {}\nbeta = {}\nmu = {}\ndelta = {}\ntheta = {}\ngamma = {}\nepsilon = {}\n",
            self.lambda,
            self.r,
            self.alpha,
            self.beta,
            self.mu,
            self.delta,
            self.theta,
            self.gamma,
            self.epsilon
        )
    }
}

/// Center of the raw process: the state the feedback scheme steers towards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// Pending-agent center `lambda * r * (1 - alpha) / beta`.
    pub pending: f64,
    /// Queue-difference center, always zero.
    pub queue_diff: f64,
    /// In-service center `lambda * r / mu`.
    pub in_service: f64,
}
