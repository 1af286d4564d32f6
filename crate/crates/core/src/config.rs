//! TOML description of a [`SystemSpec`].
//!
//! ```toml
//! bandwidth = 100e3   # Hz
//! n0 = 1e-6           # W/Hz
//! tc = 1e-3           # s
//! eps = 1e-3          # dB
//!
//! [[pairs]]
//! gain = 1.0          # mean channel power gain Z
//! users = [
//!   { theta = 0.01, mu = 0.1, p_max = 5.0, weight = 0.5, video = "Bus", q_min = 20.0 },
//!   { theta = 0.01, mu = 0.1, p_max = 5.0, weight = 0.5, a = 3.5261, b = 13.8425, q_min = 20.0 },
//! ]
//! ```
//!
//! Each user names a video preset or gives the coefficients `a`, `b`
//! directly. `q_min = -inf` removes the floor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ec::{ChannelModel, LogBase};
use crate::error::{Error, Result};
use crate::fd::{PairSpec, SystemSpec, UserSpec};
use crate::quality::QualityModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub bandwidth: f64,
    pub n0: f64,
    pub tc: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// `"two"` (default) or `"natural"`: base of the logarithm in the
    /// instantaneous rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_base: Option<String>,
    pub pairs: Vec<PairConfig>,
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_order: Option<usize>,
    pub users: [UserConfig; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub theta: f64,
    pub mu: f64,
    pub p_max: f64,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub q_min: f64,
}

impl UserConfig {
    fn quality(&self) -> Result<QualityModel> {
        match (&self.video, self.a, self.b) {
            (Some(name), None, None) => QualityModel::preset(name, self.q_min),
            (None, Some(a), Some(b)) => QualityModel::new(a, b, self.q_min),
            _ => Err(Error::Config("each user needs either `video` or both `a` and `b`".into())),
        }
    }
}

impl SpecConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds and validates the spec.
    pub fn build(&self) -> Result<SystemSpec> {
        let log_base = match self.log_base.as_deref() {
            None | Some("two") => LogBase::Two,
            Some("natural") => LogBase::Natural,
            Some(other) => return Err(Error::Config(format!("unknown log_base {other:?}"))),
        };
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for p in &self.pairs {
            let [u1, u2] = [0, 1].map(|i| {
                let u = &p.users[i];
                UserSpec::new(u.theta, u.mu, u.p_max, u.weight, u.quality()?)
            });
            let channel = match p.quadrature_order {
                Some(order) => ChannelModel::exponential(p.gain, order)?,
                None => ChannelModel::rayleigh(p.gain)?,
            };
            pairs.push(PairSpec::new(u1?, u2?, channel));
        }
        let spec = SystemSpec::new(pairs, self.bandwidth, self.n0, self.tc)?
            .with_eps(self.eps)
            .with_log_base(log_base);
        spec.validate()?;
        Ok(spec)
    }
}
