//! Logarithmic PSNR–rate model `Q = a·ln(R) + b` with `R` in kbit/s.
//!
//! Effective capacities elsewhere in the crate are in bit/s. The
//! conversion happens only here: [`QualityModel::psnr_bps`] divides by 1000
//! and [`v_min`] carries the matching factor.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of one video sequence plus its quality floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityModel {
    /// dB per unit of ln(kbit/s).
    pub a: f64,
    /// dB at 1 kbit/s.
    pub b: f64,
    /// Minimum acceptable PSNR in dB. May be `-inf` for "no floor".
    pub q_min: f64,
}

impl QualityModel {
    pub fn new(a: f64, b: f64, q_min: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!("slope a must be positive, got {a}")));
        }
        if !b.is_finite() {
            return Err(Error::Domain(format!("offset b must be finite, got {b}")));
        }
        if q_min.is_nan() || q_min == f64::INFINITY {
            return Err(Error::Domain(format!("q_min must be finite or -inf, got {q_min}")));
        }
        Ok(Self { a, b, q_min })
    }

    /// Model of a named preset sequence (case-insensitive).
    pub fn preset(name: &str, q_min: f64) -> Result<Self> {
        let p = preset(name).ok_or_else(|| Error::Config(format!("unknown video preset {name:?}")))?;
        Self::new(p.a, p.b, q_min)
    }

    /// PSNR for an effective capacity given in bit/s. Zero rate maps to
    /// `-inf`.
    pub fn psnr_bps(&self, rate_bps: f64) -> f64 {
        self.a * (rate_bps / 1000.0).ln() + self.b
    }
}

/// `a·ln(rate_kbps) + b`.
pub fn psnr(rate_kbps: f64, model: &QualityModel) -> Result<f64> {
    if !(rate_kbps > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate_kbps}")));
    }
    Ok(model.a * rate_kbps.ln() + model.b)
}

/// Rate in kbit/s needed for `q_db`.
pub fn rate_for_psnr(q_db: f64, model: &QualityModel) -> f64 {
    ((q_db - model.b) / model.a).exp()
}

/// Kernel value a link needs to reach the model's quality floor,
/// `exp(θ·Tc·1000·rate_for_psnr(q_min))`.
pub fn v_min(model: &QualityModel, theta: f64, tc: f64) -> Result<f64> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    if !(tc.is_finite() && tc > 0.0) {
        return Err(Error::Domain(format!("tc must be positive, got {tc}")));
    }
    Ok((theta * tc * 1000.0 * rate_for_psnr(model.q_min, model)).exp())
}

/// Ordinary least squares of PSNR against ln(rate). Returns `(a, b)`.
pub fn fit_log_model(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("need at least two samples".into()));
    }
    if let Some(&(r, _)) = samples.iter().find(|(r, _)| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Domain(format!("rates must be positive, got {r}")));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|(r, _)| r.ln()).sum::<f64>() / n;
    let my = samples.iter().map(|(_, q)| q).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(r, q) in samples {
        let dx = r.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (q - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all sample rates are equal".into()));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

/// Coefficients of a shipped video sequence.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct VideoPreset {
    pub a: f64,
    pub b: f64,
}

fn table() -> &'static BTreeMap<String, VideoPreset> {
    static TABLE: OnceLock<BTreeMap<String, VideoPreset>> = OnceLock::new();
    TABLE.get_or_init(|| {
        toml::from_str(include_str!("../data/videos.toml")).expect("bundled preset table parses")
    })
}

/// Looks up a preset by name, ignoring case.
pub fn preset(name: &str) -> Option<VideoPreset> {
    table()
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(name))
        .map(|(_, v)| *v)
}

/// Names of all shipped presets, sorted.
pub fn preset_names() -> impl Iterator<Item = &'static str> {
    table().keys().map(String::as_str)
}
