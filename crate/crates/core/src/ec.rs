//! Effective capacity of a full-duplex link over exponentially distributed
//! power gains.
//!
//! Everything here revolves around the kernel
//!
//! ```text
//! V(p_own, p_other, B) = 1 / E_γ[ exp(-θ·B·Tc·log₂(1 + p_own·γ / (N0·B + μ·p_other))) ]
//! ```
//!
//! whose natural log divided by `θ·Tc` is the effective capacity in bit/s.
//! `V ≥ 1`, with equality exactly when the link carries no power.
//!
//! With the instantaneous rate in bits, the expectation is the negative
//! moment `E[(1 + sγ)^{-m}]` with `s = p_own/(N0·B + μ·p_other)` and
//! `m = θ·B·Tc/ln 2`. At the exponents used in practice (`m` in the tens)
//! the integrand collapses onto a sliver near `γ = 0`, narrower than the
//! first Gauss–Laguerre node. The expectation is therefore evaluated after
//! the substitution `φ = x + m·ln(1 + a·x)` (`γ = Z·x`, `a = s·Z`), which
//! moves the whole decay into the Laguerre weight:
//!
//! ```text
//! E[(1 + aX)^{-m}] = ∫₀^∞ e^{-φ} · (1 + a·x(φ)) / (1 + a·x(φ) + m·a) dφ
//! ```
//!
//! The remaining factor is smooth and bounded in `(0, 1]`, so the fixed-node
//! rule is accurate to near machine precision across the whole range.

use std::f64::consts::LN_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility, Result};
use crate::quadrature::GaussLaguerre;
use crate::roots::{newton, Tolerance};

/// Default number of quadrature nodes for the fading expectation.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Logarithm used inside the instantaneous rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Rate in bits per channel use (`log₂`).
    #[default]
    Two,
    /// Rate in nats per channel use (`ln`).
    Natural,
}

/// QoS and radio constants for one direction of a full-duplex pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRadioParams {
    /// QoS exponent θ (1/bit).
    pub theta: f64,
    /// Self-interference suppression factor at the receiving user, applied
    /// to that user's own transmit power.
    pub mu_other: f64,
    /// Noise power spectral density (W/Hz).
    pub n0: f64,
    /// Coherence time (s).
    pub tc: f64,
    pub log_base: LogBase,
}

impl LinkRadioParams {
    pub fn new(theta: f64, mu_other: f64, n0: f64, tc: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(theta) {
            return Err(Error::Domain(format!("theta must be positive, got {theta}")));
        }
        if !(mu_other.is_finite() && (0.0..=1.0).contains(&mu_other)) {
            return Err(Error::Domain(format!(
                "suppression factor must lie in [0, 1], got {mu_other}"
            )));
        }
        if !ok(n0) {
            return Err(Error::Domain(format!("n0 must be positive, got {n0}")));
        }
        if !ok(tc) {
            return Err(Error::Domain(format!("tc must be positive, got {tc}")));
        }
        Ok(Self {
            theta,
            mu_other,
            n0,
            tc,
            log_base: LogBase::Two,
        })
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    /// Exponent `m` of the negative moment at bandwidth `bw`.
    fn moment_order(&self, bw: f64) -> f64 {
        let m = self.theta * bw * self.tc;
        match self.log_base {
            LogBase::Two => m / LN_2,
            LogBase::Natural => m,
        }
    }

    /// `θ·Tc`, the factor between `ln V` and the rate in bit/s.
    pub fn rate_scale(&self) -> f64 {
        self.theta * self.tc
    }
}

#[derive(Debug, Clone)]
enum Fading {
    Exponential(Arc<GaussLaguerre>),
    Deterministic,
}

/// Distribution of the power gain γ of a pair's subchannel.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    mean_gain: f64,
    fading: Fading,
}

impl PartialEq for ChannelModel {
    fn eq(&self, other: &Self) -> bool {
        self.mean_gain == other.mean_gain && self.quadrature_order() == other.quadrature_order()
    }
}

impl ChannelModel {
    /// Exponentially distributed gain with mean `mean_gain`.
    pub fn exponential(mean_gain: f64, quadrature_order: usize) -> Result<Self> {
        if !(mean_gain.is_finite() && mean_gain > 0.0) {
            return Err(Error::Domain(format!(
                "mean channel gain must be positive, got {mean_gain}"
            )));
        }
        Ok(Self {
            mean_gain,
            fading: Fading::Exponential(GaussLaguerre::cached(quadrature_order)?),
        })
    }

    /// Exponential fading with the default quadrature order.
    pub fn rayleigh(mean_gain: f64) -> Result<Self> {
        Self::exponential(mean_gain, DEFAULT_QUADRATURE_ORDER)
    }

    /// Constant gain, i.e. a one-node rule at `gain` with weight 1.
    pub fn deterministic(gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::Domain(format!("gain must be positive, got {gain}")));
        }
        Ok(Self {
            mean_gain: gain,
            fading: Fading::Deterministic,
        })
    }

    pub fn mean_gain(&self) -> f64 {
        self.mean_gain
    }

    /// `None` for a deterministic channel.
    pub fn quadrature_order(&self) -> Option<usize> {
        match &self.fading {
            Fading::Exponential(rule) => Some(rule.order()),
            Fading::Deterministic => None,
        }
    }

    /// `E_γ[f(γ)]` with the plain rule in `γ = Z·x`. Suitable for smooth,
    /// slowly varying `f`; the kernel itself goes through
    /// [`negative_moment`](Self::negative_moment).
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        match &self.fading {
            Fading::Exponential(rule) => rule.integrate(|x| f(self.mean_gain * x)),
            Fading::Deterministic => f(self.mean_gain),
        }
    }

    /// `E_γ[(1 + s·γ)^{-m}]` for `s, m ≥ 0`.
    pub fn negative_moment(&self, s: f64, m: f64) -> f64 {
        self.moment(s, m).value
    }

    /// The negative moment together with its partial derivatives, all from
    /// one pass over the nodes.
    pub fn moment(&self, s: f64, m: f64) -> Moment {
        let z = self.mean_gain;
        if s == 0.0 || m == 0.0 {
            // I = 1 - m·s·Z + O(s²) and I = 1 - m·E[ln(1 + sγ)] + O(m²).
            let d_m = if s == 0.0 { 0.0 } else { -self.expectation(|g| (s * g).ln_1p()) };
            return Moment { value: 1.0, d_s: -m * z, d_m };
        }
        let a = s * z;
        match &self.fading {
            Fading::Deterministic => {
                let l = a.ln_1p();
                let value = (-m * l).exp();
                Moment { value, d_s: -m * z * value / (1.0 + a), d_m: -l * value }
            }
            Fading::Exponential(rule) => {
                let ma = m * a;
                let mut x = 0.0f64;
                let (mut value, mut j1, mut j2) = (0.0, 0.0, 0.0);
                for (&phi, &w) in rule.nodes().iter().zip(rule.weights()) {
                    // φ(x) is increasing and concave, so Newton started
                    // below the root (the previous node's root) climbs
                    // monotonically onto it. After a step δ the error is
                    // at most |φ''|/(2φ')·δ², which decides when to stop.
                    for _ in 0..100 {
                        let one_ax = 1.0 + a * x;
                        let f = x + m * (a * x).ln_1p() - phi;
                        let d1 = 1.0 + ma / one_ax;
                        let step = f / d1;
                        x -= step;
                        let c = 0.5 * ma * a / (one_ax * one_ax * d1);
                        if c * step * step <= f64::EPSILON * x.abs() || step >= 0.0 {
                            break;
                        }
                    }
                    let one_ax = 1.0 + a * x;
                    let inv = w / (one_ax + ma);
                    value += one_ax * inv;
                    j1 += x * inv;
                    j2 += (a * x).ln_1p() * one_ax * inv;
                }
                Moment { value, d_s: -m * z * j1, d_m: -j2 }
            }
        }
    }
}

/// `I = E[(1 + sγ)^{-m}]` with `∂I/∂s` and `∂I/∂m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    pub d_s: f64,
    pub d_m: f64,
}

fn check_inputs(p_own: f64, p_other: f64, bw: f64) -> Result<()> {
    if !(p_own.is_finite() && p_own >= 0.0) {
        return Err(Error::Domain(format!("own power must be non-negative, got {p_own}")));
    }
    if !(p_other.is_finite() && p_other >= 0.0) {
        return Err(Error::Domain(format!(
            "interfering power must be non-negative, got {p_other}"
        )));
    }
    if !(bw.is_finite() && bw >= 0.0) {
        return Err(Error::Domain(format!("bandwidth must be non-negative, got {bw}")));
    }
    Ok(())
}

fn check_target(target_v: f64) -> Result<f64> {
    if !(target_v.is_finite() && target_v >= 1.0) {
        return Err(Error::Domain(format!("target V must be ≥ 1, got {target_v}")));
    }
    Ok(target_v.ln())
}

/// A link direction: radio constants plus the pair's channel. All methods
/// are unchecked fast paths working on `ln V`.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub radio: &'a LinkRadioParams,
    pub channel: &'a ChannelModel,
}

/// `ln V` and its partial derivatives at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub ln_v: f64,
    pub d_own: f64,
    pub d_other: f64,
    /// NaN at zero bandwidth, where the derivative may be unbounded.
    pub d_bw: f64,
}

const INVERSION_TOL: Tolerance = Tolerance {
    x_abs: 0.0,
    x_rel: 1e-13,
    f_abs: 0.0,
    max_iter: 200,
};

impl<'a> Link<'a> {
    pub fn new(radio: &'a LinkRadioParams, channel: &'a ChannelModel) -> Self {
        Self { radio, channel }
    }

    /// `ln V`; zero bandwidth or zero own power gives 0.
    pub fn ln_v(&self, p_own: f64, p_other: f64, bw: f64) -> f64 {
        if p_own == 0.0 || bw == 0.0 {
            return 0.0;
        }
        let r = self.radio;
        let s = p_own / (r.n0 * bw + r.mu_other * p_other);
        -self.channel.negative_moment(s, r.moment_order(bw)).ln()
    }

    /// `ln V` with derivatives in own power, interfering power and
    /// bandwidth.
    pub fn eval(&self, p_own: f64, p_other: f64, bw: f64) -> KernelEval {
        let r = self.radio;
        if bw == 0.0 {
            return KernelEval { ln_v: 0.0, d_own: 0.0, d_other: 0.0, d_bw: f64::NAN };
        }
        let dm_dbw = r.moment_order(bw) / bw;
        let den = r.n0 * bw + r.mu_other * p_other;
        let s = p_own / den;
        let m = r.moment_order(bw);
        let mo = self.channel.moment(s, m);
        // ∂lnV/∂s and ∂lnV/∂m.
        let g_s = -mo.d_s / mo.value;
        let g_m = -mo.d_m / mo.value;
        KernelEval {
            ln_v: -mo.value.ln(),
            d_own: g_s / den,
            d_other: -g_s * s * r.mu_other / den,
            d_bw: -g_s * s * r.n0 / den + g_m * dm_dbw,
        }
    }

    /// Effective capacity in bit/s.
    pub fn rate(&self, p_own: f64, p_other: f64, bw: f64) -> f64 {
        self.ln_v(p_own, p_other, bw) / self.radio.rate_scale()
    }

    /// Smallest own power in `[0, p_max]` with `ln V ≥ ln_target`.
    pub fn power_for(&self, ln_target: f64, p_other: f64, bw: f64, p_max: f64) -> Option<f64> {
        self.power_for_from(ln_target, p_other, bw, p_max, 0.5 * p_max)
    }

    /// [`power_for`](Self::power_for) with a starting guess.
    pub fn power_for_from(&self, ln_target: f64, p_other: f64, bw: f64, p_max: f64, guess: f64) -> Option<f64> {
        if ln_target <= 0.0 {
            return Some(0.0);
        }
        let f_max = self.ln_v(p_max, p_other, bw) - ln_target;
        if !(f_max >= 0.0) {
            return None;
        }
        let tol = Tolerance { x_abs: 1e-15 * p_max, ..INVERSION_TOL };
        newton(
            |p| {
                let e = self.eval(p, p_other, bw);
                (e.ln_v - ln_target, e.d_own)
            },
            0.0,
            -ln_target,
            p_max,
            f_max,
            guess,
            tol,
        )
        .map(|br| br.pos)
    }

    /// Largest interfering power in `[0, p_other_max]` with
    /// `ln V ≥ ln_target`.
    pub fn interference_for(&self, ln_target: f64, p_own: f64, bw: f64, p_other_max: f64) -> Option<f64> {
        let f_max = self.ln_v(p_own, p_other_max, bw) - ln_target;
        if f_max >= 0.0 {
            return Some(p_other_max);
        }
        let f_zero = self.ln_v(p_own, 0.0, bw) - ln_target;
        if !(f_zero >= 0.0) {
            return None;
        }
        let tol = Tolerance { x_abs: 1e-15 * p_other_max, ..INVERSION_TOL };
        newton(
            |q| {
                let e = self.eval(p_own, q, bw);
                (e.ln_v - ln_target, e.d_other)
            },
            0.0,
            f_zero,
            p_other_max,
            f_max,
            0.5 * p_other_max,
            tol,
        )
        .map(|br| br.pos)
    }

    /// Smallest bandwidth in `[0, ceiling]` with `ln V ≥ ln_target`.
    pub fn bandwidth_for(&self, ln_target: f64, p_own: f64, p_other: f64, ceiling: f64) -> Option<f64> {
        self.bandwidth_for_from(ln_target, p_own, p_other, ceiling, f64::NAN)
    }

    /// [`bandwidth_for`](Self::bandwidth_for) with a starting guess.
    pub fn bandwidth_for_from(
        &self,
        ln_target: f64,
        p_own: f64,
        p_other: f64,
        ceiling: f64,
        guess: f64,
    ) -> Option<f64> {
        if ln_target <= 0.0 {
            return Some(0.0);
        }
        if p_own == 0.0 {
            return None;
        }
        let f_max = self.ln_v(p_own, p_other, ceiling) - ln_target;
        if !(f_max >= 0.0) {
            return None;
        }
        let tol = Tolerance { x_abs: 1e-15 * ceiling, ..INVERSION_TOL };
        // ln V grows roughly linearly in bandwidth, which makes the secant
        // through the origin a good first guess.
        let guess = if guess.is_nan() { ceiling * ln_target / (f_max + ln_target) } else { guess };
        newton(
            |b| {
                let e = self.eval(p_own, p_other, b);
                (e.ln_v - ln_target, e.d_bw)
            },
            0.0,
            -ln_target,
            ceiling,
            f_max,
            guess,
            tol,
        )
        .map(|br| br.pos)
    }
}

/// Kernel value `V ≥ 1` of one link direction.
pub fn v_value(
    p_own: f64,
    p_other: f64,
    bw: f64,
    radio: &LinkRadioParams,
    ch: &ChannelModel,
) -> Result<f64> {
    Ok(ln_v_value(p_own, p_other, bw, radio, ch)?.exp())
}

/// `ln V`, preferred over [`v_value`] when V is large.
pub fn ln_v_value(
    p_own: f64,
    p_other: f64,
    bw: f64,
    radio: &LinkRadioParams,
    ch: &ChannelModel,
) -> Result<f64> {
    check_inputs(p_own, p_other, bw)?;
    Ok(Link::new(radio, ch).ln_v(p_own, p_other, bw))
}

/// Maximum constant arrival rate (bit/s) the link supports under its QoS
/// exponent.
pub fn effective_capacity(
    p_own: f64,
    p_other: f64,
    bw: f64,
    radio: &LinkRadioParams,
    ch: &ChannelModel,
) -> Result<f64> {
    check_inputs(p_own, p_other, bw)?;
    Ok(Link::new(radio, ch).rate(p_own, p_other, bw))
}

/// Own power reaching `target_v` with the other parameters fixed.
pub fn invert_v_for_power(
    target_v: f64,
    p_other: f64,
    bw: f64,
    radio: &LinkRadioParams,
    ch: &ChannelModel,
    p_max: f64,
) -> Result<f64> {
    let ln_t = check_target(target_v)?;
    check_inputs(p_max, p_other, bw)?;
    let link = Link::new(radio, ch);
    link.power_for(ln_t, p_other, bw, p_max).ok_or_else(|| {
        Infeasibility::Target {
            target: target_v,
            attainable: link.ln_v(p_max, p_other, bw).exp(),
        }
        .into()
    })
}

/// Bandwidth reaching `target_v`, searched on `[0, bw_ceiling]`.
pub fn invert_v_for_bandwidth(
    target_v: f64,
    p_own: f64,
    p_other: f64,
    radio: &LinkRadioParams,
    ch: &ChannelModel,
    bw_ceiling: f64,
) -> Result<f64> {
    let ln_t = check_target(target_v)?;
    check_inputs(p_own, p_other, bw_ceiling)?;
    if ln_t > 0.0 && p_own == 0.0 {
        return Err(Error::Domain("own power must be positive to reach V > 1".into()));
    }
    let link = Link::new(radio, ch);
    link.bandwidth_for(ln_t, p_own, p_other, bw_ceiling).ok_or_else(|| {
        Infeasibility::Target {
            target: target_v,
            attainable: link.ln_v(p_own, p_other, bw_ceiling).exp(),
        }
        .into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radio() -> LinkRadioParams {
        LinkRadioParams::new(0.1, 0.1, 1e-6, 1e-3).unwrap()
    }

    #[test]
    fn zero_power_gives_unit_kernel() {
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        assert_eq!(v_value(0.0, 3.0, 5e4, &radio(), &ch).unwrap(), 1.0);
        assert_eq!(effective_capacity(0.0, 3.0, 5e4, &radio(), &ch).unwrap(), 0.0);
    }

    #[test]
    fn zero_bandwidth_is_unit_by_continuity() {
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        assert_eq!(v_value(5.0, 3.0, 0.0, &radio(), &ch).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        assert!(matches!(v_value(-1.0, 0.0, 1.0, &radio(), &ch), Err(Error::Domain(_))));
        assert!(matches!(v_value(1.0, -1.0, 1.0, &radio(), &ch), Err(Error::Domain(_))));
        assert!(matches!(v_value(1.0, 0.0, -1.0, &radio(), &ch), Err(Error::Domain(_))));
        assert!(LinkRadioParams::new(0.0, 0.1, 1e-6, 1e-3).is_err());
        assert!(LinkRadioParams::new(0.1, 1.5, 1e-6, 1e-3).is_err());
        assert!(ChannelModel::rayleigh(0.0).is_err());
        assert!(ChannelModel::exponential(1.0, 1).is_err());
    }

    #[test]
    fn deterministic_channel_matches_shannon_rate() {
        let ch = ChannelModel::deterministic(0.7).unwrap();
        let r = radio();
        let (p, q, bw) = (2.0, 1.5, 3e4);
        let sinr = p * 0.7 / (r.n0 * bw + r.mu_other * q);
        let v = v_value(p, q, bw, &r, &ch).unwrap();
        let expected_v = (r.theta * bw * r.tc * (1.0 + sinr).log2()).exp();
        assert!((v / expected_v - 1.0).abs() < 1e-12);
        let rate = effective_capacity(p, q, bw, &r, &ch).unwrap();
        assert!((rate / (bw * (1.0 + sinr).log2()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_log_variant_uses_nats() {
        let ch = ChannelModel::deterministic(1.0).unwrap();
        let r = radio().with_log_base(LogBase::Natural);
        let sinr = 2.0 / (r.n0 * 1e4 + 0.0);
        let rate = effective_capacity(2.0, 0.0, 1e4, &r, &ch).unwrap();
        assert!((rate / (1e4 * sinr.ln_1p()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_of_one_is_one() {
        for order in [2, 8, 64, 128] {
            let ch = ChannelModel::exponential(2.5, order).unwrap();
            assert!((ch.expectation(|_| 1.0) - 1.0).abs() < 1e-12);
            assert!((ch.expectation(|g| g) - 2.5).abs() < 1e-11);
        }
    }

    #[test]
    fn negative_moment_closed_form_for_unit_order() {
        // E[(1+aX)^{-1}] = e^{1/a} E₁(1/a)/a; at a = 1: e·E₁(1) = 0.596347362323194.
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        let got = ch.negative_moment(1.0, 1.0);
        assert!((got - 0.596_347_362_323_194_1).abs() < 1e-13, "{got}");
        // m = 2: 1 - (1/a) e^{1/a} E₁(1/a) at a = 1 gives 1 - 0.596347... = 0.403652637676806.
        let got2 = ch.negative_moment(1.0, 2.0);
        assert!((got2 - 0.403_652_637_676_805_9).abs() < 1e-13, "{got2}");
    }

    #[test]
    fn peaked_integrand_regime_is_accurate() {
        // a ≈ 16.1, m ≈ 43.3: far outside what a plain 64-node rule can
        // resolve. Reference from adaptive quadrature: 1.464185868309882e-3.
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        let s = 5.0 / (1e-6 * 3e5 + 0.1 * 0.1);
        let m = 0.1 * 3e5 * 1e-3 / LN_2;
        let got = ch.negative_moment(s, m);
        assert!(((got - 1.464_185_868_309_882e-3) / got).abs() < 1e-10, "{got}");
    }

    #[test]
    fn matches_high_precision_reference() {
        // 30-digit adaptive quadrature, Z = 1.3, θ = 0.1, μ = 0.1.
        let ch = ChannelModel::rayleigh(1.3).unwrap();
        let r = radio();
        let link = Link::new(&r, &ch);
        let cases = [
            (5.0, 3.9, 5.1e4, 4.552_734_603_572_480_8, 1e-12),
            (0.2, 4.0, 1.2e5, 2.220_631_142_770_706_9, 1e-12),
            // m ≈ 0.29 with a huge SNR: the substituted integrand turns into
            // a sharp sigmoid and the fixed rule loses a few digits.
            (3.0, 0.0, 2e3, 1.943_291_035_707_048_2, 1e-5),
        ];
        for (p, q, bw, want, tol) in cases {
            let got = link.ln_v(p, q, bw);
            assert!(((got - want) / want).abs() < tol, "{p} {q} {bw}: {got} vs {want}");
        }
    }

    #[test]
    fn power_inversion_round_trip() {
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        let r = radio();
        for &p in &[1e-3, 0.3, 2.0, 4.9] {
            let v = v_value(p, 3.0, 4e4, &r, &ch).unwrap();
            let back = invert_v_for_power(v, 3.0, 4e4, &r, &ch, 5.0).unwrap();
            assert!((back - p).abs() <= 1e-8 * p, "{p} -> {back}");
        }
        assert_eq!(invert_v_for_power(1.0, 3.0, 4e4, &r, &ch, 5.0).unwrap(), 0.0);
        let too_much = v_value(5.0, 3.0, 4e4, &r, &ch).unwrap() * 1.01;
        assert!(matches!(
            invert_v_for_power(too_much, 3.0, 4e4, &r, &ch, 5.0),
            Err(Error::Infeasible(Infeasibility::Target { .. }))
        ));
        assert!(invert_v_for_power(0.5, 3.0, 4e4, &r, &ch, 5.0).is_err());
    }

    #[test]
    fn bandwidth_inversion_round_trip() {
        let ch = ChannelModel::rayleigh(2.0).unwrap();
        let r = radio();
        for &bw in &[1e3, 2.5e4, 1.5e5] {
            let v = v_value(4.0, 2.0, bw, &r, &ch).unwrap();
            let back = invert_v_for_bandwidth(v, 4.0, 2.0, &r, &ch, 3e6).unwrap();
            assert!((back - bw).abs() <= 1e-8 * bw, "{bw} -> {back}");
        }
        assert_eq!(invert_v_for_bandwidth(1.0, 4.0, 2.0, &r, &ch, 3e6).unwrap(), 0.0);
        assert!(invert_v_for_bandwidth(1e300, 4.0, 2.0, &r, &ch, 3e6).is_err());
    }

    // The derivative integrands are less smooth in φ than the value, so
    // they only carry ~5 digits. That is plenty for Newton steps, whose
    // convergence is guarded by the bracket anyway.
    #[test]
    fn derivatives_match_finite_differences() {
        for ch in [ChannelModel::rayleigh(1.3).unwrap(), ChannelModel::deterministic(0.8).unwrap()] {
            for r in [radio(), radio().with_log_base(LogBase::Natural)] {
                let link = Link::new(&r, &ch);
                for &(p, q, bw) in &[(5.0, 3.9, 5.1e4), (0.2, 4.0, 1.2e5), (3.0, 0.0, 2e4)] {
                    let e = link.eval(p, q, bw);
                    assert!((e.ln_v - link.ln_v(p, q, bw)).abs() <= 1e-13 * e.ln_v.abs());
                    let fd = |f: &dyn Fn(f64) -> f64, x: f64| {
                        let h = 1e-6 * x.abs().max(1e-3);
                        (f(x + h) - f(x - h)) / (2.0 * h)
                    };
                    let d_own = fd(&|x| link.ln_v(x, q, bw), p);
                    let d_bw = fd(&|x| link.ln_v(p, q, x), bw);
                    assert!((e.d_own - d_own).abs() <= 1e-4 * d_own.abs(), "{e:?} {d_own}");
                    assert!((e.d_bw - d_bw).abs() <= 1e-4 * d_bw.abs(), "{e:?} {d_bw}");
                    if q > 0.0 {
                        let d_other = fd(&|x| link.ln_v(p, x, bw), q);
                        assert!((e.d_other - d_other).abs() <= 1e-4 * d_other.abs(), "{e:?} {d_other}");
                    }
                }
            }
        }
    }

    #[test]
    fn interference_inversion() {
        let ch = ChannelModel::rayleigh(1.0).unwrap();
        let r = radio();
        let link = Link::new(&r, &ch);
        let target = link.ln_v(5.0, 2.2, 5e4);
        let q = link.interference_for(target, 5.0, 5e4, 5.0).unwrap();
        assert!((q - 2.2).abs() < 1e-9, "{q}");
        assert_eq!(link.interference_for(0.0, 5.0, 5e4, 5.0), Some(5.0));
        let unreachable = link.ln_v(5.0, 0.0, 5e4) + 1.0;
        assert_eq!(link.interference_for(unreachable, 5.0, 5e4, 5.0), None);
    }
}

