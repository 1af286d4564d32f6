//! Two-user subproblem: the least bandwidth on which a pair reaches two
//! kernel targets.

use crate::ec::{ChannelModel, KernelEval, Link, LinkRadioParams};
use crate::roots::{newton, Tolerance};

use super::SystemSpec;

/// Radio view of pair `k`. `radio[i]` describes the link on which user `i`
/// transmits; its interference comes from user `1 - i`.
#[derive(Debug, Clone)]
pub(crate) struct PairModel {
    radio: [LinkRadioParams; 2],
    channel: ChannelModel,
    pub p_max: [f64; 2],
}

/// Operating point of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairPoint {
    pub bw: f64,
    pub p: [f64; 2],
    /// User transmitting at peak power.
    pub pinned: usize,
    /// Rate of change of `bw` as the targets move along the direction
    /// passed to [`PairModel::min_bandwidth`].
    pub slope: f64,
}

const TOL: Tolerance = Tolerance {
    x_abs: 0.0,
    x_rel: 1e-13,
    f_abs: 0.0,
    max_iter: 200,
};

impl PairModel {
    pub fn new(spec: &SystemSpec, k: usize) -> Self {
        let pair = &spec.pairs[k];
        Self {
            radio: [spec.radio(k, 0), spec.radio(k, 1)],
            channel: pair.channel.clone(),
            p_max: [pair.users[0].p_max, pair.users[1].p_max],
        }
    }

    pub fn link(&self, i: usize) -> Link<'_> {
        Link::new(&self.radio[i], &self.channel)
    }

    pub fn ln_v(&self, i: usize, p: [f64; 2], bw: f64) -> f64 {
        self.link(i).ln_v(p[i], p[1 - i], bw)
    }

    pub fn eval(&self, i: usize, p: [f64; 2], bw: f64) -> KernelEval {
        self.link(i).eval(p[i], p[1 - i], bw)
    }

    /// Least bandwidth in `[0, ceiling]` giving `ln V_i ≥ t[i]` for both
    /// users while user `pinned` transmits at peak power and the other
    /// user's power stays within its cap. `None` if no such bandwidth
    /// exists.
    ///
    /// `dt` is the direction in which the targets are moving; the returned
    /// slope is the derivative of the bandwidth along it. `hint` is an
    /// earlier solution for nearby targets.
    pub fn min_bandwidth(
        &self,
        t: [f64; 2],
        dt: [f64; 2],
        pinned: usize,
        ceiling: f64,
        hint: Option<PairPoint>,
    ) -> Option<PairPoint> {
        let i = pinned;
        let j = 1 - i;
        let pi = self.p_max[i];
        let pj_max = self.p_max[j];
        let powers = |pj| {
            let mut p = [0.0; 2];
            p[i] = pi;
            p[j] = pj;
            p
        };
        let point = |bw, pj, slope| PairPoint { bw, p: powers(pj), pinned, slope };
        let hint = hint.filter(|h| h.pinned == pinned && h.bw > 0.0);

        if t[j] <= 0.0 {
            // The free user needs nothing and stays silent.
            let guess = hint.map_or(f64::NAN, |h| h.bw);
            let bw = self.link(i).bandwidth_for_from(t[i], pi, 0.0, ceiling, guess)?;
            let slope = if bw > 0.0 { dt[i] / self.eval(i, powers(0.0), bw).d_bw } else { 0.0 };
            return Some(point(bw, 0.0, slope));
        }
        // Below `floor` the free user misses its target even at peak. If the
        // pinned user is satisfied there, that is the answer.
        let floor_case = |guess: f64| -> Option<(f64, Option<PairPoint>)> {
            let floor = self.link(j).bandwidth_for_from(t[j], pj_max, pi, ceiling, guess)?;
            let p = powers(pj_max);
            if self.ln_v(i, p, floor) >= t[i] {
                let slope = dt[j] / self.eval(j, p, floor).d_bw;
                return Some((floor, Some(point(floor, pj_max, slope))));
            }
            Some((floor, None))
        };

        let mut known_floor = None;
        match hint {
            Some(h) if h.p[j] >= pj_max => {
                let (floor, found) = floor_case(h.bw)?;
                if found.is_some() {
                    return found;
                }
                known_floor = Some(floor);
            }
            Some(h) => {
                if let Some((bw, pj, slope)) = self.joint(t, dt, i, h.bw, h.p[j], ceiling) {
                    return Some(point(bw, pj, slope));
                }
            }
            None => {}
        }

        let guess = hint.map_or(f64::NAN, |h| h.bw);
        let floor = match known_floor {
            Some(floor) => floor,
            None => {
                let (floor, found) = floor_case(guess)?;
                if found.is_some() {
                    return found;
                }
                floor
            }
        };

        // Past the floor, raising bandwidth lets the free user back off,
        // which helps the pinned user twice over; r(bw) is increasing.
        let free_power = |bw: f64, guess: f64| self.link(j).power_for_from(t[j], pi, bw, pj_max, guess);
        let mut last_pj = pj_max;
        let mut r = |bw: f64| -> (f64, f64) {
            let Some(pj) = free_power(bw, last_pj) else {
                return (f64::NEG_INFINITY, f64::NAN);
            };
            last_pj = pj;
            let ei = self.eval(i, powers(pj), bw);
            let ej = self.eval(j, powers(pj), bw);
            let dpj = -ej.d_bw / ej.d_own;
            (ei.ln_v - t[i], ei.d_bw + ei.d_other * dpj)
        };
        let (r_floor, _) = r(floor);
        let (r_ceiling, _) = r(ceiling);
        if !(r_ceiling >= 0.0) {
            return None;
        }
        let start = guess.clamp(floor, ceiling);
        let tol = Tolerance { x_abs: 1e-15 * ceiling, ..TOL };
        let br = newton(&mut r, floor, r_floor, ceiling, r_ceiling, start, tol)?;
        // The last evaluation need not have been at br.pos.
        let pj = free_power(br.pos, last_pj)?;
        let (ei, ej) = (self.eval(i, powers(pj), br.pos), self.eval(j, powers(pj), br.pos));
        Some(point(br.pos, pj, interior_slope(&ei, &ej, dt[i], dt[j])))
    }

    /// Newton on both equations at once, from a nearby solution. `None`
    /// unless it settles inside the power box, in which case the root is
    /// the one [`min_bandwidth`](Self::min_bandwidth) is after.
    fn joint(&self, t: [f64; 2], dt: [f64; 2], i: usize, bw: f64, pj: f64, ceiling: f64) -> Option<(f64, f64, f64)> {
        let j = 1 - i;
        let pj_max = self.p_max[j];
        let (mut b, mut q) = (bw, pj);
        for _ in 0..20 {
            let mut p = [0.0; 2];
            p[i] = self.p_max[i];
            p[j] = q;
            let ei = self.eval(i, p, b);
            let ej = self.eval(j, p, b);
            let (fi, fj) = (ei.ln_v - t[i], ej.ln_v - t[j]);
            let det = ei.d_bw * ej.d_own - ei.d_other * ej.d_bw;
            if !(det > 0.0 && det.is_finite()) {
                return None;
            }
            let db = (fi * ej.d_own - ei.d_other * fj) / det;
            let dq = (ei.d_bw * fj - ej.d_bw * fi) / det;
            b -= db;
            q -= dq;
            if !(b > 0.0 && b <= ceiling && q > 0.0 && q <= pj_max * 1.5) {
                return None;
            }
            if db.abs() <= 1e-13 * b && dq.abs() <= 1e-13 * pj_max {
                if q > pj_max {
                    return None;
                }
                return Some((b, q, interior_slope(&ei, &ej, dt[i], dt[j])));
            }
        }
        None
    }

    /// Largest `ln V_i` on bandwidth `bw` while user `1 - i` keeps
    /// `ln V ≥ t_j`. The maximum sits on one of two edges of the power box:
    /// partner at peak with user `i` as loud as the partner's floor allows,
    /// or user `i` at peak with the partner at the least power meeting its
    /// floor. `None` if the floor is out of reach.
    pub fn max_ln_v(&self, i: usize, t_j: f64, bw: f64) -> Option<f64> {
        let j = 1 - i;
        let mut best = None::<f64>;
        let mut p = [0.0; 2];
        if let Some(pi) = self.link(j).interference_for(t_j, self.p_max[j], bw, self.p_max[i]) {
            p[i] = pi;
            p[j] = self.p_max[j];
            best = Some(self.ln_v(i, p, bw));
        }
        if let Some(pj) = self.link(j).power_for(t_j, self.p_max[i], bw, self.p_max[j]) {
            p[i] = self.p_max[i];
            p[j] = pj;
            let v = self.ln_v(i, p, bw);
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        best
    }

    /// [`min_bandwidth`](Self::min_bandwidth) over both peak-power patterns.
    /// Ties go to user 0 at peak.
    pub fn min_bandwidth_any(
        &self,
        t: [f64; 2],
        dt: [f64; 2],
        ceiling: f64,
        hints: [Option<PairPoint>; 2],
    ) -> Option<PairPoint> {
        let a = self.min_bandwidth(t, dt, 0, ceiling, hints[0]);
        let b = self.min_bandwidth(t, dt, 1, ceiling, hints[1]);
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.bw < a.bw { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

/// `d bw` along `(dt_i, dt_j)` when both targets bind: the bandwidth row of
/// the inverse Jacobian of `(ln V_i, ln V_j)` in `(bw, p_j)`.
fn interior_slope(ei: &KernelEval, ej: &KernelEval, dt_i: f64, dt_j: f64) -> f64 {
    let det = ei.d_bw * ej.d_own - ei.d_other * ej.d_bw;
    (dt_i * ej.d_own - ei.d_other * dt_j) / det
}
