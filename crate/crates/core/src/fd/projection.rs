//! Projection of a kernel-value vector onto the upper boundary of the
//! feasible region along the ray from the origin `u`.
//!
//! For a trial `λ` every pair must reach `u + λ(Y − u)` on its two
//! coordinates. The least bandwidth doing so has one user at peak power, so
//! each pair's requirement is the smaller of its two peak-power patterns.
//! The total requirement increases with `λ`; the boundary point is where it
//! meets the budget.

use crate::error::{Error, Result};
use crate::roots::{newton, Tolerance};

use super::pair::{PairModel, PairPoint};
use super::{Allocation, SystemSpec};

/// How peak-power patterns are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMethod {
    /// Each pair picks its cheaper pattern independently. Equivalent to
    /// full enumeration because the total requirement is a sum of per-pair
    /// terms.
    #[default]
    Separable,
    /// Solves every one of the `2^K` patterns and keeps the largest `λ`.
    Enumerate,
}

/// Result of a projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOutcome {
    /// Step along `Y − u`; exactly 1 when `Y` itself is feasible.
    pub lambda: f64,
    /// `u + λ(Y − u)`.
    pub point: Vec<f64>,
    /// Allocation reaching at least `point`, using the whole budget.
    pub allocation: Allocation,
    /// Per pair, the user (0 or 1) transmitting at peak power.
    pub pinned: Vec<usize>,
}

const LAMBDA_TOL: Tolerance = Tolerance {
    x_abs: 1e-13,
    x_rel: 0.0,
    f_abs: 0.0,
    max_iter: 200,
};

/// Largest number of pairs [`ProjectionMethod::Enumerate`] accepts.
pub const MAX_ENUMERATED_PAIRS: usize = 12;

/// Projects `y` towards `origin` for `spec`.
pub fn project(y: &[f64], spec: &SystemSpec, origin: &[f64], method: ProjectionMethod) -> Result<ProjectionOutcome> {
    spec.validate()?;
    if origin.len() != 2 * spec.k() {
        return Err(Error::Domain(format!("expected {} coordinates", 2 * spec.k())));
    }
    Projector::new(spec, origin.to_vec()).project(spec, y, method)
}

/// Projection machinery for one spec and origin. The origin's own per-pair
/// solutions are kept as warm starts for every ray.
#[derive(Debug, Clone)]
pub(crate) struct Projector {
    pairs: Vec<PairModel>,
    origin: Vec<f64>,
    seeds: Vec<[Option<PairPoint>; 2]>,
    ceiling: f64,
}

impl Projector {
    pub fn new(spec: &SystemSpec, origin: Vec<f64>) -> Self {
        let k_pairs = spec.k();
        let ceiling = 10.0 * spec.total_bw;
        let pairs: Vec<PairModel> = (0..k_pairs).map(|k| PairModel::new(spec, k)).collect();
        let seeds = pairs
            .iter()
            .enumerate()
            .map(|(k, pair)| {
                let t = [origin[k].ln(), origin[k_pairs + k].ln()];
                [0, 1].map(|pinned| pair.min_bandwidth(t, [0.0; 2], pinned, ceiling, None))
            })
            .collect();
        Self { pairs, origin, seeds, ceiling }
    }

    pub fn project(&self, spec: &SystemSpec, y: &[f64], method: ProjectionMethod) -> Result<ProjectionOutcome> {
        let n = 2 * spec.k();
        if y.len() != n {
            return Err(Error::Domain(format!("expected {n} coordinates")));
        }
        if y.iter().zip(&self.origin).any(|(a, u)| !(a >= u)) {
            return Err(Error::Domain("projected point must dominate the origin".into()));
        }
        let ray = Ray { spec, projector: self, y };
        match method {
            ProjectionMethod::Separable => ray.solve(None),
            ProjectionMethod::Enumerate => {
                if spec.k() > MAX_ENUMERATED_PAIRS {
                    return Err(Error::Guard(format!(
                        "pattern enumeration is limited to {MAX_ENUMERATED_PAIRS} pairs"
                    )));
                }
                let mut best: Option<ProjectionOutcome> = None;
                for pattern in 0..1usize << spec.k() {
                    let out = match ray.solve(Some(pattern)) {
                        Ok(out) => out,
                        Err(Error::NoFeasiblePattern) => continue,
                        Err(e) => return Err(e),
                    };
                    if best.as_ref().map_or(true, |b| out.lambda > b.lambda + 1e-12) {
                        best = Some(out);
                    }
                }
                best.ok_or(Error::NoFeasiblePattern)
            }
        }
    }
}

struct Ray<'a> {
    spec: &'a SystemSpec,
    projector: &'a Projector,
    y: &'a [f64],
}

impl Ray<'_> {
    fn point(&self, lambda: f64) -> Vec<f64> {
        self.projector
            .origin
            .iter()
            .zip(self.y)
            .map(|(&u, &y)| if lambda >= 1.0 { y } else { u + lambda * (y - u) })
            .collect()
    }

    /// Per-pair least-bandwidth points at `λ`; `None` if some pair cannot
    /// reach its targets at any bandwidth. Bit `k` of `pattern` pins user 1
    /// of pair `k`; without a pattern each pair takes its cheaper one.
    fn requirement(&self, lambda: f64, pattern: Option<usize>, hints: &mut [[Option<PairPoint>; 2]]) -> Option<Vec<PairPoint>> {
        let k_pairs = self.spec.k();
        let point = self.point(lambda);
        // d ln(u + λ(y - u)) / dλ
        let slope = |m: usize| (self.y[m] - self.projector.origin[m]) / point[m];
        let ceiling = self.projector.ceiling;
        let mut out = Vec::with_capacity(k_pairs);
        for (k, pair) in self.projector.pairs.iter().enumerate() {
            let (m1, m2) = (k, k_pairs + k);
            let t = [point[m1].ln(), point[m2].ln()];
            let dt = [slope(m1), slope(m2)];
            let sol = match pattern {
                None => pair.min_bandwidth_any(t, dt, ceiling, hints[k])?,
                Some(bits) => {
                    let pinned = (bits >> k) & 1;
                    pair.min_bandwidth(t, dt, pinned, ceiling, hints[k][pinned])?
                }
            };
            out.push(sol);
        }
        Some(out)
    }

    fn total(points: &Option<Vec<PairPoint>>) -> f64 {
        points.as_ref().map_or(f64::INFINITY, |p| p.iter().map(|s| s.bw).sum())
    }

    fn solve(&self, pattern: Option<usize>) -> Result<ProjectionOutcome> {
        let budget = self.spec.total_bw;
        let mut hints = self.projector.seeds.clone();
        let remember = |hints: &mut [[Option<PairPoint>; 2]], pts: &[PairPoint]| {
            for (h, p) in hints.iter_mut().zip(pts) {
                h[p.pinned] = Some(*p);
            }
        };

        let at_zero = self.requirement(0.0, pattern, &mut hints);
        let s0 = Self::total(&at_zero);
        if !(s0 <= budget) {
            return Err(Error::NoFeasiblePattern);
        }
        let at_zero = at_zero.unwrap();
        remember(&mut hints, &at_zero);

        // λ = 1 is presumed infeasible and only checked if the search ends
        // up against it. The first Newton step from 0 is the starting guess.
        let slope0: f64 = at_zero.iter().map(|p| p.slope).sum();
        let guess = (budget - s0) / slope0;
        let mut best = (0.0, at_zero);
        let br = newton(
            |lambda| {
                let Some(pts) = self.requirement(lambda, pattern, &mut hints) else {
                    return (f64::INFINITY, f64::NAN);
                };
                remember(&mut hints, &pts);
                let g = pts.iter().map(|p| p.bw).sum::<f64>() - budget;
                let dg = pts.iter().map(|p| p.slope).sum();
                if g <= 0.0 && lambda >= best.0 {
                    best = (lambda, pts);
                }
                (g, dg)
            },
            0.0,
            s0 - budget,
            1.0,
            f64::INFINITY,
            guess,
            LAMBDA_TOL,
        )
        .ok_or_else(|| Error::Degenerate("bandwidth requirement not monotone along the ray".into()))?;
        if br.pos == 1.0 && 1.0 - br.neg <= 2.0 * LAMBDA_TOL.x_abs {
            if let Some(pts) = self.requirement(1.0, pattern, &mut hints) {
                if pts.iter().map(|p| p.bw).sum::<f64>() <= budget {
                    return self.outcome(1.0, pts);
                }
            }
        }
        // The requirement is increasing, so the feasible end of the final
        // bracket is the largest λ seen with g ≤ 0.
        self.outcome(best.0, best.1)
    }

    fn outcome(&self, lambda: f64, points: Vec<PairPoint>) -> Result<ProjectionOutcome> {
        let spec = self.spec;
        let k = spec.k();
        let used: f64 = points.iter().map(|p| p.bw).sum();
        // Spread the slack proportionally; more bandwidth at fixed powers
        // only raises every kernel value.
        let bw: Vec<f64> = if used > 0.0 {
            points.iter().map(|p| p.bw * spec.total_bw / used).collect()
        } else {
            vec![spec.total_bw / k as f64; k]
        };
        let p1 = points.iter().map(|p| p.p[0]).collect();
        let p2 = points.iter().map(|p| p.p[1]).collect();
        let allocation = Allocation::evaluate(spec, bw, p1, p2)?;
        Ok(ProjectionOutcome {
            lambda,
            point: self.point(lambda),
            allocation,
            pinned: points.iter().map(|p| p.pinned).collect(),
        })
    }
}
