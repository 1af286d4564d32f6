//! Weighted-sum quality maximization for `K` full-duplex pairs sharing a
//! bandwidth budget.
//!
//! The decision variables are per-pair bandwidths `B_k` and the powers
//! `P_{1,k}`, `P_{2,k}`. The problem is recast over `Y ∈ R^{2K}`, one kernel
//! value per user, with `Y[i·K + k]` belonging to user `i` of pair `k`
//! (users are indexed from 0 here). The feasible set of `Y` is normal, the
//! quality floors form a conormal box, and the objective
//! [`phi`] is increasing, so the generic polyblock solver applies.

mod init;
pub(crate) mod pair;
mod projection;

use crate::ec::{ChannelModel, LinkRadioParams, LogBase};
use crate::error::{Error, Result};
use crate::quality::{self, QualityModel};
use crate::solver::{self, MonotoneProblem, Projection, SolverConfig, SolverReport};

pub use init::{init_polyblock, InitialBox};
pub use projection::{project, ProjectionMethod, ProjectionOutcome};

use projection::Projector;

/// Parameters of one user in a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    /// QoS exponent of the user's outgoing link.
    pub theta: f64,
    /// Fraction of this user's transmit power leaking into its own receiver.
    pub mu: f64,
    pub p_max: f64,
    pub weight: f64,
    /// Quality model of the video this user sends.
    pub quality: QualityModel,
}

impl UserSpec {
    pub fn new(theta: f64, mu: f64, p_max: f64, weight: f64, quality: QualityModel) -> Result<Self> {
        let u = Self { theta, mu, p_max, weight, quality };
        u.validate()?;
        Ok(u)
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::Domain(format!("theta must be positive, got {}", self.theta)));
        }
        if !(self.mu.is_finite() && (0.0..=1.0).contains(&self.mu)) {
            return Err(Error::Domain(format!("mu must lie in [0, 1], got {}", self.mu)));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::Domain(format!("peak power must be positive, got {}", self.p_max)));
        }
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(Error::Domain(format!("weight must be non-negative, got {}", self.weight)));
        }
        QualityModel::new(self.quality.a, self.quality.b, self.quality.q_min)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub users: [UserSpec; 2],
    pub channel: ChannelModel,
}

impl PairSpec {
    pub fn new(user1: UserSpec, user2: UserSpec, channel: ChannelModel) -> Self {
        Self { users: [user1, user2], channel }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub pairs: Vec<PairSpec>,
    /// Total bandwidth `B` in Hz.
    pub total_bw: f64,
    pub n0: f64,
    pub tc: f64,
    /// Convergence tolerance of the outer solver, in dB of weighted quality.
    pub eps: f64,
    pub log_base: LogBase,
}

impl SystemSpec {
    pub fn new(pairs: Vec<PairSpec>, total_bw: f64, n0: f64, tc: f64) -> Result<Self> {
        let spec = Self {
            pairs,
            total_bw,
            n0,
            tc,
            eps: 1e-3,
            log_base: LogBase::Two,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Domain("at least one pair is required".into()));
        }
        if !(self.total_bw.is_finite() && self.total_bw > 0.0) {
            return Err(Error::Domain(format!("total bandwidth must be positive, got {}", self.total_bw)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        LinkRadioParams::new(1.0, 0.0, self.n0, self.tc)?;
        for p in &self.pairs {
            p.users[0].validate()?;
            p.users[1].validate()?;
        }
        let total: f64 = self.users().map(|u| u.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("weights must sum to 1, got {total}")));
        }
        Ok(())
    }

    /// Number of pairs `K`.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Users in coordinate order: all first users, then all second users.
    pub fn users(&self) -> impl Iterator<Item = &UserSpec> + '_ {
        (0..2).flat_map(move |i| self.pairs.iter().map(move |p| &p.users[i]))
    }

    /// User behind coordinate `m = i·K + k`.
    pub fn user(&self, m: usize) -> &UserSpec {
        let k = self.k();
        &self.pairs[m % k].users[m / k]
    }

    /// Radio constants of the link on which user `i` of pair `k` transmits.
    /// Its receiver is the partner, whose own power leaks in with the
    /// partner's suppression factor.
    pub fn radio(&self, k: usize, i: usize) -> LinkRadioParams {
        let pair = &self.pairs[k];
        LinkRadioParams {
            theta: pair.users[i].theta,
            mu_other: pair.users[1 - i].mu,
            n0: self.n0,
            tc: self.tc,
            log_base: self.log_base,
        }
    }

    /// Kernel values `V^min` matching each user's quality floor.
    pub fn v_min(&self) -> Vec<f64> {
        self.users()
            .map(|u| quality::v_min(&u.quality, u.theta, self.tc).expect("validated spec"))
            .collect()
    }

    /// Lower corner `u = max(V^min, 1)` of the feasible region.
    pub fn origin(&self) -> Vec<f64> {
        self.v_min().into_iter().map(|v| v.max(1.0)).collect()
    }
}

/// Weighted sum quality at kernel values `y`. Coordinates at or below 1
/// carry zero rate and contribute `-inf` unless their weight is zero.
pub fn phi(y: &[f64], spec: &SystemSpec) -> f64 {
    debug_assert_eq!(y.len(), 2 * spec.k());
    spec.users()
        .zip(y)
        .filter(|(u, _)| u.weight != 0.0)
        .map(|(u, &v)| {
            if !(v > 1.0) {
                return f64::NEG_INFINITY;
            }
            let rate = v.ln() / (u.theta * spec.tc);
            u.weight * u.quality.psnr_bps(rate)
        })
        .sum()
}

/// Bandwidths and powers for all pairs, with the resulting link rates and
/// qualities.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub bw: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Effective capacities in bit/s, coordinate order.
    pub rates: Vec<f64>,
    /// PSNR in dB, coordinate order.
    pub psnr: Vec<f64>,
    pub weighted_sum_quality: f64,
}

impl Allocation {
    /// Evaluates rates and qualities of a raw allocation.
    pub fn evaluate(spec: &SystemSpec, bw: Vec<f64>, p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        let k = spec.k();
        if bw.len() != k || p1.len() != k || p2.len() != k {
            return Err(Error::Domain(format!("allocation must cover {k} pairs")));
        }
        let mut rates = vec![0.0; 2 * k];
        for (kk, pair) in spec.pairs.iter().enumerate() {
            let p = [p1[kk], p2[kk]];
            for i in 0..2 {
                let radio = spec.radio(kk, i);
                rates[i * k + kk] =
                    crate::ec::effective_capacity(p[i], p[1 - i], bw[kk], &radio, &pair.channel)?;
            }
        }
        let psnr: Vec<f64> = spec.users().zip(&rates).map(|(u, &r)| u.quality.psnr_bps(r)).collect();
        let weighted_sum_quality = spec
            .users()
            .zip(&psnr)
            .filter(|(u, _)| u.weight != 0.0)
            .map(|(u, q)| u.weight * q)
            .sum();
        Ok(Self { bw, p1, p2, rates, psnr, weighted_sum_quality })
    }

    /// Power of user `i` (0 or 1) in pair `k`.
    pub fn power(&self, i: usize, k: usize) -> f64 {
        if i == 0 {
            self.p1[k]
        } else {
            self.p2[k]
        }
    }

    /// Kernel values `V` realized by this allocation, coordinate order.
    pub fn kernel_values(&self, spec: &SystemSpec) -> Vec<f64> {
        let k = spec.k();
        (0..2 * k)
            .map(|m| {
                let u = spec.user(m);
                (self.rates[m] * u.theta * spec.tc).exp()
            })
            .collect()
    }

    /// Checks the budget, power caps and quality floors.
    pub fn check(&self, spec: &SystemSpec) -> Result<()> {
        let used: f64 = self.bw.iter().sum();
        if used > spec.total_bw + 1e-6 {
            return Err(Error::Contract(format!(
                "bandwidth {used} exceeds the budget {}",
                spec.total_bw
            )));
        }
        for (k, pair) in spec.pairs.iter().enumerate() {
            for i in 0..2 {
                let p = self.power(i, k);
                if !(p >= 0.0 && p <= pair.users[i].p_max) {
                    return Err(Error::Contract(format!("power {p} of user {i} in pair {k} out of range")));
                }
            }
        }
        for (m, u) in spec.users().enumerate() {
            if self.psnr[m] < u.quality.q_min - 1e-6 {
                return Err(Error::Contract(format!(
                    "user {m} quality {} below floor {}",
                    self.psnr[m], u.quality.q_min
                )));
            }
        }
        Ok(())
    }
}

/// The allocation problem in the form the polyblock solver consumes.
#[derive(Debug, Clone)]
pub struct FdProblem<'s> {
    spec: &'s SystemSpec,
    projector: Projector,
    start: InitialBox,
    method: ProjectionMethod,
}

impl<'s> FdProblem<'s> {
    /// Validates the spec and runs the box initialization.
    pub fn new(spec: &'s SystemSpec) -> Result<Self> {
        spec.validate()?;
        let start = init_polyblock(spec)?;
        Ok(Self {
            spec,
            projector: Projector::new(spec, start.origin.clone()),
            start,
            method: ProjectionMethod::Separable,
        })
    }

    pub fn with_method(mut self, method: ProjectionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn spec(&self) -> &SystemSpec {
        self.spec
    }

    pub fn initial_box(&self) -> &InitialBox {
        &self.start
    }

    /// Projection of `y` towards the origin `u`.
    pub fn project_point(&self, y: &[f64]) -> Result<ProjectionOutcome> {
        self.projector.project(self.spec, y, self.method)
    }

    /// `y` is reachable by some allocation and meets every floor.
    pub fn is_feasible(&self, y: &[f64]) -> bool {
        if y.len() != self.start.origin.len() || y.iter().zip(&self.start.origin).any(|(a, u)| a < u) {
            return false;
        }
        self.project_point(y).is_ok_and(|p| p.lambda >= 1.0 - 1e-9)
    }
}

impl MonotoneProblem for FdProblem<'_> {
    type Witness = Allocation;

    fn dimension(&self) -> usize {
        2 * self.spec.k()
    }

    fn objective(&self, y: &[f64]) -> f64 {
        phi(y, self.spec)
    }

    fn origin(&self) -> &[f64] {
        &self.start.origin
    }

    fn initial_vertex(&self) -> &[f64] {
        &self.start.vertex
    }

    fn project(&self, y: &[f64]) -> Result<Projection<Allocation>> {
        let out = self.project_point(y)?;
        Ok(Projection {
            lambda: out.lambda,
            point: out.point,
            witness: out.allocation,
        })
    }

    fn separable(&self) -> bool {
        true
    }
}

/// Solves the allocation problem to the spec's tolerance.
pub fn solve_fd(spec: &SystemSpec) -> Result<(Allocation, SolverReport<Allocation>)> {
    let config = SolverConfig::default().with_eps(spec.eps);
    solve_fd_with(spec, &config)
}

pub fn solve_fd_with(spec: &SystemSpec, config: &SolverConfig) -> Result<(Allocation, SolverReport<Allocation>)> {
    let problem = FdProblem::new(spec)?;
    let report = solver::solve(&problem, config)?;
    Ok((report.best_witness.clone(), report))
}

/// Membership of `y` in the feasible region: above every floor, at least 1,
/// and reachable within the bandwidth budget.
pub fn feasibility_check(y: &[f64], spec: &SystemSpec) -> bool {
    FdProblem::new(spec).is_ok_and(|p| p.is_feasible(y))
}
