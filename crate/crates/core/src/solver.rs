//! Polyblock outer approximation for `max Φ(y)` over `G ∩ H`, where `Φ` is
//! increasing, `G` is a compact normal set and `H = {y ≥ u}`.
//!
//! Each iteration picks the vertex `Y` of the current polyblock with the
//! largest `Φ` (an upper bound), projects it onto the upper boundary of `G`
//! along the segment from `u`, keeps the projection as an incumbent if it
//! improves, and cuts the box above the projection out of the polyblock.

use std::io::Write;

use crate::error::{Error, Result};
use crate::polyblock::{dominates, strictly_above, Polyblock};

/// Problem interface consumed by [`solve`].
pub trait MonotoneProblem {
    /// Whatever the projection produces besides the point itself, e.g. the
    /// physical allocation realizing it.
    type Witness: Clone;

    fn dimension(&self) -> usize;

    /// Increasing objective. May return `-inf` outside its domain.
    fn objective(&self, y: &[f64]) -> f64;

    /// Lower corner `u` of the conormal set; must itself be feasible.
    fn origin(&self) -> &[f64];

    /// A vertex whose box contains the whole feasible set.
    fn initial_vertex(&self) -> &[f64];

    /// Boundary point `u + λ(y - u)` of `G` on the segment from `u` to `y`.
    /// `λ ≥ 1` means `y` itself is in `G`.
    fn project(&self, y: &[f64]) -> Result<Projection<Self::Witness>>;

    /// `Φ` is a sum of one increasing function per coordinate. Enables
    /// snapping of near-face vertices (see [`SolverConfig::face_snap`]).
    fn separable(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection<W> {
    pub lambda: f64,
    pub point: Vec<f64>,
    pub witness: W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    /// Stop when `UB - CBV ≤ ε`.
    #[default]
    Absolute,
    /// Stop when `(1 + ε)·CBV ≥ UB`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub eps: f64,
    pub max_iter: usize,
    pub termination: Termination,
    /// Drop vertices that cannot beat the incumbent by more than `ε`.
    pub prune_by_value: bool,
    /// Share of the tolerance that may be spent on snapping. A new vertex
    /// whose coordinate `j` lies so close to `u_j` that `Φ` changes by at
    /// most `face_snap·ε/n` is moved onto the face `y_j = u_j`; otherwise
    /// rays towards it hardly move along `j` and the cut keeps reproducing
    /// it. Only used for separable objectives; 0 disables.
    pub face_snap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iter: 100_000,
            termination: Termination::Absolute,
            prune_by_value: true,
            face_snap: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Least objective a point must reach to matter against incumbent `best`.
    fn target(&self, best: f64) -> f64 {
        match self.termination {
            Termination::Absolute => best + self.eps,
            Termination::Relative if best > 0.0 => (1.0 + self.eps) * best,
            Termination::Relative => best,
        }
    }

    fn close_enough(&self, upper: f64, best: f64) -> bool {
        match self.termination {
            Termination::Absolute => upper - best <= self.eps,
            Termination::Relative => (1.0 + self.eps) * best >= upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// The selected vertex was already feasible, hence optimal.
    Boundary,
    IterationCap,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Boundary => "boundary",
            Status::IterationCap => "iteration_cap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverReport<W> {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub best_witness: W,
    /// `Φ` of the selected vertex, one entry per iteration.
    pub upper_bounds: Vec<f64>,
    /// Incumbent value after each iteration.
    pub best_values: Vec<f64>,
    /// Polyblock size at the start of each iteration.
    pub vertex_counts: Vec<usize>,
    /// Final upper bound minus final incumbent.
    pub gap: f64,
    pub iterations: usize,
    pub status: Status,
    pub eps: f64,
}

impl<W> SolverReport<W> {
    /// Writes `iteration,upper_bound,best_value,vertices` rows.
    pub fn write_trace<T: Write>(&self, out: T) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "upper_bound", "best_value", "vertices"])?;
        for i in 0..self.upper_bounds.len() {
            w.write_record([
                (i + 1).to_string(),
                format!("{:.12e}", self.upper_bounds[i]),
                format!("{:.12e}", self.best_values[i]),
                self.vertex_counts[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn map_witness<V>(self, f: impl FnOnce(W) -> V) -> SolverReport<V> {
        SolverReport {
            best_point: self.best_point,
            best_value: self.best_value,
            best_witness: f(self.best_witness),
            upper_bounds: self.upper_bounds,
            best_values: self.best_values,
            vertex_counts: self.vertex_counts,
            gap: self.gap,
            iterations: self.iterations,
            status: self.status,
            eps: self.eps,
        }
    }
}

/// Snapshot handed to the observer after each cut.
pub struct IterationEvent<'a> {
    pub iteration: usize,
    pub selected: &'a [f64],
    pub projection: &'a [f64],
    pub lambda: f64,
    pub upper_bound: f64,
    pub best_value: f64,
    pub before: &'a Polyblock,
    pub after: &'a Polyblock,
}

pub fn solve<P: MonotoneProblem>(problem: &P, config: &SolverConfig) -> Result<SolverReport<P::Witness>> {
    solve_observed(problem, config, |_| {})
}

/// [`solve`] with a callback invoked after every cut.
pub fn solve_observed<P: MonotoneProblem>(
    problem: &P,
    config: &SolverConfig,
    mut observe: impl FnMut(&IterationEvent<'_>),
) -> Result<SolverReport<P::Witness>> {
    if !(config.eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {}", config.eps)));
    }
    let n = problem.dimension();
    let u = problem.origin().to_vec();
    let top = problem.initial_vertex();
    if u.len() != n || top.len() != n {
        return Err(Error::Contract("origin or initial vertex has the wrong dimension".into()));
    }
    if !dominates(top, &u) {
        return Err(Error::Contract("initial vertex does not dominate the origin".into()));
    }

    // The origin is feasible by contract and seeds the incumbent.
    let seed = problem.project(&u)?;
    let mut best_point = u.clone();
    let mut best_value = problem.objective(&u);
    let mut best_witness = seed.witness;

    // Snapping coordinate j loses at most the η in force at the time, and
    // each coordinate can only be snapped once along any point's history.
    let mut snap_loss = vec![0.0; n];
    let snap_on = problem.separable() && config.face_snap > 0.0;
    let mut block = Polyblock::new(n);
    block.push(top, problem.objective(top));

    let mut upper_bounds = Vec::new();
    let mut best_values = Vec::new();
    let mut vertex_counts = Vec::new();
    let mut status = Status::IterationCap;
    let mut final_upper = f64::INFINITY;
    let mut loss = 0.0;

    for iteration in 1..=config.max_iter {
        let Some((sel, upper)) = block.best() else {
            status = Status::Converged;
            break;
        };
        let y = block.vertex(sel).to_vec();
        upper_bounds.push(upper);
        vertex_counts.push(block.len());
        final_upper = upper;

        if config.close_enough(upper + loss, best_value) {
            best_values.push(best_value);
            status = Status::Converged;
            break;
        }

        let proj = problem.project(&y)?;
        if proj.lambda >= 1.0 {
            best_point = y;
            best_value = upper;
            best_witness = proj.witness;
            best_values.push(best_value);
            status = Status::Boundary;
            break;
        }
        let x = proj.point;
        let fx = problem.objective(&x);
        if fx > best_value {
            best_value = fx;
            best_point = x.clone();
            best_witness = proj.witness;
        }
        best_values.push(best_value);
        if config.close_enough(upper + loss, best_value) {
            status = Status::Converged;
            break;
        }

        let eta = if snap_on {
            config.face_snap * (config.target(best_value) - best_value) / n as f64
        } else {
            0.0
        };
        let next = cut(
            &block,
            sel,
            &x,
            &u,
            |w, j| {
                let mut face = w.to_vec();
                face[j] = u[j];
                if problem.objective(w) - problem.objective(&face) <= eta {
                    snap_loss[j] = f64::max(snap_loss[j], eta);
                    w[j] = u[j];
                }
            },
            |v| problem.objective(v),
        );
        loss = snap_loss.iter().sum();
        let mut pruned = next.clone();
        if config.prune_by_value {
            pruned.retain(|_, f| !config.close_enough(f + loss, best_value));
        }
        observe(&IterationEvent {
            iteration,
            selected: &y,
            projection: &x,
            lambda: proj.lambda,
            upper_bound: upper,
            best_value,
            before: &block,
            after: &pruned,
        });
        if pruned.is_empty() {
            // Everything left was within ε of the incumbent.
            final_upper = next
                .best()
                .map_or(best_value, |(_, f)| f)
                .min(upper);
            status = Status::Converged;
            break;
        }
        block = pruned;
    }

    let gap = (final_upper + loss - best_value).max(0.0);
    Ok(SolverReport {
        best_point,
        best_value,
        best_witness,
        iterations: upper_bounds.len(),
        upper_bounds,
        best_values,
        vertex_counts,
        gap,
        status,
        eps: config.eps,
    })
}

/// Cuts `(x, ·]` out of `block`: every vertex strictly above `x`, plus the
/// selected one, is replaced by its neighbours towards `x`. Replacements
/// along a coordinate where the selected vertex sits on the origin's face
/// would reproduce the vertex itself and are skipped. Each new vertex is
/// offered to `snap` together with the coordinate it was cut along; those not
/// above `u` are dropped, then improper ones are removed.
fn cut(
    block: &Polyblock,
    sel: usize,
    x: &[f64],
    u: &[f64],
    mut snap: impl FnMut(&mut [f64], usize),
    phi: impl Fn(&[f64]) -> f64,
) -> Polyblock {
    let n = block.dim();
    let mut kept = Polyblock::new(n);
    let mut hit = Vec::new();
    for i in 0..block.len() {
        let v = block.vertex(i);
        if i == sel || strictly_above(v, x) {
            hit.push(i);
        } else {
            kept.push(v, block.value(i));
        }
    }
    let survivors = kept.len();
    let mut fresh: Vec<Vec<f64>> = Vec::new();
    for &i in &hit {
        let v = block.vertex(i);
        for j in 0..n {
            if x[j] >= v[j] {
                continue;
            }
            let mut w = v.to_vec();
            w[j] = x[j];
            snap(&mut w, j);
            if !dominates(&w, u) {
                continue;
            }
            fresh.push(w);
        }
    }
    // Old survivors form an antichain and no new vertex can dominate one of
    // them, so only new vertices need checking.
    for (k, w) in fresh.iter().enumerate() {
        let beaten_by_old = (0..survivors).any(|i| dominates(kept.vertex(i), w));
        let beaten_by_new = fresh.iter().enumerate().any(|(l, z)| {
            l != k && dominates(z, w) && (!dominates(w, z) || l < k)
        });
        if !beaten_by_old && !beaten_by_new {
            kept.push(w, phi(w));
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `max Σ y` over the unit ball quadrant.
    struct Disc;

    impl MonotoneProblem for Disc {
        type Witness = ();
        fn dimension(&self) -> usize {
            2
        }
        fn objective(&self, y: &[f64]) -> f64 {
            y[0] + y[1]
        }
        fn origin(&self) -> &[f64] {
            &[0.0, 0.0]
        }
        fn initial_vertex(&self) -> &[f64] {
            &[1.0, 1.0]
        }
        fn project(&self, y: &[f64]) -> Result<Projection<()>> {
            let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
            let lambda = if r == 0.0 { f64::INFINITY } else { 1.0 / r };
            let l = lambda.min(1.0);
            Ok(Projection {
                lambda,
                point: vec![l * y[0], l * y[1]],
                witness: (),
            })
        }
    }

    struct Segment(f64);

    impl MonotoneProblem for Segment {
        type Witness = ();
        fn dimension(&self) -> usize {
            1
        }
        fn objective(&self, y: &[f64]) -> f64 {
            y[0]
        }
        fn origin(&self) -> &[f64] {
            &[0.0]
        }
        fn initial_vertex(&self) -> &[f64] {
            std::slice::from_ref(&self.0)
        }
        fn project(&self, y: &[f64]) -> Result<Projection<()>> {
            Ok(Projection {
                lambda: if y[0] <= self.0 { f64::INFINITY } else { self.0 / y[0] },
                point: vec![y[0].min(self.0)],
                witness: (),
            })
        }
    }

    #[test]
    fn one_dimensional_boundary_in_one_step() {
        let r = solve(&Segment(2.5), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, Status::Boundary);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.best_point, vec![2.5]);
    }

    #[test]
    fn disc_converges_to_symmetric_optimum() {
        let cfg = SolverConfig::default().with_eps(1e-4);
        let r = solve(&Disc, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.best_value - 2f64.sqrt()).abs() <= 1e-4);
        assert!(r.gap <= 1e-4);
        let h = 0.5 * 2f64.sqrt();
        assert!((r.best_point[0] - h).abs() < 1e-2 && (r.best_point[1] - h).abs() < 1e-2);
        assert!(r.upper_bounds.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.best_values.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.upper_bounds.iter().zip(&r.best_values).all(|(u, b)| b <= u));
    }

    #[test]
    fn relative_termination() {
        let cfg = SolverConfig {
            termination: Termination::Relative,
            ..SolverConfig::default().with_eps(1e-3)
        };
        let r = solve(&Disc, &cfg).unwrap();
        assert!(r.best_value * (1.0 + 1e-3) >= 2f64.sqrt());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = SolverConfig {
            max_iter: 3,
            ..SolverConfig::default().with_eps(1e-9)
        };
        let r = solve(&Disc, &cfg).unwrap();
        assert_eq!(r.status, Status::IterationCap);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn trace_csv_has_one_row_per_iteration() {
        let r = solve(&Disc, &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        r.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), r.iterations + 1);
        assert!(text.starts_with("iteration,upper_bound,best_value,vertices"));
    }

    #[test]
    fn rejects_nonpositive_eps() {
        assert!(solve(&Disc, &SolverConfig::default().with_eps(0.0)).is_err());
    }
}
