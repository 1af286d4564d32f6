//! Reference allocations: the equal-bandwidth baseline (EBOP) and a brute
//! force grid oracle for small instances.

use crate::ec::Link;
use crate::error::{Error, Infeasibility, Result};
use crate::fd::pair::PairModel;
use crate::fd::{Allocation, SystemSpec};

/// Equal bandwidth `B/K` per pair, powers chosen per pair to maximize
/// `ω_1·Q_1 + ω_2·Q_2` under the caps and quality floors.
///
/// Raising both powers of a pair by a common factor raises both kernel
/// values, so an interior power pair is never optimal and only the two edges
/// with one user at peak are searched.
pub fn ebop(spec: &SystemSpec) -> Result<Allocation> {
    spec.validate()?;
    let k_pairs = spec.k();
    let share = spec.total_bw / k_pairs as f64;
    let floors: Vec<f64> = spec.origin().iter().map(|u| u.ln()).collect();
    let (mut p1, mut p2) = (Vec::with_capacity(k_pairs), Vec::with_capacity(k_pairs));
    for k in 0..k_pairs {
        let pair = PairModel::new(spec, k);
        let score = PairScore::new(spec, k, &pair, share);
        let t = [floors[k], floors[k_pairs + k]];
        let mut best: Option<(f64, [f64; 2])> = None;
        for pinned in 0..2 {
            let Some((value, p)) = edge_search(&score, &pair, t, pinned, share) else {
                continue;
            };
            if best.map_or(true, |(b, _)| value > b) {
                best = Some((value, p));
            }
        }
        let (_, p) = best.ok_or(Infeasibility::FixedShare { pair: k, bandwidth: share })?;
        p1.push(p[0]);
        p2.push(p[1]);
    }
    Allocation::evaluate(spec, vec![share; k_pairs], p1, p2)
}

const GOLDEN_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 32;

/// Best free power on the edge where user `pinned` is at peak. The feasible
/// range is an interval: the free user's floor bounds it below, the pinned
/// user's floor (through interference) above. A coarse scan picks the
/// bracket, golden-section refines it.
fn edge_search(score: &PairScore, pair: &PairModel, t: [f64; 2], pinned: usize, bw: f64) -> Option<(f64, [f64; 2])> {
    let i = pinned;
    let j = 1 - i;
    let pi = pair.p_max[i];
    let pj_max = pair.p_max[j];
    let lo = pair.link(j).power_for(t[j], pi, bw, pj_max)?;
    let hi = pair.link(i).interference_for(t[i], pi, bw, pj_max)?;
    if lo > hi {
        return None;
    }
    let powers = |pj: f64| {
        let mut p = [0.0; 2];
        p[i] = pi;
        p[j] = pj;
        p
    };
    let f = |pj: f64| score.value(powers(pj));

    let h = (hi - lo) / SCAN_POINTS as f64;
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|s| if s == SCAN_POINTS { hi } else { lo + s as f64 * h }).collect();
    let values: Vec<f64> = grid.iter().map(|&p| f(p)).collect();
    let (mut arg, mut best) = (0, values[0]);
    for (s, &v) in values.iter().enumerate() {
        if v > best {
            (arg, best) = (s, v);
        }
    }
    let (mut a, mut b) = (grid[arg.saturating_sub(1)], grid[(arg + 1).min(SCAN_POINTS)]);
    let mut best_p = grid[arg];
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL * pj_max {
        if fc >= fd {
            (b, d, fd) = (d, c, fc);
            c = b - r * (b - a);
            fc = f(c);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    for (p, v) in [(c, fc), (d, fd)] {
        if v > best {
            (best, best_p) = (v, p);
        }
    }
    best.is_finite().then(|| (best, powers(best_p)))
}

/// Weighted quality of one pair on a fixed bandwidth.
struct PairScore<'a> {
    pair: &'a PairModel,
    bw: f64,
    users: [(f64, crate::quality::QualityModel, f64); 2],
}

impl<'a> PairScore<'a> {
    fn new(spec: &SystemSpec, k: usize, pair: &'a PairModel, bw: f64) -> Self {
        let users = [0, 1].map(|i| {
            let u = &spec.pairs[k].users[i];
            (u.weight, u.quality, u.theta * spec.tc)
        });
        Self { pair, bw, users }
    }

    /// `-inf` when a floor is missed.
    fn value(&self, p: [f64; 2]) -> f64 {
        let mut total = 0.0;
        for (i, &(w, q, scale)) in self.users.iter().enumerate() {
            let link: Link<'_> = self.pair.link(i);
            let psnr = q.psnr_bps(link.ln_v(p[i], p[1 - i], self.bw) / scale);
            if psnr < q.q_min - 1e-9 || psnr.is_nan() {
                return f64::NEG_INFINITY;
            }
            if w != 0.0 {
                total += w * psnr;
            }
        }
        total
    }
}

/// Resolution of [`grid_oracle`]. Power axes span `[0, P^max]`; for two
/// pairs the first pair's bandwidth share runs over the interior points
/// `B·s/(split + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleGrid {
    /// Points per axis of the full power box.
    pub box_points: usize,
    /// Points along each edge with one user at peak power.
    pub edge_points: usize,
    /// Bandwidth splits, used only for two pairs.
    pub split_points: usize,
}

impl OracleGrid {
    pub fn new(box_points: usize, edge_points: usize, split_points: usize) -> Result<Self> {
        if box_points < 2 || edge_points < 2 || split_points < 1 {
            return Err(Error::Domain("oracle grid needs at least two points per power axis".into()));
        }
        Ok(Self { box_points, edge_points, split_points })
    }
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { box_points: 30, edge_points: 500, split_points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub allocation: Allocation,
    /// Best weighted sum quality on the grid.
    pub value: f64,
    /// How much the continuous optimum may exceed `value`. Derived from the
    /// drops to neighbouring grid points around each candidate maximum,
    /// which bounds the gap when the objective is locally concave along
    /// each axis.
    pub resolution_bound: f64,
}

/// Exhaustive search over the grid for `K ≤ 2`, with the whole budget in
/// use. Deterministic.
pub fn grid_oracle(spec: &SystemSpec, grid: &OracleGrid) -> Result<OracleResult> {
    spec.validate()?;
    OracleGrid::new(grid.box_points, grid.edge_points, grid.split_points)?;
    let k_pairs = spec.k();
    if k_pairs > 2 {
        return Err(Error::Guard(format!("grid oracle handles at most 2 pairs, got {k_pairs}")));
    }
    let models: Vec<PairModel> = (0..k_pairs).map(|k| PairModel::new(spec, k)).collect();
    let splits: Vec<f64> = if k_pairs == 1 {
        vec![spec.total_bw]
    } else {
        (1..=grid.split_points)
            .map(|s| spec.total_bw * s as f64 / (grid.split_points + 1) as f64)
            .collect()
    };

    // Per split: each pair's best grid point and its own bound.
    let mut rows: Vec<(f64, f64, Vec<PairBest>)> = Vec::with_capacity(splits.len());
    for &b1 in &splits {
        let shares = if k_pairs == 1 { vec![b1] } else { vec![b1, spec.total_bw - b1] };
        let bests: Vec<PairBest> = shares
            .iter()
            .enumerate()
            .map(|(k, &bw)| pair_best(&PairScore::new(spec, k, &models[k], bw), &models[k], grid))
            .collect();
        let value = if bests.iter().all(|b| b.value.is_finite()) {
            bests.iter().map(|b| b.value).sum()
        } else {
            f64::NEG_INFINITY
        };
        let upper = bests.iter().map(|b| b.upper).sum();
        rows.push((value, upper, bests));
    }

    let mut arg = None;
    for (s, row) in rows.iter().enumerate() {
        if row.0.is_finite() && arg.map_or(true, |a: usize| row.0 > rows[a].0) {
            arg = Some(s);
        }
    }
    let arg = arg.ok_or(Error::Infeasible(Infeasibility::TotalBandwidth {
        required: f64::NAN,
        available: spec.total_bw,
    }))?;
    let (value, upper, bests) = &rows[arg];
    let split_drop = chord_bound(&rows.iter().map(|r| r.0).collect::<Vec<_>>(), arg);
    let resolution_bound = (upper - value).max(0.0) + split_drop;

    let bw = if k_pairs == 1 { vec![spec.total_bw] } else { vec![splits[arg], spec.total_bw - splits[arg]] };
    let allocation = Allocation::evaluate(
        spec,
        bw,
        bests.iter().map(|b| b.p[0]).collect(),
        bests.iter().map(|b| b.p[1]).collect(),
    )?;
    Ok(OracleResult { value: allocation.weighted_sum_quality, allocation, resolution_bound })
}

#[derive(Debug, Clone, Copy)]
struct PairBest {
    value: f64,
    p: [f64; 2],
    /// Grid value plus the chord bound of the better edge.
    upper: f64,
}

fn pair_best(score: &PairScore, pair: &PairModel, grid: &OracleGrid) -> PairBest {
    let mut best = PairBest { value: f64::NEG_INFINITY, p: [0.0; 2], upper: f64::NEG_INFINITY };
    let n = grid.box_points;
    for a in 0..n {
        for b in 0..n {
            let p = [
                pair.p_max[0] * a as f64 / (n - 1) as f64,
                pair.p_max[1] * b as f64 / (n - 1) as f64,
            ];
            let v = score.value(p);
            if v > best.value {
                best.value = v;
                best.p = p;
            }
        }
    }
    let e = grid.edge_points;
    for pinned in 0..2 {
        let j = 1 - pinned;
        let points: Vec<[f64; 2]> = (0..e)
            .map(|s| {
                let mut p = [0.0; 2];
                p[pinned] = pair.p_max[pinned];
                p[j] = pair.p_max[j] * s as f64 / (e - 1) as f64;
                p
            })
            .collect();
        let values: Vec<f64> = points.iter().map(|&p| score.value(p)).collect();
        let mut arg = 0;
        for (s, &v) in values.iter().enumerate() {
            if v > values[arg] {
                arg = s;
            }
        }
        if values[arg] > best.value {
            best.value = values[arg];
            best.p = points[arg];
        }
        if values[arg].is_finite() {
            best.upper = best.upper.max(values[arg] + chord_bound(&values, arg));
        }
    }
    best.upper = best.upper.max(best.value);
    best
}

/// For a function concave along the axis, its maximum on the cells next to
/// grid point `i` exceeds `f[i]` by at most the larger drop to a neighbour.
/// Infinite when `i` has no finite neighbour.
fn chord_bound(f: &[f64], i: usize) -> f64 {
    let left = i.checked_sub(1).map(|l| f[l]).filter(|v| v.is_finite());
    let right = f.get(i + 1).copied().filter(|v| v.is_finite());
    match (left, right) {
        (None, None) if f.len() > 1 => f64::INFINITY,
        (None, None) => 0.0,
        (l, r) => [l, r].into_iter().flatten().map(|v| f[i] - v).fold(0.0, f64::max),
    }
}
