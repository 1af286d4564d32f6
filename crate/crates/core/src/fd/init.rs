use crate::error::{Error, Infeasibility, Result};

use super::pair::PairModel;
use super::SystemSpec;

/// Enclosing box of the feasible region.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBox {
    /// `u = max(V^min, 1)`, the feasible floor.
    pub origin: Vec<f64>,
    /// `v′`, the componentwise maximum kernel value of any feasible point.
    pub vertex: Vec<f64>,
    /// Least bandwidth each pair needs to sit at its floors.
    pub min_bandwidth: Vec<f64>,
}

/// Builds the initial box `[0, v′]` around all feasible points, or reports
/// why there are none.
///
/// Each user's largest kernel value compatible with the partner's floor is
/// taken at the most bandwidth the pair can get, `B - Σ_{l≠k} B_l^min`.
pub fn init_polyblock(spec: &SystemSpec) -> Result<InitialBox> {
    spec.validate()?;
    let k_pairs = spec.k();
    let origin = spec.origin();
    let ln_u: Vec<f64> = origin.iter().map(|u| u.ln()).collect();
    let ceiling = 10.0 * spec.total_bw;
    let pairs: Vec<PairModel> = (0..k_pairs).map(|k| PairModel::new(spec, k)).collect();

    let mut min_bandwidth = Vec::with_capacity(k_pairs);
    for (k, pair) in pairs.iter().enumerate() {
        let t = [ln_u[k], ln_u[k_pairs + k]];
        let point = pair
            .min_bandwidth_any(t, [0.0; 2], ceiling, [None, None])
            .ok_or(Infeasibility::PowerCeiling { pair: k })?;
        min_bandwidth.push(point.bw);
    }
    let required: f64 = min_bandwidth.iter().sum();
    if required > spec.total_bw {
        return Err(Infeasibility::TotalBandwidth {
            required,
            available: spec.total_bw,
        }
        .into());
    }

    let mut vertex = origin.clone();
    for (k, pair) in pairs.iter().enumerate() {
        let bw = spec.total_bw - (required - min_bandwidth[k]);
        for i in 0..2 {
            let j = 1 - i;
            let t_j = ln_u[j * k_pairs + k];
            let best = pair.max_ln_v(i, t_j, bw).ok_or_else(|| {
                Error::Degenerate(format!(
                    "pair {k}: no power setting meets the floor of user {j} on its largest share"
                ))
            })?;
            if best > 700.0 {
                return Err(Error::Domain(format!(
                    "pair {k}, user {i}: kernel value e^{best:.1} overflows; reduce theta, bandwidth or tc"
                )));
            }
            let m = i * k_pairs + k;
            vertex[m] = best.exp().max(origin[m]);
        }
    }
    Ok(InitialBox {
        origin,
        vertex,
        min_bandwidth,
    })
}
