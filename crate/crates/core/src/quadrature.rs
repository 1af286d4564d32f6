//! Gauss–Laguerre rules for integrals of the form `∫₀^∞ e^{-x} f(x) dx`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Laguerre rule (weight `e^{-x}`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Builds the rule by Newton iteration on the three-term Laguerre
    /// recurrence, seeded with the usual asymptotic node guesses.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::Domain(format!(
                "quadrature order must be at least 2, got {order}"
            )));
        }
        let n = order as f64;
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let mut z = 0.0f64;
        for i in 0..order {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * n),
                1 => z + 15.0 / (1.0 + 2.5 * n),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut step = f64::INFINITY;
            for _ in 0..100 {
                let mut p1 = 1.0f64;
                let mut p2 = 0.0;
                for j in 1..=order {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
                }
                let pp = n * (p1 - p2) / z;
                step = p1 / pp;
                z -= step;
                if step.abs() <= 4.0 * f64::EPSILON * z.abs() {
                    break;
                }
            }
            // Newton may dither at the last ulp; only a large final step
            // counts as failure.
            if !(step.abs() <= 1e-12 * z.abs()) {
                return Err(Error::Degenerate(format!(
                    "Laguerre node {i} of order {order} did not converge"
                )));
            }
            // Christoffel form: Laguerre polynomials are orthonormal under
            // e^{-x}, and summing their squares is far better conditioned
            // than the derivative formula.
            let (mut l0, mut l1) = (1.0f64, 1.0 - z);
            let mut christoffel = 1.0 + l1 * l1;
            for j in 1..order - 1 {
                let jf = j as f64;
                let l2 = ((2.0 * jf + 1.0 - z) * l1 - jf * l0) / (jf + 1.0);
                christoffel += l2 * l2;
                l0 = l1;
                l1 = l2;
            }
            nodes.push(z);
            weights.push(1.0 / christoffel);
        }
        Ok(Self { nodes, weights })
    }

    /// Shared, lazily built rule of the given order.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().unwrap().get(&order) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .unwrap()
            .entry(order)
            .or_insert_with(|| Arc::clone(&rule));
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫₀^∞ e^{-x} f(x) dx`
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
