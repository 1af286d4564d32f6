//! Polyblocks: finite unions of boxes `[0, v]` in the nonnegative orthant,
//! represented by their proper vertex sets.

/// Relative tolerance used for dominance and equality of coordinates.
pub const DOMINANCE_TOL: f64 = 1e-12;

#[inline]
fn slack(b: f64) -> f64 {
    DOMINANCE_TOL * b.abs().max(1.0)
}

/// `a ≥ b` componentwise, up to [`DOMINANCE_TOL`].
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x >= y - slack(y))
}

/// `a > b` in every coordinate.
pub fn strictly_above(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x > y)
}

/// Keeps the maximal elements of `vertices` under componentwise `≤`.
/// Among numerically equal vertices the first one survives.
pub fn remove_improper(vertices: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = vertices.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[j] || !dominates(&vertices[j], &vertices[i]) {
                continue;
            }
            // j dominates i. Mutual dominance means a tie: drop the later one.
            if !dominates(&vertices[i], &vertices[j]) || j < i {
                keep[i] = false;
                break;
            }
        }
    }
    vertices
        .into_iter()
        .zip(keep)
        .filter_map(|(v, k)| k.then_some(v))
        .collect()
}

/// Replaces every vertex in `selected` by its `n` neighbours
/// `v + (x_j - v_j)·e_j`, which cuts the box `(x, v]` out of the polyblock.
/// Improper vertices are not removed here.
pub fn cut_polyblock(vertices: &[Vec<f64>], selected: &[usize], x: &[f64]) -> crate::Result<Vec<Vec<f64>>> {
    for &s in selected {
        let v = vertices.get(s).ok_or_else(|| {
            crate::Error::Contract(format!("selected index {s} out of range"))
        })?;
        if v.len() != x.len() {
            return Err(crate::Error::Contract("dimension mismatch".into()));
        }
        if !dominates(v, x) {
            return Err(crate::Error::Contract(format!(
                "cut point exceeds selected vertex {s} in some coordinate"
            )));
        }
    }
    let mut out: Vec<Vec<f64>> = vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| !selected.contains(i))
        .map(|(_, v)| v.clone())
        .collect();
    for &s in selected {
        for j in 0..x.len() {
            let mut w = vertices[s].clone();
            w[j] = x[j].min(w[j]);
            out.push(w);
        }
    }
    Ok(out)
}

/// Proper vertex set with cached objective values, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyblock {
    dim: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
}

impl Polyblock {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Cached objective value of vertex `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Appends without any properness check.
    pub fn push(&mut self, v: &[f64], value: f64) {
        assert_eq!(v.len(), self.dim, "vertex dimension");
        self.coords.extend_from_slice(v);
        self.values.push(value);
    }

    /// `y` lies in some box `[0, v]`.
    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter().all(|&c| c >= 0.0) && self.vertices().any(|v| dominates(v, y))
    }

    /// Index and value of the vertex with the largest objective; ties go
    /// to the lowest index.
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &f) in self.values.iter().enumerate() {
            if best.map_or(true, |(_, b)| f > b) {
                best = Some((i, f));
            }
        }
        best
    }

    pub fn to_vec(&self) -> Vec<Vec<f64>> {
        self.vertices().map(<[f64]>::to_vec).collect()
    }

    /// Keeps vertices for which `keep(vertex, value)` holds.
    pub(crate) fn retain(&mut self, mut keep: impl FnMut(&[f64], f64) -> bool) {
        let dim = self.dim;
        let mut w = 0;
        for r in 0..self.len() {
            let v = r * dim;
            if keep(&self.coords[v..v + dim], self.values[r]) {
                self.coords.copy_within(v..v + dim, w * dim);
                self.values[w] = self.values[r];
                w += 1;
            }
        }
        self.coords.truncate(w * dim);
        self.values.truncate(w);
    }
}
