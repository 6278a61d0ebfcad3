//! Gaussian random eigenvectors and the independent sets of their strict
//! local extrema.
//!
//! A sample is X = sqrt(n/l) sum_k gamma_k e_k with gamma_k i.i.d. standard
//! normal over an orthonormal eigenspace basis; the scaling makes every
//! coordinate unit-variance on vertex-transitive graphs.  Strict local maxima
//! (I+) and minima (I-) of X are disjoint independent sets, which is what
//! links the spherical probabilities to the independence ratio.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, domain};
use crate::spectra::{self, EigenspaceBasis};
use crate::symmetry;
use rand::Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct EigenvectorSample {
    pub values: Vec<f64>,
    /// Strict local maxima, ascending.
    pub i_plus: Vec<usize>,
    /// Strict local minima, ascending.
    pub i_minus: Vec<usize>,
}

pub fn sample_random_eigenvector(
    g: &Graph,
    basis: &EigenspaceBasis,
    rng: &mut impl Rng,
) -> EigenvectorSample {
    assert_eq!(basis.n, g.n(), "basis does not match graph");
    let n = g.n();
    let scale = (n as f64 / basis.dim() as f64).sqrt();
    let mut values = vec![0.0; n];
    for e in &basis.vectors {
        let gamma = rng::standard_normal(rng);
        for (v, &ev) in e.iter().enumerate() {
            values[v] += gamma * ev;
        }
    }
    for v in &mut values {
        *v *= scale;
    }
    let (i_plus, i_minus) = strict_extrema(g, &values);
    EigenvectorSample {
        values,
        i_plus,
        i_minus,
    }
}

/// Values closer than this count as tied.  Exact ties have probability zero
/// under the Gaussian, but rounding noise in the basis (e.g. the constant top
/// eigenvector) would otherwise turn them into arbitrary strict comparisons.
const TIE_EPS: f64 = 1e-9;

/// Strict local maxima and minima; ties (within `TIE_EPS`) disqualify a
/// vertex from both sets, and vertices with no neighbors are excluded.
fn strict_extrema(g: &Graph, x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for v in 0..g.n() {
        if g.degree(v) == 0 {
            continue;
        }
        let mut is_max = true;
        let mut is_min = true;
        for &u in g.neighbors(v) {
            if x[u] >= x[v] - TIE_EPS {
                is_max = false;
            }
            if x[u] <= x[v] + TIE_EPS {
                is_min = false;
            }
            if !is_max && !is_min {
                break;
            }
        }
        if is_max {
            plus.push(v);
        }
        if is_min {
            minus.push(v);
        }
    }
    (plus, minus)
}

#[derive(Debug, Clone)]
pub struct IplusEstimate {
    pub lambda: f64,
    pub eigenspace_dim: usize,
    pub samples: u64,
    /// Mean of |I+|/n; on vertex-transitive graphs this is P(v in I+).
    pub estimate: f64,
    pub stderr: f64,
    pub vertex_transitive: Option<bool>,
    /// Per-vertex hit frequencies; reported when transitivity is not
    /// confirmed, because the mean alone is then vertex-dependent.
    pub per_vertex: Option<Vec<f64>>,
    pub warning: Option<String>,
}

struct Tally {
    s1: u64,
    s2: u128,
    per_vertex: Vec<u64>,
}

impl Tally {
    fn new(n: usize) -> Tally {
        Tally {
            s1: 0,
            s2: 0,
            per_vertex: vec![0; n],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.s1 += other.s1;
        self.s2 += other.s2;
        for (a, b) in self.per_vertex.iter_mut().zip(other.per_vertex) {
            *a += b;
        }
        self
    }
}

/// Monte Carlo estimate of P(v in I+) for eigenvalue `lambda`.
///
/// Deterministic for fixed (seed, n_samples): each sample uses its own
/// counter-based stream and only integer tallies cross thread boundaries.
pub fn estimate_iplus_probability(
    g: &Graph,
    lambda: f64,
    n_samples: u64,
    seed: u64,
) -> Result<IplusEstimate> {
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let dec = spectra::decompose(g)?;
    let basis = dec.eigenspace_basis(lambda)?;
    let sym = symmetry::analyze(g);
    let n = g.n();
    let tally = (0..n_samples)
        .into_par_iter()
        .fold(
            || Tally::new(n),
            |mut acc, i| {
                let mut rng = rng::substream(seed, domain::RANDEV, i);
                let sample = sample_random_eigenvector(g, &basis, &mut rng);
                let k = sample.i_plus.len() as u64;
                acc.s1 += k;
                acc.s2 += (k * k) as u128;
                for &v in &sample.i_plus {
                    acc.per_vertex[v] += 1;
                }
                acc
            },
        )
        .reduce(|| Tally::new(n), Tally::merge);
    let ns = n_samples as f64;
    let nf = n as f64;
    let mean = tally.s1 as f64 / ns / nf;
    let var = (tally.s2 as f64 / (nf * nf) - ns * mean * mean) / (ns - 1.0).max(1.0);
    let stderr = (var.max(0.0) / ns).sqrt();
    let (per_vertex, warning) = match sym.vertex_transitive {
        Some(true) => (None, None),
        Some(false) => (
            Some(tally.per_vertex.iter().map(|&c| c as f64 / ns).collect()),
            Some("graph is not vertex-transitive; the estimate is a vertex average".to_string()),
        ),
        None => (
            Some(tally.per_vertex.iter().map(|&c| c as f64 / ns).collect()),
            Some("vertex-transitivity unknown (symmetry budget exhausted)".to_string()),
        ),
    };
    Ok(IplusEstimate {
        lambda: basis.value,
        eigenspace_dim: basis.dim(),
        samples: n_samples,
        estimate: mean,
        stderr,
        vertex_transitive: sym.vertex_transitive,
        per_vertex,
        warning,
    })
}

#[derive(Debug, Clone)]
pub struct NeighborCovariance {
    pub root: usize,
    pub neighbors: Vec<usize>,
    pub lambda: f64,
    /// d x d covariance matrix of the neighbor coordinates, row-major;
    /// unit diagonal on vertex-transitive graphs.
    pub matrix: Vec<f64>,
    /// Pairwise angles (radians) between the difference vectors
    /// u_i = x - y_i, row-major d x d with zero diagonal; `None` when some
    /// difference has zero variance (the eigenvector is constant across an
    /// edge at the root), in which case the angles are undefined.
    pub angles: Option<Vec<f64>>,
}

impl NeighborCovariance {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    /// Sum over unordered pairs i < j.
    pub fn covariance_pair_sum(&self) -> f64 {
        let d = self.degree();
        let mut s = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                s += self.matrix[i * d + j];
            }
        }
        s
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        let d = self.degree();
        let mut out = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                out.push(self.matrix[i * d + j]);
            }
        }
        out
    }
}

/// Exact covariances of the neighbor coordinates of `root` under the random
/// eigenvector, and the pairwise angles of the difference vectors x - y_i.
pub fn neighbor_covariances(
    g: &Graph,
    basis: &EigenspaceBasis,
    root: usize,
) -> Result<NeighborCovariance> {
    assert_eq!(basis.n, g.n());
    let neighbors = g.neighbors(root).to_vec();
    let d = neighbors.len();
    if d == 0 {
        return Err(Error::Domain(format!("vertex {root} has no neighbors")));
    }
    let scale = g.n() as f64 / basis.dim() as f64;
    // Coordinate rows in eigenspace coordinates: cov(X_u, X_w) = scale * r_u . r_w.
    let row = |v: usize| -> Vec<f64> { basis.vectors.iter().map(|e| e[v]).collect() };
    let dot = move |a: &[f64], b: &[f64]| -> f64 {
        scale * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    };
    let x = row(root);
    let y: Vec<Vec<f64>> = neighbors.iter().map(|&u| row(u)).collect();
    let mut matrix = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            matrix[i * d + j] = dot(&y[i], &y[j]);
        }
        if matrix[i * d + i] < 1e-12 {
            return Err(Error::Domain(format!(
                "zero-variance coordinate at neighbor {}",
                neighbors[i]
            )));
        }
    }
    let u: Vec<Vec<f64>> = y
        .iter()
        .map(|yi| x.iter().zip(yi).map(|(a, b)| a - b).collect())
        .collect();
    let norms: Vec<f64> = u.iter().map(|ui| dot(ui, ui)).collect();
    let angles = if norms.iter().any(|&ni| ni < 1e-12) {
        None
    } else {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in i + 1..d {
                let cos = (dot(&u[i], &u[j]) / (norms[i] * norms[j]).sqrt()).clamp(-1.0, 1.0);
                let phi = cos.acos();
                a[i * d + j] = phi;
                a[j * d + i] = phi;
            }
        }
        Some(a)
    };
    Ok(NeighborCovariance {
        root,
        neighbors,
        lambda: basis.value,
        matrix,
        angles,
    })
}

pub fn is_independent_set(g: &Graph, set: &[usize]) -> bool {
    for (k, &u) in set.iter().enumerate() {
        for &v in &set[k + 1..] {
            if g.has_edge(u, v) {
                return false;
            }
        }
    }
    true
}
