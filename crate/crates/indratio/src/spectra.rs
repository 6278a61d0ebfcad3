//! Dense symmetric eigensolver (cyclic Jacobi) and adjacency spectra.
//!
//! Jacobi is slower than tridiagonalization + QR but every rotation is
//! orthogonal by construction, which keeps eigenvector orthonormality at
//! machine precision — the random-eigenvector sampler depends on that.

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const JACOBI_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
/// Eigenvalues closer than this (times max(1, spectral radius)) are merged
/// into one eigenspace.
pub const GROUP_TOL_FACTOR: f64 = 1e-8;
/// Tolerance for looking an eigenvalue up by value.
pub const LOOKUP_TOL_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenGroup {
    /// Representative eigenvalue (mean of the merged values).
    pub value: f64,
    /// First column of the group in the decomposition.
    pub first: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub n: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Row-major n x n; column k is the unit eigenvector for eigenvalues[k].
    pub vectors: Vec<f64>,
    /// Ascending by value; groups partition the columns.
    pub groups: Vec<EigenGroup>,
}

/// Orthonormal basis of one eigenspace.
#[derive(Debug, Clone)]
pub struct EigenspaceBasis {
    pub value: f64,
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns of the returned matrix)
/// of a symmetric matrix given in row-major order.
pub fn jacobi_symmetric(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOL * frob;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };
    let mut converged = off(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip - s * (aiq + tau * aip);
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = aiq + s * (aip - tau * aiq);
                    a[q * n + i] = a[i * n + q];
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip - s * (viq + tau * vip);
                    v[i * n + q] = viq + s * (vip - tau * viq);
                }
            }
        }
        sweeps += 1;
        converged = off(&a) <= threshold;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new] = v[i * n + old];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Full spectral decomposition of the adjacency matrix.
pub fn decompose(g: &Graph) -> Result<SpectralDecomposition> {
    let n = g.n();
    let (eigenvalues, mut vectors) = jacobi_symmetric(&g.adjacency_matrix(), n)?;
    let rho = eigenvalues
        .first()
        .unwrap()
        .abs()
        .max(eigenvalues.last().unwrap().abs());
    let tol = GROUP_TOL_FACTOR * rho.max(1.0);
    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || eigenvalues[k] - eigenvalues[k - 1] > tol {
            let mult = k - start;
            let value = eigenvalues[start..k].iter().sum::<f64>() / mult as f64;
            groups.push(EigenGroup {
                value,
                first: start,
                multiplicity: mult,
            });
            start = k;
        }
    }
    for grp in &groups {
        regroup_orthonormal(&mut vectors, n, grp.first, grp.multiplicity);
    }
    Ok(SpectralDecomposition {
        n,
        eigenvalues,
        vectors,
        groups,
    })
}

/// Modified Gram-Schmidt over the columns of one eigenspace; Jacobi already
/// returns near-orthonormal columns, this pins them down.
fn regroup_orthonormal(vectors: &mut [f64], n: usize, first: usize, mult: usize) {
    for k in first..first + mult {
        for j in first..k {
            let dot: f64 = (0..n)
                .map(|i| vectors[i * n + j] * vectors[i * n + k])
                .sum();
            for i in 0..n {
                vectors[i * n + k] -= dot * vectors[i * n + j];
            }
        }
        let norm: f64 = (0..n)
            .map(|i| vectors[i * n + k] * vectors[i * n + k])
            .sum::<f64>()
            .sqrt();
        for i in 0..n {
            vectors[i * n + k] /= norm;
        }
    }
}

impl SpectralDecomposition {
    pub fn lambda_min(&self) -> f64 {
        self.groups.first().unwrap().value
    }

    pub fn lambda_max(&self) -> f64 {
        self.groups.last().unwrap().value
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lambda_min().abs().max(self.lambda_max().abs())
    }

    pub fn group_for(&self, lambda: f64) -> Option<&EigenGroup> {
        let tol = LOOKUP_TOL_FACTOR * self.spectral_radius().max(1.0);
        self.groups
            .iter()
            .min_by(|a, b| {
                (a.value - lambda)
                    .abs()
                    .partial_cmp(&(b.value - lambda).abs())
                    .unwrap()
            })
            .filter(|g| (g.value - lambda).abs() <= tol)
    }

    pub fn eigenspace_basis(&self, lambda: f64) -> Result<EigenspaceBasis> {
        let tol = LOOKUP_TOL_FACTOR * self.spectral_radius().max(1.0);
        let grp = self
            .group_for(lambda)
            .ok_or(Error::NoSuchEigenvalue { lambda, tol })?;
        let n = self.n;
        let vectors = (grp.first..grp.first + grp.multiplicity)
            .map(|k| (0..n).map(|i| self.vectors[i * n + k]).collect())
            .collect();
        Ok(EigenspaceBasis {
            value: grp.value,
            n,
            vectors,
        })
    }
}

/// Largest eigenpair residual max_k ||A v_k - lambda_k v_k||_2.
pub fn max_residual(g: &Graph, dec: &SpectralDecomposition) -> f64 {
    let n = g.n();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut norm2 = 0.0;
        for i in 0..n {
            let av: f64 = g.neighbors(i).iter().map(|&j| dec.vectors[j * n + k]).sum();
            let r = av - dec.eigenvalues[k] * dec.vectors[i * n + k];
            norm2 += r * r;
        }
        worst = worst.max(norm2.sqrt());
    }
    worst
}
