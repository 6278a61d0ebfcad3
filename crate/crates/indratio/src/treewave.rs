//! Gaussian wave functions on the d-regular tree, truncated to a finite
//! ball with exact covariances.
//!
//! Taking covariances of the eigenvector equation with a fixed vertex turns
//! it into a three-term recursion for the radial covariance sequence
//! sigma_k = cov(X_u, X_v) at distance k.  A radius-R ball with entries
//! sigma_{dist(u,v)} then carries the exact joint law of the wave function
//! restricted to the ball, so the strict-maximum event at the root has
//! exactly the density the infinite process would give it.

use crate::error::{Error, Result};
use crate::rng::{self, domain};
use crate::sphere::{self, McEstimate};
use rand::Rng;
use rayon::prelude::*;

/// Largest ball handled; 1 + d ((d-1)^R - 1)/(d-2) vertices for degree d.
pub const MAX_BALL: usize = 4096;

const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Edge of the spectrum of the d-regular tree: 2 sqrt(d - 1).
pub fn spectral_edge(d: usize) -> f64 {
    2.0 * ((d - 1) as f64).sqrt()
}

/// Radial covariances sigma_0..sigma_{k_max}:
/// sigma_0 = 1, d sigma_1 = lambda, sigma_{k-1} + (d-1) sigma_{k+1} = lambda sigma_k.
pub fn tree_covariance_sequence(d: usize, lambda: f64, k_max: usize) -> Result<Vec<f64>> {
    if d < 3 {
        return Err(Error::Domain(format!("need d >= 3, got {d}")));
    }
    let edge = spectral_edge(d);
    if !lambda.is_finite() || lambda.abs() > edge + 1e-12 {
        return Err(Error::Domain(format!(
            "lambda = {lambda} outside the tree spectrum [-{edge:.6}, {edge:.6}]; \
             the covariance recursion diverges there"
        )));
    }
    let lam = lambda.clamp(-edge, edge);
    let mut sigma = Vec::with_capacity(k_max + 1);
    sigma.push(1.0);
    if k_max >= 1 {
        sigma.push(lam / d as f64);
    }
    for k in 1..k_max {
        sigma.push((lam * sigma[k] - sigma[k - 1]) / (d - 1) as f64);
    }
    Ok(sigma)
}

pub fn ball_size(d: usize, radius: usize) -> usize {
    let mut total = 1usize;
    let mut layer = 1usize;
    for depth in 0..radius {
        layer = layer.saturating_mul(if depth == 0 { d } else { d - 1 });
        total = total.saturating_add(layer);
    }
    total
}

#[derive(Debug, Clone)]
pub struct BallModel {
    pub d: usize,
    pub lambda: f64,
    pub radius: usize,
    /// sigma_0..sigma_{2R}, enough for any pair in the ball.
    pub sigma: Vec<f64>,
    /// Diagonal jitter that made the Cholesky succeed.
    pub jitter: f64,
    parent: Vec<usize>,
    depth: Vec<usize>,
    /// Lower-triangular factor, packed rows: row i at i(i+1)/2, length i+1.
    chol: Vec<f64>,
}

impl BallModel {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Root is vertex 0; its neighbors are 1..=d in build order.
    pub fn root_neighbors(&self) -> std::ops::Range<usize> {
        1..self.d + 1
    }

    pub fn depth_of(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn distance(&self, mut u: usize, mut v: usize) -> usize {
        let mut steps = 0;
        while self.depth[u] > self.depth[v] {
            u = self.parent[u];
            steps += 1;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v];
            steps += 1;
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
            steps += 2;
        }
        steps
    }

    pub fn covariance(&self, u: usize, v: usize) -> f64 {
        self.sigma[self.distance(u, v)]
    }

    /// One field sample; entry v is X_v.
    pub fn sample_field(&self, rng: &mut impl Rng) -> Vec<f64> {
        let n = self.n();
        let mut gauss = vec![0.0; n];
        rng::fill_standard_normal(rng, &mut gauss);
        (0..n)
            .map(|i| {
                let row = &self.chol[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                row.iter().zip(&gauss).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

pub fn build_ball_covariance(d: usize, lambda: f64, radius: usize) -> Result<BallModel> {
    let n = ball_size(d, radius);
    if n > MAX_BALL {
        return Err(Error::TooLarge { n, limit: MAX_BALL });
    }
    let sigma = tree_covariance_sequence(d, lambda, 2 * radius.max(1))?;
    let mut parent = vec![0usize];
    let mut depth = vec![0usize];
    let mut prev_layer = vec![0usize];
    for r in 1..=radius {
        let mut layer = Vec::new();
        for &p in &prev_layer {
            for _ in 0..if p == 0 { d } else { d - 1 } {
                layer.push(parent.len());
                parent.push(p);
                depth.push(r);
            }
        }
        prev_layer = layer;
    }
    debug_assert_eq!(parent.len(), n);

    let model_dist = |u: usize, v: usize| -> usize {
        let (mut u, mut v) = (u, v);
        let mut steps = 0;
        while depth[u] > depth[v] {
            u = parent[u];
            steps += 1;
        }
        while depth[v] > depth[u] {
            v = parent[v];
            steps += 1;
        }
        while u != v {
            u = parent[u];
            v = parent[v];
            steps += 2;
        }
        steps
    };
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = sigma[model_dist(i, j)];
            cov[i * n + j] = s;
            cov[j * n + i] = s;
        }
    }
    let mut worst_pivot = f64::INFINITY;
    for &jitter in &JITTER_LADDER {
        match cholesky_packed(&cov, n, jitter) {
            Ok(chol) => {
                return Ok(BallModel {
                    d,
                    lambda,
                    radius,
                    sigma,
                    jitter,
                    parent,
                    depth,
                    chol,
                })
            }
            Err(pivot) => worst_pivot = worst_pivot.min(pivot),
        }
    }
    Err(Error::Degenerate(worst_pivot))
}

/// Packed lower-triangular Cholesky of cov + jitter*I; Err carries the
/// offending pivot.
fn cholesky_packed(cov: &[f64], n: usize, jitter: f64) -> std::result::Result<Vec<f64>, f64> {
    let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let mut l = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        for j in 0..=i {
            let mut s = cov[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[idx(i, k)] * l[idx(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(s);
                }
                l[idx(i, i)] = s.sqrt();
            } else {
                l[idx(i, j)] = s / l[idx(j, j)];
            }
        }
    }
    Ok(l)
}

/// Frequency of the event "the root value strictly exceeds all its
/// neighbors' values"; deterministic in (seed, n_samples).
pub fn root_max_frequency(model: &BallModel, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, domain::TREE, i);
            let x = model.sample_field(&mut rng);
            u64::from(model.root_neighbors().all(|u| x[0] > x[u]))
        })
        .sum();
    Ok(sphere::binomial_estimate(hits, n_samples))
}

/// Density of the factor-of-iid independent set carved from the wave
/// function with eigenvalue `lambda` on the d-regular tree.
pub fn estimate_tree_density(
    d: usize,
    lambda: f64,
    radius: usize,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let model = build_ball_covariance(d, lambda, radius)?;
    root_max_frequency(&model, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::f64::consts::SQRT_2;

    const SEED: u64 = 0x7ee;

    #[test]
    fn sequence_values() {
        let lam = -2.0 * SQRT_2;
        let s = tree_covariance_sequence(3, lam, 8).unwrap();
        assert!((s[1] - lam / 3.0).abs() < 1e-15); // -0.94281...
        assert!((s[2] - 5.0 / 6.0).abs() < 1e-15);
        for d in [3usize, 5, 9] {
            let s = tree_covariance_sequence(d, 0.0, 4).unwrap();
            assert_eq!(s[1], 0.0);
            assert!((s[2] + 1.0 / (d as f64 - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn recursion_residuals_and_boundedness() {
        for d in [3usize, 4] {
            let edge = spectral_edge(d);
            for i in 0..20 {
                let lam = -edge + 2.0 * edge * i as f64 / 19.0;
                let s = tree_covariance_sequence(d, lam, 21).unwrap();
                assert_eq!(s[0], 1.0);
                assert!((d as f64 * s[1] - lam).abs() <= 1e-12);
                for k in 1..=19 {
                    let res = s[k - 1] + (d - 1) as f64 * s[k + 1] - lam * s[k];
                    assert!(res.abs() <= 1e-12, "d={d} lam={lam} k={k}: {res}");
                }
                for (k, v) in s.iter().enumerate() {
                    assert!(v.abs() <= 1.0 + 1e-9, "d={d} lam={lam} sigma_{k}={v}");
                }
            }
        }
    }

    #[test]
    fn out_of_spectrum_rejected() {
        assert!(tree_covariance_sequence(3, -3.0, 5).is_err());
        assert!(tree_covariance_sequence(3, 2.9, 5).is_err());
        assert!(build_ball_covariance(3, -3.0, 2).is_err());
        // the edge itself is inside
        assert!(tree_covariance_sequence(3, -2.0 * SQRT_2, 5).is_ok());
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_size(3, 0), 1);
        assert_eq!(ball_size(3, 1), 4);
        assert_eq!(ball_size(3, 2), 10);
        assert_eq!(ball_size(3, 6), 190);
        assert_eq!(ball_size(4, 5), 485);
        // closed form 1 + d ((d-1)^R - 1)/(d - 2)
        for d in [3usize, 4, 5] {
            for r in 0..6 {
                let closed = 1 + d * ((d - 1).pow(r as u32) - 1) / (d - 2);
                assert_eq!(ball_size(d, r), closed);
            }
        }
        assert!(matches!(
            build_ball_covariance(3, -2.0, 11),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn radius_one_structure() {
        let m = build_ball_covariance(3, -2.0, 1).unwrap();
        assert_eq!(m.n(), 4);
        for v in 0..4 {
            assert_eq!(m.covariance(v, v), 1.0);
        }
        for u in m.root_neighbors() {
            assert!((m.covariance(0, u) - m.sigma[1]).abs() < 1e-15);
            for w in m.root_neighbors() {
                if u != w {
                    assert!((m.covariance(u, w) - m.sigma[2]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn cholesky_reproduces_covariance() {
        let m = build_ball_covariance(3, -1.5, 3).unwrap();
        let n = m.n();
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..=j {
                    s += m.chol[idx(i, k)] * m.chol[idx(j, k)];
                }
                let want = m.covariance(i, j) + if i == j { m.jitter } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "({i},{j}): {s} vs {want}");
            }
        }
    }

    #[test]
    fn spectral_edge_ball_needs_little_jitter() {
        let m = build_ball_covariance(3, -2.0 * SQRT_2, 6).unwrap();
        assert_eq!(m.n(), 190);
        assert!(m.jitter <= 1e-10, "jitter {}", m.jitter);
    }

    #[test]
    fn sampled_field_satisfies_eigen_equation_at_root() {
        let lam = -2.0 * SQRT_2;
        let m = build_ball_covariance(3, lam, 4).unwrap();
        let n_samples = 2_000u64;
        let mut acc = 0.0;
        for i in 0..n_samples {
            let mut rng = substream(SEED, domain::TREE, i);
            let x = m.sample_field(&mut rng);
            let r: f64 = m.root_neighbors().map(|u| x[u]).sum::<f64>() - lam * x[0];
            acc += r * r;
        }
        let mean_sq = acc / n_samples as f64;
        assert!(mean_sq <= 1e-6 + 9.0 * m.jitter, "{mean_sq}");
    }

    #[test]
    fn empirical_covariance_matches_sigma() {
        let m = build_ball_covariance(3, -2.0, 4).unwrap();
        // one vertex per distance 1..=3 from the root
        let targets: Vec<usize> = (1..=3)
            .map(|k| (0..m.n()).find(|&v| m.depth_of(v) == k).unwrap())
            .collect();
        let n_samples = 40_000u64;
        let mut sums = vec![0.0; targets.len()];
        let mut sumsq = vec![0.0; targets.len()];
        for i in 0..n_samples {
            let mut rng = substream(SEED + 1, domain::TREE, i);
            let x = m.sample_field(&mut rng);
            for (t, &v) in targets.iter().enumerate() {
                let prod = x[0] * x[v];
                sums[t] += prod;
                sumsq[t] += prod * prod;
            }
        }
        for (t, &v) in targets.iter().enumerate() {
            let k = m.depth_of(v);
            let mean = sums[t] / n_samples as f64;
            let var = (sumsq[t] / n_samples as f64 - mean * mean).max(0.0);
            let se = (var / n_samples as f64).sqrt();
            assert!(
                (mean - m.sigma[k]).abs() <= 4.0 * se,
                "k={k}: {mean} vs {} (se {se})",
                m.sigma[k]
            );
        }
    }

    #[test]
    fn density_independent_of_radius() {
        // The root event depends only on the 1-neighborhood law, which every
        // radius reproduces exactly.
        let a = estimate_tree_density(3, -2.0, 2, 30_000, SEED).unwrap();
        let b = estimate_tree_density(3, -2.0, 4, 30_000, SEED + 1).unwrap();
        let combined = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.estimate - b.estimate).abs() <= 4.0 * combined);
    }

    #[test]
    fn density_matches_q3() {
        let est = estimate_tree_density(3, -2.0, 6, 100_000, SEED).unwrap();
        let q = sphere::q3_closed_form(-2.0).unwrap();
        assert!(
            (est.estimate - q).abs() <= 4.0 * est.stderr,
            "{} vs {q}",
            est.estimate
        );
    }

    #[test]
    fn density_at_spectral_edge() {
        let est = estimate_tree_density(3, -2.0 * SQRT_2, 6, 100_000, SEED).unwrap();
        assert!(
            (est.estimate - 0.4298244).abs() <= 4.0 * est.stderr,
            "{} (se {})",
            est.estimate,
            est.stderr
        );
    }

    #[test]
    fn quartic_tree_matches_qd() {
        let lam = -2.0 * 3.0_f64.sqrt();
        let tree = estimate_tree_density(4, lam, 3, 30_000, SEED).unwrap();
        let qd = sphere::qd_monte_carlo(4, lam, 300_000, SEED).unwrap();
        let combined = (tree.stderr * tree.stderr + qd.stderr * qd.stderr).sqrt();
        assert!(
            (tree.estimate - qd.estimate).abs() <= 4.0 * combined,
            "{} vs {}",
            tree.estimate,
            qd.estimate
        );
    }

    #[test]
    fn determinism_across_thread_counts() {
        // Integer tallies over per-sample substreams: the estimate must not
        // depend on rayon's partitioning.
        let m = build_ball_covariance(3, -2.5, 3).unwrap();
        let par = root_max_frequency(&m, 5_000, SEED).unwrap();
        let serial: u64 = (0..5_000u64)
            .map(|i| {
                let mut rng = substream(SEED, domain::TREE, i);
                let x = m.sample_field(&mut rng);
                u64::from(m.root_neighbors().all(|u| x[0] > x[u]))
            })
            .sum();
        assert_eq!(par.estimate, serial as f64 / 5_000.0);
    }
}
