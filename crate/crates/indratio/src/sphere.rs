//! Spherical quantities behind the random-eigenvector bounds: the cubic
//! closed form q3, Monte Carlo q_d for general degree, the exact degree-3
//! local-maximum probability for arbitrary neighbor covariances, trivariate
//! orthant probabilities, and spherical-cap lower bounds.

use crate::error::{Error, Result};
use crate::rng::{self, domain};
use rayon::prelude::*;
use std::f64::consts::PI;

/// q3(lambda) = 1/8 + (3 / 4 pi) arcsin((1 - lambda) / 4).
pub fn q3_closed_form(lambda: f64) -> Result<f64> {
    // Tolerate rounding noise from eigensolvers before rejecting.
    if !(-3.0 - 1e-9..=3.0 + 1e-9).contains(&lambda) {
        return Err(Error::Domain(format!(
            "q3 needs -3 <= lambda <= 3, got {lambda}"
        )));
    }
    let lambda = lambda.clamp(-3.0, 3.0);
    Ok(0.125 + 3.0 / (4.0 * PI) * ((1.0 - lambda) / 4.0).asin())
}

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo q_d(lambda): probability that a fixed coordinate of the
/// equicorrelated construction is a strict local maximum.
///
/// For lambda != 0 the estimator follows the eigenvector construction
/// literally: Y_1..Y_d equicorrelated with c = (lambda^2 - d) / (d (d-1)),
/// X = sum Y_i / lambda, and the event is X - Y_i > 0 for all i.  At
/// lambda = 0 that construction is singular and the differences are sampled
/// directly from their pairwise angle cos phi = (d - 2 - lambda) / (2 (d-1)).
pub fn qd_monte_carlo(d: usize, lambda: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if d < 3 {
        return Err(Error::Domain(format!("qd needs d >= 3, got {d}")));
    }
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let df = d as f64;
    if lambda.abs() > df * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "|lambda| = {} exceeds d = {d}; correlation would leave [-1, 1]",
            lambda.abs()
        )));
    }
    let count = if lambda.abs() < 1e-6 {
        let r = (df - 2.0 - lambda) / (2.0 * (df - 1.0));
        debug_assert!(r >= 0.0);
        mc_count(n_samples, seed, move |rng| {
            let shared = r.sqrt() * rng::standard_normal(rng);
            let tail = (1.0 - r).sqrt();
            (0..d).all(|_| shared + tail * rng::standard_normal(rng) > 0.0)
        })
    } else {
        let c = ((lambda * lambda - df) / (df * (df - 1.0))).min(1.0);
        if c >= 0.0 {
            mc_count(n_samples, seed, move |rng| {
                let shared = c.sqrt() * rng::standard_normal(rng);
                let tail = (1.0 - c).sqrt();
                let mut sum = 0.0;
                let mut y = vec![0.0f64; d];
                for yi in y.iter_mut() {
                    *yi = shared + tail * rng::standard_normal(rng);
                    sum += *yi;
                }
                let x = sum / lambda;
                y.iter().all(|&yi| x - yi > 0.0)
            })
        } else {
            let chol = equicorrelated_cholesky(d, c)?;
            mc_count(n_samples, seed, move |rng| {
                let mut z = vec![0.0; d];
                rng::fill_standard_normal(rng, &mut z);
                let mut sum = 0.0;
                let mut y = vec![0.0; d];
                for i in 0..d {
                    let yi: f64 = z
                        .iter()
                        .take(i + 1)
                        .enumerate()
                        .map(|(k, zk)| chol[i * d + k] * zk)
                        .sum();
                    y[i] = yi;
                    sum += yi;
                }
                let x = sum / lambda;
                y.iter().all(|&yi| x - yi > 0.0)
            })
        }
    };
    Ok(binomial_estimate(count, n_samples))
}

pub(crate) fn binomial_estimate(count: u64, n_samples: u64) -> McEstimate {
    let p = count as f64 / n_samples as f64;
    McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / n_samples as f64).sqrt(),
        samples: n_samples,
    }
}

/// Deterministic parallel count: sample i draws from its own substream and
/// the per-sample indicators are summed exactly, so any thread count gives
/// the same result.
fn mc_count(
    n_samples: u64,
    seed: u64,
    event: impl Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
) -> u64 {
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, domain::SPHERE, i);
            u64::from(event(&mut rng))
        })
        .sum()
}

/// Dense Cholesky of a small SPD matrix; None if a pivot is non-positive.
pub(crate) fn cholesky_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn equicorrelated_cholesky(d: usize, c: f64) -> Result<Vec<f64>> {
    let mut a = vec![c; d * d];
    for i in 0..d {
        a[i * d + i] = 1.0;
    }
    cholesky_dense(&a, d)
        .ok_or_else(|| Error::NotPsd(format!("equicorrelated matrix with c = {c}")))
}

/// Exact P(v in I+) for a 3-regular vertex, from the neighbor covariances
/// c = [c_12, c_13, c_23] (unit variances) and the eigenvalue lambda.
///
/// With x the root coordinate and y_i the neighbors on the unit sphere,
///   x . y_i    = lambda/2 - 1/(2 lambda) - c_jk / lambda,
///   |u_i|^2    = 2 - 2 x . y_i            (u_i = x - y_i),
///   u_i . u_j  = 1 - x . y_i - x . y_j + c_ij,
/// and the probability is (pi/2 + sum_{i<j} arcsin cos(u_i, u_j)) / (4 pi).
pub fn iplus_prob_d3_exact(c: &[f64; 3], lambda: f64) -> Result<f64> {
    if lambda.abs() < 1e-6 {
        return Err(Error::Domain(
            "lambda = 0 is singular for the exact form".into(),
        ));
    }
    for &cij in c {
        if cij.abs() > 1.0 + 1e-9 {
            return Err(Error::NotPsd(format!("|c| = {} > 1", cij.abs())));
        }
    }
    let sum: f64 = c.iter().sum();
    let want = (lambda * lambda - 3.0) / 2.0;
    if (sum - want).abs() > 1e-6 {
        return Err(Error::Hypothesis(format!(
            "sum of covariances {sum} != (lambda^2 - 3)/2 = {want}"
        )));
    }
    let det = 1.0 + 2.0 * c[0] * c[1] * c[2] - c[0] * c[0] - c[1] * c[1] - c[2] * c[2];
    if det < -1e-9 {
        return Err(Error::NotPsd(format!("det = {det}")));
    }
    // x.y_i uses the covariance of the opposite pair: [c23, c13, c12].
    let xy: Vec<f64> = (0..3)
        .map(|i| lambda / 2.0 - 0.5 / lambda - c[2 - i] / lambda)
        .collect();
    let norm2: Vec<f64> = xy.iter().map(|v| 2.0 - 2.0 * v).collect();
    for &m in &norm2 {
        if m < 1e-12 {
            return Err(Error::Domain("zero-variance difference X - Y_i".into()));
        }
    }
    let pair = [(0usize, 1usize, c[0]), (0, 2, c[1]), (1, 2, c[2])];
    let mut acc = PI / 2.0;
    for (i, j, cij) in pair {
        let dot = 1.0 - xy[i] - xy[j] + cij;
        let cos = (dot / (norm2[i] * norm2[j]).sqrt()).clamp(-1.0, 1.0);
        acc += cos.asin();
    }
    Ok(acc / (4.0 * PI))
}

/// Positive-orthant probability of a trivariate standard normal vector with
/// the given correlations: 1/8 + (arcsin c12 + arcsin c13 + arcsin c23)/(4 pi).
pub fn orthant3(c12: f64, c13: f64, c23: f64) -> Result<f64> {
    for c in [c12, c13, c23] {
        if c.abs() > 1.0 + 1e-12 {
            return Err(Error::NotPsd(format!("|c| = {} > 1", c.abs())));
        }
    }
    let det = 1.0 + 2.0 * c12 * c13 * c23 - c12 * c12 - c13 * c13 - c23 * c23;
    if det < -1e-9 {
        return Err(Error::NotPsd(format!("det = {det}")));
    }
    let asin = |c: f64| c.clamp(-1.0, 1.0).asin();
    Ok(0.125 + (asin(c12) + asin(c13) + asin(c23)) / (4.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapMode {
    /// Arc-transitive case: half-cap angle arccos(-lambda/d)/2.
    Arc,
    /// Vertex-transitive case: half-cap angle arccos(1 - lambda - d)/2,
    /// needs lambda <= 1 - d.
    Vertex,
}

/// Spherical-cap lower bound on q_d: 1/2 minus the cap boundary mass, with
/// the half-angle relaxed via arccos(1 - 2t) <= pi sqrt(t) / 2.
pub fn cap_lower_bound(d: usize, lambda: f64, mode: CapMode) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("cap bound needs d >= 3, got {d}")));
    }
    let df = d as f64;
    let ratio = sphere_volume_ratio(d);
    match mode {
        CapMode::Arc => {
            if !(-df..=0.0).contains(&lambda) {
                return Err(Error::Domain(format!(
                    "arc cap bound needs -d <= lambda <= 0, got {lambda}"
                )));
            }
            Ok(0.5 - PI / 4.0 * ratio * ((lambda + df) / df).sqrt())
        }
        CapMode::Vertex => {
            if !(-df..=1.0 - df).contains(&lambda) {
                return Err(Error::Domain(format!(
                    "vertex cap bound needs -d <= lambda <= 1 - d, got {lambda}"
                )));
            }
            Ok(0.5 - PI / 4.0 * ratio * (lambda + df).sqrt())
        }
    }
}

/// vol(S^{d-2}) / vol(S^{d-1}) = Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)),
/// with vol the surface measure of the unit sphere in R^d.
pub fn sphere_volume_ratio(d: usize) -> f64 {
    assert!(d >= 2);
    (ln_gamma_half(d) - ln_gamma_half(d - 1) - 0.5 * PI.ln()).exp()
}

/// ln Gamma(k/2) for integer k >= 1, by exact downward recursion.
fn ln_gamma_half(k: usize) -> f64 {
    let mut acc = if k.is_multiple_of(2) {
        0.0
    } else {
        0.5 * PI.ln()
    };
    let mut j = k;
    while j > 2 {
        j -= 2;
        acc += (j as f64 / 2.0).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    const SEED: u64 = 0x5eed_cafe;

    #[test]
    fn q3_endpoints_and_values() {
        assert!((q3_closed_form(-3.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((q3_closed_form(-1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((q3_closed_form(3.0).unwrap()).abs() < 1e-12);
        assert!((q3_closed_form(-2.0).unwrap() - 0.327459908).abs() < 1e-9);
        // lambda = -2 sqrt 2, the cubic tree spectral edge.
        let q = q3_closed_form(-2.0 * 2.0f64.sqrt()).unwrap();
        assert!((q - 0.42982).abs() < 1e-5, "{q}");
        assert!(q3_closed_form(-3.01).is_err());
        assert!(q3_closed_form(3.01).is_err());
    }

    #[test]
    fn q3_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=600 {
            let lambda = -3.0 + i as f64 / 100.0;
            let q = q3_closed_form(lambda).unwrap();
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn qd_matches_q3_for_cubic() {
        for lambda in [-3.0, -2.5, -2.0, 0.0, 1.0] {
            let mc = qd_monte_carlo(3, lambda, 200_000, SEED).unwrap();
            let exact = q3_closed_form(lambda).unwrap();
            let tol = 4.0 * mc.stderr.max(1e-9);
            assert!(
                (mc.estimate - exact).abs() <= tol,
                "lambda={lambda}: {} vs {exact} (tol {tol})",
                mc.estimate
            );
        }
    }

    #[test]
    fn qd_known_values() {
        // q_d(-d) = 1/2 and q_d(-1) = 1/(d+1).
        for d in [3usize, 4, 5] {
            let df = d as f64;
            let half = qd_monte_carlo(d, -df, 100_000, SEED).unwrap();
            assert!((half.estimate - 0.5).abs() <= 4.0 * half.stderr);
            let frac = qd_monte_carlo(d, -1.0, 200_000, SEED).unwrap();
            let want = 1.0 / (df + 1.0);
            assert!(
                (frac.estimate - want).abs() <= 4.0 * frac.stderr,
                "d={d}: {} vs {want}",
                frac.estimate
            );
        }
        assert!(qd_monte_carlo(2, -1.0, 10, SEED).is_err());
        assert!(qd_monte_carlo(3, -3.5, 10, SEED).is_err());
        assert!(qd_monte_carlo(3, -1.0, 0, SEED).is_err());
    }

    #[test]
    fn qd_is_thread_count_invariant() {
        // Same counts regardless of how rayon splits the range: compare the
        // parallel path against a serial fold.
        let par = qd_monte_carlo(3, -2.0, 20_000, SEED).unwrap();
        let serial: u64 = (0..20_000u64)
            .map(|i| {
                let mut rng = substream(SEED, crate::rng::domain::SPHERE, i);
                let c = (4.0f64 - 3.0) / 6.0;
                let shared = c.sqrt() * crate::rng::standard_normal(&mut rng);
                let tail = (1.0 - c).sqrt();
                let y: Vec<f64> = (0..3)
                    .map(|_| shared + tail * crate::rng::standard_normal(&mut rng))
                    .collect();
                let x = y.iter().sum::<f64>() / -2.0;
                u64::from(y.iter().all(|&yi| x - yi > 0.0))
            })
            .sum();
        assert_eq!(par.estimate, serial as f64 / 20_000.0);
    }

    #[test]
    fn exact_form_matches_q3_at_equicorrelated_point() {
        for lambda in [-2.0, -2.5, -2.0 * 2.0f64.sqrt(), -2.9] {
            let c = (lambda * lambda - 3.0) / 6.0;
            let p = iplus_prob_d3_exact(&[c, c, c], lambda).unwrap();
            let q = q3_closed_form(lambda).unwrap();
            assert!((p - q).abs() < 1e-12, "lambda={lambda}: {p} vs {q}");
        }
        // lambda = -3 forces c = (1,1,1) and probability 1/2.
        let p = iplus_prob_d3_exact(&[1.0, 1.0, 1.0], -3.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_form_agrees_with_direct_simulation() {
        // Non-equicorrelated admissible covariances for lambda = -2.2:
        // sum must equal (lambda^2 - 3)/2 = 0.92.
        let lambda = -2.2;
        let c = [0.1, 0.2, 0.62];
        let p = iplus_prob_d3_exact(&c, lambda).unwrap();
        let cov = [1.0, c[0], c[1], c[0], 1.0, c[2], c[1], c[2], 1.0];
        let l = cholesky_dense(&cov, 3).unwrap();
        let n = 400_000u64;
        let mut hits = 0u64;
        for i in 0..n {
            let mut rng = substream(SEED, crate::rng::domain::ORACLE, i);
            let z: Vec<f64> = (0..3)
                .map(|_| crate::rng::standard_normal(&mut rng))
                .collect();
            let y: Vec<f64> = (0..3)
                .map(|r| (0..=r).map(|k| l[r * 3 + k] * z[k]).sum())
                .collect();
            let x = y.iter().sum::<f64>() / lambda;
            if y.iter().all(|&yi| x - yi > 0.0) {
                hits += 1;
            }
        }
        let est = binomial_estimate(hits, n);
        assert!(
            (est.estimate - p).abs() <= 4.0 * est.stderr,
            "{} vs {p} (se {})",
            est.estimate,
            est.stderr
        );
    }

    #[test]
    fn exact_form_rejects_bad_input() {
        assert!(iplus_prob_d3_exact(&[0.1, 0.1, 0.1], -2.0).is_err()); // sum constraint
        assert!(iplus_prob_d3_exact(&[1.0, 1.0, -1.0], -3.0 + 1e-9).is_err()); // not psd... sum also off
        assert!(iplus_prob_d3_exact(&[0.5, 0.5, 0.5], 0.0).is_err()); // lambda 0
    }

    #[test]
    fn orthant_values_and_oracle() {
        assert!((orthant3(0.0, 0.0, 0.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((orthant3(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        // Closed form at the cubic equicorrelated point c = 1/6.
        let p = orthant3(1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0).unwrap();
        assert!((p - 0.1649753).abs() < 1e-6, "{p}");
        // Monte Carlo oracle.
        let c: f64 = 1.0 / 6.0;
        let cov = [1.0, c, c, c, 1.0, c, c, c, 1.0];
        let l = cholesky_dense(&cov, 3).unwrap();
        let n = 10_000_000u64;
        let hits: u64 = (0..n)
            .map(|i| {
                let mut rng = substream(SEED, crate::rng::domain::ORACLE, i);
                let z: Vec<f64> = (0..3)
                    .map(|_| crate::rng::standard_normal(&mut rng))
                    .collect();
                let y0 = l[0] * z[0];
                let y1 = l[3] * z[0] + l[4] * z[1];
                let y2 = l[6] * z[0] + l[7] * z[1] + l[8] * z[2];
                u64::from(y0 > 0.0 && y1 > 0.0 && y2 > 0.0)
            })
            .sum();
        let est = binomial_estimate(hits, n);
        assert!((est.estimate - p).abs() <= 4.0 * est.stderr);
        // Invalid correlation matrices are rejected.
        assert!(orthant3(0.9, 0.9, -0.9).is_err());
        assert!(orthant3(1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn cap_bounds() {
        // d = 4 arc form collapses to 1/2 - sqrt(lambda + 4)/4.
        for lambda in [-4.0, -3.0, -2.0, -1.0] {
            let got = cap_lower_bound(4, lambda, CapMode::Arc).unwrap();
            let want = 0.5 - (lambda + 4.0).sqrt() / 4.0;
            assert!((got - want).abs() < 1e-12, "lambda={lambda}");
        }
        // Vertex mode at (3, -2.5).
        let v = cap_lower_bound(3, -2.5, CapMode::Vertex).unwrap();
        let want = 0.5 - PI / 4.0 * 0.5 * 0.5f64.sqrt();
        assert!((v - want).abs() < 1e-12);
        assert!(v <= q3_closed_form(-2.5).unwrap());
        // Arc cap stays below q3 on the whole range.
        for i in 0..=300 {
            let lambda = -3.0 + i as f64 / 100.0;
            let cap = cap_lower_bound(3, lambda, CapMode::Arc).unwrap();
            assert!(
                cap <= q3_closed_form(lambda).unwrap() + 1e-12,
                "lambda={lambda}"
            );
        }
        assert!(cap_lower_bound(3, 0.5, CapMode::Arc).is_err());
        assert!(cap_lower_bound(3, -1.5, CapMode::Vertex).is_err());
        assert!(cap_lower_bound(2, -1.0, CapMode::Arc).is_err());
    }

    #[test]
    fn volume_ratios() {
        assert!((sphere_volume_ratio(3) - 0.5).abs() < 1e-14);
        assert!((sphere_volume_ratio(4) - 2.0 / PI).abs() < 1e-14);
        // Gamma(5/2)/ (sqrt(pi) Gamma(2)) = (3/4 sqrt(pi)) / sqrt(pi) = 3/4.
        assert!((sphere_volume_ratio(5) - 0.75).abs() < 1e-14);
        for d in 3..=50 {
            let r = sphere_volume_ratio(d);
            assert!(r < (d as f64 / (2.0 * PI)).sqrt(), "d={d}");
            assert!(r > 0.0);
        }
    }
}
