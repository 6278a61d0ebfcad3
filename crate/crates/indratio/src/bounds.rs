//! Independence-ratio bounds: the Hoffman upper bound, the spectral lower
//! bounds (with their transitivity hypotheses), the odd-girth refinement,
//! an exact branch-and-bound independence ratio for small graphs, and the
//! numerical verification of the two supporting lemmas.
//!
//! `build_report` assembles everything for one graph, marking each lower
//! bound as verified only when the hypotheses it needs (degree, eigenvalue
//! range, transitivity flags from the symmetry analysis) actually hold.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectra;
use crate::sphere;
use crate::symmetry;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest n for which the exact independence ratio is computed.
pub const EXACT_RATIO_LIMIT: usize = 64;

/// Slack allowed in the lower <= exact <= upper chain (rational-to-float).
pub const SANDWICH_TOL: f64 = 1e-9;

/// -lambda_min / (d - lambda_min), an upper bound for every d-regular graph.
pub fn hoffman_upper(d: usize, lambda_min: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("degree must be positive".into()));
    }
    let df = d as f64;
    if !lambda_min.is_finite() || lambda_min < -df - 1e-9 {
        return Err(Error::Domain(format!(
            "lambda_min {lambda_min} below -d = {}",
            -df
        )));
    }
    if lambda_min >= df - 1e-9 {
        return Err(Error::Domain(format!(
            "lambda_min {lambda_min} at the top of the spectrum is degenerate"
        )));
    }
    let lam = lambda_min.max(-df);
    Ok(-lam / (df - lam))
}

/// 1/2 - (1/3) sqrt(d (lambda_min + d)); valid for vertex-transitive
/// d-regular graphs, clamped at 0 where the formula goes vacuous.
pub fn crude_lower(d: usize, lambda_min: f64) -> f64 {
    let df = d as f64;
    let r = (df * (lambda_min + df)).max(0.0);
    (0.5 - r.sqrt() / 3.0).max(0.0)
}

#[derive(Debug, Clone, Copy)]
pub struct ArcBound {
    /// 1/2 - (1/3) sqrt(lambda_min + d), any degree.
    pub general: f64,
    /// The sharper 1/2 - (1/4) sqrt(lambda_min + 4), defined only at d = 4.
    pub q4: Option<f64>,
}

/// Arc-transitive lower bounds, clamped at 0.
pub fn arc_lower(d: usize, lambda_min: f64) -> ArcBound {
    let r = (lambda_min + d as f64).max(0.0);
    ArcBound {
        general: (0.5 - r.sqrt() / 3.0).max(0.0),
        q4: (d == 4).then(|| (0.5 - r.sqrt() / 4.0).max(0.0)),
    }
}

/// q3(lambda_min) for cubic vertex-transitive graphs.
///
/// Defined for lambda_min <= -2 and, as the complete-graph exception, at
/// lambda_min = -1; the open gap (-2, -1) cannot occur for such graphs and
/// is reported as a hypothesis violation.
pub fn q3_lower(lambda_min: f64) -> Result<f64> {
    if !lambda_min.is_finite() || lambda_min < -3.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "lambda_min {lambda_min} below the cubic spectrum bottom -3"
        )));
    }
    let lam = lambda_min.max(-3.0);
    if lam <= -2.0 + 1e-9 {
        sphere::q3_closed_form(lam)
    } else if (lam + 1.0).abs() <= 1e-9 {
        sphere::q3_closed_form(-1.0)
    } else {
        Err(Error::Hypothesis(format!(
            "lambda_min = {lambda_min}: a cubic vertex-transitive graph has \
             lambda_min <= -2 or is complete (lambda_min = -1)"
        )))
    }
}

/// Odd-girth refinement for cubic vertex-transitive graphs with
/// lambda_min <= -2:
/// (5g-3)/(16g) + (g+1)/(2g) * (3/4pi) arcsin((lambda^2 - 3)/6).
/// `None` odd-girth (bipartite) takes the g -> infinity limit.
pub fn odd_girth_lower(lambda_min: f64, odd_girth: Option<usize>) -> Result<f64> {
    if !lambda_min.is_finite() || lambda_min < -3.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "lambda_min {lambda_min} below the cubic spectrum bottom -3"
        )));
    }
    let lam = lambda_min.max(-3.0);
    if lam > -2.0 + 1e-9 {
        return Err(Error::Hypothesis(format!(
            "the odd-girth bound needs lambda_min <= -2, got {lambda_min}"
        )));
    }
    // lam in [-3, -2] puts the argument in [1/6, 1].
    let s = ((lam * lam - 3.0) / 6.0).min(1.0).asin();
    match odd_girth {
        Some(g) => {
            if g < 3 || g % 2 == 0 {
                return Err(Error::Domain(format!(
                    "odd-girth must be odd and >= 3, got {g}"
                )));
            }
            let gf = g as f64;
            Ok((5.0 * gf - 3.0) / (16.0 * gf) + (gf + 1.0) / (2.0 * gf) * 3.0 / (4.0 * PI) * s)
        }
        None => Ok(5.0 / 16.0 + 3.0 / (8.0 * PI) * s),
    }
}

/// Maximum independent set by branch and bound over u64 bitsets, with a
/// greedy clique-cover upper bound for pruning.  Exact for n <= 64.
pub fn max_independent_set(g: &Graph) -> Result<Vec<usize>> {
    let n = g.n();
    if n > 64 {
        return Err(Error::TooLarge { n, limit: 64 });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let full: u64 = if n == 64 { !0 } else { (1u64 << n) - 1 };
    // Warm start: greedy min-degree independent set.
    let mut best_set = {
        let mut p = full;
        let mut s = 0u64;
        while p != 0 {
            let mut pick = usize::MAX;
            let mut deg = usize::MAX;
            let mut q = p;
            while q != 0 {
                let v = q.trailing_zeros() as usize;
                q &= q - 1;
                let dv = (adj[v] & p).count_ones() as usize;
                if dv < deg {
                    deg = dv;
                    pick = v;
                }
            }
            s |= 1 << pick;
            p &= !(adj[pick] | 1 << pick);
        }
        s
    };
    let mut best = best_set.count_ones();
    bnb(&adj, full, 0, 0, &mut best, &mut best_set);
    Ok((0..n).filter(|&v| best_set >> v & 1 == 1).collect())
}

/// Vertices adjacent to every member of a greedy clique are tracked as the
/// intersection of member adjacency masks; an independent set meets each
/// clique at most once, so the clique count bounds what p can still add.
fn clique_cover_bound(adj: &[u64], mut p: u64) -> u32 {
    let mut cliques: Vec<u64> = Vec::new();
    while p != 0 {
        let v = p.trailing_zeros() as usize;
        p &= p - 1;
        let bit = 1u64 << v;
        match cliques.iter_mut().find(|ca| **ca & bit != 0) {
            Some(ca) => *ca &= adj[v],
            None => cliques.push(adj[v]),
        }
    }
    cliques.len() as u32
}

fn bnb(adj: &[u64], p: u64, size: u32, set: u64, best: &mut u32, best_set: &mut u64) {
    if p == 0 {
        if size > *best {
            *best = size;
            *best_set = set;
        }
        return;
    }
    if size + clique_cover_bound(adj, p) <= *best {
        return;
    }
    // Branch on a maximum-degree candidate: including it shrinks p fastest.
    let mut v = 0;
    let mut deg = -1i64;
    let mut q = p;
    while q != 0 {
        let u = q.trailing_zeros() as usize;
        q &= q - 1;
        let du = (adj[u] & p).count_ones() as i64;
        if du > deg {
            deg = du;
            v = u;
        }
    }
    let bit = 1u64 << v;
    bnb(
        adj,
        p & !(adj[v] | bit),
        size + 1,
        set | bit,
        best,
        best_set,
    );
    bnb(adj, p & !bit, size, set, best, best_set);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRatio {
    pub size: usize,
    pub n: usize,
    pub value: f64,
}

pub fn exact_independence_ratio(g: &Graph) -> Result<ExactRatio> {
    if g.n() == 0 {
        return Err(Error::Domain(
            "the empty graph has no independence ratio".into(),
        ));
    }
    let set = max_independent_set(g)?;
    Ok(ExactRatio {
        size: set.len(),
        n: g.n(),
        value: set.len() as f64 / g.n() as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentLemmaReport {
    pub lambda_points: usize,
    pub t_points: usize,
    pub min_margin: f64,
    pub at_lambda: f64,
    pub at_t: f64,
    pub passed: bool,
}

/// Check that f(t) = arcsin((a + b t)/(c + t)) stays above its tangent at
/// t0 = (lambda^2 - 3)/6 over t in [-0.5, 1], for lambda in [-3, -2]:
/// a = 1/2 - lambda + lambda^2/2, b = 1 - lambda, c = a + b - 1.
pub fn verify_tangent_lemma(lambda_points: usize, t_points: usize) -> Result<TangentLemmaReport> {
    if lambda_points < 100 || t_points < 100 {
        return Err(Error::Domain(
            "need at least 100 grid points per axis".into(),
        ));
    }
    let mut min_margin = f64::INFINITY;
    let (mut at_lambda, mut at_t) = (f64::NAN, f64::NAN);
    for i in 0..lambda_points {
        let lam = -3.0 + i as f64 / (lambda_points - 1) as f64;
        let a = 0.5 - lam + lam * lam / 2.0;
        let b = 1.0 - lam;
        let c = a + b - 1.0;
        let t0 = (lam * lam - 3.0) / 6.0;
        let f = |t: f64| ((a + b * t) / (c + t)).clamp(-1.0, 1.0).asin();
        let f0 = f(t0);
        let disc = ((c + t0) * (c + t0) - (a + b * t0) * (a + b * t0)).max(0.0);
        // Infinite at lambda = -3, where t0 = 1 sits on the arcsin boundary.
        let fp0 = (b * c - a) / ((c + t0) * disc.sqrt());
        // The grid, plus the tangency point itself.
        for j in 0..=t_points {
            let t = if j == t_points {
                t0
            } else {
                -0.5 + 1.5 * j as f64 / (t_points - 1) as f64
            };
            let margin = if fp0.is_finite() {
                f(t) - (f0 + fp0 * (t - t0))
            } else if t < t0 {
                f64::INFINITY // vertical tangent: the line drops away below t0
            } else {
                f(t) - f0 // only t = t0 = 1 reaches here
            };
            if margin < min_margin {
                min_margin = margin;
                at_lambda = lam;
                at_t = t;
            }
        }
    }
    Ok(TangentLemmaReport {
        lambda_points,
        t_points,
        min_margin,
        at_lambda,
        at_t,
        passed: min_margin >= -1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VolRatioReport {
    pub d_max: usize,
    /// Minimum over d of sqrt(d/(2 pi)) - vol(S^{d-2})/vol(S^{d-1});
    /// the inequality holds iff this stays positive.
    pub min_slack: f64,
    pub at_d: usize,
    pub passed: bool,
}

pub fn verify_vol_ratio(d_max: usize) -> Result<VolRatioReport> {
    if d_max < 3 {
        return Err(Error::Domain("need d_max >= 3".into()));
    }
    let mut min_slack = f64::INFINITY;
    let mut at_d = 0;
    for d in 3..=d_max {
        let slack = (d as f64 / (2.0 * PI)).sqrt() - sphere::sphere_volume_ratio(d);
        if slack < min_slack {
            min_slack = slack;
            at_d = d;
        }
    }
    Ok(VolRatioReport {
        d_max,
        min_slack,
        at_d,
        passed: min_slack > 0.0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBound {
    pub name: String,
    pub value: f64,
    /// True when the hypotheses behind the bound were confirmed.
    pub verified: bool,
    /// True when the formula was clamped to zero.
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetrySummary {
    /// Decimal automorphism-group order; None when the search gave up.
    pub aut_order: Option<String>,
    pub vertex_transitive: Option<bool>,
    pub arc_transitive: Option<bool>,
    pub cherry_transitive: Option<bool>,
}

impl From<&symmetry::SymmetryReport> for SymmetrySummary {
    fn from(s: &symmetry::SymmetryReport) -> Self {
        SymmetrySummary {
            aut_order: s.aut_order.as_ref().map(|o| o.to_string()),
            vertex_transitive: s.vertex_transitive,
            arc_transitive: s.arc_transitive,
            cherry_transitive: s.cherry_transitive,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub graph: String,
    pub n: usize,
    pub d: usize,
    pub lambda_min: f64,
    pub hoffman: f64,
    pub bounds: Vec<ReportBound>,
    /// None = not computed (n above the exact limit).
    pub exact_ratio: Option<ExactRatio>,
    pub symmetry: SymmetrySummary,
}

pub fn build_report(name: &str, g: &Graph) -> Result<BoundReport> {
    let s = g.structure();
    let d = s.regular.ok_or(Error::NotRegular {
        min: s.degree_min,
        max: s.degree_max,
    })?;
    if g.n() == 0 || d == 0 {
        return Err(Error::Domain(
            "need a nonempty graph of positive degree".into(),
        ));
    }
    let dec = spectra::decompose(g)?;
    let lam = dec.lambda_min();
    let sym = symmetry::analyze(g);
    let vt = sym.vertex_transitive == Some(true);
    let at = sym.arc_transitive == Some(true);
    let hoffman = hoffman_upper(d, lam)?;
    let mut bounds = Vec::new();

    let unverified = |hyp: &str| Some(format!("unverified: requires {hyp}"));
    let crude = crude_lower(d, lam);
    bounds.push(ReportBound {
        name: "crude".into(),
        value: crude,
        verified: vt,
        vacuous: crude <= 0.0,
        note: if vt {
            None
        } else {
            unverified("vertex-transitivity")
        },
    });
    let arc = arc_lower(d, lam);
    bounds.push(ReportBound {
        name: "arc".into(),
        value: arc.general,
        verified: at,
        vacuous: arc.general <= 0.0,
        note: if at {
            None
        } else {
            unverified("arc-transitivity")
        },
    });
    if let Some(q4) = arc.q4 {
        bounds.push(ReportBound {
            name: "q4".into(),
            value: q4,
            verified: at,
            vacuous: q4 <= 0.0,
            note: if at {
                None
            } else {
                unverified("arc-transitivity")
            },
        });
    }
    if d == 3 {
        match q3_lower(lam) {
            Ok(v) => bounds.push(ReportBound {
                name: "q3".into(),
                value: v,
                verified: vt,
                vacuous: false,
                note: if (lam + 1.0).abs() <= 1e-9 {
                    Some("lambda_min = -1: complete-graph exception".into())
                } else if vt {
                    None
                } else {
                    unverified("vertex-transitivity")
                },
            }),
            Err(Error::Hypothesis(_)) => {} // eigenvalue in the impossible gap
            Err(e) => return Err(e),
        }
        if let Ok(v) = odd_girth_lower(lam, s.odd_girth) {
            bounds.push(ReportBound {
                name: "odd_girth".into(),
                value: v,
                verified: vt,
                vacuous: v <= 0.0,
                note: Some(match s.odd_girth {
                    Some(og) => format!("odd-girth {og}"),
                    None => "bipartite: infinite odd-girth limit".into(),
                }),
            });
        }
    }
    let exact_ratio = if g.n() <= EXACT_RATIO_LIMIT {
        Some(exact_independence_ratio(g)?)
    } else {
        None
    };
    Ok(BoundReport {
        graph: name.to_string(),
        n: g.n(),
        d,
        lambda_min: lam,
        hoffman,
        bounds,
        exact_ratio,
        symmetry: SymmetrySummary::from(&sym),
    })
}

/// Violations of verified-lower <= exact <= Hoffman; empty means certified.
pub fn check_sandwich(r: &BoundReport) -> Vec<String> {
    let mut violations = Vec::new();
    for b in &r.bounds {
        if b.verified && b.value > r.hoffman + SANDWICH_TOL {
            violations.push(format!(
                "{}: lower bound {} = {:.6} exceeds the Hoffman bound {:.6}",
                r.graph, b.name, b.value, r.hoffman
            ));
        }
    }
    if let Some(ex) = &r.exact_ratio {
        if ex.value > r.hoffman + SANDWICH_TOL {
            violations.push(format!(
                "{}: exact ratio {}/{} exceeds the Hoffman bound {:.6}",
                r.graph, ex.size, ex.n, r.hoffman
            ));
        }
        for b in &r.bounds {
            if b.verified && b.value > ex.value + SANDWICH_TOL {
                violations.push(format!(
                    "{}: lower bound {} = {:.6} exceeds the exact ratio {}/{}",
                    r.graph, b.name, b.value, ex.size, ex.n
                ));
            }
        }
    }
    violations
}
