//! Brute-force references, independent of the sampler and the clipping code:
//! check-loss minimization by restarted simplex search, empirical coverage of
//! fitted halfplanes, and small-n Tukey depth regions by direction
//! enumeration. Used by unit tests, the acceptance suite, and `validate`.

pub mod nelder_mead;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::design::Design;
use crate::error::{Error, Result};
use crate::geometry::{self, Halfplane, Polygon, Vec2};
use crate::mat::RowMatrix;

/// A pinball-loss minimization problem: response `y`, full coefficient
/// matrix `w` (projection column plus design columns for directional fits),
/// and the quantile level.
#[derive(Debug, Clone)]
pub struct CheckLossProblem {
    pub y: Vec<f64>,
    pub w: RowMatrix,
    pub tau: f64,
}

impl CheckLossProblem {
    pub fn new(y: Vec<f64>, w: RowMatrix, tau: f64) -> Result<Self> {
        if y.len() != w.nrows() {
            return Err(Error::Parameter(format!(
                "response length {} does not match {} rows",
                y.len(),
                w.nrows()
            )));
        }
        if y.len() <= w.ncols() {
            return Err(Error::Parameter(format!(
                "need n > number of coefficients, got n={} k={}",
                y.len(),
                w.ncols()
            )));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Parameter(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(Self { y, w, tau })
    }

    /// Same coefficient layout as the directional Gibbs fit: `[b, β…]`.
    pub fn for_directional_fit(
        y_u: &[f64],
        y_perp: &[f64],
        x: &Design,
        tau: f64,
    ) -> Result<Self> {
        let k = x.p() + 1;
        let mut w = RowMatrix::zeros(0, k);
        let mut row = vec![0.0; k];
        for (i, perp) in y_perp.iter().enumerate() {
            row[0] = *perp;
            row[1..].copy_from_slice(x.matrix.row(i));
            w.push_row(&row);
        }
        Self::new(y_u.to_vec(), w, tau)
    }
}

/// Pinball loss ρ_τ(r) = r(τ − 1{r<0}).
#[inline]
pub fn pinball(r: f64, tau: f64) -> f64 {
    r * (tau - if r < 0.0 { 1.0 } else { 0.0 })
}

/// Total check loss Σᵢ ρ_τ(yᵢ − wᵢᵀ·coeffs).
pub fn check_loss(coeffs: &[f64], prob: &CheckLossProblem) -> f64 {
    assert_eq!(coeffs.len(), prob.w.ncols(), "coefficient length mismatch");
    let mut total = 0.0;
    for i in 0..prob.w.nrows() {
        let wi = prob.w.row(i);
        let mut eta = 0.0;
        for (w, c) in wi.iter().zip(coeffs) {
            eta += w * c;
        }
        total += pinball(prob.y[i] - eta, prob.tau);
    }
    total
}

const RESTARTS: usize = 20;

/// Minimizes the check loss by Nelder–Mead from 20 random starts plus a
/// pattern-search polish, then verifies the quantile-regression subgradient
/// condition. Deterministic.
pub fn brute_force_fit(prob: &CheckLossProblem) -> Result<Vec<f64>> {
    let k = prob.w.ncols();
    let f = |c: &[f64]| check_loss(c, prob);
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_0f0a_cc01);

    let y_scale = robust_scale(&prob.y).max(1e-6);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..RESTARTS {
        let x0: Vec<f64> = if start == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * 2.0 * y_scale).collect()
        };
        let (x, fx) = nelder_mead::minimize(f, &x0, y_scale.max(0.5), &Default::default());
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    let (x, _) = best.expect("at least one restart ran");
    let (x, _) = nelder_mead::polish(f, &x, 0.05 * y_scale);

    subgradient_check(&x, prob)?;
    Ok(x)
}

fn robust_scale(y: &[f64]) -> f64 {
    let mut s: Vec<f64> = y.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| s[((s.len() - 1) as f64 * p) as usize];
    (q(0.75) - q(0.25)).abs().max(q(0.9).abs() - q(0.1).abs()).max(1.0)
}

/// Subgradient optimality: per column j,
/// |Σ_{rᵢ≠0} Wᵢⱼ·(τ − 1{rᵢ<0})| ≤ Σ_{rᵢ≈0} |Wᵢⱼ|·max(τ, 1−τ) + slack.
fn subgradient_check(coeffs: &[f64], prob: &CheckLossProblem) -> Result<()> {
    let k = prob.w.ncols();
    let n = prob.w.nrows();
    let eps = 1e-6 * robust_scale(&prob.y);
    let mut grad = vec![0.0; k];
    let mut bound = vec![0.0; k];
    let mut col_abs = vec![0.0; k];
    for i in 0..n {
        let wi = prob.w.row(i);
        let mut eta = 0.0;
        for (w, c) in wi.iter().zip(coeffs) {
            eta += w * c;
        }
        let r = prob.y[i] - eta;
        for j in 0..k {
            col_abs[j] += wi[j].abs();
            if r.abs() <= eps {
                bound[j] += wi[j].abs() * prob.tau.max(1.0 - prob.tau);
            } else {
                grad[j] += wi[j] * (prob.tau - if r < 0.0 { 1.0 } else { 0.0 });
            }
        }
    }
    for j in 0..k {
        let violation = grad[j].abs() - bound[j];
        let slack = 2e-3 * col_abs[j].max(1.0);
        if violation > slack {
            return Err(Error::NoConvergence(format!(
                "subgradient condition violated in column {j}: |{:.6}| > {:.6} + {:.6}",
                grad[j], bound[j], slack
            )));
        }
    }
    Ok(())
}

/// Fraction of rows strictly below the hyperplane: `cᵀz < d`.
pub fn empirical_direction_coverage(h: &Halfplane, z: &[Vec2]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let below = z.iter().filter(|&&p| h.slack(p) < 0.0).count();
    below as f64 / z.len() as f64
}

/// Empirical Tukey depth region `{y : depth(y) ≥ τ}` by direction
/// enumeration: for every direction perpendicular to a pair of data points
/// (plus a uniform safety grid), cut off the ⌊τn⌋ smallest projections.
///
/// Exact for point sets in general position; O(n² log n)-ish, so capped at
/// n ≤ 500.
pub fn tukey_region_bruteforce(z: &[Vec2], tau: f64) -> Polygon {
    let n = z.len();
    assert!(n <= 500, "brute-force depth region is capped at n <= 500, got {n}");
    assert!(n >= 3, "need at least 3 points");
    assert!((0.0..1.0).contains(&tau));
    let cut = (tau * n as f64).floor() as usize;
    if cut >= n {
        return Polygon::empty();
    }

    let mut dirs: Vec<Vec2> = Vec::with_capacity(n * (n - 1) + 360);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = [z[j][0] - z[i][0], z[j][1] - z[i][1]];
            let len = geometry::norm(d);
            if len > 1e-12 {
                let perp = [-d[1] / len, d[0] / len];
                dirs.push(perp);
                dirs.push([-perp[0], -perp[1]]);
            }
        }
    }
    for k in 0..360 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 360.0;
        dirs.push([a.cos(), a.sin()]);
    }

    // Bounding box with margin; the depth region is inside the data hull.
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in z {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let margin = 1.0 + (xmax - xmin).max(ymax - ymin);
    let mut region = Polygon::rect(xmin - margin, ymin - margin, xmax + margin, ymax + margin);

    let mut proj = vec![0.0f64; n];
    for u in dirs {
        for (p, zi) in proj.iter_mut().zip(z) {
            *p = geometry::dot(u, *zi);
        }
        let (_, kth, _) = proj.select_nth_unstable_by(cut, f64::total_cmp);
        region = region.clip_halfplane(&Halfplane::new(u, *kth));
        if region.is_empty() {
            return Polygon::empty();
        }
    }
    region
}
