//! Desk-scale validation suite: every check compares an implementation path
//! against an independent reference (quadrature, joint-density ratios,
//! brute-force optimization or enumeration). Run by `quantour validate` and
//! by the acceptance tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::design::{Design, ScalingParams};
use crate::engine;
use crate::geometry::{self, Halfplane, Polygon, Vec2};
use crate::mat::RowMatrix;
use crate::oracle;
use crate::sampler::{self, SamplerConfig, TauParams};

/// Check sizes. `Default` runs the acceptance-grade settings; `Tiny` is a
/// smoke pass that finishes in well under a minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Tiny,
    Default,
}

impl Scale {
    pub fn parse(s: &str) -> Option<Scale> {
        match s {
            "tiny" => Some(Scale::Tiny),
            "default" => Some(Scale::Default),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// One line per measurement: measured value vs required bound.
    pub details: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        Self { name, passed: true, details: Vec::new() }
    }

    fn require(&mut self, label: &str, measured: f64, ok: bool, bound: &str) {
        self.details.push(format!(
            "{} {label}: measured {measured:.6}, required {bound}",
            if ok { "pass" } else { "FAIL" }
        ));
        self.passed &= ok;
    }
}

/// Reduced chain used by the sampler-facing checks.
fn reduced_chain(scale: Scale, seed: u64) -> SamplerConfig {
    match scale {
        Scale::Default => SamplerConfig {
            burn_in: 1_000,
            total_iters: 10_000,
            thin: 10,
            seed,
            ..SamplerConfig::default()
        },
        Scale::Tiny => SamplerConfig {
            burn_in: 500,
            total_iters: 5_000,
            thin: 10,
            seed,
            ..SamplerConfig::default()
        },
    }
}

fn standard_normal_cloud(n: usize, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [a, b]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// GIG sampler vs quadrature
// ---------------------------------------------------------------------------

/// Quadrature of the GIG(1/2, χ, ψ) density on a log grid: returns the
/// normalizing constant, the mean, and a CDF table for KS evaluation.
pub fn gig_quadrature(chi: f64, psi: f64, points: usize) -> (f64, f64, Vec<(f64, f64)>) {
    // Substitution x = e^t makes the integrand smooth: ∫ f(x) dx = ∫ f(eᵗ)eᵗ dt.
    let t_lo = -30.0f64;
    let t_hi = (60.0f64 / psi).max(8.0).ln().max(4.0);
    let h = (t_hi - t_lo) / (points - 1) as f64;
    let density = |x: f64| (-0.5 * x.ln() - 0.5 * (chi / x + psi * x)).exp();
    let mut mass = 0.0;
    let mut mean_acc = 0.0;
    let mut cdf = Vec::with_capacity(points);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..points {
        let t = t_lo + h * i as f64;
        let x = t.exp();
        let g = density(x) * x; // Jacobian
        if let Some((px, pg)) = prev {
            let seg = 0.5 * (g + pg) * h;
            mass += seg;
            mean_acc += 0.5 * (g * x + pg * px) * h;
        }
        cdf.push((x, mass));
        prev = Some((x, g));
    }
    for entry in &mut cdf {
        entry.1 /= mass;
    }
    (mass, mean_acc / mass, cdf)
}

fn cdf_at(table: &[(f64, f64)], x: f64) -> f64 {
    match table.binary_search_by(|(t, _)| t.total_cmp(&x)) {
        Ok(i) => table[i].1,
        Err(0) => 0.0,
        Err(i) if i >= table.len() => 1.0,
        Err(i) => {
            let (x0, c0) = table[i - 1];
            let (x1, c1) = table[i];
            c0 + (c1 - c0) * (x - x0) / (x1 - x0)
        }
    }
}

pub fn check_gig(scale: Scale) -> CheckResult {
    let mut result = CheckResult::new("gig-sampler-vs-quadrature");
    let mut rng = ChaCha12Rng::seed_from_u64(0xd1ce);

    let (_, quad_mean, cdf) = gig_quadrature(1.0, 1.0, 200_001);

    let n_mean = match scale {
        Scale::Default => 1_000_000,
        Scale::Tiny => 200_000,
    };
    let mut sum = 0.0;
    let mut all_positive = true;
    for _ in 0..n_mean {
        let d = sampler::sample_gig_half(1.0, 1.0, &mut rng).expect("valid parameters");
        all_positive &= d > 0.0;
        sum += d;
    }
    let mean = sum / n_mean as f64;
    let rel = (mean / quad_mean - 1.0).abs();
    result.require("mean relative error at (chi=1, psi=1)", rel, rel < 0.01, "< 0.01");
    result.require(
        "all draws strictly positive",
        if all_positive { 1.0 } else { 0.0 },
        all_positive,
        "= 1",
    );

    let n_ks = 100_000;
    let mut draws: Vec<f64> = (0..n_ks)
        .map(|_| sampler::sample_gig_half(1.0, 1.0, &mut rng).expect("valid parameters"))
        .collect();
    draws.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, x) in draws.iter().enumerate() {
        let f = cdf_at(&cdf, *x);
        let hi = ((i + 1) as f64 / n_ks as f64 - f).abs();
        let lo = (f - i as f64 / n_ks as f64).abs();
        ks = ks.max(hi).max(lo);
    }
    result.require("Kolmogorov–Smirnov distance at 1e5 draws", ks, ks < 0.01, "< 0.01");
    result
}

// ---------------------------------------------------------------------------
// Full-conditional density-ratio test
// ---------------------------------------------------------------------------

/// Joint log density of (y | ξ, v, σ) · p(v | σ) · p(ξ) · p(σ), up to an
/// additive constant free of (ξ, v, σ). Written independently of the sampler
/// update code; only shared parameter definitions come from `TauParams`.
#[allow(clippy::too_many_arguments)]
fn log_joint(
    y: &[f64],
    w: &RowMatrix,
    xi: &[f64],
    v: &[f64],
    sigma: f64,
    params: TauParams,
    prior_var: f64,
    a0: f64,
    b0: f64,
) -> f64 {
    let n = w.nrows();
    let mut lp = 0.0;
    for i in 0..n {
        let wi = w.row(i);
        let eta: f64 = wi.iter().zip(xi).map(|(a, b)| a * b).sum();
        let resid = y[i] - eta - params.theta * v[i];
        // Normal stage: y_i | … ~ N(η + θv, ψ²σv).
        lp += -0.5 * (sigma * v[i]).ln() - resid * resid / (2.0 * params.psi2 * sigma * v[i]);
        // Exponential stage with mean σ.
        lp += -sigma.ln() - v[i] / sigma;
    }
    // Coefficient prior N(0, c·I).
    lp += -xi.iter().map(|c| c * c).sum::<f64>() / (2.0 * prior_var);
    // Inverse-gamma prior on σ.
    lp += -(a0 + 1.0) * sigma.ln() - b0 / sigma;
    lp
}

/// Runs the density-ratio test on a 5-observation toy problem: for each
/// Gibbs block, the implemented conditional must differ from the joint by a
/// constant. Returns the largest absolute log-ratio deviation over
/// `evals` random evaluation pairs per block.
pub fn conditional_density_ratio_deviation(evals: usize, seed: u64) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = 5;
    let params = sampler::tau_params(0.25).expect("valid tau");
    let (prior_var, a0, b0) = (100.0, 0.01, 0.01);

    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let perp: f64 = StandardNormal.sample(&mut rng);
        rows.push(vec![perp, 1.0, x1]);
        let e: f64 = StandardNormal.sample(&mut rng);
        y.push(0.3 + 0.8 * x1 + 0.5 * e);
    }
    let w = RowMatrix::from_rows(&rows);
    let k = w.ncols();

    let mut worst = 0.0f64;
    let mut track = |d: f64| {
        if d > worst {
            worst = d;
        }
    };
    let rand_state = |rng: &mut ChaCha12Rng| -> (Vec<f64>, Vec<f64>, f64) {
        let xi: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let v: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>() * 2.9).collect();
        let sigma = 0.2 + rng.random::<f64>() * 2.0;
        (xi, v, sigma)
    };

    for _ in 0..evals {
        let (xi, v, sigma) = rand_state(&mut rng);
        let joint =
            |xi: &[f64], v: &[f64], s: f64| log_joint(&y, &w, xi, v, s, params, prior_var, a0, b0);

        // Coefficient block: N(mean, A⁻¹).
        let (mean, chol) = sampler::coef_conditional(&y, &w, &v, sigma, params, prior_var);
        let log_q_xi = |xi: &[f64]| {
            let d = nalgebra::DVector::from_column_slice(xi) - &mean;
            let lt_d = chol.l().transpose() * d;
            -0.5 * lt_d.norm_squared()
        };
        let (xi2, _, _) = rand_state(&mut rng);
        let impl_delta = log_q_xi(&xi) - log_q_xi(&xi2);
        let joint_delta = joint(&xi, &v, sigma) - joint(&xi2, &v, sigma);
        track((impl_delta - joint_delta).abs());

        // Latent block, one coordinate at a time.
        let i = rng.random_range(0..n);
        let wi = w.row(i);
        let eta: f64 = wi.iter().zip(&xi).map(|(a, b)| a * b).sum();
        let (chi, psi) = sampler::latent_conditional(y[i] - eta, sigma, params);
        let log_q_v = |vi: f64| -0.5 * vi.ln() - 0.5 * (chi / vi + psi * vi);
        let v1 = 0.1 + rng.random::<f64>() * 2.9;
        let v2 = 0.1 + rng.random::<f64>() * 2.9;
        let mut va = v.clone();
        let mut vb = v.clone();
        va[i] = v1;
        vb[i] = v2;
        let impl_delta = log_q_v(v1) - log_q_v(v2);
        let joint_delta = joint(&xi, &va, sigma) - joint(&xi, &vb, sigma);
        track((impl_delta - joint_delta).abs());

        // Scale block: InverseGamma(shape, scale).
        let (shape, scale) =
            sampler::sigma_conditional(&y, &w, &xi, &v, params, a0, b0);
        let log_q_sigma = |s: f64| -(shape + 1.0) * s.ln() - scale / s;
        let s1 = 0.2 + rng.random::<f64>() * 2.0;
        let s2 = 0.2 + rng.random::<f64>() * 2.0;
        let impl_delta = log_q_sigma(s1) - log_q_sigma(s2);
        let joint_delta = joint(&xi, &v, s1) - joint(&xi, &v, s2);
        track((impl_delta - joint_delta).abs());
    }
    worst
}

pub fn check_full_conditionals() -> CheckResult {
    let mut result = CheckResult::new("full-conditional-density-ratios");
    let dev = conditional_density_ratio_deviation(100, 0xbeef);
    result.require("max |log-ratio deviation| over 100 points", dev, dev < 1e-6, "< 1e-6");
    result
}

// ---------------------------------------------------------------------------
// Sampler vs brute-force check-loss minimizer
// ---------------------------------------------------------------------------

pub fn check_sampler_vs_oracle(scale: Scale) -> CheckResult {
    let mut result = CheckResult::new("sampler-vs-check-loss-oracle");
    let n = match scale {
        Scale::Default => 200,
        Scale::Tiny => 120,
    };
    // (number of x covariates beyond the intercept, tau)
    let problems: [(usize, f64); 5] =
        [(0, 0.25), (0, 0.5), (1, 0.25), (2, 0.5), (2, 0.25)];
    for (idx, (extra, tau)) in problems.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xacc0 + idx as u64);
        let mut rows = Vec::with_capacity(n);
        let mut y_u = Vec::with_capacity(n);
        let mut y_perp = Vec::with_capacity(n);
        let slopes: Vec<f64> = (0..*extra).map(|j| 0.4 - 0.3 * j as f64).collect();
        for _ in 0..n {
            let xs: Vec<f64> = (0..*extra)
                .map(|_| {
                    let s: f64 = StandardNormal.sample(&mut rng);
                    s
                })
                .collect();
            let perp: f64 = StandardNormal.sample(&mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            let mut mean = 0.5 - 0.25 * perp;
            for (s, x) in slopes.iter().zip(&xs) {
                mean += s * x;
            }
            y_u.push(mean + 0.5 * e);
            y_perp.push(perp);
            let mut row = vec![1.0];
            row.extend(xs);
            rows.push(row);
        }
        let design = Design {
            matrix: RowMatrix::from_rows(&rows),
            columns: (0..=*extra)
                .map(|j| if j == 0 { "intercept".to_string() } else { format!("x{j}") })
                .collect(),
        };
        let cfg = reduced_chain(scale, 0x51ab + idx as u64);
        let fit = sampler::gibbs_fit(&y_u, &y_perp, &design, *tau, &cfg).expect("fit");
        let mut sampler_coefs = vec![fit.b_hat];
        sampler_coefs.extend(fit.beta_hat.iter().copied());

        let prob = oracle::CheckLossProblem::for_directional_fit(&y_u, &y_perp, &design, *tau)
            .expect("problem");
        let minimizer = oracle::brute_force_fit(&prob).expect("oracle fit");

        let max_gap = sampler_coefs
            .iter()
            .zip(&minimizer)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        result.require(
            &format!("problem {idx} (p={}, tau={tau}) max coefficient gap", extra + 1),
            max_gap,
            max_gap < 0.1,
            "< 0.1",
        );

        // The minimizer never loses to the posterior mean by more than noise.
        let loss_excess = oracle::check_loss(&minimizer, &prob)
            - oracle::check_loss(&sampler_coefs, &prob);
        result.require(
            &format!("problem {idx} oracle loss minus posterior-mean loss"),
            loss_excess,
            loss_excess <= 1e-3,
            "<= 1e-3",
        );
    }
    result
}

// ---------------------------------------------------------------------------
// Directional coverage
// ---------------------------------------------------------------------------

pub fn check_coverage(scale: Scale) -> CheckResult {
    let mut result = CheckResult::new("directional-quantile-coverage");
    let (n, m, lo, hi) = match scale {
        Scale::Default => (2000, 36, 0.22, 0.28),
        Scale::Tiny => (600, 12, 0.20, 0.30),
    };
    let z = standard_normal_cloud(n, 0xc0ffee);
    let x = Design::intercept_only(n);
    let cfg = reduced_chain(scale, 0xcafe);
    let fit = engine::fit_all_directions(
        &z,
        &x,
        0.25,
        &cfg,
        m,
        None,
        ScalingParams::identity(),
        "synthetic-coverage",
    )
    .expect("coverage fit");
    let mut worst_low = 1.0f64;
    let mut worst_high = 0.0f64;
    for f in &fit.fits {
        let h = geometry::halfplane_from_fit(&f.direction, f.b_hat, f.beta_hat[0]);
        let cov = oracle::empirical_direction_coverage(&h, &z);
        worst_low = worst_low.min(cov);
        worst_high = worst_high.max(cov);
    }
    result.require(
        &format!("min coverage over {m} directions"),
        worst_low,
        worst_low >= lo,
        &format!(">= {lo}"),
    );
    result.require(
        &format!("max coverage over {m} directions"),
        worst_high,
        worst_high <= hi,
        &format!("<= {hi}"),
    );
    result
}

// ---------------------------------------------------------------------------
// Geometry membership equivalence
// ---------------------------------------------------------------------------

pub fn check_geometry() -> CheckResult {
    let mut result = CheckResult::new("polygon-membership-vs-halfplane-oracle");
    let mut rng = ChaCha12Rng::seed_from_u64(0x9e0);

    // Random tangent halfplanes of an ellipse, plus the clipping box itself.
    let mut halfplanes: Vec<Halfplane> = Vec::new();
    for _ in 0..40 {
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        let normal = [-a.cos() / 1.4, -a.sin() / 0.9];
        let boundary = [1.4 * a.cos(), 0.9 * a.sin()];
        halfplanes.push(Halfplane::new(normal, geometry::dot(normal, boundary)));
    }
    let bbox = Polygon::bounding_square(10.0);
    let poly = geometry::intersect_halfplanes(&halfplanes, &bbox);
    assert!(!poly.is_empty());

    // The direct evaluation includes the box constraints, matching the
    // clipped universe.
    let mut all_planes = halfplanes.clone();
    all_planes.extend([
        Halfplane::new([1.0, 0.0], -10.0),
        Halfplane::new([-1.0, 0.0], -10.0),
        Halfplane::new([0.0, 1.0], -10.0),
        Halfplane::new([0.0, -1.0], -10.0),
    ]);

    let mut mismatches = 0usize;
    let side = 100;
    for i in 0..side {
        for j in 0..side {
            let p = [
                -2.0 + 4.0 * i as f64 / (side - 1) as f64,
                -2.0 + 4.0 * j as f64 / (side - 1) as f64,
            ];
            let in_poly = geometry::contains(&poly, p);
            let in_planes = all_planes.iter().all(|h| h.contains(p));
            if in_poly != in_planes {
                let near_boundary =
                    all_planes.iter().any(|h| h.boundary_distance(p) <= 1e-9);
                if !near_boundary {
                    mismatches += 1;
                }
            }
        }
    }
    result.require(
        "membership mismatches beyond 1e-9 of a boundary (10,000 grid points)",
        mismatches as f64,
        mismatches == 0,
        "= 0",
    );
    result
}

// ---------------------------------------------------------------------------
// Fitted region vs brute-force Tukey depth region
// ---------------------------------------------------------------------------

pub fn check_tukey(scale: Scale) -> CheckResult {
    let mut result = CheckResult::new("region-vs-tukey-depth-oracle");
    // The fitted-vs-empirical gap scales with 1/n, so the tiny pass keeps
    // n=400 and saves time on chain length and direction count instead.
    let (n, m) = match scale {
        Scale::Default => (400, 120),
        Scale::Tiny => (400, 90),
    };
    // Elliptical cloud: correlated Gaussian.
    let mut rng = ChaCha12Rng::seed_from_u64(0x7ac1);
    let z: Vec<Vec2> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [a, 0.6 * a + 0.8 * b]
        })
        .collect();
    let x = Design::intercept_only(n);
    let cfg = reduced_chain(scale, 0x7a11);
    let fit = engine::fit_all_directions(
        &z,
        &x,
        0.25,
        &cfg,
        m,
        None,
        ScalingParams::identity(),
        "synthetic-tukey",
    )
    .expect("tukey fit");
    let (region, _) = engine::quantile_region_for_x(&fit, &[1.0]).expect("region");
    let depth_region = oracle::tukey_region_bruteforce(&z, 0.25);
    assert!(!region.is_empty() && !depth_region.is_empty());

    let sym_diff = geometry::symmetric_difference_area(&region, &depth_region);
    let ratio = sym_diff / depth_region.area();
    result.require("symmetric difference / depth-region area", ratio, ratio < 0.10, "< 0.10");
    result
}

// ---------------------------------------------------------------------------
// Structural figure checks (data-dependent, qualitative)
// ---------------------------------------------------------------------------

/// Qualitative structure of the full-data contour families: best-of-five
/// Grand Slam regions sit higher on the minutes axis than "others" regions
/// for every player, and Nadal's clay region leads all nine player–surface
/// regions on the relative-points axis.
pub fn check_structural_figures(
    tournament: &crate::engine::ContourSet,
    surface: &crate::engine::ContourSet,
) -> CheckResult {
    let mut result = CheckResult::new("structural-figure-reproduction");
    let centroid = |set: &crate::engine::ContourSet, name: &str| -> Option<Vec2> {
        set.profiles
            .iter()
            .find(|p| p.name == name)
            .and_then(|p| p.polygon_orig.centroid())
    };
    for player in ["federer", "djokovic", "nadal"] {
        let gs = centroid(tournament, &format!("{player}_grand_slam"));
        let others = centroid(tournament, &format!("{player}_others"));
        match (gs, others) {
            (Some(g), Some(o)) => {
                let gap = g[1] - o[1];
                result.require(
                    &format!("{player}: grand-slam minus others centroid minutes"),
                    gap,
                    gap > 0.0,
                    "> 0",
                );
            }
            _ => result.require(
                &format!("{player}: tournament regions present"),
                0.0,
                false,
                "non-empty polygons",
            ),
        }
    }

    let mut nadal_clay = f64::MIN;
    let mut best_other = f64::MIN;
    let mut seen = 0;
    for p in &surface.profiles {
        if let Some(c) = p.polygon_orig.centroid() {
            seen += 1;
            if p.name == "nadal_clay" {
                nadal_clay = c[0];
            } else {
                best_other = best_other.max(c[0]);
            }
        }
    }
    result.require("player-surface regions present", seen as f64, seen == 9, "= 9");
    let lead = nadal_clay - best_other;
    result.require(
        "nadal clay centroid rel-points lead over all other player-surface regions",
        lead,
        lead > 0.0,
        "> 0",
    );
    result
}

// ---------------------------------------------------------------------------

/// Runs the whole suite; checks are independent, so they run in parallel.
pub fn run_all(scale: Scale) -> Vec<CheckResult> {
    let jobs: Vec<Box<dyn Fn() -> CheckResult + Send + Sync>> = vec![
        Box::new(check_geometry),
        Box::new(check_full_conditionals),
        Box::new(move || check_gig(scale)),
        Box::new(move || check_sampler_vs_oracle(scale)),
        Box::new(move || check_coverage(scale)),
        Box::new(move || check_tukey(scale)),
    ];
    jobs.par_iter().map(|job| job()).collect()
}
