//! Gibbs sampler for one directional quantile regression under the
//! asymmetric-Laplace working likelihood in its normal–exponential mixture
//! form: given latent scales v,
//!
//! ```text
//! y_i | ξ, σ, v_i ~ N(w_iᵀξ + θ v_i, ψ²σ v_i),   v_i ~ Exp(mean σ),
//! θ = (1−2τ)/(τ(1−τ)),   ψ² = 2/(τ(1−τ)),
//! ```
//!
//! with w_i the design row (optionally prefixed by the orthogonal projection
//! y⊥_i) and ξ the stacked coefficients (b, β). Priors: ξ ~ N(0, c·I) with a
//! large c, σ ~ InverseGamma(a₀, b₀). The sweep alternates three exact full
//! conditionals: a joint normal update of ξ, a per-observation GIG(1/2)
//! update of v, and an inverse-gamma update of σ.

mod gig;

pub use gig::{gig_half_mean, sample_gig, sample_gig_half};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::mat::RowMatrix;

/// Chain settings. The defaults are the full production settings; tests and
/// the validation suite pass reduced lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Discarded initial iterations.
    pub burn_in: usize,
    /// Post-burn-in iterations.
    pub total_iters: usize,
    /// Keep every `thin`-th post-burn-in draw.
    pub thin: usize,
    /// Variance c of the N(0, c·I) prior on (b, β).
    pub prior_var: f64,
    /// Inverse-gamma shape a₀ of the σ prior.
    pub sigma_shape: f64,
    /// Inverse-gamma scale b₀ of the σ prior.
    pub sigma_scale: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            total_iters: 100_000,
            thin: 100,
            prior_var: 100.0,
            sigma_shape: 0.01,
            sigma_scale: 0.01,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.thin == 0 || self.total_iters < self.thin {
            return Err(Error::Config(format!(
                "need total_iters >= thin >= 1, got total_iters={}, thin={}",
                self.total_iters, self.thin
            )));
        }
        if !self.total_iters.is_multiple_of(self.thin) {
            return Err(Error::Config(format!(
                "total_iters ({}) must be a multiple of thin ({})",
                self.total_iters, self.thin
            )));
        }
        if !positive(self.prior_var) {
            return Err(Error::Config(format!("prior_var must be positive, got {}", self.prior_var)));
        }
        if !positive(self.sigma_shape) || !positive(self.sigma_scale) {
            return Err(Error::Config(format!(
                "inverse-gamma hyperparameters must be positive, got ({}, {})",
                self.sigma_shape, self.sigma_scale
            )));
        }
        Ok(())
    }

    pub fn kept_draws(&self) -> usize {
        self.total_iters / self.thin
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Mixture constants for a quantile magnitude τ:
/// θ = (1−2τ)/(τ(1−τ)), ψ² = 2/(τ(1−τ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauParams {
    pub tau: f64,
    pub theta: f64,
    pub psi2: f64,
}

pub fn tau_params(tau: f64) -> Result<TauParams> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Parameter(format!("tau must lie in (0,1), got {tau}")));
    }
    let denom = tau * (1.0 - tau);
    Ok(TauParams { tau, theta: (1.0 - 2.0 * tau) / denom, psi2: 2.0 / denom })
}

/// Posterior summaries and the retained chain of one fit. Draw columns are
/// ordered `[b,] β…, σ`; `b` is present only for directional fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsFit {
    /// Posterior mean of the coefficient on y⊥ (0 when constrained out).
    pub b_hat: f64,
    pub beta_hat: Vec<f64>,
    pub sigma_hat: f64,
    pub has_direction_coef: bool,
    pub draw_columns: Vec<String>,
    #[serde(skip)]
    pub kept_draws: RowMatrix,
    pub ess: Vec<f64>,
}

// Guards against degenerate latent scales (near-interpolated observations).
// Statistically invisible: they activate only when a residual is ~1e-6 sd.
const LATENT_FLOOR: f64 = 1e-12;
const LATENT_CEIL: f64 = 1e12;
const CHI_FLOOR: f64 = 1e-300;

/// Fits the directional model: `y_u` on the design plus the projection
/// `y_perp`, whose coefficient is the depth-direction slope b.
pub fn gibbs_fit(
    y_u: &[f64],
    y_perp: &[f64],
    x: &Design,
    tau: f64,
    cfg: &SamplerConfig,
) -> Result<GibbsFit> {
    let n = y_u.len();
    if y_perp.len() != n || x.n() != n {
        return Err(Error::Parameter(format!(
            "inconsistent lengths: y_u={n}, y_perp={}, X rows={}",
            y_perp.len(),
            x.n()
        )));
    }
    let k = x.p() + 1;
    let mut w = RowMatrix::zeros(0, k);
    let mut row = vec![0.0; k];
    for (i, perp) in y_perp.iter().enumerate() {
        row[0] = *perp;
        row[1..].copy_from_slice(x.matrix.row(i));
        w.push_row(&row);
    }
    let mut names = vec!["b".to_string()];
    names.extend(x.columns.iter().cloned());
    run_fit(y_u, &w, &names, true, tau_params(tau)?, cfg)
}

/// Fits the plain quantile regression with the directional coefficient
/// constrained to zero (no y⊥ column); used by the unconditional oracles.
pub fn gibbs_fit_constrained(
    y: &[f64],
    x: &Design,
    tau: f64,
    cfg: &SamplerConfig,
) -> Result<GibbsFit> {
    if x.n() != y.len() {
        return Err(Error::Parameter(format!(
            "inconsistent lengths: y={}, X rows={}",
            y.len(),
            x.n()
        )));
    }
    run_fit(y, &x.matrix, &x.columns, false, tau_params(tau)?, cfg)
}

fn run_fit(
    y: &[f64],
    w: &RowMatrix,
    names: &[String],
    directional: bool,
    params: TauParams,
    cfg: &SamplerConfig,
) -> Result<GibbsFit> {
    cfg.validate()?;
    let n = w.nrows();
    let k = w.ncols();
    if n <= k {
        return Err(Error::Parameter(format!(
            "need more observations than coefficients: n={n}, coefficients={k}"
        )));
    }
    check_full_rank(w, names)?;

    let kept = run_gibbs_core(y, w, params, cfg)?;
    let (means, _sds, ess) = posterior_summary(&kept)?;

    let mut draw_columns: Vec<String> = names.to_vec();
    draw_columns.push("sigma".to_string());

    let (b_hat, beta_hat) = if directional {
        (means[0], means[1..k].to_vec())
    } else {
        (0.0, means[..k].to_vec())
    };
    Ok(GibbsFit {
        b_hat,
        beta_hat,
        sigma_hat: means[k],
        has_direction_coef: directional,
        draw_columns,
        kept_draws: kept,
        ess,
    })
}

/// Flags linearly dependent columns via modified Gram–Schmidt.
fn check_full_rank(w: &RowMatrix, names: &[String]) -> Result<()> {
    let n = w.nrows();
    let k = w.ncols();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut dependent = Vec::new();
    for j in 0..k {
        let mut col: Vec<f64> = (0..n).map(|i| w.get(i, j)).collect();
        let orig_norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        for b in &basis {
            let proj: f64 = col.iter().zip(b).map(|(c, b)| c * b).sum();
            for (c, b) in col.iter_mut().zip(b) {
                *c -= proj * b;
            }
        }
        let res_norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res_norm <= 1e-8 * orig_norm.max(1e-8) {
            dependent.push(names.get(j).cloned().unwrap_or_else(|| format!("col{j}")));
        } else {
            for c in col.iter_mut() {
                *c /= res_norm;
            }
            basis.push(col);
        }
    }
    if dependent.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficient(dependent))
    }
}

/// Runs the three-block sweep and returns the retained draws, columns
/// `[coefficients…, σ]`. Deterministic given `cfg.seed`.
pub(crate) fn run_gibbs_core(
    y: &[f64],
    w: &RowMatrix,
    params: TauParams,
    cfg: &SamplerConfig,
) -> Result<RowMatrix> {
    let n = w.nrows();
    let k = w.ncols();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut xi = vec![0.0; k];
    let mut v = vec![1.0; n];
    let mut sigma = 1.0f64;

    let total = cfg.burn_in + cfg.total_iters;
    let mut kept = RowMatrix::zeros(0, k + 1);
    let mut kept_row = vec![0.0; k + 1];

    // Scratch buffers reused across iterations.
    let mut a_lower = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];

    for iter in 0..total {
        update_coefficients(
            y, w, &v, sigma, params, cfg.prior_var, &mut a_lower, &mut rhs, &mut xi, &mut rng,
        )
        .map_err(|_| Error::NonFiniteDraw { iteration: iter, block: "coefficients" })?;
        if xi.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteDraw { iteration: iter, block: "coefficients" });
        }

        update_latents(y, w, &xi, sigma, params, &mut v, &mut rng);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDraw { iteration: iter, block: "latent" });
        }

        sigma = draw_sigma(y, w, &xi, &v, params, cfg, &mut rng);
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::NonFiniteDraw { iteration: iter, block: "sigma" });
        }

        if iter >= cfg.burn_in && (iter - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            kept_row[..k].copy_from_slice(&xi);
            kept_row[k] = sigma;
            kept.push_row(&kept_row);
        }
    }
    debug_assert_eq!(kept.nrows(), cfg.kept_draws());
    Ok(kept)
}

/// Normal full conditional of the coefficient block:
/// precision A = I/c + Σᵢ wᵢwᵢᵀ/(ψ²σvᵢ), mean A⁻¹·Σᵢ wᵢ(yᵢ−θvᵢ)/(ψ²σvᵢ).
///
/// Returns the mean and the Cholesky factor of A.
pub fn coef_conditional(
    y: &[f64],
    w: &RowMatrix,
    v: &[f64],
    sigma: f64,
    params: TauParams,
    prior_var: f64,
) -> (DVector<f64>, Cholesky<f64, Dyn>) {
    let k = w.ncols();
    let mut a_lower = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    accumulate_normal_equations(y, w, v, sigma, params, prior_var, &mut a_lower, &mut rhs);
    let (mean, chol) = solve_coef_system(&a_lower, &rhs, k).expect("coefficient precision is SPD");
    (mean, chol)
}

#[allow(clippy::too_many_arguments)]
fn update_coefficients<R: Rng + ?Sized>(
    y: &[f64],
    w: &RowMatrix,
    v: &[f64],
    sigma: f64,
    params: TauParams,
    prior_var: f64,
    a_lower: &mut [f64],
    rhs: &mut [f64],
    xi: &mut [f64],
    rng: &mut R,
) -> std::result::Result<(), ()> {
    let k = w.ncols();
    accumulate_normal_equations(y, w, v, sigma, params, prior_var, a_lower, rhs);
    let (mean, chol) = solve_coef_system(a_lower, rhs, k).ok_or(())?;
    // ξ = mean + L⁻ᵀ z with A = LLᵀ.
    let z = DVector::from_fn(k, |_, _| {
        let s: f64 = StandardNormal.sample(rng);
        s
    });
    let l = chol.l();
    let shift = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or(())?;
    for j in 0..k {
        xi[j] = mean[j] + shift[j];
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn accumulate_normal_equations(
    y: &[f64],
    w: &RowMatrix,
    v: &[f64],
    sigma: f64,
    params: TauParams,
    prior_var: f64,
    a_lower: &mut [f64],
    rhs: &mut [f64],
) {
    let n = w.nrows();
    let k = w.ncols();
    let scale = 1.0 / (params.psi2 * sigma);
    a_lower.fill(0.0);
    rhs.fill(0.0);
    for i in 0..n {
        let wi = w.row(i);
        let d = scale / v[i];
        let resp = (y[i] - params.theta * v[i]) * d;
        for j in 0..k {
            let wj = wi[j];
            rhs[j] += wj * resp;
            let dj = d * wj;
            let row = &mut a_lower[j * k..j * k + k];
            for (l, &wl) in wi.iter().enumerate().skip(j) {
                row[l] += dj * wl;
            }
        }
    }
    let inv_pv = 1.0 / prior_var;
    for j in 0..k {
        a_lower[j * k + j] += inv_pv;
    }
}

fn solve_coef_system(
    a_lower: &[f64],
    rhs: &[f64],
    k: usize,
) -> Option<(DVector<f64>, Cholesky<f64, Dyn>)> {
    // a_lower holds the upper triangle row-wise; mirror into a full matrix.
    let a = DMatrix::from_fn(k, k, |r, c| {
        if r <= c {
            a_lower[r * k + c]
        } else {
            a_lower[c * k + r]
        }
    });
    let chol = Cholesky::new(a)?;
    let mean = chol.solve(&DVector::from_column_slice(rhs));
    Some((mean, chol))
}

/// GIG parameters (χᵢ, ψ̃) of one latent scale's full conditional:
/// χᵢ = δᵢ²/(ψ²σ) with δᵢ the residual, ψ̃ = θ²/(ψ²σ) + 2/σ.
pub fn latent_conditional(residual: f64, sigma: f64, params: TauParams) -> (f64, f64) {
    let scale = 1.0 / (params.psi2 * sigma);
    let chi = (residual * residual * scale).max(CHI_FLOOR);
    let psi = params.theta * params.theta * scale + 2.0 / sigma;
    (chi, psi)
}

fn update_latents<R: Rng + ?Sized>(
    y: &[f64],
    w: &RowMatrix,
    xi: &[f64],
    sigma: f64,
    params: TauParams,
    v: &mut [f64],
    rng: &mut R,
) {
    let n = w.nrows();
    let scale = 1.0 / (params.psi2 * sigma);
    let psi = params.theta * params.theta * scale + 2.0 / sigma;
    for i in 0..n {
        let wi = w.row(i);
        let mut eta = 0.0;
        for (wv, c) in wi.iter().zip(xi) {
            eta += wv * c;
        }
        let delta = y[i] - eta;
        let chi = (delta * delta * scale).max(CHI_FLOOR);
        v[i] = gig::gig_half_unchecked(chi, psi, rng).clamp(LATENT_FLOOR, LATENT_CEIL);
    }
}

/// Inverse-gamma full conditional of σ:
/// shape a₀ + 3n/2, scale b₀ + Σᵢ δ̃ᵢ²/(2ψ²vᵢ) + Σᵢ vᵢ, δ̃ᵢ = yᵢ − wᵢᵀξ − θvᵢ.
///
/// Both the normal mixture stage (σ in its variance) and the exponential
/// latent stage (mean σ) contribute, hence the 3n/2.
pub fn sigma_conditional(
    y: &[f64],
    w: &RowMatrix,
    xi: &[f64],
    v: &[f64],
    params: TauParams,
    sigma_shape: f64,
    sigma_scale: f64,
) -> (f64, f64) {
    let n = w.nrows();
    let shape = sigma_shape + 1.5 * n as f64;
    let mut scale = sigma_scale;
    for i in 0..n {
        let wi = w.row(i);
        let mut eta = 0.0;
        for (wv, c) in wi.iter().zip(xi) {
            eta += wv * c;
        }
        let resid = y[i] - eta - params.theta * v[i];
        scale += resid * resid / (2.0 * params.psi2 * v[i]) + v[i];
    }
    (shape, scale)
}

fn draw_sigma<R: Rng + ?Sized>(
    y: &[f64],
    w: &RowMatrix,
    xi: &[f64],
    v: &[f64],
    params: TauParams,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> f64 {
    let (shape, scale) = sigma_conditional(y, w, xi, v, params, cfg.sigma_shape, cfg.sigma_scale);
    // σ ~ InvGamma(shape, scale) ⇔ 1/σ ~ Gamma(shape, rate scale).
    let g = Gamma::new(shape, 1.0 / scale).expect("valid gamma parameters").sample(rng);
    (1.0 / g).clamp(1e-10, 1e10)
}

/// Columnwise posterior mean, standard deviation, and effective sample size.
pub fn posterior_summary(kept: &RowMatrix) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let rows = kept.nrows();
    if rows < 10 {
        return Err(Error::TooFewDraws { got: rows, need: 10 });
    }
    let cols = kept.ncols();
    let mut means = Vec::with_capacity(cols);
    let mut sds = Vec::with_capacity(cols);
    let mut ess_v = Vec::with_capacity(cols);
    let mut chain = vec![0.0; rows];
    for j in 0..cols {
        for (i, c) in chain.iter_mut().enumerate() {
            *c = kept.get(i, j);
        }
        let mean = chain.iter().sum::<f64>() / rows as f64;
        let var = chain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rows as f64 - 1.0);
        means.push(mean);
        sds.push(var.sqrt());
        ess_v.push(effective_sample_size(&chain));
    }
    Ok((means, sds, ess_v))
}

/// ESS = n / (1 + 2·Σ ρ_k), summing lag autocorrelations until they drop
/// below 0.05. A zero-variance chain counts as fully independent.
pub fn effective_sample_size(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 2 {
        return n as f64;
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let var = chain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var < 1e-300 {
        return n as f64;
    }
    let mut sum_rho = 0.0;
    for k in 1..=(n / 2) {
        let cov = (0..n - k)
            .map(|i| (chain[i] - mean) * (chain[i + k] - mean))
            .sum::<f64>()
            / (n - k) as f64;
        let rho = cov / var;
        if rho < 0.05 {
            break;
        }
        sum_rho += rho;
    }
    n as f64 / (1.0 + 2.0 * sum_rho)
}
