//! Generalized inverse Gaussian variates.
//!
//! The latent scales of the asymmetric-Laplace mixture have GIG full
//! conditionals with order parameter 1/2, density ∝ x^{−1/2}·exp(−(χ/x + ψx)/2).
//! The primary sampler uses the reciprocal inverse-Gaussian identity; a
//! generic-order ratio-of-uniforms sampler serves as a cross-checked fallback.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// One draw from the inverse Gaussian IG(mean μ, shape λ) by the
/// Michael–Schucany–Haas method. The smaller root is computed in the
/// cancellation-free form μ/(1 + w + √(w(w+2))), w = μy/(2λ).
fn sample_inverse_gaussian<R: Rng + ?Sized>(mu: f64, lambda: f64, rng: &mut R) -> f64 {
    let nu: f64 = StandardNormal.sample(rng);
    let y = nu * nu;
    let w = mu * y / (2.0 * lambda);
    let x = mu / (1.0 + w + (w * (w + 2.0)).sqrt());
    let u: f64 = rng.random();
    if u <= mu / (mu + x) {
        x
    } else {
        mu * mu / x
    }
}

/// Products of χ·ψ below this are treated as the χ→0 gamma limit.
const DEGENERATE_OMEGA2: f64 = 1e-16;

/// One draw from GIG(order 1/2, χ, ψ): density ∝ x^{−1/2}·exp(−(χ/x + ψx)/2).
///
/// If X follows this law then 1/X is inverse Gaussian with mean √(ψ/χ) and
/// shape ψ. As χ→0 the law degenerates to Gamma(1/2, rate ψ/2), which is the
/// branch taken when χψ underflows the identity.
pub fn sample_gig_half<R: Rng + ?Sized>(chi: f64, psi: f64, rng: &mut R) -> Result<f64> {
    if !positive(chi) || !positive(psi) {
        return Err(Error::Parameter(format!(
            "GIG parameters must be positive, got chi={chi}, psi={psi}"
        )));
    }
    Ok(gig_half_unchecked(chi, psi, rng))
}

#[inline]
pub(crate) fn gig_half_unchecked<R: Rng + ?Sized>(chi: f64, psi: f64, rng: &mut R) -> f64 {
    if chi * psi < DEGENERATE_OMEGA2 {
        let gamma = Gamma::new(0.5, 2.0 / psi).expect("valid gamma parameters");
        return gamma.sample(rng).max(f64::MIN_POSITIVE);
    }
    let z = sample_inverse_gaussian((psi / chi).sqrt(), psi, rng);
    1.0 / z
}

/// Analytic mean of GIG(1/2, χ, ψ): √(χ/ψ)·(1 + 1/ω) with ω = √(χψ), from
/// K_{3/2}(ω) = K_{1/2}(ω)·(1 + 1/ω).
pub fn gig_half_mean(chi: f64, psi: f64) -> f64 {
    let omega = (chi * psi).sqrt();
    (chi / psi).sqrt() * (1.0 + 1.0 / omega)
}

/// One draw from GIG(λ, χ, ψ) of any order via ratio of uniforms, working in
/// log space. Slower than the half-order path; used as an independent
/// cross-check of it.
pub fn sample_gig<R: Rng + ?Sized>(order: f64, chi: f64, psi: f64, rng: &mut R) -> Result<f64> {
    if !positive(chi) || !positive(psi) {
        return Err(Error::Parameter(format!(
            "GIG parameters must be positive, got chi={chi}, psi={psi}"
        )));
    }
    let log_f = |x: f64| (order - 1.0) * x.ln() - 0.5 * (chi / x + psi * x);
    let mode = |shift: f64| (shift + (shift * shift + chi * psi).sqrt()) / psi;
    // Mode of f and of x²f(x); both exist for chi > 0.
    let x_f = mode(order - 1.0);
    let x_g = mode(order + 1.0);
    let log_f_max = log_f(x_f);
    let v_max = x_g * (0.5 * (log_f(x_g) - log_f_max)).exp();
    for _ in 0..100_000 {
        let u: f64 = rng.random();
        let v: f64 = rng.random::<f64>() * v_max;
        if u <= 0.0 {
            continue;
        }
        let x = v / u;
        if 2.0 * u.ln() <= log_f(x) - log_f_max {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(format!(
        "GIG ratio-of-uniforms rejected 1e5 proposals (order={order}, chi={chi}, psi={psi})"
    )))
}
