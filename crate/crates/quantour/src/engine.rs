//! Full-model orchestration: fit every grid direction, assemble quantile
//! regions per covariate profile, and package contour sets for export.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::{
    design_column_names, profile_vector, CovariateProfile, Design, ScalingParams,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Direction, Halfplane, Polygon, Vec2};
use crate::ingest::{Player, Surface, Tournament};
use crate::manifest::RunManifest;
use crate::mat::RowMatrix;
use crate::sampler::{self, SamplerConfig};

/// Half-width of the clipping square, in standardized units. Fitted contours
/// live within a few standard deviations, so ±10 never truncates a real
/// region while keeping every intersection bounded.
pub const BBOX_HALF_WIDTH: f64 = 10.0;

/// Posterior summaries and retained chain for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionFit {
    pub direction: Direction,
    pub tau: f64,
    pub b_hat: f64,
    pub beta_hat: Vec<f64>,
    pub sigma_hat: f64,
    pub ess: Vec<f64>,
    #[serde(skip)]
    pub kept_draws: RowMatrix,
    #[serde(skip)]
    pub draw_columns: Vec<String>,
}

/// A complete fit across the direction grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub tau: f64,
    pub directions: usize,
    pub config: SamplerConfig,
    pub design_columns: Vec<String>,
    pub scaling: ScalingParams,
    pub data_fingerprint: String,
    pub fits: Vec<DirectionFit>,
}

impl ModelFit {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<ModelFit> {
        let fit: ModelFit = serde_json::from_str(json)?;
        if fit.fits.len() != fit.directions {
            return Err(Error::Parameter(format!(
                "fit file inconsistent: {} directions declared, {} present",
                fit.directions,
                fit.fits.len()
            )));
        }
        Ok(fit)
    }

    /// Content hash of the serialized fit.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(sha256_hex(self.to_json()?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

/// Mixes the grid index into the base seed so direction fits are
/// reproducible regardless of scheduling order.
pub fn direction_seed(seed: u64, index: usize) -> u64 {
    seed ^ splitmix64((index as u64).wrapping_add(0x9e37_79b9_7f4a_7c15))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Fits every direction of the `m`-point grid on standardized responses.
///
/// Directions run in parallel (bounded by `jobs` when given); failure of any
/// direction fails the whole fit, with the direction index attached.
#[allow(clippy::too_many_arguments)]
pub fn fit_all_directions(
    z: &[Vec2],
    x: &Design,
    tau: f64,
    cfg: &SamplerConfig,
    m: usize,
    jobs: Option<usize>,
    scaling: ScalingParams,
    data_fingerprint: impl Into<String>,
) -> Result<ModelFit> {
    fit_all_directions_with_progress(
        z,
        x,
        tau,
        cfg,
        m,
        jobs,
        scaling,
        data_fingerprint,
        &|_, _| {},
    )
}

/// [`fit_all_directions`] with a per-direction completion callback
/// `(done, total)`, invoked from worker threads.
#[allow(clippy::too_many_arguments)]
pub fn fit_all_directions_with_progress(
    z: &[Vec2],
    x: &Design,
    tau: f64,
    cfg: &SamplerConfig,
    m: usize,
    jobs: Option<usize>,
    scaling: ScalingParams,
    data_fingerprint: impl Into<String>,
    on_direction_done: &(dyn Fn(usize, usize) + Send + Sync),
) -> Result<ModelFit> {
    if x.n() != z.len() {
        return Err(Error::Parameter(format!(
            "response rows {} do not match design rows {}",
            z.len(),
            x.n()
        )));
    }
    let grid = geometry::direction_grid(m)?;
    let done = std::sync::atomic::AtomicUsize::new(0);

    let fit_one = |dir: &Direction| -> Result<DirectionFit> {
        let (y_u, y_perp) = geometry::project(z, dir);
        let dir_cfg = cfg.with_seed(direction_seed(cfg.seed, dir.index));
        let fit = sampler::gibbs_fit(&y_u, &y_perp, x, tau, &dir_cfg)
            .map_err(|e| Error::Direction { index: dir.index, source: Box::new(e) })?;
        let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        on_direction_done(finished, m);
        Ok(DirectionFit {
            direction: *dir,
            tau,
            b_hat: fit.b_hat,
            beta_hat: fit.beta_hat,
            sigma_hat: fit.sigma_hat,
            ess: fit.ess,
            kept_draws: fit.kept_draws,
            draw_columns: fit.draw_columns,
        })
    };

    let fits: Result<Vec<DirectionFit>> = match jobs {
        Some(1) => grid.iter().map(fit_one).collect(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| grid.par_iter().map(fit_one).collect()),
        None => grid.par_iter().map(fit_one).collect(),
    };

    Ok(ModelFit {
        manifest: None,
        tau,
        directions: m,
        config: cfg.clone(),
        design_columns: x.columns.clone(),
        scaling,
        data_fingerprint: data_fingerprint.into(),
        fits: fits?,
    })
}

/// Builds the quantile region for an arbitrary covariate row vector,
/// returning it in standardized and in original units (exact affine image).
pub fn quantile_region_for_x(fit: &ModelFit, x: &[f64]) -> Result<(Polygon, Polygon)> {
    if x.len() != fit.design_columns.len() {
        return Err(Error::Parameter(format!(
            "profile vector has {} entries but the fit has {} design columns",
            x.len(),
            fit.design_columns.len()
        )));
    }
    let halfplanes: Vec<Halfplane> = fit
        .fits
        .iter()
        .map(|f| {
            let xbeta: f64 = x.iter().zip(&f.beta_hat).map(|(a, b)| a * b).sum();
            geometry::halfplane_from_fit(&f.direction, f.b_hat, xbeta)
        })
        .collect();
    let standardized =
        geometry::intersect_halfplanes(&halfplanes, &Polygon::bounding_square(BBOX_HALF_WIDTH));
    let original = Polygon::new(
        standardized.vertices().iter().map(|&v| fit.scaling.to_original(v)).collect(),
    );
    Ok((standardized, original))
}

/// Quantile region for a named covariate profile of the match design.
pub fn quantile_region(fit: &ModelFit, profile: &CovariateProfile) -> Result<(Polygon, Polygon)> {
    if fit.design_columns != design_column_names() {
        return Err(Error::Parameter(
            "fit was not built with the match covariate design; use quantile_region_for_x".into(),
        ));
    }
    quantile_region_for_x(fit, &profile_vector(profile))
}

/// One profile's region in both unit systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileContour {
    pub name: String,
    pub profile: CovariateProfile,
    pub polygon_std: Polygon,
    pub polygon_orig: Polygon,
    /// Set when the intersection came out empty (extreme profile); the entry
    /// is reportable output, not an error.
    pub empty: bool,
}

/// Named covariate profiles mapped to their quantile-region polygons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub tau: f64,
    pub scaling: ScalingParams,
    pub data_fingerprint: String,
    pub profiles: Vec<ProfileContour>,
}

impl ContourSet {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<ContourSet> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Computes one region per named profile.
pub fn compare_profiles(
    fit: &ModelFit,
    profiles: &[(String, CovariateProfile)],
) -> Result<ContourSet> {
    let mut out = Vec::with_capacity(profiles.len());
    for (name, profile) in profiles {
        let (std_poly, orig_poly) = quantile_region(fit, profile)?;
        let empty = std_poly.is_empty();
        out.push(ProfileContour {
            name: name.clone(),
            profile: *profile,
            polygon_std: std_poly,
            polygon_orig: orig_poly,
            empty,
        });
    }
    Ok(ContourSet {
        manifest: None,
        tau: fit.tau,
        scaling: fit.scaling.clone(),
        data_fingerprint: fit.data_fingerprint.clone(),
        profiles: out,
    })
}

/// The four preset profile families, one per covariate: every player against
/// each level of that covariate, everything else at its reference value.
pub fn preset_profiles(preset: &str) -> Result<Vec<(String, CovariateProfile)>> {
    let mut out = Vec::new();
    match preset {
        "win" => {
            for player in Player::ALL {
                for win in [false, true] {
                    let mut p = CovariateProfile::reference(player);
                    p.win = win;
                    let suffix = if win { "win" } else { "loss" };
                    out.push((format!("{}_{}", player.label().to_lowercase(), suffix), p));
                }
            }
        }
        "top20" => {
            for player in Player::ALL {
                for top20 in [false, true] {
                    let mut p = CovariateProfile::reference(player);
                    p.top20 = top20;
                    let suffix = if top20 { "top20" } else { "not_top20" };
                    out.push((format!("{}_{}", player.label().to_lowercase(), suffix), p));
                }
            }
        }
        "surface" => {
            for player in Player::ALL {
                for surface in Surface::ALL {
                    let mut p = CovariateProfile::reference(player);
                    p.surface = surface;
                    out.push((
                        format!("{}_{}", player.label().to_lowercase(), surface.label()),
                        p,
                    ));
                }
            }
        }
        "tournament" => {
            for player in Player::ALL {
                for tournament in Tournament::ALL {
                    let mut p = CovariateProfile::reference(player);
                    p.tournament = tournament;
                    out.push((
                        format!("{}_{}", player.label().to_lowercase(), tournament.label()),
                        p,
                    ));
                }
            }
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown preset {other:?}; expected one of win, top20, surface, tournament"
            )))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn toy_cfg(seed: u64) -> SamplerConfig {
        SamplerConfig {
            burn_in: 300,
            total_iters: 1500,
            thin: 3,
            seed,
            ..SamplerConfig::default()
        }
    }

    fn symmetric_cloud(n: usize, seed: u64) -> Vec<Vec2> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                [a, b]
            })
            .collect()
    }

    #[test]
    fn four_direction_smoke_fit() {
        let z = symmetric_cloud(100, 1);
        let x = Design::intercept_only(z.len());
        let fit = fit_all_directions(
            &z,
            &x,
            0.25,
            &toy_cfg(7),
            4,
            Some(1),
            ScalingParams::identity(),
            "synthetic",
        )
        .unwrap();
        assert_eq!(fit.fits.len(), 4);
        for (j, f) in fit.fits.iter().enumerate() {
            assert_eq!(f.direction.index, j);
            assert!(f.sigma_hat > 0.0);
        }

        // Region at the intercept-only profile contains the componentwise
        // median of symmetric data.
        let (region, _) = quantile_region_for_x(&fit, &[1.0]).unwrap();
        assert!(!region.is_empty());
        let mut xs: Vec<f64> = z.iter().map(|p| p[0]).collect();
        let mut ys: Vec<f64> = z.iter().map(|p| p[1]).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let median = [xs[xs.len() / 2], ys[ys.len() / 2]];
        assert!(geometry::contains(&region, median), "median {median:?} outside region");
    }

    #[test]
    fn identical_seeds_identical_fingerprints() {
        let z = symmetric_cloud(80, 2);
        let x = Design::intercept_only(z.len());
        let run = || {
            fit_all_directions(
                &z,
                &x,
                0.25,
                &toy_cfg(11),
                6,
                None,
                ScalingParams::identity(),
                "synthetic",
            )
            .unwrap()
            .fingerprint()
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn direction_seeds_are_stable_and_distinct() {
        let a = direction_seed(42, 0);
        let b = direction_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, direction_seed(42, 0));
        assert_ne!(a, direction_seed(43, 0));
    }

    #[test]
    fn region_roughly_centered_on_symmetric_data() {
        let z = symmetric_cloud(1500, 3);
        let x = Design::intercept_only(z.len());
        let fit = fit_all_directions(
            &z,
            &x,
            0.25,
            &toy_cfg(5),
            16,
            None,
            ScalingParams::identity(),
            "synthetic",
        )
        .unwrap();
        let (region, _) = quantile_region_for_x(&fit, &[1.0]).unwrap();
        let c = region.centroid().unwrap();
        assert!(geometry::norm(c) < 0.1, "centroid {c:?}");
        assert!(geometry::contains(&region, [0.0, 0.0]));
    }

    #[test]
    fn original_units_are_exact_affine_images() {
        let z = symmetric_cloud(120, 4);
        let x = Design::intercept_only(z.len());
        let scaling = ScalingParams { mean: [1.05, 115.0], sd: [0.11, 38.0] };
        let fit =
            fit_all_directions(&z, &x, 0.25, &toy_cfg(13), 8, None, scaling, "synthetic").unwrap();
        let (std_poly, orig_poly) = quantile_region_for_x(&fit, &[1.0]).unwrap();
        assert_eq!(std_poly.vertices().len(), orig_poly.vertices().len());
        for (s, o) in std_poly.vertices().iter().zip(orig_poly.vertices()) {
            let mapped = fit.scaling.to_original(*s);
            assert!((mapped[0] - o[0]).abs() < 1e-9);
            assert!((mapped[1] - o[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_region_construction_is_bit_identical() {
        let z = symmetric_cloud(90, 6);
        let x = Design::intercept_only(z.len());
        let fit = fit_all_directions(
            &z,
            &x,
            0.25,
            &toy_cfg(17),
            5,
            None,
            ScalingParams::identity(),
            "synthetic",
        )
        .unwrap();
        let a = quantile_region_for_x(&fit, &[1.0]).unwrap();
        let b = quantile_region_for_x(&fit, &[1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn offset_shifts_translate_the_region() {
        // Hand-set coefficients, no sampling: per direction u, the two
        // profiles [1, 0] and [1, 1] differ in offset by uᵀt for a fixed
        // translation t, so the second region is the first shifted by t.
        let t = [0.7, -0.4];
        let m = 12;
        let fits: Vec<DirectionFit> = geometry::direction_grid(m)
            .unwrap()
            .into_iter()
            .map(|direction| {
                let base = -1.0; // unit-ball-ish region around the origin
                DirectionFit {
                    beta_hat: vec![base, geometry::dot(direction.u, t)],
                    direction,
                    tau: 0.25,
                    b_hat: 0.0,
                    sigma_hat: 1.0,
                    ess: vec![],
                    kept_draws: RowMatrix::zeros(0, 3),
                    draw_columns: vec![],
                }
            })
            .collect();
        let fit = ModelFit {
            manifest: None,
            tau: 0.25,
            directions: m,
            config: SamplerConfig::default(),
            design_columns: vec!["intercept".into(), "shift".into()],
            scaling: ScalingParams::identity(),
            data_fingerprint: "hand-set".into(),
            fits,
        };
        let (base, _) = quantile_region_for_x(&fit, &[1.0, 0.0]).unwrap();
        let (shifted, _) = quantile_region_for_x(&fit, &[1.0, 1.0]).unwrap();
        assert_eq!(base.vertices().len(), shifted.vertices().len());
        for (a, b) in base.vertices().iter().zip(shifted.vertices()) {
            assert!((a[0] + t[0] - b[0]).abs() < 1e-9, "{a:?} + {t:?} vs {b:?}");
            assert!((a[1] + t[1] - b[1]).abs() < 1e-9, "{a:?} + {t:?} vs {b:?}");
        }
    }

    #[test]
    fn preset_profile_counts() {
        assert_eq!(preset_profiles("win").unwrap().len(), 6);
        assert_eq!(preset_profiles("top20").unwrap().len(), 6);
        assert_eq!(preset_profiles("surface").unwrap().len(), 9);
        assert_eq!(preset_profiles("tournament").unwrap().len(), 12);
        assert!(preset_profiles("nope").is_err());
    }

    #[test]
    fn fit_json_roundtrip_drops_chains_only() {
        let z = symmetric_cloud(70, 8);
        let x = Design::intercept_only(z.len());
        let fit = fit_all_directions(
            &z,
            &x,
            0.25,
            &toy_cfg(23),
            4,
            None,
            ScalingParams::identity(),
            "synthetic",
        )
        .unwrap();
        let json = fit.to_json().unwrap();
        let back = ModelFit::from_json(&json).unwrap();
        assert_eq!(back.fits.len(), fit.fits.len());
        for (a, b) in fit.fits.iter().zip(&back.fits) {
            assert_eq!(a.b_hat, b.b_hat);
            assert_eq!(a.beta_hat, b.beta_hat);
            assert_eq!(b.kept_draws.nrows(), 0); // chains not serialized
        }
        // Regions from the reloaded fit match exactly.
        let (r1, _) = quantile_region_for_x(&fit, &[1.0]).unwrap();
        let (r2, _) = quantile_region_for_x(&back, &[1.0]).unwrap();
        assert_eq!(r1, r2);
    }
}
