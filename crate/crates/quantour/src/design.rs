//! Regression design: dummy coding with player interactions, response
//! standardization, and covariate-profile encoding.
//!
//! Column order is fixed and part of the output schema; posterior summaries
//! are keyed by these names, never by index alone. Reference categories:
//! Federer, loss, hard court, "others" tournament, not top-20.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::ingest::{Observation, Player, Surface, Tournament};
use crate::mat::RowMatrix;

/// Number of regression coefficients: intercept, main effects, and all
/// player interactions.
pub const DESIGN_COLUMNS: usize = 24;

/// A design matrix with its ordered column labels. `encode_design` produces
/// the 24-column match design; synthetic fits may carry any column set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub matrix: RowMatrix,
    pub columns: Vec<String>,
}

impl Design {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn p(&self) -> usize {
        self.matrix.ncols()
    }

    /// Intercept-only design of length `n` (used by unconditional fits).
    pub fn intercept_only(n: usize) -> Self {
        Self {
            matrix: RowMatrix::from_flat(n, 1, vec![1.0; n]),
            columns: vec!["intercept".to_string()],
        }
    }

    /// Writes the matrix as CSV with the column labels as header.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(&self.columns)
            .map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
        for i in 0..self.n() {
            let row: Vec<String> = self.matrix.row(i).iter().map(|v| format!("{v}")).collect();
            w.write_record(&row)
                .map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Per-dimension affine standardization parameters for the bivariate
/// response (relative points won, minutes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

impl ScalingParams {
    /// Identity map; used when fitting already-standardized synthetic data.
    pub fn identity() -> Self {
        Self { mean: [0.0, 0.0], sd: [1.0, 1.0] }
    }

    pub fn to_standardized(&self, y: Vec2) -> Vec2 {
        [(y[0] - self.mean[0]) / self.sd[0], (y[1] - self.mean[1]) / self.sd[1]]
    }

    pub fn to_original(&self, z: Vec2) -> Vec2 {
        [z[0] * self.sd[0] + self.mean[0], z[1] * self.sd[1] + self.mean[1]]
    }
}

/// A fully specified covariate combination; encodes to one design row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CovariateProfile {
    pub player: Player,
    pub win: bool,
    pub surface: Surface,
    pub tournament: Tournament,
    pub top20: bool,
}

impl CovariateProfile {
    /// All covariates at their reference value for the given player.
    pub fn reference(player: Player) -> Self {
        Self {
            player,
            win: false,
            surface: Surface::Hard,
            tournament: Tournament::Others,
            top20: false,
        }
    }
}

/// The fixed column labels of the 24-column design.
pub fn design_column_names() -> Vec<String> {
    let mut names = vec![
        "intercept".to_string(),
        "player_djokovic".to_string(),
        "player_nadal".to_string(),
        "win".to_string(),
        "surface_clay".to_string(),
        "surface_grass".to_string(),
        "tournament_grand_slam".to_string(),
        "tournament_finals".to_string(),
        "tournament_masters".to_string(),
        "top20".to_string(),
    ];
    for p in ["djokovic", "nadal"] {
        names.push(format!("player_{p}:win"));
    }
    for p in ["djokovic", "nadal"] {
        for s in ["clay", "grass"] {
            names.push(format!("player_{p}:surface_{s}"));
        }
    }
    for p in ["djokovic", "nadal"] {
        for t in ["grand_slam", "finals", "masters"] {
            names.push(format!("player_{p}:tournament_{t}"));
        }
    }
    for p in ["djokovic", "nadal"] {
        names.push(format!("player_{p}:top20"));
    }
    names
}

fn encode_row(
    player: Player,
    win: bool,
    surface: Surface,
    tournament: Tournament,
    top20: bool,
) -> [f64; DESIGN_COLUMNS] {
    let mut row = [0.0; DESIGN_COLUMNS];
    row[0] = 1.0;
    let dj = player == Player::Djokovic;
    let na = player == Player::Nadal;
    if dj {
        row[1] = 1.0;
    }
    if na {
        row[2] = 1.0;
    }
    if win {
        row[3] = 1.0;
    }
    let clay = surface == Surface::Clay;
    let grass = surface == Surface::Grass;
    if clay {
        row[4] = 1.0;
    }
    if grass {
        row[5] = 1.0;
    }
    let gs = tournament == Tournament::GrandSlam;
    let fi = tournament == Tournament::Finals;
    let ma = tournament == Tournament::Masters;
    if gs {
        row[6] = 1.0;
    }
    if fi {
        row[7] = 1.0;
    }
    if ma {
        row[8] = 1.0;
    }
    if top20 {
        row[9] = 1.0;
    }
    // Player interactions, same block order as the main effects.
    let tag = |cond: bool| if cond { 1.0 } else { 0.0 };
    row[10] = tag(dj && win);
    row[11] = tag(na && win);
    row[12] = tag(dj && clay);
    row[13] = tag(dj && grass);
    row[14] = tag(na && clay);
    row[15] = tag(na && grass);
    row[16] = tag(dj && gs);
    row[17] = tag(dj && fi);
    row[18] = tag(dj && ma);
    row[19] = tag(na && gs);
    row[20] = tag(na && fi);
    row[21] = tag(na && ma);
    row[22] = tag(dj && top20);
    row[23] = tag(na && top20);
    row
}

/// Builds the 24-column 0/1 design matrix from observations.
pub fn encode_design(obs: &[Observation]) -> Result<Design> {
    if obs.is_empty() {
        return Err(Error::Parameter("cannot encode an empty observation list".into()));
    }
    let mut matrix = RowMatrix::zeros(0, DESIGN_COLUMNS);
    for o in obs {
        matrix.push_row(&encode_row(o.player, o.win, o.surface, o.tournament, o.top20_opponent));
    }
    Ok(Design { matrix, columns: design_column_names() })
}

/// Encodes one covariate profile with the same rule as [`encode_design`].
pub fn profile_vector(c: &CovariateProfile) -> Vec<f64> {
    encode_row(c.player, c.win, c.surface, c.tournament, c.top20).to_vec()
}

/// Centers and scales each response column to sample mean 0 and sample
/// standard deviation 1 (n−1 denominator). Fails on a zero-variance column.
pub fn standardize(y: &[Vec2]) -> Result<(Vec<Vec2>, ScalingParams)> {
    let n = y.len();
    if n < 2 {
        return Err(Error::Parameter(format!("standardize needs n >= 2, got {n}")));
    }
    let mut mean = [0.0; 2];
    for row in y {
        mean[0] += row[0];
        mean[1] += row[1];
    }
    mean[0] /= n as f64;
    mean[1] /= n as f64;
    let mut ss = [0.0; 2];
    for row in y {
        ss[0] += (row[0] - mean[0]).powi(2);
        ss[1] += (row[1] - mean[1]).powi(2);
    }
    let sd = [(ss[0] / (n as f64 - 1.0)).sqrt(), (ss[1] / (n as f64 - 1.0)).sqrt()];
    for (i, s) in sd.iter().enumerate() {
        if !(s.is_finite() && *s > 0.0) {
            return Err(Error::Config(format!(
                "response column {i} has zero variance; cannot standardize"
            )));
        }
    }
    let params = ScalingParams { mean, sd };
    let z = y.iter().map(|&row| params.to_standardized(row)).collect();
    Ok((z, params))
}

/// The bivariate response (rel_points, minutes) of an observation list.
pub fn response_matrix(obs: &[Observation]) -> Vec<Vec2> {
    obs.iter().map(|o| [o.rel_points, o.minutes]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn obs(player: Player, win: bool, surface: Surface, t: Tournament, top20: bool) -> Observation {
        Observation {
            player,
            rel_points: 1.0,
            minutes: 100.0,
            win,
            surface,
            tournament: t,
            top20_opponent: top20,
            match_key: "k".into(),
        }
    }

    #[test]
    fn column_count_is_twenty_four() {
        assert_eq!(design_column_names().len(), DESIGN_COLUMNS);
        let d = encode_design(&[obs(
            Player::Federer,
            false,
            Surface::Hard,
            Tournament::Others,
            false,
        )])
        .unwrap();
        assert_eq!(d.p(), 24);
        let names = design_column_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "column labels must be unique");
    }

    #[test]
    fn all_reference_row_is_intercept_only() {
        let d = encode_design(&[obs(
            Player::Federer,
            false,
            Surface::Hard,
            Tournament::Others,
            false,
        )])
        .unwrap();
        let row = d.matrix.row(0);
        assert_eq!(row[0], 1.0);
        assert!(row[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn djokovic_win_activates_interaction() {
        let d = encode_design(&[obs(
            Player::Djokovic,
            true,
            Surface::Hard,
            Tournament::Others,
            false,
        )])
        .unwrap();
        let row = d.matrix.row(0);
        let names = design_column_names();
        for (j, name) in names.iter().enumerate() {
            let expect = matches!(
                name.as_str(),
                "intercept" | "player_djokovic" | "win" | "player_djokovic:win"
            );
            assert_eq!(row[j] == 1.0, expect, "column {name}");
        }
    }

    #[test]
    fn profile_vector_matches_encode_design() {
        for player in Player::ALL {
            for surface in Surface::ALL {
                for tournament in Tournament::ALL {
                    for win in [false, true] {
                        for top20 in [false, true] {
                            let p = CovariateProfile { player, win, surface, tournament, top20 };
                            let v = profile_vector(&p);
                            let d = encode_design(&[obs(player, win, surface, tournament, top20)])
                                .unwrap();
                            assert_eq!(v.as_slice(), d.matrix.row(0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nadal_clay_profile_vector() {
        let p = CovariateProfile {
            player: Player::Nadal,
            win: false,
            surface: Surface::Clay,
            tournament: Tournament::Others,
            top20: false,
        };
        let v = profile_vector(&p);
        let names = design_column_names();
        let active: Vec<&str> = names
            .iter()
            .zip(&v)
            .filter(|(_, &x)| x == 1.0)
            .map(|(n, _)| n.as_str())
            .collect();
        assert_eq!(
            active,
            vec!["intercept", "player_nadal", "surface_clay", "player_nadal:surface_clay"]
        );
    }

    #[test]
    fn entries_are_binary_and_column_sums_count_categories() {
        let rows = vec![
            obs(Player::Federer, true, Surface::Grass, Tournament::GrandSlam, true),
            obs(Player::Djokovic, true, Surface::Hard, Tournament::Masters, false),
            obs(Player::Nadal, false, Surface::Clay, Tournament::Finals, true),
            obs(Player::Nadal, true, Surface::Clay, Tournament::GrandSlam, false),
        ];
        let d = encode_design(&rows).unwrap();
        for i in 0..d.n() {
            assert!(d.matrix.row(i).iter().all(|&v| v == 0.0 || v == 1.0));
        }
        let sums = d.matrix.column_sums();
        let names = design_column_names();
        let col = |n: &str| names.iter().position(|x| x == n).unwrap();
        assert_eq!(sums[col("intercept")], 4.0);
        assert_eq!(sums[col("player_nadal")], 2.0);
        assert_eq!(sums[col("win")], 3.0);
        assert_eq!(sums[col("surface_clay")], 2.0);
        assert_eq!(sums[col("player_nadal:surface_clay")], 2.0);
        assert_eq!(sums[col("top20")], 2.0);
    }

    #[test]
    fn standardize_symmetric_triple() {
        let y = vec![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]];
        let (z, s) = standardize(&y).unwrap();
        assert_abs_diff_eq!(z[0][0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mean[0], 2.0);
        assert_abs_diff_eq!(s.sd[0], 1.0);
    }

    #[test]
    fn standardize_roundtrip_and_moments() {
        let y: Vec<Vec2> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                [1.0 + t.sin() * 0.2 + 0.001 * t, 90.0 + 30.0 * t.cos() + t]
            })
            .collect();
        let (z, s) = standardize(&y).unwrap();
        for dim in 0..2 {
            let n = z.len() as f64;
            let mean: f64 = z.iter().map(|r| r[dim]).sum::<f64>() / n;
            let sd: f64 =
                (z.iter().map(|r| (r[dim] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!(mean.abs() < 1e-10);
            assert!((sd - 1.0).abs() < 1e-10);
        }
        for (orig, zrow) in y.iter().zip(&z) {
            let back = s.to_original(*zrow);
            assert_abs_diff_eq!(back[0], orig[0], epsilon = 1e-9);
            assert_abs_diff_eq!(back[1], orig[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let y = vec![[1.0, 5.0], [1.0, 6.0], [1.0, 7.0]];
        assert!(standardize(&y).is_err());
    }
}
