//! ATP match corpus ingestion: parse the public match CSV schema, apply the
//! selection filters, and explode retained matches into per-player
//! observations with the bivariate response (relative points won, minutes)
//! and the categorical covariates.

mod io;

pub use io::{
    parse_match_csv, parse_match_dir, read_observations_csv, write_observations_csv,
    write_observations_json, RowError,
};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three players whose matches form the observation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Federer,
    Djokovic,
    Nadal,
}

impl Player {
    pub const ALL: [Player; 3] = [Player::Federer, Player::Djokovic, Player::Nadal];

    pub fn from_match_name(name: &str) -> Option<Player> {
        match name {
            "Roger Federer" => Some(Player::Federer),
            "Novak Djokovic" => Some(Player::Djokovic),
            "Rafael Nadal" => Some(Player::Nadal),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Player::Federer => "Federer",
            Player::Djokovic => "Djokovic",
            Player::Nadal => "Nadal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    Hard,
    Clay,
    Grass,
}

impl Surface {
    pub const ALL: [Surface; 3] = [Surface::Hard, Surface::Clay, Surface::Grass];

    pub fn label(&self) -> &'static str {
        match self {
            Surface::Hard => "hard",
            Surface::Clay => "clay",
            Surface::Grass => "grass",
        }
    }
}

/// Tournament tier. Level G maps to `GrandSlam`, M to `Masters`, F to
/// `Finals`; every other retained level falls into `Others`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tournament {
    Others,
    GrandSlam,
    Finals,
    Masters,
}

impl Tournament {
    pub const ALL: [Tournament; 4] =
        [Tournament::Others, Tournament::GrandSlam, Tournament::Finals, Tournament::Masters];

    pub fn from_level(level: &str) -> Tournament {
        match level {
            "G" => Tournament::GrandSlam,
            "M" => Tournament::Masters,
            "F" => Tournament::Finals,
            _ => Tournament::Others,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Tournament::Others => "others",
            Tournament::GrandSlam => "grand_slam",
            Tournament::Finals => "finals",
            Tournament::Masters => "masters",
        }
    }
}

/// One parsed row of the ATP match CSV schema. Missing numeric fields stay
/// missing; they are never silently zeroed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMatch {
    /// Provenance key: `<file stem>:<1-based data row>`; unique per corpus.
    pub row_id: String,
    pub tourney_id: String,
    pub tourney_level: String,
    pub surface: Option<String>,
    pub tourney_date: NaiveDate,
    pub winner_name: String,
    pub loser_name: String,
    pub winner_rank: Option<u32>,
    pub loser_rank: Option<u32>,
    pub score: String,
    pub minutes: Option<u32>,
    pub w_svpt: Option<u32>,
    pub w_first_won: Option<u32>,
    pub w_second_won: Option<u32>,
    pub l_svpt: Option<u32>,
    pub l_first_won: Option<u32>,
    pub l_second_won: Option<u32>,
}

/// One (player, match) record ready for modelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub player: Player,
    /// Points won divided by points lost in the match; 1.0 is an even split.
    pub rel_points: f64,
    pub minutes: f64,
    pub win: bool,
    pub surface: Surface,
    pub tournament: Tournament,
    pub top20_opponent: bool,
    pub match_key: String,
}

/// Selection filters. Defaults reproduce the analysis window: 1998 through
/// the final day of the 2020 US Open, big-three matches only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub start_date: NaiveDate,
    pub cutoff_date: NaiveDate,
    /// Keep only matches involving Federer, Djokovic or Nadal. Switched off
    /// for tour-wide comparison statistics.
    pub require_target_player: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            start_date: NaiveDate::from_ymd_opt(1998, 1, 1).unwrap(),
            cutoff_date: NaiveDate::from_ymd_opt(2020, 9, 13).unwrap(),
            require_target_player: true,
        }
    }
}

/// Score markers that flag a match as not completed (retirement, walkover,
/// default, abandonment) following the dataset's conventions.
const INCOMPLETE_TOKENS: [&str; 7] =
    ["RET", "W/O", "DEF", "ABN", "ABD", "WALKOVER", "UNFINISHED"];

/// Tournament levels excluded from the analysis: Davis Cup and the Olympics.
const EXCLUDED_LEVELS: [&str; 2] = ["D", "O"];

fn score_indicates_incomplete(score: &str) -> bool {
    let s = score.trim().to_ascii_uppercase();
    if s.is_empty() {
        return true;
    }
    INCOMPLETE_TOKENS.iter().any(|t| s.contains(t))
}

fn surface_retained(surface: &Option<String>) -> bool {
    matches!(surface.as_deref(), Some("Hard") | Some("Clay") | Some("Grass"))
}

fn has_point_stats(m: &RawMatch) -> bool {
    let present = m.minutes.is_some()
        && m.w_svpt.is_some()
        && m.w_first_won.is_some()
        && m.w_second_won.is_some()
        && m.l_svpt.is_some()
        && m.l_first_won.is_some()
        && m.l_second_won.is_some();
    present
        && m.minutes.unwrap() > 0
        && m.w_svpt.unwrap() > 0
        && m.l_svpt.unwrap() > 0
}

/// Per-criterion exclusion tally. Criteria are applied in a fixed order and
/// each dropped row is counted once, under the first criterion it fails.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionCounts {
    pub not_target_player: usize,
    pub out_of_date_range: usize,
    pub not_completed: usize,
    pub excluded_level: usize,
    pub excluded_surface: usize,
    pub missing_stats: usize,
}

impl ExclusionCounts {
    pub fn total(&self) -> usize {
        self.not_target_player
            + self.out_of_date_range
            + self.not_completed
            + self.excluded_level
            + self.excluded_surface
            + self.missing_stats
    }
}

/// Applies the selection filters, returning retained rows and the tally of
/// rows excluded per criterion. Pure; idempotent on its own output.
pub fn filter_matches(rows: &[RawMatch], cfg: &FilterConfig) -> (Vec<RawMatch>, ExclusionCounts) {
    let mut counts = ExclusionCounts::default();
    let mut retained = Vec::new();
    for m in rows {
        if cfg.require_target_player
            && Player::from_match_name(&m.winner_name).is_none()
            && Player::from_match_name(&m.loser_name).is_none()
        {
            counts.not_target_player += 1;
            continue;
        }
        if m.tourney_date < cfg.start_date || m.tourney_date > cfg.cutoff_date {
            counts.out_of_date_range += 1;
            continue;
        }
        if score_indicates_incomplete(&m.score) {
            counts.not_completed += 1;
            continue;
        }
        if EXCLUDED_LEVELS.contains(&m.tourney_level.as_str()) {
            counts.excluded_level += 1;
            continue;
        }
        if !surface_retained(&m.surface) {
            counts.excluded_surface += 1;
            continue;
        }
        if !has_point_stats(m) {
            counts.missing_stats += 1;
            continue;
        }
        retained.push(m.clone());
    }
    (retained, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Winner,
    Loser,
}

/// Points won divided by points lost, from one side's perspective.
///
/// The winner's points are first- and second-serve points won plus the
/// loser's serve points the loser failed to win; the loser's ratio is the
/// reciprocal. Requires all serve-point stats present.
pub fn relative_points(m: &RawMatch, side: Side) -> Result<f64> {
    let (w_svpt, w1, w2, l_svpt, l1, l2) = match (
        m.w_svpt,
        m.w_first_won,
        m.w_second_won,
        m.l_svpt,
        m.l_first_won,
        m.l_second_won,
    ) {
        (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => (a, b, c, d, e, f),
        _ => {
            return Err(Error::Parameter(format!(
                "match {} is missing serve-point stats",
                m.row_id
            )))
        }
    };
    let total = (w_svpt + l_svpt) as f64;
    let winner_won = (w1 + w2) as f64 + (l_svpt as f64 - (l1 + l2) as f64);
    let winner_lost = total - winner_won;
    if winner_won <= 0.0 || winner_lost <= 0.0 {
        return Err(Error::Parameter(format!(
            "match {} has a degenerate point split ({winner_won} won / {winner_lost} lost)",
            m.row_id
        )));
    }
    Ok(match side {
        Side::Winner => winner_won / winner_lost,
        Side::Loser => winner_lost / winner_won,
    })
}

/// Explodes filtered matches into per-player observations: one per big-three
/// participant, two when both sides qualify (with reciprocal `rel_points`).
///
/// A missing opponent rank means not top-20. Matches with a degenerate point
/// split are dropped and counted.
pub fn explode_to_observations(rows: &[RawMatch]) -> (Vec<Observation>, usize) {
    let mut out = Vec::new();
    let mut degenerate = 0usize;
    for m in rows {
        let surface = match m.surface.as_deref() {
            Some("Hard") => Surface::Hard,
            Some("Clay") => Surface::Clay,
            Some("Grass") => Surface::Grass,
            _ => continue, // unreachable after filtering
        };
        let tournament = Tournament::from_level(&m.tourney_level);
        let sides = [
            (Player::from_match_name(&m.winner_name), Side::Winner, m.loser_rank),
            (Player::from_match_name(&m.loser_name), Side::Loser, m.winner_rank),
        ];
        for (player, side, opp_rank) in sides {
            let Some(player) = player else { continue };
            let rel_points = match relative_points(m, side) {
                Ok(r) => r,
                Err(_) => {
                    degenerate += 1;
                    continue;
                }
            };
            out.push(Observation {
                player,
                rel_points,
                minutes: m.minutes.unwrap_or(0) as f64,
                win: side == Side::Winner,
                surface,
                tournament,
                top20_opponent: opp_rank.is_some_and(|r| r <= 20),
                match_key: m.row_id.clone(),
            });
        }
    }
    (out, degenerate)
}

/// Loss-paradox statistics: how often the losing side still won more points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParadox {
    /// Big-three loss observations and how many of them have rel_points > 1.
    pub big_three_losses: usize,
    pub big_three_paradox: usize,
    pub big_three_rate: f64,
    /// All completed tour matches in the window (one loser per match).
    pub tour_matches: usize,
    pub tour_paradox: usize,
    pub tour_rate: f64,
}

/// Full ingest report: input accounting, per-criterion exclusions, and the
/// loss-paradox comparison. Exclusions plus retained always equal the input.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub input_rows: usize,
    pub malformed_rows: usize,
    pub exclusions: ExclusionCounts,
    pub degenerate_matches: usize,
    pub retained_matches: usize,
    pub observations: usize,
    pub loss_paradox: LossParadox,
    pub row_errors: Vec<RowError>,
}

pub struct IngestOutput {
    pub observations: Vec<Observation>,
    pub report: IngestReport,
}

/// Runs the whole ingest pipeline over parsed rows.
pub fn ingest_rows(rows: Vec<RawMatch>, row_errors: Vec<RowError>, cfg: &FilterConfig) -> IngestOutput {
    let input_rows = rows.len() + row_errors.len();
    let (retained, exclusions) = filter_matches(&rows, cfg);
    let (observations, degenerate) = explode_to_observations(&retained);

    let big_three_losses: Vec<&Observation> = observations.iter().filter(|o| !o.win).collect();
    let big_three_paradox = big_three_losses.iter().filter(|o| o.rel_points > 1.0).count();

    // Tour-wide analogue: same filters minus the player restriction, one
    // loser perspective per match.
    let tour_cfg = FilterConfig { require_target_player: false, ..cfg.clone() };
    let (tour_rows, _) = filter_matches(&rows, &tour_cfg);
    let mut tour_matches = 0usize;
    let mut tour_paradox = 0usize;
    for m in &tour_rows {
        if let Ok(r) = relative_points(m, Side::Loser) {
            tour_matches += 1;
            if r > 1.0 {
                tour_paradox += 1;
            }
        }
    }

    let rate = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let report = IngestReport {
        input_rows,
        malformed_rows: row_errors.len(),
        exclusions,
        degenerate_matches: degenerate,
        retained_matches: retained.len(),
        observations: observations.len(),
        loss_paradox: LossParadox {
            big_three_losses: big_three_losses.len(),
            big_three_paradox,
            big_three_rate: rate(big_three_paradox, big_three_losses.len()),
            tour_matches,
            tour_paradox,
            tour_rate: rate(tour_paradox, tour_matches),
        },
        row_errors,
    };
    IngestOutput { observations, report }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_match(id: &str) -> RawMatch {
        RawMatch {
            row_id: id.to_string(),
            tourney_id: "2012-580".into(),
            tourney_level: "G".into(),
            surface: Some("Hard".into()),
            tourney_date: NaiveDate::from_ymd_opt(2012, 1, 16).unwrap(),
            winner_name: "Novak Djokovic".into(),
            loser_name: "Rafael Nadal".into(),
            winner_rank: Some(1),
            loser_rank: Some(2),
            score: "5-7 6-4 6-2 6-7(5) 7-5".into(),
            minutes: Some(353),
            w_svpt: Some(180),
            w_first_won: Some(90),
            w_second_won: Some(30),
            l_svpt: Some(189),
            l_first_won: Some(80),
            l_second_won: Some(36),
        }
    }

    #[test]
    fn relative_points_direct_arithmetic() {
        let mut m = base_match("t:1");
        m.w_svpt = Some(80);
        m.w_first_won = Some(40);
        m.w_second_won = Some(20);
        m.l_svpt = Some(80);
        m.l_first_won = Some(30);
        m.l_second_won = Some(10);
        let r = relative_points(&m, Side::Winner).unwrap();
        assert!((r - 100.0 / 60.0).abs() < 1e-12);
        let l = relative_points(&m, Side::Loser).unwrap();
        assert!((r * l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_points_even_match_is_one() {
        let mut m = base_match("t:1");
        // Each side wins exactly half of all points: winner takes 40 of his
        // 80 serve points and 40 of the loser's 80.
        m.w_svpt = Some(80);
        m.w_first_won = Some(25);
        m.w_second_won = Some(15);
        m.l_svpt = Some(80);
        m.l_first_won = Some(30);
        m.l_second_won = Some(10);
        assert!((relative_points(&m, Side::Winner).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn australian_open_2012_final_ratio() {
        // Djokovic d. Nadal over 353 minutes; Djokovic won 193 of 369 points.
        let m = base_match("t:1");
        let r = relative_points(&m, Side::Winner).unwrap();
        assert!((r - 1.09).abs() < 0.01, "got {r}");
    }

    #[test]
    fn degenerate_point_split_is_an_error() {
        let mut m = base_match("t:1");
        m.w_svpt = Some(10);
        m.w_first_won = Some(10);
        m.w_second_won = Some(0);
        m.l_svpt = Some(10);
        m.l_first_won = Some(0);
        m.l_second_won = Some(0);
        assert!(relative_points(&m, Side::Winner).is_err());
    }

    #[test]
    fn filter_drops_retirements_and_carpet() {
        let mut ret = base_match("t:1");
        ret.score = "6-4 3-1 RET".into();
        let mut carpet = base_match("t:2");
        carpet.surface = Some("Carpet".into());
        let keep = base_match("t:3");
        let (retained, counts) =
            filter_matches(&[ret, carpet, keep], &FilterConfig::default());
        assert_eq!(retained.len(), 1);
        assert_eq!(retained[0].row_id, "t:3");
        assert_eq!(counts.not_completed, 1);
        assert_eq!(counts.excluded_surface, 1);
        assert_eq!(counts.total(), 2);
    }

    #[test]
    fn filter_respects_date_window_and_levels() {
        let mut early = base_match("t:1");
        early.tourney_date = NaiveDate::from_ymd_opt(1997, 5, 1).unwrap();
        let mut late = base_match("t:2");
        late.tourney_date = NaiveDate::from_ymd_opt(2020, 9, 27).unwrap();
        let mut davis = base_match("t:3");
        davis.tourney_level = "D".into();
        let mut olympics = base_match("t:4");
        olympics.tourney_level = "O".into();
        let mut other_players = base_match("t:5");
        other_players.winner_name = "Andy Murray".into();
        other_players.loser_name = "Stan Wawrinka".into();
        let (retained, counts) = filter_matches(
            &[early, late, davis, olympics, other_players],
            &FilterConfig::default(),
        );
        assert!(retained.is_empty());
        assert_eq!(counts.out_of_date_range, 2);
        assert_eq!(counts.excluded_level, 2);
        assert_eq!(counts.not_target_player, 1);
    }

    #[test]
    fn filter_is_idempotent() {
        let rows = vec![base_match("t:1"), base_match("t:2")];
        let cfg = FilterConfig::default();
        let (once, _) = filter_matches(&rows, &cfg);
        let (twice, counts) = filter_matches(&once, &cfg);
        assert_eq!(once, twice);
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn explode_builds_reciprocal_pair_for_big_three_match() {
        let (obs, degenerate) = explode_to_observations(&[base_match("t:1")]);
        assert_eq!(degenerate, 0);
        assert_eq!(obs.len(), 2);
        let dj = obs.iter().find(|o| o.player == Player::Djokovic).unwrap();
        let na = obs.iter().find(|o| o.player == Player::Nadal).unwrap();
        assert!(dj.win);
        assert!(!na.win);
        assert!((dj.rel_points * na.rel_points - 1.0).abs() < 1e-9);
        assert!(dj.top20_opponent && na.top20_opponent);
        assert_eq!(dj.tournament, Tournament::GrandSlam);
        assert_eq!(dj.match_key, na.match_key);
    }

    #[test]
    fn explode_rank_threshold_and_missing_rank() {
        let mut m = base_match("t:1");
        m.loser_name = "Juan Martin del Potro".into();
        m.loser_rank = Some(25);
        let (obs, _) = explode_to_observations(&[m.clone()]);
        assert_eq!(obs.len(), 1);
        assert!(!obs[0].top20_opponent);

        m.loser_rank = None;
        let (obs, _) = explode_to_observations(&[m]);
        assert!(!obs[0].top20_opponent);
    }

    #[test]
    fn ingest_accounting_balances() {
        let mut ret = base_match("t:1");
        ret.score = "W/O".into();
        let rows = vec![base_match("t:0"), ret, base_match("t:2")];
        let out = ingest_rows(rows, Vec::new(), &FilterConfig::default());
        let r = &out.report;
        assert_eq!(r.input_rows, 3);
        assert_eq!(r.exclusions.total() + r.retained_matches + r.malformed_rows, r.input_rows);
        assert_eq!(r.observations, 4);
        assert_eq!(r.loss_paradox.tour_matches, 2);
    }
}
