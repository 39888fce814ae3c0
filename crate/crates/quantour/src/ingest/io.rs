//! CSV I/O for the raw match schema and the observation table.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Observation, RawMatch};

/// A malformed data row, collected in the ingest report; the row is skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub file: String,
    /// 1-based data-row number (header excluded).
    pub row: u64,
    pub message: String,
}

const REQUIRED_COLUMNS: [&str; 16] = [
    "tourney_id",
    "tourney_level",
    "surface",
    "tourney_date",
    "winner_name",
    "loser_name",
    "winner_rank",
    "loser_rank",
    "score",
    "minutes",
    "w_svpt",
    "w_1stWon",
    "w_2ndWon",
    "l_svpt",
    "l_1stWon",
    "l_2ndWon",
];

/// Raw record as deserialized by the csv reader; unknown columns in the
/// source file are ignored, numeric fields tolerate a trailing `.0`.
#[derive(Debug, Deserialize)]
struct RawRecord {
    tourney_id: String,
    tourney_level: String,
    surface: Option<String>,
    tourney_date: u32,
    winner_name: String,
    loser_name: String,
    winner_rank: Option<f64>,
    loser_rank: Option<f64>,
    score: Option<String>,
    minutes: Option<f64>,
    w_svpt: Option<f64>,
    #[serde(rename = "w_1stWon")]
    w_first_won: Option<f64>,
    #[serde(rename = "w_2ndWon")]
    w_second_won: Option<f64>,
    l_svpt: Option<f64>,
    #[serde(rename = "l_1stWon")]
    l_first_won: Option<f64>,
    #[serde(rename = "l_2ndWon")]
    l_second_won: Option<f64>,
}

fn to_count(field: &str, v: Option<f64>) -> std::result::Result<Option<u32>, String> {
    match v {
        None => Ok(None),
        Some(x) if x.is_finite() && x >= 0.0 && x.fract().abs() < 1e-9 && x <= u32::MAX as f64 => {
            Ok(Some(x as u32))
        }
        Some(x) => Err(format!("{field}: expected a nonnegative integer, got {x}")),
    }
}

fn parse_yyyymmdd(v: u32) -> std::result::Result<NaiveDate, String> {
    let y = (v / 10_000) as i32;
    let m = (v / 100) % 100;
    let d = v % 100;
    NaiveDate::from_ymd_opt(y, m, d)
        .ok_or_else(|| format!("tourney_date: {v} is not a valid calendar date"))
}

fn convert(rec: RawRecord, row_id: String) -> std::result::Result<RawMatch, String> {
    let m = RawMatch {
        row_id,
        tourney_id: rec.tourney_id,
        tourney_level: rec.tourney_level,
        surface: rec.surface.filter(|s| !s.trim().is_empty()),
        tourney_date: parse_yyyymmdd(rec.tourney_date)?,
        winner_name: rec.winner_name,
        loser_name: rec.loser_name,
        winner_rank: to_count("winner_rank", rec.winner_rank)?,
        loser_rank: to_count("loser_rank", rec.loser_rank)?,
        score: rec.score.unwrap_or_default(),
        minutes: to_count("minutes", rec.minutes)?,
        w_svpt: to_count("w_svpt", rec.w_svpt)?,
        w_first_won: to_count("w_1stWon", rec.w_first_won)?,
        w_second_won: to_count("w_2ndWon", rec.w_second_won)?,
        l_svpt: to_count("l_svpt", rec.l_svpt)?,
        l_first_won: to_count("l_1stWon", rec.l_first_won)?,
        l_second_won: to_count("l_2ndWon", rec.l_second_won)?,
    };
    // Serve-point accounting sanity: points won never exceed points served.
    if let (Some(svpt), Some(w1), Some(w2)) = (m.w_svpt, m.w_first_won, m.w_second_won) {
        if w1 + w2 > svpt {
            return Err(format!("winner serve stats inconsistent: {w1}+{w2} > {svpt}"));
        }
    }
    if let (Some(svpt), Some(l1), Some(l2)) = (m.l_svpt, m.l_first_won, m.l_second_won) {
        if l1 + l2 > svpt {
            return Err(format!("loser serve stats inconsistent: {l1}+{l2} > {svpt}"));
        }
    }
    Ok(m)
}

/// Parses one match CSV. Unreadable files are fatal; malformed rows are
/// collected as [`RowError`]s and skipped.
pub fn parse_match_csv(path: &Path) -> Result<(Vec<RawMatch>, Vec<RowError>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?
        .clone();
    let missing: Vec<String> = REQUIRED_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::HeaderMismatch { path: path.to_path_buf(), missing });
    }

    let file_stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, record) in reader.deserialize::<RawRecord>().enumerate() {
        let row_no = (i + 1) as u64;
        match record {
            Ok(rec) => match convert(rec, format!("{file_stem}:{row_no}")) {
                Ok(m) => rows.push(m),
                Err(message) => {
                    errors.push(RowError { file: file_stem.clone(), row: row_no, message })
                }
            },
            Err(e) => errors.push(RowError {
                file: file_stem.clone(),
                row: row_no,
                message: e.to_string(),
            }),
        }
    }
    Ok((rows, errors))
}

/// Parses every `*.csv` in a directory, in sorted filename order so repeated
/// runs see the same row ordering.
pub fn parse_match_dir(dir: &Path) -> Result<(Vec<RawMatch>, Vec<RowError>)> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::NoInputFiles(dir.to_path_buf()));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for p in paths {
        let (mut r, mut e) = parse_match_csv(&p)?;
        rows.append(&mut r);
        errors.append(&mut e);
    }
    Ok((rows, errors))
}

/// Observation-table column order; stable across releases.
pub const OBSERVATION_COLUMNS: [&str; 8] = [
    "match_key",
    "player",
    "rel_points",
    "minutes",
    "win",
    "surface",
    "tournament",
    "top20_opponent",
];

#[derive(Debug, Serialize, Deserialize)]
struct ObservationRow {
    match_key: String,
    player: super::Player,
    rel_points: f64,
    minutes: f64,
    win: bool,
    surface: super::Surface,
    tournament: super::Tournament,
    top20_opponent: bool,
}

impl From<&Observation> for ObservationRow {
    fn from(o: &Observation) -> Self {
        Self {
            match_key: o.match_key.clone(),
            player: o.player,
            rel_points: o.rel_points,
            minutes: o.minutes,
            win: o.win,
            surface: o.surface,
            tournament: o.tournament,
            top20_opponent: o.top20_opponent,
        }
    }
}

impl From<ObservationRow> for Observation {
    fn from(r: ObservationRow) -> Self {
        Self {
            player: r.player,
            rel_points: r.rel_points,
            minutes: r.minutes,
            win: r.win,
            surface: r.surface,
            tournament: r.tournament,
            top20_opponent: r.top20_opponent,
            match_key: r.match_key,
        }
    }
}

pub fn write_observations_csv(path: &Path, obs: &[Observation]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(OBSERVATION_COLUMNS)
        .map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
    for o in obs {
        w.serialize(ObservationRow::from(o))
            .map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_observations_json(path: &Path, obs: &[Observation]) -> Result<()> {
    let rows: Vec<ObservationRow> = obs.iter().map(ObservationRow::from).collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &rows)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_observations_csv(path: &Path) -> Result<Vec<Observation>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut out = Vec::new();
    for rec in reader.deserialize::<ObservationRow>() {
        let row = rec.map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
        let o = Observation::from(row);
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(o.rel_points) || !positive(o.minutes) {
            return Err(Error::Parameter(format!(
                "observation {} has an invalid response ({}, {})",
                o.match_key, o.rel_points, o.minutes
            )));
        }
        out.push(o);
    }
    Ok(out)
}
