//! Command-line front end: `ingest`, `fit`, `contour`, `plot`, `validate`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Every artifact
//! embeds a manifest (resolved settings plus input hashes) and is
//! byte-reproducible from (inputs, config, seed).

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::design::{self, CovariateProfile};
use crate::engine::{self, ContourSet, ModelFit};
use crate::error::{Error, Result};
use crate::ingest::{self, FilterConfig, Player, Surface, Tournament};
use crate::manifest::{hash_file, RunManifest};
use crate::sampler::SamplerConfig;
use crate::svg::{self, PlotOptions, Units};
use crate::validate::{self, Scale};

#[derive(Parser)]
#[command(
    name = "quantour",
    version,
    about = "Directional Bayesian quantile regression: ATP match ingestion, per-direction Gibbs fits, and convex quantile-region contours"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse match CSVs, apply the selection filters, write the observation
    /// table and the exclusion report.
    Ingest(IngestArgs),
    /// Fit the directional quantile regression over the full direction grid.
    Fit(FitArgs),
    /// Build quantile-region contours for covariate profiles from a fit.
    Contour(ContourArgs),
    /// Render a contour set to a static SVG figure.
    Plot(PlotArgs),
    /// Run the oracle validation suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Directory containing the match CSV files.
    csv_dir: PathBuf,
    /// Observation table output path.
    #[arg(long)]
    out: PathBuf,
    /// Exclusion report path (default: <out>.report.json).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Observation table format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// First tournament date kept (YYYY-MM-DD).
    #[arg(long)]
    start_date: Option<NaiveDate>,
    /// Last tournament date kept (YYYY-MM-DD).
    #[arg(long)]
    cutoff_date: Option<NaiveDate>,
    /// Key=value config file overriding defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Observation table (CSV) produced by `ingest`.
    obs_path: PathBuf,
    /// Fit output path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Quantile magnitude in (0,1).
    #[arg(long)]
    tau: Option<f64>,
    /// Number of grid directions.
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Post-burn-in iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Keep every n-th draw.
    #[arg(long)]
    thin: Option<usize>,
    /// Variance of the normal prior on the coefficients.
    #[arg(long)]
    prior_var: Option<f64>,
    /// Inverse-gamma shape of the sigma prior.
    #[arg(long)]
    sigma_shape: Option<f64>,
    /// Inverse-gamma scale of the sigma prior.
    #[arg(long)]
    sigma_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel fit workers (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Key=value config file overriding defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for per-direction chain dumps (CSV, one file per direction).
    #[arg(long)]
    dump_chains: Option<PathBuf>,
    /// Write the encoded design matrix (CSV with column-name header) here.
    #[arg(long)]
    dump_design: Option<PathBuf>,
    /// Suppress per-direction progress lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ContourArgs {
    /// Fit file (JSON) produced by `fit`.
    fit_path: PathBuf,
    /// Contour set output path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Preset profile family: win, top20, surface, tournament.
    #[arg(long)]
    preset: Option<String>,
    /// Custom profile, e.g.
    /// "name=nadal_clay,player=nadal,surface=clay" (repeatable; omitted
    /// fields take their reference value).
    #[arg(long = "profile")]
    profiles: Vec<String>,
}

#[derive(Args)]
struct PlotArgs {
    /// Contour set (JSON) produced by `contour`.
    contours_path: PathBuf,
    /// SVG output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 560)]
    height: u32,
    #[arg(long, default_value = "")]
    title: String,
    /// Coordinate units: orig (data units) or std (standardized).
    #[arg(long, default_value = "orig", value_parser = ["orig", "std"])]
    units: String,
}

#[derive(Args)]
struct ValidateArgs {
    /// Check sizes: tiny or default.
    #[arg(long, default_value = "default")]
    scale: String,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Contour(a) => cmd_contour(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if matches!(e, Error::Usage(_)) {
                eprintln!("run `quantour <command> --help` for usage");
            }
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// Config file handling
// ---------------------------------------------------------------------------

fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{}:{}: expected `key = value`, got {line:?}",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

/// Flag < config file < built-in default, with the flag winning.
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    cfg: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::Config(format!("config key {key}: cannot parse {raw:?}"))),
        None => Ok(default),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ReportDocument {
    manifest: RunManifest,
    #[serde(flatten)]
    report: ingest::IngestReport,
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let cfg_file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let defaults = FilterConfig::default();
    let filter = FilterConfig {
        start_date: resolve(args.start_date, &cfg_file, "start_date", defaults.start_date)?,
        cutoff_date: resolve(args.cutoff_date, &cfg_file, "cutoff_date", defaults.cutoff_date)?,
        require_target_player: true,
    };

    let (rows, row_errors) = ingest::parse_match_dir(&args.csv_dir)?;
    let output = ingest::ingest_rows(rows, row_errors, &filter);

    match args.format.as_str() {
        "json" => ingest::write_observations_json(&args.out, &output.observations)?,
        _ => ingest::write_observations_csv(&args.out, &output.observations)?,
    }

    let mut manifest = RunManifest::new("ingest")
        .setting("start_date", filter.start_date)
        .setting("cutoff_date", filter.cutoff_date)
        .setting("format", &args.format);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.csv_dir)
        .map_err(|e| Error::io(&args.csv_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    for p in &paths {
        manifest = manifest.input_file(p)?;
    }

    let report_path = args
        .report
        .unwrap_or_else(|| args.out.with_extension("report.json"));
    let doc = ReportDocument { manifest, report: output.report.clone() };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    write_text(&report_path, &json)?;

    let r = &output.report;
    println!("input rows: {}", r.input_rows);
    println!("malformed rows: {}", r.malformed_rows);
    println!(
        "excluded: not_target_player={} out_of_date_range={} not_completed={} excluded_level={} excluded_surface={} missing_stats={}",
        r.exclusions.not_target_player,
        r.exclusions.out_of_date_range,
        r.exclusions.not_completed,
        r.exclusions.excluded_level,
        r.exclusions.excluded_surface,
        r.exclusions.missing_stats,
    );
    println!("retained matches: {}", r.retained_matches);
    println!("observations: {}", r.observations);
    println!(
        "loss paradox: big three {:.4} ({} of {}), tour {:.4} ({} of {})",
        r.loss_paradox.big_three_rate,
        r.loss_paradox.big_three_paradox,
        r.loss_paradox.big_three_losses,
        r.loss_paradox.tour_rate,
        r.loss_paradox.tour_paradox,
        r.loss_paradox.tour_matches,
    );
    println!("observation table: {}", args.out.display());
    println!("report: {}", report_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> Result<()> {
    let cfg_file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let defaults = SamplerConfig::default();
    let tau = resolve(args.tau, &cfg_file, "tau", 0.25)?;
    let directions = resolve(args.directions, &cfg_file, "directions", 180)?;
    let jobs = match args.jobs {
        Some(j) => Some(j),
        None => cfg_file
            .get("jobs")
            .map(|raw| {
                raw.parse().map_err(|_| {
                    Error::Config(format!("config key jobs: cannot parse {raw:?}"))
                })
            })
            .transpose()?,
    };
    let sampler_cfg = SamplerConfig {
        burn_in: resolve(args.burn_in, &cfg_file, "burn_in", defaults.burn_in)?,
        total_iters: resolve(args.iters, &cfg_file, "iters", defaults.total_iters)?,
        thin: resolve(args.thin, &cfg_file, "thin", defaults.thin)?,
        prior_var: resolve(args.prior_var, &cfg_file, "prior_var", defaults.prior_var)?,
        sigma_shape: resolve(args.sigma_shape, &cfg_file, "sigma_shape", defaults.sigma_shape)?,
        sigma_scale: resolve(args.sigma_scale, &cfg_file, "sigma_scale", defaults.sigma_scale)?,
        seed: resolve(args.seed, &cfg_file, "seed", defaults.seed)?,
    };
    sampler_cfg.validate()?;

    let observations = ingest::read_observations_csv(&args.obs_path)?;
    let x = design::encode_design(&observations)?;
    if let Some(path) = &args.dump_design {
        x.write_csv(path)?;
    }
    let y = design::response_matrix(&observations);
    let (z, scaling) = design::standardize(&y)?;
    let fingerprint = hash_file(&args.obs_path)?;

    let quiet = args.quiet;
    let fit = engine::fit_all_directions_with_progress(
        &z,
        &x,
        tau,
        &sampler_cfg,
        directions,
        jobs,
        scaling,
        fingerprint.clone(),
        &|done, total| {
            if !quiet {
                eprintln!("direction {done}/{total} done");
            }
        },
    )?;

    if let Some(dir) = &args.dump_chains {
        dump_chains(dir, &fit)?;
    }

    let manifest = RunManifest::new("fit")
        .setting("tau", tau)
        .setting("directions", directions)
        .setting("burn_in", sampler_cfg.burn_in)
        .setting("iters", sampler_cfg.total_iters)
        .setting("thin", sampler_cfg.thin)
        .setting("prior_var", sampler_cfg.prior_var)
        .setting("sigma_shape", sampler_cfg.sigma_shape)
        .setting("sigma_scale", sampler_cfg.sigma_scale)
        .setting("seed", sampler_cfg.seed)
        .input_file(&args.obs_path)?;
    let fit = ModelFit { manifest: Some(manifest), ..fit };

    write_text(&args.out, &fit.to_json()?)?;
    println!("fit written: {}", args.out.display());
    println!("fingerprint: {}", fit.fingerprint()?);
    Ok(())
}

fn dump_chains(dir: &Path, fit: &ModelFit) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for f in &fit.fits {
        let path = dir.join(format!("direction_{:04}.csv", f.direction.index));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(&f.draw_columns)
            .map_err(|e| Error::Csv { path: path.clone(), source: e })?;
        for i in 0..f.kept_draws.nrows() {
            let row: Vec<String> =
                f.kept_draws.row(i).iter().map(|v| format!("{v}")).collect();
            w.write_record(&row).map_err(|e| Error::Csv { path: path.clone(), source: e })?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// contour
// ---------------------------------------------------------------------------

fn parse_profile_spec(spec: &str, index: usize) -> Result<(String, CovariateProfile)> {
    let mut profile = CovariateProfile::reference(Player::Federer);
    let mut name = format!("profile{}", index + 1);
    for field in spec.split(',') {
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        let Some((key, value)) = field.split_once('=') else {
            return Err(Error::Usage(format!(
                "profile field {field:?} is not key=value (in {spec:?})"
            )));
        };
        let (key, value) = (key.trim().to_lowercase(), value.trim().to_lowercase());
        let bad_value = || {
            Error::Usage(format!("profile field {key}: unsupported value {value:?} (in {spec:?})"))
        };
        match key.as_str() {
            "name" => name = value.clone(),
            "player" => {
                profile.player = match value.as_str() {
                    "federer" => Player::Federer,
                    "djokovic" => Player::Djokovic,
                    "nadal" => Player::Nadal,
                    _ => return Err(bad_value()),
                }
            }
            "win" => {
                profile.win = match value.as_str() {
                    "yes" | "true" | "win" | "1" => true,
                    "no" | "false" | "loss" | "0" => false,
                    _ => return Err(bad_value()),
                }
            }
            "surface" => {
                profile.surface = match value.as_str() {
                    "hard" => Surface::Hard,
                    "clay" => Surface::Clay,
                    "grass" => Surface::Grass,
                    _ => return Err(bad_value()),
                }
            }
            "tournament" => {
                profile.tournament = match value.as_str() {
                    "others" => Tournament::Others,
                    "grand_slam" | "grandslam" => Tournament::GrandSlam,
                    "finals" => Tournament::Finals,
                    "masters" => Tournament::Masters,
                    _ => return Err(bad_value()),
                }
            }
            "top20" => {
                profile.top20 = match value.as_str() {
                    "yes" | "true" | "1" => true,
                    "no" | "false" | "0" => false,
                    _ => return Err(bad_value()),
                }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown profile field {other:?}; expected name, player, win, surface, tournament, top20"
                )))
            }
        }
    }
    Ok((name, profile))
}

fn cmd_contour(args: ContourArgs) -> Result<()> {
    let json = std::fs::read_to_string(&args.fit_path).map_err(|e| Error::io(&args.fit_path, e))?;
    let fit = ModelFit::from_json(&json)?;

    let mut profiles: Vec<(String, CovariateProfile)> = Vec::new();
    if let Some(preset) = &args.preset {
        profiles.extend(engine::preset_profiles(preset)?);
    }
    for (i, spec) in args.profiles.iter().enumerate() {
        profiles.push(parse_profile_spec(spec, i)?);
    }
    if profiles.is_empty() {
        return Err(Error::Usage("no profiles given; use --preset or --profile".into()));
    }

    let contours = engine::compare_profiles(&fit, &profiles)?;
    let manifest = RunManifest::new("contour")
        .setting("preset", args.preset.as_deref().unwrap_or("-"))
        .setting("profiles", profiles.len())
        .input_file(&args.fit_path)?;
    let contours = ContourSet { manifest: Some(manifest), ..contours };

    write_text(&args.out, &contours.to_json()?)?;
    let empty = contours.profiles.iter().filter(|p| p.empty).count();
    println!("contours written: {} ({} profiles, {} empty)", args.out.display(), profiles.len(), empty);
    for p in contours.profiles.iter().filter(|p| p.empty) {
        eprintln!("warning: profile {} produced an empty region", p.name);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let json =
        std::fs::read_to_string(&args.contours_path).map_err(|e| Error::io(&args.contours_path, e))?;
    let contours = ContourSet::from_json(&json)?;
    let opts = PlotOptions {
        width: args.width,
        height: args.height,
        title: args.title.clone(),
        units: if args.units == "std" { Units::Standardized } else { Units::Original },
    };
    let body = svg::render_contours(&contours, &opts);

    let manifest = RunManifest::new("plot")
        .setting("width", args.width)
        .setting("height", args.height)
        .setting("units", &args.units)
        .input_file(&args.contours_path)?;
    let comment = format!("<!-- manifest: {} -->\n", serde_json::to_string(&manifest)?);
    let svg_text = match body.find('\n') {
        Some(pos) => {
            let (head, tail) = body.split_at(pos + 1);
            format!("{head}{comment}{tail}")
        }
        None => body,
    };
    write_text(&args.out, &svg_text)?;
    println!("figure written: {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let scale = Scale::parse(&args.scale)
        .ok_or_else(|| Error::Usage(format!("unknown scale {:?}; use tiny or default", args.scale)))?;
    let results = validate::run_all(scale);
    let mut all_ok = true;
    for r in &results {
        println!("check {}: {}", r.name, if r.passed { "PASS" } else { "FAIL" });
        for d in &r.details {
            println!("  {d}");
        }
        all_ok &= r.passed;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Error::NoConvergence("one or more validation checks failed".into()))
    }
}
