//! Acceptance suite. One test per criterion; each prints a single
//! `criterion N (<name>): PASS|FAIL|SKIP — details` line.
//!
//! Criteria 1, 2 and 9 need the real ATP match corpus, which ships
//! separately; point `QUANTOUR_ATP_DATA` at a directory of
//! `atp_matches_*.csv` files to run them. Without it they report SKIP.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use quantour::design;
use quantour::engine;
use quantour::ingest::{self, FilterConfig};
use quantour::sampler::SamplerConfig;
use quantour::validate::{self, Scale};

fn report(criterion: &str, status: &str, details: &str) {
    println!("criterion {criterion}: {status} — {details}");
}

fn corpus_dir() -> Option<PathBuf> {
    std::env::var_os("QUANTOUR_ATP_DATA").map(PathBuf::from).filter(|p| p.is_dir())
}

fn assert_runtime(criterion: &str, elapsed: Duration, bound: Duration) {
    assert!(
        elapsed <= bound,
        "{criterion}: runtime {elapsed:?} exceeds the {bound:?} budget"
    );
}

fn ingest_corpus(dir: &std::path::Path) -> ingest::IngestOutput {
    let (rows, errors) = ingest::parse_match_dir(dir).expect("parse corpus");
    ingest::ingest_rows(rows, errors, &FilterConfig::default())
}

#[test]
fn criterion_01_ingestion_count() {
    let Some(dir) = corpus_dir() else {
        report("1 (ingestion count)", "SKIP", "ATP corpus not provided; set QUANTOUR_ATP_DATA");
        return;
    };
    let start = Instant::now();
    let out = ingest_corpus(&dir);
    let elapsed = start.elapsed();
    let n = out.report.observations;
    let (lo, hi) = (3580, 3726); // 3,653 ± 2%
    let ok = (lo..=hi).contains(&n);
    let accounted = out.report.exclusions.total()
        + out.report.retained_matches
        + out.report.malformed_rows
        == out.report.input_rows;
    report(
        "1 (ingestion count)",
        if ok && accounted { "PASS" } else { "FAIL" },
        &format!(
            "observations={n}, required [{lo}, {hi}]; every input row accounted: {accounted}; {elapsed:?}"
        ),
    );
    assert!(ok, "observation count {n} outside [{lo}, {hi}]");
    assert!(accounted, "exclusion report does not account for every row");
    assert_runtime("criterion 1", elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_02_loss_paradox_rates() {
    let Some(dir) = corpus_dir() else {
        report("2 (loss-paradox rates)", "SKIP", "ATP corpus not provided; set QUANTOUR_ATP_DATA");
        return;
    };
    let start = Instant::now();
    let out = ingest_corpus(&dir);
    let elapsed = start.elapsed();
    let lp = &out.report.loss_paradox;
    let big_ok = (0.08..=0.12).contains(&lp.big_three_rate);
    let tour_ok = (0.04..=0.06).contains(&lp.tour_rate);
    report(
        "2 (loss-paradox rates)",
        if big_ok && tour_ok { "PASS" } else { "FAIL" },
        &format!(
            "big three {:.4} (required [0.08, 0.12]), tour {:.4} (required [0.04, 0.06]); {elapsed:?}",
            lp.big_three_rate, lp.tour_rate
        ),
    );
    assert!(big_ok, "big-three paradox rate {} outside [0.08, 0.12]", lp.big_three_rate);
    assert!(tour_ok, "tour paradox rate {} outside [0.04, 0.06]", lp.tour_rate);
    assert_runtime("criterion 2", elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_03_directional_coverage() {
    let start = Instant::now();
    let r = validate::check_coverage(Scale::Default);
    let elapsed = start.elapsed();
    report(
        "3 (directional coverage)",
        if r.passed { "PASS" } else { "FAIL" },
        &format!("{}; {elapsed:?}", r.details.join("; ")),
    );
    assert!(r.passed, "{:?}", r.details);
    assert_runtime("criterion 3", elapsed, Duration::from_secs(600));
}

#[test]
fn criterion_04_sampler_vs_oracle() {
    let start = Instant::now();
    let r = validate::check_sampler_vs_oracle(Scale::Default);
    let elapsed = start.elapsed();
    report(
        "4 (sampler vs check-loss oracle)",
        if r.passed { "PASS" } else { "FAIL" },
        &format!("{}; {elapsed:?}", r.details.join("; ")),
    );
    assert!(r.passed, "{:?}", r.details);
    assert_runtime("criterion 4", elapsed, Duration::from_secs(300));
}

#[test]
fn criterion_05_full_conditional_density_ratios() {
    let r = validate::check_full_conditionals();
    report(
        "5 (full-conditional density ratios)",
        if r.passed { "PASS" } else { "FAIL" },
        &r.details.join("; "),
    );
    assert!(r.passed, "{:?}", r.details);
}

#[test]
fn criterion_06_gig_sampler() {
    let r = validate::check_gig(Scale::Default);
    report(
        "6 (GIG sampler vs quadrature)",
        if r.passed { "PASS" } else { "FAIL" },
        &r.details.join("; "),
    );
    assert!(r.passed, "{:?}", r.details);
}

#[test]
fn criterion_07_geometry_oracle_equivalence() {
    let r = validate::check_geometry();
    report(
        "7 (geometry membership oracle)",
        if r.passed { "PASS" } else { "FAIL" },
        &r.details.join("; "),
    );
    assert!(r.passed, "{:?}", r.details);
}

#[test]
fn criterion_08_tukey_region_agreement() {
    let start = Instant::now();
    let r = validate::check_tukey(Scale::Default);
    let elapsed = start.elapsed();
    report(
        "8 (Tukey depth-region agreement)",
        if r.passed { "PASS" } else { "FAIL" },
        &format!("{}; {elapsed:?}", r.details.join("; ")),
    );
    assert!(r.passed, "{:?}", r.details);
    assert_runtime("criterion 8", elapsed, Duration::from_secs(900));
}

#[test]
fn criterion_09_structural_figure_reproduction() {
    let Some(dir) = corpus_dir() else {
        report(
            "9 (structural figure reproduction)",
            "SKIP",
            "ATP corpus not provided; set QUANTOUR_ATP_DATA (full-chain fit; expect hours)",
        );
        return;
    };
    let out = ingest_corpus(&dir);
    let x = design::encode_design(&out.observations).expect("design");
    let y = design::response_matrix(&out.observations);
    let (z, scaling) = design::standardize(&y).expect("standardize");
    // Production chain settings.
    let cfg = SamplerConfig { seed: 20120116, ..SamplerConfig::default() };
    let fit = engine::fit_all_directions(&z, &x, 0.25, &cfg, 180, None, scaling, "atp-corpus")
        .expect("full fit");
    let tournament =
        engine::compare_profiles(&fit, &engine::preset_profiles("tournament").unwrap())
            .expect("tournament contours");
    let surface = engine::compare_profiles(&fit, &engine::preset_profiles("surface").unwrap())
        .expect("surface contours");
    let r = validate::check_structural_figures(&tournament, &surface);
    report(
        "9 (structural figure reproduction)",
        if r.passed { "PASS" } else { "FAIL" },
        &r.details.join("; "),
    );
    assert!(r.passed, "{:?}", r.details);
}

#[test]
fn criterion_10_fit_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let obs = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/observations_small.csv");
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_quantour"))
            .arg("fit")
            .arg(&obs)
            .arg("--out")
            .arg(out)
            .args([
                "--directions",
                "8",
                "--burn-in",
                "200",
                "--iters",
                "1000",
                "--thin",
                "10",
                "--seed",
                "42",
                "--quiet",
            ])
            .status()
            .expect("spawn quantour");
        assert!(status.success());
    };
    let a = dir.path().join("fit_a.json");
    let b = dir.path().join("fit_b.json");
    run(&a);
    run(&b);
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    let identical = bytes_a == bytes_b;
    report(
        "10 (fit determinism)",
        if identical { "PASS" } else { "FAIL" },
        &format!(
            "two cmd_fit runs, same inputs and seed: {} bytes vs {} bytes, byte-identical: {identical}",
            bytes_a.len(),
            bytes_b.len()
        ),
    );
    assert!(identical, "ModelFit JSON differs between identical runs");
}

/// The `validate` subcommand itself: tiny scale finishes within a minute.
#[test]
fn validate_tiny_scale_runtime() {
    let start = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_quantour"))
        .args(["validate", "--scale", "tiny"])
        .output()
        .expect("spawn quantour");
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "validate failed:\n{stdout}");
    assert!(stdout.matches(": PASS").count() >= 6, "{stdout}");
    report(
        "validate --scale tiny",
        "PASS",
        &format!("all checks pass in {elapsed:?} (budget 60 s)"),
    );
    assert_runtime("validate tiny", elapsed, Duration::from_secs(60));
}
