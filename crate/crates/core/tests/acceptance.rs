//! Acceptance suite: runs the full check grids at p = 2 and p = 3 and prints
//! one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use phimod::cli::{run_check, CheckId, CheckSpec, Entry, Report, Status};

const WEIGHT_LIMIT: Duration = Duration::from_secs(1);
const PARAMETER_LIMIT: Duration = Duration::from_secs(1);
const SUITE_LIMIT: Duration = Duration::from_secs(60);
const P2_LIMIT: Duration = Duration::from_secs(120);
const P3_LIMIT: Duration = Duration::from_secs(900);
const PARALLEL_JOBS: usize = 4;
const FILTRATION_STEPS: usize = 4;
/// Weights that must carry the filtration witness at p = 3.
const P3_FILTRATION_POINTS: [&str; 2] = ["p=3 unram(0,0)", "p=3 unram(1,0)"];
const GOLDEN_P2: &str = include_str!("golden/p2_all.json");

struct Grid {
    report: Report,
    elapsed: Duration,
}

fn run(p: u32, jobs: usize, timing: bool) -> Grid {
    let mut spec = CheckSpec::new(CheckId::All, vec![p]);
    spec.jobs = jobs;
    spec.timing = timing;
    let start = Instant::now();
    let report = run_check(&spec).expect("valid grid");
    Grid { report, elapsed: start.elapsed() }
}

fn entries<'a>(grids: &[&'a Grid], ids: &[CheckId]) -> Vec<&'a Entry> {
    grids.iter().flat_map(|g| g.report.entries.iter()).filter(|e| ids.contains(&e.check)).collect()
}

fn seconds(e: &Entry) -> Duration {
    Duration::from_secs_f64(e.seconds.unwrap_or(0.0))
}

fn all_pass(es: &[&Entry]) -> (bool, String) {
    let bad: Vec<String> = es.iter().filter(|e| e.status != Status::Pass).map(|e| format!("{} {}", e.point, e.detail)).collect();
    (bad.is_empty() && !es.is_empty(), format!("{}/{} points pass{}", es.len() - bad.len(), es.len(), listed(&bad)))
}

fn listed(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(" [{}]", bad.join("; "))
    }
}

fn without_timing(r: &Report) -> String {
    let mut r = r.clone();
    for e in &mut r.entries {
        e.seconds = None;
    }
    r.to_json()
}

fn main() -> ExitCode {
    let p2 = run(2, 1, true);
    let p3 = run(3, 1, true);
    let p2_parallel = run(2, PARALLEL_JOBS, false);
    let grids = [&p2, &p3];
    let mut lines: Vec<(usize, bool, String)> = Vec::new();

    let es = entries(&grids, &[CheckId::Gennr, CheckId::Genram]);
    let (ok, msg) = all_pass(&es);
    let slowest = es.iter().map(|e| seconds(e)).max().unwrap_or_default();
    lines.push((1, ok && slowest < WEIGHT_LIMIT, format!("weight structure: {msg}, slowest {slowest:.2?} (limit {WEIGHT_LIMIT:?})")));

    let es = entries(&grids, &[CheckId::ParamSystem]);
    let (ok, msg) = all_pass(&es);
    let slowest = es.iter().map(|e| seconds(e)).max().unwrap_or_default();
    lines.push((2, ok && es.len() == 4 && slowest < PARAMETER_LIMIT, format!("parameter systems: {msg}, slowest {slowest:.2?}")));

    let es = entries(&grids, &[CheckId::Surjinj]);
    let (ok, msg) = all_pass(&es);
    let total: Duration = es.iter().map(|e| seconds(e)).sum();
    lines.push((3, ok && total < SUITE_LIMIT, format!("Hecke operator suite: {msg}, {total:.2?} (limit {SUITE_LIMIT:?})")));

    let mut ok4 = true;
    let mut msg4 = Vec::new();
    for g in &grids {
        let es = entries(&[g], &[CheckId::Calnr, CheckId::Calram]);
        let (ok, msg) = all_pass(&es);
        let total: Duration = es.iter().map(|e| seconds(e)).sum();
        ok4 &= ok && total < SUITE_LIMIT;
        msg4.push(format!("{msg} in {total:.2?}"));
    }
    lines.push((4, ok4, format!("kernel intersections: {}", msg4.join(", "))));

    let (ok, msg) = all_pass(&entries(&grids, &[CheckId::ExemCalcul]));
    lines.push((5, ok, format!("free induced modules, d = 1, 2, 3: {msg}")));

    let (ok, msg) = all_pass(&entries(&grids, &[CheckId::DualDims]));
    lines.push((6, ok, format!("duality on random modules: {msg}")));

    let (ok, msg) = all_pass(&entries(&grids, &[CheckId::EulerChar]));
    lines.push((7, ok, format!("Euler characteristic zero: {msg}")));

    let (ok, msg) = all_pass(&entries(&grids, &[CheckId::Nonadm]));
    lines.push((8, ok, format!("cokernel Tor_2 not torsion: {msg}")));

    let (ok, msg) = all_pass(&entries(&grids, &[CheckId::EvenPart]));
    lines.push((9, ok, format!("even part: {msg}")));

    let es: Vec<&Entry> = entries(&grids, &[CheckId::Filtration])
        .into_iter()
        .filter(|e| e.point.starts_with("p=2") || P3_FILTRATION_POINTS.contains(&e.point.as_str()))
        .collect();
    let mut bad = Vec::new();
    let mut uncertified = Vec::new();
    for e in &es {
        let ranks = e.values["ranks"].as_array().map_or(0, |r| r.len());
        if e.status == Status::Fail || e.values["witness"] != true || ranks != FILTRATION_STEPS {
            bad.push(format!("{} {}", e.point, e.detail));
        } else if e.status == Status::Inconclusive {
            uncertified.push(format!("{} {}", e.point, e.detail));
        }
    }
    let p3_present = P3_FILTRATION_POINTS.iter().all(|p| es.iter().any(|e| e.point == *p));
    let note = if uncertified.is_empty() {
        String::new()
    } else {
        format!("; steps without a window certificate at{}", listed(&uncertified))
    };
    lines.push((
        10,
        bad.is_empty() && p3_present && !es.is_empty(),
        format!("filtration witness: {}/{} points{}{}", es.len() - bad.len(), es.len(), listed(&bad), note),
    ));

    let serial = without_timing(&p2.report);
    let parallel = p2_parallel.report.to_json();
    let identical = serial == parallel;
    let golden = parallel == GOLDEN_P2;
    let fast = p2.elapsed < P2_LIMIT && p3.elapsed < P3_LIMIT;
    lines.push((
        11,
        identical && golden && fast,
        format!(
            "performance and determinism: p=2 {:.1?} (limit {P2_LIMIT:?}), p=3 {:.1?} (limit {P3_LIMIT:?}), jobs 1 vs {PARALLEL_JOBS} identical: {identical}, golden p=2 report: {golden}",
            p2.elapsed, p3.elapsed
        ),
    ));

    let mut failed = 0;
    for (n, ok, msg) in &lines {
        println!("criterion {n:>2} {} {msg}", if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
