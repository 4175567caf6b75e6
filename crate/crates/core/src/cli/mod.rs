//! Batch verification front end: named checks over parameter grids, JSON
//! reports and a summary table.

pub mod checks;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use checks::{run_task, tasks, Context, Status, Task};
pub use config::{CheckId, CheckSpec, WeightSel};
pub use report::{Entry, Report, Summary};

use crate::error::{Error, Result};

/// Runs every grid point of `spec` and assembles the report.
pub fn run_check(spec: &CheckSpec) -> Result<Report> {
    spec.validate()?;
    let tasks = tasks(spec);
    if tasks.is_empty() {
        return Err(Error::Config(format!("{} has no grid points for this selection", spec.id.name())));
    }
    run_grid(spec, &tasks)
}

/// Evaluates the tasks on a pool of `spec.jobs` threads; entries keep task order.
/// A panicking grid point becomes a failed entry.
pub fn run_grid(spec: &CheckSpec, tasks: &[Task]) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let ctx = Context::default();
    let entries: Vec<Entry> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| run_task(&ctx, spec, task))).unwrap_or_else(|panic| {
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".into());
                    checks::Outcome {
                        status: Status::Fail,
                        detail: format!("panicked: {msg}"),
                        values: serde_json::json!({ "panic": msg }),
                    }
                });
                Entry {
                    check: task.check,
                    point: task.point(),
                    status: outcome.status,
                    detail: outcome.detail,
                    values: outcome.values,
                    seconds: spec.timing.then(|| start.elapsed().as_secs_f64()),
                }
            })
            .collect()
    });
    Ok(Report::new(spec.clone(), entries))
}

#[derive(Parser)]
#[command(name = "phimod", version, about = "Exact checks for skew polynomial modules and mod-p Hecke cokernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named check over a parameter grid.
    Check(CheckArgs),
}

#[derive(Args)]
struct CheckArgs {
    id: CheckId,
    /// Primes, comma separated.
    #[arg(long)]
    p: Option<String>,
    /// Twist exponent for the induced examples (default p).
    #[arg(long)]
    q: Option<u32>,
    /// unram, ram or both.
    #[arg(long)]
    case: Option<String>,
    /// Residue of the ramified unit.
    #[arg(long)]
    u: Option<u32>,
    /// `all`, or weights separated by `;` with parameters separated by `,`.
    #[arg(long)]
    weights: Option<String>,
    /// Truncation level (default 6 for p = 2, 4 otherwise).
    #[arg(long = "Nmax")]
    n_max: Option<usize>,
    /// Filtration steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with 0 when the only problems are inconclusive points.
    #[arg(long)]
    allow_inconclusive: bool,
    /// Record per-point wall time in the report.
    #[arg(long)]
    timing: bool,
}

fn build_spec(a: &CheckArgs) -> Result<CheckSpec> {
    let mut spec = CheckSpec::new(a.id, vec![2]);
    spec.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    if let Some(path) = &a.config {
        for (k, v) in config::read_config(path)? {
            config::apply_setting(&mut spec, &k, &v)?;
        }
    }
    let flags: [(&str, Option<String>); 9] = [
        ("p", a.p.clone()),
        ("q", a.q.map(|x| x.to_string())),
        ("case", a.case.clone()),
        ("u", a.u.map(|x| x.to_string())),
        ("weights", a.weights.clone()),
        ("Nmax", a.n_max.map(|x| x.to_string())),
        ("steps", a.steps.map(|x| x.to_string())),
        ("seed", a.seed.map(|x| x.to_string())),
        ("jobs", a.jobs.map(|x| x.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            config::apply_setting(&mut spec, k, &v)?;
        }
    }
    if let Some(path) = &a.json {
        spec.json = Some(path.clone());
    }
    spec.allow_inconclusive |= a.allow_inconclusive;
    spec.timing |= a.timing;
    spec.validate()?;
    Ok(spec)
}

/// Entry point of the binary; returns the process exit code
/// (0 pass, 1 fail or inconclusive, 2 usage).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let Command::Check(a) = cli.command;
    let spec = match build_spec(&a) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("phimod: {e}");
            return 2;
        }
    };
    let report = match run_check(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("phimod: {e}");
            return 2;
        }
    };
    print!("{}", report.table());
    if let Some(path) = &spec.json {
        if let Err(e) = report.write_atomic(path) {
            eprintln!("phimod: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    report.exit_code(spec.allow_inconclusive)
}
