use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sasaki_tg::expedition::{
    builtin_names, builtin_source, degeneracy, load_builtin, load_scenario, run_config, run_suite, suite_members,
    suite_outcome, to_json_string, write_csv_summary, write_file, write_trajectory, ExpeditionError, Overrides,
    RunReport, SUITE_NAMES,
};

#[derive(Parser)]
#[command(name = "expedition", version, about = "Totally geodesic submanifold checks in the Sasaki tangent bundle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Common {
    /// Totally-geodesic threshold on the residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid resolution per parameter.
    #[arg(long)]
    grid: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; defaults to csv for `.csv` paths, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: a TOML file or the name of a builtin.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named suite, or `all`.
    Suite {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// List builtin scenarios and suites.
    List,
}

fn overrides(c: &Common) -> Result<Overrides, ExpeditionError> {
    let bad = |m: String| ExpeditionError::Config {
        origin: "command line".into(),
        issue: sasaki_tg::expedition::ConfigIssue { line: None, message: m },
    };
    if let Some(t) = c.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(bad(format!("--tol must be positive, got {t}")));
        }
    }
    if let Some(n) = c.grid {
        if n == 0 || n > 1000 {
            return Err(bad(format!("--grid must be in 1..=1000, got {n}")));
        }
    }
    Ok(Overrides { tolerance: c.tol, grid: c.grid })
}

fn emit(report: &RunReport, out: Option<&Path>, format: Option<Format>) -> Result<(), ExpeditionError> {
    let format = format.unwrap_or(match out.and_then(|p| p.extension()) {
        Some(e) if e == "csv" => Format::Csv,
        _ => Format::Json,
    });
    let bytes = match format {
        Format::Json => to_json_string(report).into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv_summary(report, &mut buf).expect("writing to memory");
            buf
        }
    };
    match out {
        Some(p) => write_file(p, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| ExpeditionError::io("<stdout>", e)),
    }
}

fn looks_like_builtin(s: &str) -> bool {
    !s.contains(['/', '\\', '.']) && builtin_source(s).is_some()
}

fn run(scenario: &str, common: &Common) -> Result<(), ExpeditionError> {
    let ov = overrides(common)?;
    let (config, src) = if looks_like_builtin(scenario) {
        let (c, s) = load_builtin(scenario)?;
        (c, s.to_string())
    } else {
        load_scenario(scenario)?
    };
    let result = run_config(&config, Some(&src), &ov)?;
    let r = &result.report;
    eprintln!(
        "{}: {} (max residual {:.3e}, {} grid points)",
        r.name,
        r.verdict.map_or("checks", |v| v.as_str()),
        r.max_residual,
        r.grid_points
    );
    for c in r.checks.iter().filter(|c| !c.passed) {
        eprintln!("  check {} failed: {:.3e} > {:.1e}", c.name, c.value, c.tolerance);
    }
    let out = common.out.clone().or_else(|| config.outputs.report.as_ref().map(PathBuf::from));
    emit(&RunReport::single(result.report.clone()), out.as_deref(), common.format)?;
    if let (Some(path), Some(rows)) = (&config.outputs.trajectory, &result.trajectory) {
        let mut buf = Vec::new();
        write_trajectory(rows, &mut buf).map_err(|e| ExpeditionError::io(path, e))?;
        write_file(path, &buf)?;
    }
    match degeneracy(&result.report) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn suite(name: &str, common: &Common) -> Result<(), ExpeditionError> {
    let ov = overrides(common)?;
    let report = run_suite(name, &ov)?;
    for s in &report.scenarios {
        let status = if s.passed { "ok" } else { "FAILED" };
        let verdict = s.verdict.map_or("checks", |v| v.as_str());
        eprintln!("{status:6} {:32} {verdict:22} {:.3e}", s.name, s.max_residual);
        if let Some(e) = &s.error {
            eprintln!("       {e}");
        }
    }
    emit(&report, common.out.as_deref(), common.format)?;
    suite_outcome(&report)
}

fn list() {
    println!("suites:");
    for s in SUITE_NAMES {
        println!("  {s}: {}", suite_members(s).unwrap_or_default().join(", "));
    }
    println!("  all: every suite above");
    println!("builtin scenarios:");
    for n in builtin_names() {
        println!("  {n}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, common } => run(scenario, common),
        Command::Suite { name, common } => suite(name, common),
        Command::List => {
            list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
