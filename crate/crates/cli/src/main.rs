use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use projspray::catalog::{self, CatalogSpray, MetricId};
use projspray::suites::{self, Options, Suite};
use projspray::trace::integrate_spray;
use projspray::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "projspray",
    version,
    about = "Verify projective sprays, ODEs and Finsler metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and stream one JSON record per line.
    Verify {
        /// all, or a comma-separated list of symmetry, flatness, metrizability, equivalence, randers.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Override the tolerance of every upper-bound check.
        #[arg(long)]
        tol: Option<f64>,
        /// Points per axis for the base grids.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = suites::DEFAULT_SEED)]
        seed: u64,
        /// Restrict symmetry and flatness checks to one family, e.g. C2+.
        #[arg(long)]
        case: Option<String>,
        /// Print a human-readable table instead of JSON lines.
        #[arg(long)]
        summary: bool,
        /// Write the report to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a catalog spray and write the samples as CSV.
    ///
    /// Arguments: ENTRY [K] X Y U V TMAX STEP, where K is required for bk+ and bk-.
    Trace {
        entry: String,
        #[arg(allow_negative_numbers = true, num_args = 6..=7, required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List catalog entries or show one of them.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        id: String,
        #[arg(allow_negative_numbers = true)]
        param: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            suite,
            tol,
            grid,
            seed,
            case,
            summary,
            out,
        } => verify(&suite, tol, grid, seed, case, summary, out),
        Command::Trace { entry, values, out } => trace(&entry, &values, out),
        Command::Catalog { action } => catalog_cmd(action),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn output(out: Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verify(
    suite: &str,
    tol: Option<f64>,
    grid: Option<usize>,
    seed: u64,
    case: Option<String>,
    summary: bool,
    out: Option<PathBuf>,
) -> ExitCode {
    let selected: Vec<Suite> = match Suite::parse_selection(suite) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return usage(format!("--tol must be positive, got {t}"));
        }
    }
    let opts = Options {
        seed,
        grid,
        tol,
        case: case.clone(),
        ..Options::default()
    };
    let reports = suites::run_all(&selected, &opts);
    if reports.is_empty() {
        return usage(format!(
            "--case {:?} matches no catalog entry",
            case.unwrap_or_default()
        ));
    }
    let mut w = match output(out) {
        Ok(w) => w,
        Err(e) => return usage(e),
    };
    let written = if summary {
        w.write_all(suites::summary_table(&reports).as_bytes())
    } else {
        let mut lines = vec![serde_json::to_string(&suites::header(&selected, &opts)).unwrap()];
        lines.extend(reports.iter().map(|r| serde_json::to_string(r).unwrap()));
        lines.iter().try_for_each(|l| writeln!(w, "{l}"))
    };
    if let Err(e) = written.and_then(|_| w.flush()) {
        return usage(e);
    }
    let failures = reports.iter().filter(|r| !r.pass).count();
    if failures > 0 {
        eprintln!("{failures} of {} checks failed", reports.len());
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}

fn parse_spray(entry: &str, k: Option<f64>) -> projspray::Result<CatalogSpray> {
    let id = entry.strip_prefix("spray:").unwrap_or(entry);
    if id == "flat" {
        return Ok(CatalogSpray::Flat);
    }
    Ok(MetricId::parse(id, k)?.spray())
}

fn trace(entry: &str, values: &[f64], out: Option<PathBuf>) -> ExitCode {
    let needs_k = matches!(entry.strip_prefix("spray:").unwrap_or(entry), "bk+" | "bk-");
    let (k, rest) = match (needs_k, values.len()) {
        (true, 7) => (Some(values[0]), &values[1..]),
        (false, 6) => (None, values),
        (true, _) => return usage(format!("{entry} takes K X Y U V TMAX STEP")),
        (false, _) => return usage(format!("{entry} takes X Y U V TMAX STEP")),
    };
    let spray = match parse_spray(entry, k) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let init = [rest[0], rest[1], rest[2], rest[3]];
    match integrate_spray(&spray, init, rest[4], rest[5]) {
        Ok(t) => {
            let written = output(out).and_then(|mut w| {
                w.write_all(t.to_csv().as_bytes())?;
                w.flush()
            });
            if let Err(e) = written {
                return usage(e);
            }
            if let Some(h) = &t.halt {
                eprintln!("integration stopped early: {h:?}");
            }
            ExitCode::SUCCESS
        }
        Err(e @ (Error::OutsideDomain { .. } | Error::Domain { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(e) => usage(e),
    }
}

fn catalog_cmd(action: CatalogAction) -> ExitCode {
    match action {
        CatalogAction::List => {
            let mut w = io::stdout().lock();
            for e in catalog::listing() {
                let domain = e.domain.map(|d| format!("{d:?}")).unwrap_or_default();
                let _ = writeln!(
                    w,
                    "{:<14} {:<9} {}  {}  {}",
                    e.id, e.family, e.formula, domain, e.parameters
                );
            }
            ExitCode::SUCCESS
        }
        CatalogAction::Show { id, param } => match catalog::show(&id, param) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(Error::InvalidParameter(m)) => usage(m),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_DOMAIN)
            }
        },
    }
}
