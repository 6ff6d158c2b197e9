use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use offset_cate::experiments::{
    collapsibility_csv, collapsibility_svg, contours_csv, example1_svg, parse_config, rows_csv,
    run_collapsibility_table, run_correlated_sweep, run_covariate_sweep, run_example1, sweep_svg,
    RunSummary, SweepSpec,
};

/// Exact-distribution experiments for treatment offset models.
#[derive(Parser)]
#[command(name = "offset-cate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Covariate-free mechanism: randomized, observational and offset fits plus likelihood surfaces.
    Example1(Common),
    /// PEHE of every method over the odds-ratio and covariate-effect grid.
    Sweep(Common),
    /// The sweep with covariate and confounder coupled through `alpha`.
    Correlated(Common),
    /// Conditional versus marginal odds-ratios for the two reference settings.
    Collapsibility(Common),
}

#[derive(Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// `key = value` settings applied over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

impl Common {
    fn spec(&self) -> Result<SweepSpec> {
        match &self.config {
            None => Ok(SweepSpec::default()),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text).with_context(|| format!("in {}", path.display()))
            }
        }
    }

    fn svg(&self) -> bool {
        self.format == Format::CsvSvg
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn report(summary: &RunSummary) -> ExitCode {
    eprintln!(
        "{} rows, {} did not converge",
        summary.rows, summary.non_converged
    );
    for f in &summary.failures {
        eprintln!("  {f}");
    }
    if summary.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (Command::Example1(common)
    | Command::Sweep(common)
    | Command::Correlated(common)
    | Command::Collapsibility(common)) = &cli.command;
    let spec = common.spec()?;
    let jobs = usize::from(common.jobs);
    let out = &common.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let summary = match &cli.command {
        Command::Example1(_) => {
            let result = run_example1(&spec, jobs)?;
            write(out, "example1.csv", &rows_csv(&result.rows))?;
            write(
                out,
                "example1_contours.csv",
                &contours_csv(&result.contours),
            )?;
            if common.svg() {
                write(out, "example1.svg", &example1_svg(&result))?;
            }
            RunSummary::from_rows(&result.rows)
        }
        Command::Sweep(_) | Command::Correlated(_) => {
            let (name, rows) = if matches!(cli.command, Command::Sweep(_)) {
                ("sweep", run_covariate_sweep(&spec, jobs)?)
            } else {
                ("correlated", run_correlated_sweep(&spec, jobs)?)
            };
            write(out, &format!("{name}.csv"), &rows_csv(&rows))?;
            if common.svg() {
                write(out, &format!("{name}.svg"), &sweep_svg(&rows))?;
            }
            RunSummary::from_rows(&rows)
        }
        Command::Collapsibility(_) => {
            let table = run_collapsibility_table()?;
            write(out, "collapsibility.csv", &collapsibility_csv(&table))?;
            if common.svg() {
                write(out, "collapsibility.svg", &collapsibility_svg(&table))?;
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    Ok(report(&summary))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
