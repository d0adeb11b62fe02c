//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::harness::config::{parse_config, ConfigFile, Method, PolicyChoice, PotentialKind, SolverChoice};
use crate::harness::table::{write_atomic, Format};
use crate::harness::{self, HarnessError, PlotOptions, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "semiquant", version, about = "Semiclassical and exact bound-state spectra of central potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies from one method
    Spectrum(CommonArgs),
    /// Exact energies beside shifted semiclassical ones
    Compare(CommonArgs),
    /// Yukawa critical angular momenta and radial number
    Critical(CommonArgs),
    /// Number of states per level
    Count(CommonArgs),
    /// Effective-potential curves and spectrum-versus-n series
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub potential: Option<PotentialKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyChoice>,
    #[arg(long, conflicts_with = "all_bound")]
    pub nmax: Option<u32>,
    #[arg(long)]
    pub all_bound: bool,
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// TOML file with the same keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Angular momenta for the effective-potential curves (repeatable)
    #[arg(long)]
    pub ptheta: Vec<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
}

impl CommonArgs {
    fn as_config(&self) -> ConfigFile {
        ConfigFile {
            potential: self.potential,
            lambda: self.lambda,
            method: self.method,
            solver: self.solver,
            policy: self.policy,
            nmax: self.nmax,
            all_bound: self.all_bound.then_some(true),
            dim: self.dim,
            format: self.format,
            output: self.output.clone(),
            settings: Default::default(),
        }
    }

    /// Config file overlaid by flags, validated.
    pub fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
                parse_config(&text)?
            }
            None => ConfigFile::default(),
        };
        RunConfig::from_file(&base.overlay(self.as_config()))
    }
}

fn deliver(text: &str, output: Option<&Path>) -> Result<(), HarnessError> {
    match output {
        Some(path) => write_atomic(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| HarnessError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

/// Execute a parsed command.
pub fn execute(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Spectrum(a) | Command::Compare(a) | Command::Critical(a) | Command::Count(a) => {
            let cfg = a.resolve()?;
            let report = match &cli.command {
                Command::Spectrum(_) => harness::spectrum(&cfg)?,
                Command::Compare(_) => harness::compare(&cfg)?.report(),
                Command::Critical(_) => harness::critical(&cfg)?,
                Command::Count(_) => harness::count(&cfg)?,
                Command::Plotdata(_) => unreachable!(),
            };
            deliver(&report.render(cfg.format)?, cfg.output.as_deref())
        }
        Command::Plotdata(p) => {
            let cfg = p.common.resolve()?;
            let opts = PlotOptions { ptheta: p.ptheta.clone(), rho_max: p.rho_max, points: p.points };
            let series = harness::plot_series(&cfg, &opts)?;
            match cfg.format {
                Format::Json => {
                    let mut text = serde_json::to_string_pretty(&series).map_err(|e| HarnessError::Parse(e.to_string()))?;
                    text.push('\n');
                    deliver(&text, cfg.output.as_deref())
                }
                Format::Csv => match &cfg.output {
                    // one file per series inside the output directory
                    Some(dir) => {
                        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
                        for s in &series {
                            write_atomic(&dir.join(format!("{}.csv", s.file_stem())), &s.to_csv())?;
                        }
                        Ok(())
                    }
                    None => {
                        let text = series.iter().map(|s| s.to_csv()).collect::<Vec<_>>().join("\n");
                        deliver(&text, None)
                    }
                },
            }
        }
    }
}

/// Parse `args` and run; returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("semiquant: {e}");
            e.exit_code()
        }
    }
}
