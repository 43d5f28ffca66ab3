use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use distsel::criteria::AiccMode;
use distsel::fit::FitConfig;
use distsel::gof::{Binning, GofConfig, PValueMode};
use distsel::ingest::CsvFormat;
use distsel::report::{run_pipeline, RunConfig};
use distsel::select::{Criterion, SelectConfig};
use distsel::Error;

#[derive(Parser)]
#[command(name = "distsel", version, about = "Fit and rank probability distributions for station precipitation series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit all families to every station in a CSV file and write reports.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Long,
    Wide,
}

#[derive(Clone, Copy, ValueEnum)]
enum PModeArg {
    Asymptotic,
    Bootstrap,
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "long")]
    format: FormatArg,
    /// Chi-square bins before merging.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Comma-separated criteria summed into the cumulative rank.
    #[arg(long, default_value = "ks,ad,chi2,aicc,bic")]
    criteria: String,
    /// Drop the 2K term from AICc.
    #[arg(long)]
    aicc_paper_literal: bool,
    #[arg(long, value_enum, default_value = "asymptotic")]
    pvalue_mode: PModeArg,
    /// Bootstrap replicates; implies --pvalue-mode bootstrap.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "distsel-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Fix loc = 0 for positive-support families.
    #[arg(long)]
    raw_support: bool,
    /// Equal-width chi-square bins over the sample range.
    #[arg(long)]
    equal_width_bins: bool,
    /// Rank chi-square by statistic per degree of freedom.
    #[arg(long)]
    chi2_rank_by_statistic: bool,
    /// Apply Stephens' sample-size adjustment to A^2 where defined.
    #[arg(long)]
    stephens: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        if self.bins < 2 {
            return Err(Error::InvalidConfig("--bins must be at least 2".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("--tol must be positive".into()));
        }
        let defaults = GofConfig::default();
        let pvalue_mode = match (self.pvalue_mode, self.bootstrap) {
            (_, Some(_)) | (PModeArg::Bootstrap, None) => PValueMode::Bootstrap,
            (PModeArg::Asymptotic, None) => PValueMode::Asymptotic,
        };
        if self.bootstrap == Some(0) {
            return Err(Error::InvalidConfig("--bootstrap must be at least 1".into()));
        }
        Ok(RunConfig {
            format: match self.format {
                FormatArg::Long => CsvFormat::Long,
                FormatArg::Wide => CsvFormat::Wide,
            },
            fit: FitConfig {
                max_iter: self.max_iter,
                tol: self.tol,
                raw_support: self.raw_support,
                seed: self.seed,
            },
            gof: GofConfig {
                bins: self.bins,
                binning: if self.equal_width_bins {
                    Binning::EqualWidth
                } else {
                    Binning::EqualProbability
                },
                pvalue_mode,
                bootstrap: self.bootstrap.unwrap_or(defaults.bootstrap),
                stephens: self.stephens,
                seed: self.seed,
            },
            select: SelectConfig {
                criteria: Criterion::parse_list(&self.criteria)?,
                chi2_by_statistic: self.chi2_rank_by_statistic,
            },
            aicc_mode: if self.aicc_paper_literal {
                AiccMode::Literal
            } else {
                AiccMode::Standard
            },
            seed: self.seed,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let result = args
        .config()
        .and_then(|cfg| run_pipeline(&args.input, &args.out, &cfg));
    match result {
        Ok(report) => {
            for s in &report.stations {
                println!("{}\t{}", s.station, s.selection.winner);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut summary = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
            });
            match &e {
                Error::InFit { station, family, .. } => {
                    summary["station"] = station.as_str().into();
                    summary["family"] = family.name().into();
                }
                Error::InStation { station, .. } => summary["station"] = station.as_str().into(),
                _ => {}
            }
            eprintln!("{summary}");
            ExitCode::FAILURE
        }
    }
}
