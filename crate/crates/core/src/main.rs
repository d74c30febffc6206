use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curvelab::error::Error;
use curvelab::report::{self, corpus, parse_param_value, Command, CurveSource, RunConfig, Status, VerificationReport};

/// Verification harness for affine arclength estimates on polynomial curves.
#[derive(Parser)]
#[command(name = "curvelab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Split a curve's parameter line into torsion-comparable pieces.
    Decompose(RunArgs),
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Bands(Bands),
    #[command(subcommand)]
    Tower(Tower),
    #[command(subcommand)]
    Operator(Operator),
    #[command(subcommand)]
    Corpus(Corpus),
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum Verify {
    /// Nested-integral Jacobian identity, plus exact checks on moment curves.
    Identity(RunArgs),
    /// Power-determinant factorization over all small exponent lists.
    Vandermonde(RunArgs),
    /// L1 log-derivative bound on each normalized leaf.
    DerivativeBounds(RunArgs),
    /// Sampled geometric inequality on each leaf.
    Geometric(RunArgs),
    /// Conditional Jacobian lower bound on tower-generated tuples.
    Lbj(RunArgs),
}

#[derive(Subcommand)]
enum Bands {
    /// Build and classify bands for one point configuration.
    Build(RunArgs),
    /// Band invariants on random and two-scale configurations.
    Verify(RunArgs),
}

#[derive(Subcommand)]
enum Tower {
    /// Build a tuple tower over the standard sets.
    Build(RunArgs),
}

#[derive(Subcommand)]
enum Operator {
    /// Restricted weak-type ratio for a pair of sets.
    Ratio(RunArgs),
    /// Knapp-example ratios across dyadic scales.
    SweepKnapp {
        #[command(flatten)]
        run: RunArgs,
        /// Smallest moment-curve dimension; overrides the configured curve.
        #[arg(long)]
        dmin: Option<usize>,
        #[arg(long)]
        dmax: Option<usize>,
    },
    /// Mass lower bound for tuples ending in the second set.
    CheckMle(RunArgs),
    /// Mass lower bound for tuples ending in the first set.
    CheckMlf(RunArgs),
}

#[derive(Subcommand)]
enum Corpus {
    /// List corpus curves.
    List {
        /// Seed of the listed random curve.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Extract one table of a report as CSV.
    EmitPlot {
        #[arg(long)]
        report: PathBuf,
        /// Table name, e.g. `knapp.d2.endpoint`.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus curve name; overrides the configured curve.
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Parameter interval as `lo,hi`; rationals and `inf` accepted.
    #[arg(long)]
    interval: Option<String>,
    /// Command parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the per-check summary on stderr.
    #[arg(long)]
    quiet: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?;
                RunConfig::from_toml_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(c) = &self.curve {
            cfg.curve = Some(CurveSource::Corpus(c.clone()));
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(n) = self.samples {
            cfg.samples = Some(n);
        }
        if let Some(iv) = &self.interval {
            let (lo, hi) =
                iv.split_once(',').ok_or_else(|| Error::config("--interval", format!("expected `lo,hi`, got {iv:?}")))?;
            cfg.interval = Some([lo.trim().to_string(), hi.trim().to_string()]);
        }
        for p in &self.params {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::config("--param", format!("expected key=value, got {p:?}")))?;
            cfg.params.insert(k.trim().to_string(), parse_param_value(v.trim()));
        }
        Ok(cfg)
    }
}

fn config_error(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn execute(cmd: Command, args: &RunArgs, extra: &[(&str, Option<usize>)]) -> ExitCode {
    let mut cfg = match args.config() {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    for (k, v) in extra {
        if let Some(v) = v {
            cfg.params.insert(k.to_string(), toml::Value::Integer(*v as i64));
        }
    }
    let rep = match report::run(cmd, &cfg) {
        Ok(r) => r,
        Err(e @ Error::Config { .. }) => return config_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match rep.emit() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &args.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if !args.quiet {
        eprint!("{}", rep.summary());
    }
    finish(&rep)
}

fn finish(rep: &VerificationReport) -> ExitCode {
    if rep.status() == Status::Fail {
        for c in rep.failures() {
            eprintln!("failed check: {}", c.name);
        }
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn emit_plot(report_path: &PathBuf, sweep: &str, out: Option<&PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(report_path) {
        Ok(t) => t,
        Err(e) => return config_error(Error::config("--report", format!("{}: {e}", report_path.display()))),
    };
    let csv = match VerificationReport::parse(&text).and_then(|r| report::emit_plot_data(&r, sweep)) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, csv) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Top::Decompose(a) => execute(Command::Decompose, &a, &[]),
        Top::Verify(v) => match v {
            Verify::Identity(a) => execute(Command::VerifyIdentity, &a, &[]),
            Verify::Vandermonde(a) => execute(Command::VerifyVandermonde, &a, &[]),
            Verify::DerivativeBounds(a) => execute(Command::VerifyDerivativeBounds, &a, &[]),
            Verify::Geometric(a) => execute(Command::VerifyGeometric, &a, &[]),
            Verify::Lbj(a) => execute(Command::VerifyLbj, &a, &[]),
        },
        Top::Bands(Bands::Build(a)) => execute(Command::BandsBuild, &a, &[]),
        Top::Bands(Bands::Verify(a)) => execute(Command::BandsVerify, &a, &[]),
        Top::Tower(Tower::Build(a)) => execute(Command::TowerBuild, &a, &[]),
        Top::Operator(o) => match o {
            Operator::Ratio(a) => execute(Command::OperatorRatio, &a, &[]),
            Operator::SweepKnapp { run, dmin, dmax } => {
                execute(Command::OperatorSweepKnapp, &run, &[("dmin", dmin), ("dmax", dmax)])
            }
            Operator::CheckMle(a) => execute(Command::OperatorCheckMle, &a, &[]),
            Operator::CheckMlf(a) => execute(Command::OperatorCheckMlf, &a, &[]),
        },
        Top::Corpus(Corpus::List { seed }) => {
            let mut entries = match corpus::list() {
                Ok(e) => e,
                Err(e) => return config_error(e),
            };
            let name = format!("random-{seed}");
            entries.push(corpus::CorpusEntry {
                description: format!("random degree-{} curve in R^{}", corpus::RANDOM_DEGREE, corpus::RANDOM_DIM),
                curve: corpus::random_curve(seed),
                name,
            });
            println!("# corpus version {}", corpus::CORPUS_VERSION);
            for e in entries {
                println!("{}\td={}\tdeg={}\t{}", e.name, e.curve.dim(), e.curve.degree(), e.description);
            }
            ExitCode::SUCCESS
        }
        Top::Report(ReportCmd::EmitPlot { report, sweep, out }) => emit_plot(&report, &sweep, out.as_ref()),
    }
}
