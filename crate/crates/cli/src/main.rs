use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fourth_moment::config::{PipelineConfig, TransformMethod};
use fourth_moment::kernel::KernelConfig;
use fourth_moment::Error;

mod commands;
mod format;

/// Fourth moment of Dirichlet L-functions at the central point: experiments and checks.
#[derive(Parser, Debug)]
#[command(name = "fourth-moment", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "FOURTH_MOMENT_THREADS")]
    threads: Option<usize>,

    /// Write the artifact here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include wall-clock timings (makes output run-dependent)
    #[arg(long, global = true)]
    timings: bool,

    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct Tuning {
    /// Real part of the integration line for the kernel
    #[arg(long, global = true, default_value_t = 1.0)]
    abscissa: f64,

    /// Trapezoid step on the line
    #[arg(long, global = true, default_value_t = 0.05)]
    step: f64,

    /// Kernel accuracy target
    #[arg(long, global = true, default_value_t = 1e-14)]
    eps: f64,

    /// Pair sums run up to ab <= cutoff_factor * q
    #[arg(long, global = true, default_value_t = 16)]
    cutoff_factor: u64,

    #[arg(long, global = true, value_enum, default_value_t = Transform::Auto)]
    transform: Transform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Transform {
    Auto,
    Naive,
    Fast,
}

impl Tuning {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            kernel: KernelConfig {
                abscissa: self.abscissa,
                step: self.step,
                eps: self.eps,
                ..KernelConfig::default()
            },
            cutoff_factor: self.cutoff_factor,
            transform: match self.transform {
                Transform::Auto => TransformMethod::Auto,
                Transform::Naive => TransformMethod::Naive,
                Transform::Fast => TransformMethod::Fast,
            },
            ..PipelineConfig::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fourth moment over primitive characters mod q
    Moment {
        #[arg(long)]
        q: u64,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// One CSV row per modulus listed in FILE (whitespace or commas, `a..b` ranges, `#` comments)
    Scan {
        #[arg(long)]
        qlist: PathBuf,
    },
    /// A(chi), B(chi), C(chi) and L(1/2, chi) for one character
    Value {
        #[arg(long)]
        q: u64,
        /// Character index (mixed radix over the CRT factors)
        #[arg(long = "char")]
        index: u64,
    },
    /// Exact character-sum identities, central-value identity, diagonal identity, Gauss sums
    VerifyIdentities {
        #[arg(long, default_value_t = 60)]
        qmax: u64,
    },
    /// Monitored divisor-sum and counting bounds against frozen constants
    VerifyBounds {
        #[arg(long, default_value_t = 200)]
        qmax: u64,
    },
    /// W_0 and W_1 on a logarithmic grid, with the residue series where it applies
    KernelTable {
        #[arg(long, default_value_t = 1e-4)]
        xmin: f64,
        #[arg(long, default_value_t = 10.0)]
        xmax: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Single lemma-level computation with CSV diagnostics
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    Lemma3 {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        z1: u64,
        #[arg(long)]
        z2: u64,
    },
    Lemma4 {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        x: f64,
    },
    Lemma5 {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1e6)]
        x: f64,
    },
    Mterm {
        #[arg(long)]
        q: u64,
    },
}

/// What a command produced: the artifact and any failed checks.
pub struct Outcome {
    pub artifact: String,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroModulus
            | Error::OutOfRange(_)
            | Error::Config(_)
            | Error::NotCoprime { .. } => CliError::Usage(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

#[derive(Serialize)]
struct FailureList<'a> {
    status: &'a str,
    failures: &'a [String],
}

fn report(status: &str, failures: &[String]) {
    eprintln!(
        "{}",
        format::to_json_line(&FailureList { status, failures })
    );
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.tuning.config();
    match &cli.command {
        Command::Moment { q, csv, .. } => commands::moment(*q, *csv, cli.timings, &cfg),
        Command::Scan { qlist } => {
            let text = fs::read_to_string(qlist)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", qlist.display())))?;
            commands::scan(&commands::parse_qlist(&text)?, cli.timings, &cfg)
        }
        Command::Value { q, index } => commands::value(*q, *index, &cfg),
        Command::VerifyIdentities { qmax } => commands::verify_identities(*qmax, &cfg),
        Command::VerifyBounds { qmax } => commands::verify_bounds(*qmax, &cfg),
        Command::KernelTable { xmin, xmax, points } => {
            commands::kernel_table(*xmin, *xmax, *points, &cfg)
        }
        Command::Verify { which } => match which {
            VerifyCommand::Lemma3 { k, z1, z2 } => commands::verify_lemma3(*k, *z1, *z2),
            VerifyCommand::Lemma4 { q, x } => commands::verify_lemma4(*q, *x),
            VerifyCommand::Lemma5 { q, x } => commands::verify_lemma5(*q, *x),
            VerifyCommand::Mterm { q } => commands::verify_mterm(*q, &cfg),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            report("usage", &["--threads must be at least 1".to_string()]);
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            report("usage", &[msg]);
            return ExitCode::from(2);
        }
        Err(CliError::Compute(e)) => {
            report("error", &[e.to_string()]);
            return ExitCode::from(1);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let written = match &cli.out {
        Some(path) => fs::write(path, &outcome.artifact),
        None => {
            print!("{}", outcome.artifact);
            Ok(())
        }
    };
    if let Err(e) = written {
        report("error", &[format!("cannot write output: {e}")]);
        return ExitCode::from(1);
    }
    if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        report("fail", &outcome.failures);
        ExitCode::from(1)
    }
}
