use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use semicp_harness::config::{ExperimentConfig, ExperimentKind, FileConfig, OutputFormat};
use semicp_harness::error::HarnessError;
use semicp_harness::{experiments, output};
use std::path::PathBuf;

/// Simulator and verification harness for the contact process with a
/// semi-infected state on the complete graph.
#[derive(Debug, Parser)]
#[command(name = "semicp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extinction-time sweep from full infection over (n, lambda) cells.
    Sweep(RunArgs),
    /// Sup-deviation of the scaled chain from the mean-field ODE.
    Meanfield(RunArgs),
    /// Order-violation audit of the two-chain couplings (both variants).
    #[command(name = "coupling-audit")]
    CouplingAudit(RunArgs),
    /// Reduced-chain law vs per-vertex simulation (n <= 8).
    Lumping(RunArgs),
    /// Auxiliary-chain checks: minorant growth, domination, envelope chain.
    Aux(RunArgs),
    /// Integrate the mean-field ODE from full infection and emit the path.
    Ode(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Sweep(_) => ExperimentKind::Sweep,
            Command::Meanfield(_) => ExperimentKind::MeanField,
            Command::CouplingAudit(_) => ExperimentKind::CouplingAudit,
            Command::Lumping(_) => ExperimentKind::Lumping,
            Command::Aux(_) => ExperimentKind::Aux,
            Command::Ode(_) => ExperimentKind::Ode,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Sweep(a)
            | Command::Meanfield(a)
            | Command::CouplingAudit(a)
            | Command::Lumping(a)
            | Command::Aux(a)
            | Command::Ode(a) => a,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Population sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Infection rates (comma separated).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Envelope-chain parameter in (0, 1]; aux checks default to 1.
    #[arg(long)]
    theta: Option<f64>,
    /// Replicas per parameter cell.
    #[arg(long)]
    replicas: Option<u64>,
    /// Time horizon (kind-specific default).
    #[arg(long)]
    horizon: Option<f64>,
    /// Master seed; falls back to SEMICP_SEED, then a built-in constant.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// TOML config file mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn resolve_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut config = ExperimentConfig::new(kind);
    if let Some(path) = &args.config {
        FileConfig::load(path)?.apply(&mut config)?;
    }
    if let Some(n) = &args.n {
        config.n_list = n.clone();
    }
    if let Some(lambda) = &args.lambda {
        config.lambda_list = lambda.clone();
    }
    if let Some(theta) = args.theta {
        config.theta = Some(theta);
    }
    if let Some(replicas) = args.replicas {
        config.replicas = replicas;
    }
    if let Some(horizon) = args.horizon {
        config.horizon = horizon;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_path = Some(out.clone());
    }
    if let Some(format) = &args.format {
        config.format = OutputFormat::parse(format)?;
    }
    config.validate()?;
    Ok(config)
}

fn run(command: &Command) -> Result<(), HarnessError> {
    let config = resolve_config(command.kind(), command.args())?;
    let out = config.out_path.as_deref();
    match command.kind() {
        ExperimentKind::Sweep => {
            output::write_rows(&experiments::run_sweep(&config)?, config.format, out)
        }
        ExperimentKind::MeanField => {
            output::write_rows(&experiments::run_meanfield(&config)?, config.format, out)
        }
        ExperimentKind::CouplingAudit => {
            output::write_rows(&experiments::run_coupling_audit(&config)?, config.format, out)
        }
        ExperimentKind::Lumping => {
            output::write_rows(&experiments::run_lumping_check(&config)?, config.format, out)
        }
        ExperimentKind::Aux => {
            output::write_rows(&experiments::run_aux_checks(&config)?, config.format, out)
        }
        ExperimentKind::Ode => {
            output::write_rows(&experiments::run_ode(&config)?, config.format, out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
