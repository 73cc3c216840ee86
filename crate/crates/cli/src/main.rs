use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use steklab::harness::{
    direct_sweep, emit, reproduce_table, run_experiment, ExperimentConfig, OutputFormat, ResultTable, Scale,
};
use steklab::{DomainKind, Error, SchemeKind};

/// Stekloff eigenvalue experiments on the square, L-shaped and slit domains.
#[derive(Parser, Debug)]
#[command(name = "steklab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the pencil on a single grid.
    Direct,
    /// Two-grid scheme with fine solves against the operator itself.
    Scheme1,
    /// Two-grid scheme with fine solves against the shifted Laplacian.
    Scheme2,
    /// Two-grid scheme followed by a local correction around the singular corner.
    Scheme3,
    /// Convergence orders from a sequence of direct solves.
    Rates {
        /// Grids of the sweep, coarsest first.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        grids: Vec<usize>,
    },
    /// Recompute a published table and compare value by value.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        table_id: u8,
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Compare LShape rows to 1e-5 instead of 5e-4.
        #[arg(long)]
        strict_tol: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Intervals per side for a direct solve (same as --coarse).
    #[arg(long, global = true)]
    subdiv: Option<usize>,
    #[arg(long, global = true)]
    coarse: Option<usize>,
    #[arg(long, global = true)]
    fine: Option<usize>,
    #[arg(long, global = true)]
    meso: Option<usize>,
    #[arg(long, global = true)]
    local_levels: Option<usize>,
    #[arg(long, global = true)]
    k: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_re: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_im: Option<f64>,
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Report a single eigenvalue (1-based).
    #[arg(long, global = true)]
    index: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    eig_tol: Option<f64>,
    #[arg(long, global = true)]
    pairing_threshold: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<String>,
}

impl Common {
    fn config(&self, scheme: SchemeKind) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("domain", self.domain.clone()),
            ("subdiv", self.subdiv.map(|v| v.to_string())),
            ("coarse", self.coarse.map(|v| v.to_string())),
            ("fine", self.fine.map(|v| v.to_string())),
            ("meso", self.meso.map(|v| v.to_string())),
            ("local_levels", self.local_levels.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("n_re", self.n_re.map(|v| v.to_string())),
            ("n_im", self.n_im.map(|v| v.to_string())),
            ("count", self.count.map(|v| v.to_string())),
            ("index", self.index.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("eig_tol", self.eig_tol.map(|v| v.to_string())),
            ("pairing_threshold", self.pairing_threshold.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                cfg.set(key, &value)?;
            }
        }
        cfg.scheme = scheme;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidArgument(_) | Error::Parse(_) => 2,
        Error::Convergence { .. } | Error::InsufficientSpectrum { .. } | Error::DegeneratePairing { .. } => 3,
        Error::Capacity(_) => 4,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let scheme = match cli.command {
        Command::Scheme1 => SchemeKind::TwoGrid1,
        Command::Scheme2 => SchemeKind::TwoGrid2,
        Command::Scheme3 => SchemeKind::Local3,
        _ => SchemeKind::Direct,
    };
    let cfg = cli.common.config(scheme)?;
    match &cli.command {
        Command::Direct | Command::Scheme1 | Command::Scheme2 | Command::Scheme3 => {
            let table = run_experiment(&cfg)?;
            write_table(&table, &cfg)?;
        }
        Command::Rates { grids } => {
            let index = cfg
                .index
                .unwrap_or(if cfg.domain == DomainKind::Square { 1 } else { 2 });
            let (values, report) = direct_sweep(cfg.domain, &cfg.coefficients()?, index, grids, &cfg.solver_options())?;
            let mut text = String::new();
            if cfg.format == OutputFormat::Json {
                let doc = serde_json::json!({ "domain": cfg.domain, "j": index, "grids": grids, "values": values, "report": report });
                text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
                text.push('\n');
            } else {
                text.push_str("h,lambda_re,lambda_im,order\n");
                for (i, (h, l)) in values.iter().enumerate() {
                    let order = i
                        .checked_sub(1)
                        .map(|k| format!("{:.4}", report.orders[k]))
                        .unwrap_or_default();
                    text.push_str(&format!("{h:e},{:.12},{:.12},{order}\n", l.re, l.im));
                }
                text.push_str(&format!(
                    "# reference {:.12}{:+.12}i, mean order {:.4}\n",
                    report.reference.re, report.reference.im, report.mean_order
                ));
            }
            write_text(&text, cfg.out.as_ref())?;
        }
        Command::Table {
            table_id,
            scale,
            strict_tol,
        } => {
            let report = reproduce_table(*table_id, scale.parse::<Scale>()?, *strict_tol, &cfg)?;
            print!("{}", report.render());
            if let Some(path) = &cfg.out {
                emit(&report.table, cfg.format, path)?;
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_table(table: &ResultTable, cfg: &ExperimentConfig) -> Result<(), Error> {
    match &cfg.out {
        Some(path) => emit(table, cfg.format, path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cfg.format, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn write_text(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
