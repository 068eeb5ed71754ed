use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diabatic::gatemodel::Axis;
use diabatic::synthesis::{GateName, PairHamiltonian};
use diabatic_cli::commands::{self, Failure, Outcome, ReferenceKind};
use diabatic_cli::config::{parse_grid, Format, RunConfig};
use diabatic_cli::OUT_DIR_ENV;

/// Gates from diabatic passages through a two-state avoided crossing.
///
/// Exit codes: 0 success, 1 threshold miss, 2 usage error, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "diabatic", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// key = value configuration file; unknown keys are rejected
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = OUT_DIR_ENV, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = clap::value_parser!(Format))]
    format: Option<Format>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Grid density as NVxNB
    #[arg(long, global = true, value_parser = parse_grid, value_name = "NVxNB")]
    grid: Option<(usize, usize)>,
    /// Largest acceptable gate error
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    V,
    B,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReferenceArg {
    Nominal,
    Target,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PairArg {
    AvoidedCrossing,
    Literal,
}

impl From<PairArg> for PairHamiltonian {
    fn from(p: PairArg) -> Self {
        match p {
            PairArg::AvoidedCrossing => PairHamiltonian::AvoidedCrossing,
            PairArg::Literal => PairHamiltonian::Literal,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transition probability and eta against v at fixed b
    SweepV {
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        v_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Half-passage p (and the other sweep columns) over a (v, b) grid
    SweepGrid {
        #[arg(long)]
        v_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        b_min: Option<f64>,
        #[arg(long)]
        b_max: Option<f64>,
    },
    /// Search (v, b) for a gate: not, z, t, hadamard, cnot, toffoli, y
    Synthesize {
        gate: String,
        #[arg(long, value_enum, default_value = "avoided-crossing")]
        pair_hamiltonian: PairArg,
    },
    /// Power-law fit of the gate error under a parameter error
    ErrorScaling {
        gate: String,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Operating point; defaults to the gate's known point
        #[arg(long, requires = "b")]
        v: Option<f64>,
        #[arg(long, requires = "v")]
        b: Option<f64>,
        #[arg(long, value_enum, default_value = "nominal")]
        reference: ReferenceArg,
    },
    /// Adiabatic-criterion quantities and Massey parameter
    Adiabaticity {
        #[arg(long)]
        v: f64,
        #[arg(long)]
        b: f64,
    },
    /// Gate error and fitted form at a given (v, b)
    Report {
        gate: String,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, value_enum, default_value = "avoided-crossing")]
        pair_hamiltonian: PairArg,
    },
    /// Product of passages, first listed acts first
    Compose {
        #[arg(required = true)]
        gates: Vec<String>,
        /// Target the product should match up to a global phase
        #[arg(long)]
        expect: Option<String>,
        /// Use each gate's known point instead of searching
        #[arg(long)]
        nominal: bool,
    },
}

fn build_config(common: &Common, command: &Command) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    if let Some(x) = common.rel_tol {
        cfg.rel_tol = x;
    }
    if let Some(x) = common.abs_tol {
        cfg.abs_tol = x;
    }
    if let Some((nv, nb)) = common.grid {
        cfg.nv = Some(nv);
        cfg.nb = Some(nb);
    }
    if let Some(x) = common.threshold {
        cfg.threshold = x;
    }
    if let Some(x) = common.threads {
        cfg.threads = x;
    }
    match *command {
        Command::SweepV { b, v_min, v_max, points } => {
            cfg.b = b.unwrap_or(cfg.b);
            cfg.v_min = v_min.unwrap_or(cfg.v_min);
            cfg.v_max = v_max.unwrap_or(cfg.v_max);
            cfg.nv = points.or(cfg.nv);
        }
        Command::SweepGrid { v_min, v_max, b_min, b_max } => {
            cfg.v_min = v_min.unwrap_or(cfg.v_min);
            cfg.v_max = v_max.unwrap_or(cfg.v_max);
            cfg.b_min = b_min.unwrap_or(cfg.b_min);
            cfg.b_max = b_max.unwrap_or(cfg.b_max);
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let cfg = build_config(&cli.common, &cli.command)?;
    if cfg.threads > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match cli.command {
        Command::SweepV { .. } => commands::sweep_v(&cfg),
        Command::SweepGrid { .. } => commands::sweep_grid(&cfg),
        Command::Synthesize { gate, pair_hamiltonian } => {
            commands::synthesize_gate(&cfg, &gate, pair_hamiltonian.into())
        }
        Command::ErrorScaling {
            gate,
            axis,
            v,
            b,
            reference,
        } => {
            let axis = match axis {
                AxisArg::V => Axis::V,
                AxisArg::B => Axis::B,
            };
            let reference = match reference {
                ReferenceArg::Nominal => ReferenceKind::Nominal,
                ReferenceArg::Target => ReferenceKind::Target,
            };
            commands::error_scaling_gate(&cfg, &gate, axis, v.zip(b), reference)
        }
        Command::Adiabaticity { v, b } => commands::adiabaticity_at(&cfg, v, b),
        Command::Report {
            gate,
            v,
            b,
            pair_hamiltonian,
        } => commands::report_gate(&cfg, &gate, v, b, pair_hamiltonian.into()),
        Command::Compose { gates, expect, nominal } => {
            let expect = expect
                .map(|e| e.parse::<GateName>())
                .transpose()
                .map_err(|e| Failure::Usage(e.into()))?;
            commands::compose_gates(&cfg, &gates, expect, nominal)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
