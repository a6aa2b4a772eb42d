//! `digh` — harmonic analysis on strongly connected directed graphs from
//! the command line: spectra, semi-supervised learning experiments,
//! polynomial-filter signal models and wavelet exports, all as CSV.

mod commands;
mod ops;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use digh_core::diffusion::{DEFAULT_EPS_BIORTHOGONAL, DEFAULT_EPS_ORTHOGONAL};
use digh_core::error::Error;
use digh_core::ssl::default_gamma_grid;

use commands::{SamplingKind, WaveletKind};
use ops::{parse_ergodicize, parse_operator, Ergodicize, OperatorSpec};

#[derive(Parser)]
#[command(
    name = "digh",
    about = "Random-walk harmonic analysis on directed graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: `src<TAB>dst<TAB>weight` lines, 0-based ids,
    /// weight optional, `#` comments ignored.
    #[arg(long, value_name = "FILE")]
    graph: Option<String>,
    /// Synthetic generator: cycle:N | torus:M,N | dws:N,K,BETA.
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct OperatorArgs {
    /// Operator selector: w_norm | p | p_bar | t | t_bar, with an optional
    /// _sym, _eps or _g suffix and an optional :alpha=A modifier.
    #[arg(long, default_value = "p")]
    op: String,
    /// Lazy-walk parameter applied to walk-based operators.
    #[arg(long, value_name = "GAMMA")]
    lazy: Option<f64>,
    /// Remedy for graphs that are not strongly connected:
    /// google:GAMMA | rank1:EPS.
    #[arg(long, value_name = "SPEC")]
    ergodicize: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and frequencies of a walk operator as
    /// `index,re,im,omega`.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        operator: OperatorArgs,
        /// Restrict to the largest strongly connected subgraph first.
        #[arg(long)]
        largest_scc: bool,
    },
    /// Semi-supervised learning accuracies as
    /// `method,p,mean_accuracy,std,best_param`.
    Ssl {
        #[command(flatten)]
        graph: GraphArgs,
        /// Label file `vertex<TAB>label` with labels in {-1, +1}; generated
        /// graphs default to a two-block labeling.
        #[arg(long, value_name = "FILE")]
        labels: Option<String>,
        /// Comma-separated methods:
        /// l_norm,l_rw,r_m,l_norm_sym,l_rw_sym,l1_heat:J.
        #[arg(long, default_value = "l_norm,l_rw,r_m")]
        methods: String,
        /// Labeled fractions to evaluate.
        #[arg(long = "p", value_name = "P", num_args = 1.., value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2])]
        p_values: Vec<f64>,
        /// Regularization grid for the l2 methods (defaults to 0 plus 21
        /// log-spaced points in (1e-3, 10]).
        #[arg(long = "gamma-grid", value_name = "G", num_args = 1.., value_delimiter = ',')]
        gamma_grid: Option<Vec<f64>>,
        /// Penalty grid for the l1 method.
        #[arg(long = "lambda", value_name = "L", num_args = 1.., value_delimiter = ',', default_values_t = vec![0.01, 0.1, 1.0, 10.0])]
        lambda_grid: Vec<f64>,
        /// Monte Carlo realizations per (method, p).
        #[arg(long, default_value_t = 100)]
        realizations: usize,
        /// Restrict to the largest strongly connected subgraph first.
        #[arg(long)]
        largest_scc: bool,
    },
    /// Signal-model reconstruction accuracies as
    /// `operator,p,mean_accuracy,std`.
    Model {
        #[command(flatten)]
        graph: GraphArgs,
        /// Label file for the target signal; generated graphs default to a
        /// two-block labeling.
        #[arg(long, value_name = "FILE")]
        labels: Option<String>,
        /// Comma-separated operator selectors.
        #[arg(long = "ops", default_value = "p,p_bar,w_norm", value_delimiter = ',')]
        ops: Vec<String>,
        /// Lazy-walk parameter applied to walk-based operators.
        #[arg(long, value_name = "GAMMA")]
        lazy: Option<f64>,
        /// Remedy for graphs that are not strongly connected.
        #[arg(long, value_name = "SPEC")]
        ergodicize: Option<String>,
        /// Observed fractions to evaluate.
        #[arg(long = "p", value_name = "P", num_args = 1.., value_delimiter = ',', default_values_t = vec![0.1, 0.3, 0.5])]
        p_values: Vec<f64>,
        /// Polynomial filter degree.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Sampling distribution of the observed entries.
        #[arg(long, value_parser = ["uniform", "stationary"], default_value = "uniform")]
        sampling: String,
        /// Monte Carlo realizations per (operator, p).
        #[arg(long, default_value_t = 100)]
        realizations: usize,
    },
    /// Wavelet atoms and summaries as
    /// `record,mode,scale,function,position,value`.
    Wavelets {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        operator: OperatorArgs,
        /// frame (redundant spectral bank) or diffusion (critically
        /// sampled).
        #[arg(long, value_parser = ["frame", "diffusion"], default_value = "diffusion")]
        kind: String,
        /// Number of scales J.
        #[arg(long, default_value_t = 4)]
        scales: usize,
        /// Column-selection threshold for the orthogonal construction.
        #[arg(long, default_value_t = DEFAULT_EPS_ORTHOGONAL)]
        eps: f64,
        /// Column-selection threshold for the biorthogonal construction.
        #[arg(long, default_value_t = DEFAULT_EPS_BIORTHOGONAL)]
        eps_biorthogonal: f64,
        /// Emit frame atoms for this vertex only (all vertices otherwise).
        #[arg(long)]
        vertex: Option<usize>,
    },
}

fn main() -> ExitCode {
    // DIGH_THREADS caps the rayon pool used by the Monte Carlo loops.
    if let Ok(threads) = std::env::var("DIGH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for input/validation problems, 3 for numerical failures.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_)
        | Error::DanglingNode { .. }
        | Error::NotStronglyConnected { .. }
        | Error::ShapeMismatch(_)
        | Error::Parse { .. }
        | Error::Io(_) => 2,
        Error::Convergence { .. }
        | Error::DegenerateStationary { .. }
        | Error::NonDiagonalizable { .. }
        | Error::NoConjugatePair
        | Error::ImaginaryResidual { .. }
        | Error::SingularModel(_)
        | Error::Solver(_)
        | Error::EmptyBasis { .. }
        | Error::SingularTransform
        | Error::DesignInvalid(_)
        | Error::Linalg(_) => 3,
    }
}

fn run(cli: Cli) -> digh_core::Result<()> {
    match cli.command {
        Command::Spectrum {
            graph,
            operator,
            largest_scc,
        } => {
            let (g, _) = ops::load_graph(graph.graph.as_deref(), graph.gen.as_deref(), graph.seed)?;
            let (op, remedy) = parse_operator_args(&operator)?;
            with_output(&graph.out, |out| {
                commands::cmd_spectrum(&g, &op, operator.lazy, remedy, largest_scc, out)
            })
        }
        Command::Ssl {
            graph,
            labels,
            methods,
            p_values,
            gamma_grid,
            lambda_grid,
            realizations,
            largest_scc,
        } => {
            let (g, generated) =
                ops::load_graph(graph.graph.as_deref(), graph.gen.as_deref(), graph.seed)?;
            let label_vec = commands::resolve_labels(labels.as_deref(), &g, generated)?;
            let (g, label_vec) = if largest_scc {
                commands::restrict_to_largest_scc(&g, &label_vec)
            } else {
                (g, label_vec)
            };
            let methods = commands::parse_methods(&methods)?;
            let gamma_grid = gamma_grid.unwrap_or_else(default_gamma_grid);
            with_output(&graph.out, |out| {
                commands::cmd_ssl(
                    &g,
                    &label_vec,
                    &methods,
                    &p_values,
                    &gamma_grid,
                    &lambda_grid,
                    realizations,
                    graph.seed,
                    out,
                )
            })
        }
        Command::Model {
            graph,
            labels,
            ops: op_specs,
            lazy,
            ergodicize,
            p_values,
            k,
            sampling,
            realizations,
        } => {
            let (g, generated) =
                ops::load_graph(graph.graph.as_deref(), graph.gen.as_deref(), graph.seed)?;
            let f0 = commands::resolve_labels(labels.as_deref(), &g, generated)?;
            if f0.iter().any(|l| *l == 0.0) {
                return Err(Error::InvalidArgument(
                    "the signal model needs a fully labeled ground truth".into(),
                ));
            }
            let parsed: digh_core::Result<Vec<OperatorSpec>> =
                op_specs.iter().map(|s| parse_operator(s)).collect();
            let parsed = parsed?;
            let remedy = ergodicize.as_deref().map(parse_ergodicize).transpose()?;
            let sampling_kind = match sampling.as_str() {
                "stationary" => SamplingKind::Stationary,
                _ => SamplingKind::Uniform,
            };
            with_output(&graph.out, |out| {
                commands::cmd_model(
                    &g,
                    &f0,
                    &parsed,
                    &p_values,
                    k,
                    sampling_kind,
                    lazy,
                    remedy,
                    realizations,
                    graph.seed,
                    out,
                )
            })
        }
        Command::Wavelets {
            graph,
            operator,
            kind,
            scales,
            eps,
            eps_biorthogonal,
            vertex,
        } => {
            let (g, _) = ops::load_graph(graph.graph.as_deref(), graph.gen.as_deref(), graph.seed)?;
            let (op, remedy) = parse_operator_args(&operator)?;
            let kind = match kind.as_str() {
                "frame" => WaveletKind::Frame,
                _ => WaveletKind::Diffusion,
            };
            with_output(&graph.out, |out| {
                commands::cmd_wavelets(
                    &g,
                    kind,
                    &op,
                    operator.lazy,
                    remedy,
                    scales,
                    eps,
                    eps_biorthogonal,
                    vertex,
                    out,
                )
            })
        }
    }
}

fn parse_operator_args(
    args: &OperatorArgs,
) -> digh_core::Result<(OperatorSpec, Option<Ergodicize>)> {
    let op = parse_operator(&args.op)?;
    let remedy = args
        .ergodicize
        .as_deref()
        .map(parse_ergodicize)
        .transpose()?;
    Ok((op, remedy))
}

fn with_output(
    path: &Option<String>,
    write: impl FnOnce(&mut dyn Write) -> digh_core::Result<()>,
) -> digh_core::Result<()> {
    match path {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write(&mut out)?;
            out.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            write(&mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}
