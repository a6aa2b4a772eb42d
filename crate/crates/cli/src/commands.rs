//! The four subcommands: spectrum, ssl, model, wavelets. Each produces a
//! CSV table, deterministic for a fixed configuration and seed.

use std::io::Write;

use ndarray::Array1;

use digh_core::diffusion::{build, transform_condition_number, MultiResolutionMode};
use digh_core::error::{Error, Result};
use digh_core::filters::{
    label_accuracy, learn_signal_model, reconstruct_labels, MomentEstimate, PolynomialFilter,
    SamplingModel,
};
use digh_core::frame::{build_bank, FilterBankSpec};
use digh_core::graph::{largest_scc_subgraph, read_label_file, DirectedGraph};
use digh_core::spectral::decompose;
use digh_core::ssl::{evaluate_ssl, SslEvalConfig, SslMethod};
use digh_core::walk::Measure;

use crate::ops::{resolve_operator, resolve_walk, Ergodicize, OperatorSpec};

/// Floats are written with 17 significant digits so the CSV round-trips
/// losslessly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `index,re,im,omega` rows of the spectrum of one operator.
pub fn cmd_spectrum(
    g: &DirectedGraph,
    op: &OperatorSpec,
    lazy_gamma: Option<f64>,
    remedy: Option<Ergodicize>,
    use_largest_scc: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let reduced;
    let graph = if use_largest_scc {
        reduced = largest_scc_subgraph(g).0;
        &reduced
    } else {
        g
    };
    let resolved = resolve_operator(op, graph, lazy_gamma, remedy)?;
    let dec = decompose(&resolved.matrix)?;
    writeln!(out, "index,re,im,omega")?;
    for (i, (theta, omega)) in dec.eigvals().iter().zip(dec.frequencies()).enumerate() {
        writeln!(
            out,
            "{i},{},{},{}",
            fmt_float(theta.re),
            fmt_float(theta.im),
            fmt_float(*omega)
        )?;
    }
    Ok(())
}

/// Parses an SSL method list such as `l_norm,l_rw,r_m,l_norm_sym,l1_heat:2`.
pub fn parse_methods(spec: &str) -> Result<Vec<SslMethod>> {
    spec.split(',')
        .map(|name| match name {
            "l_norm" => Ok(SslMethod::NormalizedLaplacian),
            "l_rw" => Ok(SslMethod::RandomWalkLaplacian),
            "r_m" => Ok(SslMethod::Moura),
            "l_norm_sym" => Ok(SslMethod::NormalizedLaplacianSym),
            "l_rw_sym" => Ok(SslMethod::RandomWalkLaplacianSym),
            other => match other.strip_prefix("l1_heat:") {
                Some(j) => {
                    let n_scales = j.parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad scale count in `{other}`"))
                    })?;
                    Ok(SslMethod::L1HeatKernel { n_scales })
                }
                None => Err(Error::InvalidArgument(format!(
                    "unknown method `{other}`; use l_norm, l_rw, r_m, l_norm_sym, l_rw_sym or l1_heat:J"
                ))),
            },
        })
        .collect()
}

/// `method,p,mean_accuracy,std,best_param` rows over the method and
/// labeling-rate grid.
#[allow(clippy::too_many_arguments)]
pub fn cmd_ssl(
    g: &DirectedGraph,
    labels: &Array1<f64>,
    methods: &[SslMethod],
    p_values: &[f64],
    gamma_grid: &[f64],
    lambda_grid: &[f64],
    n_realizations: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    writeln!(out, "method,p,mean_accuracy,std,best_param")?;
    for method in methods {
        let grid = match method {
            SslMethod::L1HeatKernel { .. } => lambda_grid,
            _ => gamma_grid,
        };
        for &p in p_values {
            let config = SslEvalConfig {
                method: *method,
                known_fraction: p,
                n_realizations,
                param_grid: grid.to_vec(),
                seed,
            };
            let result = evaluate_ssl(g, labels, &config)?;
            writeln!(
                out,
                "{},{},{},{},{}",
                result.method,
                fmt_float(p),
                fmt_float(result.mean_accuracy),
                fmt_float(result.std_accuracy),
                fmt_float(result.mean_best_param)
            )?;
        }
    }
    Ok(())
}

/// How the signal-model experiment samples observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingKind {
    Uniform,
    Stationary,
}

/// `operator,p,mean_accuracy,std` rows: the closed-form filter is fitted
/// per (operator, p) and scored on fresh Bernoulli draws.
#[allow(clippy::too_many_arguments)]
pub fn cmd_model(
    g: &DirectedGraph,
    f0: &Array1<f64>,
    ops: &[OperatorSpec],
    p_values: &[f64],
    degree: usize,
    sampling_kind: SamplingKind,
    lazy_gamma: Option<f64>,
    remedy: Option<Ergodicize>,
    n_realizations: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    let n = g.n_vertices();
    if f0.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "signal length {} does not match {n} vertices",
            f0.len()
        )));
    }
    writeln!(out, "operator,p,mean_accuracy,std")?;
    let mu = Measure::counting(n);
    for op in ops {
        let resolved = resolve_operator(op, g, lazy_gamma, remedy)?;
        for &p in p_values {
            let sampling = match sampling_kind {
                SamplingKind::Uniform => SamplingModel::uniform(n, p, seed)?,
                SamplingKind::Stationary => {
                    let walk = match &resolved.walk {
                        Some(w) => w.clone(),
                        // w_norm carries no walk; the sampling distribution
                        // still comes from the graph's random walk.
                        None => resolve_walk(g, remedy)?,
                    };
                    SamplingModel::stationary(p, walk.stationary().view(), seed)?
                }
            };
            let model = learn_signal_model(
                &resolved.matrix,
                f0.view(),
                &sampling,
                degree,
                &mu,
                MomentEstimate::ClosedForm,
            )?;
            let filter =
                PolynomialFilter::new(model.theta.to_vec(), resolved.matrix.clone())?.dense();
            let mut accs = Vec::with_capacity(n_realizations);
            for r in 0..n_realizations {
                let y = sampling.draw(f0.view(), r as u64);
                let rec = reconstruct_labels(&filter, y.view());
                accs.push(label_accuracy(rec.view(), f0.view()));
            }
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64;
            writeln!(
                out,
                "{},{},{},{}",
                op.name,
                fmt_float(p),
                fmt_float(mean),
                fmt_float(var.sqrt())
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletKind {
    /// Redundant frame atoms from the spectral filter bank.
    Frame,
    /// Critically sampled diffusion-wavelet bases.
    Diffusion,
}

/// Long-format CSV `record,mode,scale,function,position,value` holding
/// per-scale dimensions, condition numbers and atom vectors.
#[allow(clippy::too_many_arguments)]
pub fn cmd_wavelets(
    g: &DirectedGraph,
    kind: WaveletKind,
    op: &OperatorSpec,
    lazy_gamma: Option<f64>,
    remedy: Option<Ergodicize>,
    n_scales: usize,
    eps_orthogonal: f64,
    eps_biorthogonal: f64,
    vertex: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    let resolved = resolve_operator(op, g, lazy_gamma, remedy)?;
    writeln!(out, "record,mode,scale,function,position,value")?;
    match kind {
        WaveletKind::Frame => {
            let dec = decompose(&resolved.matrix)?;
            let spec = FilterBankSpec::default_dyadic(n_scales)?;
            let bank = build_bank(dec.groups(), &spec)?;
            writeln!(
                out,
                "frame_lower,frame,0,0,0,{}",
                fmt_float(bank.frame_lower)
            )?;
            writeln!(
                out,
                "frame_upper,frame,0,0,0,{}",
                fmt_float(bank.frame_upper)
            )?;
            let vertices: Vec<usize> = match vertex {
                Some(v) if v < g.n_vertices() => vec![v],
                Some(v) => {
                    return Err(Error::InvalidArgument(format!(
                        "vertex {v} outside 0..{}",
                        g.n_vertices()
                    )))
                }
                None => (0..g.n_vertices()).collect(),
            };
            for (band, _) in bank.synthesis.iter().enumerate() {
                // Band 0 is the low-pass at the coarsest dilation.
                let scale = if band == 0 {
                    spec.coarsest_scale()
                } else {
                    spec.scales()[band - 1]
                };
                let record = if band == 0 {
                    "scaling_atom"
                } else {
                    "wavelet_atom"
                };
                for &v in &vertices {
                    let atom = bank.atom(band, v);
                    for (pos, value) in atom.iter().enumerate() {
                        writeln!(
                            out,
                            "{record},frame,{scale},{v},{pos},{}",
                            fmt_float(*value)
                        )?;
                    }
                }
            }
        }
        WaveletKind::Diffusion => {
            for (mode, eps) in [
                (MultiResolutionMode::Orthogonal, eps_orthogonal),
                (MultiResolutionMode::Biorthogonal, eps_biorthogonal),
            ] {
                let mode_name = match mode {
                    MultiResolutionMode::Orthogonal => "orthogonal",
                    MultiResolutionMode::Biorthogonal => "biorthogonal",
                };
                let mr = build(&resolved.matrix, n_scales, eps, mode)?;
                let kappa = transform_condition_number(&mr)?;
                writeln!(out, "kappa,{mode_name},0,0,0,{}", fmt_float(kappa))?;
                for (j, dim) in mr.dims().iter().enumerate() {
                    writeln!(
                        out,
                        "dim,{mode_name},{},0,0,{}",
                        j + 1,
                        fmt_float(*dim as f64)
                    )?;
                }
                for scale in 1..=mr.n_scales() {
                    let phi = mr.scaling_basis_in_v0(scale);
                    for f in 0..phi.ncols() {
                        for (pos, value) in phi.column(f).iter().enumerate() {
                            writeln!(
                                out,
                                "scaling_atom,{mode_name},{scale},{f},{pos},{}",
                                fmt_float(*value)
                            )?;
                        }
                    }
                    let psi = mr.wavelet_basis(scale);
                    for f in 0..psi.ncols() {
                        for (pos, value) in psi.column(f).iter().enumerate() {
                            writeln!(
                                out,
                                "wavelet_atom,{mode_name},{scale},{f},{pos},{}",
                                fmt_float(*value)
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Synthetic two-block labels for generated graphs without a label file.
pub fn two_block_labels(n: usize) -> Array1<f64> {
    Array1::from_iter((0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }))
}

/// Loads labels from a file, or falls back to the synthetic two-block
/// field on generated graphs.
pub fn resolve_labels(
    labels_path: Option<&str>,
    g: &DirectedGraph,
    generated: bool,
) -> Result<Array1<f64>> {
    match labels_path {
        Some(path) => read_label_file(path, g.n_vertices()),
        None if generated => Ok(two_block_labels(g.n_vertices())),
        None => Err(Error::InvalidArgument(
            "--labels FILE is required for graphs loaded from files".into(),
        )),
    }
}

/// Drops vertices outside the largest strongly connected component and
/// restricts the label vector accordingly.
pub fn restrict_to_largest_scc(
    g: &DirectedGraph,
    labels: &Array1<f64>,
) -> (DirectedGraph, Array1<f64>) {
    let (sub, mapping) = largest_scc_subgraph(g);
    let sub_labels = Array1::from_iter(mapping.iter().map(|&old| labels[old]));
    (sub, sub_labels)
}
