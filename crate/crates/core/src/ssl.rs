//! Semi-supervised learning on directed graphs: the closed-form l2 solvers
//! (directed and symmetrized), the Moura-style adjacency regularizer, the
//! l1 synthesis-sparsity solver over a wavelet frame, and the evaluation
//! protocol with per-realization parameter selection.

use ndarray::{concatenate, Array1, Array2, Axis};
use ndarray_linalg::{Eigh, Solve, UPLO};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::FrameOperators;
use crate::graph::{symmetrize, DirectedGraph};
use crate::laplacian::{normalized_laplacian, random_walk_laplacian};
use crate::linalg::{max_abs, scale_rows, spectral_norm};
use crate::rng::stream_rng;
use crate::walk::{from_graph, Measure};

/// A partially labeled vertex set: entries of `labels` are -1 or +1 where
/// known and 0 where unknown, `gamma` is the regularization weight
/// `rho_2 / c`.
#[derive(Debug, Clone)]
pub struct LabelProblem {
    labels: Array1<f64>,
    gamma: f64,
}

impl LabelProblem {
    pub fn new(labels: Array1<f64>, gamma: f64) -> Result<Self> {
        if labels.iter().any(|l| *l != -1.0 && *l != 0.0 && *l != 1.0) {
            return Err(Error::InvalidArgument(
                "labels must be -1, 0 (unknown) or +1".into(),
            ));
        }
        Ok(Self { labels, gamma })
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Diagonal of the known-label mask `M_l`.
    pub fn mask(&self) -> Array1<f64> {
        self.labels.mapv(|l| f64::from(u8::from(l != 0.0)))
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| **l != 0.0).count()
    }
}

/// Which inner product the regularizer is self-adjoint in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SslSpace {
    /// Counting measure: `X` itself must be symmetric.
    Counting,
    /// Stationary measure: `Pi X` must be symmetric.
    Stationary,
}

fn sign_plus(v: Array1<f64>) -> Array1<f64> {
    v.mapv(|x| if x < 0.0 { -1.0 } else { 1.0 })
}

/// Closed-form l2 solver: `sign[(I + gamma X)^{-1} M_l y]`.
///
/// `X` must be positive semidefinite and self-adjoint in the inner product
/// named by `space` (checked for symmetry; `pi` required in the stationary
/// space).
pub fn ssl_l2(
    problem: &LabelProblem,
    regularizer: &Array2<f64>,
    space: SslSpace,
    pi: Option<&Measure>,
) -> Result<Array1<f64>> {
    Ok(sign_plus(ssl_l2_solution(problem, regularizer, space, pi)?))
}

/// The minimizer `(I + gamma X)^{-1} M_l y` before taking signs.
pub fn ssl_l2_solution(
    problem: &LabelProblem,
    regularizer: &Array2<f64>,
    space: SslSpace,
    pi: Option<&Measure>,
) -> Result<Array1<f64>> {
    let gamma = problem.gamma();
    if gamma < 0.0 {
        return Err(Error::Solver(format!(
            "regularization weight must be nonnegative, got {gamma}"
        )));
    }
    let scale = max_abs(regularizer.view()).max(1.0);
    match space {
        SslSpace::Counting => {
            let skew = max_abs((regularizer - &regularizer.t()).view());
            if skew > 1e-8 * scale {
                return Err(Error::Solver(format!(
                    "regularizer is not symmetric in l2(V) (residual {skew:.3e})"
                )));
            }
        }
        SslSpace::Stationary => {
            let pi = pi.ok_or_else(|| {
                Error::InvalidArgument("stationary space requires the stationary measure".into())
            })?;
            let weighted = scale_rows(pi.weights().view(), regularizer);
            let skew = max_abs((&weighted - &weighted.t()).view());
            if skew > 1e-8 * scale {
                return Err(Error::Solver(format!(
                    "regularizer is not self-adjoint in l2(V, pi) (residual {skew:.3e})"
                )));
            }
        }
    }

    let n = problem.labels().len();
    let mut system = regularizer * gamma;
    for i in 0..n {
        system[[i, i]] += 1.0;
    }
    let rhs = problem.labels().clone();
    system
        .solve(&rhs)
        .map_err(|e| Error::Solver(format!("l2 closed form solve failed: {e}")))
}

/// Normalized adjacency `W / sigma_max(W)` used by the Moura-style method.
pub fn normalized_adjacency(g: &DirectedGraph) -> Result<Array2<f64>> {
    let w = g.adjacency_matrix();
    let norm = spectral_norm(&w)?;
    if norm <= 0.0 {
        return Err(Error::InvalidArgument(
            "graph has no edges to normalize".into(),
        ));
    }
    Ok(w / norm)
}

/// Closed-form solver of the adjacency-regularized objective:
/// `sign[(M_l + gamma R_M)^{-1} M_l y]` with
/// `R_M = (I - W_norm)^T (I - W_norm)`. A `1e-12` jitter is added when the
/// system is singular (e.g. `gamma = 0` with unlabeled vertices).
pub fn ssl_l2_moura(problem: &LabelProblem, w_norm: &Array2<f64>) -> Result<Array1<f64>> {
    Ok(sign_plus(ssl_l2_moura_solution(problem, w_norm)?))
}

/// The minimizer `(M_l + gamma R_M)^{-1} M_l y` before taking signs.
pub fn ssl_l2_moura_solution(problem: &LabelProblem, w_norm: &Array2<f64>) -> Result<Array1<f64>> {
    let gamma = problem.gamma();
    if gamma < 0.0 {
        return Err(Error::Solver(format!(
            "regularization weight must be nonnegative, got {gamma}"
        )));
    }
    let n = problem.labels().len();
    let mut i_minus_w = -w_norm.clone();
    for i in 0..n {
        i_minus_w[[i, i]] += 1.0;
    }
    let r_m = i_minus_w.t().dot(&i_minus_w);

    let mask = problem.mask();
    let mut system = &r_m * gamma;
    for i in 0..n {
        system[[i, i]] += mask[i];
    }
    let rhs = problem.labels().clone();
    match system.solve(&rhs) {
        Ok(sol) if sol.iter().all(|v| v.is_finite()) => Ok(sol),
        _ => {
            for i in 0..n {
                system[[i, i]] += 1e-12;
            }
            system
                .solve(&rhs)
                .map_err(|e| Error::Solver(format!("Moura solve failed even with jitter: {e}")))
        }
    }
}

/// Outcome of the l1 solver.
#[derive(Debug, Clone)]
pub struct SslL1Solution {
    /// `sign(K w*)`.
    pub signs: Array1<f64>,
    /// The sparse synthesis coefficients `w*`.
    pub coefficients: Array1<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before the relative objective
    /// change dropped below tolerance; the best iterate is still returned.
    pub converged: bool,
}

/// l1-regularized synthesis solver: minimizes
/// `||y~ - X w||^2 + lambda ||w||_1` with `X = M_l K` over the stacked
/// synthesis operators, by monotone accelerated proximal gradient
/// (soft-thresholding with momentum restart on objective increase).
pub fn ssl_l1(
    problem: &LabelProblem,
    bank: &FrameOperators,
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SslL1Solution> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "l1 penalty must be nonnegative, got {lambda}"
        )));
    }
    let k = bank.synthesis_stack();
    let n = problem.labels().len();
    if k.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "bank is over {} vertices but problem has {n}",
            k.nrows()
        )));
    }
    let mask = problem.mask();
    let x = scale_rows(mask.view(), &k);
    let y_tilde = problem.labels().clone();

    // Lipschitz constant of the gradient of ||y - X w||^2.
    let lipschitz = 2.0 * spectral_norm(&x)?.powi(2);
    let step = if lipschitz > 0.0 {
        1.0 / lipschitz
    } else {
        1.0
    };

    let objective = |w: &Array1<f64>| {
        let r = &x.dot(w) - &y_tilde;
        r.dot(&r) + lambda * w.mapv(f64::abs).sum()
    };
    let prox_step = |point: &Array1<f64>| {
        let grad = x.t().dot(&(&x.dot(point) - &y_tilde)) * 2.0;
        let shifted = point - &(grad * step);
        shifted.mapv(|v| {
            let t = step * lambda;
            if v > t {
                v - t
            } else if v < -t {
                v + t
            } else {
                0.0
            }
        })
    };

    let width = k.ncols();
    let mut w = Array1::zeros(width);
    let mut momentum = w.clone();
    let mut t_acc = 1.0f64;
    let mut obj = objective(&w);
    let mut iterations = 0;
    let mut converged = false;
    for iter in 0..max_iter {
        iterations = iter + 1;
        let candidate = prox_step(&momentum);
        let cand_obj = objective(&candidate);
        let (next, next_obj) = if cand_obj <= obj + 1e-12 {
            (candidate, cand_obj)
        } else {
            // Momentum overshoot: fall back to a plain proximal step from
            // the current iterate, which cannot increase the objective.
            t_acc = 1.0;
            let fallback = prox_step(&w);
            let fb_obj = objective(&fallback);
            (fallback, fb_obj)
        };
        let t_next = (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt()) / 2.0;
        momentum = &next + &((&next - &w) * ((t_acc - 1.0) / t_next));
        let rel_change = (obj - next_obj).abs() / obj.abs().max(1.0);
        w = next;
        t_acc = t_next;
        obj = next_obj;
        if rel_change < tol {
            converged = true;
            break;
        }
    }

    let signs = sign_plus(bank.synthesis_stack().dot(&w));
    Ok(SslL1Solution {
        signs,
        coefficients: w,
        objective: obj,
        iterations,
        converged,
    })
}

/// Heat-kernel filter bank `H_j = exp(-L t_j)` over a symmetric PSD
/// Laplacian, with band-pass telescoping `G_1 = I - H_1`,
/// `G_j = H_{j-1} - H_j`, so the synthesis operators sum to the identity
/// exactly and unit analysis responses give perfect reconstruction.
pub fn heat_kernel_bank(laplacian: &Array2<f64>, scales: &[f64]) -> Result<FrameOperators> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) || scales[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "heat-kernel scales must be positive and strictly increasing".into(),
        ));
    }
    let skew = max_abs((laplacian - &laplacian.t()).view());
    if skew > 1e-10 * max_abs(laplacian.view()).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "heat-kernel construction requires a symmetric Laplacian (residual {skew:.3e})"
        )));
    }
    let n = laplacian.nrows();
    let (eigs, basis): (Array1<f64>, Array2<f64>) = laplacian.eigh(UPLO::Lower)?;
    let exponential = |t: f64| {
        let scaled = scale_rows(eigs.mapv(|l| (-l * t).exp()).view(), &basis.t().to_owned());
        basis.dot(&scaled)
    };

    let heats: Vec<Array2<f64>> = scales.iter().map(|&t| exponential(t)).collect();
    let mut synthesis = Vec::with_capacity(scales.len() + 1);
    synthesis.push(heats.last().expect("nonempty scales").clone());
    for (j, heat) in heats.iter().enumerate() {
        let band = if j == 0 {
            let mut g = -heat.clone();
            for i in 0..n {
                g[[i, i]] += 1.0;
            }
            g
        } else {
            &heats[j - 1] - heat
        };
        synthesis.push(band);
    }
    let analysis: Vec<Array2<f64>> = (0..synthesis.len()).map(|_| Array2::eye(n)).collect();

    let stack_views: Vec<_> = synthesis.iter().map(|m| m.view()).collect();
    let k_norm = spectral_norm(&concatenate(Axis(1), &stack_views).expect("consistent shapes"))?;
    let frame_upper = (synthesis.len() as f64).sqrt(); // ||stacked identities||_2
    Ok(FrameOperators {
        synthesis,
        analysis,
        frame_lower: 1.0 / (k_norm * k_norm),
        frame_upper: frame_upper * frame_upper,
    })
}

/// The semi-supervised methods compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SslMethod {
    /// l2 with the directed normalized Laplacian.
    NormalizedLaplacian,
    /// l2 with the directed random walk Laplacian in `l2(V, pi)`.
    RandomWalkLaplacian,
    /// l2 with the normalized adjacency regularizer `R_M`.
    Moura,
    /// l2 with the normalized Laplacian of the symmetrized graph.
    NormalizedLaplacianSym,
    /// l2 with the random walk Laplacian of the symmetrized graph.
    RandomWalkLaplacianSym,
    /// l1 synthesis sparsity over a heat-kernel wavelet bank with this many
    /// dyadic scales.
    L1HeatKernel { n_scales: usize },
}

impl SslMethod {
    pub fn name(&self) -> String {
        match self {
            Self::NormalizedLaplacian => "l_norm".into(),
            Self::RandomWalkLaplacian => "l_rw".into(),
            Self::Moura => "r_m".into(),
            Self::NormalizedLaplacianSym => "l_norm_sym".into(),
            Self::RandomWalkLaplacianSym => "l_rw_sym".into(),
            Self::L1HeatKernel { n_scales } => format!("l1_heat_j{n_scales}"),
        }
    }
}

/// Default parameter grid: zero plus 21 logarithmically spaced points in
/// `(1e-3, 10]`.
pub fn default_gamma_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi, count) = (1e-3f64, 10.0f64, 21);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        grid.push(lo * (hi / lo).powf(t));
    }
    grid
}

/// Configuration of one evaluation run.
#[derive(Debug, Clone)]
pub struct SslEvalConfig {
    pub method: SslMethod,
    /// Fraction of vertices whose labels are revealed.
    pub known_fraction: f64,
    pub n_realizations: usize,
    /// Candidate regularization weights (gamma for l2 methods, lambda for
    /// the l1 method); selected per realization on the known set.
    pub param_grid: Vec<f64>,
    pub seed: u64,
}

/// Aggregated accuracies of one method at one labeling rate.
#[derive(Debug, Clone)]
pub struct SslEvalResult {
    pub method: String,
    pub known_fraction: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_best_param: f64,
    /// Realizations whose sampled known set missed one of the two classes.
    pub degenerate_splits: usize,
}

enum MethodState {
    /// Factorizable closed form: the system matrix `I + gamma X` does not
    /// depend on the mask, so prediction is a single solve.
    Regularized {
        x: Array2<f64>,
    },
    Moura {
        w_norm: Array2<f64>,
    },
    L1 {
        bank: FrameOperators,
    },
}

/// Runs the evaluation protocol: for each realization, reveal
/// `ceil(p N)` labels sampled uniformly, pick the grid parameter on the
/// revealed labels, and score on the hidden set. Parameter selection uses
/// an internal holdout — fit on half of the revealed labels, pick the
/// parameter scoring best on the other half, then refit on all revealed
/// labels — since training accuracy itself is trivially maximal at zero
/// regularization. Realizations are independent and seeded per index, so
/// results do not depend on the execution order.
pub fn evaluate_ssl(
    graph: &DirectedGraph,
    labels: &Array1<f64>,
    config: &SslEvalConfig,
) -> Result<SslEvalResult> {
    let n = graph.n_vertices();
    if labels.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "label vector length {} does not match {n} vertices",
            labels.len()
        )));
    }
    if labels.iter().any(|l| *l != -1.0 && *l != 1.0) {
        return Err(Error::InvalidArgument(
            "evaluation needs a full ground truth labeling in {-1, +1}".into(),
        ));
    }
    if !(0.0..1.0).contains(&config.known_fraction) || config.known_fraction == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "known fraction must be in (0, 1), got {}",
            config.known_fraction
        )));
    }
    if config.param_grid.is_empty() || config.n_realizations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one parameter and one realization".into(),
        ));
    }

    let state = match config.method {
        SslMethod::NormalizedLaplacian => {
            let w = from_graph(graph)?;
            MethodState::Regularized {
                x: normalized_laplacian(&w)?,
            }
        }
        SslMethod::RandomWalkLaplacian => {
            let w = from_graph(graph)?;
            MethodState::Regularized {
                x: random_walk_laplacian(&w)?,
            }
        }
        SslMethod::NormalizedLaplacianSym => {
            let w = from_graph(&symmetrize(graph))?;
            MethodState::Regularized {
                x: normalized_laplacian(&w)?,
            }
        }
        SslMethod::RandomWalkLaplacianSym => {
            let w = from_graph(&symmetrize(graph))?;
            MethodState::Regularized {
                x: random_walk_laplacian(&w)?,
            }
        }
        SslMethod::Moura => MethodState::Moura {
            w_norm: normalized_adjacency(graph)?,
        },
        SslMethod::L1HeatKernel { n_scales } => {
            let w = from_graph(graph)?;
            let l = normalized_laplacian(&w)?;
            let scales: Vec<f64> = (1..=n_scales as u32)
                .map(|j| f64::from(2u32.pow(j)))
                .collect();
            MethodState::L1 {
                bank: heat_kernel_bank(&l, &scales)?,
            }
        }
    };

    // Mask-independent systems are factored once per grid parameter.
    let prefactored: Option<Vec<Array2<f64>>> = match &state {
        MethodState::Regularized { x } => {
            let mut inverses = Vec::with_capacity(config.param_grid.len());
            for &gamma in &config.param_grid {
                if gamma < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "negative grid parameter {gamma}"
                    )));
                }
                let mut system = x * gamma;
                for i in 0..n {
                    system[[i, i]] += 1.0;
                }
                let inv = crate::linalg::pseudo_inverse(&system, 1e-14)?;
                inverses.push(inv);
            }
            Some(inverses)
        }
        _ => None,
    };

    let known_count = ((config.known_fraction * n as f64).ceil() as usize).clamp(1, n);
    let outcomes: Result<Vec<(f64, f64, bool)>> = (0..config.n_realizations)
        .into_par_iter()
        .map(|realization| {
            let mut rng = stream_rng(config.seed, realization as u64);
            let known = sample_without_replacement(n, known_count, &mut rng);
            let mut mask = vec![false; n];
            for &v in &known {
                mask[v] = true;
            }
            let reveal = |subset: &[usize]| -> Array1<f64> {
                let mut y = Array1::zeros(n);
                for &v in subset {
                    y[v] = labels[v];
                }
                y
            };
            let has_both =
                known.iter().any(|&v| labels[v] > 0.0) && known.iter().any(|&v| labels[v] < 0.0);

            // Internal holdout; the sampled order is already random.
            let fit_count = known.len().div_ceil(2);
            let revealed_fit = reveal(&known[..fit_count]);
            let mut validation_mask = vec![false; n];
            for &v in &known[fit_count..] {
                validation_mask[v] = true;
            }

            let mut best_param = config.param_grid[0];
            let mut best_val_acc = f64::NEG_INFINITY;
            for &param in &config.param_grid {
                let prediction = predict(
                    &state,
                    &prefactored,
                    &config.param_grid,
                    param,
                    &revealed_fit,
                )?;
                let val_acc = accuracy_on(&prediction, labels, &validation_mask, true);
                if val_acc > best_val_acc {
                    best_val_acc = val_acc;
                    best_param = param;
                }
            }
            let revealed_full = reveal(&known);
            let prediction = predict(
                &state,
                &prefactored,
                &config.param_grid,
                best_param,
                &revealed_full,
            )?;
            let unlabeled_acc = accuracy_on(&prediction, labels, &mask, false);
            Ok((unlabeled_acc, best_param, !has_both))
        })
        .collect();
    let outcomes = outcomes?;

    let r = outcomes.len() as f64;
    let mean_accuracy = outcomes.iter().map(|o| o.0).sum::<f64>() / r;
    let variance = outcomes
        .iter()
        .map(|o| (o.0 - mean_accuracy).powi(2))
        .sum::<f64>()
        / r;
    Ok(SslEvalResult {
        method: config.method.name(),
        known_fraction: config.known_fraction,
        mean_accuracy,
        std_accuracy: variance.sqrt(),
        mean_best_param: outcomes.iter().map(|o| o.1).sum::<f64>() / r,
        degenerate_splits: outcomes.iter().filter(|o| o.2).count(),
    })
}

fn predict(
    state: &MethodState,
    prefactored: &Option<Vec<Array2<f64>>>,
    grid: &[f64],
    param: f64,
    revealed: &Array1<f64>,
) -> Result<Array1<f64>> {
    match state {
        MethodState::Regularized { .. } => {
            let inverses = prefactored.as_ref().expect("prefactored with Regularized");
            let idx = grid
                .iter()
                .position(|&g| g == param)
                .expect("parameter from the grid");
            Ok(sign_plus(inverses[idx].dot(revealed)))
        }
        MethodState::Moura { w_norm } => {
            let problem = LabelProblem::new(revealed.clone(), param)?;
            ssl_l2_moura(&problem, w_norm)
        }
        MethodState::L1 { bank } => {
            let problem = LabelProblem::new(revealed.clone(), 0.0)?;
            Ok(ssl_l1(&problem, bank, param, 2000, 1e-9)?.signs)
        }
    }
}

fn accuracy_on(
    prediction: &Array1<f64>,
    truth: &Array1<f64>,
    mask: &[bool],
    on_known: bool,
) -> f64 {
    let mut total = 0usize;
    let mut hits = 0usize;
    for i in 0..truth.len() {
        if mask[i] == on_known {
            total += 1;
            if (prediction[i] - truth[i]).abs() < f64::EPSILON {
                hits += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        hits as f64 / total as f64
    }
}

fn sample_without_replacement(
    n: usize,
    count: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    use rand::Rng;
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}
