//! Random walk operators on directed graphs: transition matrices, stationary
//! distributions, the lazy / time-reversed / reversibilized / Google /
//! rank-one families, and the isometry between the counting and stationary
//! Hilbert spaces.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigVals, Solve};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::linalg::{positive_sqrt, scale_cols, scale_rows};

/// Entries of a stationary vector below this threshold make `Pi^{+-1/2}`
/// too ill-conditioned to use.
pub const PI_POSITIVITY_THRESHOLD: f64 = 1e-14;

/// Default tolerance for the stationary power iteration.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Default iteration cap for the stationary power iteration.
pub const STATIONARY_MAX_ITER: usize = 1_000_000;

/// A nonnegative vertex measure, e.g. the counting measure or a stationary
/// distribution used as an inner-product weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Array1<f64>,
}

impl Measure {
    pub fn new(weights: Array1<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "measure weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { weights })
    }

    /// Counting measure (all ones).
    pub fn counting(n: usize) -> Self {
        Self {
            weights: Array1::ones(n),
        }
    }

    /// Uniform probability measure (all `1/n`).
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: Array1::from_elem(n, 1.0 / n as f64),
        }
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// An ergodicity-annotated random walk: a row-stochastic transition matrix
/// together with its stationary distribution.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    transition: Array2<f64>,
    stationary: Array1<f64>,
    ergodic: bool,
    source_graph: Arc<DirectedGraph>,
}

impl RandomWalk {
    /// Transition matrix `P` (rows sum to one).
    pub fn transition(&self) -> &Array2<f64> {
        &self.transition
    }

    /// Stationary distribution `pi` with `pi P = pi`, `sum pi = 1`.
    pub fn stationary(&self) -> &Array1<f64> {
        &self.stationary
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }

    /// The graph this walk was originally built from.
    pub fn source_graph(&self) -> &Arc<DirectedGraph> {
        &self.source_graph
    }

    pub fn n_vertices(&self) -> usize {
        self.stationary.len()
    }

    /// Stationary measure as an inner-product weight.
    pub fn stationary_measure(&self) -> Measure {
        Measure {
            weights: self.stationary.clone(),
        }
    }
}

/// Builds the canonical random walk `P = D^{-1} W` on a strongly connected
/// graph. Fails on zero out-degree vertices (use [`google_matrix`] or
/// [`rank_one_walk`] for those) and on graphs that are not strongly
/// connected.
pub fn from_graph(g: &DirectedGraph) -> Result<RandomWalk> {
    if let Some(vertex) = g.out_degrees().iter().position(|&d| d <= 0.0) {
        return Err(Error::DanglingNode { vertex });
    }
    let sccs = crate::graph::strongly_connected_components(g);
    if sccs.len() != 1 {
        return Err(Error::NotStronglyConnected {
            n_components: sccs.len(),
        });
    }
    let mut p = g.adjacency_matrix();
    for (i, mut row) in p.rows_mut().into_iter().enumerate() {
        let d = g.out_degrees()[i];
        row.mapv_inplace(|w| w / d);
    }
    let stationary = stationary_direct(&p)?;
    let has_self_loop = g.edges().iter().any(|&(s, d, _)| s == d);
    let ergodic = has_self_loop || is_aperiodic_by_spectrum(&p)?;
    Ok(RandomWalk {
        transition: p,
        stationary,
        ergodic,
        source_graph: Arc::new(g.clone()),
    })
}

/// Aperiodicity check through the eigenvalue distribution: ergodic chains
/// have a simple eigenvalue 1 and everything else strictly inside the unit
/// circle.
fn is_aperiodic_by_spectrum(p: &Array2<f64>) -> Result<bool> {
    let eigvals = p.eigvals()?;
    let perron = eigvals
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (*a - 1.0).norm();
            let db = (*b - 1.0).norm();
            da.partial_cmp(&db).expect("finite eigenvalues")
        })
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    let second = eigvals
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != perron)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    Ok(second < 1.0 - 1e-12)
}

/// Stationary distribution by power iteration with l1 normalization.
///
/// Falls back to iterating on the lazy chain `(P + I)/2` when the plain
/// iteration stalls (periodic chains oscillate); both chains share the same
/// stationary vector. Convergence is declared when `||pi P - pi||_1 <= tol`.
pub fn compute_stationary(p: &Array2<f64>, tol: f64, max_iter: usize) -> Result<Array1<f64>> {
    let n = p.nrows();
    let mut pi = Array1::from_elem(n, 1.0 / n as f64);
    // After this many non-converged plain iterations, assume oscillation.
    let plain_budget = 512.min(max_iter);
    let mut lazy = false;
    let mut residual = f64::INFINITY;
    for iter in 0..max_iter {
        let next = pi.dot(p);
        residual = (&next - &pi).mapv(f64::abs).sum();
        if residual <= tol {
            return Ok(normalize_l1(next));
        }
        pi = if lazy { (&next + &pi) / 2.0 } else { next };
        pi = normalize_l1(pi);
        if !lazy && iter + 1 >= plain_budget {
            lazy = true;
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

fn normalize_l1(v: Array1<f64>) -> Array1<f64> {
    let s = v.sum();
    v / s
}

/// Stationary distribution by a direct linear solve: for an irreducible
/// chain, `(I - P^T + 1 1^T) pi = 1` has the stationary vector as its unique
/// solution. Exact to solver precision, used for all paper-scale graphs.
pub fn stationary_direct(p: &Array2<f64>) -> Result<Array1<f64>> {
    let n = p.nrows();
    let mut a = Array2::from_elem((n, n), 1.0);
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] += f64::from(u8::from(i == j)) - p[[j, i]];
        }
    }
    let b = Array1::ones(n);
    let pi = a
        .solve(&b)
        .map_err(|e| Error::Solver(format!("stationary solve failed: {e}")))?;
    Ok(normalize_l1(pi))
}

/// Lazy walk `P~_gamma = (1 - gamma) P + gamma I`; the stationary
/// distribution is unchanged.
pub fn lazy(w: &RandomWalk, gamma: f64) -> Result<RandomWalk> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "lazy parameter must be in [0, 1), got {gamma}"
        )));
    }
    let n = w.n_vertices();
    let mut p = w.transition() * (1.0 - gamma);
    for i in 0..n {
        p[[i, i]] += gamma;
    }
    Ok(RandomWalk {
        transition: p,
        stationary: w.stationary.clone(),
        // Self-loops remove periodicity on an irreducible chain.
        ergodic: w.ergodic || gamma > 0.0,
        source_graph: Arc::clone(&w.source_graph),
    })
}

/// Time-reversed walk `P* = Pi^{-1} P^T Pi`, the adjoint of `P` in
/// `l2(V, pi)`. Shares the stationary distribution of `P`.
pub fn time_reversal(w: &RandomWalk) -> Result<RandomWalk> {
    let pi = w.stationary();
    let min_entry = pi.iter().copied().fold(f64::INFINITY, f64::min);
    if min_entry <= PI_POSITIVITY_THRESHOLD {
        return Err(Error::DegenerateStationary { min_entry });
    }
    let inv_pi = pi.mapv(|v| 1.0 / v);
    let reversed = scale_rows(
        inv_pi.view(),
        &scale_cols(&w.transition().t().to_owned(), pi.view()),
    );
    Ok(RandomWalk {
        transition: reversed,
        stationary: w.stationary.clone(),
        ergodic: w.ergodic,
        source_graph: Arc::clone(&w.source_graph),
    })
}

/// Additive reversibilization family `P-_alpha = (1 - alpha) P + alpha P*`.
/// `alpha = 1/2` is the self-adjoint member in `l2(V, pi)`.
pub fn reversibilized(w: &RandomWalk, alpha: f64) -> Result<RandomWalk> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "reversibilization parameter must be in [0, 1], got {alpha}"
        )));
    }
    let reversed = time_reversal(w)?;
    let p = w.transition() * (1.0 - alpha) + reversed.transition() * alpha;
    Ok(RandomWalk {
        transition: p,
        stationary: w.stationary.clone(),
        ergodic: w.ergodic,
        source_graph: Arc::clone(&w.source_graph),
    })
}

/// Google matrix `P_G = (1 - gamma) S + gamma J` where `S` is the walk on
/// the graph with dangling rows replaced by all-ones and `J = 1 1^T / N`.
/// Always ergodic, defined for any graph.
pub fn google_matrix(g: &DirectedGraph, gamma: f64) -> Result<RandomWalk> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Google damping must satisfy 0 < gamma < 1, got {gamma}"
        )));
    }
    let n = g.n_vertices();
    let mut s = g.adjacency_matrix();
    for (i, mut row) in s.rows_mut().into_iter().enumerate() {
        let d = g.out_degrees()[i];
        if d > 0.0 {
            row.mapv_inplace(|w| w / d);
        } else {
            row.fill(1.0 / n as f64);
        }
    }
    let p = s * (1.0 - gamma) + gamma / n as f64;
    let stationary = stationary_direct(&p)?;
    Ok(RandomWalk {
        transition: p,
        stationary,
        ergodic: true,
        source_graph: Arc::new(g.clone()),
    })
}

/// Rank-one ergodicization: `W_eps = W + eps J`, `P_eps = D_eps^{-1} W_eps`.
/// Always ergodic, defined for any graph.
pub fn rank_one_walk(g: &DirectedGraph, epsilon: f64) -> Result<RandomWalk> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rank-one perturbation must be positive, got {epsilon}"
        )));
    }
    let n = g.n_vertices();
    let mut p = g.adjacency_matrix() + epsilon / n as f64;
    for mut row in p.rows_mut() {
        let d = row.sum();
        row.mapv_inplace(|w| w / d);
    }
    let stationary = stationary_direct(&p)?;
    Ok(RandomWalk {
        transition: p,
        stationary,
        ergodic: true,
        source_graph: Arc::new(g.clone()),
    })
}

/// The operator `T = Pi^{1/2} P Pi^{-1/2}` acting on `l2(V)`, similar to `P`
/// and symmetric whenever `P` is the reversibilization `P-_{1/2}`.
pub fn similar_operator_t(w: &RandomWalk) -> Result<Array2<f64>> {
    let sqrt_pi = positive_sqrt(w.stationary().view(), PI_POSITIVITY_THRESHOLD)?;
    let inv_sqrt_pi = sqrt_pi.mapv(|v| 1.0 / v);
    Ok(scale_rows(
        sqrt_pi.view(),
        &scale_cols(w.transition(), inv_sqrt_pi.view()),
    ))
}

/// The isometry `phi: l2(V) -> l2(V, pi)`, `f |-> Pi^{-1/2} f`.
pub fn isometry_to_pi(f: &Array1<f64>, pi: &Measure) -> Result<Array1<f64>> {
    let sqrt_pi = positive_sqrt(pi.weights().view(), PI_POSITIVITY_THRESHOLD)?;
    Ok(f / &sqrt_pi)
}

/// The inverse isometry `phi^{-1}: l2(V, pi) -> l2(V)`, `f |-> Pi^{1/2} f`.
pub fn isometry_from_pi(f: &Array1<f64>, pi: &Measure) -> Result<Array1<f64>> {
    let sqrt_pi = positive_sqrt(pi.weights().view(), PI_POSITIVITY_THRESHOLD)?;
    Ok(f * &sqrt_pi)
}
